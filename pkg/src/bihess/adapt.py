"""Recovery-based error estimator, Dörfler marking and the adaptive loop."""
import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .c0ip import default_gamma, solve_biharmonic
from .errors import InvalidArgumentError, UndefinedEffectivityError
from .fem import build_space
from .fem.quadrature import quadrature_for
from .linalg import DEFAULT_TOL
from .mesh import refine_bisection
from .recovery import recover_hessian

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EstimatorField:
    """Per-element indicators ``eta_T = |H_h u_h - D2 u_h|_{0,T}``."""

    eta: np.ndarray

    @property
    def total(self):
        return float(np.sqrt(np.sum(self.eta**2)))


@dataclass(frozen=True)
class AdaptRecord:
    iter: int
    dofs: int
    eta_total: float
    h2_error: float = float("nan")
    kappa: float = float("nan")

    @property
    def h_eff(self):
        """Effective mesh size ``dofs^(-1/2)`` used as abscissa for rates."""
        return self.dofs ** -0.5


ADAPT_CSV_FIELDS = ("iter", "dofs", "eta_total", "h2_error", "kappa")


def _elementwise_sq(diff, rule, det):
    return np.einsum("tqab,tqab,q->t", diff, diff, rule.weights) * np.abs(det)


def estimate(u_h, H, degree=None):
    """Elementwise L2 (Frobenius) norm of ``H - D2 u_h``.

    The default quadrature degree 2k is exact for a recovered field of
    degree k.  Pass a higher ``degree`` when ``H`` is not a polynomial.
    """
    space = u_h.space
    rule = quadrature_for("element", 2 * space.degree if degree is None else degree)
    _, det, _ = space.jacobians()
    diff = H.at_reference(rule.ref_points) - u_h.at_reference(rule.ref_points, order=2)
    return EstimatorField(np.sqrt(_elementwise_sq(diff, rule, det)))


def broken_h2_error(u_h, exact_hess):
    """``(sum_T |D2 u - D2 u_h|_{0,T}^2)^(1/2)`` with quadrature of degree 2k+4."""
    space = u_h.space
    rule = quadrature_for("element", min(2 * space.degree + 4, 12))
    _, det, _ = space.jacobians()
    xy = space.map_points(rule.ref_points)
    diff = exact_hess(xy[..., 0], xy[..., 1]) - u_h.at_reference(rule.ref_points, order=2)
    return float(np.sqrt(np.sum(_elementwise_sq(diff, rule, det))))


def effectivity(estimator, exact_hess, u_h):
    """``kappa_h = eta / |D2 u - D2 u_h|`` (broken H2 seminorm)."""
    err = broken_h2_error(u_h, exact_hess)
    if err == 0.0:
        raise UndefinedEffectivityError("the true error is zero; effectivity is undefined")
    return estimator.total / err


def dorfler_mark(estimator, theta=0.5, squared=True):
    """Smallest set of elements carrying a bulk share of the estimator.

    Elements are taken by decreasing ``eta_T`` (ties by index) until
    ``sum eta_T^2 >= theta^2 sum eta^2`` (``theta`` instead of ``theta^2``
    when ``squared`` is false).  Returns sorted element indices.
    """
    if not 0 < theta <= 1:
        raise InvalidArgumentError("theta must lie in (0, 1]")
    eta2 = np.asarray(estimator.eta, dtype=float) ** 2
    order = np.lexsort((np.arange(len(eta2)), -eta2))
    csum = np.cumsum(eta2[order])
    if len(csum) == 0 or csum[-1] == 0.0:
        return np.zeros(0, dtype=np.int64)
    share = theta**2 if squared else theta
    target = share * csum[-1] * (1 - 1e-12)
    m = int(np.searchsorted(csum, target, side="left")) + 1
    return np.sort(order[:m])


@dataclass
class AdaptiveProblem:
    """Data of a clamped biharmonic problem solved adaptively.

    ``exact`` (an :class:`~bihess.bench.ExactSolution`-like object) is
    optional; when given, ``f``, ``g_D`` and ``g_N`` default to its data and
    the true error and effectivity are recorded.
    """

    mesh: object
    degree: int = 2
    exact: Optional[object] = None
    f: Optional[Callable] = None
    g_D: Optional[Callable] = None
    g_N: Optional[Callable] = None
    gamma: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exact is not None:
            self.f = self.f or self.exact.f
            self.g_D = self.g_D or self.exact.g_D
            self.g_N = self.g_N or self.exact.g_N
        if self.f is None:
            raise InvalidArgumentError("a load f (or an exact solution) is required")
        if self.gamma is None:
            self.gamma = default_gamma(self.degree)


def count_dofs(mesh, k):
    return mesh.n_vertices + (k - 1) * mesh.n_edges + (k - 1) * (k - 2) // 2 * mesh.n_triangles


def adaptive_loop(problem, max_dofs, theta=0.5, squared=True, same_type=False,
                  solver="direct", tol=DEFAULT_TOL, callback=None):
    """Solve, estimate, mark and refine until the next mesh would exceed ``max_dofs``.

    ``callback(record, mesh, u_h, estimator, marked)`` runs after every
    iteration (``marked`` is empty on the last).  Returns the records in order.
    """
    mesh = problem.mesh
    k = problem.degree
    records = []
    it = 0
    while True:
        t0 = time.perf_counter()
        space = build_space(mesh, k)
        try:
            u_h, _ = solve_biharmonic(space, problem.f, problem.g_D, problem.g_N,
                                      problem.gamma, tol=tol, method=solver)
        except Exception as exc:
            raise type(exc)(f"adaptive iteration {it} ({space.n_dofs} dofs): {exc}") from exc
        est = estimate(u_h, recover_hessian(u_h, same_type))
        err = kappa = float("nan")
        if problem.exact is not None:
            err = broken_h2_error(u_h, problem.exact.hess)
            kappa = est.total / err if err > 0 else float("nan")
        rec = AdaptRecord(it, space.n_dofs, est.total, err, kappa)
        records.append(rec)
        log.info("iter %d dofs %d eta %.3e err %.3e kappa %.3f (%.1fs)",
                 it, rec.dofs, rec.eta_total, err, kappa, time.perf_counter() - t0)

        marked = np.zeros(0, dtype=np.int64)
        if space.n_dofs < max_dofs:
            marked = dorfler_mark(est, theta, squared)
        new_mesh = refine_bisection(mesh, marked) if marked.size else None
        if new_mesh is not None and count_dofs(new_mesh, k) > max_dofs:
            new_mesh = None
            marked = np.zeros(0, dtype=np.int64)
        if callback is not None:
            callback(rec, mesh, u_h, est, marked)
        if new_mesh is None:
            return records
        mesh = new_mesh
        it += 1


def write_adapt_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ADAPT_CSV_FIELDS)
        for r in records:
            w.writerow([r.iter, r.dofs, f"{r.eta_total:.6e}", f"{r.h2_error:.6e}", f"{r.kappa:.6f}"])
