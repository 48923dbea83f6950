"""Symmetric sparse storage and SPD solves."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .errors import DefinitenessError

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SparseSymMatrix:
    """Full (both triangles) CSR storage of a symmetric matrix."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_coo(cls, rows, cols, vals, n, drop_tol=1e-300):
        A = sp.coo_matrix((np.ravel(vals), (np.ravel(rows), np.ravel(cols))), shape=(n, n)).tocsr()
        A.sum_duplicates()
        return cls.from_scipy(A, drop_tol)

    @classmethod
    def from_scipy(cls, A, drop_tol=1e-300):
        A = sp.csr_matrix(A)
        A.data[np.abs(A.data) <= drop_tol] = 0.0
        A.eliminate_zeros()
        A.sort_indices()
        if not np.all(np.isfinite(A.data)):
            raise ValueError("matrix has non-finite entries")
        return cls(A.shape[0], A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data.copy())

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self):
        return len(self.data)

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def diagonal(self):
        return self.to_scipy().diagonal()

    def asymmetry(self):
        """max |A - A^T| relative to max |A|."""
        A = self.to_scipy()
        d = abs(A - A.T)
        return (d.max() if d.nnz else 0.0) / max(abs(A).max(), 1e-300)

    def submatrix(self, rows, cols):
        return self.to_scipy()[rows][:, cols]

    def write(self, path):
        A = self.to_scipy().tocoo()
        with open(path, "w") as fh:
            fh.writelines(f"{i} {j} {float(v)!r}\n" for i, j, v in zip(A.row, A.col, A.data))


def matvec(A, x):
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix {A.n}, vector {x.shape}")
    return kernels.csr_matvec(A.indptr, A.indices, A.data, x)


def dot(x, y):
    if np.shape(x) != np.shape(y):
        raise ValueError("dimension mismatch")
    return float(kernels.dot(np.ascontiguousarray(x, float), np.ascontiguousarray(y, float)))


def axpy(a, x, y):
    """Return ``a*x + y``."""
    if np.shape(x) != np.shape(y):
        raise ValueError("dimension mismatch")
    return a * np.asarray(x, float) + np.asarray(y, float)


def norm2(x):
    return float(np.sqrt(dot(x, x)))


def _as_sym(A):
    return A if isinstance(A, SparseSymMatrix) else SparseSymMatrix.from_scipy(A)


def spd_solve(A, b, tol=DEFAULT_TOL, method="direct", maxiter=None):
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    ``direct`` factors with a symmetric fill-reducing ordering and diagonal
    pivoting only, so every pivot is an LDL^T pivot; a non-positive one raises
    :class:`DefinitenessError`.  It then refines with residuals accumulated
    in ``np.longdouble`` and returns the solution in that precision.
    ``iterative`` runs Jacobi-preconditioned conjugate gradients in double.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    A = _as_sym(A)
    b = np.asarray(b, dtype=float)
    if b.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix {A.n}, rhs {b.shape}")
    bnorm = norm2(b)
    if bnorm == 0.0:
        return np.zeros(A.n)
    if method == "direct":
        x = _direct(A, b, tol, bnorm)
    elif method == "iterative":
        x = _pcg(A, b, tol, bnorm, maxiter or 20 * A.n)
    else:
        raise ValueError(f"unknown solver {method!r}")
    return x


def _direct(A, b, tol, bnorm):
    S = A.to_scipy().tocsc()
    try:
        lu = splu(S, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                  options={"SymmetricMode": True})
    except RuntimeError as exc:  # exactly singular
        raise DefinitenessError(f"factorization failed: {exc}") from exc
    if np.any(lu.perm_r != lu.perm_c):
        raise DefinitenessError("factorization needed off-diagonal pivoting; matrix is not SPD")
    piv = lu.U.diagonal()
    bad = np.flatnonzero(~(piv > 0))
    if bad.size:
        j = int(bad[0])
        orig = int(np.flatnonzero(lu.perm_c == j)[0])
        raise DefinitenessError(
            f"non-positive pivot {piv[j]:.3e} at step {j} (matrix index {orig})", pivot_index=orig
        )
    # mixed-precision refinement: residuals and the iterate live in extended
    # precision, since a double x cannot get below eps |A| |x| / |b|, which
    # exceeds 1e-10 on fine fourth-order systems
    x = lu.solve(b).astype(np.longdouble)
    for _ in range(4):
        r = _residual_ext(A, x, b)
        if _norm_ext(r) <= tol * bnorm:
            break
        x = x + lu.solve(r.astype(float))
    res = _norm_ext(_residual_ext(A, x, b))
    if res > tol * bnorm:
        log.warning("direct solve residual %.2e exceeds tolerance %.1e", res / bnorm, tol)
    return x


def _pcg(A, b, tol, bnorm, maxiter):
    d = A.diagonal()
    if np.any(d <= 0):
        j = int(np.flatnonzero(d <= 0)[0])
        raise DefinitenessError(f"non-positive diagonal entry at index {j}", pivot_index=j)
    minv = 1.0 / d
    x = np.zeros(A.n)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = dot(r, z)
    for it in range(maxiter):
        Ap = matvec(A, p)
        pAp = dot(p, Ap)
        if pAp <= 0:
            raise DefinitenessError(f"non-positive curvature at CG iteration {it}")
        alpha = rz / pAp
        x = axpy(alpha, p, x)
        r = axpy(-alpha, Ap, r)
        if norm2(r) <= tol * bnorm:
            return x
        z = minv * r
        rz_new = dot(r, z)
        p = axpy(rz_new / rz, p, z)
        rz = rz_new
    raise RuntimeError(f"CG did not reach tol {tol:g} in {maxiter} iterations")


def _residual_ext(A, x, b):
    """``b - A x`` accumulated in extended precision (``np.longdouble``)."""
    prod = A.data.astype(np.longdouble) * np.asarray(x, dtype=np.longdouble)[A.indices]
    ax = np.zeros(A.n, dtype=np.longdouble)
    rows = np.flatnonzero(np.diff(A.indptr))
    ax[rows] = np.add.reduceat(prod, A.indptr[rows])
    return np.asarray(b, dtype=np.longdouble) - ax


def _norm_ext(r):
    return float(np.sqrt(np.sum(r * r)))


def residual_norm(A, x, b):
    """Relative residual ``|Ax - b| / |b|``, with ``Ax`` accumulated in extended precision."""
    return _norm_ext(_residual_ext(_as_sym(A), x, b)) / max(norm2(b), 1e-300)
