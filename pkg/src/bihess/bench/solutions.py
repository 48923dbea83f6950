"""Closed-form test problems."""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

PI = np.pi


@dataclass(frozen=True)
class ExactSolution:
    """``u`` with its first and second derivatives and load ``f = lap^2 u``.

    ``grad`` returns shape (..., 2) and ``hess`` shape (..., 2, 2).
    """

    name: str
    u: Callable
    grad: Callable
    hess: Callable
    f: Callable
    singular_points: tuple = field(default=())

    def g_D(self, x, y):
        return self.u(x, y)

    def g_N(self, x, y, nx, ny):
        g = self.grad(x, y)
        return g[..., 0] * nx + g[..., 1] * ny


def _mat(xx, xy, yy):
    return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -2)


def square_solution():
    """``u = sin^2(pi x) sin^2(pi y)`` on the unit square (clamped)."""

    def s2(t):
        return np.sin(PI * t) ** 2

    def d1(t):
        return PI * np.sin(2 * PI * t)

    def d2(t):
        return 2 * PI**2 * np.cos(2 * PI * t)

    def d4(t):
        return -8 * PI**4 * np.cos(2 * PI * t)

    def u(x, y):
        return s2(x) * s2(y)

    def grad(x, y):
        return np.stack(np.broadcast_arrays(d1(x) * s2(y), s2(x) * d1(y)), -1)

    def hess(x, y):
        x, y = np.broadcast_arrays(x, y)
        return _mat(d2(x) * s2(y), d1(x) * d1(y), s2(x) * d2(y))

    def f(x, y):
        return d4(x) * s2(y) + 2 * d2(x) * d2(y) + s2(x) * d4(y)

    return ExactSolution("square", u, grad, hess, f)


def lshape_solution(alpha=5 / 3):
    """``u = r^alpha sin(alpha theta)`` on the L-shaped domain, theta in [0, 3 pi / 2].

    ``u`` is the imaginary part of ``z^alpha``, hence harmonic and biharmonic.
    With ``F = z^alpha``: ``F' = u_y + i u_x`` and ``F'' = u_xy + i u_xx``.
    """

    def polar(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r = np.hypot(x, y)
        th = np.arctan2(y, x)
        th = np.where(th < 0, th + 2 * PI, th)
        return r, th

    def u(x, y):
        r, th = polar(x, y)
        return r**alpha * np.sin(alpha * th)

    def grad(x, y):
        r, th = polar(x, y)
        mag = alpha * r ** (alpha - 1)
        ph = (alpha - 1) * th
        return np.stack([mag * np.sin(ph), mag * np.cos(ph)], -1)

    def hess(x, y):
        # singular at the corner: every entry is +inf there
        r, th = polar(x, y)
        mag = alpha * (alpha - 1) * np.where(r > 0, r, 1.0) ** (alpha - 2)
        ph = (alpha - 2) * th
        uxx = np.where(r > 0, mag * np.sin(ph), np.inf)
        uxy = np.where(r > 0, mag * np.cos(ph), np.inf)
        return _mat(uxx, uxy, np.where(r > 0, -uxx, np.inf))

    def f(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return ExactSolution("lshape", u, grad, hess, f, singular_points=((0.0, 0.0),))


def quadratic_solution(a=1.0, b=0.0, c=0.0):
    """``u = a x^2 + b x y + c y^2``; exactly representable for k >= 2."""

    def u(x, y):
        return a * x**2 + b * x * y + c * y**2

    def grad(x, y):
        return np.stack(np.broadcast_arrays(2 * a * x + b * y, b * x + 2 * c * y), -1)

    def hess(x, y):
        shape = np.broadcast(x, y).shape
        return _mat(np.full(shape, 2 * a), np.full(shape, float(b)), np.full(shape, 2 * c))

    def f(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return ExactSolution("quadratic", u, grad, hess, f)


def fd_biharmonic(u, x, y, h=1e-2):
    """13-point finite-difference ``lap^2 u`` (second order in ``h``).

    Round-off grows like ``eps / h^4``; ``h = 1e-2`` balances it against the
    ``O(h^2)`` truncation error for the solutions in this module.
    """

    def U(i, j):
        return u(x + i * h, y + j * h)

    return (
        20 * U(0, 0)
        - 8 * (U(1, 0) + U(-1, 0) + U(0, 1) + U(0, -1))
        + 2 * (U(1, 1) + U(1, -1) + U(-1, 1) + U(-1, -1))
        + U(2, 0) + U(-2, 0) + U(0, 2) + U(0, -2)
    ) / h**4
