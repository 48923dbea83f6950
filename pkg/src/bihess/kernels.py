"""Hot inner loops.

Every kernel exists twice: a compiled loop version (``*_jit``) and a
vectorised numpy version (``*_np``).  The public name binds to one of them
according to ``BIHESS_DISABLE_JIT`` (see :mod:`bihess._jit`).  Both variants
are always importable so they can be benchmarked against each other.
"""
import numpy as np

from ._jit import USE_NUMBA, njit


# --- element Hessian stiffness ------------------------------------------------

@njit(cache=True)
def hessian_stiffness_jit(hess, wdet):
    T, Q, nb = hess.shape[0], hess.shape[1], hess.shape[2]
    out = np.zeros((T, nb, nb))
    for t in range(T):
        for q in range(Q):
            w = wdet[t, q]
            for i in range(nb):
                hi = hess[t, q, i]
                for j in range(i, nb):
                    hj = hess[t, q, j]
                    s = (hi[0, 0] * hj[0, 0] + hi[0, 1] * hj[0, 1]
                         + hi[1, 0] * hj[1, 0] + hi[1, 1] * hj[1, 1])
                    out[t, i, j] += w * s
        for i in range(nb):
            for j in range(i + 1, nb):
                out[t, j, i] = out[t, i, j]
    return out


def hessian_stiffness_np(hess, wdet):
    """Local matrices ``K[t,i,j] = sum_q w[t,q] D2phi_i : D2phi_j``."""
    h = hess.reshape(hess.shape[:3] + (4,))
    return np.einsum("tqia,tqja,tq->tij", h, h, wdet, optimize=True)


# --- edge penalty / consistency terms -----------------------------------------

@njit(cache=True)
def edge_matrices_jit(jump, avg, w, pen):
    E, Q, m = jump.shape
    out = np.zeros((E, m, m))
    for e in range(E):
        p = pen[e]
        for q in range(Q):
            wq = w[e, q]
            for i in range(m):
                ji = jump[e, q, i]
                ai = avg[e, q, i]
                for j in range(i, m):
                    jj = jump[e, q, j]
                    out[e, i, j] += wq * (ji * avg[e, q, j] + ai * jj + p * ji * jj)
        for i in range(m):
            for j in range(i + 1, m):
                out[e, j, i] = out[e, i, j]
    return out


def edge_matrices_np(jump, avg, w, pen):
    """``M[e,i,j] = sum_q w (J_i A_j + A_i J_j + pen J_i J_j)``."""
    ja = np.einsum("eqi,eqj,eq->eij", jump, avg, w, optimize=True)
    jj = np.einsum("eqi,eqj,eq->eij", jump, jump, w, optimize=True)
    return ja + ja.transpose(0, 2, 1) + pen[:, None, None] * jj


# --- least-squares recovery weights -------------------------------------------

@njit(cache=True)
def recovery_weights_jit(rel, counts, exps, origin):
    """Weights mapping sample values to the gradient of the least-squares fit.

    rel : (N, M, 2) scaled sample coordinates, padded past ``counts``.
    exps : (P, 2) monomial exponents of the fitting space.
    origin : (N, 2) scaled coordinates of the point where the gradient is taken.
    Returns weights (N, M, 2) and condition numbers of the normal matrices.
    """
    N, M = rel.shape[0], rel.shape[1]
    P = exps.shape[0]
    wts = np.zeros((N, M, 2))
    cond = np.empty(N)
    dmono = np.zeros((P, 2))
    for n in range(N):
        m = counts[n]
        if m < P:
            cond[n] = np.inf
            continue
        V = np.empty((m, P))
        for j in range(m):
            x = rel[n, j, 0]
            y = rel[n, j, 1]
            for c in range(P):
                V[j, c] = x ** exps[c, 0] * y ** exps[c, 1]
        ox, oy = origin[n, 0], origin[n, 1]
        for c in range(P):
            a, b = exps[c, 0], exps[c, 1]
            dmono[c, 0] = a * ox ** (a - 1) * oy**b if a > 0 else 0.0
            dmono[c, 1] = b * ox**a * oy ** (b - 1) if b > 0 else 0.0
        U, s, Vt = np.linalg.svd(V, full_matrices=False)
        if s[-1] <= 0.0:
            cond[n] = np.inf
            continue
        cond[n] = (s[0] / s[-1]) ** 2
        # pinv = Vt.T diag(1/s) U.T
        for d in range(2):
            for r in range(P):
                coef = 0.0
                for c in range(P):
                    coef += dmono[c, d] * Vt[r, c]
                coef /= s[r]
                for j in range(m):
                    wts[n, j, d] += coef * U[j, r]
    return wts, cond


def _dmono(origin, exps):
    a, b = exps[:, 0], exps[:, 1]
    ox, oy = origin[:, 0, None], origin[:, 1, None]
    dx = np.where(a > 0, a * ox ** np.maximum(a - 1, 0) * oy**b, 0.0)
    dy = np.where(b > 0, b * ox**a * oy ** np.maximum(b - 1, 0), 0.0)
    return np.stack([dx, dy], axis=-1)  # (N, P, 2)


def recovery_weights_np(rel, counts, exps, origin):
    N, M = rel.shape[0], rel.shape[1]
    P = exps.shape[0]
    wts = np.zeros((N, M, 2))
    cond = np.full(N, np.inf)
    dmono = _dmono(origin, exps)
    for m in np.unique(counts):
        if m < P:
            continue
        idx = np.flatnonzero(counts == m)
        r = rel[idx, :m]
        V = r[..., 0, None] ** exps[:, 0] * r[..., 1, None] ** exps[:, 1]
        U, s, Vt = np.linalg.svd(V, full_matrices=False)
        ok = s[:, -1] > 0
        cond[idx[ok]] = (s[ok, 0] / s[ok, -1]) ** 2
        s_inv = np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), 0.0)
        coef = np.einsum("ncd,nrc,nr->nrd", dmono[idx], Vt, s_inv)
        wts[idx, :m, :] = np.einsum("nrd,njr->njd", coef, U) * ok[:, None, None]
    return wts, cond


# --- sparse matvec and reductions ----------------------------------------------

@njit(cache=True)
def csr_matvec_jit(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        y[i] = acc
    return y


def csr_matvec_np(indptr, indices, data, x):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    return np.bincount(rows, weights=data * x[indices], minlength=len(indptr) - 1)


@njit(cache=True)
def dot_jit(x, y):
    acc = 0.0
    for i in range(x.shape[0]):
        acc += x[i] * y[i]
    return acc


def dot_np(x, y):
    return float(np.add.reduce(x * y))


if USE_NUMBA:
    hessian_stiffness = hessian_stiffness_jit
    edge_matrices = edge_matrices_jit
    recovery_weights = recovery_weights_jit
    csr_matvec = csr_matvec_jit
    dot = dot_jit
else:
    hessian_stiffness = hessian_stiffness_np
    edge_matrices = edge_matrices_np
    recovery_weights = recovery_weights_np
    csr_matvec = csr_matvec_np
    dot = dot_np

BACKEND = "numba" if USE_NUMBA else "numpy"
