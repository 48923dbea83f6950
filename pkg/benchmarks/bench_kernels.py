"""Compiled vs vectorised numpy timings of the hot kernels.

Input sizes mimic the k = 2 study on the regular 64 x 64 mesh.  Run with
``python3 benchmarks/bench_kernels.py [--repeat R]``.  Each line reports the
best-of-R wall time of both variants and the largest absolute difference of
their outputs.  The first compiled call (JIT warm-up) is excluded.
"""
import argparse
import timeit

import numpy as np

from bihess import kernels
from bihess._jit import USE_NUMBA


def _inputs(rng):
    T, Q, nb = 8192, 6, 6
    E, Qe, m = 12416, 3, 9
    N, M, P = 16641, 30, 10
    hess = rng.standard_normal((T, Q, nb, 2, 2))
    wdet = rng.random((T, Q))
    jump = rng.standard_normal((E, Qe, m))
    avg = rng.standard_normal((E, Qe, m))
    w = rng.random((E, Qe))
    pen = 1.0 + rng.random(E)
    rel = rng.uniform(-1, 1, (N, M, 2))
    counts = rng.integers(P + 2, M + 1, N)
    exps = np.array([(a, d - a) for d in range(4) for a in range(d, -1, -1)], dtype=np.int64)
    origin = rng.uniform(-0.3, 0.3, (N, 2))
    idx = rng.integers(0, N, (N, 24))
    indptr = np.arange(0, N * 25 + 1, 25, dtype=np.int64)
    indices = np.sort(np.hstack([np.arange(N)[:, None], idx]), axis=1).ravel().astype(np.int64)
    data = rng.standard_normal(indices.size)
    x = rng.standard_normal(N)
    return {
        "hessian_stiffness": (hess, wdet),
        "edge_matrices": (jump, avg, w, pen),
        "recovery_weights": (rel, counts, exps, origin),
        "csr_matvec": (indptr, indices, data, x),
        "dot": (x, x[::-1].copy()),
    }


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(u, v) for u, v in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    finite = np.isfinite(a) & np.isfinite(b)
    return float(np.max(np.abs(a[finite] - b[finite]), initial=0.0))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if not USE_NUMBA:
        print("# numba unavailable or disabled: *_jit runs as plain Python (expect it to be slow)")
    cases = _inputs(np.random.default_rng(args.seed))
    print(f"{'kernel':<20}{'jit [s]':>10}{'numpy [s]':>11}{'speedup':>9}{'max |diff|':>12}")
    for name, inputs in cases.items():
        jit = getattr(kernels, name + "_jit")
        vec = getattr(kernels, name + "_np")
        out_jit = jit(*inputs)  # warm-up compiles
        out_np = vec(*inputs)
        t_jit = min(timeit.repeat(lambda: jit(*inputs), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: vec(*inputs), number=1, repeat=args.repeat))
        print(f"{name:<20}{t_jit:>10.4f}{t_np:>11.4f}{t_np / t_jit:>9.2f}{_maxdiff(out_jit, out_np):>12.2e}")


if __name__ == "__main__":
    main()
