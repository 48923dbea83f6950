import os
import subprocess
import sys

import numpy as np
import pytest

from bihess import kernels
from bihess.fem.basis import monomial_exponents

RNG = np.random.default_rng(7)


def _cases():
    rel = RNG.uniform(-1, 1, (30, 16, 2))
    counts = RNG.integers(8, 17, 30)
    counts[0] = 5  # too few samples: infinite condition number
    return {
        "hessian_stiffness": (RNG.standard_normal((12, 6, 10, 2, 2)), RNG.random((12, 6))),
        "edge_matrices": (RNG.standard_normal((9, 4, 12)), RNG.standard_normal((9, 4, 12)),
                          RNG.random((9, 4)), 1 + RNG.random(9)),
        "recovery_weights": (rel, counts, np.array(monomial_exponents(2), dtype=np.int64),
                             RNG.uniform(-0.2, 0.2, (30, 2))),
        "csr_matvec": (np.array([0, 2, 3, 5]), np.array([0, 2, 1, 0, 2]),
                       RNG.standard_normal(5), RNG.standard_normal(3)),
        "dot": (RNG.standard_normal(50), RNG.standard_normal(50)),
    }


@pytest.mark.parametrize("name", list(_cases()))
def test_jit_and_numpy_variants_agree(name):
    args = _cases()[name]
    a = getattr(kernels, name + "_jit")(*args)
    b = getattr(kernels, name + "_np")(*args)
    if name == "recovery_weights":
        assert np.allclose(a[0], b[0], atol=1e-9)
        assert np.array_equal(np.isinf(a[1]), np.isinf(b[1]))
        fin = np.isfinite(a[1])
        assert np.allclose(a[1][fin], b[1][fin], rtol=1e-8)
        assert np.isinf(a[1][0])
    else:
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_recovery_weights_differentiate_quadratics():
    rel, counts, exps, origin = _cases()["recovery_weights"]
    w, cond = kernels.recovery_weights_np(rel, counts, exps, origin)
    vals = 1 + 2 * rel[..., 0] - rel[..., 1] + rel[..., 0] * rel[..., 1] + 3 * rel[..., 1] ** 2
    mask = np.arange(rel.shape[1])[None, :] < counts[:, None]
    g = np.einsum("nmd,nm->nd", w, np.where(mask, vals, 0))
    ok = np.isfinite(cond)
    expect = np.stack([2 + origin[:, 1], -1 + origin[:, 0] + 6 * origin[:, 1]], -1)
    assert np.allclose(g[ok], expect[ok], atol=1e-10)


def test_disable_jit_environment_switch():
    code = "from bihess import kernels; print(kernels.BACKEND, kernels.dot is kernels.dot_np)"
    env = dict(os.environ, BIHESS_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_solution_identical_across_backends():
    code = (
        "import numpy as np\n"
        "from bihess.bench import solve_square\n"
        "u, H, _ = solve_square('chevron', 2, 8)\n"
        "np.save('{path}', np.concatenate([u.coeffs, H.nodal().ravel()]))\n"
    )
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        outs = []
        for flag in ("0", "1"):
            path = os.path.join(d, f"out{flag}.npy")
            env = dict(os.environ, BIHESS_DISABLE_JIT=flag)
            subprocess.run([sys.executable, "-c", code.format(path=path)], env=env, check=True)
            outs.append(np.load(path))
    assert np.allclose(outs[0], outs[1], rtol=1e-9, atol=1e-9)
