import numpy as np
import pytest
import scipy.sparse as sps

from bihess.errors import DefinitenessError
from bihess.linalg import SparseSymMatrix, axpy, dot, matvec, norm2, residual_norm, spd_solve


def _random_spd(n, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    return M @ M.T + n * np.eye(n)


@pytest.mark.parametrize("method", ["direct", "iterative"])
def test_identity_and_2x2(method):
    b = np.array([3.0, -1.0, 2.0])
    assert np.allclose(spd_solve(SparseSymMatrix.from_scipy(sps.eye(3)), b, method=method), b)
    A = SparseSymMatrix.from_scipy(np.array([[4.0, 1.0], [1.0, 3.0]]))
    assert np.allclose(spd_solve(A, np.array([1.0, 2.0]), method=method), [1 / 11, 7 / 11], atol=1e-12)


@pytest.mark.parametrize("method", ["direct", "iterative"])
def test_random_spd_residual(method):
    D = _random_spd(40, 1)
    A = SparseSymMatrix.from_scipy(D)
    b = np.random.default_rng(2).standard_normal(40)
    x = spd_solve(A, b, method=method)
    assert residual_norm(A, x, b) <= 1e-10
    assert np.allclose(x, np.linalg.solve(D, b), rtol=1e-8)


def test_zero_rhs_and_errors():
    A = SparseSymMatrix.from_scipy(_random_spd(5))
    assert np.all(spd_solve(A, np.zeros(5)) == 0)
    with pytest.raises(ValueError):
        spd_solve(A, np.ones(4))
    with pytest.raises(ValueError):
        spd_solve(A, np.ones(5), tol=1.0)
    with pytest.raises(ValueError):
        spd_solve(A, np.ones(5), method="qr")


def test_indefinite_raises():
    A = SparseSymMatrix.from_scipy(np.diag([1.0, -2.0, 3.0]))
    with pytest.raises(DefinitenessError) as info:
        spd_solve(A, np.ones(3))
    assert isinstance(info.value, np.linalg.LinAlgError)


def test_matvec_helpers():
    D = _random_spd(20, 3)
    A = SparseSymMatrix.from_scipy(D)
    x = np.random.default_rng(4).standard_normal(20)
    assert np.allclose(matvec(A, x), D @ x, rtol=1e-13, atol=1e-12)
    assert np.all(matvec(A, np.zeros(20)) == 0)
    eye = SparseSymMatrix.from_scipy(sps.eye(20))
    assert np.array_equal(matvec(eye, x), x)
    assert dot(x, x) == pytest.approx(x @ x)
    assert norm2(x) == pytest.approx(np.linalg.norm(x))
    assert np.allclose(axpy(2.0, x, x), 3 * x)
    with pytest.raises(ValueError):
        matvec(A, np.ones(3))
    with pytest.raises(ValueError):
        dot(x, x[:3])


def test_from_coo_sums_duplicates_and_io(tmp_path):
    A = SparseSymMatrix.from_coo([0, 0, 1], [0, 0, 1], [1.0, 2.0, 5.0], 2)
    assert np.array_equal(A.to_scipy().toarray(), [[3, 0], [0, 5]])
    assert A.nnz == 2
    path = tmp_path / "A.txt"
    A.write(path)
    assert path.read_text().split("\n")[:2] == ["0 0 3.0", "1 1 5.0"]
    with pytest.raises(ValueError):
        SparseSymMatrix.from_scipy(np.array([[np.inf]]))


def test_biharmonic_system_residual():
    from bihess.bench import solve_square

    for solver in ("direct", "iterative"):
        u_h, _, system = solve_square("regular", 2, 16, solver=solver)
        A, b = system.reduced()
        assert residual_norm(A, u_h.coeffs[system.free_dofs], b) <= 1e-10
