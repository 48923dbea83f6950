import numpy as np
import pytest
import sympy as sp

from bihess.c0ip import (
    apply_clamped_bc,
    assemble_bilinear,
    assemble_load,
    assemble_system,
    default_gamma,
    energy_norm,
    seminorms_on_subdomain,
    solve,
    solve_biharmonic,
)
from bihess.errors import DefinitenessError, EvaluationError, InvalidArgumentError
from bihess.fem import build_space, interpolate, lattice_nodes
from bihess.linalg import residual_norm
from bihess.mesh import Triangulation, generate_uniform, make_mesh


def _bh(A, u):
    return u.coeffs @ (A.to_scipy() @ u.coeffs)


def test_default_gamma_values():
    assert [default_gamma(k) for k in (2, 3, 4)] == [6.5, 19.5, 39.0]


@pytest.mark.parametrize("n", [1, 2, 4])
def test_bh_of_x_is_2n_gamma(n):
    space = build_space(generate_uniform("regular", n), 2)
    gamma = 7.3
    A = assemble_bilinear(space, gamma)
    u = interpolate(lambda x, y: x, space)
    assert _bh(A, u) == pytest.approx(2 * n * gamma, rel=1e-10)


@pytest.mark.parametrize("pattern", ["regular", "crisscross", "delaunay"])
def test_constant_in_kernel_and_symmetry(pattern):
    space = build_space(make_mesh(pattern, 8 if pattern == "delaunay" else 3), 3)
    A = assemble_bilinear(space, default_gamma(3))
    one = interpolate(lambda x, y: np.ones_like(x), space)
    scale = abs(A.to_scipy()).max() * space.n_dofs
    assert abs(_bh(A, one)) <= 1e-14 * scale
    assert A.asymmetry() <= 1e-12


@pytest.mark.parametrize("pattern,k", [("regular", 2), ("unionjack", 3), ("equilateral", 4)])
def test_orientation_invariance(pattern, k):
    space = build_space(generate_uniform(pattern, 3), k)
    A = assemble_bilinear(space, 5.0).to_scipy()
    flip = np.random.default_rng(0).random(space.mesh.n_edges) < 0.5
    B = assemble_bilinear(space, 5.0, flip=flip).to_scipy()
    assert abs(A - B).max() <= 1e-12 * abs(A).max()


def test_invalid_gamma():
    space = build_space(generate_uniform("regular", 2), 2)
    with pytest.raises(InvalidArgumentError):
        assemble_bilinear(space, 0.0)


def test_small_gamma_loses_definiteness():
    space = build_space(generate_uniform("regular", 4), 2)
    with pytest.raises(DefinitenessError):
        solve_biharmonic(space, lambda x, y: np.ones_like(x), gamma=0.01)


def test_load_vector():
    space = build_space(generate_uniform("chevron", 3), 3)
    assert np.all(assemble_load(lambda x, y: np.zeros_like(x), space) == 0)
    assert assemble_load(lambda x, y: np.ones_like(x), space).sum() == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(EvaluationError):
        assemble_load(lambda x, y: np.full_like(x, np.nan), space)


@pytest.mark.parametrize("k", [2, 3])
def test_load_matches_symbolic_integration(k):
    mesh = Triangulation.from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])
    space = build_space(mesh, k)
    b = assemble_load(lambda x, y: x, space)
    x, y = sp.symbols("x y")
    monos = [x**i * y**(d - i) for d in range(k + 1) for i in range(d + 1)]
    nodes = [(sp.Rational(int(l1), k), sp.Rational(int(l2), k)) for _, l1, l2 in lattice_nodes(k)]
    V = sp.Matrix([[m.subs({x: px, y: py}) for m in monos] for px, py in nodes])
    coeffs = V.inv()  # column i holds the monomial coefficients of phi_i
    ints = sp.Matrix([sp.integrate(sp.integrate(x * m, (y, 0, 1 - x)), (x, 0, 1)) for m in monos])
    exact = np.array((coeffs.T * ints).evalf(), dtype=float).ravel()
    local = b[space.elem_dofs[0]]
    assert np.allclose(local, exact, rtol=1e-12, atol=1e-15)


def test_homogeneous_bc_structure():
    space = build_space(generate_uniform("regular", 3), 2)
    sys0 = assemble_system(space, lambda x, y: np.ones_like(x))
    sys1 = apply_clamped_bc(sys0)
    bd = space.boundary_dofs
    free = np.setdiff1d(np.arange(space.n_dofs), bd)
    assert np.all(sys1.rhs[bd] == 0)
    assert np.array_equal(sys1.rhs[free], sys0.rhs[free])
    A = sys1.matrix.to_scipy().toarray()
    assert np.array_equal(A[bd][:, bd], np.eye(len(bd)))
    assert np.all(A[bd][:, free] == 0)


@pytest.mark.parametrize(
    "k,p",
    [
        (2, lambda x, y: x**2 + x * y),
        (3, lambda x, y: x**3 - 2 * x * y**2 + y),
        (4, lambda x, y: x**2 * y**2 + x**3 * y),
    ],
)
def test_galerkin_exactness(k, p):
    """u in P_k with matching data and f = lap^2 u is reproduced exactly."""
    from bihess.bench import fd_biharmonic

    space = build_space(generate_uniform("regular", 4), k)
    h = 1e-5

    def grad(x, y):
        return np.stack([(p(x + h, y) - p(x - h, y)) / (2 * h), (p(x, y + h) - p(x, y - h)) / (2 * h)], -1)

    def g_N(x, y, nx, ny):
        g = grad(x, y)
        return g[..., 0] * nx + g[..., 1] * ny

    f0 = fd_biharmonic(p, 0.3, 0.4, 1e-2)
    u_h, system = solve_biharmonic(space, lambda x, y: np.full_like(x, round(f0)), p, g_N)
    assert np.abs(u_h.coeffs - interpolate(p, space).coeffs).max() <= 1e-8
    A, b = system.reduced()
    assert residual_norm(A, u_h.coeffs[system.free_dofs], b) <= 1e-10


def test_iterative_solver_agrees():
    from bihess.bench import square_solution

    ex = square_solution()
    space = build_space(generate_uniform("crisscross", 6), 2)
    u1, _ = solve_biharmonic(space, ex.f, method="direct")
    u2, _ = solve_biharmonic(space, ex.f, method="iterative")
    assert np.allclose(u1.coeffs, u2.coeffs, atol=1e-8)


def test_solve_respects_dirichlet_values():
    space = build_space(generate_uniform("regular", 3), 2)
    system = apply_clamped_bc(assemble_system(space, lambda x, y: np.zeros_like(x)), lambda x, y: 1 + x)
    u = solve(system)
    x = space.node_coords[space.boundary_dofs, 0]
    assert np.allclose(u.coeffs[space.boundary_dofs], 1 + x)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_energy_norm_hand_values(n):
    # x^2: element part 4, boundary jumps 4n, averages 8/n (boundary) + 4(n-1)/n + 2 (interior)
    space = build_space(generate_uniform("regular", n), 2)
    assert energy_norm(interpolate(lambda x, y: np.full_like(x, 3.0), space)) == pytest.approx(0, abs=1e-12)
    assert energy_norm(interpolate(lambda x, y: x + y, space)) ** 2 == pytest.approx(4 * n, rel=1e-12)
    expected = 6 + 4 * n + 4 * (n + 1) / n
    assert energy_norm(interpolate(lambda x, y: x**2, space)) ** 2 == pytest.approx(expected, rel=1e-12)


def test_energy_norm_against_exact_is_zero_for_interpolant():
    from bihess.bench import quadratic_solution

    ex = quadratic_solution(1.0, 2.0, -0.5)
    space = build_space(generate_uniform("chevron", 4), 2)
    assert energy_norm(interpolate(ex.u, space), exact=ex) == pytest.approx(0, abs=1e-10)


def test_subdomain_seminorms():
    from bihess.bench import square_solution

    space = build_space(generate_uniform("regular", 4), 2)
    v = interpolate(square_solution().u, space)
    full = energy_norm(v)
    T = space.mesh.n_triangles
    assert seminorms_on_subdomain(v, np.arange(T)) == pytest.approx(full, rel=1e-14)
    assert seminorms_on_subdomain(v, []) == 0
    left = np.flatnonzero(space.mesh.centroids()[:, 0] < 0.5)
    assert seminorms_on_subdomain(v, left) ** 2 == pytest.approx(full**2 / 2, rel=1e-12)
