import numpy as np
import pytest

from bihess.bench import square_solution
from bihess.errors import InvalidArgumentError
from bihess.fem import (
    EDGE,
    INTERIOR,
    VERTEX,
    FeFunction,
    build_space,
    eval_basis,
    interpolate,
    lattice_nodes,
    quadrature_for,
    read_coefficients,
    reference_element,
)
from bihess.mesh import generate_uniform


def test_quadrature_examples():
    rule = quadrature_for("element", 2)
    lam1 = rule.points[:, 0]
    assert rule.weights @ lam1**2 == pytest.approx(1 / 12, abs=1e-15)
    e = quadrature_for("edge", 3)
    assert e.weights @ e.points**3 == pytest.approx(0.25, abs=1e-14)
    assert quadrature_for("element", 8).weights.sum() == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        quadrature_for("tet", 2)
    with pytest.raises(InvalidArgumentError):
        quadrature_for("element", -1)


@pytest.mark.parametrize("deg", range(0, 13))
def test_quadrature_exact_on_monomials(deg):
    from math import factorial

    rule = quadrature_for("element", deg)
    assert rule.exactness_degree >= deg
    x, y = rule.ref_points.T
    for p in range(deg + 1):
        q = deg - p
        exact = factorial(p) * factorial(q) / factorial(p + q + 2)
        assert rule.weights @ (x**p * y**q) == pytest.approx(exact, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_basis_partition_of_unity_and_kronecker(k):
    rng = np.random.default_rng(k)
    for b in rng.dirichlet(np.ones(3), size=7):
        val, grad, hess = eval_basis(k, b)
        assert val.sum() == pytest.approx(1, abs=1e-12)
        assert np.allclose(grad.sum(axis=0), 0, atol=1e-10)
        assert np.allclose(hess.sum(axis=0), 0, atol=1e-9)
    nodes = lattice_nodes(k) / k
    v = np.array([eval_basis(k, b)[0] for b in nodes])
    assert np.allclose(v, np.eye(len(nodes)), atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        eval_basis(k, [0.5, 0.5, 0.5])


@pytest.mark.parametrize("k", [2, 3, 4])
def test_basis_derivatives_match_fd(k):
    ref = reference_element(k)
    p = np.array([[0.21, 0.33]])
    step = 1e-6
    _, g, _ = ref.tabulate(p)
    for d in range(2):
        e = np.zeros(2)
        e[d] = step
        vp, gp, _ = ref.tabulate(p + e)
        vm, gm, _ = ref.tabulate(p - e)
        assert np.allclose((vp - vm) / (2 * step), g[..., d], atol=1e-7)
    _, _, h = ref.tabulate(p)
    e = np.array([step, 0.0])
    _, gp, _ = ref.tabulate(p + e)
    _, gm, _ = ref.tabulate(p - e)
    assert np.allclose((gp - gm) / (2 * step), h[..., 0, :], atol=1e-5)


@pytest.mark.parametrize(
    "pattern,k,n_dofs", [("regular", 2, 9), ("regular", 3, 16), ("crisscross", 2, 13), ("regular", 4, 25)]
)
def test_dof_counts(pattern, k, n_dofs):
    assert build_space(generate_uniform(pattern, 1), k).n_dofs == n_dofs


def test_space_structure():
    mesh = generate_uniform("unionjack", 4)
    space = build_space(mesh, 3)
    # shared nodes have identical coordinates from every element
    coords = space.node_coords[space.elem_dofs]
    ref = reference_element(3)
    local = np.einsum("ni,tid->tnd", ref.bary, mesh.vertices[mesh.triangles])
    assert np.allclose(coords, local, atol=1e-14)
    assert np.array_equal(np.unique(space.elem_dofs), np.arange(space.n_dofs))
    x, y = space.node_coords[space.boundary_dofs].T
    on = np.isclose(x, 0) | np.isclose(x, 1) | np.isclose(y, 0) | np.isclose(y, 1)
    assert on.all()
    assert (np.isclose(space.node_coords[:, 0] % 1, 0) | np.isclose(space.node_coords[:, 1] % 1, 0)).sum() \
        == len(space.boundary_dofs)
    cat = space.node_category
    assert (cat == VERTEX).sum() == mesh.n_vertices
    assert (cat == EDGE).sum() == 2 * mesh.n_edges
    assert (cat == INTERIOR).sum() == mesh.n_triangles
    with pytest.raises(InvalidArgumentError):
        build_space(mesh, 5)


def test_node_kinds_on_regular_mesh():
    space = build_space(generate_uniform("regular", 8), 2)
    kinds = space.node_kind
    x, y = space.node_coords.T
    # interior vertices are one translation orbit
    inner = (space.node_category == VERTEX) & (x > 0.2) & (x < 0.8) & (y > 0.2) & (y < 0.8)
    assert len(np.unique(kinds[inner])) == 1
    # the three edge directions give three interior classes of edge nodes
    inner_e = (space.node_category == EDGE) & (x > 0.2) & (x < 0.8) & (y > 0.2) & (y < 0.8)
    assert len(np.unique(kinds[inner_e])) == 3
    assert len(space.kind_labels) == kinds.max() + 1


@pytest.mark.parametrize("k", [2, 3, 4])
def test_interpolation_reproduces_polynomials(k):
    space = build_space(generate_uniform("crisscross", 3), k)
    rng = np.random.default_rng(0)
    c = rng.standard_normal((k + 1, k + 1))

    def p(x, y):
        return sum(c[i, j] * x**i * y**j for i in range(k + 1) for j in range(k + 1 - i))

    u = interpolate(p, space)
    pts = rng.random((40, 2))
    assert np.allclose(u.evaluate(pts), p(pts[:, 0], pts[:, 1]), rtol=1e-12, atol=1e-12)


def test_interpolation_constant_and_order():
    space = build_space(generate_uniform("regular", 4), 2)
    assert np.all(interpolate(lambda x, y: np.ones_like(x), space).coeffs == 1)
    ex = square_solution()
    pts = np.random.default_rng(1).random((400, 2))
    errs = []
    for n in (16, 32):
        u = interpolate(ex.u, build_space(generate_uniform("regular", n), 2))
        errs.append(np.max(np.abs(u.evaluate(pts) - ex.u(*pts.T))))
    assert 8 * 0.8 <= errs[0] / errs[1] <= 8 * 1.2


def test_evaluate_derivatives():
    space = build_space(generate_uniform("chevron", 4), 2)
    pts = np.random.default_rng(2).random((10, 2)) * 0.9 + 0.05
    H = interpolate(lambda x, y: x**2, space).evaluate(pts, order=2)
    assert np.allclose(H, [[2, 0], [0, 0]], atol=1e-10)
    g = interpolate(lambda x, y: x + y, space).evaluate(pts, order=1)
    assert np.allclose(g, 1, atol=1e-12)
    u = interpolate(square_solution().u, space)
    h = 1e-6
    fd = np.stack([(u.evaluate(pts + [h, 0]) - u.evaluate(pts - [h, 0])) / (2 * h),
                   (u.evaluate(pts + [0, h]) - u.evaluate(pts - [0, h])) / (2 * h)], -1)
    g = u.evaluate(pts, order=1)
    assert np.allclose(fd, g, rtol=1e-5, atol=1e-7)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_interpolate_evaluate_roundtrip(k):
    space = build_space(generate_uniform("unionjack", 2), k)
    c = np.random.default_rng(k).standard_normal(space.n_dofs)
    u = FeFunction(space, c)
    back = interpolate(lambda x, y: u.evaluate(np.column_stack([x, y])), space)
    assert np.allclose(back.coeffs, c, atol=1e-12)


def test_fefunction_io_and_arithmetic(tmp_path):
    space = build_space(generate_uniform("regular", 2), 2)
    u = FeFunction(space, np.arange(space.n_dofs, dtype=float) / 7)
    path = tmp_path / "u.txt"
    u.write(path)
    assert path.read_text().startswith(f"dofs {space.n_dofs}\n")
    assert np.array_equal(read_coefficients(path)[0], u.coeffs)
    assert np.allclose((2 * u - u).coeffs, u.coeffs)
    with pytest.raises(ValueError):
        FeFunction(space, np.zeros(3))
