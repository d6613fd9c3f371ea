import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczlab import (
    Cochain,
    InvalidComplexError,
    InvalidDegreeError,
    LinearComplex,
    Mesh,
    MeshForm,
    SimplicialComplex,
    SpecError,
    betti_numbers,
    coboundary,
    derham_map,
    exterior_derivative,
    integrate_form,
    load_mesh,
    lphi_norm,
    make_exp,
    make_power,
    make_power_log,
    mesh_quadrature,
    pointwise_norm,
    whitney_interpolate,
)
from orliczlab.mesh import PiecewiseForm, barycentric_refinement, constant_form, graph_norm
from orliczlab.polyforms import PolyForm

GENERATORS = ["circle:n=12", "interval:n=5", "torus:m=4", "sphere:oct", "sphere:icosa", "ball2:h=0.5", "cube:m=1"]


@pytest.fixture(scope="module")
def meshes():
    return {name: load_mesh(name) for name in GENERATORS}


def right_triangle():
    return Mesh(SimplicialComplex.from_top([(0, 1, 2)]), [[0, 0], [1, 0], [0, 1]])


def _bary_points(n, count, seed):
    rng = np.random.default_rng(seed)
    B = rng.dirichlet(np.ones(n + 1), count)
    return B


def test_vertex_cochain_is_hat_function():
    mesh = right_triangle()
    X = mesh.complex
    for v in range(3):
        w = whitney_interpolate(mesh, Cochain.indicator(X, (v,)))
        B = _bary_points(2, 20, v)
        vals = w.piece(0)(B[:, 1:])[:, 0]
        np.testing.assert_allclose(vals, B[:, v], atol=1e-14)


def test_edge_cochain_formula():
    mesh = right_triangle()
    X = mesh.complex
    B = _bary_points(2, 15, 4)
    grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    for a, b in itertools.combinations(range(3), 2):
        w = whitney_interpolate(mesh, Cochain.indicator(X, (a, b)))
        vals = w.piece(0)(B[:, 1:])
        ref = B[:, [a]] * grads[b] - B[:, [b]] * grads[a]
        np.testing.assert_allclose(vals, ref, atol=1e-14)


@pytest.mark.parametrize("name", GENERATORS)
def test_whitney_property(meshes, name):
    mesh = meshes[name]
    rng = np.random.default_rng(1)
    for k in range(mesh.dim + 1):
        theta = Cochain(mesh.complex, k, rng.standard_normal(mesh.complex.count(k)))
        got = derham_map(mesh, whitney_interpolate(mesh, theta)).values
        np.testing.assert_allclose(got, theta.values, atol=1e-10)


@pytest.mark.parametrize("name", GENERATORS)
def test_stokes_for_whitney_forms(meshes, name):
    mesh = meshes[name]
    X = mesh.complex
    rng = np.random.default_rng(2)
    for k in range(mesh.dim):
        w = MeshForm(mesh, k, rng.standard_normal(X.count(k)))
        dw = PiecewiseForm(mesh, k + 1, [p.d() for p in w.pieces()])
        for idx, s in enumerate(X.simplices[k + 1]):
            lhs = integrate_form(mesh, dw, idx)
            rhs = sum(sign * integrate_form(mesh, w, face) for face, sign in X.boundary_faces(s))
            assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


def test_stokes_for_polynomial_forms_on_octahedron(meshes):
    mesh = meshes["sphere:oct"]
    X = mesh.complex
    rng = np.random.default_rng(3)
    pieces = [PolyForm(2, 1, rng.standard_normal((2, 3, 3))) for _ in range(mesh.n_tops)]
    omega = PiecewiseForm(mesh, 1, pieces)
    d_omega = exterior_derivative(omega)
    for T, s in enumerate(X.simplices[2]):
        # integrate on each top through its own piece, so use the local pieces directly
        lhs = integrate_form(mesh, d_omega, s)
        rhs = 0.0
        for face, sign in X.boundary_faces(s):
            verts = mesh.local_coords(T, face)
            E = verts[1] - verts[0]
            t, wt = np.polynomial.legendre.leggauss(6)
            pts = verts[0] + np.outer((t + 1) / 2, E)
            rhs += sign * 0.5 * float(wt @ (pieces[T](pts) @ E))
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


@pytest.mark.parametrize("name", ["torus:m=4", "sphere:icosa", "cube:m=1"])
def test_d_is_coboundary_and_dd_zero(meshes, name):
    mesh = meshes[name]
    X = mesh.complex
    rng = np.random.default_rng(4)
    for k in range(mesh.dim):
        theta = Cochain(X, k, rng.integers(-4, 5, X.count(k)).astype(float))
        w = whitney_interpolate(mesh, theta)
        np.testing.assert_array_equal(exterior_derivative(w).coefficients, coboundary(theta).values)
        if k + 1 < mesh.dim:
            assert not np.any(exterior_derivative(exterior_derivative(w)).coefficients)
        # the piecewise derivative of the Whitney form is the Whitney form of the coboundary
        dw = PiecewiseForm(mesh, k + 1, [p.d() for p in w.pieces()])
        B = _bary_points(mesh.dim, 6, k)[:, 1:]
        np.testing.assert_allclose(dw.nodal_values(B), exterior_derivative(w).nodal_values(B), atol=1e-12)


def test_top_degree_derivative(meshes):
    mesh = meshes["circle:n=12"]
    theta = Cochain(mesh.complex, 1, np.ones(12))
    assert coboundary(theta).values.size == 0
    with pytest.raises(InvalidDegreeError):
        exterior_derivative(whitney_interpolate(mesh, theta))


def test_pointwise_norm_examples():
    mesh = right_triangle()
    dx = constant_form(mesh, 1, [1.0, 0.0])
    assert pointwise_norm(mesh, dx, 0, [0.2, 0.3, 0.5]) == pytest.approx(1.0, abs=1e-15)
    zero = MeshForm(mesh, 1, np.zeros(3))
    assert pointwise_norm(mesh, zero, 0, [1 / 3] * 3) == 0.0
    area = constant_form(mesh, 2, [3.0])
    assert pointwise_norm(mesh, area, 0, [1 / 3] * 3) == pytest.approx(3.0, abs=1e-14)
    # brute force: sup of |3 det(u, v)| over random unit vectors
    rng = np.random.default_rng(0)
    U = rng.standard_normal((10_000, 2, 2))
    U /= np.linalg.norm(U, axis=2, keepdims=True)
    assert np.max(np.abs(3 * np.linalg.det(U))) == pytest.approx(3.0, abs=1e-3)


def test_comass_of_two_form_in_a_tetrahedron():
    mesh = Mesh(SimplicialComplex.from_top([(0, 1, 2, 3)]), [[0, 0, 0], [2, 0, 0], [0, 1, 0], [0.3, 0.2, 1.5]])
    # dx^dy + 2 dy^dz, components ordered (xy, xz, yz)
    omega = constant_form(mesh, 2, [1.0, 0.0, 2.0])
    got = pointwise_norm(mesh, omega, 0, [0.25] * 4)
    rng = np.random.default_rng(1)
    U = rng.standard_normal((200_000, 2, 3))
    U /= np.linalg.norm(U, axis=2, keepdims=True)
    xy = U[:, 0, 0] * U[:, 1, 1] - U[:, 0, 1] * U[:, 1, 0]
    yz = U[:, 0, 1] * U[:, 1, 2] - U[:, 0, 2] * U[:, 1, 1]
    brute = np.max(np.abs(xy + 2 * yz))
    assert got == pytest.approx(math.sqrt(5), rel=1e-12)
    assert brute <= got + 1e-12
    assert brute == pytest.approx(got, abs=1e-2)


def test_lphi_norm_examples(meshes):
    mesh = meshes["sphere:oct"]
    V = mesh.total_volume
    for p in (1.0, 2.0, 3.0):
        c = MeshForm(mesh, 0, np.full(6, -2.5))
        assert lphi_norm(make_power(p), mesh, c) == pytest.approx(2.5 * V ** (1 / p), rel=1e-10)
    assert lphi_norm(make_power(2), mesh, MeshForm(mesh, 1, np.zeros(12))) == 0.0
    torus = load_mesh("torus:m=8")
    dx = constant_form(torus, 1, [1.0, 0.0])
    assert torus.total_volume == pytest.approx(1.0, rel=1e-14)
    assert lphi_norm(make_power(2), torus, dx) == pytest.approx(1.0, rel=1e-10)
    # d(dx) = 0, so the graph norm equals the norm
    assert graph_norm(make_power(2), torus, dx) == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(-20, 20), spec=st.sampled_from(["power:p=2", "powerlog:p=1.5,kappa=1", "exp"]))
def test_lphi_homogeneity(seed, c, spec):
    from orliczlab import parse_phi

    mesh = load_mesh("sphere:oct")
    quad = mesh_quadrature(mesh)
    w = MeshForm(mesh, 1, np.random.default_rng(seed).standard_normal(12))
    phi = parse_phi(spec)
    assert lphi_norm(phi, mesh, w * c, quad) == pytest.approx(abs(c) * lphi_norm(phi, mesh, w, quad), rel=1e-9, abs=1e-300)


def test_integrate_zero_form_at_vertex_and_orientation(meshes):
    mesh = meshes["torus:m=4"]
    X = mesh.complex
    vals = np.arange(X.count(0), dtype=float)
    f = MeshForm(mesh, 0, vals)
    assert integrate_form(mesh, f, (5,)) == 5.0
    w = MeshForm(mesh, 1, np.random.default_rng(0).standard_normal(X.count(1)))
    a, b = X.simplices[1][3]
    assert integrate_form(mesh, w, (b, a)) == -integrate_form(mesh, w, (a, b))
    with pytest.raises(InvalidDegreeError):
        integrate_form(mesh, w, (a,))


def test_quadrature_volumes(meshes):
    for name, mesh in meshes.items():
        quad = mesh_quadrature(mesh)
        assert np.all(quad.weights > 0)
        np.testing.assert_allclose(quad.weights.sum(axis=1), mesh.volumes, rtol=1e-13)
    assert meshes["sphere:oct"].total_volume == pytest.approx(8 * math.sqrt(3) / 2, rel=1e-14)
    assert meshes["cube:m=1"].total_volume == pytest.approx(1.0, rel=1e-14)
    assert meshes["circle:n=12"].total_volume == pytest.approx(24 * math.sin(math.pi / 12), rel=1e-14)


@pytest.mark.parametrize(
    "spec, betti",
    [("circle:n=5", [1, 1]), ("torus:m=3", [1, 2, 1]), ("sphere:oct", [1, 0, 1]), ("ball2:h=0.5", [1, 0, 0]),
     ("bary:k=1,inner=sphere:oct", [1, 0, 1])],
)
def test_generators_have_expected_topology(spec, betti):
    mesh = load_mesh(spec)
    assert betti_numbers(LinearComplex.from_simplicial(mesh.complex)) == betti
    assert mesh.bilipschitz >= 1 and math.isfinite(mesh.bilipschitz)


def test_refinement():
    assert load_mesh("circle:n=6", refine=2).complex.count(1) == 24
    assert load_mesh("torus:m=3", refine=1).complex.count(2) == 2 * 36
    oct1 = load_mesh("sphere:oct", refine=1)
    assert oct1.complex.count(2) == 32
    assert betti_numbers(LinearComplex.from_simplicial(oct1.complex)) == [1, 0, 1]
    bary = barycentric_refinement(load_mesh("sphere:oct"))
    assert bary.complex.count(2) == 6 * 8
    assert bary.total_volume == pytest.approx(load_mesh("sphere:oct").total_volume, rel=1e-13)


def test_mesh_json_round_trip(tmp_path, meshes):
    mesh = meshes["torus:m=4"]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(mesh.to_json()))
    back = load_mesh(str(path))
    assert back.metric == "torus"
    np.testing.assert_array_equal(back.coordinates, mesh.coordinates)
    np.testing.assert_allclose(back.volumes, mesh.volumes, rtol=1e-15)


@pytest.mark.parametrize("spec", ["nosuch:n=3", "circle:n=x", "sphere:cube", "/does/not/exist.json"])
def test_bad_mesh_specs(spec):
    with pytest.raises((SpecError, FileNotFoundError)):
        load_mesh(spec)


def test_degenerate_simplex_rejected():
    with pytest.raises(InvalidComplexError):
        Mesh(SimplicialComplex.from_top([(0, 1, 2)]), [[0, 0], [1, 0], [2, 0]])


def test_exp_norm_of_constant_form_closed_form(meshes):
    # int phi(c/a) dV = 1 with phi = e^t - 1  =>  a = c / log(1 + 1/V)
    mesh = meshes["sphere:icosa"]
    V = mesh.total_volume
    f = MeshForm(mesh, 0, np.full(mesh.complex.count(0), 1.7))
    assert lphi_norm(make_exp(), mesh, f) == pytest.approx(1.7 / math.log1p(1 / V), rel=1e-10)
    assert lphi_norm(make_power_log(1, 0), mesh, f) == pytest.approx(1.7 * V, rel=1e-10)
