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
    InvalidParameterError,
    NotFoundError,
    SimplicialComplex,
    barycentric_subdivision,
    coboundary,
    coboundary_norm_estimate,
    cochain_norm,
    geometry_stats,
    make_power,
)
from orliczlab.mesh import circle, cube, disk, icosahedron, octahedron, torus
from orliczlab.simplicial import permutation_sign

TRIANGLE = SimplicialComplex.from_top([(0, 1, 2)])
EDGE = SimplicialComplex.from_top([(0, 1)])

COMPLEXES = {
    "triangle": TRIANGLE,
    "circle": circle(7).complex,
    "torus": torus(4).complex,
    "octahedron": octahedron().complex,
    "icosahedron": icosahedron().complex,
    "disk": disk(0.5).complex,
    "cube": cube(1).complex,
}


def _inversions(seq):
    return sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])


def _brute_coboundary(theta: Cochain, sigma):
    """Signed face sum, with face values looked up through every ordering."""
    total = 0.0
    for i in range(len(sigma)):
        face = sigma[:i] + sigma[i + 1 :]
        idx = theta.complex.index[len(face) - 1][tuple(sorted(face))]
        total += (-1) ** i * (-1) ** _inversions(face) * theta.values[idx]
    return total


def test_boundary_faces():
    assert EDGE.boundary_faces((0, 1)) == [((1,), 1), ((0,), -1)]
    assert [s for _, s in TRIANGLE.boundary_faces((0, 1, 2))] == [1, -1, 1]
    with pytest.raises(InvalidParameterError):
        TRIANGLE.boundary_faces((0,))
    with pytest.raises(NotFoundError):
        EDGE.boundary_faces((0, 2))


def test_vertex_coboundary_is_difference():
    theta = Cochain(EDGE, 0, [2.5, -1.0])
    assert coboundary(theta)((0, 1)) == -1.0 - 2.5


def test_triangle_coboundary_of_constant_edges():
    theta = Cochain(TRIANGLE, 1, np.ones(3))
    assert coboundary(theta).values[0] == 1.0
    assert _brute_coboundary(theta, (0, 1, 2)) == 1.0


@pytest.mark.parametrize("name", sorted(COMPLEXES))
def test_coboundary_matches_brute_force(name):
    X = COMPLEXES[name]
    rng = np.random.default_rng(0)
    for k in range(X.dimension):
        theta = Cochain(X, k, rng.integers(-5, 6, X.count(k)).astype(float))
        fast = coboundary(theta).values
        slow = [_brute_coboundary(theta, s) for s in X.simplices[k + 1]]
        np.testing.assert_array_equal(fast, slow)


@pytest.mark.parametrize("name", sorted(COMPLEXES))
def test_delta_delta_is_zero_exactly(name):
    X = COMPLEXES[name]
    for k in range(X.dimension - 1):
        assert (X.coboundary_matrix(k + 1) @ X.coboundary_matrix(k)).count_nonzero() == 0


@pytest.mark.parametrize("name", sorted(COMPLEXES))
def test_faces_are_closed(name):
    X = COMPLEXES[name]
    for k in range(1, X.dimension + 1):
        for s in X.simplices[k]:
            for face, _ in X.boundary_faces(s):
                assert face in X.index[k - 1]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_alternating_evaluation(k):
    X = COMPLEXES["cube"]
    rng = np.random.default_rng(k)
    theta = Cochain(X, k, rng.standard_normal(X.count(k)))
    for s in X.simplices[k][:5]:
        for perm in itertools.permutations(s):
            assert theta(perm) == (-1) ** _inversions(perm) * theta(s)


@settings(max_examples=100, deadline=None)
@given(st.permutations(list(range(6))))
def test_permutation_sign_matches_inversion_parity(perm):
    assert permutation_sign(perm) == (-1) ** _inversions(perm)


def test_permutation_sign_repeated_entry():
    assert permutation_sign([1, 2, 1]) == 0


def test_cochain_norms():
    X = COMPLEXES["octahedron"]
    assert cochain_norm(make_power(2), Cochain.zeros(X, 1)) == 0
    two_edges = SimplicialComplex.from_top([(0, 1), (1, 2)])
    assert cochain_norm(make_power(2), Cochain(two_edges, 1, [3.0, 4.0])) == pytest.approx(5.0, rel=1e-12)
    assert cochain_norm(make_power(1), Cochain(X, 1, np.ones(X.count(1)))) == pytest.approx(X.count(1), rel=1e-12)


def test_coboundary_norm_estimates():
    phi = make_power(2)
    assert coboundary_norm_estimate(phi, COMPLEXES["circle"], 1, trials=3) == 0
    # the 2x2 problem maximised over the unit circle: sqrt(2) at (1, -1)/sqrt(2)
    angles = np.linspace(0, 2 * np.pi, 100001)
    brute = np.max(np.abs(np.sin(angles) - np.cos(angles)))
    est = coboundary_norm_estimate(phi, EDGE, 0, trials=5)
    assert est == pytest.approx(brute, rel=1e-8)
    assert est == pytest.approx(math.sqrt(2), rel=1e-12)
    X = COMPLEXES["octahedron"]
    N = geometry_stats(X).incidence_bound
    assert coboundary_norm_estimate(phi, X, 1, trials=100) <= 3 * N + 1e-9


def test_geometry_stats_octahedron():
    mesh = octahedron()
    stats = geometry_stats(mesh.complex, mesh.coordinates)
    assert stats.max_vertex_degree == 4
    # a vertex lies in itself, 4 edges and 4 triangles
    assert stats.incidence_bound == 9
    assert stats.max_cofaces == (4, 2)
    assert stats.max_simplex_diameter == pytest.approx(math.sqrt(2))


def test_json_round_trip_and_validation():
    X = COMPLEXES["torus"]
    Y = SimplicialComplex.from_json(json.dumps(X.to_json()))
    assert Y.simplices == X.simplices
    bad = {"vertices": [0, 1, 2], "simplices": {"0": [[0], [1], [2]], "1": [[0, 1]], "2": [[0, 1, 2]]}}
    with pytest.raises(InvalidComplexError):
        SimplicialComplex.from_json(bad)
    with pytest.raises(InvalidComplexError):
        SimplicialComplex({0: [[0], [1]], 1: [[0, 1], [1, 0]]})


def test_barycentric_subdivision_counts():
    Y, old = barycentric_subdivision(TRIANGLE)
    assert [Y.count(k) for k in range(3)] == [7, 12, 6]
    assert Y.euler_characteristic() == TRIANGLE.euler_characteristic()
    assert len(old) == 7


def test_euler_characteristics():
    assert COMPLEXES["circle"].euler_characteristic() == 0
    assert COMPLEXES["torus"].euler_characteristic() == 0
    assert COMPLEXES["octahedron"].euler_characteristic() == 2
    assert COMPLEXES["icosahedron"].euler_characteristic() == 2
    assert COMPLEXES["disk"].euler_characteristic() == 1
    assert COMPLEXES["cube"].euler_characteristic() == 1
