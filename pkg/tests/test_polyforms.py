import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczlab import InvalidDegreeError, InvalidParameterError, UnsupportedDimensionError
from orliczlab.polyforms import PolyForm, basis, evaluate_on_vectors
from orliczlab.quadrature import ball_rule, ball_volume, monomial_integral, simplex_rule

SYMS = sympy.symbols("x0:3")


def random_form(n, k, size, seed):
    rng = np.random.default_rng(seed)
    return PolyForm(n, k, rng.integers(-3, 4, (len(basis(n, k)),) + (size,) * n).astype(float))


def to_sympy(form: PolyForm):
    """Component polynomials as sympy expressions, keyed by basis multi-index."""
    xs = SYMS[: form.n]
    out = {}
    for j, I in enumerate(basis(form.n, form.k)):
        expr = 0
        for idx in itertools.product(*(range(s) for s in form.comps.shape[1:])):
            c = form.comps[(j,) + idx]
            if c:
                expr += sympy.nsimplify(c) * sympy.prod([x**e for x, e in zip(xs, idx)])
        out[I] = sympy.expand(expr)
    return out


def sympy_d(comps, n, k):
    """Symbolic exterior derivative on the sorted-index basis."""
    xs = SYMS[:n]
    out = {J: 0 for J in basis(n, k + 1)}
    for I, f in comps.items():
        for i in range(n):
            if i in I:
                continue
            J = tuple(sorted(I + (i,)))
            sign = (-1) ** J.index(i)
            out[J] += sign * sympy.diff(f, xs[i])
    return {J: sympy.expand(v) for J, v in out.items()}


@pytest.mark.parametrize("n, k", [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_d_matches_symbolic(n, k):
    form = random_form(n, k, 3, seed=10 * n + k)
    got = to_sympy(form.d())
    ref = sympy_d(to_sympy(form), n, k)
    for J in basis(n, k + 1):
        assert sympy.simplify(got[J] - ref[J]) == 0


@pytest.mark.parametrize("n, k", [(2, 0), (3, 0), (3, 1)])
def test_dd_is_zero(n, k):
    form = random_form(n, k, 4, seed=n + k)
    assert not np.any(form.d().d().comps)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cone_homotopy_identity(n):
    rng = np.random.default_rng(n)
    pts = rng.uniform(-1, 1, (25, n))
    for k in range(1, n + 1):
        form = random_form(n, k, 3, seed=k)
        c = rng.uniform(-0.5, 0.5, n)
        lhs = form.cone(c).d()
        if k < n:
            lhs = lhs + form.d().cone(c)
        np.testing.assert_allclose(lhs(pts), form(pts), atol=1e-12)


def test_degree_errors():
    with pytest.raises(InvalidDegreeError):
        PolyForm.zeros(2, 3)
    with pytest.raises(InvalidDegreeError):
        PolyForm.zeros(2, 2).d()
    with pytest.raises(InvalidDegreeError):
        PolyForm.zeros(2, 0).cone([0, 0])
    with pytest.raises(InvalidDegreeError):
        PolyForm.zeros(2, 1) + PolyForm.zeros(2, 0)


def test_evaluation_matches_direct_sum():
    form = random_form(3, 1, 3, seed=5)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, (10, 3))
    direct = np.zeros((10, 3))
    for j in range(3):
        for idx in itertools.product(range(3), repeat=3):
            direct[:, j] += form.comps[(j,) + idx] * np.prod(pts ** np.array(idx), axis=1)
    np.testing.assert_allclose(form(pts), direct, rtol=1e-13, atol=1e-12)


def test_products_and_constructors():
    a = PolyForm.affine(2, 1.0, [2.0, -1.0])
    b = PolyForm.affine(2, 0.5, [0.0, 3.0])
    p = PolyForm.constant(2, 1, [1.0, 2.0]).times(a).times(b)
    x = np.array([[0.3, -0.7]])
    fa = 1 + 2 * 0.3 + 0.7
    fb = 0.5 + 3 * -0.7
    np.testing.assert_allclose(p(x), [[fa * fb, 2 * fa * fb]], rtol=1e-14)
    w = PolyForm.wedge_of_covectors([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]])
    # dx^dy, dx^dz, dy^dz minors
    np.testing.assert_allclose(w.comps[:, 0, 0, 0], [1.0, 3.0, 6.0])
    assert w.total_degree() == 0
    assert (a * 2 - a - a).trimmed().total_degree() == 0


def test_evaluate_on_vectors_is_alternating():
    vals = np.array([[3.0]])
    e = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    assert evaluate_on_vectors(vals, e)[0] == 3.0
    assert evaluate_on_vectors(vals, e[:, ::-1])[0] == -3.0


def _sympy_simplex_integral(alpha):
    xs = SYMS[: len(alpha)]
    expr = sympy.prod([x**a for x, a in zip(xs, alpha)])
    # iterated integral over x_0 + ... + x_{n-1} <= 1
    for i in reversed(range(len(alpha))):
        upper = 1 - sum(xs[:i])
        expr = sympy.integrate(expr, (xs[i], 0, upper))
    return sympy.Rational(expr)


@pytest.mark.parametrize("alpha", [(0,), (3,), (1, 2), (0, 4), (2, 1, 1), (0, 0, 3)])
def test_monomial_integral_against_sympy(alpha):
    assert monomial_integral(alpha) == pytest.approx(float(_sympy_simplex_integral(alpha)), rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("order", [1, 2, 4, 7])
def test_simplex_rule_exactness(n, order):
    rule = simplex_rule(n, order)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(1 / math.factorial(n), rel=1e-14)
    for alpha in itertools.product(range(order + 1), repeat=n):
        if sum(alpha) > order:
            continue
        vals = np.prod(rule.points ** np.array(alpha), axis=1)
        assert rule.integrate(vals) == pytest.approx(monomial_integral(alpha), rel=1e-12, abs=1e-15)


def test_rule_argument_errors():
    with pytest.raises(InvalidParameterError):
        simplex_rule(2, -1)
    with pytest.raises(UnsupportedDimensionError):
        simplex_rule(4, 2)
    with pytest.raises(InvalidParameterError):
        ball_rule(2, radius=0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_rule_moments(n):
    rule = ball_rule(n, radius=0.7, n_radial=6, n_angular=12)
    vol = ball_volume(n, 0.7)
    assert rule.weights.sum() == pytest.approx(vol, rel=1e-13)
    r2 = np.sum(rule.points**2, axis=1)
    # int_B |x|^2 = n/(n+2) R^2 vol and int_B |x|^4 = n/(n+4) R^4 vol
    assert rule.integrate(r2) == pytest.approx(n / (n + 2) * 0.49 * vol, rel=1e-12)
    assert rule.integrate(r2**2) == pytest.approx(n / (n + 4) * 0.7**4 * vol, rel=1e-12)
    assert rule.integrate(rule.points[:, 0] ** 3) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.sampled_from([2, 3]), k=st.integers(0, 2))
def test_linearity_of_d(seed, n, k):
    if k >= n:
        k = n - 1
    a = random_form(n, k, 3, seed)
    b = random_form(n, k, 2, seed + 1)
    lhs = (a * 2.0 + b).d().trimmed()
    rhs = (a.d() * 2.0 + b.d()).trimmed()
    np.testing.assert_array_equal(lhs.comps, rhs.comps)
