import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from tracklim.errors import IllConditionedError, ImproperError, PoleProximityError, ValidationError
from tracklim.ratfun import (
    Poly,
    RatFun,
    mode_integral,
    mode_mass,
    partial_fractions,
    poly_roots,
    rat_eval,
    relative_degree,
    time_eval,
)


def _root_set(p):
    out = []
    for r, m in poly_roots(Poly(p)):
        out.extend([r] * m)
    return sorted(out, key=lambda z: (round(z.real, 8), z.imag))


def test_poly_normalizes_trailing_zeros():
    assert Poly([1, 2, 0, 0]).coeffs.tolist() == [1, 2]
    assert Poly([0]).is_zero()
    with pytest.raises(ValidationError):
        Poly([])


@pytest.mark.parametrize("coeffs, expected", [
    ([2, -3, 1], [1, 2]),
    ([5, -2, 1], [1 - 2j, 1 + 2j]),
    ([1, 0, 0, 1], [-1, 0.5 - np.sqrt(3) / 2 * 1j, 0.5 + np.sqrt(3) / 2 * 1j]),
])
def test_poly_roots_examples(coeffs, expected):
    got = _root_set(coeffs)
    assert np.allclose(got, sorted(expected, key=lambda z: (round(z.real, 8), z.imag)), atol=1e-10)
    # back-substitution residual
    p = np.polynomial.polynomial.Polynomial(coeffs)
    assert max(abs(p(r)) for r in got) < 1e-10


def test_poly_roots_conjugates_are_exact():
    roots = [r for r, _ in poly_roots(Poly([5, -2, 1]))]
    assert roots[0] == np.conj(roots[1]) or roots[1] == np.conj(roots[0])


def test_poly_roots_merges_clusters():
    roots = poly_roots(Poly.from_roots([1.0, 1.0, 3.0]))
    mult = {round(r.real, 6): m for r, m in roots}
    assert mult == {1.0: 2, 3.0: 1}


def _reconstruction_error(coeffs):
    lead = coeffs[-1]
    found = [r for r, m in poly_roots(Poly(coeffs)) for _ in range(m)]
    rebuilt = lead * np.real(np.polynomial.polynomial.polyfromroots(found))
    return np.max(np.abs(rebuilt - coeffs)) / np.max(np.abs(coeffs))


def test_root_reconstruction_random_polynomials():
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(300):
        deg = int(rng.integers(1, 9))
        coeffs = rng.standard_normal(deg + 1)
        worst = max(worst, _reconstruction_error(coeffs))
    assert worst <= 1e-8


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 3)), min_size=1, max_size=4),
       st.floats(0.1, 10))
def test_root_reconstruction_separated_roots(points, lead):
    roots = []
    for re, im in points:
        new = [complex(re, im), complex(re, -im)] if im > 0.05 else [complex(re)]
        if all(abs(r - q) >= 0.1 for r in new for q in roots):
            roots.extend(new)
    coeffs = lead * np.real(np.polynomial.polynomial.polyfromroots(roots))
    assert _reconstruction_error(coeffs) <= 1e-8


def test_rat_eval_examples():
    assert rat_eval(RatFun([1], [0, 1]), 2) == pytest.approx(0.5)
    assert rat_eval(RatFun([-2, 1], [-1, 1]), 0) == pytest.approx(2)
    assert rat_eval(RatFun([1], [5, -2, 1]), 1) == pytest.approx(0.25)
    with pytest.raises(PoleProximityError):
        rat_eval(RatFun([1], [0, 1]), 0.0)


def test_relative_degree_examples():
    assert relative_degree(RatFun([-2, 1], [-1, 1])) == 0
    assert relative_degree(RatFun([1], [0, 1])) == 1
    assert relative_degree(RatFun([1], [5, -2, 1])) == 2
    with pytest.raises(ImproperError):
        relative_degree(RatFun([0, 0, 1], [1, 1]))


def test_partial_fractions_examples():
    t = np.linspace(0, 5, 11)
    assert np.allclose(time_eval(partial_fractions(RatFun([1], [0, 1, 1])), t), 1 - np.exp(-t))
    assert np.allclose(time_eval(partial_fractions(RatFun([1], [0, 1])), t), 1.0)
    assert np.allclose(time_eval(partial_fractions(RatFun([1], [0, 0, 1])), t), t)


def test_partial_fractions_reproduce_transform():
    R = RatFun([1, 2], [6, 11, 6, 1])     # (s+2)/((s+1)(s+2)(s+3)) after no reduction
    terms = partial_fractions(R)
    for s in (0.3 + 1j, 2.0, -0.5 + 3j):
        val = sum(c.coeff / (s - c.pole) ** (c.k + 1) for c in terms)
        assert abs(val - rat_eval(R, s)) < 1e-10


def test_partial_fractions_stable_decay():
    terms = partial_fractions(RatFun([1, 1], [2, 3, 3, 1]))
    assert abs(time_eval(terms, 60.0)) < 1e-12


def test_partial_fractions_conjugate_pairs():
    terms = partial_fractions(RatFun([1], [5, 2, 1]))
    poles = sorted(t.pole for t in terms if t.pole.imag)
    assert len(poles) == 2 and poles[0] == np.conj(poles[1])
    t = np.linspace(0, 3, 7)
    assert np.allclose(time_eval(terms, t), 0.5 * np.exp(-t) * np.sin(2 * t))


def test_partial_fractions_needs_strictly_proper():
    with pytest.raises(ValidationError):
        partial_fractions(RatFun([1, 1], [1, 1]))


@pytest.mark.parametrize("x, y, kind, expected", [
    (1, 0, "cos", 1.0), (1, 2, "cos", 0.2), (1, 2, "sin", 0.4)])
def test_mode_mass_examples(x, y, kind, expected):
    assert mode_mass(x, y, kind) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("y", [0.0, 1.0, 5.0])
def test_mode_mass_matches_quadrature(x, y):
    T = 40 / x
    for kind, f in (("cos", np.cos), ("sin", np.sin)):
        if kind == "sin" and y == 0:
            continue
        q, _ = quad(lambda t: np.exp(-x * t) * f(y * t), 0, T, limit=400, epsabs=1e-13, epsrel=1e-13)
        assert abs(mode_mass(x, y, kind) - q) <= 1e-8


def test_mode_mass_rejects_nonpositive_decay():
    with pytest.raises(ValidationError):
        mode_mass(0.0, 1.0, "cos")


def test_mode_integral_matches_quadrature():
    q, _ = quad(lambda t: np.exp(-0.7 * t) * np.sin(3 * t), 0.4, 2.5, epsabs=1e-13)
    assert mode_integral(0.7, 3.0, "sin", 0.4, 2.5) == pytest.approx(q, abs=1e-12)
    assert mode_integral(0.7, 3.0, "sin", 0.0, np.inf) == pytest.approx(mode_mass(0.7, 3.0, "sin"))
