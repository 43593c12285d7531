from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copocert.polycore import (
    Polynomial,
    PolynomialError,
    add,
    evaluate,
    homogenize,
    monomials_up_to,
    mul,
    multinomial,
    multinomial_norm,
    substitute,
    top_component,
)

from conftest import naive_eval, points, polynomials

x1, x2 = Polynomial.variables(2)


def test_additive_inverse():
    assert add(x1, -x1).is_zero()


def test_add_small():
    assert add(1 + x1, x1 * x1) == Polynomial(2, {(0, 0): 1, (1, 0): 1, (2, 0): 1})


def test_sum_of_cubes_factorization():
    assert mul(x1 + x2, x1 * x1 - x1 * x2 + x2 * x2) == x1**3 + x2**3


def test_multiplicative_identity():
    p = 3 * x1 * x2 - Fraction(1, 2) * x2**3 + 7
    assert mul(p, Polynomial.constant(2, 1)) == p


@settings(max_examples=100, deadline=None)
@given(polynomials(), polynomials(), points(2))
def test_add_mul_agree_with_evaluation(p, q, x):
    assert evaluate(add(p, q), x) == naive_eval(p, x) + naive_eval(q, x)
    assert evaluate(mul(p, q), x) == naive_eval(p, x) * naive_eval(q, x)


@settings(max_examples=100, deadline=None)
@given(polynomials(nvars=3), points(3))
def test_evaluate_matches_naive(p, x):
    assert evaluate(p, x) == naive_eval(p, x)


def test_evaluate_trivial():
    assert evaluate(Polynomial.zero(2), [Fraction(3), Fraction(-1)]) == 0
    assert evaluate(x1 * x1 + x2 * x2, [Fraction(1, 2), Fraction(1, 2)]) == Fraction(1, 2)


def test_substitute_square():
    u = Polynomial.variable(1, 0)
    assert substitute(u * u, [x1 + x2]) == x1 * x1 + 2 * x1 * x2 + x2 * x2


def test_substitute_identity_images():
    p = 1 + x1**3 - (x2 - x1) ** 3
    assert substitute(p, [x1, x2]) == p


@settings(max_examples=60, deadline=None)
@given(polynomials(nvars=2), points(2))
def test_split_substitution_recovers_p(p, x):
    # p(y - z) at (max(x,0), -min(x,0)) equals p(x)
    y1, y2, z1, z2 = Polynomial.variables(4)
    lifted = substitute(p, [y1 - z1, y2 - z2])
    plus = [max(v, 0) for v in x]
    minus = [-min(v, 0) for v in x]
    assert evaluate(lifted, plus + minus) == naive_eval(p, x)


def test_homogenize_linear():
    x0, y1 = Polynomial.variables(2)
    assert homogenize(1 + Polynomial.variable(1, 0)) == x0 + y1


def test_homogenize_three_rays_objective():
    p = 1 + x1**3 - (x2 - x1) ** 3
    ph = homogenize(p)
    one = Polynomial.constant(2, 1)
    assert ph.substitute([one, x1, x2]) == p
    assert ph.substitute([Polynomial.zero(2), x1, x2]) == x1**3 - (x2 - x1) ** 3


def test_top_component_three_rays():
    p = 1 + x1**3 - (x2 - x1) ** 3
    pt = top_component(p)
    assert pt == x1**3 - (x2 - x1) ** 3
    assert evaluate(pt, [0, 1]) == -1


def test_top_component_fixed_point():
    p = x1 * x1 - 3 * x1 * x2
    assert top_component(p) == p


@settings(max_examples=100, deadline=None)
@given(polynomials(nvars=2, max_terms=5), points(2), st.integers(1, 5))
def test_homogenize_scaling(p, x, x0):
    d = p.degree
    ph = homogenize(p)
    lhs = evaluate(ph, [Fraction(x0)] + list(x))
    rhs = naive_eval(p, [v / x0 for v in x]) * Fraction(x0) ** d
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(polynomials(nvars=2, max_terms=5), points(2))
def test_top_component_is_homogenization_at_zero(p, x):
    if p.is_zero():
        return
    assert evaluate(top_component(p), x) == evaluate(homogenize(p), [0] + list(x))


def test_multinomial_norm_hand_value():
    # C_{2,(1,0)} = 2 and C_{2,(0,2)} = 1, so the norm is max(2/2, 3/1)
    assert multinomial(2, (1, 0)) == 2
    assert multinomial(2, (0, 2)) == 1
    assert multinomial_norm(2 * x1 + 3 * x2 * x2) == 3


def test_multinomial_norm_constant():
    assert multinomial_norm(Polynomial.constant(2, Fraction(-7, 3))) == Fraction(7, 3)


@settings(max_examples=100, deadline=None)
@given(polynomials(nvars=3), points(3))
def test_norm_inequality(p, x):
    bound = multinomial_norm(p) * (1 + sum(abs(v) for v in x)) ** p.degree
    assert naive_eval(p, x) <= bound


def test_monomial_order_is_graded_lex():
    mons = monomials_up_to(2, 2)
    assert mons[0] == (0, 0)
    assert [sum(m) for m in mons] == sorted(sum(m) for m in mons)
    assert len(mons) == 6


@settings(max_examples=50, deadline=None)
@given(polynomials(nvars=3))
def test_text_round_trip(p):
    assert Polynomial.from_text(p.to_text(), 3) == p
    assert Polynomial.from_text(p.to_text(), 3).to_text() == p.to_text()


def test_float_text_is_lossless():
    p = Polynomial(2, {(1, 0): 0.1, (0, 2): -1 / 3})
    back = Polynomial.from_text(p.to_text(), 2).to_float()
    assert back == p


def test_malformed_text_rejected():
    with pytest.raises(PolynomialError):
        Polynomial.from_text("1/2 1", 2)
    with pytest.raises(PolynomialError):
        Polynomial.from_text("1 1 0\n2 1 0", 2)


def test_mismatched_nvars_rejected():
    with pytest.raises(PolynomialError):
        add(x1, Polynomial.variable(3, 0))
