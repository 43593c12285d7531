import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copocert.cli import gen_instance
from copocert.polya_lp import (
    LPCertificate,
    LPSearchFailure,
    cone_to_simplex,
    lp_certificate_search,
    lp_lower_bound,
    lp_term_polynomial,
    polya_certify,
    polya_expand,
    simplex_to_cone,
)
from copocert.polycore import Polynomial, PolynomialError, evaluate, monomials_of_degree, sum_vars
from copocert.semialg import SemialgebraicSet, derive_embedding, sample_feasible
from copocert.verify import EXACT_PASS, verify_certificate

from conftest import load_problem, random_strict_copositive_quadratic, small_fraction

x1, x2 = Polynomial.variables(2)


def test_polya_expand_hand_case():
    assert polya_expand(x1 * x1 - x1 * x2 + x2 * x2, 1) == x1**3 + x2**3


def test_polya_expand_rank_zero():
    F = 2 * x1 * x1 + x1 * x2
    assert polya_expand(F, 0) == F


@st.composite
def forms(draw, nvars=3, degree=2):
    mons = monomials_of_degree(nvars, degree)
    coeffs = draw(st.lists(small_fraction, min_size=len(mons), max_size=len(mons)))
    return Polynomial(nvars, dict(zip(mons, coeffs)))


@settings(max_examples=60, deadline=None)
@given(forms(), st.integers(0, 4), st.lists(st.integers(0, 9), min_size=3, max_size=3))
def test_polya_expand_evaluation(F, r, x):
    G = polya_expand(F, r)
    if not F.is_zero():
        assert G.degree == F.degree + r
    assert evaluate(G, x) == sum(x) ** r * evaluate(F, x)


def test_polya_rejects_inhomogeneous():
    with pytest.raises(PolynomialError):
        polya_expand(1 + x1, 1)


def test_polya_certify_hand_case():
    res = polya_certify(x1 * x1 - x1 * x2 + x2 * x2, 10)
    assert res.certified and res.rank == 1


def test_polya_certify_nonneg_coefficients():
    assert polya_certify(x1 + x2, 5).rank == 0


def test_polya_certify_not_copositive():
    F = x1 * x2 - Fraction(1, 1000) * x1 * x1
    assert evaluate(F, [1, 0]) < 0
    res = polya_certify(F, 12)
    assert not res.certified and res.rank is None


def test_polya_monotone_in_rank():
    rng = random.Random(4)
    certified = 0
    for _ in range(50):
        n = rng.randint(2, 4)
        F = random_strict_copositive_quadratic(rng, n)
        res = polya_certify(F, 10)
        certified += res.certified
        if not res.certified:
            continue
        # direct expansion oracle: every rank above the first certified one also certifies
        for r in range(res.rank, 11):
            assert min(polya_expand(F, r).terms.values()) >= 0
    assert certified >= 25


def test_simplex_to_cone_linear():
    M = Fraction(3)
    G = simplex_to_cone(M - sum_vars(2), M)
    x0 = Polynomial.variable(3, 0)
    assert G == M * x0


def test_simplex_to_cone_constant():
    assert simplex_to_cone(Polynomial.constant(2, 5), 2) == Polynomial.constant(3, 5)


@settings(max_examples=60, deadline=None)
@given(forms(nvars=2, degree=2), small_fraction, st.lists(st.integers(0, 5), min_size=2, max_size=2),
       st.integers(1, 4))
def test_simplex_cone_round_trip(F2, c, x, M):
    F = F2 + c + x1
    G = simplex_to_cone(F, M)
    x = [Fraction(v) for v in x]
    back = evaluate(G, [M - sum(x)] + x) / Fraction(M) ** F.degree
    assert back == evaluate(F, x)


def test_cone_to_simplex_trivial():
    assert cone_to_simplex(x1 + x2) == x1 + x2
    assert cone_to_simplex(Polynomial.constant(2, 1)) == Polynomial.constant(2, 1)


@settings(max_examples=60, deadline=None)
@given(forms(nvars=2, degree=2), small_fraction,
       st.lists(st.integers(0, 10), min_size=3, max_size=3).filter(lambda w: w[2] > 0))
def test_cone_to_simplex_evaluation(F2, c, w):
    F = F2 + c * x2
    tot = Fraction(sum(w))
    x = [w[0] / tot, w[1] / tot]
    s = 1 - sum(x)
    assert evaluate(cone_to_simplex(F), x) == s**F.degree * evaluate(F, [v / s for v in x])


def test_lowrank_n3_low_degree_certificate():
    pf = load_problem("lowrank_n3.json")
    S = pf.semialgebraic_set()
    cert = lp_certificate_search(pf.objective, S, pf.embedding(), 3)
    assert isinstance(cert, LPCertificate)
    for t in cert.terms:
        assert lp_term_polynomial(t, 3, cert.L, cert.M, cert.generators).degree <= 3
    assert verify_certificate(cert, pf.objective, S, pf.embedding()).verdict == EXACT_PASS


def test_single_term_certificate():
    S = SemialgebraicSet.build(2, [1 - x1 * x1 - x2 * x2], explicit_nonneg=True)
    emb = derive_embedding(S, [0, 0], 2)
    cert = lp_certificate_search(2 - x1 - x2, S, emb, 1)
    assert isinstance(cert, LPCertificate)
    assert len(cert.terms) == 1
    t = cert.terms[0]
    assert t.gamma == 1 and t.coeff == 1


def test_negative_somewhere_has_no_certificate():
    S = SemialgebraicSet.build(2, [1 - x1 * x1 - x2 * x2], explicit_nonneg=True)
    emb = derive_embedding(S, [0, 0], 2)
    p = x1 - Fraction(1, 2)
    assert S.contains([0, 0]) and evaluate(p, [0, 0]) < 0
    for r in (1, 2, 3, 4):
        res = lp_certificate_search(p, S, emb, r)
        assert isinstance(res, LPSearchFailure)
        assert res.status == "no-certificate"


def test_min_of_coordinate_on_simplex():
    S = SemialgebraicSet.build(2, [])
    res = lp_lower_bound(x1, S, derive_embedding(S, [0, 0], 1), 1)
    assert res.bound == pytest.approx(0.0, abs=1e-12)


def test_rank_below_degree_rejected():
    S = SemialgebraicSet.build(2, [])
    with pytest.raises(ValueError):
        lp_lower_bound(x1**3, S, derive_embedding(S, [0, 0], 1), 2)


def test_exact_bound_certificate_verifies():
    pf = gen_instance(4, 1, 2)
    S, emb = pf.semialgebraic_set(), pf.embedding()
    res = lp_lower_bound(pf.objective, S, emb, 2, exact=True)
    assert res.exact_bound is not None
    rep = verify_certificate(res.certificate, pf.objective, S, emb)
    assert rep.verdict == EXACT_PASS


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_lp_bounds_monotone_and_valid(seed):
    pf = gen_instance(4, seed, 2)
    S, emb = pf.semialgebraic_set(), pf.embedding()
    bounds = [lp_lower_bound(pf.objective, S, emb, r).bound for r in (2, 3, 4)]
    assert all(b2 >= b1 - 1e-9 for b1, b2 in zip(bounds, bounds[1:]))
    pts = sample_feasible(S, ([0.0] * 4, [1.0] * 4), 2000, seed=seed)
    sampled_min = float(np.min(pf.objective.evaluate_many(pts)))
    assert bounds[-1] <= sampled_min + 1e-6
