from fractions import Fraction
from math import comb

import numpy as np
import pytest

from copocert.cli import gen_instance
from copocert.conic.backends import solve_conic
from copocert.hierarchies import (
    build_putinar_program,
    build_sparse_program,
    certify_sos,
    compact_simplex_reformulation,
    copositive_lower_bound,
    putinar_lower_bound,
    sparse_lower_bound,
    strong_positivity_heuristic,
    upper_bound_eps,
)
from copocert.polycore import Polynomial
from copocert.semialg import SemialgebraicSet, derive_embedding, g_vector_simplex, sample_feasible
from copocert.verify import EXACT_PASS, TOLERANCE_PASS

from conftest import load_problem, needs_psd

x1, x2 = Polynomial.variables(2)
SPARSE_CONST = Fraction(271, 6)


def sparse_setup():
    pf = load_problem("sparse_example.json")
    S = pf.semialgebraic_set()
    emb = derive_embedding(S, pf.L, pf.M, slack=0, strict=False)
    return S, emb, g_vector_simplex(S, emb)


def sampled_min(pf, count=4000, seed=0):
    S = pf.semialgebraic_set()
    pts = sample_feasible(S, ([0.0] * pf.nvars, [1.0] * pf.nvars), count, seed)
    return float(np.min(pf.objective.evaluate_many(pts)))


def test_odd_rank_rejected():
    S, emb, g = sparse_setup()
    with pytest.raises(ValueError):
        build_sparse_program(-x1 * x1 - x2 * x2, S, emb, g, 3)


def test_putinar_row_count():
    S = SemialgebraicSet.build(3, [1 - Polynomial.variable(3, 0)], explicit_nonneg=True)
    sp = build_putinar_program(Polynomial.variable(3, 1) ** 2, S, 4)
    assert sp.program.n_rows == comb(3 + 4, 4)


@needs_psd
def test_sparse_example_fixed_certificate_feasible():
    S, emb, g = sparse_setup()
    sp = build_sparse_program(-x1 * x1 - x2 * x2, S, emb, g, 4, lam_fixed=-float(SPARSE_CONST))
    assert solve_conic(sp.program).status == "optimal"


@needs_psd
def test_sparse_example_bound():
    S, emb, g = sparse_setup()
    res = sparse_lower_bound(-x1 * x1 - x2 * x2, S, emb, 4, g=g)
    assert res.status == "optimal"
    # the displayed certificate is feasible, and the bound cannot beat the true minimum -1
    assert res.bound >= -float(SPARSE_CONST) - 1e-5
    assert res.bound <= -1 + 1e-6


@needs_psd
def test_sparse_constant_objective():
    S, emb, g = sparse_setup()
    res = sparse_lower_bound(Polynomial.constant(2, Fraction(5, 2)), S, emb, 2, g=g)
    assert res.bound == pytest.approx(2.5, abs=1e-6)


@needs_psd
def test_putinar_interval():
    t = Polynomial.variable(1, 0)
    S = SemialgebraicSet.build(1, [t, 1 - t])
    res = putinar_lower_bound(t * t, S, 2)
    assert res.bound == pytest.approx(0.0, abs=1e-6)


@needs_psd
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_sparse_and_putinar_agree_at_rank_six(seed):
    pf = gen_instance(4, seed, 2)
    S, emb = pf.semialgebraic_set(), pf.embedding()
    a = sparse_lower_bound(pf.objective, S, emb, 6, U=pf.U)
    b = putinar_lower_bound(pf.objective, S, 6)
    assert a.bound == pytest.approx(b.bound, abs=1e-5 * (1 + abs(b.bound)))
    assert max(a.bound, b.bound) <= sampled_min(pf) + 1e-6


@needs_psd
def test_certify_sparse_example():
    S, emb, g = sparse_setup()
    p = -x1 * x1 - x2 * x2

    def factory(lam, excl):
        return build_sparse_program(p, S, emb, g, 4, lam_fixed=lam, sigma0_exclude=excl)

    bound = sparse_lower_bound(p, S, emb, 4, g=g).bound
    cert, rep = certify_sos(factory, p, bound, emb=emb)
    assert cert is not None
    assert rep.verdict in (EXACT_PASS, TOLERANCE_PASS)
    assert float(cert.shift) <= bound


@needs_psd
def test_copositive_rank_must_cover_degree():
    pf = load_problem("unbounded_n2.json")
    with pytest.raises(ValueError, match="2\\*d_max = 8"):
        copositive_lower_bound(pf.objective, pf.semialgebraic_set(), 6)


@needs_psd
def test_copositive_unbounded_n2():
    pf = load_problem("unbounded_n2.json")
    res = copositive_lower_bound(pf.objective, pf.semialgebraic_set(), 8)
    assert res.details["d_max"] == 4
    assert res.bound == pytest.approx(-0.5, abs=1e-2)
    assert res.bound <= -0.5 + 1e-6


@needs_psd
def test_compact_route_sparse_example():
    S, emb, _ = sparse_setup()
    res = compact_simplex_reformulation(x1 * x1 + x2 * x2, S, emb, 4)
    assert res.bound >= -1e-6
    assert res.bound <= 1e-6


@needs_psd
def test_compact_route_constant():
    S, emb, _ = sparse_setup()
    res = compact_simplex_reformulation(Polynomial.constant(2, 3), S, emb, 4)
    assert res.bound == pytest.approx(3.0, abs=1e-6)


@needs_psd
def test_compact_agrees_with_sparse_route():
    S, emb, g = sparse_setup()
    p = x1 * x1 + x2 * x2 + x1
    a = compact_simplex_reformulation(p, S, emb, 4)
    b = sparse_lower_bound(p, S, emb, 4, g=g)
    assert a.bound == pytest.approx(b.bound, abs=1e-6)


def test_upper_bound_schedule_unbounded_n2():
    pf = load_problem("unbounded_n2.json")
    S = pf.semialgebraic_set()
    ubs = [upper_bound_eps(pf.objective, S, -0.6, eps, box=([0, 0], [2, 2])).bound
           for eps in (1.0, 0.1, 0.01)]
    assert ubs[0] >= ubs[1] >= ubs[2]
    # the optimum is -1/2, so every upper bound stays above it
    assert ubs[2] >= -0.5 - 1e-9
    assert ubs[2] < ubs[0]


def test_upper_bound_with_explicit_points():
    pf = load_problem("unbounded_n2.json")
    res = upper_bound_eps(pf.objective, pf.semialgebraic_set(), -1.0, 1e-3, samples=0,
                          points=[(0.5, 0.5)], box=([0, 0], [1, 1]))
    assert res.direction == "upper"
    assert res.bound >= -0.5


def test_strong_positivity_three_rays():
    pf = load_problem("three_rays.json")
    rep = strong_positivity_heuristic(pf.objective, pf.semialgebraic_set())
    assert rep.found
    assert tuple(rep.point) == (0, 1)
    assert rep.value == -1


def test_strong_positivity_coercive():
    pf = load_problem("unbounded_n3.json")
    rep = strong_positivity_heuristic(pf.objective, pf.semialgebraic_set(), check_set=False)
    assert not rep.found


def test_strong_positivity_compact_constant():
    S = SemialgebraicSet.build(2, [1 - x1 * x1 - x2 * x2])
    rep = strong_positivity_heuristic(Polynomial.constant(2, 1), S, box=([-1, -1], [1, 1]))
    assert not rep.found
