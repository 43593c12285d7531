import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from copocert.polycore import Polynomial, evaluate, sum_polys
from copocert.semialg import (
    SemialgebraicSet,
    derive_embedding,
    g_vector,
    g_vector_simplex,
    sample_feasible,
    split_point,
    split_variables,
    tilde_set,
)

from conftest import load_json, load_problem, naive_eval, points, polynomials, random_set

x1, x2 = Polynomial.variables(2)
H_SPARSE = 1 - x1 - x2 - x1 * x2


def sparse_set():
    return SemialgebraicSet.build(2, [H_SPARSE], explicit_nonneg=True)


def test_sparse_example_radius_is_nine():
    emb = derive_embedding(sparse_set(), [0, 0], 1, slack=0, strict=False)
    assert emb.M_hat == 9
    # h bound (1+1)^2 * 1 = 4, each orthant bound 2
    assert emb.U_tilde == (4, 2, 2)


def test_strict_embedding_needs_positive_slack():
    with pytest.raises(ValueError):
        derive_embedding(sparse_set(), [0, 0], 1, slack=0)


def test_empty_constraints_radius():
    S = SemialgebraicSet.build(3, [])
    emb = derive_embedding(S, [0, 0, 0], Fraction(5, 2), slack=Fraction(1, 3))
    assert emb.M_hat == Fraction(5, 2) + Fraction(1, 3)


def test_radius_positivity_sampled():
    # M_hat - e'x - e'h(x) > 0 on {L <= x, e'x <= M}, 50 points per set
    rng = random.Random(11)
    for _ in range(20):
        n = rng.randint(1, 3)
        S = random_set(rng, n)
        L = [Fraction(rng.randint(-4, 2), 2) for _ in range(n)]
        M = Fraction(rng.randint(0, 6))
        emb = derive_embedding(S, L, M)
        slack_poly = (emb.M_hat - sum_polys(Polynomial.variables(n), n)
                      - sum_polys(S.all_constraints(), n))
        for _ in range(50):
            # a point of the region: L + (M - e'L) * (simplex weights), dropping the last weight
            w = [Fraction(rng.randint(0, 100)) for _ in range(n + 1)]
            tot = sum(w) or 1
            x = [L[i] + (M - sum(L)) * w[i] / tot for i in range(n)]
            assert evaluate(slack_poly, x) > 0


def test_split_point_feasibility():
    S = SemialgebraicSet.build(2, [1 - x1 * x1 - x2 * x2])
    T, q = split_variables(S, x1 - x2)
    x = [Fraction(-1, 2), Fraction(1, 3)]
    assert S.contains(x)
    y = split_point(x)
    assert T.contains(y)
    assert evaluate(q, y) == evaluate(x1 - x2, x)


def test_split_identity_on_orthant():
    S = sparse_set()
    T, q = split_variables(S, x1 + x2)
    assert T is S and q == x1 + x2


@settings(max_examples=60, deadline=None)
@given(polynomials(nvars=2), points(2))
def test_split_objective_matches(p, x):
    S = SemialgebraicSet.build(2, [])
    _, q = split_variables(S, p)
    assert evaluate(q, split_point(x)) == naive_eval(p, x)


def test_tilde_set_three_rays():
    S = load_problem("three_rays.json").semialgebraic_set()
    T = tilde_set(S)
    top = x1 * x2 * (x1 - x2) ** 2
    assert T.constraints == (top, -top)
    assert T.explicit_nonneg
    for t in (Fraction(1, 3), Fraction(1), Fraction(7)):
        for ray in ((t, t), (0, t), (t, 0)):
            assert T.contains(list(ray))
    assert not T.contains([Fraction(1), Fraction(2)])


def test_tilde_set_homogeneous_fixed():
    S = SemialgebraicSet.build(2, [x1 * x1 - x2 * x2, x1 * x2])
    assert tilde_set(S) == S


def test_tilde_orthant():
    S = SemialgebraicSet.build(3, [], explicit_nonneg=True)
    assert tilde_set(S) == S


def test_simplex_layout_sparse_example():
    S = sparse_set()
    emb = derive_embedding(S, [0, 0], 1, slack=0, strict=False)
    g = g_vector_simplex(S, emb)
    assert g.entries == (x1, x2, H_SPARSE, 8 - x1 - x2 + x1 * x2)
    assert g.radius == 9


def test_box_layout_sum_is_radius():
    S = sparse_set()
    emb = derive_embedding(S, [0, 0], 1)
    g = g_vector(S, emb, U=[1, 1], m1=1)
    assert sum_polys(g.entries, 2) == Polynomial.constant(2, g.radius)
    assert g.m1 == 1 and g.n_scoped == 2


def test_box_layout_without_scoped_entries():
    S = sparse_set()
    emb = derive_embedding(S, [0, 0], 1)
    g = g_vector(S, emb, m1=0)
    assert g.m1 == 0 and g.n_scoped == 0


def test_entry_scopes_match_support_scan():
    rng = random.Random(5)
    for _ in range(10):
        S = random_set(rng, 3)
        emb = derive_embedding(S, [0, 0, 0], 2)
        g = g_vector(S, emb, m1=S.m)
        for entry, scope in zip(g.entries, g.var_scopes):
            used = sorted({i for e in entry.terms for i, k in enumerate(e) if k})
            assert list(scope) == used


def test_sample_feasible_unbounded_point():
    pf = load_problem("unbounded_n2.json")
    S = pf.semialgebraic_set()
    half = [Fraction(1, 2), Fraction(1, 2)]
    assert S.contains(half)
    assert evaluate(pf.objective, half) == Fraction(-1, 2)
    pts = sample_feasible(S, ([0, 0], [2, 2]), 200, seed=3)
    assert len(pts) == 200
    assert S.feasible_mask(pts).all()


def test_sample_feasible_deterministic():
    S = sparse_set()
    a = sample_feasible(S, ([0, 0], [1, 1]), 50, seed=9)
    b = sample_feasible(S, ([0, 0], [1, 1]), 50, seed=9)
    assert np.array_equal(a, b)


def test_sample_feasible_empty_set():
    S = SemialgebraicSet.build(1, [Polynomial.variable(1, 0) - 2, 1 - Polynomial.variable(1, 0)])
    assert len(sample_feasible(S, ([0], [3]), 10, seed=0, max_draws=5000)) == 0


def test_tentacle_k_corner_values():
    # the displayed lower bounds are attained at the corners of K
    for row in load_json("tentacle_checks.json"):
        n = row["n"]
        xs = Polynomial.variables(n)
        s = sum_polys([x * x for x in xs[:-1]], n)
        first, second = xs[-1] - s, 2 * s - xs[-1]
        hi = [Fraction(v) for v in row["first_factor_point"]]
        lo = [Fraction(v) for v in row["second_factor_point"]]
        assert evaluate(first, hi) == Fraction(row["first_factor_value"]) > 0
        assert evaluate(second, lo) == Fraction(row["second_factor_value"]) > 0


def test_tentacle_k_inside_set():
    rng = np.random.default_rng(2)
    for n in (2, 3, 4, 5):
        S = load_problem(f"tentacle_n{n}.json").semialgebraic_set()
        d = 1 / (10 * n)
        centre = np.array([1.0] * (n - 1) + [n - 0.5])
        pts = centre + rng.uniform(-d, d, size=(2000, n))
        assert S.feasible_mask(pts).all()
