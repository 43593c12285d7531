"""Regenerate the JSON fixtures in src/copocert/fixtures from their defining formulas.

Run from the repository root:  python3 tools/make_fixtures.py
Every certificate written here is verified exactly before it is saved.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

from copocert.certificates import SOSCertificate, SOSTerm, dump_certificate
from copocert.cli import ProblemFile
from copocert.polya_lp import LPCertificate, LPTerm, lp_generators
from copocert.polycore import Polynomial
from copocert.semialg import derive_embedding, g_vector_simplex
from copocert.verify import EXACT_PASS, verify_certificate

OUT = Path(__file__).resolve().parent.parent / "src" / "copocert" / "fixtures"


def _zero(n):
    return Polynomial.zero(n)


def three_rays() -> ProblemFile:
    x1, x2 = Polynomial.variables(2)
    g = (x1 * x2 + 1) * (x1 - x2) ** 2
    p = 1 + x1**3 - (x2 - x1) ** 3
    return ProblemFile(2, p, (g, -g), explicit_nonneg=True, name="three_rays")


def lowrank(n: int):
    """q >= 0 on the intersection of the unit balls around e and e/2, inside the orthant."""
    xs = Polynomial.variables(n)
    s = sum(xs, _zero(n))
    sq = sum((x * x for x in xs), _zero(n))
    tail = sum(xs[2:], _zero(n))
    q = 3 * s * s - 2 * tail * sq - 2 * (xs[0] + xs[1]) * (s - 1)
    b_e = 1 - sum(((x - 1) ** 2 for x in xs), _zero(n))
    b_half = 1 - sum(((x - Fraction(1, 2)) ** 2 for x in xs), _zero(n))
    # e'x <= n/2 + sqrt(n) on the ball around e/2
    M = Fraction(n, 2) + math.isqrt(n) + 1
    pf = ProblemFile(n, q, (b_e, b_half), explicit_nonneg=True, L=(Fraction(0),) * n, M=M,
                     name=f"lowrank_n{n}")
    S = pf.semialgebraic_set()
    emb = pf.embedding()
    gens = lp_generators(S, emb)
    assert gens == (b_e, b_half)
    zero_b = (0, 0)

    def unit(i, k=1):
        a = [0] * n
        a[i] = k
        return a

    terms = []
    for i in range(2, n):
        terms.append(LPTerm(tuple(unit(i)), zero_b, 0, Fraction(5 * n, 4) - 2))
        terms.append(LPTerm(tuple(unit(i)), (1, 0), 0, Fraction(1)))
    for i in (0, 1):
        terms.append(LPTerm(tuple(unit(i)), zero_b, 0, Fraction(n, 4) + 1))
        for j in range(n):
            a = unit(i)
            a[j] += 2
            terms.append(LPTerm(tuple(a), zero_b, 0, Fraction(1)))
    for i in range(n):
        terms.append(LPTerm(tuple(unit(i)), (0, 1), 0, Fraction(1)))
    cert = LPCertificate(terms, emb.L, emb.M, 3, gens, Fraction(0), "weighted", "const", True)
    rep = verify_certificate(cert, q, S, emb)
    assert rep.verdict == EXACT_PASS, rep.summary()
    return pf, cert


def tentacle(n: int) -> ProblemFile:
    xs = Polynomial.variables(n)
    s = sum((x * x for x in xs[:-1]), _zero(n))
    h = (xs[-1] - s) * (2 * s - xs[-1])
    return ProblemFile(n, sum((x * x for x in xs), _zero(n)), (h, xs[-1]), name=f"tentacle_n{n}")


def tentacle_checks():
    """Corners of K that attain the two displayed lower bounds on the constraint factors."""
    out = []
    for n in range(2, 7):
        d = Fraction(1, 10 * n)
        hi = [1 + d] * (n - 1) + [n - Fraction(1, 2) - d]
        lo = [1 - d] * (n - 1) + [n - Fraction(1, 2) + d]
        out.append({
            "n": n,
            "first_factor_point": [str(v) for v in hi],
            "first_factor_value": str(Fraction(3, 10) + Fraction(1 + 9 * n, 100 * n * n)),
            "second_factor_point": [str(v) for v in lo],
            "second_factor_value": str(n - Fraction(19, 10) + Fraction(16 * n - 1, 50 * n * n)),
        })
    return out


def sparse_example(c: Fraction):
    x1, x2 = Polynomial.variables(2)
    h = 1 - x1 - x2 - x1 * x2
    pf = ProblemFile(2, c - x1 * x1 - x2 * x2, (h,), explicit_nonneg=True,
                     L=(Fraction(0), Fraction(0)), M=Fraction(1), name="sparse_example")
    S = pf.semialgebraic_set()
    emb = derive_embedding(S, pf.L, pf.M, slack=0, strict=False)
    assert emb.M_hat == 9
    g = g_vector_simplex(S, emb)
    one = Polynomial.constant(2, 1)
    xx = x1 * x2
    terms = [
        SOSTerm("sigma0.const", [[c - Fraction(271, 6)]], (one,), one),
        SOSTerm("sigma0", [[Fraction(49, 6), Fraction(7, 3)], [Fraction(7, 3), Fraction(2, 3)]], (one, xx), one),
        SOSTerm("sigma1", [[Fraction(1, 3)]], (one,), g.sphere_factor()),
        SOSTerm("rho3", [[Fraction(7, 3)]], (one,), g.entries[2]),
        SOSTerm("rho4", [[Fraction(11, 3)]], (one,), g.entries[3]),
    ]
    cert = SOSCertificate("sparse", 2, terms, Fraction(0), 4, emb, 4, None, True)
    return pf, cert


def unbounded(n: int) -> ProblemFile:
    xs = Polynomial.variables(n)
    p = sum((x * x for x in xs), _zero(n)) - sum(xs, _zero(n))
    s = sum((x * x for x in xs[:-1]), _zero(n))
    h = (xs[-1] - s) * (2 * s - xs[-1])
    return ProblemFile(n, p, (h,), explicit_nonneg=True, name=f"unbounded_n{n}")


def unbounded_bounds():
    """Reference feasible points and bounds; the n >= 4 points involve cube roots so are floats."""
    rows = [
        {"n": 2, "feasible_point": ["1/2", "1/2"], "exact": True,
         "upper_bound": "-1/2", "lower_bound": -0.5, "stretch": False},
        {"n": 3, "feasible_point": ["1/2", "1/2", "1/2"], "exact": True,
         "upper_bound": "-3/4", "lower_bound": -0.75, "stretch": False},
    ]
    for n, ub, lb in ((4, -0.98278, -0.98278), (5, -1.19055, -1.19041)):
        a = (1.0 / (4 * (n - 1))) ** (1.0 / 3.0)
        point = [repr(a)] * (n - 1) + [repr((n - 1) * a * a)]
        rows.append({"n": n, "feasible_point": point, "exact": False,
                     "upper_bound": ub, "lower_bound": lb, "stretch": True})
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    def write(name, text):
        (OUT / name).write_text(text)

    write("three_rays.json", three_rays().to_text())
    for n in (3, 4, 5, 6):
        pf, cert = lowrank(n)
        write(f"lowrank_n{n}.json", pf.to_text())
        write(f"lowrank_n{n}_certificate.json", dump_certificate(cert))
    for n in (2, 3, 4, 5):
        write(f"tentacle_n{n}.json", tentacle(n).to_text())
    write("tentacle_checks.json", json.dumps(tentacle_checks(), indent=1, sort_keys=True) + "\n")
    c = Fraction(271, 6)
    pf, cert = sparse_example(c)
    rep = verify_certificate(cert, pf.objective, pf.semialgebraic_set(), None)
    assert rep.verdict == EXACT_PASS, rep.summary()
    write("sparse_example.json", pf.to_text())
    write("sparse_example_certificate.json", dump_certificate(cert))
    pf1, cert1 = sparse_example(c - 1)
    rep1 = verify_certificate(cert1, pf1.objective, pf1.semialgebraic_set(), None)
    assert not rep1.passed, rep1.summary()
    write("sparse_example_shifted.json", pf1.to_text())
    write("sparse_example_shifted_certificate.json", dump_certificate(cert1))
    for n in (2, 3, 4, 5):
        write(f"unbounded_n{n}.json", unbounded(n).to_text())
    write("unbounded_bounds.json", json.dumps(unbounded_bounds(), indent=1, sort_keys=True) + "\n")
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
