from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from copocert.cli import ProblemFile, fixture_path
from copocert.conic.backends import available_backends
from copocert.polycore import Polynomial
from copocert.semialg import SemialgebraicSet


def load_problem(name: str) -> ProblemFile:
    return ProblemFile.load(fixture_path(name))


def load_json(name: str):
    return json.loads(fixture_path(name).read_text())


def has_psd_backend() -> bool:
    return "cvxpy" in available_backends()


needs_psd = pytest.mark.skipif(not has_psd_backend(), reason="no PSD backend registered")

small_fraction = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 4))


@st.composite
def polynomials(draw, nvars: int = 2, max_degree: int = 3, max_terms: int = 6):
    """Random exact polynomial with small rational coefficients."""
    k = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(k):
        exp = tuple(draw(st.lists(st.integers(0, max_degree), min_size=nvars, max_size=nvars)))
        if sum(exp) > max_degree:
            continue
        terms[exp] = draw(small_fraction)
    return Polynomial(nvars, terms)


def points(nvars: int, lo: int = -3, hi: int = 3):
    return st.lists(st.builds(Fraction, st.integers(lo * 4, hi * 4), st.just(4)),
                    min_size=nvars, max_size=nvars)


def naive_eval(p: Polynomial, x):
    """Term-by-term evaluation, independent of the library evaluator."""
    total = Fraction(0)
    for exp, c in p.terms.items():
        v = Fraction(c)
        for xi, k in zip(x, exp):
            for _ in range(k):
                v *= xi
        total += v
    return total


def random_set(rng, n):
    cons = []
    for _ in range(rng.randint(1, 3)):
        terms = {}
        for _ in range(rng.randint(1, 4)):
            e = [0] * n
            for _ in range(rng.randint(0, 3)):
                e[rng.randrange(n)] += 1
            terms[tuple(e)] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        cons.append(Polynomial(n, terms))
    return SemialgebraicSet.build(n, cons, explicit_nonneg=rng.random() < 0.5)


def random_strict_copositive_quadratic(rng, n):
    """x'(A'A + I/10 + N)x with integer A and entrywise non-negative N: strictly copositive."""
    A = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    Q = [[sum(A[k][i] * A[k][j] for k in range(n)) + Fraction(rng.randint(0, 2), 2)
          for j in range(n)] for i in range(n)]
    terms = {}
    for i in range(n):
        for j in range(i, n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            off = Q[i][j] + Q[j][i]
            terms[tuple(e)] = Q[i][i] + Fraction(1, 10) if i == j else off
    return Polynomial(n, terms)


# -- acceptance summary ------------------------------------------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and (rep.failed or rep.skipped)):
        state = "pass" if rep.passed else ("skip" if rep.skipped else "FAIL")
        _criteria.setdefault(mark.args[0], []).append((item.name, state))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        states = [s for _, s in _criteria[n]]
        if "FAIL" in states:
            verdict = "FAIL"
        elif all(s == "skip" for s in states):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        counts = ", ".join(f"{states.count(s)} {s}" for s in ("pass", "FAIL", "skip") if s in states)
        failed = [name for name, s in _criteria[n] if s == "FAIL"]
        extra = f"; failed: {', '.join(failed)}" if failed else ""
        terminalreporter.write_line(f"criterion {n}: {verdict}  ({counts}{extra})")
