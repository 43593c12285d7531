"""Pólya expansions, simplex/cone transforms and LP certificates over compact sets.

An LP certificate writes a target polynomial as

    sum  c_{a,b,g} * (x - L)^a * h(x)^b * (M - e'x)^g,   c_{a,b,g} >= 0,

where h are the set's constraints.  A product's degree is counted as
e'a + sum_j b_j deg(h_j) + g ("weighted", the default) or as the plain
exponent sum e'a + e'b + g ("raw"); only products within the rank are used.

Besides non-negative constants, the multipliers c can be drawn from two
richer classes: DSOS polynomials (an LP, through the extreme rays m_i^2
and (m_i +- m_j)^2) and full SOS polynomials (one Gram block per product).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .conic.backends import solve_conic
from .conic.program import ProgramBuilder
from .conic.simplex import solve_lp
from .polycore import Exponent, Polynomial, PolynomialError, lift_rational, monomials_up_to, sum_vars
from .results import NEG_INF, HierarchyResult
from .semialg import SemialgebraicSet, SimplexEmbedding


# -- Pólya --------------------------------------------------------------------

def polya_expand(F: Polynomial, r: int) -> Polynomial:
    """(e'x)^r * F for homogeneous F."""
    if not F.is_homogeneous():
        raise PolynomialError("Pólya expansion needs a homogeneous polynomial")
    if r < 0:
        raise ValueError("r must be non-negative")
    return sum_vars(F.nvars) ** r * F


@dataclass(frozen=True)
class PolyaResult:
    certified: bool
    rank: Optional[int]
    r_max: int
    min_coefficient: Fraction | float

    def __bool__(self) -> bool:
        return self.certified


def polya_certify(F: Polynomial, r_max: int) -> PolyaResult:
    """Smallest r <= r_max for which (e'x)^r F has no negative coefficient.

    A failure is inconclusive unless F is known to be strictly positive on
    the simplex.
    """
    if r_max < 0:
        raise ValueError("r_max must be non-negative")
    if not F.is_homogeneous():
        raise PolynomialError("Pólya certification needs a homogeneous polynomial")
    e = sum_vars(F.nvars)
    cur = F
    worst = 0
    for r in range(r_max + 1):
        worst = min(cur.terms.values(), default=0)
        if worst >= 0:
            return PolyaResult(True, r, r_max, worst)
        if r < r_max:
            cur = cur * e
    return PolyaResult(False, None, r_max, worst)


def homogenize_to(F: Polynomial, degree: int) -> Polynomial:
    """Homogenize at a prescribed degree >= deg F (new variable at index 0)."""
    if not F.is_zero() and degree < F.degree:
        raise PolynomialError("target degree below the polynomial degree")
    return Polynomial(F.nvars + 1, {(degree - sum(e),) + e: c for e, c in F.terms.items()})


def simplex_to_cone(F: Polynomial, M) -> Polynomial:
    """G(x0, x) = F^h(x0 + e'x, M x), homogeneous in n + 1 variables."""
    M = lift_rational(M) if F.is_exact else float(M)
    if M <= 0:
        raise ValueError("M must be positive")
    n = F.nvars
    xs = Polynomial.variables(n + 1)
    images = [sum_vars(n + 1)] + [xs[i + 1] * M for i in range(n)]
    return F.homogenize().substitute(images)


def cone_to_simplex(F: Polynomial, degree: Optional[int] = None) -> Polynomial:
    """F^h(1 - e'x, x); F copositive iff the result is non-negative on the unit simplex."""
    n = F.nvars
    d = F.degree if degree is None else degree
    Fh = homogenize_to(F, d)
    if n == 0:
        return Fh.substitute([Polynomial.constant(0, 1)]) if Fh.nvars else Fh
    images = [1 - sum_vars(n)] + Polynomial.variables(n)
    return Fh.substitute(images)


# -- LP certificates ------------------------------------------------------------

MULTIPLIER_CLASSES = ("const", "dsos", "sos")


@dataclass(frozen=True)
class LPTerm:
    alpha: Tuple[int, ...]
    beta: Tuple[int, ...]
    gamma: int
    coeff: Fraction | float
    # DSOS ray: the term is coeff * square_base^2 * product
    square_base: Optional[Polynomial] = None
    # SOS multiplier: Gram matrix over ``gram_basis`` (coeff is then 1)
    gram: Optional[Tuple[Tuple[Fraction | float, ...], ...]] = None
    gram_basis: Optional[Tuple[Exponent, ...]] = None


@dataclass
class LPCertificate:
    """target = p - shift written as an LP combination."""

    terms: List[LPTerm]
    L: Tuple[Fraction, ...]
    M: Fraction
    rank: int
    generators: Tuple[Polynomial, ...]
    shift: Fraction | float = Fraction(0)
    degree_rule: str = "weighted"
    multiplier: str = "const"
    exact: bool = True

    @property
    def nvars(self) -> int:
        return len(self.L)


@dataclass
class LPSearchFailure:
    status: str  # no-certificate | input-error | numerical-failure | time-limit
    rank: int
    message: str = ""

    def __bool__(self) -> bool:
        return False


def lp_generators(S: SemialgebraicSet, emb: SimplexEmbedding) -> Tuple[Polynomial, ...]:
    """Constraints used as h in products.

    Constant constraints carry no information and are skipped.  Orthant
    constraints are added only for coordinates with L_i < 0, where
    x_i - L_i >= 0 does not already imply them.
    """
    gens = [h for h in S.constraints if h.degree > 0]
    if S.explicit_nonneg:
        gens += [Polynomial.variable(S.nvars, i) for i in range(S.nvars) if emb.L[i] < 0]
    return tuple(gens)


def _exponent_grid(weights: Sequence[int], r: int) -> List[Tuple[int, ...]]:
    """All exponent vectors with sum_k e_k * weights[k] <= r, graded-lex by weighted degree."""
    out: List[Tuple[int, ...]] = []
    k = len(weights)

    def rec(i: int, budget: int, prefix: List[int]):
        if i == k:
            out.append(tuple(prefix))
            return
        w = weights[i]
        for e in range(budget // w + 1):
            prefix.append(e)
            rec(i + 1, budget - e * w, prefix)
            prefix.pop()

    rec(0, r, [])
    out.sort(key=lambda e: (sum(a * w for a, w in zip(e, weights)), e))
    return out


class _ProductCache:
    """Memoized products of factor powers, keyed by exponent vector."""

    def __init__(self, factors: Sequence[Polynomial]):
        self.factors = list(factors)
        n = factors[0].nvars if factors else 0
        self.memo: Dict[Tuple[int, ...], Polynomial] = {
            (0,) * len(factors): Polynomial.constant(n, 1)
        }

    def get(self, e: Tuple[int, ...]) -> Polynomial:
        if e in self.memo:
            return self.memo[e]
        k = max(i for i, v in enumerate(e) if v)
        prev = list(e)
        prev[k] -= 1
        val = self.get(tuple(prev)) * self.factors[k]
        self.memo[e] = val
        return val


def _factors(n: int, L: Sequence[Fraction], M: Fraction, gens: Sequence[Polynomial]) -> List[Polynomial]:
    xs = Polynomial.variables(n)
    return [xs[i] - L[i] for i in range(n)] + list(gens) + [M - sum_vars(n)]


def _weights(n: int, gens: Sequence[Polynomial], rule: str) -> List[int]:
    if rule == "weighted":
        return [1] * n + [h.degree for h in gens] + [1]
    if rule == "raw":
        return [1] * (n + len(gens) + 1)
    raise ValueError(f"unknown degree rule {rule!r}")


def _actual_degree(e: Tuple[int, ...], n: int, gens: Sequence[Polynomial]) -> int:
    return sum(e[:n]) + sum(b * h.degree for b, h in zip(e[n : n + len(gens)], gens)) + e[-1]


def _dsos_rays(n: int, half_degree: int) -> List[Polynomial]:
    mons = [Polynomial.monomial(a) for a in monomials_up_to(n, half_degree)]
    rays = list(mons)
    for a, b in combinations(mons, 2):
        rays.append(a + b)
        rays.append(a - b)
    return rays


@dataclass
class _LPColumns:
    grid: List[Tuple[int, ...]]
    products: List[Polynomial]
    squares: List[Optional[Polynomial]]


def _build_columns(p: Polynomial, gens, L, M, r, rule, multiplier, mult_half_degree):
    n = p.nvars
    if multiplier not in MULTIPLIER_CLASSES:
        raise ValueError(f"unknown multiplier class {multiplier!r}")
    factors = _factors(n, L, M, gens)
    weights = _weights(n, gens, rule)
    cache = _ProductCache(factors)
    grid, products, squares = [], [], []
    rays = _dsos_rays(n, mult_half_degree) if multiplier == "dsos" else [None]
    for e in _exponent_grid(weights, r):
        prod = cache.get(e)
        used = sum(a * w for a, w in zip(e, weights))
        for ray in rays:
            extra = 2 * ray.degree if ray is not None else 0
            if used + extra > r:
                continue
            grid.append(e)
            products.append(prod if ray is None else prod * ray * ray)
            squares.append(ray)
    return _LPColumns(grid, products, squares)


def _assemble(p: Polynomial, cols: _LPColumns, with_lambda: bool) -> Tuple[ProgramBuilder, list, Optional[tuple]]:
    pb = ProgramBuilder()
    lam = pb.free() if with_lambda else None
    n = p.nvars
    zero = (0,) * n
    for e, c in p.terms.items():
        pb.set_rhs(e, c)
    if lam is not None:
        pb.add(zero, lam, 1)
        pb.objective(lam, 1)
    vars_ = []
    for prod in cols.products:
        v = pb.nonneg()
        vars_.append(v)
        for e, c in prod.terms.items():
            pb.add(e, v, c)
    return pb, vars_, lam


def _sos_program(p, gens, L, M, r, rule, with_lambda):
    """One Gram block per product, basis of monomials up to (r - deg)/2."""
    n = p.nvars
    factors = _factors(n, L, M, gens)
    weights = _weights(n, gens, rule)
    cache = _ProductCache(factors)
    pb = ProgramBuilder()
    lam = pb.free() if with_lambda else None
    for e, c in p.terms.items():
        pb.set_rhs(e, c)
    if lam is not None:
        pb.add((0,) * n, lam, 1)
        pb.objective(lam, 1)
    blocks = []
    for e in _exponent_grid(weights, r):
        prod = cache.get(e)
        deg = _actual_degree(e, n, gens)
        half = (r - deg) // 2
        if half < 0:
            continue
        basis = monomials_up_to(n, half)
        blk = pb.psd_block(len(basis))
        blocks.append((e, prod, basis, blk))
        for i, a in enumerate(basis):
            for j in range(i, len(basis)):
                b = basis[j]
                ab = tuple(x + y for x, y in zip(a, b))
                mult = 1 if i == j else 2
                for pe, pc in prod.terms.items():
                    key = tuple(x + y for x, y in zip(ab, pe))
                    pb.add_gram(key, blk, i, j, float(pc) * mult)
    return pb, blocks, lam


def _check_rank(p: Polynomial, r: int) -> None:
    if r < p.degree:
        raise ValueError(f"rank {r} is below deg p = {p.degree}")


def _solve_lp_certificate(p, S, emb, r, with_lambda, degree_rule, multiplier,
                          multiplier_degree, exact, time_limit, backend):
    gens = lp_generators(S, emb)
    n = S.nvars
    L, M = emb.L, emb.M
    t0 = time.monotonic()
    if multiplier == "sos":
        pb, blocks, lam = _sos_program(p, gens, L, M, r, degree_rule, with_lambda)
        prog = pb.build()
        res = solve_conic(prog, backend=backend, time_limit=time_limit)
        if not res.ok:
            return res, None, time.monotonic() - t0
        _, nn, mats = prog.unpack(res.primal)
        terms = []
        for (e, _prod, basis, _), G in zip(blocks, mats):
            if np.max(np.abs(G)) < 1e-12:
                continue
            terms.append(LPTerm(e[:n], e[n : n + len(gens)], e[-1], 1.0,
                                gram=tuple(tuple(float(v) for v in row) for row in G),
                                gram_basis=tuple(basis)))
        shift = float(res.primal[0]) if with_lambda else 0.0
        cert = LPCertificate(terms, L, M, r, gens, shift, degree_rule, multiplier, exact=False)
        return res, cert, time.monotonic() - t0

    half = multiplier_degree // 2
    cols = _build_columns(p, gens, L, M, r, degree_rule, multiplier, half)
    pb, vars_, lam = _assemble(p, cols, with_lambda)
    prog = pb.build()
    res = solve_lp(prog, exact_refine=exact, time_limit=time_limit)
    if not res.ok:
        return res, None, time.monotonic() - t0
    off = 1 if with_lambda else 0
    use_exact = exact and res.exact_primal is not None
    values = res.exact_primal if use_exact else list(res.primal)
    terms = []
    for k, (e, sq) in enumerate(zip(cols.grid, cols.squares)):
        v = values[off + k]
        if v != 0 and (use_exact or abs(v) > 0):
            terms.append(LPTerm(e[:n], e[n : n + len(gens)], e[-1], v, square_base=sq))
    shift = values[0] if with_lambda else Fraction(0)
    cert = LPCertificate(terms, L, M, r, gens, shift, degree_rule, multiplier, exact=use_exact)
    return res, cert, time.monotonic() - t0


def lp_certificate_search(
    p: Polynomial,
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    r: int,
    *,
    degree_rule: str = "weighted",
    multiplier: str = "const",
    multiplier_degree: int = 0,
    exact: bool = True,
    time_limit: Optional[float] = None,
    backend: Optional[str] = None,
) -> LPCertificate | LPSearchFailure:
    """Feasibility LP: p itself as a non-negative combination of rank-r products."""
    _check_rank(p, r)
    res, cert, _ = _solve_lp_certificate(p, S, emb, r, False, degree_rule, multiplier,
                                         multiplier_degree, exact, time_limit, backend)
    if cert is not None:
        return cert
    return LPSearchFailure(_failure_status(res.status), r, res.message)


def _failure_status(status: str) -> str:
    return {
        "infeasible": "no-certificate",
        "unbounded": "input-error",
        "time-limit": "time-limit",
    }.get(status, "numerical-failure")


def lp_lower_bound(
    p: Polynomial,
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    r: int,
    *,
    degree_rule: str = "weighted",
    multiplier: str = "const",
    multiplier_degree: int = 0,
    exact: bool = False,
    time_limit: Optional[float] = None,
    backend: Optional[str] = None,
) -> HierarchyResult:
    """max lambda such that p - lambda has a rank-r LP certificate."""
    _check_rank(p, r)
    res, cert, wall = _solve_lp_certificate(p, S, emb, r, True, degree_rule, multiplier,
                                            multiplier_degree, exact, time_limit, backend)
    tag = "lp" if multiplier == "const" else f"lp-{multiplier}"
    if cert is None:
        status = _failure_status(res.status)
        bound = NEG_INF if status == "no-certificate" else float("nan")
        if status == "input-error":
            # unbounded above: no feasible point can exist in the set
            bound = float("inf")
        return HierarchyResult(r, bound, "lower", status, tag, None, wall,
                               details={"message": res.message})
    exact_bound = cert.shift if isinstance(cert.shift, Fraction) else None
    return HierarchyResult(r, float(cert.shift), "lower", "optimal", tag, cert, wall,
                           exact_bound=exact_bound,
                           details={"iterations": res.iterations,
                                    "columns": len(cert.terms)})


def lp_term_polynomial(term: LPTerm, n: int, L, M, gens) -> Polynomial:
    """The (uncoefficiented) product of a term, including any square or Gram factor."""
    factors = _factors(n, [Fraction(v) for v in L], Fraction(M), gens)
    e = term.alpha + term.beta + (term.gamma,)
    prod = Polynomial.constant(n, 1)
    for f, k in zip(factors, e):
        if k:
            prod = prod * f**k
    if term.square_base is not None:
        prod = prod * term.square_base * term.square_base
    return prod


def scan_ranks(p, S, emb, ranks: Sequence[int], **kw) -> List[HierarchyResult]:
    """Run lp_lower_bound over several ranks (the rank is a user choice)."""
    return [lp_lower_bound(p, S, emb, r, **kw) for r in ranks]
