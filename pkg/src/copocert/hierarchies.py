"""Bound-computing programs built from SOS and copositivity certificates.

* ``build_sparse_program``: sigma0 + sigma1 (R^2 - sum g_i^2) + sum tau_i(x_scope) g_i
  + sum rho_i(g_i) g_i with every summand of degree <= r.
* ``build_putinar_program``: sigma0 + sum sigma_j h_j (Lasserre's hierarchy).
* ``copositive_lower_bound``: for sets inside the orthant,
  (1 + e'x)^(D - deg p) (p - lambda) = F(x, h(x)) with F copositive, the
  copositivity imposed through F^h(1 - e'w, w) >= 0 on the unit simplex and
  the sparse simplex certificate.
* ``compact_simplex_reformulation``: p - lambda = F(x - L, h(x)) with F
  non-negative on a simplex, again through the sparse simplex certificate.
* ``upper_bound_eps``: upper bounds from an outer (point-evaluation)
  relaxation of the copositive cone in the epsilon-perturbed reformulation.
* ``strong_positivity_heuristic``: sampling search for witnesses against
  strong positivity.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import SOSCertificate, SOSTerm
from .conic.backends import accept_residuals, solve_conic
from .conic.program import ConicProgram, ProgramBuilder, SolverResult
from .polya_lp import _ProductCache, cone_to_simplex, lp_generators, lp_lower_bound
from .polycore import Polynomial, lift_rational, monomials_up_to, sum_polys, sum_vars
from .results import NEG_INF, HierarchyResult
from .semialg import (
    GVector,
    SemialgebraicSet,
    SimplexEmbedding,
    few_variable_order,
    g_vector,
    sample_feasible,
    tilde_set,
)
from .verify import VerificationReport, round_sos_certificate, verify_sparse_certificate


# -- program assembly helpers -------------------------------------------------------

@dataclass
class SOSBlock:
    label: str
    basis: Tuple[Polynomial, ...]
    multiplier: Polynomial
    index: int
    shared_with: Tuple[Polynomial, ...] = ()  # extra multipliers for a shared Gram


@dataclass
class SOSProgram:
    """A ConicProgram plus the bookkeeping needed to read certificates back."""

    program: ConicProgram
    blocks: List[SOSBlock]
    kind: str
    rank: int
    nvars: int
    deg_sigma0: Optional[int] = None
    lam_col: Optional[int] = 0
    extras: Dict[str, object] = field(default_factory=dict)

    def block_sizes(self) -> List[int]:
        return list(self.program.psd_blocks)


def _float(p: Polynomial) -> Polynomial:
    return p if not p.is_exact else p.to_float()


def _add_sos_block(pb: ProgramBuilder, basis: Sequence[Polynomial], multiplier: Polynomial,
                   rowkey=lambda e: e, extra_multipliers: Sequence[Polynomial] = ()) -> int:
    """Allocate a Gram block and add basis' X basis * multiplier to the rows."""
    blk = pb.psd_block(len(basis))
    fb = [_float(b) for b in basis]
    mults = [_float(multiplier)] + [_float(m) for m in extra_multipliers]
    for i in range(len(fb)):
        for j in range(i, len(fb)):
            bij = fb[i] * fb[j]
            f = 1.0 if i == j else 2.0
            for mult in mults:
                for e, c in (bij * mult).terms.items():
                    pb.add_gram(rowkey(e), blk, i, j, f * c)
    return blk


def _monomial_basis(n: int, degree: int, scope: Optional[Sequence[int]] = None) -> List[Polynomial]:
    if scope is None:
        return [Polynomial.monomial(e) for e in monomials_up_to(n, degree)]
    out = []
    for e in monomials_up_to(len(scope), degree):
        full = [0] * n
        for k, v in zip(scope, e):
            full[k] = v
        out.append(Polynomial.monomial(full))
    return out


def _sigma0_basis(n: int, d0: int, exclude: Sequence[Tuple[int, ...]] = ()) -> List[Polynomial]:
    drop = set(map(tuple, exclude))
    return [b for b in _monomial_basis(n, d0 // 2) if next(iter(b.terms)) not in drop]


def _scaled(g: Polynomial) -> Polynomial:
    """g divided by the power of two nearest its largest coefficient.

    A positive rescaling changes neither the SOS cone nor the sign of a
    multiplier but keeps Gram entries of comparable size.
    """
    if g.is_zero():
        return g
    k = round(math.log2(float(g.max_abs_coeff())))
    return g * (Fraction(1, 2**k) if k >= 0 else Fraction(2 ** (-k)))


def _power_basis(g: Polynomial, k: int) -> List[Polynomial]:
    out = [Polynomial.constant(g.nvars, 1)]
    for _ in range(k):
        out.append(out[-1] * g)
    return out


def _univariate_half(r: int, deg_g: int) -> int:
    """Largest k with deg(rho(g) g) = (2k + 1) deg g <= r; -1 if none."""
    if deg_g <= 0:
        return -1
    if r < deg_g:
        return -1
    return (r - deg_g) // (2 * deg_g)


def _target_rows(pb: ProgramBuilder, p: Polynomial, with_lambda: bool, lam_fixed=None,
                 rowkey=lambda e: e):
    n = p.nvars
    for e, c in p.terms.items():
        pb.add_rhs(rowkey(e), float(c))
    lam = None
    if with_lambda:
        lam = pb.free()
        pb.add(rowkey((0,) * n), lam, 1.0)
        pb.objective(lam, 1.0)
    elif lam_fixed is not None:
        pb.add_rhs(rowkey((0,) * n), -float(lam_fixed))
    # make sure every monomial of p has a row even if no multiplier reaches it
    return lam


def _check_even_rank(p: Polynomial, r: int, deg_sigma0: Optional[int]):
    if r % 2:
        raise ValueError(f"rank {r} must be even")
    if r < p.degree:
        raise ValueError(f"rank {r} is below deg p = {p.degree}")
    if deg_sigma0 is not None and (deg_sigma0 > r or deg_sigma0 < 0):
        raise ValueError(f"deg_sigma0={deg_sigma0} must lie in [0, r]")


def _add_margin(pb: ProgramBuilder, basis: Sequence[Polynomial], rowkey=lambda e: e):
    """Free t with sigma0 Gram = X + t I, t <= 1; objective max t."""
    t = pb.free()
    for b in basis:
        for e, c in (b * b).terms.items():
            pb.add(rowkey(e), t, float(c))
    s = pb.nonneg()
    pb.add("t-cap", t, 1.0)
    pb.add("t-cap", s, 1.0)
    pb.set_rhs("t-cap", 1.0)
    pb.objective(t, 1.0)
    return t


# -- sparse hierarchy -------------------------------------------------------------------

def build_sparse_program(
    p: Polynomial,
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    g: GVector,
    r: int,
    deg_sigma0: Optional[int] = None,
    *,
    shared_rho: bool = False,
    lam_fixed: Optional[float] = None,
    sigma0_exclude: Sequence[Tuple[int, ...]] = (),
) -> SOSProgram:
    """max lambda s.t. p - lambda = sigma0 + sigma1 (R^2 - |g|^2) + taus + rhos.

    With ``lam_fixed`` lambda is a constant and the program instead
    maximizes a margin t added to sigma0's Gram diagonal (used to extract
    certificates that survive rounding).  ``sigma0_exclude`` removes
    monomials from sigma0's basis.
    """
    _check_even_rank(p, r, deg_sigma0)
    n = p.nvars
    d0 = r if deg_sigma0 is None else deg_sigma0
    pb = ProgramBuilder()
    lam = _target_rows(pb, p, lam_fixed is None, lam_fixed)
    blocks: List[SOSBlock] = []

    basis0 = _sigma0_basis(n, d0, sigma0_exclude)
    one = Polynomial.constant(n, 1)
    blocks.append(SOSBlock("sigma0", tuple(basis0), one, _add_sos_block(pb, basis0, one)))
    sphere = _scaled(g.sphere_factor())
    k1 = (r - sphere.degree) // 2 if r >= sphere.degree else -1
    if k1 >= 0:
        b1 = _monomial_basis(n, k1)
        blocks.append(SOSBlock("sigma1", tuple(b1), sphere, _add_sos_block(pb, b1, sphere)))
    for i in range(g.n_scoped):
        gi = _scaled(g.entries[i])
        k = (r - gi.degree) // 2 if r >= gi.degree else -1
        if k < 0 or gi.degree == 0:
            continue
        b = _monomial_basis(n, k, g.var_scopes[i])
        blocks.append(SOSBlock(f"tau{i + 1}", tuple(b), gi, _add_sos_block(pb, b, gi)))
    rest = [i for i in range(g.n_scoped, len(g.entries)) if g.entries[i].degree > 0]
    if shared_rho and rest:
        k = min(_univariate_half(r, g.entries[i].degree) for i in rest)
        if k >= 0:
            # one Gram for all entries: the basis differs per entry, so each
            # entry contributes through its own power basis
            blk = pb.psd_block(k + 1)
            for i in rest:
                gi = _float(_scaled(g.entries[i]))
                pw = _power_basis(gi, k)
                for a in range(k + 1):
                    for c in range(a, k + 1):
                        f = 1.0 if a == c else 2.0
                        for e, v in (pw[a] * pw[c] * gi).terms.items():
                            pb.add_gram(e, blk, a, c, f * v)
            blocks.append(SOSBlock("rho", tuple(_power_basis(_scaled(g.entries[rest[0]]), k)),
                                   _scaled(g.entries[rest[0]]), blk,
                                   shared_with=tuple(_scaled(g.entries[i]) for i in rest[1:])))
    else:
        for i in rest:
            gi = _scaled(g.entries[i])
            k = _univariate_half(r, gi.degree)
            if k < 0:
                continue
            b = _power_basis(gi, k)
            blocks.append(SOSBlock(f"rho{i + 1}", tuple(b), gi, _add_sos_block(pb, b, gi)))
    t = _add_margin(pb, basis0) if lam_fixed is not None else None
    prog = pb.build()
    extras = {"margin_col": pb.column_index(t) if t else None, "lam_fixed": lam_fixed,
              "g_labels": list(g.labels)}
    return SOSProgram(prog, blocks, "sparse", r, n, d0, 0 if lam is not None else None, extras)


def build_putinar_program(
    p: Polynomial,
    S: SemialgebraicSet,
    r: int,
    deg_sigma0: Optional[int] = None,
    *,
    extra_constraints: Sequence[Polynomial] = (),
    lam_fixed: Optional[float] = None,
    sigma0_exclude: Sequence[Tuple[int, ...]] = (),
) -> SOSProgram:
    """max lambda s.t. p - lambda = sigma0 + sum_j sigma_j h_j, deg(sigma_j h_j) <= r.

    The orthant constraints x_i >= 0 are included when the set has them.
    """
    _check_even_rank(p, r, deg_sigma0)
    n = p.nvars
    d0 = r if deg_sigma0 is None else deg_sigma0
    pb = ProgramBuilder()
    lam = _target_rows(pb, p, lam_fixed is None, lam_fixed)
    # every monomial up to degree r gets a row: the coefficient space of p - lambda
    for e in monomials_up_to(n, r):
        pb.row(e)
    one = Polynomial.constant(n, 1)
    basis0 = _sigma0_basis(n, d0, sigma0_exclude)
    blocks = [SOSBlock("sigma0", tuple(basis0), one, _add_sos_block(pb, basis0, one))]
    for j, h in enumerate(tuple(S.all_constraints()) + tuple(extra_constraints)):
        if h.degree == 0 or r < h.degree:
            continue
        k = (r - h.degree) // 2
        b = _monomial_basis(n, k)
        h = _scaled(h)
        blocks.append(SOSBlock(f"sigma_h{j + 1}", tuple(b), h, _add_sos_block(pb, b, h)))
    t = _add_margin(pb, basis0) if lam_fixed is not None else None
    prog = pb.build()
    extras = {"margin_col": pb.column_index(t) if t else None, "lam_fixed": lam_fixed}
    return SOSProgram(prog, blocks, "putinar", r, n, d0, 0 if lam is not None else None, extras)


def _certificate_from_solution(sp: SOSProgram, res: SolverResult, shift, emb=None, target=None,
                               kind=None) -> SOSCertificate:
    _, _, mats = sp.program.unpack(res.primal)
    terms = []
    margin = 0.0
    if sp.extras.get("margin_col") is not None:
        margin = float(res.primal[sp.extras["margin_col"]])
    for blk in sp.blocks:
        G = mats[blk.index]
        if blk.label == "sigma0" and margin:
            G = G + margin * np.eye(G.shape[0])
        gram = [[float(v) for v in row] for row in G]
        terms.append(SOSTerm(blk.label, gram, blk.basis, blk.multiplier))
        for k, extra in enumerate(blk.shared_with):
            basis = tuple(_power_basis(extra, len(blk.basis) - 1))
            terms.append(SOSTerm(f"{blk.label}.{k + 2}", gram, basis, extra))
    return SOSCertificate(kind or sp.kind, sp.nvars, terms, shift, sp.rank, emb, sp.deg_sigma0,
                          target, exact=False)


def _solve_bound(sp: SOSProgram, tag: str, backend, time_limit, emb=None, **extra_details) -> HierarchyResult:
    t0 = time.monotonic()
    res = solve_conic(sp.program, backend=backend, time_limit=time_limit)
    wall = time.monotonic() - t0
    details = {"psd_blocks": _size_summary(sp.program), "rows": sp.program.n_rows,
               "message": res.message, **extra_details}
    if res.status == "infeasible":
        return HierarchyResult(sp.rank, NEG_INF, "lower", "no-certificate", tag, None, wall, details=details)
    if not res.ok:
        return HierarchyResult(sp.rank, float("nan"), "lower", res.status, tag, None, wall, details=details)
    lam = float(res.primal[sp.lam_col])
    cert = _certificate_from_solution(sp, res, lam, emb)
    details.update({k: v for k, v in res.residuals.items()})
    return HierarchyResult(sp.rank, lam, "lower", _accuracy_status(res), tag, cert, wall, details=details)


def _accuracy_status(res: SolverResult) -> str:
    """``optimal`` when the cone residuals pass, ``inaccurate`` otherwise."""
    return "optimal" if accept_residuals(res) else "inaccurate"


def _size_summary(prog: ConicProgram) -> str:
    sizes: Dict[int, int] = {}
    for k in prog.psd_blocks:
        sizes[k] = sizes.get(k, 0) + 1
    parts = [f"{c}x{k}" for k, c in sorted(sizes.items(), reverse=True)]
    if prog.n_nonneg:
        parts.append(f"{prog.n_nonneg} nonneg")
    return ", ".join(parts)


def prepare_gvector(S: SemialgebraicSet, emb: SimplexEmbedding, U=None, m1: Optional[int] = None,
                    threshold: int = 3) -> Tuple[SemialgebraicSet, GVector]:
    """Reorder few-variable constraints first and build the box-layout g vector.

    Returns the reordered set (whose constraint order the embedding must
    follow) and the vector.
    """
    order, auto_m1 = few_variable_order(S, threshold)
    S2 = S.reordered(order)
    ut = list(emb.U_tilde[: S.m])
    ut2 = tuple(ut[j] for j in order) + tuple(emb.U_tilde[S.m :])
    emb2 = SimplexEmbedding(emb.L, emb.M, emb.M_hat, ut2, emb.slack)
    return S2, g_vector(S2, emb2, U, auto_m1 if m1 is None else m1)


def sparse_lower_bound(
    p: Polynomial,
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    r: int,
    *,
    deg_sigma0: Optional[int] = None,
    m1: Optional[int] = None,
    U=None,
    g: Optional[GVector] = None,
    shared_rho: bool = False,
    backend: Optional[str] = None,
    time_limit: Optional[float] = None,
) -> HierarchyResult:
    if g is None:
        _, g = prepare_gvector(S, emb, U, m1)
    try:
        sp = build_sparse_program(p, S, emb, g, r, deg_sigma0, shared_rho=shared_rho)
    except ValueError as exc:
        return HierarchyResult(r, NEG_INF, "lower", "inadmissible", "sparse",
                               details={"message": str(exc)})
    return _solve_bound(sp, "sparse", backend, time_limit, emb, m1=g.m1)


def putinar_lower_bound(
    p: Polynomial,
    S: SemialgebraicSet,
    r: int,
    *,
    deg_sigma0: Optional[int] = None,
    extra_constraints: Sequence[Polynomial] = (),
    backend: Optional[str] = None,
    time_limit: Optional[float] = None,
) -> HierarchyResult:
    try:
        sp = build_putinar_program(p, S, r, deg_sigma0, extra_constraints=extra_constraints)
    except ValueError as exc:
        return HierarchyResult(r, NEG_INF, "lower", "inadmissible", "lasserre",
                               details={"message": str(exc)})
    return _solve_bound(sp, "lasserre", backend, time_limit)


def certify_sos(
    sp_factory,
    p: Polynomial,
    bound: float,
    *,
    margin: Optional[float] = None,
    max_denominator: int = 10**9,
    backend: Optional[str] = None,
    emb: Optional[SimplexEmbedding] = None,
    max_reductions: int = 4,
) -> Tuple[Optional[SOSCertificate], Optional[VerificationReport]]:
    """Certificate for p - (bound - margin) that survives rational rounding.

    ``sp_factory(lam_fixed, sigma0_exclude)`` must build the
    margin-maximizing program.  When the best margin is zero, sigma0 is
    singular for structural reasons; the basis monomials whose diagonal is
    forced to zero are dropped and the program is re-solved.  The Grams are
    then rounded, the residual is projected onto sigma0 and the result is
    verified exactly.
    """
    margin = margin if margin is not None else 1e-4 * (1 + abs(bound))
    lam = lift_rational(bound - margin, 10**6)
    exclude: List[Tuple[int, ...]] = []
    for _ in range(max_reductions + 1):
        sp = sp_factory(float(lam), tuple(exclude))
        res = solve_conic(sp.program, backend=backend)
        if not res.ok:
            return None, None
        t = float(res.primal[sp.extras["margin_col"]])
        if t > 1e-7:
            break
        _, _, mats = sp.program.unpack(res.primal)
        s0 = next(b for b in sp.blocks if b.label == "sigma0")
        diag = np.diag(mats[s0.index]) + t
        cut = 1e-6 * max(1.0, float(np.max(np.abs(diag))))
        new = [next(iter(b.terms)) for b, v in zip(s0.basis, diag) if v < cut]
        if not new:
            break
        exclude.extend(new)
    cert = _certificate_from_solution(sp, res, lam, emb)
    cert.meta["sigma0_excluded"] = [list(e) for e in exclude]
    rounded = round_sos_certificate(cert, p, max_denominator, repair_label="sigma0")
    rounded.shift = lam
    return rounded, verify_sparse_certificate(rounded, p)


# -- simplex certificate used by the reformulations ------------------------------------

def _simplex_certificate_blocks(pb: ProgramBuilder, N: int, R, r: int, key, deg_sigma0=None):
    """sigma0 + sigma1 (R^2 - |y|^2 - (R - e'y)^2) + rho0(R - e'y)(R - e'y) + sum rho_i(y_i) y_i."""
    R = float(R)
    ys = Polynomial.variables(N)
    one = Polynomial.constant(N, 1.0)
    slack = R - sum_vars(N).to_float()
    sphere = R * R - sum_polys((y * y for y in ys), N).to_float() - slack * slack
    blocks = []
    d0 = r if deg_sigma0 is None else deg_sigma0
    b0 = _monomial_basis(N, d0 // 2)
    blocks.append(SOSBlock("sigma0", tuple(b0), one, _add_sos_block(pb, b0, one, key)))
    if r >= 2:
        b1 = _monomial_basis(N, (r - 2) // 2)
        blocks.append(SOSBlock("sigma1", tuple(b1), sphere, _add_sos_block(pb, b1, sphere, key)))
    k = _univariate_half(r, 1)
    if k >= 0:
        for label, arg in [("rho0", slack)] + [(f"rho{i + 1}", ys[i].to_float()) for i in range(N)]:
            b = _power_basis(arg, k)
            blocks.append(SOSBlock(label, tuple(b), arg, _add_sos_block(pb, b, arg, key)))
    return blocks


def _dmax(p: Polynomial, gens: Sequence[Polynomial]) -> int:
    return max([h.degree for h in gens] + [math.ceil(p.degree / 2)])


def _f_columns(pb: ProgramBuilder, N: int, D: int):
    """One free coefficient per monomial of F (degree <= D in N variables)."""
    return [(beta, pb.free()) for beta in monomials_up_to(N, D)]


@dataclass
class ReformulationProgram:
    sos: SOSProgram
    f_cols: List[Tuple[Tuple[int, ...], tuple]]
    D: int
    N: int
    builder_cols: Dict[tuple, int]


def _build_copositive(p, gens, r, deg_sigma0, with_lambda=True):
    n = p.nvars
    m = len(gens)
    N = n + m
    dmax = _dmax(p, gens)
    D = 2 * dmax
    pb = ProgramBuilder()
    lam = pb.free() if with_lambda else None
    if lam is not None:
        pb.objective(lam, 1.0)
    f_cols = _f_columns(pb, N, D)
    # identity rows in x: (1 + e'x)^(D - deg p) (p - lambda) = F(x, h(x))
    q = (1 + sum_vars(n)) ** (D - p.degree)
    qp = q * p
    for e, c in qp.terms.items():
        pb.add_rhs(("id", e), -float(c))
    if lam is not None:
        for e, c in q.terms.items():
            pb.add(("id", e), lam, -float(c))
    factors = Polynomial.variables(n) + [_float(h) for h in gens]
    cache = _ProductCache([_float(f) for f in factors])
    ws = sum_vars(N).to_float()
    lin = 1.0 - ws
    lin_pows = [Polynomial.constant(N, 1.0)]
    for _ in range(D):
        lin_pows.append(lin_pows[-1] * lin)
    for beta, col in f_cols:
        for e, c in cache.get(beta).terms.items():
            pb.add(("id", e), col, -float(c))
        # copositivity rows: F^h(1 - e'w, w) = simplex certificate
        mono = Polynomial.monomial(beta, 1.0)
        for e, c in (mono * lin_pows[D - sum(beta)]).terms.items():
            pb.add(("cop", e), col, float(c))
    # the certificate side enters the copositivity rows with a minus sign
    blocks = _simplex_certificate_blocks(_NegatedRows(pb), N, 1, r, lambda e: ("cop", e), deg_sigma0)
    return pb, lam, f_cols, blocks, D, N


class _NegatedRows:
    """Builder proxy adding every Gram coefficient with the opposite sign."""

    def __init__(self, pb: ProgramBuilder):
        self.pb = pb

    def psd_block(self, k):
        return self.pb.psd_block(k)

    def add_gram(self, key, blk, i, j, coef):
        self.pb.add_gram(key, blk, i, j, -coef)


def copositive_lower_bound(
    p: Polynomial,
    S: SemialgebraicSet,
    r: int,
    *,
    deg_sigma0: Optional[int] = None,
    backend: Optional[str] = None,
    time_limit: Optional[float] = None,
    heuristic_samples: int = 200,
) -> HierarchyResult:
    """Lower bound from the copositive reformulation with z eliminated (S inside the orthant)."""
    if not S.explicit_nonneg:
        raise ValueError("copositive_lower_bound needs a set with explicit x >= 0")
    gens = tuple(h for h in S.constraints if h.degree > 0)
    dmax = _dmax(p, gens)
    if r < 2 * dmax:
        raise ValueError(f"rank {r} below 2*d_max = {2 * dmax}")
    t0 = time.monotonic()
    pb, lam, f_cols, blocks, D, N = _build_copositive(p, gens, r, deg_sigma0)
    prog = pb.build()
    sp = SOSProgram(prog, blocks, "simplex", r, N, deg_sigma0, pb.column_index(lam))
    build_time = time.monotonic() - t0
    res = solve_conic(prog, backend=backend, time_limit=time_limit)
    wall = time.monotonic() - t0
    report = strong_positivity_heuristic(p, S, samples=heuristic_samples, seed=0, check_set=False)
    details = {"d_max": dmax, "F_coefficients": len(f_cols), "rows": prog.n_rows,
               "psd_blocks": _size_summary(prog), "build_time": build_time,
               "strong_positivity": report.label, "message": res.message}
    if res.status == "infeasible":
        return HierarchyResult(r, NEG_INF, "lower", "no-certificate", "copositive", None, wall, details=details)
    if not res.ok:
        return HierarchyResult(r, float("nan"), "lower", res.status, "copositive", None, wall, details=details)
    lam_v = float(res.primal[sp.lam_col])
    F = Polynomial(N, {beta: float(res.primal[pb.column_index(col)]) for beta, col in f_cols})
    G = cone_to_simplex(F, D)
    cert = _certificate_from_solution(sp, res, 0.0, target=G, kind="simplex")
    details.update(res.residuals)
    details["F"] = F
    details["heuristic_report"] = report
    return HierarchyResult(r, lam_v, "lower", _accuracy_status(res), "copositive", cert, wall, details=details)


def compact_simplex_reformulation(
    p: Polynomial,
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    r: int,
    *,
    deg_sigma0: Optional[int] = None,
    backend: Optional[str] = None,
    time_limit: Optional[float] = None,
) -> HierarchyResult:
    """max lambda with p - lambda = F(x - L, h(x)) and F >= 0 on the simplex of radius M_hat - e'L."""
    gens = lp_generators(S, emb)
    n, m = p.nvars, len(gens)
    N = n + m
    D = 2 * _dmax(p, gens)
    if r < D:
        raise ValueError(f"rank {r} below 2*d_max = {D}")
    R = emb.M_hat - sum(emb.L, Fraction(0))
    t0 = time.monotonic()
    pb = ProgramBuilder()
    lam = pb.free()
    pb.objective(lam, 1.0)
    for e, c in p.terms.items():
        pb.add_rhs(("id", e), -float(c))
    pb.add(("id", (0,) * n), lam, -1.0)
    f_cols = _f_columns(pb, N, D)
    xs = Polynomial.variables(n)
    factors = [xs[i] - emb.L[i] for i in range(n)] + list(gens)
    cache = _ProductCache([_float(f) for f in factors])
    for beta, col in f_cols:
        for e, c in cache.get(beta).terms.items():
            pb.add(("id", e), col, -float(c))
        pb.add(("cop", beta), col, 1.0)
    blocks = _simplex_certificate_blocks(_NegatedRows(pb), N, R, r, lambda e: ("cop", e), deg_sigma0)
    prog = pb.build()
    res = solve_conic(prog, backend=backend, time_limit=time_limit)
    wall = time.monotonic() - t0
    details = {"F_coefficients": len(f_cols), "rows": prog.n_rows, "psd_blocks": _size_summary(prog),
               "radius": float(R), "message": res.message}
    if res.status == "infeasible":
        return HierarchyResult(r, NEG_INF, "lower", "no-certificate", "compact", None, wall, details=details)
    if not res.ok:
        return HierarchyResult(r, float("nan"), "lower", res.status, "compact", None, wall, details=details)
    lam_v = float(res.primal[pb.column_index(lam)])
    F = Polynomial(N, {beta: float(res.primal[pb.column_index(col)]) for beta, col in f_cols})
    sp = SOSProgram(prog, blocks, "simplex", r, N, deg_sigma0, pb.column_index(lam))
    cert = _certificate_from_solution(sp, res, 0.0, emb=emb, target=F, kind="simplex")
    details.update(res.residuals)
    details["F"] = F
    return HierarchyResult(r, lam_v, "lower", _accuracy_status(res), "compact", cert, wall, details=details)


# -- upper bounds --------------------------------------------------------------------

def upper_bound_eps(
    p: Polynomial,
    S: SemialgebraicSet,
    lambda_lb: Optional[float],
    eps: float,
    r: Optional[int] = None,
    *,
    emb: Optional[SimplexEmbedding] = None,
    box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    samples: int = 2000,
    seed: int = 0,
    points: Sequence[Sequence[float]] = (),
) -> HierarchyResult:
    """Upper bound on min p over S from the epsilon-perturbed copositive program.

    Copositivity of F is relaxed to non-negativity at the lifted images
    (x, h(x), p(x) - lambda_lb) of sampled feasible x (plus ``points``).
    At such a point the identity turns F >= 0 into the row
    lambda <= p(x) + eps (1 + e'|x|)^deg p, and F itself can always be taken
    as the right-hand side, so F drops out and an LP in lambda remains.
    Relaxing the cone can only raise the optimum, so the value is an upper
    bound on lambda_eps, itself an upper bound on min p.  For a fixed point
    set the bound is non-increasing as eps decreases.

    ``lambda_lb`` defaults to the rank-r LP lower bound minus 1 (needs
    ``emb``).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t0 = time.monotonic()
    n = p.nvars
    if lambda_lb is None:
        if emb is None:
            raise ValueError("lambda_lb is required when no embedding is given")
        lb = lp_lower_bound(p, S, emb, r if r is not None else max(p.degree, 1))
        if not lb.is_finite:
            raise ValueError("LP lower bound unavailable for the default lambda_lb")
        lambda_lb = lb.bound - 1.0
    if box is None:
        if emb is not None:
            box = ([float(v) for v in emb.L], [float(emb.M) + max(0.0, -float(v)) for v in emb.L])
        else:
            lo = 0.0 if S.explicit_nonneg else -2.0
            box = ([lo] * n, [2.0] * n)
    pts = sample_feasible(S, box, samples, seed)
    extra = np.array([list(map(float, x)) for x in points]).reshape(-1, n) if len(points) else np.zeros((0, n))
    if extra.size:
        extra = extra[S.feasible_mask(extra, 1e-12)]
    pts = np.vstack([extra, pts]) if extra.size else pts
    if pts.shape[0] == 0:
        return HierarchyResult(r or 0, float("inf"), "upper", "no-points", "upper-eps",
                               wall_time=time.monotonic() - t0, details={"eps": eps})
    pf = p.to_float()
    pv = pf.evaluate_many(pts)
    keep = pv >= lambda_lb
    pts, pv = pts[keep], pv[keep]
    if pts.shape[0] == 0:
        return HierarchyResult(r or 0, float("inf"), "upper", "no-points", "upper-eps",
                               wall_time=time.monotonic() - t0, details={"eps": eps})
    if not S.explicit_nonneg:
        # lift through x = y - z; (1 + e'y + e'z) uses |x|
        scale = 1 + np.abs(pts).sum(axis=1)
    else:
        scale = 1 + pts.sum(axis=1)
    qv = scale ** p.degree
    # the LP  max lambda s.t. lambda <= p(x_k) + eps q(x_k)  has one variable,
    # so its optimum is the smallest right-hand side
    rhs = pv + eps * qv
    best = int(np.argmin(rhs))
    val = float(rhs[best])
    wall = time.monotonic() - t0
    details = {"eps": eps, "lambda_lb": lambda_lb, "points": int(len(pv)),
               "argmin": [float(v) for v in pts[best]]}
    return HierarchyResult(r or 0, val, "upper", "optimal", "upper-eps", None, wall, details=details)


# -- strong positivity ---------------------------------------------------------------

@dataclass
class StrongPositivityReport:
    witness_kind: Optional[str]  # "set" (p <= 0 on S) | "tilde" (p~ <= 0 on S~) | None
    point: Optional[Tuple]
    value: Optional[float]
    checked_set: int
    checked_directions: int
    label: str

    @property
    def found(self) -> bool:
        return self.witness_kind is not None


def _structured_directions(n: int, nonneg: bool) -> List[List[Fraction]]:
    dirs = []
    for i in range(n):
        v = [Fraction(0)] * n
        v[i] = Fraction(1)
        dirs.append(v)
        if not nonneg:
            dirs.append([-c for c in v])
    for i, j in combinations(range(n), 2):
        for a, b in ((1, 1), (1, 2), (2, 1), (1, -1), (-1, 1), (-1, -1)):
            if nonneg and (a < 0 or b < 0):
                continue
            v = [Fraction(0)] * n
            v[i], v[j] = Fraction(a), Fraction(b)
            dirs.append(v)
    dirs.append([Fraction(1)] * n)
    return dirs


def strong_positivity_heuristic(
    p: Polynomial,
    S: SemialgebraicSet,
    samples: int = 1000,
    seed: int = 0,
    box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    tol: float = 1e-9,
    check_set: bool = True,
) -> StrongPositivityReport:
    """Look for x in S with p(x) <= 0 or a direction d != 0 in S~ with p~(d) <= 0.

    Structured directions (axes, coordinate pairs, all-ones) are tested in
    exact arithmetic, which catches rays lying exactly on S~'s equality
    parts; random unit directions are tested in floats.  A clean pass is a
    heuristic outcome, never a proof.  ``check_set=False`` skips the search
    on S itself (bound computations only need the condition at infinity).
    """
    n = S.nvars
    ptilde = p if p.is_zero() else p.top_component()
    St = tilde_set(S)
    checked_dirs = 0
    for d in _structured_directions(n, S.explicit_nonneg):
        checked_dirs += 1
        if St.contains(d):
            v = ptilde.evaluate(d)
            if v <= 0:
                return StrongPositivityReport("tilde", tuple(d), float(v), 0, checked_dirs,
                                              "witness: top component not positive on the tilde set")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, n))
    if S.explicit_nonneg:
        dirs = np.abs(dirs)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    mask = St.feasible_mask(dirs, tol)
    checked_dirs += samples
    if mask.any():
        vals = ptilde.to_float().evaluate_many(dirs[mask])
        k = int(np.argmin(vals))
        if vals[k] <= tol:
            return StrongPositivityReport("tilde", tuple(dirs[mask][k]), float(vals[k]), 0, checked_dirs,
                                          "witness: top component not positive on the tilde set")
    if not check_set:
        return StrongPositivityReport(None, None, None, 0, checked_dirs,
                                      "no witness at infinity found (heuristic, not a proof)")
    if box is None:
        lo = 0.0 if S.explicit_nonneg else -2.0
        box = ([lo] * n, [2.0] * n)
    pts = sample_feasible(S, box, samples, seed)
    if len(pts):
        vals = p.to_float().evaluate_many(pts)
        k = int(np.argmin(vals))
        if vals[k] <= 0:
            return StrongPositivityReport("set", tuple(pts[k]), float(vals[k]), len(pts), checked_dirs,
                                          "witness: p not positive on the set")
    return StrongPositivityReport(None, None, None, len(pts), checked_dirs,
                                  "no witness found (heuristic, not a proof)")
