"""Solver-independent certificate verification.

Every check re-expands the certificate in rational arithmetic.  Float data
are first turned into rationals: exactly (``Fraction(float)``) when the
certificate is already exact, or by continued-fraction rounding plus a
projection repair when a Gram-based certificate came from a solver.

Verdicts:
    exact-pass      zero residual and every multiplier admissible exactly
    tolerance-pass  residual and admissibility violations within tolerance
    fail            anything else
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import SOSCertificate, SOSTerm
from .polycore import DEFAULT_MAX_DENOMINATOR, Polynomial, lift_rational
from .polya_lp import LPCertificate, lp_generators, lp_term_polynomial
from .semialg import SemialgebraicSet, SimplexEmbedding

EXACT_PASS = "exact-pass"
TOLERANCE_PASS = "tolerance-pass"
FAIL = "fail"


@dataclass
class Admissibility:
    name: str
    passed: bool
    exact: bool
    reason: str = ""


@dataclass
class VerificationReport:
    identity_residual: Polynomial
    admissibility: List[Admissibility]
    verdict: str
    tolerances: Dict[str, float]
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in (EXACT_PASS, TOLERANCE_PASS)

    def worst_residual(self) -> Tuple[Optional[Tuple[int, ...]], float]:
        if self.identity_residual.is_zero():
            return None, 0.0
        e, c = max(self.identity_residual.terms.items(), key=lambda kv: abs(kv[1]))
        return e, float(c)

    def summary(self) -> Dict[str, Any]:
        mono, val = self.worst_residual()
        return {
            "verdict": self.verdict,
            "residual_terms": len(self.identity_residual),
            "max_residual": abs(val),
            "max_residual_monomial": list(mono) if mono is not None else None,
            "failed_multipliers": [
                {"name": a.name, "reason": a.reason} for a in self.admissibility if not a.passed
            ],
            **{k: v for k, v in self.details.items() if isinstance(v, (str, int, float, bool))},
        }


def _exact(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _exact_poly(p: Polynomial) -> Polynomial:
    if p.is_exact:
        return p
    return Polynomial(p.nvars, {e: Fraction(c) for e, c in p.terms.items()})


def _verdict(residual: Polynomial, adm: List[Admissibility], scale: float, tol: float) -> str:
    if residual.is_zero() and all(a.passed and a.exact for a in adm):
        return EXACT_PASS
    res_ok = residual.max_abs_coeff() <= tol * (1 + scale)
    if res_ok and all(a.passed for a in adm):
        return TOLERANCE_PASS
    return FAIL


# -- PSD checks ------------------------------------------------------------------

def ldl_psd(G: Sequence[Sequence]) -> Tuple[bool, str]:
    """Exact PSD test by symmetric elimination with rational pivots.

    A zero pivot is allowed only when the rest of its row is zero (the
    semidefinite case); a negative pivot proves indefiniteness.
    """
    k = len(G)
    A = [[_exact(v) for v in row] for row in G]
    for i in range(k):
        for j in range(i + 1, k):
            if A[i][j] != A[j][i]:
                return False, f"not symmetric at ({i}, {j})"
    for p in range(k):
        d = A[p][p]
        if d < 0:
            return False, f"negative pivot {float(d):.3e} at index {p}"
        if d == 0:
            if any(A[p][j] != 0 for j in range(p + 1, k)):
                return False, f"zero pivot with non-zero off-diagonal at index {p}"
            continue
        row = A[p]
        for i in range(p + 1, k):
            f = row[i] / d
            if f == 0:
                continue
            Ai = A[i]
            for j in range(i, k):
                Ai[j] -= f * row[j]
            for j in range(i + 1, k):
                A[j][i] = Ai[j]
    return True, ""


def min_eigenvalue(G) -> float:
    M = np.array([[float(v) for v in row] for row in G])
    if M.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((M + M.T) / 2)[0])


def check_gram(name: str, G, tol: float) -> Admissibility:
    ok, why = ldl_psd(G)
    if ok:
        return Admissibility(name, True, True)
    lam = min_eigenvalue(G)
    if lam >= -tol:
        return Admissibility(name, True, False, f"{why}; min eigenvalue {lam:.3e} within tolerance")
    return Admissibility(name, False, False, f"{why}; min eigenvalue {lam:.3e}")


# -- univariate non-negativity ------------------------------------------------------

def _trim(a: List[Fraction]) -> List[Fraction]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _deriv(a):
    return _trim([a[i] * i for i in range(1, len(a))])


def _divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = b[-1]
    while len(a) >= len(b) and a:
        f = a[-1] / lb
        s = len(a) - len(b)
        q[s] = f
        for i, c in enumerate(b):
            a[s + i] -= f * c
        a.pop()
        _trim(a)
    return _trim(q), a


def _gcd(a, b):
    while b:
        _, r = _divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a] if a else a


def _peval(a, t):
    v = Fraction(0)
    for c in reversed(a):
        v = v * t + c
    return v


def square_free_factors(a: List[Fraction]) -> List[List[Fraction]]:
    """Yun's algorithm: a = lc * prod_i f_i^i with f_i square-free and coprime."""
    a = _trim([Fraction(c) for c in a])
    out = []
    b = _deriv(a)
    c = _gcd(a, b) if b else [Fraction(1)]
    w, _ = _divmod(a, c)
    y, _ = _divmod(b, c) if b else ([], [])
    while len(w) > 1:
        z = _trim([yi - di for yi, di in zip(y + [Fraction(0)] * len(w), _deriv(w) + [Fraction(0)] * len(y))])
        g = _gcd(w, z) if z else [c / w[-1] for c in w]
        out.append(g)
        w, _ = _divmod(w, g)
        y, _ = _divmod(z, g) if z else ([], [])
    return out


def _sturm(a):
    seq = [a, _deriv(a)]
    while seq[-1] and len(seq[-1]) > 1:
        _, r = _divmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(vals) -> int:
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def _count_at(seq, t) -> int:
    if t == math.inf:
        return _sign_changes([s[-1] for s in seq])
    if t == -math.inf:
        return _sign_changes([s[-1] * (-1) ** (len(s) - 1) for s in seq])
    return _sign_changes([_peval(s, t) for s in seq])


def count_real_roots(a, lo=-math.inf, hi=math.inf) -> int:
    """Distinct real roots of a square-free a in (lo, hi]."""
    if len(a) <= 1:
        return 0
    seq = _sturm(a)
    return _count_at(seq, lo) - _count_at(seq, hi)


def _root_bound(a) -> Fraction:
    return 1 + max(abs(c / a[-1]) for c in a[:-1])


def _isolate(a, lo, hi, seq=None) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint intervals (l, r] each holding one root of square-free a."""
    seq = seq or _sturm(a)
    cnt = _count_at(seq, lo) - _count_at(seq, hi)
    if cnt == 0:
        return []
    if cnt == 1:
        return [(lo, hi)]
    mid = (lo + hi) / 2
    return _isolate(a, lo, mid, seq) + _isolate(a, mid, hi, seq)


@dataclass
class UnivariateVerdict:
    nonneg: bool
    witness: Optional[Fraction] = None
    value: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.nonneg


def _coeffs(rho) -> List[Fraction]:
    if isinstance(rho, Polynomial):
        if rho.nvars != 1:
            raise ValueError("univariate polynomial expected")
        d = rho.degree
        return _trim([_exact(rho.coeff((k,))) for k in range(d + 1)])
    return _trim([_exact(c) for c in rho])


def univariate_nonneg_exact(rho, domain: str = "real") -> UnivariateVerdict:
    """Exact decision of rho >= 0 on R (``real``) or on t >= 0 (``halfline``).

    Sign changes of rho happen exactly at its odd-multiplicity roots, the
    roots of the product of the odd-index square-free factors.  Without such
    roots in the domain the sign is that of the leading coefficient;
    otherwise a rational point with a negative value is returned.
    """
    if domain not in ("real", "halfline"):
        raise ValueError("domain must be 'real' or 'halfline'")
    a = _coeffs(rho)
    if not a:
        return UnivariateVerdict(True)
    if len(a) == 1:
        if a[0] >= 0:
            return UnivariateVerdict(True)
        return UnivariateVerdict(False, Fraction(0), a[0])
    odd = [Fraction(1)]
    for i, f in enumerate(square_free_factors(a), start=1):
        if i % 2 == 1:
            odd = _mul(odd, f)
    B = _root_bound(a)
    lo = Fraction(0) if domain == "halfline" else -B
    if len(odd) == 1 or count_real_roots(odd, lo, B) == 0:
        if a[-1] > 0:
            return UnivariateVerdict(True)
        return UnivariateVerdict(False, B, _peval(a, B))
    sqf = _divmod(a, _gcd(a, _deriv(a)))[0]
    for l, r in _isolate(odd, lo, B):
        t = _negative_near_root(a, odd, sqf, l, r)
        if t is not None:
            return UnivariateVerdict(False, t, _peval(a, t))
    return UnivariateVerdict(False)  # unreachable in exact arithmetic


def _negative_near_root(a, odd, sqf, l, r) -> Optional[Fraction]:
    """(l, r] holds one odd root; shrink until its endpoints bracket only that root."""
    for _ in range(2000):
        if _peval(odd, r) == 0:
            # a rational root on the right end: centre the interval on it
            q = (r - l) / 4
            l, r = r - q, r + q
            continue
        if (count_real_roots(sqf, l, r) == 1
                and _peval(a, l) != 0 and _peval(a, r) != 0):
            for t in (l, r):
                if _peval(a, t) < 0:
                    return t
        mid = (l + r) / 2
        if _peval(odd, mid) == 0:
            q = (r - l) / 4
            l, r = mid - q, mid + q
        elif count_real_roots(odd, l, mid) == 1:
            r = mid
        else:
            l = mid
    return None


def _mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# -- LP certificates ---------------------------------------------------------------

def verify_lp_certificate(
    cert: LPCertificate,
    p: Polynomial,
    S: Optional[SemialgebraicSet] = None,
    emb: Optional[SimplexEmbedding] = None,
    tol: float = 1e-8,
) -> VerificationReport:
    """Re-expand sum c * (x-L)^a h^b (M-e'x)^g exactly and compare with p - shift."""
    n = p.nvars
    adm: List[Admissibility] = []
    gens = cert.generators
    if S is not None and emb is not None:
        expected = lp_generators(S, emb)
        if len(expected) != len(gens) or any(_exact_poly(a) != _exact_poly(b) for a, b in zip(expected, gens)):
            adm.append(Admissibility("generators", False, True,
                                     "certificate generators differ from the set's constraints"))
        if tuple(_exact(v) for v in emb.L) != tuple(_exact(v) for v in cert.L) or _exact(emb.M) != _exact(cert.M):
            adm.append(Admissibility("bounds", False, True, "certificate L/M differ from the embedding"))
    gens = tuple(_exact_poly(h) for h in gens)
    L = [_exact(v) for v in cert.L]
    M = _exact(cert.M)
    total: Dict = {}
    for k, t in enumerate(cert.terms):
        prod = lp_term_polynomial(t, n, L, M, gens)
        if t.gram is not None:
            basis = [Polynomial.monomial(e) for e in t.gram_basis]
            G = [[_exact(v) for v in row] for row in t.gram]
            adm.append(check_gram(f"term{k}", G, tol))
            val = SOSTerm(f"term{k}", G, tuple(basis), prod).value()
        else:
            c = _exact(t.coeff)
            if c < 0:
                adm.append(Admissibility(f"term{k}", False, True, f"negative coefficient {c}"))
            val = prod * c
        for e, c in val.terms.items():
            total[e] = total.get(e, 0) + c
    residual = Polynomial(n, total) - (_exact_poly(p) - _exact(cert.shift))
    if not any(a.name.startswith("term") for a in adm):
        adm.append(Admissibility("coefficients", True, True))
    scale = _exact_poly(p).max_abs_coeff()
    return VerificationReport(residual, adm, _verdict(residual, adm, scale, tol), {"identity": tol},
                              {"kind": "lp", "terms": len(cert.terms)})


# -- SOS certificates ---------------------------------------------------------------

def _is_univariate_in(basis: Sequence[Polynomial]) -> Optional[Polynomial]:
    """If basis = (1, g, g^2, ...) return g, else None."""
    if len(basis) < 2 or basis[0] != Polynomial.constant(basis[0].nvars, 1):
        return None
    g = basis[1]
    cur = g
    for b in basis[2:]:
        cur = cur * g
        if cur != b:
            return None
    return g


def _univariate_from_gram(G) -> List[Fraction]:
    k = len(G)
    out = [Fraction(0)] * (2 * k - 1)
    for i in range(k):
        for j in range(k):
            out[i + j] += _exact(G[i][j])
    return out


def allowed_multipliers(S: SemialgebraicSet, emb: Optional[SimplexEmbedding] = None,
                        U: Optional[Sequence] = None) -> List[Polynomial]:
    """Polynomials known to be >= 0 on S: 1, the constraints, and the derived entries.

    With an embedding (re-derived from S, so its constants are trusted only
    if they match) this adds both g-vector layouts and their sphere factors.
    """
    n = S.nvars
    out = [Polynomial.constant(n, 1)] + [_exact_poly(h) for h in S.all_constraints()]
    if emb is not None:
        from .semialg import g_vector, g_vector_simplex

        for g in (g_vector(S, emb, U, 0), g_vector_simplex(S, emb)):
            out.extend(_exact_poly(e) for e in g.entries)
            out.append(_exact_poly(g.sphere_factor()))
    return out


def _positive_multiple(m: Polynomial, a: Polynomial) -> bool:
    """m = c a for a rational c > 0."""
    if m.is_zero() or a.is_zero():
        return m.is_zero() and a.is_zero()
    e, c = next(iter(a.terms.items()))
    ratio = m.coeff(e) / c
    return ratio > 0 and m == a * ratio


def _embedding_admissibility(S: SemialgebraicSet, emb: SimplexEmbedding) -> Admissibility:
    from .semialg import derive_embedding

    if emb.slack < 0:
        return Admissibility("embedding", False, True, "negative slack")
    ref = derive_embedding(S, emb.L, emb.M, slack=emb.slack, strict=False)
    if ref.M_hat != emb.M_hat or ref.U_tilde != tuple(emb.U_tilde):
        return Admissibility("embedding", False, True, "M_hat or U_tilde do not follow from the set")
    return Admissibility("embedding", True, True)


def verify_sparse_certificate(cert: SOSCertificate, p: Polynomial, tol: float = 1e-8,
                              S: Optional[SemialgebraicSet] = None,
                              U: Optional[Sequence] = None) -> VerificationReport:
    """Exact identity plus PSD-ness of every Gram block.

    Univariate blocks (basis 1, g, g^2, ...) whose Gram fails the exact PSD
    test are also accepted when the univariate polynomial they define is
    exactly non-negative on R, which makes it a sum of squares.

    Given the set S, every multiplier must also be one of
    ``allowed_multipliers(S, cert.embedding, U)`` and the embedding must
    follow from S and its declared L, M.  The bounds L, M (and U) are input
    data and are trusted.
    """
    adm: List[Admissibility] = []
    if S is not None and cert.target is None:
        if cert.embedding is not None:
            adm.append(_embedding_admissibility(S, cert.embedding))
        allowed = allowed_multipliers(S, cert.embedding, U)
        for t in cert.terms:
            if not any(_positive_multiple(_exact_poly(t.multiplier), a) for a in allowed):
                adm.append(Admissibility(f"{t.label}.multiplier", False, True,
                                         "multiplier is not known to be non-negative on the set"))
    n = p.nvars
    total: Dict = {}
    for t in cert.terms:
        G = [[_exact(v) for v in row] for row in t.gram]
        a = check_gram(t.label, G, tol)
        if not (a.passed and a.exact) and _is_univariate_in(t.basis) is not None:
            uv = univariate_nonneg_exact(_univariate_from_gram(G))
            if uv.nonneg:
                a = Admissibility(t.label, True, True, "univariate polynomial non-negative on R")
        adm.append(a)
        term = SOSTerm(t.label, G, tuple(_exact_poly(b) for b in t.basis), _exact_poly(t.multiplier))
        for e, c in term.value().terms.items():
            total[e] = total.get(e, 0) + c
    target = _exact_poly(cert.target) if cert.target is not None else _exact_poly(p) - _exact(cert.shift)
    residual = Polynomial(n, total) - target
    scale = target.max_abs_coeff()
    return VerificationReport(residual, adm, _verdict(residual, adm, scale, tol), {"identity": tol, "psd": tol},
                              {"kind": cert.kind, "terms": len(cert.terms)})


verify_putinar_certificate = verify_sparse_certificate


def verify_certificate(cert, p: Polynomial, S=None, emb=None, tol: float = 1e-8, U=None) -> VerificationReport:
    if isinstance(cert, LPCertificate):
        return verify_lp_certificate(cert, p, S, emb, tol)
    if isinstance(cert, SOSCertificate):
        return verify_sparse_certificate(cert, p, tol, S, U)
    raise TypeError(f"cannot verify {type(cert).__name__}")


# -- rounding ---------------------------------------------------------------------

def _pair_index(term: SOSTerm) -> Optional[Dict[Tuple[int, ...], List[Tuple[int, int]]]]:
    """Monomial -> Gram positions, for a term whose basis is monomials and multiplier 1."""
    n = term.multiplier.nvars
    if term.multiplier != Polynomial.constant(n, 1):
        return None
    exps = []
    for b in term.basis:
        if len(b) != 1:
            return None
        (e, c), = b.terms.items()
        if c != 1:
            return None
        exps.append(e)
    idx: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            idx.setdefault(tuple(x + y for x, y in zip(a, b)), []).append((i, j))
    return idx


def _round_psd(gram, max_denominator: int) -> List[List[Fraction]]:
    """Rational Gram that is PSD by construction: V V' with V a rounded eigen-factor."""
    G = np.array([[float(v) for v in row] for row in gram])
    if G.size == 0:
        return []
    w, Q = np.linalg.eigh((G + G.T) / 2)
    keep = w > 0
    V = Q[:, keep] * np.sqrt(w[keep])
    Vq = [[lift_rational(float(v), max_denominator) for v in row] for row in V]
    k = len(Vq)
    out = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            v = sum((a * b for a, b in zip(Vq[i], Vq[j])), Fraction(0))
            out[i][j] = out[j][i] = v
    return out


def round_sos_certificate(
    cert: SOSCertificate,
    p: Polynomial,
    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
    repair_label: Optional[str] = None,
) -> SOSCertificate:
    """Lift Grams to rationals and push the identity residual into one Gram.

    The repair term (default: the first term with a monomial basis and
    multiplier 1) is rounded entrywise and then absorbs the residual by the
    orthogonal projection onto the affine space of Grams matching the
    residual coefficients.  Every other Gram is rounded through a clipped
    eigen-factor, so it stays exactly PSD.  Residual monomials the repair
    term cannot represent are left in place, so verification reports them.
    """
    rep_pos = None
    for k, t in enumerate(cert.terms):
        if repair_label is None or t.label == repair_label:
            if _pair_index(t) is not None:
                rep_pos = k
                break
    terms = []
    for k, t in enumerate(cert.terms):
        if k == rep_pos:
            G = [[lift_rational(v, max_denominator) for v in row] for row in t.gram]
            for i in range(len(G)):
                for j in range(i):
                    G[i][j] = G[j][i]
        else:
            G = _round_psd(t.gram, max_denominator)
        terms.append(SOSTerm(t.label, G, tuple(b.to_exact() for b in t.basis), t.multiplier.to_exact()))
    shift = lift_rational(cert.shift, max_denominator)
    out = SOSCertificate(cert.kind, cert.nvars, terms, shift, cert.rank, cert.embedding,
                         cert.deg_sigma0, cert.target.to_exact() if cert.target is not None else None,
                         True, dict(cert.meta))
    target = out.target if out.target is not None else _exact_poly(p) - shift
    residual = target - out.expansion()
    if residual.is_zero() or rep_pos is None:
        return out
    t = out.terms[rep_pos]
    idx = _pair_index(t)
    for e, c in residual.terms.items():
        pairs = idx.get(e)
        if not pairs:
            continue
        delta = c / len(pairs)
        for i, j in pairs:
            t.gram[i][j] += delta
    return out


# -- copositivity falsification -------------------------------------------------------

@dataclass
class CopositivityReport:
    witness: Optional[Tuple]
    value: Optional[float]
    evaluated: int
    verdict: str  # witness-found | no-witness

    @property
    def found(self) -> bool:
        return self.witness is not None


def spot_check_copositive(F: Polynomial, samples: int = 2000, seed: int = 0,
                          scales: Sequence = (Fraction(1, 4), Fraction(1, 2), 1, 2, 4, 8, 16)) -> CopositivityReport:
    """Search for x >= 0 with F(x) < 0.  Absence of a witness proves nothing.

    Structured points (axes and coordinate pairs at several scales) are
    evaluated exactly; random points with random sparse supports use floats
    with a relative tolerance.
    """
    n = F.nvars
    count = 0
    exact = F if F.is_exact else _exact_poly(F)
    scales = [Fraction(s) for s in scales]
    pts: List[List[Fraction]] = []
    for i in range(n):
        for s in scales:
            x = [Fraction(0)] * n
            x[i] = s
            pts.append(x)
    for i in range(n):
        for j in range(i + 1, n):
            for s in scales[:4]:
                for u in scales[:4]:
                    x = [Fraction(0)] * n
                    x[i], x[j] = s, u
                    pts.append(x)
    pts.append([Fraction(1)] * n)
    for x in pts:
        count += 1
        v = exact.evaluate(x)
        if v < 0:
            return CopositivityReport(tuple(x), float(v), count, "witness-found")
    rng = random.Random(seed)
    Ff = F.to_float()
    scale = 1 + Ff.max_abs_coeff()
    for _ in range(samples):
        support = [i for i in range(n) if rng.random() < 0.5] or [rng.randrange(n)] if n else []
        x = [0.0] * n
        mag = 10 ** rng.uniform(-1, 1.5)
        for i in support:
            x[i] = rng.expovariate(1.0) * mag
        count += 1
        v = Ff.evaluate(x)
        if v < -1e-9 * scale * (1 + sum(x)) ** max(F.degree, 0):
            # confirm in exact arithmetic at the float point
            xe = [Fraction(c) for c in x]
            ve = exact.evaluate(xe)
            if ve < 0:
                return CopositivityReport(tuple(xe), float(ve), count, "witness-found")
    return CopositivityReport(None, None, count, "no-witness")
