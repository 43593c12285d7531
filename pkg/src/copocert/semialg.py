"""Semialgebraic sets, simplex embeddings and constraint vectors for sparse certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .polycore import Polynomial, PolynomialError, lift_rational, linear_form, sum_polys

FEW_VARIABLE_THRESHOLD = 3


def _frac_vector(v: Sequence, n: int, what: str) -> Tuple[Fraction, ...]:
    if len(v) != n:
        raise ValueError(f"{what} has length {len(v)}, expected {n}")
    return tuple(lift_rational(x) for x in v)


@dataclass(frozen=True)
class SemialgebraicSet:
    """{x : h_j(x) >= 0 for all j}, optionally intersected with the orthant.

    The order of ``constraints`` matters: derived bounds are indexed by it.
    Equalities are stored as two opposed inequalities.
    """

    nvars: int
    constraints: Tuple[Polynomial, ...] = ()
    explicit_nonneg: bool = False

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for h in self.constraints:
            if h.nvars != self.nvars:
                raise PolynomialError(
                    f"constraint has nvars={h.nvars}, set has nvars={self.nvars}"
                )

    @classmethod
    def build(
        cls,
        nvars: int,
        inequalities: Sequence[Polynomial] = (),
        equalities: Sequence[Polynomial] = (),
        explicit_nonneg: bool = False,
    ) -> "SemialgebraicSet":
        cons = list(inequalities)
        for h in equalities:
            cons.extend([h, -h])
        return cls(nvars, tuple(cons), explicit_nonneg)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def orthant_constraints(self) -> Tuple[Polynomial, ...]:
        return tuple(Polynomial.variables(self.nvars)) if self.explicit_nonneg else ()

    def all_constraints(self) -> Tuple[Polynomial, ...]:
        """Listed constraints followed by x_i >= 0 when the orthant is explicit."""
        return self.constraints + self.orthant_constraints()

    def contains(self, x: Sequence, tol: float = 0.0) -> bool:
        exact = tol == 0 and all(isinstance(v, (int, Fraction)) for v in x)
        if self.explicit_nonneg and any(v < (0 if exact else -tol) for v in x):
            return False
        for h in self.constraints:
            val = h.evaluate(x)
            if val < (0 if exact else -tol):
                return False
        return True

    def feasible_mask(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.ones(points.shape[0], dtype=bool)
        if self.explicit_nonneg:
            mask &= np.all(points >= -tol, axis=1)
        for h in self.constraints:
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                break
            mask[idx] &= h.evaluate_many(points[idx]) >= -tol
        return mask

    def reordered(self, order: Sequence[int]) -> "SemialgebraicSet":
        if sorted(order) != list(range(self.m)):
            raise ValueError("order must be a permutation of constraint indices")
        return SemialgebraicSet(self.nvars, tuple(self.constraints[i] for i in order),
                                self.explicit_nonneg)


@dataclass(frozen=True)
class SimplexEmbedding:
    """Bounds placing S inside {L <= x, e'x <= M} plus the derived radius M_hat.

    ``U_tilde[j]`` bounds |h_j| over that region, in the order of
    ``SemialgebraicSet.all_constraints()``.
    """

    L: Tuple[Fraction, ...]
    M: Fraction
    M_hat: Fraction
    U_tilde: Tuple[Fraction, ...]
    slack: Fraction = Fraction(1)

    @property
    def nvars(self) -> int:
        return len(self.L)

    def to_dict(self) -> dict:
        return {
            "L": [str(v) for v in self.L],
            "M": str(self.M),
            "M_hat": str(self.M_hat),
            "U_tilde": [str(v) for v in self.U_tilde],
            "slack": str(self.slack),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimplexEmbedding":
        return cls(
            L=tuple(Fraction(v) for v in d["L"]),
            M=Fraction(d["M"]),
            M_hat=Fraction(d["M_hat"]),
            U_tilde=tuple(Fraction(v) for v in d["U_tilde"]),
            slack=Fraction(d.get("slack", "1")),
        )


def constraint_bound(h: Polynomial, L: Sequence[Fraction], M: Fraction) -> Fraction:
    """(1 + M + e'(|L| - L))^deg(h) * ||h||, computed exactly."""
    spread = sum((abs(l) - l for l in L), Fraction(0))
    if not h.is_exact:
        # exact binary value of each float, never a rounded one
        h = Polynomial(h.nvars, {e: Fraction(c) for e, c in h.terms.items()})
    norm = h.multinomial_norm()
    return (1 + M + spread) ** h.degree * Fraction(norm)


def derive_embedding(
    S: SemialgebraicSet,
    L: Sequence,
    M,
    slack=1,
    strict: bool = True,
) -> SimplexEmbedding:
    """M_hat = M + sum_j U_tilde_j + slack.

    With ``strict`` the slack must be positive; ``strict=False`` admits
    slack = 0, the non-strict radius used by the sparse certificate.
    When the orthant is explicit its n constraints x_i >= 0 count as
    constraints here too.
    """
    L = _frac_vector(L, S.nvars, "L")
    M = lift_rational(M)
    slack = lift_rational(slack)
    if slack < 0 or (strict and slack == 0):
        raise ValueError("slack must be positive (or zero with strict=False)")
    u = tuple(constraint_bound(h, L, M) for h in S.all_constraints())
    return SimplexEmbedding(L=L, M=M, M_hat=M + sum(u, Fraction(0)) + slack, U_tilde=u,
                            slack=slack)


def split_variables(S: SemialgebraicSet, p: Polynomial) -> Tuple[SemialgebraicSet, Polynomial]:
    """Lift to T = {(y, z) >= 0 : h(y - z) >= 0} and p(y - z).

    When S already lies in the orthant the transform is the identity.
    """
    if S.explicit_nonneg:
        return S, p
    n = S.nvars
    images = [Polynomial.variable(2 * n, i) - Polynomial.variable(2 * n, n + i) for i in range(n)]
    T = SemialgebraicSet(2 * n, tuple(h.substitute(images) for h in S.constraints), True)
    return T, p.substitute(images)


def split_point(x: Sequence) -> List:
    """(max(x, 0), -min(x, 0)) as one 2n-vector."""
    zero = 0 if all(isinstance(v, (int, Fraction)) for v in x) else 0.0
    return [max(v, zero) for v in x] + [-min(v, zero) for v in x]


def tilde_set(S: SemialgebraicSet) -> SemialgebraicSet:
    """Replace each constraint by its top-degree component."""
    cons = tuple(h if h.is_zero() else h.top_component() for h in S.constraints)
    return SemialgebraicSet(S.nvars, cons, S.explicit_nonneg)


def few_variable_order(S: SemialgebraicSet, threshold: int = FEW_VARIABLE_THRESHOLD) -> Tuple[List[int], int]:
    """Stable order putting constraints with <= ``threshold`` variables first."""
    few = [j for j, h in enumerate(S.constraints) if len(h.support_vars()) <= threshold]
    rest = [j for j, h in enumerate(S.constraints) if len(h.support_vars()) > threshold]
    return few + rest, len(few)


@dataclass(frozen=True)
class GVector:
    """Entries g_i(x) >= 0 on S together with a radius R bounding sum_i g_i.

    ``m1`` counts the leading pairs (h_j, U_j - h_j) whose multipliers are
    full SOS in the entry's own variables; all later entries get univariate
    multipliers in t = g_i(x).
    """

    entries: Tuple[Polynomial, ...]
    var_scopes: Tuple[Tuple[int, ...], ...]
    m1: int
    radius: Fraction
    labels: Tuple[str, ...] = field(default=())

    @property
    def n_scoped(self) -> int:
        return 2 * self.m1

    def __len__(self) -> int:
        return len(self.entries)

    def sphere_factor(self) -> Polynomial:
        """R^2 - sum_i g_i(x)^2."""
        n = self.entries[0].nvars if self.entries else 0
        return Polynomial.constant(n, self.radius**2) - sum_polys(
            (g * g for g in self.entries), n
        )


def _support_scopes(entries: Sequence[Polynomial]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(g.support_vars() for g in entries)


def g_vector(
    S: SemialgebraicSet,
    emb: SimplexEmbedding,
    U: Optional[Sequence] = None,
    m1: int = 0,
) -> GVector:
    """Box layout with redundant upper bounds.

    [h_1..h_m1, Ut_1-h_1..Ut_m1-h_m1, h_m1+1..h_m, Ut-h for those, x-L, U-x],
    2n + 2m entries, radius e'(U-L) + sum_j Ut_j (the entries sum to it).
    ``U`` defaults to M*e.
    """
    n, m = S.nvars, S.m
    if not 0 <= m1 <= m:
        raise ValueError(f"m1={m1} outside [0, {m}]")
    U = _frac_vector(U if U is not None else [emb.M] * n, n, "U")
    L = emb.L
    cons = S.constraints
    ut = emb.U_tilde[:m]
    entries: List[Polynomial] = []
    labels: List[str] = []
    for block in (range(m1), range(m1, m)):
        for j in block:
            entries.append(cons[j])
            labels.append(f"h{j + 1}")
        for j in block:
            entries.append(Polynomial.constant(n, ut[j]) - cons[j])
            labels.append(f"Ut{j + 1}-h{j + 1}")
    xs = Polynomial.variables(n)
    for i in range(n):
        entries.append(xs[i] - L[i])
        labels.append(f"x{i + 1}-L{i + 1}")
    for i in range(n):
        entries.append(U[i] - xs[i])
        labels.append(f"U{i + 1}-x{i + 1}")
    radius = sum((u - l for u, l in zip(U, L)), Fraction(0)) + sum(ut, Fraction(0))
    return GVector(tuple(entries), _support_scopes(entries), m1, radius, tuple(labels))


def g_vector_simplex(S: SemialgebraicSet, emb: SimplexEmbedding) -> GVector:
    """Simplex layout (x - L, h(x), M_hat - e'x - e'h(x)), radius M_hat - e'L.

    The last entry's e'h includes the orthant constraints when those are
    explicit, matching the embedding's U_tilde list.
    """
    n = S.nvars
    xs = Polynomial.variables(n)
    entries = [xs[i] - emb.L[i] for i in range(n)] + list(S.constraints)
    labels = [f"x{i + 1}-L{i + 1}" for i in range(n)] + [f"h{j + 1}" for j in range(S.m)]
    last = (
        Polynomial.constant(n, emb.M_hat)
        - linear_form([1] * n)
        - sum_polys(S.all_constraints(), n)
    )
    entries.append(last)
    labels.append("Mhat-ex-eh")
    radius = emb.M_hat - sum(emb.L, Fraction(0))
    return GVector(tuple(entries), _support_scopes(entries), 0, radius, tuple(labels))


def sample_feasible(
    S: SemialgebraicSet,
    box: Tuple[Sequence[float], Sequence[float]],
    count: int,
    seed: int,
    max_draws: Optional[int] = None,
    batch: int = 65536,
    tol: float = 0.0,
) -> np.ndarray:
    """Uniform rejection sampling in ``box``; deterministic for a fixed seed.

    Returns an array of shape (k, n) with k <= count.
    """
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    if lo.shape != (S.nvars,) or hi.shape != (S.nvars,):
        raise ValueError("box bounds must have length nvars")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("box must be finite")
    rng = np.random.default_rng(seed)
    max_draws = max_draws if max_draws is not None else max(200 * count, 10**5)
    found: List[np.ndarray] = []
    total = drawn = 0
    while total < count and drawn < max_draws:
        size = min(batch, max_draws - drawn)
        pts = lo + (hi - lo) * rng.random((size, S.nvars))
        drawn += size
        keep = pts[S.feasible_mask(pts, tol)]
        found.append(keep)
        total += keep.shape[0]
    if not found:
        return np.zeros((0, S.nvars))
    return np.concatenate(found)[:count]
