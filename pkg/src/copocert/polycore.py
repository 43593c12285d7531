"""Sparse multivariate polynomials over exact rationals or binary64 floats.

A polynomial stores a map from exponent tuples to coefficients.  All
coefficients of one instance share a scalar mode: ``Fraction`` (exact) or
``float``.  Mixing the two promotes to float.  Instances are immutable.

Terms are always iterated in graded-lexicographic order (total degree
first, then lexicographic on the exponent tuple) so that serialized text
and any matrix built column-by-column from a polynomial are reproducible.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from itertools import combinations_with_replacement
from numbers import Rational
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np

Exponent = Tuple[int, ...]
Scalar = Union[Fraction, float, int]

DEFAULT_MAX_DENOMINATOR = 10**9


class PolynomialError(ValueError):
    """Raised on malformed polynomial input or mismatched variable counts."""


def grlex_key(exp: Exponent) -> Tuple[int, Exponent]:
    return (sum(exp), exp)


def monomials_up_to(nvars: int, degree: int) -> List[Exponent]:
    """All exponent vectors of total degree <= ``degree`` in grlex order."""
    if degree < 0:
        return []
    out: List[Exponent] = []
    for d in range(degree + 1):
        out.extend(monomials_of_degree(nvars, d))
    return out


def monomials_of_degree(nvars: int, degree: int) -> List[Exponent]:
    if nvars == 0:
        return [()] if degree == 0 else []
    exps = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        exps.append(tuple(e))
    exps.sort()
    return exps


def multinomial(d: int, alpha: Sequence[int]) -> int:
    """C_{d,alpha} = d! / ((d - |alpha|)! alpha_1! ... alpha_n!)."""
    k = sum(alpha)
    if k > d:
        raise PolynomialError(f"|alpha|={k} exceeds d={d}")
    out = math.factorial(d) // math.factorial(d - k)
    for a in alpha:
        out //= math.factorial(a)
    return out


def _as_coeff(c: Scalar) -> Scalar:
    if isinstance(c, bool):
        c = int(c)
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, (float, np.floating)):
        return float(c)
    if isinstance(c, np.integer):
        return Fraction(int(c))
    raise PolynomialError(f"unsupported coefficient type {type(c).__name__}")


def lift_rational(x: Scalar, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """Round a float to the nearest fraction with bounded denominator.

    Uses continued-fraction rounding; exact inputs pass through unchanged.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise PolynomialError(f"cannot lift non-finite value {x}")
    return Fraction(x).limit_denominator(max_denominator)


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "_terms", "degree", "_exact")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Scalar] | None = None):
        if nvars < 0:
            raise PolynomialError("nvars must be non-negative")
        clean: Dict[Exponent, Scalar] = {}
        any_float = False
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise PolynomialError(f"exponent {exp} has length != nvars={nvars}")
            if any(e < 0 for e in exp):
                raise PolynomialError(f"negative exponent in {exp}")
            c = _as_coeff(c)
            if isinstance(c, float):
                any_float = True
            if c != 0:
                clean[exp] = clean.get(exp, 0) + c
        if any_float:
            clean = {e: float(c) for e, c in clean.items()}
        clean = {e: c for e, c in clean.items() if c != 0}
        self.nvars = nvars
        self._terms = dict(sorted(clean.items(), key=lambda kv: grlex_key(kv[0])))
        self.degree = max((sum(e) for e in self._terms), default=0)
        self._exact = not any_float

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Scalar) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int, coeff: Scalar = 1) -> "Polynomial":
        if not 0 <= i < nvars:
            raise PolynomialError(f"variable index {i} out of range for nvars={nvars}")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): coeff})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff: Scalar = 1) -> "Polynomial":
        return cls(len(exp), {tuple(exp): coeff})

    @classmethod
    def variables(cls, nvars: int) -> List["Polynomial"]:
        return [cls.variable(nvars, i) for i in range(nvars)]

    # -- basic accessors ----------------------------------------------
    @property
    def terms(self) -> Dict[Exponent, Scalar]:
        # callers must not mutate; copying on every access is too costly
        return self._terms

    @property
    def is_exact(self) -> bool:
        return self._exact

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def coeff(self, exp: Sequence[int]) -> Scalar:
        return self._terms.get(tuple(exp), Fraction(0) if self._exact else 0.0)

    def constant_term(self) -> Scalar:
        return self.coeff((0,) * self.nvars)

    def support_vars(self) -> Tuple[int, ...]:
        used = set()
        for e in self._terms:
            used.update(i for i, k in enumerate(e) if k)
        return tuple(sorted(used))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[Exponent, Scalar]]:
        return iter(self._terms.items())

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise PolynomialError(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = _as_coeff(other)
            return Polynomial(self.nvars, {e: v * c for e, v in self._terms.items()})
        self._check(other)
        out: Dict[Exponent, Scalar] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, c: Scalar) -> "Polynomial":
        c = _as_coeff(c)
        if isinstance(c, Fraction):
            return self * (1 / c)
        return self * (1.0 / c)

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise PolynomialError("negative power")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        if not self._exact:
            result = result.to_float()
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, float, Fraction)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self.to_str()})"

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e, c in reversed(list(self._terms.items())):
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # -- evaluation and composition ------------------------------------
    def evaluate(self, point: Sequence[Scalar]) -> Scalar:
        if len(point) != self.nvars:
            raise PolynomialError(f"point has length {len(point)}, expected {self.nvars}")
        exact = self._exact and all(isinstance(v, (int, Fraction)) for v in point)
        if not exact:
            point = [float(v) for v in point]
        total = Fraction(0) if exact else 0.0
        for e, c in self._terms.items():
            term = c if exact else float(c)
            for v, k in zip(point, e):
                if k:
                    term *= v**k
            total += term
        return total

    __call__ = evaluate

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at the rows of ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.nvars:
            raise PolynomialError("point dimension mismatch")
        if not self._terms:
            return np.zeros(points.shape[0])
        exps = np.array(list(self._terms.keys()), dtype=float).reshape(len(self._terms), self.nvars)
        coefs = np.array([float(c) for c in self._terms.values()])
        vals = np.ones((points.shape[0], len(coefs)))
        for i in range(self.nvars):
            col = exps[:, i]
            if np.any(col):
                vals *= points[:, i : i + 1] ** col[None, :]
        return vals @ coefs

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: result(x) = self(images[0](x), ..., images[k-1](x))."""
        if len(images) != self.nvars:
            raise PolynomialError(f"need {self.nvars} images, got {len(images)}")
        if not images:
            raise PolynomialError("substitution into a 0-variable polynomial needs a target nvars")
        target = images[0].nvars
        for im in images:
            if im.nvars != target:
                raise PolynomialError("images must share one ambient nvars")
        # cache powers of each image; certificates reuse them heavily
        powers: List[Dict[int, Polynomial]] = [{0: Polynomial.constant(target, 1)} for _ in images]

        def power(i: int, k: int) -> Polynomial:
            cache = powers[i]
            if k not in cache:
                j = max(j for j in cache if j < k)
                p = cache[j]
                for s in range(j + 1, k + 1):
                    p = p * images[i]
                    cache[s] = p
            return cache[k]

        out: Dict[Exponent, Scalar] = {}
        for e, c in self._terms.items():
            term = reduce(lambda a, b: a * b, (power(i, k) for i, k in enumerate(e) if k),
                          Polynomial.constant(target, c))
            for te, tc in term._terms.items():
                out[te] = out.get(te, 0) + tc
        result = Polynomial(target, out)
        return result if self._exact else result.to_float()

    def embed(self, nvars: int, positions: Sequence[int]) -> "Polynomial":
        """Re-index into ``nvars`` variables; variable i goes to ``positions[i]``."""
        if len(positions) != self.nvars:
            raise PolynomialError("positions length must equal nvars")
        out = {}
        for e, c in self._terms.items():
            ne = [0] * nvars
            for i, k in enumerate(e):
                ne[positions[i]] += k
            out[tuple(ne)] = c
        return Polynomial(nvars, out)

    def restrict(self, positions: Sequence[int]) -> "Polynomial":
        """Inverse of ``embed`` for a polynomial supported on ``positions``."""
        out = {}
        keep = set(positions)
        for e, c in self._terms.items():
            if any(k and i not in keep for i, k in enumerate(e)):
                raise PolynomialError("polynomial uses variables outside the given positions")
            out[tuple(e[i] for i in positions)] = c
        return Polynomial(len(positions), out)

    # -- structural operators -------------------------------------------
    def homogenize(self) -> "Polynomial":
        """p^h(x0, x) = x0^deg(p) p(x / x0), new variable at index 0."""
        d = self.degree
        return Polynomial(
            self.nvars + 1, {(d - sum(e),) + e: c for e, c in self._terms.items()}
        )

    def top_component(self) -> "Polynomial":
        if self.is_zero():
            raise PolynomialError("top component of the zero polynomial is undefined")
        d = self.degree
        return Polynomial(self.nvars, {e: c for e, c in self._terms.items() if sum(e) == d})

    def multinomial_norm(self) -> Scalar:
        """max |p_alpha| where p = sum C_{d,alpha} p_alpha x^alpha, d = deg p."""
        if self.is_zero():
            return Fraction(0) if self._exact else 0.0
        d = self.degree
        return max(abs(c) / multinomial(d, e) for e, c in self._terms.items())

    # -- scalar modes ----------------------------------------------------
    def to_float(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: float(c) for e, c in self._terms.items()})

    def to_exact(self, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> "Polynomial":
        return Polynomial(
            self.nvars, {e: lift_rational(c, max_denominator) for e, c in self._terms.items()}
        )

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    # -- canonical text ----------------------------------------------------
    def to_text(self) -> str:
        """One term per line, ``num/den e1 ... en``, graded-lex order.

        Float coefficients are written through their exact rational value so
        the projection float -> text -> float is lossless.
        """
        lines = []
        for e, c in self._terms.items():
            fr = c if isinstance(c, Fraction) else Fraction(c)
            lines.append(" ".join([f"{fr.numerator}/{fr.denominator}"] + [str(k) for k in e]))
        return "\n".join(lines)

    def to_lines(self) -> List[str]:
        text = self.to_text()
        return text.split("\n") if text else []

    @classmethod
    def from_text(cls, text: str | Iterable[str], nvars: int) -> "Polynomial":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        terms: Dict[Exponent, Fraction] = {}
        for ln, line in enumerate(lines, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != nvars + 1:
                raise PolynomialError(
                    f"line {ln}: expected {nvars + 1} fields, got {len(parts)}: {line!r}"
                )
            try:
                c = Fraction(parts[0])
                e = tuple(int(k) for k in parts[1:])
            except (ValueError, ZeroDivisionError) as exc:
                raise PolynomialError(f"line {ln}: {exc}") from None
            if e in terms:
                raise PolynomialError(f"line {ln}: duplicate exponent {e}")
            terms[e] = c
        return cls(nvars, terms)


# Functional aliases matching the operation names used across the package.

def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def substitute(p: Polynomial, images: Sequence[Polynomial]) -> Polynomial:
    return p.substitute(images)


def homogenize(p: Polynomial) -> Polynomial:
    return p.homogenize()


def top_component(p: Polynomial) -> Polynomial:
    return p.top_component()


def multinomial_norm(p: Polynomial) -> Scalar:
    return p.multinomial_norm()


def evaluate(p: Polynomial, x: Sequence[Scalar]) -> Scalar:
    return p.evaluate(x)


def linear_form(coeffs: Sequence[Scalar], const: Scalar = 0) -> Polynomial:
    """const + sum_i coeffs[i] x_i."""
    n = len(coeffs)
    terms = {(0,) * n: const}
    for i, c in enumerate(coeffs):
        e = [0] * n
        e[i] = 1
        terms[tuple(e)] = c
    return Polynomial(n, terms)


def sum_vars(nvars: int) -> Polynomial:
    return linear_form([1] * nvars)


def sum_polys(polys: Iterable[Polynomial], nvars: int) -> Polynomial:
    out: Dict[Exponent, Scalar] = {}
    for p in polys:
        for e, c in p.terms.items():
            out[e] = out.get(e, 0) + c
    return Polynomial(nvars, out)
