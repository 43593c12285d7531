"""Certificate data types and their JSON file format.

File layout (all polynomials use the polycore text form, one string per term
line; rationals are ``"num/den"`` strings; floats are stored through their
exact binary rational value so nothing is lost)::

    {
      "format": "copocert-certificate/1",
      "kind": "lp" | "sparse" | "putinar" | "simplex",
      "nvars": n,
      "rank": r,
      "shift": "num/den",            # the certificate is for p - shift
      "exact": true | false,
      "embedding": {...} | null,     # SimplexEmbedding.to_dict()
      ...kind specific payload...
    }

LP payload: ``L``, ``M``, ``degree_rule``, ``multiplier``, ``generators``
(list of polynomials) and ``terms`` with ``alpha``, ``beta``, ``gamma``,
``coeff`` and optional ``square_base`` / ``gram`` + ``gram_basis``.

SOS payload: ``terms``, each with ``label``, ``gram`` (square matrix of
rationals), ``basis`` (list of polynomials) and ``multiplier``
(polynomial); the term's value is basis' * gram * basis * multiplier.
The optional ``target`` polynomial overrides p - shift as the identity's
right-hand side (used by reformulations whose identity is not p itself).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .polycore import Polynomial
from .polya_lp import LPCertificate, LPTerm
from .semialg import SimplexEmbedding

FORMAT_TAG = "copocert-certificate/1"


@dataclass
class SOSTerm:
    """basis(x)' * gram * basis(x) * multiplier(x)."""

    label: str
    gram: List[List[Any]]
    basis: Tuple[Polynomial, ...]
    multiplier: Polynomial

    @property
    def size(self) -> int:
        return len(self.basis)

    def sos_part(self) -> Polynomial:
        n = self.multiplier.nvars
        out: Dict = {}
        k = len(self.basis)
        for i in range(k):
            for j in range(i, k):
                g = self.gram[i][j] if i == j else self.gram[i][j] * 2
                if g == 0:
                    continue
                for e, c in (self.basis[i] * self.basis[j]).terms.items():
                    out[e] = out.get(e, 0) + g * c
        return Polynomial(n, out)

    def value(self) -> Polynomial:
        return self.sos_part() * self.multiplier


@dataclass
class SOSCertificate:
    """Sum of SOS-weighted terms certifying p - shift (or ``target``)."""

    kind: str  # sparse | putinar | simplex
    nvars: int
    terms: List[SOSTerm]
    shift: Any = Fraction(0)
    rank: int = 0
    embedding: Optional[SimplexEmbedding] = None
    deg_sigma0: Optional[int] = None
    target: Optional[Polynomial] = None
    exact: bool = False
    meta: Dict[str, Any] = field(default_factory=dict)

    def expansion(self) -> Polynomial:
        out: Dict = {}
        for t in self.terms:
            for e, c in t.value().terms.items():
                out[e] = out.get(e, 0) + c
        return Polynomial(self.nvars, out)


# -- JSON ------------------------------------------------------------------------

def _q(v) -> str:
    f = v if isinstance(v, Fraction) else Fraction(v)
    return f"{f.numerator}/{f.denominator}"


def _poly_out(p: Polynomial) -> List[str]:
    return p.to_lines()


def _poly_in(lines: Sequence[str], n: int) -> Polynomial:
    return Polynomial.from_text(list(lines), n)


def certificate_to_dict(cert) -> Dict[str, Any]:
    if isinstance(cert, LPCertificate):
        n = cert.nvars
        terms = []
        for t in cert.terms:
            d = {"alpha": list(t.alpha), "beta": list(t.beta), "gamma": t.gamma,
                 "coeff": _q(t.coeff)}
            if t.square_base is not None:
                d["square_base"] = _poly_out(t.square_base)
            if t.gram is not None:
                d["gram"] = [[_q(v) for v in row] for row in t.gram]
                d["gram_basis"] = [list(e) for e in t.gram_basis]
            terms.append(d)
        return {
            "format": FORMAT_TAG,
            "kind": "lp",
            "nvars": n,
            "rank": cert.rank,
            "shift": _q(cert.shift),
            "exact": cert.exact,
            "L": [_q(v) for v in cert.L],
            "M": _q(cert.M),
            "degree_rule": cert.degree_rule,
            "multiplier": cert.multiplier,
            "generators": [_poly_out(h) for h in cert.generators],
            "terms": terms,
        }
    if isinstance(cert, SOSCertificate):
        d = {
            "format": FORMAT_TAG,
            "kind": cert.kind,
            "nvars": cert.nvars,
            "rank": cert.rank,
            "shift": _q(cert.shift),
            "exact": cert.exact,
            "embedding": cert.embedding.to_dict() if cert.embedding else None,
            "deg_sigma0": cert.deg_sigma0,
            "terms": [
                {
                    "label": t.label,
                    "gram": [[_q(v) for v in row] for row in t.gram],
                    "basis": [_poly_out(b) for b in t.basis],
                    "multiplier": _poly_out(t.multiplier),
                }
                for t in cert.terms
            ],
        }
        if cert.target is not None:
            d["target"] = _poly_out(cert.target)
        if cert.meta:
            d["meta"] = {k: v for k, v in cert.meta.items() if isinstance(v, (str, int, float, bool, list))}
        return d
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def certificate_from_dict(d: Dict[str, Any]):
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"unknown certificate format {d.get('format')!r}")
    n = int(d["nvars"])
    kind = d["kind"]
    if kind == "lp":
        gens = tuple(_poly_in(g, n) for g in d["generators"])
        terms = []
        for t in d["terms"]:
            terms.append(LPTerm(
                tuple(t["alpha"]), tuple(t["beta"]), int(t["gamma"]), Fraction(t["coeff"]),
                square_base=_poly_in(t["square_base"], n) if "square_base" in t else None,
                gram=tuple(tuple(Fraction(v) for v in row) for row in t["gram"]) if "gram" in t else None,
                gram_basis=tuple(tuple(e) for e in t["gram_basis"]) if "gram_basis" in t else None,
            ))
        return LPCertificate(terms, tuple(Fraction(v) for v in d["L"]), Fraction(d["M"]),
                             int(d["rank"]), gens, Fraction(d["shift"]), d.get("degree_rule", "weighted"),
                             d.get("multiplier", "const"), bool(d.get("exact", True)))
    if kind in ("sparse", "putinar", "simplex"):
        terms = [
            SOSTerm(t["label"], [[Fraction(v) for v in row] for row in t["gram"]],
                    tuple(_poly_in(b, n) for b in t["basis"]), _poly_in(t["multiplier"], n))
            for t in d["terms"]
        ]
        emb = SimplexEmbedding.from_dict(d["embedding"]) if d.get("embedding") else None
        return SOSCertificate(kind, n, terms, Fraction(d["shift"]), int(d["rank"]), emb,
                              d.get("deg_sigma0"),
                              _poly_in(d["target"], n) if "target" in d else None,
                              bool(d.get("exact", True)), dict(d.get("meta", {})))
    raise ValueError(f"unknown certificate kind {kind!r}")


def dump_certificate(cert) -> str:
    return json.dumps(certificate_to_dict(cert), indent=1, sort_keys=True) + "\n"


def load_certificate(text: str):
    return certificate_from_dict(json.loads(text))
