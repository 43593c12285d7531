"""Block-structured conic programs.

Variable vector layout: ``n_free`` free scalars, then ``n_nonneg``
non-negative scalars, then one scaled upper-triangle vectorization per PSD
block.  For a k x k block the entries are ordered row-major over i <= j;
diagonal entries are X_ii and off-diagonal entries are sqrt(2) * X_ij, so the
Euclidean inner product of two vectorizations equals the trace inner product
of the matrices.

The program is ``maximize c'v subject to A v = b`` with v in the cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

SQRT2 = math.sqrt(2.0)

Number = float | int | Fraction


def svec_len(k: int) -> int:
    return k * (k + 1) // 2


def svec_index(k: int, i: int, j: int) -> int:
    """Position of X_ij (i <= j) within the block's vectorization."""
    if i > j:
        i, j = j, i
    return i * k - i * (i - 1) // 2 + (j - i)


def svec(X: np.ndarray) -> np.ndarray:
    k = X.shape[0]
    out = np.empty(svec_len(k))
    pos = 0
    for i in range(k):
        out[pos] = X[i, i]
        out[pos + 1 : pos + k - i] = SQRT2 * X[i, i + 1 :]
        pos += k - i
    return out


def smat(v: Sequence[float], k: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    X = np.empty((k, k))
    pos = 0
    for i in range(k):
        X[i, i] = v[pos]
        X[i, i + 1 :] = v[pos + 1 : pos + k - i] / SQRT2
        X[i + 1 :, i] = X[i, i + 1 :]
        pos += k - i
    return X


@dataclass(frozen=True)
class ConicProgram:
    n_free: int
    n_nonneg: int
    psd_blocks: Tuple[int, ...]
    n_rows: int
    # sparse triplets, sorted by (row, col), no duplicates
    a_entries: Tuple[Tuple[int, int, Number], ...]
    b: Tuple[Number, ...]
    c: Tuple[Tuple[int, Number], ...]
    row_keys: Optional[Tuple[Hashable, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.b) != self.n_rows:
            raise ValueError("b length must equal the row count")
        ncols = self.n_cols
        for r, col, _ in self.a_entries:
            if not (0 <= r < self.n_rows and 0 <= col < ncols):
                raise ValueError(f"entry ({r}, {col}) out of range")
        for col, _ in self.c:
            if not 0 <= col < ncols:
                raise ValueError(f"objective column {col} out of range")

    @property
    def n_cols(self) -> int:
        return self.n_free + self.n_nonneg + sum(svec_len(k) for k in self.psd_blocks)

    @property
    def is_lp(self) -> bool:
        return not self.psd_blocks

    def block_offsets(self) -> List[int]:
        offs = []
        pos = self.n_free + self.n_nonneg
        for k in self.psd_blocks:
            offs.append(pos)
            pos += svec_len(k)
        return offs

    def a_matrix(self) -> sp.csc_matrix:
        if not self.a_entries:
            return sp.csc_matrix((self.n_rows, self.n_cols))
        r, col, v = zip(*self.a_entries)
        return sp.csc_matrix(
            (np.array([float(x) for x in v]), (np.array(r), np.array(col))),
            shape=(self.n_rows, self.n_cols),
        )

    def b_vector(self) -> np.ndarray:
        return np.array([float(x) for x in self.b])

    def c_vector(self) -> np.ndarray:
        out = np.zeros(self.n_cols)
        for col, v in self.c:
            out[col] = float(v)
        return out

    def is_exact(self) -> bool:
        vals = [v for *_, v in self.a_entries] + list(self.b) + [v for _, v in self.c]
        return all(isinstance(v, (int, Fraction)) for v in vals)

    def unpack(self, x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
        """Split a solution vector into (free, nonneg, [PSD matrices])."""
        x = np.asarray(x, dtype=float)
        f = x[: self.n_free]
        nn = x[self.n_free : self.n_free + self.n_nonneg]
        mats = [smat(x[o : o + svec_len(k)], k) for o, k in zip(self.block_offsets(), self.psd_blocks)]
        return f, nn, mats

    def size_estimate(self) -> int:
        """Rough element count of the assembled data; used by memory guards."""
        return len(self.a_entries) + sum(k * k for k in self.psd_blocks) + self.n_rows


class ProgramBuilder:
    """Incremental assembly with symbolic columns and keyed rows.

    Columns are referenced as ('f', i), ('n', i) or ('p', block, i, j); rows
    by any hashable key (typically an exponent tuple).  Gram entries are
    given as matrix-entry coefficients and converted to the scaled
    vectorization when the program is sealed.
    """

    def __init__(self):
        self.n_free = 0
        self.n_nonneg = 0
        self.psd: List[int] = []
        self._rows: Dict[Hashable, int] = {}
        self._entries: Dict[Tuple[int, tuple], Number] = {}
        self._rhs: Dict[int, Number] = {}
        self._obj: Dict[tuple, Number] = {}

    def free(self) -> tuple:
        self.n_free += 1
        return ("f", self.n_free - 1)

    def nonneg(self) -> tuple:
        self.n_nonneg += 1
        return ("n", self.n_nonneg - 1)

    def psd_block(self, k: int) -> int:
        if k < 1:
            raise ValueError("PSD block size must be positive")
        self.psd.append(k)
        return len(self.psd) - 1

    def row(self, key: Hashable) -> int:
        if key not in self._rows:
            self._rows[key] = len(self._rows)
        return self._rows[key]

    def add(self, key: Hashable, col: tuple, coef: Number) -> None:
        if coef == 0:
            return
        r = self.row(key)
        k = (r, col)
        self._entries[k] = self._entries.get(k, 0) + coef

    def add_gram(self, key: Hashable, block: int, i: int, j: int, coef: Number) -> None:
        """Add coef * X_ij to a row; for i != j pass the coefficient of X_ij itself."""
        if i > j:
            i, j = j, i
        self.add(key, ("p", block, i, j), coef)

    def set_rhs(self, key: Hashable, value: Number) -> None:
        r = self.row(key)
        if value != 0:
            self._rhs[r] = value
        else:
            self._rhs.pop(r, None)

    def add_rhs(self, key: Hashable, value: Number) -> None:
        r = self.row(key)
        self._rhs[r] = self._rhs.get(r, 0) + value

    def objective(self, col: tuple, coef: Number) -> None:
        self._obj[col] = self._obj.get(col, 0) + coef

    def column_index(self, col: tuple) -> int:
        kind = col[0]
        if kind == "f":
            return col[1]
        if kind == "n":
            return self.n_free + col[1]
        _, blk, i, j = col
        off = self.n_free + self.n_nonneg + sum(svec_len(k) for k in self.psd[:blk])
        return off + svec_index(self.psd[blk], i, j)

    @staticmethod
    def _scale(col: tuple, v: Number) -> Number:
        # X_ij = s_ij / sqrt(2) off the diagonal
        if col[0] == "p" and col[2] != col[3]:
            return float(v) / SQRT2
        return v

    def build(self) -> ConicProgram:
        entries: Dict[Tuple[int, int], Number] = {}
        for (r, col), v in self._entries.items():
            c = self.column_index(col)
            entries[(r, c)] = entries.get((r, c), 0) + self._scale(col, v)
        trip = tuple(sorted((r, c, v) for (r, c), v in entries.items() if v != 0))
        nrows = len(self._rows)
        b = tuple(self._rhs.get(r, 0) for r in range(nrows))
        obj: Dict[int, Number] = {}
        for col, v in self._obj.items():
            c = self.column_index(col)
            obj[c] = obj.get(c, 0) + self._scale(col, v)
        keys = [None] * nrows
        for k, r in self._rows.items():
            keys[r] = k
        return ConicProgram(
            n_free=self.n_free,
            n_nonneg=self.n_nonneg,
            psd_blocks=tuple(self.psd),
            n_rows=nrows,
            a_entries=trip,
            b=b,
            c=tuple(sorted((c, v) for c, v in obj.items() if v != 0)),
            row_keys=tuple(keys),
        )


@dataclass
class SolverResult:
    status: str  # optimal | infeasible | unbounded | numerical-failure | time-limit
    objective: float = float("nan")
    primal: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    wall_time: float = 0.0
    message: str = ""
    residuals: Dict[str, float] = field(default_factory=dict)
    # LP only: final basis (column indices in the solver's standard form)
    basis: Optional[List[int]] = None
    exact_primal: Optional[List[Fraction]] = None
    exact_objective: Optional[Fraction] = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


STATUSES = ("optimal", "infeasible", "unbounded", "numerical-failure", "time-limit")


def residual_report(prog: ConicProgram, x: np.ndarray) -> Dict[str, float]:
    """Equality residual infinity-norm and per-block minimum eigenvalues."""
    A = prog.a_matrix()
    b = prog.b_vector()
    rep = {
        "eq_residual": float(np.max(np.abs(A @ x - b))) if prog.n_rows else 0.0,
        "b_norm": float(np.max(np.abs(b))) if prog.n_rows else 0.0,
    }
    nn = x[prog.n_free : prog.n_free + prog.n_nonneg]
    rep["min_nonneg"] = float(nn.min()) if nn.size else 0.0
    eigs = [float(np.linalg.eigvalsh(X)[0]) for X in prog.unpack(x)[2]]
    rep["min_psd_eig"] = min(eigs) if eigs else 0.0
    return rep
