"""Text formats for conic programs and solver results.

Program grammar (one record per line, whitespace separated)::

    COPOCERT-CONIC 1
    free <n_free>
    nonneg <n_nonneg>
    psd <count> <k_1> ... <k_count>
    rows <n_rows>
    cols <n_cols>
    objective <nnz>
    <col> <value>            # nnz lines
    matrix <nnz>
    <row> <col> <value>      # nnz lines, sorted by (row, col)
    rhs <nnz>
    <row> <value>            # nnz lines
    end

Values are written ``num/den`` when exact and with ``repr`` when float, so
parsing restores the same Python numbers.  PSD columns use the scaled
upper-triangle vectorization documented in ``conic.program``.

Result grammar::

    COPOCERT-RESULT 1
    status <status>
    objective <float>
    primal <n>
    <float>                  # n lines
    dual <n>
    <float>                  # n lines
    end
"""

from __future__ import annotations

from fractions import Fraction
from typing import List

import numpy as np

from .program import STATUSES, ConicProgram, SolverResult


class FormatError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return f"{v}/1"
    return repr(float(v))


def _val(s: str):
    if "/" in s:
        return Fraction(s)
    return float(s)


def serialize_program(prog: ConicProgram) -> str:
    lines = [
        "COPOCERT-CONIC 1",
        f"free {prog.n_free}",
        f"nonneg {prog.n_nonneg}",
        " ".join(["psd", str(len(prog.psd_blocks))] + [str(k) for k in prog.psd_blocks]),
        f"rows {prog.n_rows}",
        f"cols {prog.n_cols}",
        f"objective {len(prog.c)}",
    ]
    lines += [f"{c} {_fmt(v)}" for c, v in prog.c]
    lines.append(f"matrix {len(prog.a_entries)}")
    lines += [f"{r} {c} {_fmt(v)}" for r, c, v in prog.a_entries]
    rhs = [(r, v) for r, v in enumerate(prog.b) if v != 0]
    lines.append(f"rhs {len(rhs)}")
    lines += [f"{r} {_fmt(v)}" for r, v in rhs]
    lines.append("end")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        self.pos = 0

    def next(self) -> List[str]:
        if self.pos >= len(self.lines):
            raise FormatError("unexpected end of input")
        self.pos += 1
        return self.lines[self.pos - 1].split()

    def keyed(self, key: str) -> List[str]:
        parts = self.next()
        if parts[0] != key:
            raise FormatError(f"line {self.pos}: expected {key!r}, got {parts[0]!r}")
        return parts[1:]


def parse_program(text: str) -> ConicProgram:
    rd = _Reader(text)
    if rd.next() != ["COPOCERT-CONIC", "1"]:
        raise FormatError("missing COPOCERT-CONIC 1 header")
    try:
        nf = int(rd.keyed("free")[0])
        nn = int(rd.keyed("nonneg")[0])
        psd = rd.keyed("psd")
        blocks = tuple(int(k) for k in psd[1:])
        if len(blocks) != int(psd[0]):
            raise FormatError("psd block count mismatch")
        nrows = int(rd.keyed("rows")[0])
        ncols = int(rd.keyed("cols")[0])
        c = []
        for _ in range(int(rd.keyed("objective")[0])):
            col, v = rd.next()
            c.append((int(col), _val(v)))
        entries = []
        for _ in range(int(rd.keyed("matrix")[0])):
            r, col, v = rd.next()
            entries.append((int(r), int(col), _val(v)))
        b: list = [0] * nrows
        for _ in range(int(rd.keyed("rhs")[0])):
            r, v = rd.next()
            b[int(r)] = _val(v)
        if rd.next() != ["end"]:
            raise FormatError("missing end marker")
    except (ValueError, IndexError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"line {rd.pos}: {exc}") from None
    prog = ConicProgram(nf, nn, blocks, nrows, tuple(entries), tuple(b), tuple(c))
    if prog.n_cols != ncols:
        raise FormatError(f"header says {ncols} columns, block structure gives {prog.n_cols}")
    return prog


def serialize_result(res: SolverResult) -> str:
    lines = ["COPOCERT-RESULT 1", f"status {res.status}", f"objective {float(res.objective)!r}"]
    lines.append(f"primal {len(res.primal)}")
    lines += [repr(float(v)) for v in res.primal]
    lines.append(f"dual {len(res.dual)}")
    lines += [repr(float(v)) for v in res.dual]
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_result(text: str) -> SolverResult:
    rd = _Reader(text)
    if rd.next() != ["COPOCERT-RESULT", "1"]:
        raise FormatError("missing COPOCERT-RESULT 1 header")
    status = rd.keyed("status")[0]
    if status not in STATUSES:
        raise FormatError(f"unknown status {status!r}")
    obj = float(rd.keyed("objective")[0])
    primal = np.array([float(rd.next()[0]) for _ in range(int(rd.keyed("primal")[0]))])
    dual = np.array([float(rd.next()[0]) for _ in range(int(rd.keyed("dual")[0]))])
    return SolverResult(status, obj, primal, dual)


def write_lp_format(prog: ConicProgram) -> str:
    """CPLEX LP text for a program without PSD blocks (for external cross-checks)."""
    if not prog.is_lp:
        raise ValueError("LP format needs a program without PSD blocks")

    def name(j: int) -> str:
        return f"f{j}" if j < prog.n_free else f"n{j - prog.n_free}"

    def expr(pairs) -> str:
        out = []
        for j, v in pairs:
            v = float(v)
            out.append(f"{'-' if v < 0 else '+'} {abs(v)!r} {name(j)}")
        return " ".join(out) if out else "0 f0"

    rows: List[list] = [[] for _ in range(prog.n_rows)]
    for r, c, v in prog.a_entries:
        rows[r].append((c, v))
    lines = ["Maximize", f" obj: {expr(prog.c)}", "Subject To"]
    for r, pairs in enumerate(rows):
        lines.append(f" r{r}: {expr(pairs)} = {float(prog.b[r])!r}")
    lines.append("Bounds")
    lines += [f" {name(j)} free" for j in range(prog.n_free)]
    lines.append("End")
    return "\n".join(lines) + "\n"
