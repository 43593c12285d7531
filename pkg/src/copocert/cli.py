"""Command line front end: problem files, the random instance family, solving and benchmarking.

Problem file (JSON, written with sorted keys and one-space indent so that
identical problems serialize to identical bytes)::

    {
      "format": "copocert-problem/1",
      "name": "...",                   # free text
      "seed": 7 | null,                # generator seed, if generated
      "nvars": n,
      "objective": ["num/den e1 .. en", ...],
      "constraints": [[...term lines...], ...],   # h_j(x) >= 0
      "equalities": [[...], ...],                 # optional, h(x) = 0
      "explicit_nonneg": true | false,            # adds x >= 0
      "bounds": {"L": ["0/1", ...], "U": [...] | null, "M": "num/den"} | null
    }

Polynomials use the term-line text form of ``Polynomial.to_lines``.

Bench config (JSON)::

    {
      "cases": ["problem.json", {"gen": {"n": 4, "seed": 1, "obj_deg": 2}}, ...],
      "hierarchies": ["lp", "sparse", "lasserre", "copositive"],
      "ranks": [2, 4],
      "deg_sigma0": [null, 4],
      "time_limit": 1500,          # seconds per cell, null for none
      "memory_limit_mb": 16000,    # estimated program size cap, null for none
      "workers": 2,
      "output": "bench"            # writes bench.csv and bench.json
    }

Bench CSV columns: case, hierarchy, rank, deg_sigma0, bound, wall_time,
status.  ``status`` is ``-T`` for a cell stopped by the time limit and
``-M`` for a cell refused by the memory guard.  Relative paths in a config
are resolved against the config file's directory.

Exit codes: 0 success, 2 parse or usage error, 3 solver failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import multiprocessing as mp
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .certificates import dump_certificate, load_certificate
from .conic.program import svec_len
from importlib import resources

from .hierarchies import (
    build_putinar_program,
    build_sparse_program,
    certify_sos,
    copositive_lower_bound,
    prepare_gvector,
    putinar_lower_bound,
    sparse_lower_bound,
)
from .polya_lp import LPCertificate, lp_lower_bound
from .polycore import Polynomial, monomials_up_to
from .results import HierarchyResult
from .semialg import SemialgebraicSet, SimplexEmbedding, derive_embedding
from .verify import verify_certificate

PROBLEM_TAG = "copocert-problem/1"
HIERARCHIES = ("lp", "sparse", "lasserre", "copositive")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


class ProblemError(ValueError):
    """Malformed or inconsistent problem input."""


# -- problem files ------------------------------------------------------------------

def _q(v) -> str:
    f = Fraction(v)
    return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class ProblemFile:
    nvars: int
    objective: Polynomial
    constraints: Tuple[Polynomial, ...] = ()
    equalities: Tuple[Polynomial, ...] = ()
    explicit_nonneg: bool = False
    L: Optional[Tuple[Fraction, ...]] = None
    U: Optional[Tuple[Fraction, ...]] = None
    M: Optional[Fraction] = None
    name: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        for h in (self.objective,) + tuple(self.constraints) + tuple(self.equalities):
            if h.nvars != self.nvars:
                raise ProblemError(f"polynomial with nvars={h.nvars} in a problem with nvars={self.nvars}")
        for name in ("L", "U"):
            v = getattr(self, name)
            if v is not None and len(v) != self.nvars:
                raise ProblemError(f"bound {name} has length {len(v)}, expected {self.nvars}")

    def semialgebraic_set(self) -> SemialgebraicSet:
        return SemialgebraicSet.build(self.nvars, self.constraints, self.equalities, self.explicit_nonneg)

    def embedding(self, slack=1, strict: bool = True) -> SimplexEmbedding:
        if self.M is None:
            raise ProblemError("this hierarchy needs bounds (at least M) in the problem file")
        L = self.L if self.L is not None else (Fraction(0),) * self.nvars
        return derive_embedding(self.semialgebraic_set(), L, self.M, slack=slack, strict=strict)

    def to_dict(self) -> Dict[str, Any]:
        bounds = None
        if self.M is not None or self.L is not None or self.U is not None:
            bounds = {
                "L": [_q(v) for v in self.L] if self.L is not None else None,
                "U": [_q(v) for v in self.U] if self.U is not None else None,
                "M": _q(self.M) if self.M is not None else None,
            }
        d = {
            "format": PROBLEM_TAG,
            "name": self.name,
            "seed": self.seed,
            "nvars": self.nvars,
            "objective": self.objective.to_lines(),
            "constraints": [h.to_lines() for h in self.constraints],
            "explicit_nonneg": self.explicit_nonneg,
            "bounds": bounds,
        }
        if self.equalities:
            d["equalities"] = [h.to_lines() for h in self.equalities]
        return d

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ProblemFile":
        if d.get("format") != PROBLEM_TAG:
            raise ProblemError(f"unknown problem format {d.get('format')!r}")
        try:
            n = int(d["nvars"])
            poly = lambda lines: Polynomial.from_text(list(lines), n)  # noqa: E731
            b = d.get("bounds") or {}
            vec = lambda v: tuple(Fraction(x) for x in v) if v is not None else None  # noqa: E731
            return cls(
                nvars=n,
                objective=poly(d["objective"]),
                constraints=tuple(poly(h) for h in d.get("constraints", [])),
                equalities=tuple(poly(h) for h in d.get("equalities", [])),
                explicit_nonneg=bool(d.get("explicit_nonneg", False)),
                L=vec(b.get("L")),
                U=vec(b.get("U")),
                M=Fraction(b["M"]) if b.get("M") is not None else None,
                name=str(d.get("name", "")),
                seed=d.get("seed"),
            )
        except ProblemError:
            raise
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ProblemError(f"malformed problem file: {exc}") from exc

    @classmethod
    def from_text(cls, text: str) -> "ProblemFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"problem file is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ProblemFile":
        return cls.from_text(Path(path).read_text())


def fixture_path(name: str) -> Path:
    """Path of a shipped example file, e.g. ``fixture_path("sparse_example.json")``."""
    path = Path(str(resources.files("copocert") / "fixtures" / name))
    if not path.is_file():
        raise FileNotFoundError(f"no shipped fixture named {name!r}")
    return path


# -- random instance family ---------------------------------------------------------

def _normal(rng: random.Random) -> Fraction:
    """Standard normal draw rounded to 4 decimals, as an exact rational."""
    return Fraction(round(rng.gauss(0.0, 1.0), 4)).limit_denominator(10**4)


def gen_instance(n: int, seed: int, objective_degree: int) -> ProblemFile:
    """Random instance: min f over {h_i(x_2i-1, x_2i) >= 0, 1 - sum x_even^4 >= 0, 1 - sum x_odd >= 0, x >= 0}.

    Algorithm (fixed, so files are byte-identical for identical arguments):
    ``random.Random(seed)``; every coefficient is ``gauss(0, 1)`` rounded to
    4 decimals.  The h_i are drawn first, in order, as c0 + c1 x_2i-1 + c2 x_2i;
    a draw is repeated until h_i >= 0 at some corner of
    [0, 2/n] x [0, (2/n)^(1/4)], which keeps the set non-empty (the product
    of those boxes satisfies the two coupling constraints).  Then the
    objective's coefficients follow in graded-lex monomial order over all
    monomials of degree <= objective_degree.  Bounds: L = 0, U = 1,
    M = 1 + n/2.
    """
    if n < 4 or n % 2:
        raise ProblemError(f"n must be an even integer >= 4, got {n}")
    if objective_degree not in (1, 2, 3, 4):
        raise ProblemError(f"objective degree must be in 1..4, got {objective_degree}")
    rng = random.Random(seed)
    xs = Polynomial.variables(n)
    a_hi = 2.0 / n
    b_hi = (2.0 / n) ** 0.25
    corners = [(0.0, 0.0), (a_hi, 0.0), (0.0, b_hi), (a_hi, b_hi)]
    cons: List[Polynomial] = []
    for i in range(n // 2):
        while True:
            c0, c1, c2 = _normal(rng), _normal(rng), _normal(rng)
            if max(float(c0) + float(c1) * a + float(c2) * b for a, b in corners) >= 0:
                break
        cons.append(c0 + c1 * xs[2 * i] + c2 * xs[2 * i + 1])
    one = Polynomial.constant(n, 1)
    cons.append(one - sum((xs[i] ** 4 for i in range(1, n, 2)), Polynomial.zero(n)))
    cons.append(one - sum((xs[i] for i in range(0, n, 2)), Polynomial.zero(n)))
    obj = {e: _normal(rng) for e in monomials_up_to(n, objective_degree)}
    return ProblemFile(
        nvars=n,
        objective=Polynomial(n, obj),
        constraints=tuple(cons),
        explicit_nonneg=True,
        L=(Fraction(0),) * n,
        U=(Fraction(1),) * n,
        M=Fraction(1) + Fraction(n, 2),
        name=f"{n}_{seed}_d{objective_degree}",
        seed=seed,
    )


# -- solving -----------------------------------------------------------------------

def solve_problem(pf: ProblemFile, hierarchy: str, rank: int, *, deg_sigma0: Optional[int] = None,
                  m1: Optional[int] = None, backend: Optional[str] = None,
                  time_limit: Optional[float] = None) -> HierarchyResult:
    p = pf.objective
    S = pf.semialgebraic_set()
    if hierarchy == "lp":
        return lp_lower_bound(p, S, pf.embedding(), rank, time_limit=time_limit)
    if hierarchy == "sparse":
        return sparse_lower_bound(p, S, pf.embedding(), rank, deg_sigma0=deg_sigma0, m1=m1,
                                  U=pf.U, backend=backend, time_limit=time_limit)
    if hierarchy == "lasserre":
        return putinar_lower_bound(p, S, rank, deg_sigma0=deg_sigma0, backend=backend,
                                   time_limit=time_limit)
    if hierarchy == "copositive":
        if not pf.explicit_nonneg:
            raise ProblemError("the copositive route needs explicit_nonneg: true")
        return copositive_lower_bound(p, S, rank, deg_sigma0=deg_sigma0, backend=backend,
                                      time_limit=time_limit)
    raise ProblemError(f"unknown hierarchy {hierarchy!r}")


def certify_problem(pf: ProblemFile, hierarchy: str, rank: int, *, deg_sigma0: Optional[int] = None,
                    m1: Optional[int] = None, backend: Optional[str] = None):
    """Best rank-r certificate in exact arithmetic, or None."""
    p = pf.objective
    S = pf.semialgebraic_set()
    if hierarchy == "lp":
        res = lp_lower_bound(p, S, pf.embedding(), rank, exact=True)
        return res.certificate if res.is_finite else None
    if hierarchy == "sparse":
        emb = pf.embedding()
        S2, g = prepare_gvector(S, emb, pf.U, m1)
        res = sparse_lower_bound(p, S, emb, rank, deg_sigma0=deg_sigma0, g=g, backend=backend)
        if not res.is_finite:
            return None
        cert, rep = certify_sos(
            lambda lam, ex: build_sparse_program(p, S2, emb, g, rank, deg_sigma0, lam_fixed=lam,
                                                 sigma0_exclude=ex),
            p, res.bound, backend=backend, emb=emb)
        return cert if rep is not None and rep.passed else None
    if hierarchy == "lasserre":
        res = putinar_lower_bound(p, S, rank, deg_sigma0=deg_sigma0, backend=backend)
        if not res.is_finite:
            return None
        cert, rep = certify_sos(
            lambda lam, ex: build_putinar_program(p, S, rank, deg_sigma0, lam_fixed=lam,
                                                  sigma0_exclude=ex),
            p, res.bound, backend=backend)
        return cert if rep is not None and rep.passed else None
    raise ProblemError(f"certificates are produced for lp, sparse and lasserre, not {hierarchy!r}")


# -- bench -----------------------------------------------------------------------

BENCH_COLUMNS = ("case", "hierarchy", "rank", "deg_sigma0", "bound", "wall_time", "status")


@dataclass(frozen=True)
class BenchRow:
    case: str
    hierarchy: str
    rank: int
    deg_sigma0: Optional[int]
    bound: float
    wall_time: float
    status: str

    def sort_key(self):
        return (self.case, self.hierarchy, self.rank, -1 if self.deg_sigma0 is None else self.deg_sigma0)

    def to_dict(self) -> Dict[str, Any]:
        b = self.bound
        return {
            "case": self.case,
            "hierarchy": self.hierarchy,
            "rank": self.rank,
            "deg_sigma0": self.deg_sigma0,
            "bound": b if math.isfinite(b) else str(b),
            "wall_time": round(self.wall_time, 3),
            "status": self.status,
        }


def estimate_program_bytes(pf: ProblemFile, hierarchy: str, rank: int,
                           deg_sigma0: Optional[int] = None) -> int:
    """Rough memory need of an interior-point solve: dense Schur complement on the rows.

    Row counts come from monomial counts, so nothing is assembled.
    """
    n = pf.nvars
    comb = math.comb
    if hierarchy == "lp":
        m = len(pf.constraints) + len(pf.equalities) * 2
        cols = comb(n + m + 1 + rank, rank)
        rows = comb(n + rank, rank)
        return 8 * rows * cols
    if hierarchy in ("sparse", "lasserre"):
        rows = comb(n + rank, rank)
        d0 = rank if deg_sigma0 is None else deg_sigma0
        k0 = comb(n + d0 // 2, d0 // 2)
        return 8 * (rows * rows + rows * svec_len(k0))
    if hierarchy == "copositive":
        gens = [h for h in pf.constraints if h.degree > 0]
        N = n + len(gens)
        dmax = max([h.degree for h in gens] + [math.ceil(pf.objective.degree / 2)])
        rows = comb(N + rank, rank) + comb(n + 2 * dmax * max(1, dmax), n)
        k0 = comb(N + rank // 2, rank // 2)
        return 8 * (rows * rows + rows * svec_len(k0))
    return 0


def _run_cell(pf_text: str, hierarchy: str, rank: int, deg_sigma0, backend, time_limit):
    pf = ProblemFile.from_text(pf_text)
    t0 = time.monotonic()
    try:
        res = solve_problem(pf, hierarchy, rank, deg_sigma0=deg_sigma0, backend=backend,
                            time_limit=time_limit)
        return res.bound, time.monotonic() - t0, res.status
    except Exception as exc:  # a failing cell becomes a row
        return float("nan"), time.monotonic() - t0, f"error: {type(exc).__name__}: {exc}"


def _cell_worker(conn, args):
    try:
        conn.send(_run_cell(*args))
    finally:
        conn.close()


def run_bench(cases: Sequence[Tuple[str, ProblemFile]], hierarchies: Sequence[str], ranks: Sequence[int],
              deg_sigma0s: Sequence[Optional[int]] = (None,), time_limit: Optional[float] = None,
              memory_limit_mb: Optional[float] = None, workers: int = 1,
              backend: Optional[str] = None) -> List[BenchRow]:
    """Evaluate every (case, hierarchy, rank, deg_sigma0) cell; rows come back sorted.

    Each cell runs in its own process so the time limit can stop it.
    """
    cells = []
    for name, pf in cases:
        for h in hierarchies:
            for r in ranks:
                for d0 in deg_sigma0s:
                    cells.append((name, pf, h, r, d0))
    rows: List[BenchRow] = []
    pending = []
    for name, pf, h, r, d0 in cells:
        if memory_limit_mb is not None and estimate_program_bytes(pf, h, r, d0) > memory_limit_mb * 2**20:
            rows.append(BenchRow(name, h, r, d0, float("nan"), 0.0, "-M"))
        else:
            pending.append((name, pf, h, r, d0))
    ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
    running: Dict[Any, Tuple] = {}
    workers = max(1, int(workers))
    while pending or running:
        while pending and len(running) < workers:
            name, pf, h, r, d0 = pending.pop(0)
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_cell_worker,
                               args=(send, (pf.to_text(), h, r, d0, backend, time_limit)))
            proc.start()
            send.close()
            running[proc] = (recv, time.monotonic(), (name, h, r, d0))
        time.sleep(0.02)
        for proc in list(running):
            recv, start, (name, h, r, d0) = running[proc]
            elapsed = time.monotonic() - start
            if recv.poll():
                try:
                    bound, wall, status = recv.recv()
                except EOFError:
                    bound, wall, status = float("nan"), elapsed, "error: worker exited"
                proc.join()
                rows.append(BenchRow(name, h, r, d0, bound, wall, status))
                del running[proc]
            elif not proc.is_alive():
                proc.join()
                rows.append(BenchRow(name, h, r, d0, float("nan"), elapsed,
                                     f"error: worker exit code {proc.exitcode}"))
                del running[proc]
            elif time_limit is not None and elapsed > time_limit:
                proc.terminate()
                proc.join()
                rows.append(BenchRow(name, h, r, d0, float("nan"), elapsed, "-T"))
                del running[proc]
    rows.sort(key=BenchRow.sort_key)
    return rows


def bench_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for row in rows:
        d = row.to_dict()
        w.writerow(["" if d[c] is None else d[c] for c in BENCH_COLUMNS])
    return buf.getvalue()


def bench_json(rows: Sequence[BenchRow]) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=1, sort_keys=True) + "\n"


def load_bench_config(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"bench config is not valid JSON: {exc}") from exc
    cases = []
    for c in cfg.get("cases", []):
        if isinstance(c, str):
            p = Path(c) if Path(c).is_absolute() else path.parent / c
            pf = ProblemFile.load(p)
            cases.append((pf.name or p.stem, pf))
        elif isinstance(c, dict) and "gen" in c:
            g = c["gen"]
            pf = gen_instance(int(g["n"]), int(g["seed"]), int(g.get("obj_deg", 2)))
            cases.append((pf.name, pf))
        else:
            raise ProblemError(f"bad case entry {c!r}")
    out = cfg.get("output")
    if out is not None and not Path(out).is_absolute():
        out = str(path.parent / out)
    return {
        "cases": cases,
        "hierarchies": list(cfg.get("hierarchies", [])),
        "ranks": [int(r) for r in cfg.get("ranks", [])],
        "deg_sigma0": list(cfg.get("deg_sigma0", [None])),
        "time_limit": cfg.get("time_limit"),
        "memory_limit_mb": cfg.get("memory_limit_mb"),
        "workers": int(cfg.get("workers", 1)),
        "backend": cfg.get("backend"),
        "output": out,
    }


# -- argument handling ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="copocert", description="Copositive and sparse SOS certificates for polynomial optimization.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="lower bound at one hierarchy rank")
    s.add_argument("problem")
    s.add_argument("--hierarchy", choices=HIERARCHIES, required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--sigma0-deg", type=int, default=None)
    s.add_argument("--m1", type=int, default=None)
    s.add_argument("--backend", default=None)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--timing", action="store_true", help="include wall time in the output")

    c = sub.add_parser("certify", help="write an exact certificate for the rank-r bound")
    c.add_argument("problem")
    c.add_argument("--hierarchy", choices=("lp", "sparse", "lasserre"), required=True)
    c.add_argument("--rank", type=int, required=True)
    c.add_argument("--sigma0-deg", type=int, default=None)
    c.add_argument("--m1", type=int, default=None)
    c.add_argument("--backend", default=None)
    c.add_argument("--out", default=None, help="certificate path (default: stdout)")

    v = sub.add_parser("verify", help="check a certificate against a problem")
    v.add_argument("certificate")
    v.add_argument("problem")
    v.add_argument("--tol", type=float, default=1e-8)

    g = sub.add_parser("gen", help="random instance from the sparse test family")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--obj-deg", type=int, default=2)
    g.add_argument("--out", default=None)

    b = sub.add_parser("bench", help="run a grid of cases and hierarchies")
    b.add_argument("--config", required=True)
    return ap


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(a) -> int:
    pf = ProblemFile.load(a.problem)
    res = solve_problem(pf, a.hierarchy, a.rank, deg_sigma0=a.sigma0_deg, m1=a.m1,
                        backend=a.backend, time_limit=a.time_limit)
    rec = res.to_record()
    if not a.timing:
        rec = {k: v for k, v in rec.items() if "time" not in k}
    rec["problem"] = pf.name
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK if res.status in ("optimal", "inaccurate", "no-certificate", "inadmissible") else EXIT_SOLVER


def _cmd_certify(a) -> int:
    pf = ProblemFile.load(a.problem)
    cert = certify_problem(pf, a.hierarchy, a.rank, deg_sigma0=a.sigma0_deg, m1=a.m1, backend=a.backend)
    if cert is None:
        print(f"none at rank {a.rank}")
        return EXIT_OK
    _emit(dump_certificate(cert), a.out)
    if a.out:
        print(f"certificate for p - ({cert.shift}) written to {a.out}")
    return EXIT_OK


def _cmd_verify(a) -> int:
    pf = ProblemFile.load(a.problem)
    try:
        cert = load_certificate(Path(a.certificate).read_text())
    except (ValueError, KeyError, TypeError) as exc:
        raise ProblemError(f"malformed certificate file: {exc}") from exc
    S = pf.semialgebraic_set()
    emb = pf.embedding() if pf.M is not None and isinstance(cert, LPCertificate) else None
    if isinstance(cert, LPCertificate) and emb is None:
        raise ProblemError("verifying an LP certificate needs bounds in the problem file")
    report = verify_certificate(cert, pf.objective, S, emb, a.tol, U=pf.U)
    print(report.verdict)
    print(json.dumps(report.summary(), sort_keys=True))
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_gen(a) -> int:
    pf = gen_instance(a.n, a.seed, a.obj_deg)
    _emit(pf.to_text(), a.out)
    return EXIT_OK


def _cmd_bench(a) -> int:
    cfg = load_bench_config(a.config)
    rows = run_bench(cfg["cases"], cfg["hierarchies"], cfg["ranks"], cfg["deg_sigma0"],
                     cfg["time_limit"], cfg["memory_limit_mb"], cfg["workers"], cfg["backend"])
    text = bench_csv(rows)
    if cfg["output"]:
        Path(cfg["output"] + ".csv").write_text(text)
        Path(cfg["output"] + ".json").write_text(bench_json(rows))
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"solve": _cmd_solve, "certify": _cmd_certify, "verify": _cmd_verify,
            "gen": _cmd_gen, "bench": _cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return COMMANDS[a.command](a)
    except (ProblemError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        # precondition violations raised by the hierarchies (rank, degree)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
