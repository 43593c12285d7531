"""PSD backends behind a narrow contract: take a ConicProgram, return a SolverResult.

Two implementations ship:

* ``cvxpy``: in-process, builds the program in cvxpy and calls an installed
  conic solver (CLARABEL by default, SCS as fallback).
* ``external``: writes the program in the text format of ``conic.io``,
  runs a command taken from the ``COPOCERT_SOLVER_CMD`` environment
  variable (``{input}`` and ``{output}`` are substituted) and parses the
  result file.

``solve_conic`` dispatches by name through a registry and attaches a
residual report to every result.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from typing import Callable, Dict, Optional

import numpy as np
import scipy.sparse as sp

from .program import SQRT2, ConicProgram, SolverResult, residual_report, svec_len
from .simplex import solve_lp

Backend = Callable[..., SolverResult]

SOLVER_CMD_ENV = "COPOCERT_SOLVER_CMD"


class BackendError(RuntimeError):
    pass


_REGISTRY: Dict[str, Backend] = {}


def register_backend(name: str, fn: Backend) -> None:
    _REGISTRY[name] = fn


def available_backends() -> list:
    return sorted(_REGISTRY)


def get_backend(name: str) -> Backend:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise BackendError(
            f"backend {name!r} is not registered (available: {', '.join(available_backends())})"
        ) from None


def _svec_map(k: int) -> sp.csr_matrix:
    """Sparse map from column-major vec(X) to the scaled upper-triangle vectorization."""
    rows, cols, vals = [], [], []
    pos = 0
    for i in range(k):
        for j in range(i, k):
            if i == j:
                rows.append(pos), cols.append(i + j * k), vals.append(1.0)
            else:
                # sqrt(2) X_ij split over the two symmetric entries
                rows += [pos, pos]
                cols += [i + j * k, j + i * k]
                vals += [SQRT2 / 2, SQRT2 / 2]
            pos += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(svec_len(k), k * k))


def cvxpy_backend(prog: ConicProgram, solver: Optional[str] = None, verbose: bool = False,
                  time_limit: Optional[float] = None, **opts) -> SolverResult:
    import cvxpy as cp

    t0 = time.monotonic()
    A = prog.a_matrix().tocsc()
    b = prog.b_vector()
    c = prog.c_vector()
    nf, nn = prog.n_free, prog.n_nonneg
    parts, cons, pieces = [], [], []
    lin = 0
    obj = 0
    if nf:
        xf = cp.Variable(nf)
        parts.append(xf)
        lin = lin + A[:, :nf] @ xf
        obj = obj + c[:nf] @ xf
        pieces.append(("f", xf))
    if nn:
        xn = cp.Variable(nn, nonneg=True)
        lin = lin + A[:, nf : nf + nn] @ xn
        obj = obj + c[nf : nf + nn] @ xn
        pieces.append(("n", xn))
    mats = []
    for off, k in zip(prog.block_offsets(), prog.psd_blocks):
        X = cp.Variable((k, k), PSD=True)
        S = _svec_map(k)
        blk = A[:, off : off + svec_len(k)] @ S
        lin = lin + blk @ cp.vec(X, order="F")
        obj = obj + (S.T @ c[off : off + svec_len(k)]) @ cp.vec(X, order="F")
        mats.append(X)
    if prog.n_rows:
        cons.append(lin == b)
    problem = cp.Problem(cp.Maximize(obj), cons)
    candidates = [solver] if solver else ["CLARABEL", "SCS"]
    installed = set(cp.installed_solvers())
    last_err = None
    status = None
    for name in candidates:
        if name not in installed:
            last_err = f"solver {name} not installed"
            continue
        try:
            kwargs = dict(opts)
            if time_limit and name == "CLARABEL":
                kwargs.setdefault("time_limit", float(time_limit))
            problem.solve(solver=name, verbose=verbose, **kwargs)
            status = problem.status
            break
        except cp.error.SolverError as exc:
            last_err = f"{name}: {exc}"
    wall = time.monotonic() - t0
    if status is None:
        return SolverResult("numerical-failure", wall_time=wall, message=str(last_err))
    mapping = {
        cp.OPTIMAL: "optimal",
        cp.OPTIMAL_INACCURATE: "optimal",
        cp.INFEASIBLE: "infeasible",
        cp.INFEASIBLE_INACCURATE: "infeasible",
        cp.UNBOUNDED: "unbounded",
        cp.UNBOUNDED_INACCURATE: "unbounded",
        cp.USER_LIMIT: "time-limit",
    }
    st = mapping.get(status, "numerical-failure")
    if st != "optimal":
        return SolverResult(st, wall_time=wall, message=str(status))
    x = np.zeros(prog.n_cols)
    pos = 0
    for kind, var in pieces:
        x[pos : pos + var.size] = np.asarray(var.value).ravel()
        pos += var.size
    for off, k, X in zip(prog.block_offsets(), prog.psd_blocks, mats):
        Xv = np.asarray(X.value)
        Xv = (Xv + Xv.T) / 2
        x[off : off + svec_len(k)] = _svec_map(k) @ Xv.ravel(order="F")
    dual = np.asarray(cons[0].dual_value).ravel() if cons and cons[0].dual_value is not None else np.zeros(0)
    return SolverResult("optimal", objective=float(c @ x), primal=x, dual=dual,
                        wall_time=wall, message=str(status))


def lp_backend(prog: ConicProgram, **opts) -> SolverResult:
    """The embedded simplex; 1x1 PSD blocks are treated as non-negative scalars."""
    if all(k == 1 for k in prog.psd_blocks):
        n1 = len(prog.psd_blocks)
        if n1:
            prog = ConicProgram(prog.n_free, prog.n_nonneg + n1, (), prog.n_rows,
                                prog.a_entries, prog.b, prog.c, prog.row_keys)
        return solve_lp(prog, **opts)
    raise BackendError("the embedded LP backend cannot handle PSD blocks larger than 1x1")


def external_backend(prog: ConicProgram, command: Optional[str] = None,
                     time_limit: Optional[float] = None, **_) -> SolverResult:
    """Round-trip through files and an external command."""
    from .io import parse_result, serialize_program

    command = command or os.environ.get(SOLVER_CMD_ENV)
    if not command:
        raise BackendError(f"external backend needs a command; set {SOLVER_CMD_ENV}")
    t0 = time.monotonic()
    with tempfile.TemporaryDirectory() as tmp:
        inp = os.path.join(tmp, "program.txt")
        out = os.path.join(tmp, "result.txt")
        with open(inp, "w") as fh:
            fh.write(serialize_program(prog))
        cmd = command.format(input=shlex.quote(inp), output=shlex.quote(out))
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True,
                                  timeout=time_limit)
        except subprocess.TimeoutExpired:
            return SolverResult("time-limit", wall_time=time.monotonic() - t0)
        if proc.returncode != 0 or not os.path.exists(out):
            raise BackendError(
                f"external solver failed (exit {proc.returncode}): {proc.stderr.strip()[:500]}"
            )
        with open(out) as fh:
            res = parse_result(fh.read())
    res.wall_time = time.monotonic() - t0
    return res


register_backend("cvxpy", cvxpy_backend)
register_backend("lp", lp_backend)
register_backend("external", external_backend)


def default_psd_backend() -> str:
    """``external`` when a solver command is configured, else ``cvxpy``."""
    return "external" if os.environ.get(SOLVER_CMD_ENV) else "cvxpy"


def solve_conic(prog: ConicProgram, backend: str | Backend | None = None, **opts) -> SolverResult:
    """Dispatch to a backend, normalize its status and attach residuals."""
    if backend is None:
        backend = "lp" if prog.is_lp else default_psd_backend()
    fn = get_backend(backend) if isinstance(backend, str) else backend
    try:
        res = fn(prog, **opts)
    except BackendError:
        raise
    except Exception as exc:  # backend bugs surface with context, never silently
        raise BackendError(f"backend {backend!r} failed: {exc}") from exc
    if res.status not in ("optimal", "infeasible", "unbounded", "numerical-failure", "time-limit"):
        res.status = "numerical-failure"
    if res.ok and res.primal.size == prog.n_cols:
        res.residuals.update(residual_report(prog, res.primal))
    return res


def accept_residuals(res: SolverResult, eq_tol: float = 1e-6, eig_tol: float = 1e-7) -> bool:
    """Cone residual acceptance rule for optimal conic results."""
    r = res.residuals
    if not r:
        return False
    return (r["eq_residual"] <= eq_tol * (1 + r["b_norm"])
            and r["min_psd_eig"] >= -eig_tol and r["min_nonneg"] >= -eig_tol)
