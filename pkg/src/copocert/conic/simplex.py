"""Deterministic two-phase revised simplex for programs without PSD blocks.

Standard form used internally: minimize c'x subject to Ax = b, x >= 0, with
free variables split as x+ - x-, rows flipped so b >= 0 and the data
equilibrated by row and column maxima.

Pricing is Dantzig's rule with a two-pass ratio test.  The first time
``degenerate_threshold`` consecutive degenerate pivots occur in a phase, the
right-hand side is shifted by a small deterministic perturbation; a second
such run switches to Bland's rule until a pivot makes progress, which rules
out cycling.  After phase II the true right-hand side is restored and any
small negative basic values are removed by dual simplex pivots.  The basis inverse is kept explicitly,
updated by rank-one pivots and rebuilt every ``refactor_every`` iterations.
Artificial columns never re-enter in phase II; a basic artificial is held
at zero (any pivot direction touching it makes it leave).

An optional exact pass re-solves the final basis in rational arithmetic.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .program import ConicProgram, SolverResult


class _Timeout(Exception):
    pass


class _Numerical(Exception):
    pass


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, tol: float, refactor_every: int,
                 degenerate_threshold: int, deadline: Optional[float], max_iter: int):
        self.m, self.n = A.shape
        # artificial columns occupy indices n .. n+m-1
        self.A = np.hstack([A, np.eye(self.m)])
        self.b = b
        # right-hand side used for the basic values; shifted while escaping degeneracy
        self.b_work = b.copy()
        self.perturbed = False
        self.tol = tol
        self.refactor_every = refactor_every
        self.degenerate_threshold = degenerate_threshold
        self.deadline = deadline
        self.max_iter = max_iter
        self.basis = list(range(self.n, self.n + self.m))
        self.Binv = np.eye(self.m)
        self.xB = b.copy()
        self.iterations = 0
        self.since_refactor = 0

    def is_artificial(self, j: int) -> bool:
        return j >= self.n

    def refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            raise _Numerical("singular basis during refactorization") from None
        # cheap infinity-norm condition estimate; data are equilibrated
        if not np.all(np.isfinite(self.Binv)) or np.abs(self.Binv).max() * np.abs(B).max() > 1e13:
            raise _Numerical("ill-conditioned basis")
        self.xB = self.Binv @ self.b_work
        self.since_refactor = 0

    def pivot(self, r: int, q: int, col: np.ndarray) -> None:
        piv = col[r]
        t = self.xB[r] / piv
        self.xB -= t * col
        self.xB[r] = t
        self.Binv[r] /= piv
        mask = np.ones(self.m, dtype=bool)
        mask[r] = False
        self.Binv[mask] -= np.outer(col[mask], self.Binv[r])
        self.basis[r] = q
        self.iterations += 1
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()

    def run(self, cost: np.ndarray, allow_artificial: bool, lock_artificial: bool) -> str:
        """Minimize cost'x from the current basis.  Returns optimal or unbounded."""
        tol = self.tol
        degenerate_run = 0
        eligible = np.ones(self.n + self.m, dtype=bool)
        if not allow_artificial:
            eligible[self.n :] = False
        while True:
            if self.iterations >= self.max_iter:
                raise _Numerical(f"iteration limit {self.max_iter} reached")
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise _Timeout()
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            d[self.basis] = 0.0
            cand = np.flatnonzero(eligible & (d < -tol))
            if cand.size == 0:
                return "optimal"
            if degenerate_run >= self.degenerate_threshold and not self.perturbed:
                self.perturb()
                degenerate_run = 0
            bland = degenerate_run >= self.degenerate_threshold
            q = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            col = self.Binv @ self.A[:, q]
            ratios = np.full(self.m, np.inf)
            relaxed = np.full(self.m, np.inf)
            pos = col > tol
            xpos = np.maximum(self.xB[pos], 0.0)
            ratios[pos] = xpos / col[pos]
            relaxed[pos] = (xpos + tol) / col[pos]
            if lock_artificial:
                art = np.array([self.is_artificial(j) for j in self.basis]) & (np.abs(col) > tol)
                ratios[art] = relaxed[art] = 0.0
            tmin = ratios.min()
            if not np.isfinite(tmin):
                return "unbounded"
            if bland:
                ties = np.flatnonzero(ratios <= tmin + tol * max(1.0, abs(tmin)))
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # two-pass ratio test: the largest pivot among ratios within the relaxed minimum
                ties = np.flatnonzero(ratios <= relaxed.min())
                r = int(ties[np.argmax(np.abs(col[ties]))])
            degenerate_run = degenerate_run + 1 if tmin <= tol else 0
            self.pivot(r, q, col)

    def perturb(self) -> None:
        """Shift every basic value up by a small deterministic amount (via the rhs)."""
        rng = np.random.default_rng(0)
        delta = (1e-7 * (1.0 + np.abs(self.xB))) * (0.5 + rng.random(self.m))
        self.b_work = self.b_work + self.A[:, self.basis] @ delta
        self.xB = self.xB + delta
        self.perturbed = True

    def unperturb(self) -> None:
        self.b_work = self.b.copy()
        self.perturbed = False
        self.refactor()

    def restore_primal(self, cost: np.ndarray, max_steps: int = 200) -> None:
        """Dual simplex pivots on a dual-feasible basis until no basic value is negative.

        Drift from the clamped ratio test can leave small negative basic values
        after a refactorization; the optimal basis is dual feasible, so dual
        pivots remove them without losing optimality.
        """
        tol = self.tol
        eligible = np.ones(self.n + self.m, dtype=bool)
        eligible[self.n :] = False
        for _ in range(max_steps):
            r = int(np.argmin(self.xB))
            if self.xB[r] >= -tol:
                return
            y = cost[self.basis] @ self.Binv
            d = np.maximum(cost - y @ self.A, 0.0)
            alpha = self.Binv[r] @ self.A
            alpha[self.basis] = 0.0
            cand = np.flatnonzero(eligible & (alpha < -tol))
            if cand.size == 0:
                raise _Numerical("negative basic value with no dual pivot")
            # two-pass ratio test: among near-minimal ratios take the largest pivot
            mag = -alpha[cand]
            theta = np.min((d[cand] + 1e-9) / mag)
            near = cand[d[cand] / mag <= theta]
            q = int(near[np.argmax(-alpha[near])])
            self.pivot(r, q, self.Binv @ self.A[:, q])
        self.refactor()

    def drive_out_artificials(self) -> None:
        for r in range(self.m):
            if not self.is_artificial(self.basis[r]):
                continue
            row = self.Binv[r] @ self.A[:, : self.n]
            row[[j for j in self.basis if j < self.n]] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-7:
                self.pivot(r, j, self.Binv @ self.A[:, j])
            # otherwise the row is redundant and its artificial stays at zero


def _exact_solve(B: List[List[Fraction]], b: List[Fraction]) -> Optional[List[Fraction]]:
    """Gaussian elimination over the rationals; None if singular."""
    m = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(B)]
    for k in range(m):
        p = next((i for i in range(k, m) if M[i][k] != 0), None)
        if p is None:
            return None
        M[k], M[p] = M[p], M[k]
        pivot = M[k][k]
        inv = 1 / pivot
        rowk = [v * inv for v in M[k]]
        M[k] = rowk
        for i in range(m):
            if i != k and M[i][k] != 0:
                f = M[i][k]
                M[i] = [a - f * c for a, c in zip(M[i], rowk)]
    return [M[i][m] for i in range(m)]


def solve_lp(
    prog: ConicProgram,
    *,
    tol: float = 1e-9,
    time_limit: Optional[float] = None,
    max_iter: Optional[int] = None,
    degenerate_threshold: int = 50,
    refactor_every: int = 50,
    exact_refine: bool = False,
) -> SolverResult:
    """Maximize prog's objective over free and non-negative variables."""
    if not prog.is_lp:
        raise ValueError("solve_lp requires a program without PSD blocks")
    t0 = time.monotonic()
    nf, nn, m = prog.n_free, prog.n_nonneg, prog.n_rows
    ncols = nf + nn
    A0 = prog.a_matrix().toarray() if m else np.zeros((0, ncols))
    b0 = prog.b_vector()
    c0 = prog.c_vector()

    if m == 0:
        # no equalities: bounded only if no objective pushes an unbounded direction
        if np.any(c0[:nf] != 0) or np.any(c0[nf:] > 0):
            return SolverResult("unbounded", wall_time=time.monotonic() - t0)
        return SolverResult("optimal", 0.0, np.zeros(ncols), np.zeros(0),
                            wall_time=time.monotonic() - t0, exact_primal=[Fraction(0)] * ncols,
                            exact_objective=Fraction(0))

    # split free variables: standard column k<nf is x+, nf+nn+k is x-
    A = np.hstack([A0, -A0[:, :nf]])
    cmin = -np.concatenate([c0, -c0[:nf]])
    b = b0.copy()

    zero_rows = np.flatnonzero(np.all(A == 0, axis=1))
    if np.any(np.abs(b[zero_rows]) > tol):
        return SolverResult("infeasible", wall_time=time.monotonic() - t0,
                            message="a row with no variables has non-zero right-hand side")

    sign = np.where(b < 0, -1.0, 1.0)
    rmax = np.max(np.abs(A), axis=1)
    rscale = sign / np.where(rmax > 0, rmax, 1.0)
    A = A * rscale[:, None]
    b = b * rscale
    cmax = np.max(np.abs(A), axis=0)
    cscale = 1.0 / np.where(cmax > 0, cmax, 1.0)
    A = A * cscale[None, :]
    cmin_s = cmin * cscale

    N = A.shape[1]
    max_iter = max_iter if max_iter is not None else 50 * (m + N) + 1000
    deadline = t0 + time_limit if time_limit else None
    tab = _Tableau(A, b, tol, refactor_every, degenerate_threshold, deadline, max_iter)

    def result(status, msg=""):
        return SolverResult(status, iterations=tab.iterations,
                            wall_time=time.monotonic() - t0, message=msg)

    try:
        cost1 = np.concatenate([np.zeros(N), np.ones(m)])
        tab.run(cost1, allow_artificial=True, lock_artificial=False)
        tab.unperturb()
        infeas = sum(max(v, 0.0) for j, v in zip(tab.basis, tab.xB) if tab.is_artificial(j))
        if infeas > 1e-7 * (1 + np.max(np.abs(b))):
            return result("infeasible", f"phase I residual {infeas:.3e}")
        tab.drive_out_artificials()
        tab.refactor()
        cost2 = np.concatenate([cmin_s, np.zeros(m)])
        status = tab.run(cost2, allow_artificial=False, lock_artificial=True)
        if status == "unbounded":
            return result("unbounded")
        # back on the true right-hand side: repair any negative basic values and re-optimize
        for _ in range(3):
            tab.unperturb()
            if tab.xB.min() >= -tol:
                break
            tab.restore_primal(cost2)
            tab.run(cost2, allow_artificial=False, lock_artificial=True)
    except _Timeout:
        return result("time-limit")
    except _Numerical as exc:
        return result("numerical-failure", str(exc))

    xs = np.zeros(N + m)
    xs[tab.basis] = tab.xB
    xstd = xs[:N] * cscale
    x = xstd[:ncols].copy()
    x[:nf] -= xstd[ncols:]
    ys = cost2[tab.basis] @ tab.Binv
    y = -(ys * rscale)  # dual of the maximization: A'y >= c, b'y = optimum
    resid = float(np.max(np.abs(A0 @ x - b0)))
    minx = float(x[nf:].min()) if nn else 0.0
    scale_b = 1 + float(np.max(np.abs(b0)))
    if resid > 1e-7 * scale_b or minx < -1e-7 * scale_b:
        return result("numerical-failure",
                      f"final residual {resid:.3e}, min variable {minx:.3e}")
    res = SolverResult(
        "optimal",
        objective=float(c0 @ x),
        primal=x,
        dual=y,
        iterations=tab.iterations,
        wall_time=0.0,
        residuals={"eq_residual": resid, "min_nonneg": minx,
                   "dual_gap": float(b0 @ y - c0 @ x)},
        basis=list(tab.basis),
    )
    if exact_refine:
        _refine(prog, res, nf, nn)
    res.wall_time = time.monotonic() - t0
    return res


def _refine(prog: ConicProgram, res: SolverResult, nf: int, nn: int) -> None:
    """Re-solve the final basis exactly; sets exact_primal when it is feasible."""
    m = prog.n_rows
    ncols = nf + nn
    N = ncols + nf
    cols: List[dict] = [dict() for _ in range(N)]
    for r, c, v in prog.a_entries:
        v = Fraction(v)
        cols[c][r] = v
        if c < nf:
            cols[ncols + c][r] = -v
    b = [Fraction(v) for v in prog.b]
    basis = res.basis or []
    B = [[Fraction(0)] * m for _ in range(m)]
    for k, j in enumerate(basis):
        if j < N:
            for r, v in cols[j].items():
                B[r][k] = v
        else:
            B[j - N][k] = Fraction(1)
    z = _exact_solve(B, b)
    if z is None:
        res.message = "exact refinement: singular basis"
        return
    xstd = [Fraction(0)] * N
    for k, j in enumerate(basis):
        if j >= N:
            if z[k] != 0:
                res.message = "exact refinement: artificial variable non-zero"
                return
        else:
            xstd[j] = z[k]
    if any(v < 0 for v in xstd):
        res.message = "exact refinement: basis is not primal feasible in exact arithmetic"
        return
    x = xstd[:ncols]
    for k in range(nf):
        x[k] -= xstd[ncols + k]
    res.exact_primal = x
    res.exact_objective = sum((Fraction(v) * x[c] for c, v in prog.c), Fraction(0))


def lp_dual_objective(prog: ConicProgram, y: Sequence[float]) -> float:
    return float(prog.b_vector() @ np.asarray(y))
