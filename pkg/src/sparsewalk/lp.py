"""Dense two-phase simplex solver for small and mid-size linear programs.

Problems are stated over free (sign-unrestricted) variables:

    minimize    c.x
    subject to  A_ub.x <= b_ub
                A_eq.x == b_eq

Internally the free variables are split into positive and negative parts and
the usual phase-1 / phase-2 tableau method is run on the resulting standard
form.  Problems whose variables are all nonnegative by construction (convex
combination weights, for instance) can set nonneg=True to skip the split;
that halves the column count and, more importantly, removes the need for an
explicit x >= 0 inequality block, which keeps the tableau small when the
variable count is large.  Optimal answers are basic feasible solutions of
the standard form, which is what the vertex-sampling callers rely on.
Pricing is Dantzig's rule with a switch to Bland's rule after a run of
degenerate pivots, so the solver cannot cycle.

The solver is deterministic: identical problems produce identical outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Tolerances for double precision at the problem sizes handled here
# (up to a couple of thousand rows, a few hundred columns).
FEAS_TOL = 1e-8    # absolute bound on constraint residuals of returned points
PIVOT_TOL = 1e-10  # minimum admissible pivot magnitude
COST_TOL = 1e-9    # reduced-cost threshold for entering columns
OBJ_TOL = 1e-7     # objective agreement tolerance (used by callers/tests)

ITER_FACTOR = 50   # iteration cap is ITER_FACTOR * (n + m + p) per phase
DEGENERATE_STEP = 1e-12


class DimensionMismatch(ValueError):
    """Problem pieces disagree on dimensions."""


class MaxIterationsExceeded(RuntimeError):
    """Iteration cap hit or numerical breakdown; distinct from infeasibility."""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """minimize objective.x  s.t.  ineq_matrix.x <= ineq_rhs, eq_matrix.x == eq_rhs.

    Variables are free unless a row constrains them, or nonneg is set, in
    which case every variable is restricted to x >= 0 without explicit rows.
    An empty equality block may be omitted.
    """

    objective: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    nonneg: bool = False

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        self.ineq_matrix = np.atleast_2d(np.asarray(self.ineq_matrix, dtype=float))
        self.ineq_rhs = np.asarray(self.ineq_rhs, dtype=float)
        n = self.objective.size
        if self.ineq_matrix.size == 0:
            self.ineq_matrix = self.ineq_matrix.reshape(0, n)
        if self.eq_matrix is None:
            self.eq_matrix = np.zeros((0, n))
            self.eq_rhs = np.zeros(0)
        else:
            self.eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
            if self.eq_matrix.size == 0:
                self.eq_matrix = self.eq_matrix.reshape(0, n)
            self.eq_rhs = np.asarray(self.eq_rhs, dtype=float)
        if self.objective.ndim != 1 or n == 0:
            raise DimensionMismatch("objective must be a nonempty 1-D vector")
        if self.ineq_matrix.shape[1] != n:
            raise DimensionMismatch(
                f"ineq_matrix has {self.ineq_matrix.shape[1]} columns, expected {n}"
            )
        if self.ineq_rhs.shape != (self.ineq_matrix.shape[0],):
            raise DimensionMismatch("ineq_rhs length must match ineq_matrix rows")
        if self.eq_matrix.shape[1] != n:
            raise DimensionMismatch(
                f"eq_matrix has {self.eq_matrix.shape[1]} columns, expected {n}"
            )
        if self.eq_rhs.shape != (self.eq_matrix.shape[0],):
            raise DimensionMismatch("eq_rhs length must match eq_matrix rows")
        for part in (self.objective, self.ineq_matrix, self.ineq_rhs,
                     self.eq_matrix, self.eq_rhs):
            if not np.all(np.isfinite(part)):
                raise ValueError("problem entries must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class LpOutcome:
    status: LpStatus
    solution: np.ndarray | None = None
    objective_value: float | None = None


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    """Gauss-Jordan pivot on T[row, col], in place, keeping the column exact."""
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _run_phase(T: np.ndarray, basis: list[int], max_iter: int,
               bland_after: int, log: list[str] | None, tag: str) -> str:
    """Minimize the cost row of tableau T in place.

    The last row holds reduced costs (and minus the objective in its rhs
    cell), the last column the right-hand side.  Returns "optimal" or
    "unbounded"; raises MaxIterationsExceeded at the iteration cap.
    """
    n_rows = T.shape[0] - 1
    stall = 0
    bland = False
    for it in range(max_iter):
        cost = T[-1, :-1]
        if bland:
            negative = np.flatnonzero(cost < -COST_TOL)
            if negative.size == 0:
                return "optimal"
            j = int(negative[0])
        else:
            j = int(np.argmin(cost))
            if cost[j] >= -COST_TOL:
                return "optimal"
        col = T[:n_rows, j]
        admissible = col > PIVOT_TOL
        if not admissible.any():
            return "unbounded"
        ratios = np.full(n_rows, np.inf)
        ratios[admissible] = T[:n_rows, -1][admissible] / col[admissible]
        theta = ratios.min()
        ties = np.flatnonzero(ratios == theta)
        if bland:
            r = int(ties[np.argmin(np.asarray(basis)[ties])])
        else:
            r = int(ties[np.argmax(col[ties])])
        if theta <= DEGENERATE_STEP:
            stall += 1
            if stall >= bland_after:
                bland = True
        else:
            stall = 0
            bland = False
        if log is not None:
            log.append(f"{tag} it={it} enter={j} leave={basis[r]} theta={theta:.3e} "
                       f"obj={-T[-1, -1]:.12e}")
        _pivot(T, r, j)
        basis[r] = j
    raise MaxIterationsExceeded(
        f"{tag}: no convergence within {max_iter} pivots (cycling or ill-conditioning)"
    )


def _install_cost_row(T: np.ndarray, basis: list[int], costs: np.ndarray) -> None:
    """Write reduced costs for `costs` into the last row given the current basis."""
    T[-1, :] = 0.0
    T[-1, :costs.size] = costs
    for r, bv in enumerate(basis):
        cb = costs[bv] if bv < costs.size else 0.0
        if cb != 0.0:
            T[-1, :] -= cb * T[r, :]


def solve(problem: LpProblem, debug_path: str | None = None) -> LpOutcome:
    """Solve an LP, returning status plus a basic optimal point when one exists.

    Raises MaxIterationsExceeded when the pivot budget is exhausted or the
    final point fails its own feasibility check (conditioning failure), and
    DimensionMismatch for inconsistent inputs (via LpProblem validation).
    """
    n = problem.n_vars
    m = problem.ineq_matrix.shape[0]
    p = problem.eq_matrix.shape[0]
    max_iter = ITER_FACTOR * (n + m + p)
    bland_after = 2 * (m + p) + 2
    log: list[str] | None = [] if debug_path else None

    # Standard form columns: [u (n), v (n), s (m), artificials] with
    # x = u - v, except nonneg problems keep x directly and skip the v block.
    nv = n if problem.nonneg else 2 * n
    rows = m + p
    E = np.zeros((rows, nv + m))
    E[:m, :n] = problem.ineq_matrix
    E[m:, :n] = problem.eq_matrix
    if not problem.nonneg:
        E[:m, n:nv] = -problem.ineq_matrix
        E[m:, n:nv] = -problem.eq_matrix
    E[:m, nv:nv + m] = np.eye(m)
    rhs = np.concatenate([problem.ineq_rhs, problem.eq_rhs])

    negative = rhs < 0
    E[negative] *= -1.0
    rhs = np.abs(rhs)

    # Inequality rows with untouched sign keep their slack as the initial
    # basic variable; all other rows get an artificial.
    needs_art = np.ones(rows, dtype=bool)
    needs_art[:m] = negative[:m]
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size

    ncols = nv + m + n_art
    T = np.zeros((rows + 1, ncols + 1))
    T[:rows, :nv + m] = E
    T[:rows, -1] = rhs
    basis: list[int] = [0] * rows
    for k, r in enumerate(art_rows):
        T[r, nv + m + k] = 1.0
        basis[r] = nv + m + k
    for r in range(m):
        if not needs_art[r]:
            basis[r] = nv + r

    # Phase 1: minimize the sum of artificials.
    if n_art > 0:
        phase1_costs = np.zeros(ncols)
        phase1_costs[nv + m:] = 1.0
        _install_cost_row(T, basis, phase1_costs)
        status = _run_phase(T, basis, max_iter, bland_after, log, "phase1")
        if status == "unbounded":
            raise MaxIterationsExceeded("phase 1 reported unbounded: numerical failure")
        if -T[-1, -1] > FEAS_TOL:
            _write_log(debug_path, log, "infeasible")
            return LpOutcome(LpStatus.INFEASIBLE)
        # Drive remaining artificials out of the basis; rows that cannot be
        # pivoted are redundant and dropped.
        drop_rows: list[int] = []
        for r in range(rows):
            if basis[r] >= nv + m:
                entries = np.abs(T[r, :nv + m])
                j = int(np.argmax(entries))
                if entries[j] > PIVOT_TOL:
                    _pivot(T, r, j)
                    basis[r] = j
                else:
                    drop_rows.append(r)
        keep = [r for r in range(rows) if r not in drop_rows]
        T = np.hstack([T[:, :nv + m], T[:, -1:]])[keep + [rows], :]
        basis = [basis[r] for r in keep]

    # Phase 2 on the original objective.
    if problem.nonneg:
        phase2_costs = np.concatenate([problem.objective, np.zeros(m)])
    else:
        phase2_costs = np.concatenate([problem.objective, -problem.objective,
                                       np.zeros(m)])
    _install_cost_row(T, basis, phase2_costs)
    status = _run_phase(T, basis, max_iter, bland_after, log, "phase2")
    if status == "unbounded":
        _write_log(debug_path, log, "unbounded")
        return LpOutcome(LpStatus.UNBOUNDED)

    x_std = np.zeros(nv + m)
    for r, bv in enumerate(basis):
        x_std[bv] = T[r, -1]
    x = x_std[:n] if problem.nonneg else x_std[:n] - x_std[n:nv]

    ineq_resid = problem.ineq_matrix @ x - problem.ineq_rhs if m else np.zeros(0)
    eq_resid = problem.eq_matrix @ x - problem.eq_rhs if p else np.zeros(0)
    worst = max(ineq_resid.max(initial=0.0), np.abs(eq_resid).max(initial=0.0))
    if worst > FEAS_TOL:
        raise MaxIterationsExceeded(
            f"optimal basis fails feasibility check (residual {worst:.3e}): conditioning failure"
        )
    _write_log(debug_path, log, "optimal")
    return LpOutcome(LpStatus.OPTIMAL, x, float(problem.objective @ x))


def _write_log(debug_path: str | None, log: list[str] | None, verdict: str) -> None:
    if debug_path is None or log is None:
        return
    with open(debug_path, "a", encoding="utf-8") as fh:
        fh.write("\n".join(log))
        fh.write(f"\nverdict: {verdict}\n")
