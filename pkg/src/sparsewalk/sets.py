"""Halfspace-intersection feasible sets and LP-backed vertex sampling.

A feasible set is S = {x in R^n : A x <= b} with no sign restriction on x.
Sampling a vertex means minimizing a linear objective over S; random
objectives give the spread of extreme points used to populate a root
polytope, while targeted objectives dig out vertices with a prescribed
sign at one coordinate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lp import FEAS_TOL, LpProblem, LpStatus, solve
from .polytope import ZERO_TOL

MAX_UNBOUNDED_RETRIES = 100


class InfeasibleSet(RuntimeError):
    """The halfspace intersection is empty."""


class ObjectiveUnbounded(RuntimeError):
    """The objective decreases without bound over the set."""


@dataclass
class HalfspaceSet:
    """The set {x : rows @ x <= rhs} in R^dim."""

    dim: int
    rows: np.ndarray
    rhs: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        self.dim = int(self.dim)
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.rows.shape != (self.rhs.shape[0], self.dim):
            raise ValueError(
                f"rows shape {self.rows.shape} does not match "
                f"{self.rhs.shape[0]} rhs entries in dimension {self.dim}")
        if not (np.all(np.isfinite(self.rows)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("rows and rhs must be finite")
        if self.rows.shape[0] and np.any(np.all(self.rows == 0.0, axis=1)):
            raise ValueError("every row needs at least one nonzero coefficient")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def contains(self, point: np.ndarray, tol: float = FEAS_TOL) -> bool:
        point = np.asarray(point, dtype=float).ravel()
        if point.shape[0] != self.dim:
            raise ValueError(f"point has dimension {point.shape[0]}, set has {self.dim}")
        return bool(np.all(self.rows @ point <= self.rhs + tol))

    def residuals(self, point: np.ndarray) -> np.ndarray:
        """Slack b - A x per row; negative entries are violations."""
        point = np.asarray(point, dtype=float).ravel()
        return self.rhs - self.rows @ point


def sample_vertex(hs: HalfspaceSet, objective: np.ndarray) -> np.ndarray:
    """Minimize objective over the set and return the optimal point.

    Raises InfeasibleSet when the set is empty and ObjectiveUnbounded when
    the objective has no finite minimum.
    """
    objective = np.asarray(objective, dtype=float).ravel()
    outcome = solve(LpProblem(objective, hs.rows, hs.rhs))
    if outcome.status is LpStatus.INFEASIBLE:
        raise InfeasibleSet(f"halfspace set {hs.label or '<unlabeled>'} is empty")
    if outcome.status is LpStatus.UNBOUNDED:
        raise ObjectiveUnbounded("objective is unbounded below over the set")
    return outcome.solution


def sample_random_vertex(hs: HalfspaceSet, rng: np.random.Generator) -> np.ndarray:
    """Vertex minimizing a uniform[-1, 1]^n objective drawn from rng.

    Unbounded directions are redrawn, up to MAX_UNBOUNDED_RETRIES times; a
    set unbounded in every sampled direction raises ObjectiveUnbounded.
    """
    for _ in range(MAX_UNBOUNDED_RETRIES):
        c = rng.uniform(-1.0, 1.0, size=hs.dim)
        try:
            return sample_vertex(hs, c)
        except ObjectiveUnbounded:
            continue
    raise ObjectiveUnbounded(
        f"no bounded objective found in {MAX_UNBOUNDED_RETRIES} draws")


def sample_targeted(hs: HalfspaceSet, target: int, sign: int,
                    vanished: tuple[int, ...] = ()) -> np.ndarray | None:
    """Vertex of the restricted set with a strict sign at one coordinate.

    Restricts the set by x_k = 0 for each vanished coordinate, then pushes
    coordinate `target` as far as possible in direction `sign` (+1 or -1).
    When that direction is unbounded the push is capped by the extra row
    sign * x_target <= 1 and re-solved.  Returns the optimal vertex with
    vanished coordinates stamped to exact zero, or None when no vertex of
    the restricted set has the requested strict sign (censused against
    ZERO_TOL), including when the restricted set is empty.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    if target in vanished:
        raise ValueError(f"target coordinate {target} is vanished")
    n = hs.dim
    c = np.zeros(n)
    c[target] = -float(sign)  # minimize -sign*x  ==  maximize sign*x
    eq = None
    eq_rhs = None
    if vanished:
        eq = np.zeros((len(vanished), n))
        for i, k in enumerate(vanished):
            eq[i, k] = 1.0
        eq_rhs = np.zeros(len(vanished))
    outcome = solve(LpProblem(c, hs.rows, hs.rhs, eq, eq_rhs))
    if outcome.status is LpStatus.UNBOUNDED:
        cap = np.zeros(n)
        cap[target] = float(sign)
        outcome = solve(LpProblem(
            c, np.vstack([hs.rows, cap]), np.append(hs.rhs, 1.0), eq, eq_rhs))
    if outcome.status is not LpStatus.OPTIMAL:
        return None
    x = outcome.solution.copy()
    x[list(vanished)] = 0.0
    if sign * x[target] <= ZERO_TOL:
        return None
    return x


def halfspace_set_to_dict(hs: HalfspaceSet) -> dict:
    return {
        "dim": hs.dim,
        "rows": hs.rows.tolist(),
        "rhs": hs.rhs.tolist(),
        "label": hs.label,
    }


def halfspace_set_from_dict(data: dict) -> HalfspaceSet:
    return HalfspaceSet(
        dim=int(data["dim"]),
        rows=np.asarray(data["rows"], dtype=float),
        rhs=np.asarray(data["rhs"], dtype=float),
        label=str(data.get("label", "")),
    )


def save_halfspace_set(hs: HalfspaceSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(halfspace_set_to_dict(hs), indent=2) + "\n")


def load_halfspace_set(path: str | Path) -> HalfspaceSet:
    return halfspace_set_from_dict(json.loads(Path(path).read_text()))
