"""Tree traversals over embedded polytopes: depth-first walks, a width-capped
breadth-first protocol, subtree exploration, and small-scale exhaustive oracles.

The search state is a vertex-representation polytope; one generation vanishes
one coordinate.  Depth-first follows a single root-to-leaf path, choosing the
next coordinate either at run time (largest sign-count product) or from a
precomputed magnitude order of the 1-norm relaxation solution.  Breadth-first
expands every child per generation, merges siblings that share a sparsity
pattern, and prunes the frontier to a width cap.

Randomness is split into labeled substreams (sampling, reduction, selection)
derived from one master seed so that toggling one phase never shifts the draws
of another.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, LpStatus, solve
from .polytope import (DUP_TOL, Polytope, SignCensus, count_signs, dedup_rows,
                       polytope_to_dict, polytope_from_dict, reduce_complexity,
                       select_coordinate, unveil_children, vanish_coordinate)
from .sets import HalfspaceSet, InfeasibleSet, ObjectiveUnbounded, sample_vertex, sample_targeted

PROTOCOLS = ("dfs_runtime", "dfs_fixed_order", "bfs")
EXPLORATION_MODES = ("off", "leaf_restart", "leaf_restart_plus_merge")
SOLUTION_RULES = ("uniform", "min_residual")

# Fixed labels for the per-phase random substreams.  Enabling or disabling
# one phase must not perturb the draws of the others.
_PHASE_CODES = {"sampling": 101, "reduction": 202, "selection": 303}

ROOT_ATTEMPT_FACTOR = 10
HULL_MEMBERSHIP_TOL = 1e-7
ORACLE_MAX_DIM = 12
ORACLE_MAX_VERTICES = 200


class SamplingStalled(RuntimeError):
    """Root sampling could not reach the requested vertex count."""


class PatternMismatch(ValueError):
    """Polytopes do not share a sparsity pattern."""


class SizeLimitExceeded(RuntimeError):
    """Problem is too large for the exhaustive oracle."""


@dataclass
class SearchConfig:
    """Knobs for one search run.

    protocol: dfs_runtime | dfs_fixed_order | bfs.
    M: number of root vertices to sample.
    cap_pos, cap_neg: per-sign vertex caps applied before each vanish.
    seed: master seed; all randomness derives from it.
    carry_zero_vertices: keep vertices already zero at the vanished coordinate.
    subtree_exploration: off | leaf_restart | leaf_restart_plus_merge.
    max_generations: stop after this many vanishes (defaults to the dimension).
    bfs_width_cap: frontier width limit, breadth-first only.
    fixed_order: explicit coordinate permutation for dfs_fixed_order; derived
        from the 1-norm relaxation when absent.
    solution_rule: uniform (random final vertex) or min_residual (most
        interior final vertex, deterministic).
    """

    protocol: str = "dfs_runtime"
    M: int = 100
    cap_pos: int = 500
    cap_neg: int = 500
    seed: int = 0
    carry_zero_vertices: bool = False
    subtree_exploration: str = "off"
    max_generations: int | None = None
    bfs_width_cap: int = 8
    fixed_order: tuple[int, ...] | None = None
    solution_rule: str = "uniform"

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.subtree_exploration not in EXPLORATION_MODES:
            raise ValueError(f"unknown exploration mode {self.subtree_exploration!r}")
        if self.solution_rule not in SOLUTION_RULES:
            raise ValueError(f"unknown solution rule {self.solution_rule!r}")
        if self.M < 2:
            raise ValueError("M must be at least 2")
        if self.cap_pos < 1 or self.cap_neg < 1:
            raise ValueError("reduction caps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.bfs_width_cap < 1:
            raise ValueError("bfs_width_cap must be at least 1")
        if self.max_generations is not None and self.max_generations < 0:
            raise ValueError("max_generations must be nonnegative")
        if self.fixed_order is not None:
            self.fixed_order = tuple(int(k) for k in self.fixed_order)


@dataclass
class GenerationRecord:
    """One vanish step: what was chosen and how the vertex count moved."""

    chosen_d: int
    census: SignCensus
    raw_count: int
    unique_count: int
    elapsed: float


@dataclass
class SearchTrace:
    """Result of one root-to-leaf search."""

    walk: list[int]
    per_generation: list[GenerationRecord]
    final_polytope: Polytope | None
    chosen_solution: np.ndarray
    restarts: int

    @property
    def walk_length(self) -> int:
        return len(self.walk)


def phase_rng(seed: int, phase: str) -> np.random.Generator:
    """Independent generator for one named phase of a seeded run."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), _PHASE_CODES[phase]]))


def init_root(hs: HalfspaceSet, M: int, rng: np.random.Generator) -> Polytope:
    """Sample M distinct vertices of the set with random linear objectives.

    Each attempt draws a uniform[-1, 1]^n objective and keeps the minimizer
    if it is new (beyond DUP_TOL of every kept vertex).  Raises
    SamplingStalled when 10*M attempts cannot produce M distinct vertices,
    which signals a set with too few extreme points for the requested M.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    kept: list[np.ndarray] = []
    stack: np.ndarray | None = None
    for _ in range(ROOT_ATTEMPT_FACTOR * M):
        c = rng.uniform(-1.0, 1.0, size=hs.dim)
        try:
            v = sample_vertex(hs, c)
        except ObjectiveUnbounded:
            continue
        if stack is None or not (np.abs(stack - v).max(axis=1) <= DUP_TOL).any():
            kept.append(v)
            stack = np.asarray(kept)
            if len(kept) == M:
                return Polytope(stack)
    raise SamplingStalled(
        f"only {len(kept)} distinct vertices found in {ROOT_ATTEMPT_FACTOR * M} attempts")


def _chosen_solution(P: Polytope, hs: HalfspaceSet, rule: str,
                     rng: np.random.Generator) -> np.ndarray:
    if rule == "uniform":
        idx = int(rng.integers(len(P)))
    else:
        worst = (P.vertices @ hs.rows.T - hs.rhs).max(axis=1)
        idx = int(np.argmin(worst))
    return P.vertices[idx].copy()


def _attempt_leaf_restart(hs: HalfspaceSet, P: Polytope) -> Polytope | None:
    """Try to dig out a vertex supplying a sign missing at some coordinate.

    Scans unvanished coordinates in ascending order and returns the augmented
    polytope on the first genuinely new vertex; None when the whole scan comes
    up empty.  Only vertices beyond DUP_TOL of the current set count, which
    keeps repeated scans from looping on the same deterministic LP answer.
    """
    for d in range(P.dim):
        if d in P.vanished:
            continue
        census = count_signs(P, d)
        needed = []
        if census.pos_count == 0:
            needed.append(1)
        if census.neg_count == 0:
            needed.append(-1)
        for sign in needed:
            v = sample_targeted(hs, d, sign, P.vanished)
            if v is None:
                continue
            if (np.abs(P.vertices - v).max(axis=1) <= DUP_TOL).any():
                continue
            return Polytope(np.vstack([P.vertices, v[None, :]]), P.vanished)
    return None


def _vanish_step(P: Polytope, d: int, config: SearchConfig,
                 reduction_rng: np.random.Generator) -> tuple[Polytope, GenerationRecord]:
    """Reduce, vanish, and record one generation."""
    t0 = time.perf_counter()
    census = count_signs(P, d)
    reduced = reduce_complexity(P, d, config.cap_pos, config.cap_neg,
                                reduction_rng, carry_zeros=config.carry_zero_vertices)
    after = count_signs(reduced, d)
    raw_count = after.pos_count * after.neg_count
    child = vanish_coordinate(reduced, d, carry_zero_vertices=config.carry_zero_vertices)
    record = GenerationRecord(
        chosen_d=d,
        census=census,
        raw_count=raw_count,
        unique_count=len(child),
        elapsed=time.perf_counter() - t0,
    )
    return child, record


def run_depth_first(hs: HalfspaceSet, config: SearchConfig,
                    initial_polytope: Polytope | None = None,
                    checkpoint_callback=None) -> SearchTrace:
    """Single-path search: vanish one coordinate per generation until a leaf.

    The loop alternates unveil / select / reduce / vanish.  With
    dfs_fixed_order the next coordinate is the first entry of the fixed
    order that is currently a child; entries that are not are skipped for
    the rest of the pass (a successful leaf restart rewinds the pass).
    With subtree exploration enabled, hitting a leaf triggers targeted
    resampling for missing signs; each success augments the polytope and the
    walk resumes.

    checkpoint_callback(generation, polytope), when given, observes the root
    and every subsequent polytope; it must not mutate its argument.
    """
    if config.protocol not in ("dfs_runtime", "dfs_fixed_order"):
        raise ValueError(f"run_depth_first cannot run protocol {config.protocol!r}")
    sampling_rng = phase_rng(config.seed, "sampling")
    reduction_rng = phase_rng(config.seed, "reduction")
    selection_rng = phase_rng(config.seed, "selection")

    if initial_polytope is None:
        P = init_root(hs, config.M, sampling_rng)
    else:
        P = initial_polytope
        if P.dim != hs.dim:
            raise ValueError("initial polytope dimension does not match the set")
    max_gen = hs.dim if config.max_generations is None else min(config.max_generations, hs.dim)

    order: tuple[int, ...] | None = None
    cursor = 0
    if config.protocol == "dfs_fixed_order":
        order = config.fixed_order
        if order is None:
            order = fixed_order_from_l1(hs)
        if sorted(order) != list(range(hs.dim)):
            raise ValueError("fixed_order must be a permutation of the coordinates")

    walk: list[int] = list(P.vanished)
    records: list[GenerationRecord] = []
    restarts = 0
    if checkpoint_callback is not None:
        checkpoint_callback(P.generation, P)

    while P.generation < max_gen:
        I = unveil_children(P)
        if not I:
            if config.subtree_exploration in ("leaf_restart", "leaf_restart_plus_merge"):
                augmented = _attempt_leaf_restart(hs, P)
                if augmented is not None:
                    P = augmented
                    restarts += 1
                    cursor = 0
                    continue
            break
        if order is not None:
            d = -1
            while cursor < len(order):
                candidate = order[cursor]
                cursor += 1
                if candidate in I:
                    d = candidate
                    break
            if d < 0:
                break
        else:
            d = select_coordinate(P, I)
        P, record = _vanish_step(P, d, config, reduction_rng)
        walk.append(d)
        records.append(record)
        if checkpoint_callback is not None:
            checkpoint_callback(P.generation, P)

    solution = _chosen_solution(P, hs, config.solution_rule, selection_rng)
    return SearchTrace(walk, records, P, solution, restarts)


@dataclass
class _BfsNode:
    polytope: Polytope
    walk: list[int]
    records: list[GenerationRecord]
    discovery: int


def run_breadth_first(hs: HalfspaceSet, config: SearchConfig,
                      generation_stats: list[dict] | None = None) -> list[SearchTrace]:
    """Expand every child of every frontier node, generation by generation.

    Same-pattern siblings are merged (their vertex sets pooled) before the
    frontier is pruned to bfs_width_cap nodes, keeping the vertex-richest
    nodes and breaking ties by discovery order.  Returns one trace per leaf,
    in the order leaves were identified.

    generation_stats, when given, receives one dict per generation with the
    frontier width, the child count before and after merging, and the width
    bound frontier * (N - g + 1).
    """
    if config.protocol != "bfs":
        raise ValueError(f"run_breadth_first cannot run protocol {config.protocol!r}")
    sampling_rng = phase_rng(config.seed, "sampling")
    reduction_rng = phase_rng(config.seed, "reduction")
    selection_rng = phase_rng(config.seed, "selection")

    root = init_root(hs, config.M, sampling_rng)
    max_gen = hs.dim if config.max_generations is None else min(config.max_generations, hs.dim)

    frontier = [_BfsNode(root, [], [], 0)]
    leaves: list[_BfsNode] = []
    discovery = 1
    generation = 1
    while frontier and generation <= max_gen:
        expandable: list[tuple[_BfsNode, list[int]]] = []
        for node in frontier:
            I = unveil_children(node.polytope)
            if I:
                expandable.append((node, I))
            else:
                leaves.append(node)
        if not expandable:
            frontier = []
            break

        children: list[_BfsNode] = []
        for node, I in expandable:
            for d in sorted(I):
                child, record = _vanish_step(node.polytope, d, config, reduction_rng)
                children.append(_BfsNode(child, node.walk + [d],
                                         node.records + [record], discovery))
                discovery += 1
        before_merge = len(children)

        merged: dict[tuple[int, ...], _BfsNode] = {}
        for child in children:
            key = child.polytope.vanished
            if key in merged:
                keeper = merged[key]
                keeper.polytope = merge_siblings(keeper.polytope, child.polytope)
            else:
                merged[key] = child
        pool = sorted(merged.values(), key=lambda n: n.discovery)

        survivors = sorted(pool, key=lambda n: (-len(n.polytope), n.discovery))
        survivors = sorted(survivors[:config.bfs_width_cap], key=lambda n: n.discovery)

        if generation_stats is not None:
            generation_stats.append({
                "generation": generation,
                "frontier_width": len(frontier),
                "children_before_merge": before_merge,
                "children_after_merge": len(pool),
                "width_bound": len(frontier) * (hs.dim - generation + 1),
                "kept": len(survivors),
            })
        frontier = survivors
        generation += 1

    leaves.extend(frontier)

    traces = []
    for leaf in leaves:
        solution = _chosen_solution(leaf.polytope, hs, config.solution_rule, selection_rng)
        traces.append(SearchTrace(leaf.walk, leaf.records, leaf.polytope, solution, 0))
    return traces


def merge_siblings(a: Polytope, b: Polytope) -> Polytope:
    """Pool the vertex sets of two polytopes with identical sparsity patterns.

    The union is deduplicated with first occurrences kept, so merging a
    polytope with itself returns an equal polytope.  Searching the merged
    node covers the convex hull of both inputs, which can unveil children
    neither input has alone.
    """
    if a.vanished != b.vanished:
        raise PatternMismatch(
            f"sparsity patterns differ: {a.vanished} vs {b.vanished}")
    union, _ = dedup_rows(np.vstack([a.vertices, b.vertices]), DUP_TOL)
    return Polytope(union, a.vanished)


def l1_relaxation_solution(hs: HalfspaceSet) -> np.ndarray:
    """Minimize the 1-norm over the set via the standard (x, t) epigraph LP."""
    n = hs.dim
    m = hs.n_rows
    eye = np.eye(n)
    A = np.block([
        [hs.rows, np.zeros((m, n))],
        [eye, -eye],
        [-eye, -eye],
    ])
    b = np.concatenate([hs.rhs, np.zeros(2 * n)])
    c = np.concatenate([np.zeros(n), np.ones(n)])
    outcome = solve(LpProblem(c, A, b))
    if outcome.status is LpStatus.INFEASIBLE:
        raise InfeasibleSet(f"halfspace set {hs.label or '<unlabeled>'} is empty")
    if outcome.status is not LpStatus.OPTIMAL:
        raise RuntimeError("1-norm relaxation did not reach an optimum")
    return outcome.solution[:n]


def fixed_order_from_l1(hs: HalfspaceSet) -> tuple[int, ...]:
    """Coordinate order by ascending magnitude of the 1-norm relaxation
    solution, ties broken toward the lower index."""
    x = l1_relaxation_solution(hs)
    return tuple(int(k) for k in np.argsort(np.abs(x), kind="stable"))


def in_convex_hull(point: np.ndarray, vertices: np.ndarray,
                   tol: float = HULL_MEMBERSHIP_TOL) -> bool:
    """LP membership test: does a convex combination of the rows of
    `vertices` match `point` within tol per coordinate?

    Posed over nonnegative weights directly; the tableau then stays at
    2 * dim + 1 rows however many vertices there are.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    p = np.asarray(point, dtype=float).ravel()
    m, n = V.shape
    if p.shape[0] != n:
        raise ValueError("point dimension does not match vertices")
    A = np.vstack([V.T, -V.T])
    b = np.concatenate([p + tol, tol - p])
    eq = np.ones((1, m))
    eq_rhs = np.ones(1)
    outcome = solve(LpProblem(np.zeros(m), A, b, eq, eq_rhs, nonneg=True))
    return outcome.status is LpStatus.OPTIMAL


def _pattern_feasible_in_set(hs: HalfspaceSet, pattern: tuple[int, ...]) -> bool:
    n = hs.dim
    if pattern:
        eq = np.zeros((len(pattern), n))
        for i, k in enumerate(pattern):
            eq[i, k] = 1.0
        eq_rhs = np.zeros(len(pattern))
    else:
        eq, eq_rhs = None, None
    outcome = solve(LpProblem(np.zeros(n), hs.rows, hs.rhs, eq, eq_rhs))
    return outcome.status is LpStatus.OPTIMAL


def _pattern_feasible_in_hull(V: np.ndarray, pattern: tuple[int, ...]) -> bool:
    m = V.shape[0]
    rows = [np.ones((1, m))]
    rhs = [np.ones(1)]
    if pattern:
        rows.append(V[:, list(pattern)].T)
        rhs.append(np.zeros(len(pattern)))
    eq = np.vstack(rows)
    eq_rhs = np.concatenate(rhs)
    outcome = solve(LpProblem(np.zeros(m), np.zeros((0, m)), np.zeros(0),
                              eq, eq_rhs, nonneg=True))
    return outcome.status is LpStatus.OPTIMAL


def brute_force_oracle(hs: HalfspaceSet, mode: str = "over_S",
                       polytope: Polytope | None = None) -> tuple[int, tuple[int, ...]]:
    """Exhaustive maximum vanish count, for small problems only.

    over_S: largest number of coordinates that can be zero simultaneously for
    some point of the set, found by LP feasibility over support patterns in
    decreasing zero-count order.  over_hull: the same question restricted to
    the convex hull of the given polytope's vertices, where feasibility means
    nonnegative weights summing to one whose combination is zero on the
    pattern.  Returns (count, witness pattern).
    """
    if mode not in ("over_S", "over_hull"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    n = hs.dim
    if n > ORACLE_MAX_DIM:
        raise SizeLimitExceeded(f"dimension {n} exceeds oracle limit {ORACLE_MAX_DIM}")
    if mode == "over_hull":
        if polytope is None:
            raise ValueError("over_hull mode needs a polytope")
        if len(polytope) > ORACLE_MAX_VERTICES:
            raise SizeLimitExceeded(
                f"{len(polytope)} vertices exceed oracle limit {ORACLE_MAX_VERTICES}")
        V = polytope.vertices

    for zeros in range(n, -1, -1):
        for pattern in itertools.combinations(range(n), zeros):
            if mode == "over_S":
                ok = _pattern_feasible_in_set(hs, pattern)
            else:
                ok = _pattern_feasible_in_hull(V, pattern)
            if ok:
                return zeros, pattern
    raise InfeasibleSet("no support pattern is feasible; the set is empty")


def census_to_dict(census: SignCensus) -> dict:
    return {
        "coordinate": census.coordinate,
        "pos_count": census.pos_count,
        "neg_count": census.neg_count,
        "zero_count": census.zero_count,
    }


def trace_to_dict(trace: SearchTrace, elide_above: int | None = 10000,
                  include_timings: bool = False) -> dict:
    """JSON-ready form of a trace.

    Vertices of the final polytope are elided above `elide_above`.  Per-step
    wall times are left out unless include_timings is set, so that replays of
    the same seeded run serialize to identical bytes.
    """
    per_generation = []
    for rec in trace.per_generation:
        entry = {
            "chosen_d": rec.chosen_d,
            "census": census_to_dict(rec.census),
            "raw_count": rec.raw_count,
            "unique_count": rec.unique_count,
        }
        if include_timings:
            entry["elapsed"] = rec.elapsed
        per_generation.append(entry)
    if trace.final_polytope is None:
        raise ValueError("trace has no final polytope to serialize")
    return {
        "walk": list(trace.walk),
        "per_generation": per_generation,
        "final_polytope": polytope_to_dict(trace.final_polytope, elide_above),
        "chosen_solution": trace.chosen_solution.tolist(),
        "restarts": trace.restarts,
    }


def trace_from_dict(data: dict) -> SearchTrace:
    """Rebuild a trace from its JSON form.

    A trace whose final polytope was elided comes back with
    final_polytope = None; everything else round-trips.
    """
    records = []
    for entry in data.get("per_generation", ()):
        c = entry["census"]
        records.append(GenerationRecord(
            chosen_d=int(entry["chosen_d"]),
            census=SignCensus(int(c["coordinate"]), int(c["pos_count"]),
                              int(c["neg_count"]), int(c["zero_count"])),
            raw_count=int(entry["raw_count"]),
            unique_count=int(entry["unique_count"]),
            elapsed=float(entry.get("elapsed", 0.0)),
        ))
    fp_data = data["final_polytope"]
    final = None if fp_data.get("vertices_elided") else polytope_from_dict(fp_data)
    return SearchTrace(
        walk=[int(k) for k in data["walk"]],
        per_generation=records,
        final_polytope=final,
        chosen_solution=np.asarray(data["chosen_solution"], dtype=float),
        restarts=int(data.get("restarts", 0)),
    )
