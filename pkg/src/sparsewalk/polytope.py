"""Vertex-representation polytopes and the per-node kernel operations.

A polytope here is a finite vertex list together with the set of coordinates
already forced to zero ("vanished").  The four kernel operations are

  * count_signs      -- strict sign census of one coordinate,
  * unveil_children  -- coordinates that can be vanished next,
  * vanish_coordinate -- pairwise convex combinations that zero a coordinate,
  * reduce_complexity -- randomized thinning ahead of a vanish,

plus select_coordinate, the run-time ordering rule that maximizes the number
of combination pairs.  All operations are pure functions of their arguments
(and an explicit random generator where noted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZERO_TOL = 1e-9  # |x_k| <= ZERO_TOL counts as zero in censuses and support counts
DUP_TOL = 1e-9   # L-infinity radius for duplicate vertex removal

# Near-duplicates produced by different arithmetic paths agree far below
# DUP_TOL; keys rounded at this scale let the cheap exact-key pass absorb
# them before the general tolerance sweep runs.
_KEY_DECIMALS = 12


class VanishedCoordinate(ValueError):
    """Coordinate is already vanished in this polytope."""


class NotAChild(ValueError):
    """Coordinate does not satisfy the two-sign condition."""


class EmptyChildSet(ValueError):
    """No candidate coordinates were supplied."""


@dataclass(eq=False)
class Polytope:
    """Finite vertex list with a record of coordinates stamped to zero.

    Every vertex is exactly 0.0 on every vanished coordinate, so each vertex
    has at most N - generation nonzero entries.  Vertices are kept pairwise
    distinct under DUP_TOL by the operations that construct polytopes.
    """

    vertices: np.ndarray
    vanished: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        self.vanished = tuple(sorted(set(int(k) for k in self.vanished)))
        if self.vertices.ndim != 2 or self.vertices.shape[0] == 0:
            raise ValueError("a polytope needs at least one vertex")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("vertices must be finite")
        n = self.vertices.shape[1]
        if self.vanished and (self.vanished[0] < 0 or self.vanished[-1] >= n):
            raise ValueError("vanished coordinate index out of range")
        if self.vanished:
            stamped = self.vertices[:, list(self.vanished)]
            if stamped.size and np.any(stamped != 0.0):
                raise ValueError("vanished coordinates must be exactly zero")

    @property
    def generation(self) -> int:
        return len(self.vanished)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self) -> int:
        return self.vertices.shape[0]


@dataclass
class SignCensus:
    """Counts of strictly positive / negative / near-zero values at one coordinate."""

    coordinate: int
    pos_count: int
    neg_count: int
    zero_count: int

    @property
    def total(self) -> int:
        return self.pos_count + self.neg_count + self.zero_count


def count_signs(P: Polytope, d: int) -> SignCensus:
    """Census of coordinate d over P's vertices; d must not be vanished."""
    if d in P.vanished:
        raise VanishedCoordinate(f"coordinate {d} is already vanished")
    col = P.vertices[:, d]
    pos = int(np.count_nonzero(col > ZERO_TOL))
    neg = int(np.count_nonzero(col < -ZERO_TOL))
    return SignCensus(d, pos, neg, len(P) - pos - neg)


def _census_matrix(P: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """(pos, neg) strict-sign counts for every coordinate at once."""
    V = P.vertices
    pos = (V > ZERO_TOL).sum(axis=0)
    neg = (V < -ZERO_TOL).sum(axis=0)
    return pos, neg


def unveil_children(P: Polytope) -> list[int]:
    """Coordinates with at least one strictly positive and one strictly
    negative vertex value, i.e. the candidate children.  Empty means leaf."""
    pos, neg = _census_matrix(P)
    candidates = np.flatnonzero((pos >= 1) & (neg >= 1))
    return [int(d) for d in candidates if d not in P.vanished]


def select_coordinate(P: Polytope, I: list[int]) -> int:
    """Pick the candidate maximizing pos_count * neg_count, ties to the
    lowest coordinate index."""
    if len(I) == 0:
        raise EmptyChildSet("no candidate coordinates to select from")
    pos, neg = _census_matrix(P)
    best_d = -1
    best = -1
    for d in sorted(I):
        product = int(pos[d]) * int(neg[d])
        if product > best:
            best = product
            best_d = d
    return best_d


def dedup_rows(V: np.ndarray, tol: float = DUP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Remove rows lying within `tol` (L-infinity) of an earlier kept row.

    Greedy first-occurrence semantics: rows are scanned in their given order
    and a row survives iff no previously kept row is within tol.  Returns the
    surviving rows (original order preserved) and their indices.

    Candidate pruning uses row sums: two rows within tol have sums within
    n*tol, so only sum-neighbors need the full comparison.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n_rows, n_cols = V.shape
    if n_rows <= 1:
        return V.copy(), np.arange(n_rows)

    # Cheap exact pass on rounded keys absorbs arithmetic-noise duplicates.
    keys = np.round(V, _KEY_DECIMALS)
    _, first_idx = np.unique(keys, axis=0, return_index=True)
    first_idx.sort()
    V1 = V[first_idx]

    sums = V1.sum(axis=1)
    window = n_cols * tol
    order = np.argsort(sums, kind="stable")
    sorted_sums = sums[order]
    # Split into clusters whose sums could collide; singletons survive as-is.
    breaks = np.flatnonzero(np.diff(sorted_sums) > window)
    keep = np.ones(V1.shape[0], dtype=bool)
    start = 0
    for stop in [*(breaks + 1), order.size]:
        cluster = order[start:stop]
        start = stop
        if cluster.size <= 1:
            continue
        cluster = np.sort(cluster)  # first-occurrence order within the cluster
        kept_rows: list[int] = [int(cluster[0])]
        kept_view = V1[kept_rows[0]][None, :]
        for i in cluster[1:]:
            dists = np.abs(kept_view - V1[i]).max(axis=1)
            if (dists <= tol).any():
                keep[i] = False
            else:
                kept_rows.append(int(i))
                kept_view = V1[kept_rows]
    survivors = first_idx[keep]
    return V[survivors].copy(), survivors


def raw_vanish_combinations(P: Polytope, d: int) -> np.ndarray:
    """All pairwise combinations zeroing coordinate d, before deduplication.

    For every vertex pair (x_pos, x_neg) with x_pos[d] > ZERO_TOL and
    x_neg[d] < -ZERO_TOL, emits

        alpha * x_pos + (1 - alpha) * x_neg,
        alpha = -x_neg[d] / (x_pos[d] - x_neg[d])  in (0, 1),

    in (positive index, negative index) lexicographic order.  The output has
    exactly pos_count * neg_count rows; coordinate d and all previously
    vanished coordinates are stamped to exact zero.
    """
    census = count_signs(P, d)
    if census.pos_count == 0 or census.neg_count == 0:
        raise NotAChild(f"coordinate {d} lacks a strict sign on one side")
    col = P.vertices[:, d]
    P_pos = P.vertices[col > ZERO_TOL]
    P_neg = P.vertices[col < -ZERO_TOL]
    dpos = P_pos[:, d][:, None]             # (a, 1)
    dneg = P_neg[:, d][None, :]             # (1, b)
    denom = dpos - dneg                     # > 0 elementwise
    # alpha * dpos + (1 - alpha) * dneg = 0  =>  alpha = -dneg / (dpos - dneg)
    alpha = -dneg / denom                   # weight on the positive vertex
    beta = dpos / denom                     # weight on the negative vertex
    out = alpha[:, :, None] * P_pos[:, None, :] + beta[:, :, None] * P_neg[None, :, :]
    out = out.reshape(-1, P.dim)
    stamp = list(P.vanished) + [d]
    out[:, stamp] = 0.0
    return out


def vanish_coordinate(P: Polytope, d: int,
                      carry_zero_vertices: bool = False) -> Polytope:
    """Produce the child polytope with coordinate d forced to zero.

    The child's vertices are the deduplicated pairwise combinations from
    raw_vanish_combinations.  With carry_zero_vertices, vertices of P already
    zero at d (within ZERO_TOL) are appended as well, stamped exactly; by
    default they are dropped.
    """
    raw = raw_vanish_combinations(P, d)
    if carry_zero_vertices:
        col = P.vertices[:, d]
        zeros = P.vertices[np.abs(col) <= ZERO_TOL]
        if zeros.shape[0]:
            zeros = zeros.copy()
            zeros[:, list(P.vanished) + [d]] = 0.0
            raw = np.vstack([raw, zeros])
    unique, _ = dedup_rows(raw, DUP_TOL)
    return Polytope(unique, P.vanished + (d,))


def reduce_complexity(P: Polytope, d: int, cap_pos: int, cap_neg: int,
                      rng: np.random.Generator,
                      carry_zeros: bool = False) -> Polytope:
    """Thin P ahead of vanishing coordinate d.

    Keeps at most cap_pos vertices with x_d > ZERO_TOL and at most cap_neg
    with x_d < -ZERO_TOL, drawn uniformly without replacement; survivors stay
    in their original order.  Caps at or above the census are no-ops and
    consume no randomness.  Vertices with x_d near zero are dropped unless
    carry_zeros is set.
    """
    if cap_pos < 1 or cap_neg < 1:
        raise ValueError("caps must be at least 1")
    col = P.vertices[:, d]
    pos_idx = np.flatnonzero(col > ZERO_TOL)
    neg_idx = np.flatnonzero(col < -ZERO_TOL)
    if pos_idx.size > cap_pos:
        pos_idx = np.sort(rng.choice(pos_idx, size=cap_pos, replace=False))
    if neg_idx.size > cap_neg:
        neg_idx = np.sort(rng.choice(neg_idx, size=cap_neg, replace=False))
    parts = [pos_idx, neg_idx]
    if carry_zeros:
        parts.append(np.flatnonzero(np.abs(col) <= ZERO_TOL))
    keep = np.sort(np.concatenate(parts))
    if keep.size == 0:
        raise NotAChild(f"nothing survives reduction at coordinate {d}")
    return Polytope(P.vertices[keep], P.vanished)


def polytope_to_dict(P: Polytope, elide_above: int | None = None) -> dict:
    """JSON-ready dict: {"vanished": [...], "generation": g, "vertices": [[...], ...]}.

    With elide_above set and exceeded, vertices are replaced by
    "vertices_elided": true plus a "vertex_count".
    """
    base: dict = {"vanished": list(P.vanished), "generation": P.generation}
    if elide_above is not None and len(P) > elide_above:
        base["vertices_elided"] = True
        base["vertex_count"] = len(P)
    else:
        base["vertices"] = P.vertices.tolist()
    return base


def polytope_from_dict(data: dict) -> Polytope:
    if data.get("vertices_elided"):
        raise ValueError("cannot reconstruct a polytope whose vertices were elided")
    P = Polytope(np.asarray(data["vertices"], dtype=float),
                 tuple(data.get("vanished", ())))
    gen = data.get("generation")
    if gen is not None and int(gen) != P.generation:
        raise ValueError(f"generation field {gen} disagrees with vanished set size "
                         f"{P.generation}")
    return P
