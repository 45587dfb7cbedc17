"""Shared geometry builders for the test suite."""

import itertools

import numpy as np
import pytest

from sparsewalk import HalfspaceSet, LpProblem, LpStatus, solve


def unit_box(n: int, radius: float = 1.0) -> HalfspaceSet:
    """The box {|x_i| <= radius} as 2n half-space rows."""
    eye = np.eye(n)
    rows = np.vstack([eye, -eye])
    rhs = np.full(2 * n, float(radius))
    return HalfspaceSet(n, rows, rhs, label=f"box radius {radius} in R^{n}")


def triangle_set() -> HalfspaceSet:
    """Triangle with corners (1,1), (-1,1), (0,-1)."""
    return HalfspaceSet(2, [[0.0, 1.0], [2.0, -1.0], [-2.0, -1.0]],
                        [1.0, 1.0, 1.0], label="triangle")


def bounded_random_set(n: int, m: int, seed: int) -> HalfspaceSet:
    """Random half-space set {a_i x <= 1} guaranteed bounded.

    Rows are unit-norm gaussian directions; the origin is always interior.
    Draws are repeated (deterministically) until every coordinate direction
    has a finite maximum, which makes the whole set bounded.
    """
    rng = np.random.default_rng(seed)
    for _ in range(64):
        rows = rng.standard_normal((m, n))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        hs = HalfspaceSet(n, rows, np.ones(m), label=f"random n={n} m={m} seed={seed}")
        if _is_bounded(hs):
            return hs
    raise AssertionError(f"could not build a bounded random set for seed {seed}")


def _is_bounded(hs: HalfspaceSet) -> bool:
    for j in range(hs.dim):
        for direction in (1.0, -1.0):
            c = np.zeros(hs.dim)
            c[j] = direction
            if solve(LpProblem(c, hs.rows, hs.rhs)).status is LpStatus.UNBOUNDED:
                return False
    return True


def enumerate_lp_vertices(A, b, E=None, e=None, feas_tol=1e-9):
    """All basic feasible solutions of {Ax <= b, Ex = e}, by enumeration.

    Every subset of constraint rows of total size n (equalities always
    included) whose system is solvable yields a candidate; feasible
    candidates are collected with exact-duplicate removal.  Exponential:
    test-scale problems only.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    n = A.shape[1]
    if E is None:
        E = np.zeros((0, n))
        e = np.zeros(0)
    E = np.atleast_2d(np.asarray(E, dtype=float))
    e = np.asarray(e, dtype=float).ravel()
    p = E.shape[0]
    if p > n:
        raise ValueError("more equalities than dimensions")
    vertices = []
    for combo in itertools.combinations(range(A.shape[0]), n - p):
        M = np.vstack([E, A[list(combo)]])
        rhs = np.concatenate([e, b[list(combo)]])
        if np.linalg.matrix_rank(M) < n:
            continue
        x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.max(np.abs(M @ x - rhs)) > feas_tol:
            continue
        if np.all(A @ x <= b + feas_tol) and (p == 0 or np.max(np.abs(E @ x - e)) <= feas_tol):
            if not any(np.max(np.abs(x - v)) <= 1e-9 for v in vertices):
                vertices.append(x)
    return vertices


def oracle_lp_minimum(c, A, b, E=None, e=None):
    """Minimum of c.x over the vertex list from enumerate_lp_vertices;
    None when no feasible vertex exists.  Assumes a bounded feasible set."""
    c = np.asarray(c, dtype=float).ravel()
    vertices = enumerate_lp_vertices(A, b, E, e)
    if not vertices:
        return None
    return min(float(c @ v) for v in vertices)


@pytest.fixture
def box2():
    return unit_box(2)


@pytest.fixture
def box3():
    return unit_box(3)


@pytest.fixture
def triangle():
    return triangle_set()
