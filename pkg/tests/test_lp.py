"""Solver checks: pinned small problems, then randomized comparison against
an exhaustive vertex-enumeration oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsewalk.lp import (DimensionMismatch, FEAS_TOL, LpProblem, LpStatus,
                           OBJ_TOL, solve)

from conftest import oracle_lp_minimum


def test_one_dim_box_minimum():
    out = solve(LpProblem([1.0], [[1.0], [-1.0]], [1.0, 0.0]))
    assert out.status is LpStatus.OPTIMAL
    assert out.solution == pytest.approx([0.0], abs=FEAS_TOL)
    assert out.objective_value == pytest.approx(0.0, abs=OBJ_TOL)


def test_unit_box_corner():
    A = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    out = solve(LpProblem([-1.0, -1.0], A, [1, 1, 0, 0]))
    assert out.status is LpStatus.OPTIMAL
    assert out.solution == pytest.approx([1.0, 1.0], abs=FEAS_TOL)
    assert out.objective_value == pytest.approx(-2.0, abs=OBJ_TOL)


def test_unbounded_ray():
    out = solve(LpProblem([-1.0], [[-1.0]], [0.0]))
    assert out.status is LpStatus.UNBOUNDED
    assert out.solution is None
    assert out.objective_value is None


def test_contradictory_bounds_infeasible():
    out = solve(LpProblem([0.0], [[1.0], [-1.0]], [-1.0, -1.0]))
    assert out.status is LpStatus.INFEASIBLE
    assert out.solution is None


def test_equality_constraint():
    # min x1 + x2 on the segment x1 + x2 = 1 inside the unit box
    A = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    out = solve(LpProblem([1.0, 1.0], A, [1, 1, 1, 1], [[1.0, 1.0]], [1.0]))
    assert out.status is LpStatus.OPTIMAL
    assert out.objective_value == pytest.approx(1.0, abs=OBJ_TOL)
    assert float(sum(out.solution)) == pytest.approx(1.0, abs=FEAS_TOL)


def test_equality_infeasible_outside_box():
    A = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    out = solve(LpProblem([0.0, 0.0], A, [1, 1, 1, 1], [[1.0, 1.0]], [5.0]))
    assert out.status is LpStatus.INFEASIBLE


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        LpProblem([1.0, 2.0], [[1.0]], [1.0])
    with pytest.raises(DimensionMismatch):
        LpProblem([1.0], [[1.0]], [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        LpProblem([1.0], [[1.0]], [1.0], [[1.0, 2.0]], [0.0])


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        LpProblem([np.nan], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        LpProblem([1.0], [[np.inf]], [1.0])


def test_feasibility_residuals_on_optimum():
    rng = np.random.default_rng(5)
    A = np.vstack([np.eye(4), -np.eye(4), rng.standard_normal((6, 4))])
    b = np.concatenate([np.ones(8), np.full(6, 2.0)])
    c = rng.standard_normal(4)
    out = solve(LpProblem(c, A, b))
    assert out.status is LpStatus.OPTIMAL
    assert np.max(A @ out.solution - b) <= FEAS_TOL
    assert out.objective_value == pytest.approx(float(c @ out.solution), abs=OBJ_TOL)


def test_determinism_across_runs():
    rng = np.random.default_rng(17)
    A = np.vstack([np.eye(5), -np.eye(5), rng.standard_normal((8, 5))])
    b = np.concatenate([np.ones(10), np.ones(8)])
    c = rng.standard_normal(5)
    first = solve(LpProblem(c, A, b))
    second = solve(LpProblem(c, A, b))
    assert first.status is second.status
    assert np.array_equal(first.solution, second.solution)
    assert first.objective_value == second.objective_value


def test_degenerate_corner_terminates():
    # Many redundant constraints meet at the optimal corner; stall detection
    # must hand over to Bland's rule rather than cycle.
    n = 4
    eye = np.eye(n)
    A = np.vstack([eye, eye * 2.0, eye * 3.0, -eye])
    b = np.concatenate([np.ones(n), 2 * np.ones(n), 3 * np.ones(n), np.zeros(n)])
    out = solve(LpProblem(-np.ones(n), A, b))
    assert out.status is LpStatus.OPTIMAL
    assert out.solution == pytest.approx(np.ones(n), abs=FEAS_TOL)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 10))
def test_matches_vertex_enumeration_oracle(seed, n, extra_rows):
    """On random boxed problems the solver agrees with brute-force
    enumeration of all constraint-subset vertices."""
    rng = np.random.default_rng(seed)
    A = np.vstack([np.eye(n), -np.eye(n), rng.standard_normal((extra_rows, n))])
    b = np.concatenate([np.ones(2 * n), rng.uniform(-0.5, 1.5, extra_rows)])
    c = rng.standard_normal(n)
    out = solve(LpProblem(c, A, b))
    expected = oracle_lp_minimum(c, A, b)
    if expected is None:
        assert out.status is LpStatus.INFEASIBLE
    else:
        assert out.status is LpStatus.OPTIMAL
        assert out.objective_value == pytest.approx(expected, abs=1e-6)
        assert np.max(A @ out.solution - b) <= FEAS_TOL


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_matches_oracle_with_equalities(seed, n):
    rng = np.random.default_rng(seed)
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.ones(2 * n)
    E = rng.standard_normal((1, n))
    e = rng.uniform(-0.5, 0.5, 1)
    c = rng.standard_normal(n)
    out = solve(LpProblem(c, A, b, E, e))
    expected = oracle_lp_minimum(c, A, b, E, e)
    if expected is None:
        assert out.status is LpStatus.INFEASIBLE
    else:
        assert out.status is LpStatus.OPTIMAL
        assert out.objective_value == pytest.approx(expected, abs=1e-6)
        assert np.max(np.abs(E @ out.solution - e)) <= FEAS_TOL


def test_nonneg_simplex_corner():
    # max x1 + x2 over the standard simplex, variables nonnegative natively
    out = solve(LpProblem([-1.0, -1.0, 0.0], np.zeros((0, 3)), np.zeros(0),
                          [[1.0, 1.0, 1.0]], [1.0], nonneg=True))
    assert out.status is LpStatus.OPTIMAL
    assert out.objective_value == pytest.approx(-1.0, abs=OBJ_TOL)
    assert np.all(out.solution >= -FEAS_TOL)


def test_nonneg_infeasible_negative_target():
    # sum of nonnegative weights cannot be negative
    out = solve(LpProblem([0.0, 0.0], np.zeros((0, 2)), np.zeros(0),
                          [[1.0, 1.0]], [-1.0], nonneg=True))
    assert out.status is LpStatus.INFEASIBLE


def test_nonneg_unbounded_ray():
    out = solve(LpProblem([-1.0], np.zeros((0, 1)), np.zeros(0), nonneg=True))
    assert out.status is LpStatus.UNBOUNDED


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 6))
def test_nonneg_matches_explicit_sign_rows(seed, n, extra_rows):
    """nonneg=True must agree with the free-variable solve of the same
    problem carrying explicit -x <= 0 rows."""
    rng = np.random.default_rng(seed)
    A = np.vstack([np.eye(n), rng.standard_normal((extra_rows, n))])
    b = np.concatenate([np.ones(n), rng.uniform(-0.5, 1.5, extra_rows)])
    c = rng.standard_normal(n)
    compact = solve(LpProblem(c, A, b, nonneg=True))
    explicit = solve(LpProblem(c, np.vstack([A, -np.eye(n)]),
                               np.concatenate([b, np.zeros(n)])))
    assert compact.status is explicit.status
    if compact.status is LpStatus.OPTIMAL:
        assert compact.objective_value == pytest.approx(
            explicit.objective_value, abs=1e-6)
        assert np.all(compact.solution >= -FEAS_TOL)
        assert np.max(A @ compact.solution - b) <= FEAS_TOL


def test_debug_dump_written(tmp_path):
    log = tmp_path / "lp_debug.txt"
    out = solve(LpProblem([-1.0, -1.0],
                          [[1, 0], [0, 1], [-1, 0], [0, -1]],
                          [1, 1, 0, 0]), debug_path=log)
    assert out.status is LpStatus.OPTIMAL
    text = log.read_text()
    assert "phase" in text and "verdict: optimal" in text
