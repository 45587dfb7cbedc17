"""Sparse lowpass FIR design as a halfspace feasibility problem.

A Type I linear-phase filter of odd length 2N-1 has the real amplitude

    T(omega, x) = sum_{k=1..N} x_k cos(omega (k - 1)),

where x_1 = h[0] of the zero-phase response and x_k = 2 h[k-1] for k >= 2.
Requiring T to stay within delta_pb of one on a passband grid and within
delta_sb of zero on a stopband grid yields finitely many linear inequalities,
so the set of acceptable coefficient vectors is a polytope in R^N and a
sparse design is a feasible point with many zero x_k.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .polytope import ZERO_TOL
from .sets import HalfspaceSet

VERIFY_TOL = 1e-8


@dataclass(frozen=True)
class FilterSpec:
    """Band edges (radians), ripples (linear), coefficient count, grid size."""

    omega_pb: float
    omega_sb: float
    delta_pb: float
    delta_sb: float
    N: int
    K: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.omega_pb < self.omega_sb < math.pi):
            raise ValueError("need 0 < omega_pb < omega_sb < pi")
        if self.delta_pb <= 0.0 or self.delta_sb <= 0.0:
            raise ValueError("ripples must be positive")
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.K is None:
            object.__setattr__(self, "K", 8 * self.N)
        if self.K < 4 * self.N:
            raise ValueError("grid size K must be at least 4N")

    @property
    def n_taps(self) -> int:
        return 2 * self.N - 1


def filter_spec_from_config(section: dict) -> FilterSpec:
    """Build a spec from a config section; band edges arrive as multiples
    of pi so config files stay free of transcendental literals."""
    return FilterSpec(
        omega_pb=float(section["omega_pb_over_pi"]) * math.pi,
        omega_sb=float(section["omega_sb_over_pi"]) * math.pi,
        delta_pb=float(section["delta_pb"]),
        delta_sb=float(section["delta_sb"]),
        N=int(section["half_length_N"]),
        K=int(section["grid_K"]) if "grid_K" in section else None,
    )


def filter_spec_to_config(spec: FilterSpec) -> dict:
    return {
        "omega_pb_over_pi": spec.omega_pb / math.pi,
        "omega_sb_over_pi": spec.omega_sb / math.pi,
        "delta_pb": spec.delta_pb,
        "delta_sb": spec.delta_sb,
        "half_length_N": spec.N,
        "grid_K": spec.K,
    }


def design_grids(spec: FilterSpec) -> tuple[np.ndarray, np.ndarray]:
    """Uniform band grids over [0, omega_pb] and [omega_sb, pi], endpoints
    included, with the K points split proportionally to band length."""
    len_pb = spec.omega_pb
    len_sb = math.pi - spec.omega_sb
    k_pb = round(spec.K * len_pb / (len_pb + len_sb))
    k_pb = min(max(k_pb, 2), spec.K - 2)
    k_sb = spec.K - k_pb
    grid_pb = np.linspace(0.0, spec.omega_pb, k_pb)
    grid_sb = np.linspace(spec.omega_sb, math.pi, k_sb)
    return grid_pb, grid_sb


def _cosine_rows(omegas: np.ndarray, N: int) -> np.ndarray:
    """Row j is (cos(omega_j * 0), ..., cos(omega_j * (N-1)))."""
    return np.cos(np.outer(omegas, np.arange(N)))


def build_filter_set(spec: FilterSpec) -> HalfspaceSet:
    """Halfspace description of every coefficient vector meeting the spec.

    Passband frequency omega contributes the pair
        +T(omega, x) <= 1 + delta_pb,   -T(omega, x) <= -(1 - delta_pb);
    stopband omega contributes
        +T(omega, x) <= delta_sb,       -T(omega, x) <= delta_sb.
    Rows are ordered passband then stopband, ascending frequency, the +row
    before the -row at each frequency.
    """
    grid_pb, grid_sb = design_grids(spec)
    C_pb = _cosine_rows(grid_pb, spec.N)
    C_sb = _cosine_rows(grid_sb, spec.N)
    rows = []
    rhs = []
    for j in range(C_pb.shape[0]):
        rows.append(C_pb[j])
        rhs.append(1.0 + spec.delta_pb)
        rows.append(-C_pb[j])
        rhs.append(spec.delta_pb - 1.0)
    for j in range(C_sb.shape[0]):
        rows.append(C_sb[j])
        rhs.append(spec.delta_sb)
        rows.append(-C_sb[j])
        rhs.append(spec.delta_sb)
    label = (f"lowpass N={spec.N} pb<={spec.omega_pb / math.pi:.4g}pi "
             f"sb>={spec.omega_sb / math.pi:.4g}pi")
    return HalfspaceSet(spec.N, np.asarray(rows), np.asarray(rhs), label)


def amplitude(x: np.ndarray, omega) -> np.ndarray | float:
    """T(omega, x) = sum_k x_k cos(omega (k-1)); omega may be an array."""
    x = np.asarray(x, dtype=float).ravel()
    om = np.asarray(omega, dtype=float)
    values = _cosine_rows(np.atleast_1d(om).ravel(), x.shape[0]) @ x
    if om.ndim == 0:
        return float(values[0])
    return values.reshape(om.shape)


@dataclass
class ImpulseResponse:
    """Causal taps of an odd-length symmetric filter."""

    taps: np.ndarray

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=float).ravel()
        if self.taps.size % 2 == 0 or self.taps.size < 1:
            raise ValueError("a Type I impulse response has odd length")
        if not np.array_equal(self.taps, self.taps[::-1]):
            raise ValueError("taps must be exactly symmetric about the center")

    @property
    def center(self) -> int:
        return (self.taps.size - 1) // 2

    def nonzero_count(self, tol: float = ZERO_TOL) -> int:
        return int(np.count_nonzero(np.abs(self.taps) > tol))


def x_to_impulse(x: np.ndarray) -> ImpulseResponse:
    """Coefficients to causal taps: the zero-phase response has h0[0] = x_1
    and h0[+-(k-1)] = x_k / 2, shifted right by N-1.  A zero x_k yields two
    exactly-zero taps (one for x_1)."""
    x = np.asarray(x, dtype=float).ravel()
    N = x.shape[0]
    taps = np.zeros(2 * N - 1)
    taps[N - 1] = x[0]
    half = x[1:] / 2.0
    taps[N:] = half
    taps[:N - 1] = half[::-1]
    return ImpulseResponse(taps)


def impulse_to_x(h: ImpulseResponse) -> np.ndarray:
    """Inverse coefficient mapping from causal symmetric taps."""
    c = h.center
    x = np.empty(c + 1)
    x[0] = h.taps[c]
    x[1:] = 2.0 * h.taps[c + 1:]
    return x


@dataclass
class VerifyReport:
    """Dense-grid check of one coefficient vector against a filter spec."""

    passband_deviation: float
    stopband_magnitude: float
    delta_pb: float
    delta_sb: float
    dense_factor: int
    x_nonzeros: int
    tap_nonzeros: int

    @property
    def passband_ok(self) -> bool:
        return self.passband_deviation <= self.delta_pb + VERIFY_TOL

    @property
    def stopband_ok(self) -> bool:
        return self.stopband_magnitude <= self.delta_sb + VERIFY_TOL

    @property
    def passed(self) -> bool:
        return self.passband_ok and self.stopband_ok

    @property
    def passband_excess(self) -> float:
        """Ripple overshoot as a fraction of delta_pb (0 when within spec)."""
        return max(0.0, self.passband_deviation - self.delta_pb) / self.delta_pb

    @property
    def stopband_excess(self) -> float:
        return max(0.0, self.stopband_magnitude - self.delta_sb) / self.delta_sb

    def lines(self) -> list[str]:
        verdict = "PASS" if self.passed else "FAIL"
        return [
            f"passband max |T - 1| = {self.passband_deviation:.6e} "
            f"(allowed {self.delta_pb:.6e}) -> {'ok' if self.passband_ok else 'VIOLATED'}",
            f"stopband max |T|     = {self.stopband_magnitude:.6e} "
            f"(allowed {self.delta_sb:.6e}) -> {'ok' if self.stopband_ok else 'VIOLATED'}",
            f"dense_factor = {self.dense_factor}",
            f"nonzero coefficients = {self.x_nonzeros}, nonzero taps = {self.tap_nonzeros}",
            f"verdict: {verdict}",
        ]


def _refine(grid: np.ndarray, factor: int) -> np.ndarray:
    """Subdivide each grid interval into `factor` parts, keeping the
    original points, so factor = 1 returns the design grid unchanged."""
    if factor == 1 or grid.size < 2:
        return grid.copy()
    pieces = [np.linspace(grid[i], grid[i + 1], factor + 1)[:-1]
              for i in range(grid.size - 1)]
    return np.concatenate([*pieces, grid[-1:]])


def verify_filter(x: np.ndarray, spec: FilterSpec, dense_factor: int = 1) -> VerifyReport:
    """Evaluate the amplitude on a dense_factor-times finer grid than the
    design grid and compare the worst deviations against the ripple budget."""
    if dense_factor < 1:
        raise ValueError("dense_factor must be at least 1")
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != spec.N:
        raise ValueError(f"x has {x.shape[0]} coefficients, spec wants {spec.N}")
    grid_pb, grid_sb = design_grids(spec)
    dense_pb = _refine(grid_pb, dense_factor)
    dense_sb = _refine(grid_sb, dense_factor)
    dev_pb = float(np.abs(amplitude(x, dense_pb) - 1.0).max())
    mag_sb = float(np.abs(amplitude(x, dense_sb)).max())
    taps = x_to_impulse(x)
    return VerifyReport(
        passband_deviation=dev_pb,
        stopband_magnitude=mag_sb,
        delta_pb=spec.delta_pb,
        delta_sb=spec.delta_sb,
        dense_factor=dense_factor,
        x_nonzeros=int(np.count_nonzero(np.abs(x) > ZERO_TOL)),
        tap_nonzeros=taps.nonzero_count(),
    )


def save_impulse_csv(h: ImpulseResponse, path: str | Path) -> None:
    """Two-column CSV `n,h`; tap values written with full repr precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "h"])
        for n, val in enumerate(h.taps):
            writer.writerow([n, repr(float(val))])


def load_impulse_csv(path: str | Path) -> ImpulseResponse:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["n", "h"]:
            raise ValueError(f"{path} is not an `n,h` impulse CSV")
        taps = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            taps[int(row[0])] = float(row[1])
    if not taps or sorted(taps) != list(range(len(taps))):
        raise ValueError(f"{path}: tap indices must cover 0..len-1")
    return ImpulseResponse(np.array([taps[n] for n in range(len(taps))]))


def save_impulse_json(h: ImpulseResponse, path: str | Path) -> None:
    payload = {"center": h.center, "taps": h.taps.tolist()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_impulse_json(path: str | Path) -> ImpulseResponse:
    payload = json.loads(Path(path).read_text())
    h = ImpulseResponse(np.asarray(payload["taps"], dtype=float))
    if "center" in payload and int(payload["center"]) != h.center:
        raise ValueError("center field disagrees with tap count")
    return h
