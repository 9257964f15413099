"""Interference profiles: sampled index values as piecewise-linear curves.

A profile stores the n x 4 matrix of index samples taken at times i * s_A
for i = 1..n, the run's total solo time, and the cumulative instruction
count at each sample boundary (used to align co-scheduled runs).  Profile
evaluation interpolates linearly between adjacent samples and clamps to
the first/last sample outside the knot range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .indices import IndexTrace
from .traces import RawTrace, cumulative_instructions

_CEIL_GUARD = 1e-9


def interval_count(total_time_s: float, period_s: float) -> int:
    """ceil(T / s) with a guard against floating-point near-misses."""
    if period_s <= 0:
        raise DataError("sampling period must be positive")
    return max(1, int(math.ceil(total_time_s / period_s - _CEIL_GUARD)))


@dataclass(frozen=True)
class InterferenceProfile:
    """Sampled indices plus the timing/instruction metadata of the solo run."""

    app_name: str
    sampling_period_s: float
    y: np.ndarray
    total_time_s: float
    total_instructions: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def knot_times(self) -> np.ndarray:
        return self.sampling_period_s * np.arange(1, self.n + 1)


def make_profile(trace: IndexTrace, raw: RawTrace) -> InterferenceProfile:
    """Pair an index trace with its raw trace into a profile."""
    if trace.app_name != raw.app_name:
        raise DataError(
            f"trace mismatch: {trace.app_name!r} vs {raw.app_name!r}"
        )
    if len(trace.rows) != len(raw.samples):
        raise DataError(
            f"length mismatch: {len(trace.rows)} index rows vs "
            f"{len(raw.samples)} raw windows"
        )
    y = np.array([row.as_tuple() for row in trace.rows], dtype=float)
    return InterferenceProfile(
        app_name=trace.app_name,
        sampling_period_s=trace.sampling_period_s,
        y=y,
        total_time_s=raw.total_time_s,
        total_instructions=np.array(cumulative_instructions(raw), dtype=float),
    )


def eval_profile(profile: InterferenceProfile, j: int, t: float) -> float:
    """Value of index j (1..4) at time t seconds.

    Exact at the knots, linear between them, clamped to the first/last
    sample outside [s_A, n * s_A].
    """
    if not 1 <= j <= 4:
        raise DataError(f"index j must be in 1..4, got {j}")
    column = profile.y[:, j - 1]
    return float(np.interp(t, profile.knot_times(), column))


def resample(profile: InterferenceProfile, new_s: float) -> InterferenceProfile:
    """Re-knot a profile at a different sampling period.

    The new profile has ceil(T / new_s) samples at multiples of new_s; the
    final knot may lie past the run end, where evaluation clamps.  Linear
    profiles are fixed points of this operation.
    """
    if new_s <= 0:
        raise DataError("new sampling period must be positive")
    n_new = interval_count(profile.total_time_s, new_s)
    times = new_s * np.arange(1, n_new + 1)
    knots = profile.knot_times()
    y_new = np.column_stack(
        [np.interp(times, knots, profile.y[:, j]) for j in range(4)]
    )
    instr_new = np.interp(
        times,
        np.concatenate([[0.0], knots]),
        np.concatenate([[0.0], profile.total_instructions]),
    )
    return InterferenceProfile(
        app_name=profile.app_name,
        sampling_period_s=new_s,
        y=y_new,
        total_time_s=profile.total_time_s,
        total_instructions=instr_new,
    )


def profile_to_dict(profile: InterferenceProfile) -> dict:
    return {
        "app": profile.app_name,
        "sA": profile.sampling_period_s,
        "T": profile.total_time_s,
        "y": profile.y.tolist(),
        "instr": profile.total_instructions.tolist(),
    }


def profile_from_dict(data: dict) -> InterferenceProfile:
    y = np.array(data["y"], dtype=float)
    if y.ndim != 2 or y.shape[1] != 4 or y.shape[0] < 1:
        raise DataError(f"profile y must be n x 4 with n >= 1, got {y.shape}")
    if np.any(y < 0) or np.any(y > 1):
        raise DataError("profile y entries must lie in [0, 1]")
    instr = np.array(data["instr"], dtype=float)
    if instr.shape[0] != y.shape[0]:
        raise DataError("instr length must match the number of samples")
    if np.any(np.diff(instr) < 0):
        raise DataError("cumulative instruction counts must be non-decreasing")
    return InterferenceProfile(
        app_name=str(data["app"]),
        sampling_period_s=float(data["sA"]),
        y=y,
        total_time_s=float(data["T"]),
        total_instructions=instr,
    )
