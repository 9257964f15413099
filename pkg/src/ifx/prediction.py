"""Per-interval interference estimates and total execution time.

Predictions evaluate the fitted interference function at the upper bound
of each of the ceil(T_A / s_A) intervals and sum the floored estimates.
Co-scheduling with a delay shifts the co-runner's profile timeline: the
delayed application starts once the co-runner reaches its k-th interval,
and the co-runner's contribution drops to zero after its own lifetime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .profiles import InterferenceProfile, eval_profile, interval_count, resample
from .regression import InterferenceModel

DELTA_FLOOR = 1.0  # a co-run never beats solo speed


@dataclass(frozen=True)
class Prediction:
    """Estimated per-interval slowdowns and total time for one pairing."""

    app_a: str
    app_b: str
    delta_hat: np.ndarray
    total_time_s: float
    s_A: float
    delay_k: int


def estimate_delta(
    model: InterferenceModel,
    profile_a: InterferenceProfile,
    profile_b: InterferenceProfile,
    t: float,
    b_time: float | None = None,
) -> float:
    """Interference estimate at time t, floored at solo speed.

    ``b_time`` positions the co-runner's profile (defaults to t); once it
    exceeds the co-runner's lifetime the co-runner contributes nothing.
    """
    beta = model.beta
    value = beta[0]
    for j in (1, 2, 3, 4):
        value += beta[j] * eval_profile(profile_a, j, t)
    if b_time is None:
        b_time = t
    if b_time <= profile_b.total_time_s:
        for j in (1, 2, 3, 4):
            value += beta[4 + j] * eval_profile(profile_b, j, b_time)
    return max(DELTA_FLOOR, value)


def estimate_execution_time(
    model: InterferenceModel,
    profile_a: InterferenceProfile,
    profile_b: InterferenceProfile,
    delay_k: int = 0,
) -> Prediction:
    """Predict the co-scheduled execution time of A alongside B.

    ``delay_k`` delays A until B reaches its delay_k-th interval, measured
    in B's own sampling period.
    """
    if delay_k < 0:
        raise DataError("delay must be non-negative")
    s_a = profile_a.sampling_period_s
    offset = delay_k * profile_b.sampling_period_s
    n = interval_count(profile_a.total_time_s, s_a)
    delta_hat = np.array(
        [
            estimate_delta(model, profile_a, profile_b, t, b_time=t + offset)
            for t in s_a * np.arange(1, n + 1)
        ]
    )
    return Prediction(
        app_a=profile_a.app_name,
        app_b=profile_b.app_name,
        delta_hat=delta_hat,
        total_time_s=float(delta_hat.sum() * s_a),
        s_A=s_a,
        delay_k=delay_k,
    )


@dataclass(frozen=True)
class SensitivityRow:
    """One sampling-period variant: interval count, period, estimate."""

    n: int
    period_s: float
    total_time_s: float


def sampling_sensitivity(
    model: InterferenceModel,
    profile_a: InterferenceProfile,
    profile_b: InterferenceProfile,
    periods,
    scenario: int,
) -> list[SensitivityRow]:
    """Re-estimate the total time under coarser sampling periods.

    Scenario 1 keeps the profiles at their native resolution and coarsens
    only the prediction steps; scenario 2 resamples both profiles to the
    coarser period before predicting.
    """
    if scenario not in (1, 2):
        raise DataError(f"scenario must be 1 or 2, got {scenario}")
    rows = []
    for period in periods:
        if period <= 0:
            raise DataError("sampling periods must be positive")
        if scenario == 1:
            n = interval_count(profile_a.total_time_s, period)
            delta_hat = [
                estimate_delta(model, profile_a, profile_b, t)
                for t in period * np.arange(1, n + 1)
            ]
            total = float(np.sum(delta_hat) * period)
        else:
            coarse_a = resample(profile_a, period)
            coarse_b = resample(profile_b, period)
            pred = estimate_execution_time(model, coarse_a, coarse_b)
            n, total = len(pred.delta_hat), pred.total_time_s
        rows.append(SensitivityRow(n=n, period_s=float(period), total_time_s=total))
    return rows


def prediction_to_dict(pred: Prediction, scope: str) -> dict:
    return {
        "model_scope": scope,
        "app_a": pred.app_a,
        "app_b": pred.app_b,
        "sA": pred.s_A,
        "delay_k": pred.delay_k,
        "delta_hat": pred.delta_hat.tolist(),
        "total_time_s": pred.total_time_s,
    }


def prediction_from_dict(data: dict) -> Prediction:
    return Prediction(
        app_a=str(data["app_a"]),
        app_b=str(data["app_b"]),
        delta_hat=np.array(data["delta_hat"], dtype=float),
        total_time_s=float(data["total_time_s"]),
        s_A=float(data["sA"]),
        delay_k=int(data["delay_k"]),
    )


def prediction_series_csv(pred: Prediction) -> str:
    """Per-interval (t, delta_hat) rows for plotting."""
    lines = ["t,delta_hat"]
    for i, value in enumerate(pred.delta_hat, start=1):
        lines.append(f"{float(i * pred.s_A)!r},{float(value)!r}")
    return "\n".join(lines) + "\n"
