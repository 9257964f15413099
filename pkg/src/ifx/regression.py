"""Non-negative regression of per-interval interference.

The interference function is linear in the eight profile values of the
two co-scheduled applications plus an intercept; its nine coefficients
are constrained non-negative and fitted with the Lawson-Hanson active-set
algorithm.  One model is fitted per application from its three benchmark
co-runs; pooling several applications' observations yields a single
shared model instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .benchmarking import BenchmarkObservations
from .errors import DataError
from .profiles import InterferenceProfile, eval_profile

N_COEFFS = 9  # intercept + 4 own-profile terms + 4 co-runner terms

SINGLE_SCOPE = "single"


@dataclass(frozen=True)
class InterferenceModel:
    """Fitted non-negative coefficients plus fit bookkeeping."""

    beta: np.ndarray
    scope: str
    rss: float
    n_obs: int


@dataclass(frozen=True)
class DesignMatrix:
    """Regression rows (1, own indices, co-runner indices) with targets."""

    x: np.ndarray
    targets: np.ndarray


def _regressor_row(
    profile_a: InterferenceProfile, profile_b: InterferenceProfile, t: float
) -> list[float]:
    row = [1.0]
    row += [eval_profile(profile_a, j, t) for j in (1, 2, 3, 4)]
    row += [eval_profile(profile_b, j, t) for j in (1, 2, 3, 4)]
    return row


def assemble_design(
    profile_a: InterferenceProfile,
    benchmark_profiles,
    obs: BenchmarkObservations,
) -> DesignMatrix:
    """One row per (interval, benchmark), evaluated at interval upper bounds."""
    benchmark_profiles = list(benchmark_profiles)
    if len(benchmark_profiles) != len(obs.benchmark_names):
        raise DataError(
            f"{len(benchmark_profiles)} benchmark profiles for "
            f"{len(obs.benchmark_names)} observation columns"
        )
    if profile_a.sampling_period_s != obs.s_A:
        raise DataError(
            f"profile sA {profile_a.sampling_period_s} != observations sA "
            f"{obs.s_A}; resample first"
        )
    for p in benchmark_profiles:
        if p.sampling_period_s != obs.s_A:
            raise DataError(
                f"benchmark profile {p.app_name!r} sA {p.sampling_period_s} != "
                f"observations sA {obs.s_A}; resample first"
            )

    rows, targets = [], []
    s = obs.s_A
    for j, profile_b in enumerate(benchmark_profiles):
        for i in range(obs.n_intervals):
            rows.append(_regressor_row(profile_a, profile_b, (i + 1) * s))
            targets.append(obs.delta[i, j])
    return DesignMatrix(x=np.array(rows), targets=np.array(targets))


def nnls(design, targets, max_iter: int | None = None) -> np.ndarray:
    """Lawson-Hanson active-set solution of min ||X b - y|| s.t. b >= 0.

    The passive set grows by the variable with the largest positive dual
    (equivalently the most negative gradient component); ties break on the
    lowest index, so the result is deterministic for a given input order.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DataError(f"incompatible design {x.shape} and targets {y.shape}")
    n_rows, n_cols = x.shape
    if n_rows < 1:
        raise DataError("need at least one observation row")
    if max_iter is None:
        max_iter = 3 * n_cols + 10

    beta = np.zeros(n_cols)
    passive = np.zeros(n_cols, dtype=bool)
    # dual feasibility tolerance, scaled like scipy's classic solver
    tol = 10 * np.finfo(float).eps * np.abs(x).sum(axis=0).max() * max(n_rows, n_cols)

    for _ in range(max_iter):
        w = x.T @ (y - x @ beta)
        candidates = ~passive
        if not candidates.any() or w[candidates].max() <= tol:
            return beta
        entering = np.flatnonzero(candidates)[np.argmax(w[candidates])]
        passive[entering] = True

        while True:
            trial = np.zeros(n_cols)
            trial[passive], *_ = np.linalg.lstsq(x[:, passive], y, rcond=None)
            if trial[passive].min() > 0:
                beta = trial
                break
            # step toward the trial point until the first coefficient hits zero
            blocking = passive & (trial <= 0)
            alpha = np.min(beta[blocking] / (beta[blocking] - trial[blocking]))
            beta = beta + alpha * (trial - beta)
            passive &= beta > 0
            beta[~passive] = 0.0

    raise DataError(f"nnls failed to converge within {max_iter} iterations")


def _fit(design: DesignMatrix, scope: str) -> InterferenceModel:
    beta = nnls(design.x, design.targets)
    residual = design.x @ beta - design.targets
    return InterferenceModel(
        beta=beta,
        scope=scope,
        rss=float(residual @ residual),
        n_obs=design.x.shape[0],
    )


def fit_model(
    profile_a: InterferenceProfile,
    benchmark_profiles,
    obs: BenchmarkObservations,
) -> InterferenceModel:
    """Per-application interference model from its benchmark co-runs."""
    design = assemble_design(profile_a, benchmark_profiles, obs)
    return _fit(design, scope=profile_a.app_name)


def fit_single_model(datasets) -> InterferenceModel:
    """Pool (profile, benchmark profiles, observations) triples into one model."""
    datasets = list(datasets)
    if not datasets:
        raise DataError("need at least one dataset to fit a pooled model")
    designs = [assemble_design(pa, pbs, obs) for pa, pbs, obs in datasets]
    pooled = DesignMatrix(
        x=np.vstack([d.x for d in designs]),
        targets=np.concatenate([d.targets for d in designs]),
    )
    return _fit(pooled, scope=SINGLE_SCOPE)


def model_to_dict(model: InterferenceModel) -> dict:
    return {
        "scope": model.scope,
        "beta": model.beta.tolist(),
        "rss": model.rss,
        "n_obs": model.n_obs,
    }


def model_from_dict(data: dict) -> InterferenceModel:
    beta = np.array(data["beta"], dtype=float)
    if beta.shape != (N_COEFFS,):
        raise DataError(f"expected {N_COEFFS} coefficients, got shape {beta.shape}")
    if np.any(beta < 0):
        raise DataError("interference coefficients must be non-negative")
    return InterferenceModel(
        beta=beta,
        scope=str(data["scope"]),
        rss=float(data["rss"]),
        n_obs=int(data["n_obs"]),
    )
