"""Synthetic applications and co-runs with known ground truth.

Profiles are generated from simple index shapes (constant, step, clipped
sinusoid) that mimic the archetypes seen in real workloads: a fully
CPU-bound renderer, a cache-thrashing I/O benchmark, a memory-bandwidth
streamer, and phased pipeline jobs.  Co-runs are simulated by driving the
known interference coefficients forward and integrating the resulting
slowdowns into boundary times, which the analysis pipeline can then
invert; with zero noise the fitted model recovers the generating
coefficients exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .benchmarking import BenchmarkObservations
from .errors import DataError
from .profiles import InterferenceProfile, eval_profile, interval_count
from .regression import N_COEFFS, assemble_design


@dataclass(frozen=True)
class Shape:
    """One index's trajectory over normalized execution time.

    kinds: ``constant`` (value), ``step`` (start -> end at fraction), and
    ``sinusoid`` (mean, amplitude, period seconds, phase radians; values
    are clipped into [0, 1]).
    """

    kind: str
    value: float = 0.0
    start: float = 0.0
    end: float = 0.0
    at: float = 0.5
    mean: float = 0.5
    amplitude: float = 0.0
    period: float = 1.0
    phase: float = 0.0

    def __call__(self, t: float, duration: float) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "step":
            # the knot at the step fraction keeps the pre-step level
            return self.start if t <= self.at * duration else self.end
        if self.kind == "sinusoid":
            raw = self.mean + self.amplitude * math.sin(
                2.0 * math.pi * t / self.period + self.phase
            )
            return min(1.0, max(0.0, raw))
        raise DataError(f"unknown shape kind {self.kind!r}")

    def validate(self) -> None:
        if self.kind == "constant":
            if not 0.0 <= self.value <= 1.0:
                raise DataError(f"constant value {self.value} outside [0, 1]")
        elif self.kind == "step":
            for v in (self.start, self.end):
                if not 0.0 <= v <= 1.0:
                    raise DataError(f"step level {v} outside [0, 1]")
            if not 0.0 <= self.at <= 1.0:
                raise DataError(f"step fraction {self.at} outside [0, 1]")
        elif self.kind == "sinusoid":
            if not 0.0 <= self.mean <= 1.0:
                raise DataError(f"sinusoid mean {self.mean} outside [0, 1]")
            if self.amplitude < 0 or self.period <= 0:
                raise DataError("sinusoid needs amplitude >= 0 and period > 0")
        else:
            raise DataError(f"unknown shape kind {self.kind!r}")


@dataclass(frozen=True)
class SynthAppSpec:
    """Deterministic recipe for one synthetic application profile."""

    name: str
    shapes: tuple[Shape, Shape, Shape, Shape]
    duration_s: float
    sampling_period_s: float
    seed: int = 0


@dataclass(frozen=True)
class GroundTruth:
    """Generating interference coefficients and observation noise level."""

    beta_true: np.ndarray
    noise_sigma: float

    def validated(self) -> "GroundTruth":
        beta = np.asarray(self.beta_true, dtype=float)
        if beta.shape != (N_COEFFS,) or np.any(beta < 0):
            raise DataError(f"beta_true must be {N_COEFFS} non-negative values")
        if self.noise_sigma < 0:
            raise DataError("noise_sigma must be non-negative")
        return GroundTruth(beta_true=beta, noise_sigma=float(self.noise_sigma))


def gen_profile(spec: SynthAppSpec) -> InterferenceProfile:
    """Sample the shape functions at the knot times."""
    if spec.duration_s <= 0 or spec.sampling_period_s <= 0:
        raise DataError("duration and sampling period must be positive")
    for shape in spec.shapes:
        shape.validate()
    n = interval_count(spec.duration_s, spec.sampling_period_s)
    times = spec.sampling_period_s * np.arange(1, n + 1)
    y = np.array(
        [[shape(t, spec.duration_s) for shape in spec.shapes] for t in times]
    )
    if np.any(y < 0) or np.any(y > 1):
        raise DataError("shape produced index values outside [0, 1]")
    # synthetic stand-in for perf data: constant instruction rate
    instructions = 1e9 * np.arange(1, n + 1)
    return InterferenceProfile(
        app_name=spec.name,
        sampling_period_s=spec.sampling_period_s,
        y=y,
        total_time_s=spec.duration_s,
        total_instructions=instructions,
    )


def simulate_cosched(
    profile_a: InterferenceProfile,
    profile_b: InterferenceProfile,
    truth: GroundTruth,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one co-run: (tau, delta) arrays with ground-truth slowdowns.

    delta_i = max(1, beta . regressors at the interval upper bound) plus
    optional Gaussian noise; tau accumulates delta_i * s_A, so inverting
    the boundary times recovers the deltas exactly.
    """
    truth = truth.validated()
    if rng is None:
        rng = np.random.default_rng(0)
    s = profile_a.sampling_period_s
    n = interval_count(profile_a.total_time_s, s)
    beta = truth.beta_true
    delta = np.empty(n)
    for i in range(n):
        t = (i + 1) * s
        value = beta[0]
        for j in (1, 2, 3, 4):
            value += beta[j] * eval_profile(profile_a, j, t)
        if t <= profile_b.total_time_s:
            for j in (1, 2, 3, 4):
                value += beta[4 + j] * eval_profile(profile_b, j, t)
        delta[i] = max(1.0, value)
    if truth.noise_sigma > 0:
        delta = delta + rng.normal(0.0, truth.noise_sigma, size=n)
        if np.any(delta <= 0):
            raise DataError("noise drove a simulated delta non-positive")
    tau = np.cumsum(delta * s)
    return tau, delta


@dataclass(frozen=True)
class Scenario:
    """A full synthetic experiment: app, benchmarks, truth, observations."""

    app: InterferenceProfile
    benchmarks: tuple[InterferenceProfile, ...]
    truth: GroundTruth
    observations: BenchmarkObservations


def build_scenario(
    app_spec: SynthAppSpec, benchmark_specs, truth: GroundTruth
) -> Scenario:
    """Generate profiles, simulate the three co-runs, assemble observations.

    Warns when the implied regression design is rank deficient (e.g. all
    shapes constant), since the coefficients are then unidentifiable.
    """
    truth = truth.validated()
    app = gen_profile(app_spec)
    benchmarks = tuple(gen_profile(spec) for spec in benchmark_specs)
    rng = np.random.default_rng(app_spec.seed)
    taus, deltas = [], []
    for bench in benchmarks:
        tau, delta = simulate_cosched(app, bench, truth, rng=rng)
        taus.append(tau)
        deltas.append(delta)
    obs = BenchmarkObservations(
        app_name=app.app_name,
        benchmark_names=tuple(b.app_name for b in benchmarks),
        tau=np.column_stack(taus),
        delta=np.column_stack(deltas),
        s_A=app.sampling_period_s,
    )
    design = assemble_design(app, benchmarks, obs)
    rank = np.linalg.matrix_rank(design.x)
    if rank < N_COEFFS:
        warnings.warn(
            f"synthetic design has rank {rank} < {N_COEFFS}; "
            "coefficients are unidentifiable with these shapes",
            stacklevel=2,
        )
    return Scenario(app=app, benchmarks=benchmarks, truth=truth, observations=obs)


def _shape_to_dict(shape: Shape) -> dict:
    if shape.kind == "constant":
        return {"kind": "constant", "value": shape.value}
    if shape.kind == "step":
        return {"kind": "step", "start": shape.start, "end": shape.end, "at": shape.at}
    return {
        "kind": "sinusoid",
        "mean": shape.mean,
        "amplitude": shape.amplitude,
        "period": shape.period,
        "phase": shape.phase,
    }


def _shape_from_dict(data: dict) -> Shape:
    kind = data["kind"]
    known = {
        "constant": ("value",),
        "step": ("start", "end", "at"),
        "sinusoid": ("mean", "amplitude", "period", "phase"),
    }
    if kind not in known:
        raise DataError(f"unknown shape kind {kind!r}")
    kwargs = {k: float(data[k]) for k in known[kind] if k in data}
    shape = Shape(kind=kind, **kwargs)
    shape.validate()
    return shape


def _app_to_dict(spec: SynthAppSpec) -> dict:
    return {
        "name": spec.name,
        "duration": spec.duration_s,
        "sampling_period": spec.sampling_period_s,
        "shapes": [_shape_to_dict(s) for s in spec.shapes],
    }


def _app_from_dict(data: dict, seed: int) -> SynthAppSpec:
    shapes = tuple(_shape_from_dict(s) for s in data["shapes"])
    if len(shapes) != 4:
        raise DataError("an app spec needs exactly 4 index shapes")
    return SynthAppSpec(
        name=str(data["name"]),
        shapes=shapes,
        duration_s=float(data["duration"]),
        sampling_period_s=float(data["sampling_period"]),
        seed=seed,
    )


def scenario_spec_to_dict(
    app_spec: SynthAppSpec, benchmark_specs, truth: GroundTruth
) -> dict:
    return {
        "seed": app_spec.seed,
        "app": _app_to_dict(app_spec),
        "benchmarks": [_app_to_dict(s) for s in benchmark_specs],
        "truth": {
            "beta": np.asarray(truth.beta_true, dtype=float).tolist(),
            "noise_sigma": truth.noise_sigma,
        },
    }


def scenario_spec_from_dict(data: dict):
    seed = int(data.get("seed", 0))
    app_spec = _app_from_dict(data["app"], seed)
    benchmark_specs = tuple(_app_from_dict(b, seed) for b in data["benchmarks"])
    truth = GroundTruth(
        beta_true=np.array(data["truth"]["beta"], dtype=float),
        noise_sigma=float(data["truth"].get("noise_sigma", 0.0)),
    ).validated()
    return app_spec, benchmark_specs, truth


def demo_scenario_spec(
    seed: int = 7, noise_sigma: float = 0.0
) -> tuple[SynthAppSpec, tuple[SynthAppSpec, ...], GroundTruth]:
    """A ready-made scenario with a full-rank design.

    The app has phased, time-varying indices; the three benchmarks lean on
    CPU, cache misses and memory accesses respectively, each with enough
    temporal structure to keep the nine regression columns independent.
    """
    app = SynthAppSpec(
        name="app",
        shapes=(
            Shape(kind="sinusoid", mean=0.6, amplitude=0.3, period=37.0, phase=0.7),
            Shape(kind="step", start=0.2, end=0.7, at=0.4),
            Shape(kind="sinusoid", mean=0.5, amplitude=0.25, period=23.0, phase=0.2),
            Shape(kind="step", start=0.6, end=0.3, at=0.65),
        ),
        duration_s=100.0,
        sampling_period_s=5.0,
        seed=seed,
    )
    cpu_hog = SynthAppSpec(
        name="cpu_hog",
        shapes=(
            Shape(kind="sinusoid", mean=0.85, amplitude=0.12, period=11.0, phase=0.3),
            Shape(kind="sinusoid", mean=0.2, amplitude=0.15, period=31.0, phase=1.3),
            Shape(kind="step", start=0.1, end=0.35, at=0.5),
            Shape(kind="sinusoid", mean=0.25, amplitude=0.15, period=43.0, phase=2.6),
        ),
        duration_s=120.0,
        sampling_period_s=5.0,
        seed=seed,
    )
    cache_thrasher = SynthAppSpec(
        name="cache_thrasher",
        shapes=(
            Shape(kind="step", start=0.5, end=0.3, at=0.3),
            Shape(kind="sinusoid", mean=0.45, amplitude=0.25, period=17.0, phase=0.0),
            Shape(kind="sinusoid", mean=0.3, amplitude=0.15, period=41.0, phase=1.1),
            Shape(kind="sinusoid", mean=0.8, amplitude=0.15, period=29.0, phase=2.1),
        ),
        duration_s=120.0,
        sampling_period_s=5.0,
        seed=seed,
    )
    mem_streamer = SynthAppSpec(
        name="mem_streamer",
        shapes=(
            Shape(kind="sinusoid", mean=0.45, amplitude=0.2, period=19.0, phase=0.9),
            Shape(kind="step", start=0.15, end=0.4, at=0.6),
            Shape(kind="sinusoid", mean=0.85, amplitude=0.1, period=13.0, phase=0.4),
            Shape(kind="step", start=0.3, end=0.55, at=0.55),
        ),
        duration_s=120.0,
        sampling_period_s=5.0,
        seed=seed,
    )
    truth = GroundTruth(
        beta_true=np.array([1.0, 0.35, 0.25, 0.40, 0.30, 0.35, 0.30, 0.30, 0.30]),
        noise_sigma=noise_sigma,
    )
    return app, (cpu_hog, cache_thrasher, mem_streamer), truth
