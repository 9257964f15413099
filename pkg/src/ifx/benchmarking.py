"""Co-scheduled benchmarking: boundary alignment and interference deltas.

The solo run fixes per-interval instruction boundaries.  For each co-run
against a benchmark, tau_i is the wall-clock time at which the co-run's
cumulative instruction count first reaches boundary i (interpolated
linearly between co-run samples).  The per-interval slowdown is then
delta_0 = tau_0 / s_A and delta_i = (tau_i - tau_{i-1}) / s_A, so the
deltas telescope back to the co-scheduled total time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .traces import RawTrace, cumulative_instructions, window_end_times


@dataclass(frozen=True)
class BenchmarkObservations:
    """Aligned times and deltas of one application against k benchmarks.

    ``tau`` and ``delta`` are n x k matrices; column j belongs to
    ``benchmark_names[j]``.  The last tau row holds the co-scheduled total
    times.
    """

    app_name: str
    benchmark_names: tuple[str, ...]
    tau: np.ndarray
    delta: np.ndarray
    s_A: float

    @property
    def n_intervals(self) -> int:
        return self.tau.shape[0]

    def column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """(tau, delta) for one benchmark by name."""
        try:
            j = self.benchmark_names.index(name)
        except ValueError:
            raise DataError(f"no benchmark named {name!r}")
        return self.tau[:, j], self.delta[:, j]


def co_run_series(trace: RawTrace) -> tuple[np.ndarray, np.ndarray]:
    """(times, cumulative instructions) of a co-run trace, starting at 0."""
    times = np.concatenate([[0.0], window_end_times(trace)])
    instr = np.concatenate([[0.0], cumulative_instructions(trace)])
    return times, instr


def align_intervals(solo_boundaries, co_run_times, co_run_instructions) -> np.ndarray:
    """Time for the co-run to reach each solo instruction boundary.

    ``co_run_times`` and ``co_run_instructions`` are parallel cumulative
    series (monotone, starting at the run origin).  Boundaries beyond the
    co-run's final instruction count raise, naming the shortfall.
    """
    boundaries = np.asarray(solo_boundaries, dtype=float)
    times = np.asarray(co_run_times, dtype=float)
    instr = np.asarray(co_run_instructions, dtype=float)
    if times.shape != instr.shape or times.ndim != 1 or times.size < 2:
        raise DataError("co-run series must be two parallel vectors (length >= 2)")
    if np.any(np.diff(instr) < 0):
        raise DataError("co-run instruction counts must be non-decreasing")
    if boundaries[-1] > instr[-1]:
        raise DataError(
            f"co-run ends at {instr[-1]:.6g} instructions, short of the final "
            f"boundary {boundaries[-1]:.6g}"
        )
    # invert the cumulative-instruction curve at each boundary; searchsorted
    # keeps the EARLIEST crossing when idle windows flatten the curve
    tau = np.empty(boundaries.shape)
    for k, b in enumerate(boundaries):
        i = int(np.searchsorted(instr, b, side="left"))
        if i == 0 or instr[i] == b:
            tau[k] = times[i]
        else:
            span = instr[i] - instr[i - 1]
            tau[k] = times[i - 1] + (b - instr[i - 1]) * (times[i] - times[i - 1]) / span
    return tau


def interference_deltas(tau, s_A: float) -> np.ndarray:
    """Per-interval slowdowns from cumulative boundary times."""
    tau = np.asarray(tau, dtype=float)
    if np.any(np.diff(tau) <= 0) or tau[0] <= 0:
        raise DataError("tau must be positive and strictly increasing")
    if s_A <= 0:
        raise DataError("sampling period must be positive")
    return np.diff(tau, prepend=0.0) / s_A


def bench_wait_time(benchmark_times) -> float:
    """Wall-clock cost of the benchmarking phase when run in parallel."""
    times = [float(t) for t in benchmark_times]
    if len(times) != 3 or any(t <= 0 for t in times):
        raise DataError("expected three positive benchmark times")
    return max(times)


def build_observations(
    app_name: str,
    solo_boundaries,
    co_runs: dict[str, tuple[np.ndarray, np.ndarray]],
    s_A: float,
) -> BenchmarkObservations:
    """Align every co-run and assemble the observation matrices."""
    names = tuple(co_runs)
    columns = []
    for name in names:
        times, instr = co_runs[name]
        columns.append(align_intervals(solo_boundaries, times, instr))
    tau = np.column_stack(columns)
    delta = np.column_stack([interference_deltas(tau[:, j], s_A) for j in range(len(names))])
    return BenchmarkObservations(
        app_name=app_name, benchmark_names=names, tau=tau, delta=delta, s_A=s_A
    )


def observations_to_dict(obs: BenchmarkObservations) -> dict:
    return {
        "app": obs.app_name,
        "sA": obs.s_A,
        "benchmarks": list(obs.benchmark_names),
        "tau": [obs.tau[:, j].tolist() for j in range(len(obs.benchmark_names))],
        "delta": [obs.delta[:, j].tolist() for j in range(len(obs.benchmark_names))],
    }


def observations_from_dict(data: dict) -> BenchmarkObservations:
    names = tuple(str(b) for b in data["benchmarks"])
    tau = np.column_stack([np.array(col, dtype=float) for col in data["tau"]])
    delta = np.column_stack([np.array(col, dtype=float) for col in data["delta"]])
    if tau.shape != delta.shape or tau.shape[1] != len(names):
        raise DataError("tau/delta column counts must match the benchmark list")
    if np.any(delta <= 0):
        raise DataError("deltas must be positive")
    return BenchmarkObservations(
        app_name=str(data["app"]),
        benchmark_names=names,
        tau=tau,
        delta=delta,
        s_A=float(data["sA"]),
    )
