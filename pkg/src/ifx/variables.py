"""Per-window relative variables derived from raw event counts.

Raw counts are turned into ten dimensionless quantities per window: four
per-instruction access rates, four miss rates, a standardized page-fault
score, and a CPU-usage fraction computed against the machine's nominal
cycle budget for the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DataError
from .traces import MachineSpec, RawSample, RawTrace


@dataclass(frozen=True)
class DatasetStats:
    """Page-fault statistics pooled over an entire reference dataset."""

    faults_mean: float
    faults_std: float
    sample_count: int


@dataclass(frozen=True)
class VariableVector:
    """The ten per-window variables.

    ``flagged`` marks degenerate windows (zero instructions) whose rate
    variables were forced to 0 rather than left undefined.
    """

    v1: float
    v2: float
    v3: float
    v4: float
    v5: float
    v6: float
    v7: float
    v8: float
    v9: float
    v10: float
    flagged: bool = False

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.v1, self.v2, self.v3, self.v4, self.v5,
            self.v6, self.v7, self.v8, self.v9, self.v10,
        )


def compute_dataset_stats(traces: Iterable[RawTrace]) -> DatasetStats:
    """Sample mean and standard deviation (n-1) of page faults per window."""
    faults = [s.page_faults for t in traces for s in t.samples]
    n = len(faults)
    if n < 2:
        raise DataError(f"need at least 2 windows to compute stats, got {n}")
    mean = sum(faults) / n
    var = sum((f - mean) ** 2 for f in faults) / (n - 1)
    return DatasetStats(faults_mean=mean, faults_std=math.sqrt(var), sample_count=n)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def derive_variables(
    sample: RawSample, machine: MachineSpec, stats: DatasetStats
) -> VariableVector:
    """Compute the ten variables for one window.

    Zero denominators never raise: with no instructions the per-instruction
    rates are 0 and the window is flagged; a zero reference count makes its
    miss rate 0.  CPU usage is clamped to [0, 1] to absorb counter jitter
    from turbo frequencies.
    """
    inst = sample.instructions
    flagged = inst == 0

    v1 = _ratio(sample.cache_refs, inst)
    v2 = _ratio(sample.branches, inst)
    v3 = _ratio(sample.llc_loads, inst)
    v4 = _ratio(sample.llc_stores, inst)

    v5 = _ratio(sample.cache_misses, sample.cache_refs)
    v6 = _ratio(sample.branch_misses, sample.branches)
    v7 = _ratio(sample.llc_load_misses, sample.llc_loads)
    v8 = _ratio(sample.llc_store_misses, sample.llc_stores)

    if stats.faults_std > 0:
        v9 = (sample.page_faults - stats.faults_mean) / stats.faults_std
    else:
        v9 = 0.0

    budget = sample.window_seconds * machine.cpu_speed_mhz * 1e6 * machine.cores
    v10 = min(max(sample.cycles / budget, 0.0), 1.0)

    return VariableVector(
        v1=v1, v2=v2, v3=v3, v4=v4, v5=v5, v6=v6, v7=v7, v8=v8,
        v9=v9, v10=v10, flagged=flagged,
    )
