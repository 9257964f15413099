"""From per-window variables to the four interference indices.

The CPU-usage index is the clamped usage fraction itself.  The other three
are built in two steps: a raw score in log space (page-fault score, and the
two factor scores over the log access rates and log miss rates), then a
normalization to [0, 1] through an empirical CDF fitted on a reference
dataset.  The CDF uses plotting positions (k - 0.5)/n with linear
interpolation between order statistics and clamping outside the observed
support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cfa import MeasurementModel, ScoreMatrix, model_from_dict, model_to_dict
from .errors import DataError
from .traces import RawTrace
from .variables import DatasetStats, VariableVector, derive_variables

# floor for log arguments; keeps idle windows finite instead of -inf
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class RawIndexVector:
    """Pre-normalization index values for one window.

    ``floored`` marks windows where a log argument hit the floor (zero rate
    or a fault score at or below -1).
    """

    i1: float
    i2_hat: float
    i3_hat: float
    i4_hat: float
    floored: bool = False


@dataclass(frozen=True)
class IndexVector:
    """The four normalized indices, each in [0, 1]."""

    i1: float
    i2: float
    i3: float
    i4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.i1, self.i2, self.i3, self.i4)


@dataclass(frozen=True)
class IndexTrace:
    """Index time series for one application run."""

    app_name: str
    sampling_period_s: float
    rows: tuple[IndexVector, ...]


@dataclass(frozen=True)
class EmpiricalCdf:
    """Interpolated empirical CDF over a finite sample.

    ``support`` holds the distinct sample values ascending; ``positions``
    the plotting position of each (ties collapsed to their mean position).
    """

    support: np.ndarray
    positions: np.ndarray


def build_cdf(samples) -> EmpiricalCdf:
    """Fit an empirical CDF with plotting positions (k - 0.5)/n."""
    values = np.sort(np.asarray(list(samples), dtype=float))
    n = values.size
    if n < 2:
        raise DataError(f"need at least 2 samples to build a CDF, got {n}")
    positions = (np.arange(1, n + 1) - 0.5) / n
    support, start = np.unique(values, return_index=True)
    if support.size < 2:
        raise DataError("all CDF samples are equal; distribution is degenerate")
    # mean plotting position of each tie group
    bounds = np.append(start, n)
    collapsed = np.array(
        [positions[a:b].mean() for a, b in zip(bounds[:-1], bounds[1:])]
    )
    return EmpiricalCdf(support=support, positions=collapsed)


def cdf_transform(cdf: EmpiricalCdf, x: float) -> float:
    """P(X <= x): interpolated within the support, 0/1 outside it."""
    return float(
        np.interp(x, cdf.support, cdf.positions, left=0.0, right=1.0)
    )


def _log_floored(value: float) -> tuple[float, bool]:
    if value < LOG_FLOOR:
        return math.log(LOG_FLOOR), True
    return math.log(value), False


def raw_indices(
    v: VariableVector, model: MeasurementModel, scores: ScoreMatrix
) -> RawIndexVector:
    """Raw CPU, fault, access-intensity and miss-intensity scores.

    The access score weights centered log rates ln(v1..v4) - mu by the
    first score row; the miss score weights ln(v5..v8) - mu by the second.
    """
    if model.p != 8 or model.m != 2 or scores.b.shape != (2, 8):
        raise DataError("index pipeline requires the 8-variable 2-factor model")

    i2_hat, floored = _log_floored(v.v9 + 1.0)

    values = v.as_tuple()
    i3_hat = 0.0
    for i in range(4):
        log_v, hit = _log_floored(values[i])
        floored = floored or hit
        i3_hat += scores.b[0, i] * (log_v - model.means[i])
    i4_hat = 0.0
    for i in range(4, 8):
        log_v, hit = _log_floored(values[i])
        floored = floored or hit
        i4_hat += scores.b[1, i] * (log_v - model.means[i])

    return RawIndexVector(
        i1=v.v10, i2_hat=i2_hat, i3_hat=i3_hat, i4_hat=i4_hat, floored=floored
    )


@dataclass(frozen=True)
class ReferenceCdfs:
    """The three normalization CDFs, fitted on a reference dataset."""

    fault: EmpiricalCdf
    access: EmpiricalCdf
    miss: EmpiricalCdf


def normalize(raw: RawIndexVector, cdfs: ReferenceCdfs) -> IndexVector:
    """Map raw scores into [0, 1]^4; the CPU index passes through."""
    return IndexVector(
        i1=raw.i1,
        i2=cdf_transform(cdfs.fault, raw.i2_hat),
        i3=cdf_transform(cdfs.access, raw.i3_hat),
        i4=cdf_transform(cdfs.miss, raw.i4_hat),
    )


def index_trace(
    trace: RawTrace,
    model: MeasurementModel,
    scores: ScoreMatrix,
    stats: DatasetStats,
    cdfs: ReferenceCdfs,
) -> IndexTrace:
    """Run the full per-window pipeline over a trace."""
    rows = []
    for sample in trace.samples:
        v = derive_variables(sample, trace.machine, stats)
        rows.append(normalize(raw_indices(v, model, scores), cdfs))
    return IndexTrace(
        app_name=trace.app_name,
        sampling_period_s=trace.sampling_period_s,
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class ModelBundle:
    """Everything needed to index a new trace consistently.

    Bundles the measurement model and score matrix with the fault
    statistics and reference CDFs of the dataset they were fitted on.
    """

    model: MeasurementModel
    scores: ScoreMatrix
    stats: DatasetStats
    cdfs: ReferenceCdfs


def raw_index_populations(
    traces, model: MeasurementModel, scores: ScoreMatrix, stats: DatasetStats
) -> tuple[list[float], list[float], list[float]]:
    """Pooled raw fault/access/miss scores over all windows of all traces."""
    fault, access, miss = [], [], []
    for trace in traces:
        for sample in trace.samples:
            v = derive_variables(sample, trace.machine, stats)
            raw = raw_indices(v, model, scores)
            fault.append(raw.i2_hat)
            access.append(raw.i3_hat)
            miss.append(raw.i4_hat)
    return fault, access, miss


def build_bundle(
    traces, model: MeasurementModel, scores: ScoreMatrix, stats: DatasetStats
) -> ModelBundle:
    """Fit the three reference CDFs on a dataset and assemble a bundle."""
    fault, access, miss = raw_index_populations(list(traces), model, scores, stats)
    return ModelBundle(
        model=model,
        scores=scores,
        stats=stats,
        cdfs=ReferenceCdfs(
            fault=build_cdf(fault), access=build_cdf(access), miss=build_cdf(miss)
        ),
    )


def apply_bundle(trace: RawTrace, bundle: ModelBundle) -> IndexTrace:
    return index_trace(trace, bundle.model, bundle.scores, bundle.stats, bundle.cdfs)


def _cdf_to_dict(cdf: EmpiricalCdf) -> dict:
    return {"support": cdf.support.tolist(), "positions": cdf.positions.tolist()}


def _cdf_from_dict(data: dict) -> EmpiricalCdf:
    return EmpiricalCdf(
        support=np.array(data["support"], dtype=float),
        positions=np.array(data["positions"], dtype=float),
    )


def bundle_to_dict(bundle: ModelBundle) -> dict:
    return {
        "model": model_to_dict(bundle.model, bundle.scores),
        "stats": {
            "faults_mean": bundle.stats.faults_mean,
            "faults_std": bundle.stats.faults_std,
            "sample_count": bundle.stats.sample_count,
        },
        "cdfs": {
            "fault": _cdf_to_dict(bundle.cdfs.fault),
            "access": _cdf_to_dict(bundle.cdfs.access),
            "miss": _cdf_to_dict(bundle.cdfs.miss),
        },
    }


def bundle_from_dict(data: dict) -> ModelBundle:
    model, scores = model_from_dict(data["model"])
    stats = DatasetStats(
        faults_mean=float(data["stats"]["faults_mean"]),
        faults_std=float(data["stats"]["faults_std"]),
        sample_count=int(data["stats"]["sample_count"]),
    )
    cdfs = ReferenceCdfs(
        fault=_cdf_from_dict(data["cdfs"]["fault"]),
        access=_cdf_from_dict(data["cdfs"]["access"]),
        miss=_cdf_from_dict(data["cdfs"]["miss"]),
    )
    return ModelBundle(model=model, scores=scores, stats=stats, cdfs=cdfs)
