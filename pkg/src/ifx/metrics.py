"""Error metrics and paper-style report tables.

The total-time residual is computed as n * s_A * ME, which equals the
direct difference between measured and estimated total times by the
telescoping of the per-interval deltas; both forms are asserted against
each other in the test suite.  Accuracy is 1 - MRE and is reported
unclamped (it goes negative when the mean relative error exceeds 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class EvaluationReport:
    """Interval-level error metrics for one measured/estimated pair."""

    me: float
    mse: float
    acc: float
    epsilon: float
    n: int
    s_A: float


def evaluate(delta, delta_hat, s_A: float) -> EvaluationReport:
    """ME, MSE, Acc = 1 - MRE, and the total-time residual."""
    measured = np.asarray(delta, dtype=float)
    estimated = np.asarray(delta_hat, dtype=float)
    if measured.shape != estimated.shape or measured.ndim != 1 or measured.size < 1:
        raise DataError(
            f"need equal-length vectors, got {measured.shape} and {estimated.shape}"
        )
    if np.any(measured <= 0):
        raise DataError("measured deltas must be positive")
    if s_A <= 0:
        raise DataError("sampling period must be positive")
    n = measured.size
    diff = measured - estimated
    me = float(diff.mean())
    mse = float((diff**2).mean())
    acc = float(1.0 - (np.abs(diff) / measured).mean())
    return EvaluationReport(
        me=me, mse=mse, acc=acc, epsilon=n * s_A * me, n=n, s_A=s_A
    )


@dataclass(frozen=True)
class RatioRow:
    """Solo time, co-scheduled times and their degradation ratios."""

    app_name: str
    solo_time_s: float
    cosched_times_s: tuple[float, ...]
    ratios: tuple[float, ...]


def ratio_table(solo_times: dict[str, float], cosched_times: dict[str, dict[str, float]]):
    """Overall degradation ratios T_AB / T_A per application and co-runner.

    ``cosched_times[app]`` maps co-runner names to total times.  Raw ratios
    are kept; rendering rounds to two decimals.
    """
    rows = []
    for app, t_solo in solo_times.items():
        if t_solo <= 0:
            raise DataError(f"solo time for {app!r} must be positive")
        pairs = cosched_times.get(app, {})
        times = tuple(float(t) for t in pairs.values())
        if any(t <= 0 for t in times):
            raise DataError(f"co-scheduled times for {app!r} must be positive")
        rows.append(
            RatioRow(
                app_name=app,
                solo_time_s=float(t_solo),
                cosched_times_s=times,
                ratios=tuple(t / t_solo for t in times),
            )
        )
    return rows


def format_table(headers, rows) -> str:
    """Aligned-text table; numeric cells rendered with two decimals."""
    def cell(value):
        if isinstance(value, float):
            return f"{value:.2f}"
        return str(value)

    text_rows = [[cell(v) for v in row] for row in rows]
    widths = [
        max(len(h), *(len(r[i]) for r in text_rows)) if text_rows else len(h)
        for i, h in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in text_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def format_csv(headers, rows) -> str:
    """Delimited form of the same table; floats keep full precision."""
    def cell(value):
        if isinstance(value, float):
            return repr(float(value))
        return str(value)

    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    return "\n".join(lines) + "\n"


def ratio_rows(table) -> list[list]:
    """Flatten RatioRows for rendering, interleaving times and ratios."""
    rows = []
    for r in table:
        row: list = [r.app_name, r.solo_time_s]
        for t, ratio in zip(r.cosched_times_s, r.ratios):
            row += [t, ratio]
        rows.append(row)
    return rows


def series_csv(times, delta, delta_hat) -> str:
    """Plot-data CSV with measured and estimated deltas per interval."""
    measured = np.asarray(delta, dtype=float)
    estimated = np.asarray(delta_hat, dtype=float)
    t = np.asarray(times, dtype=float)
    if not (t.shape == measured.shape == estimated.shape):
        raise DataError("times, delta and delta_hat must have equal lengths")
    lines = ["t,delta,delta_hat"]
    for ti, d, dh in zip(t, measured, estimated):
        lines.append(f"{float(ti)!r},{float(d)!r},{float(dh)!r}")
    return "\n".join(lines) + "\n"
