"""Figure rendering for the report path.

Figures are drawn with the Agg backend directly onto Figure objects (no
pyplot state) and returned as PNG bytes, so rendering is deterministic,
thread-safe, and leaves file placement to the caller.  Each report figure
sits next to its CSV twin: the profile figure shows the four index series
over the run, and the delta figure overlays measured and estimated
interference per interval.
"""

from __future__ import annotations

import io

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .prediction import Prediction
from .profiles import InterferenceProfile

INDEX_LABELS = ("I1 (cpu)", "I2 (faults)", "I3 (accesses)", "I4 (misses)")
INDEX_COLORS = ("#1f77b4", "#2ca02c", "#ff7f0e", "#d62728")


def _render(fig: Figure) -> bytes:
    FigureCanvasAgg(fig)
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=110)
    return buffer.getvalue()


def profile_figure(profile: InterferenceProfile) -> bytes:
    """Index time series of one application, normalized time on the x axis."""
    fig = Figure(figsize=(7.0, 3.2))
    ax = fig.add_subplot(111)
    t = profile.knot_times() / profile.knot_times()[-1]
    for j in range(4):
        ax.plot(t, profile.y[:, j], label=INDEX_LABELS[j], color=INDEX_COLORS[j])
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("normalized execution time")
    ax.set_ylabel("index value")
    ax.set_title(profile.app_name)
    ax.legend(loc="upper right", ncol=2, fontsize=8)
    fig.tight_layout()
    return _render(fig)


def delta_figure(times, measured, estimated, title: str) -> bytes:
    """Measured vs estimated interference across the run."""
    fig = Figure(figsize=(7.0, 3.2))
    ax = fig.add_subplot(111)
    t = np.asarray(times, dtype=float)
    t = t / t[-1]
    ax.plot(t, measured, color="#1f77b4", label="measured")
    ax.plot(t, estimated, color="#d62728", label="estimated")
    ax.set_xlabel("normalized execution time")
    ax.set_ylabel("interference")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return _render(fig)


def prediction_figure(pred: Prediction) -> bytes:
    """Estimated interference series for one pairing."""
    fig = Figure(figsize=(7.0, 3.2))
    ax = fig.add_subplot(111)
    t = pred.s_A * np.arange(1, len(pred.delta_hat) + 1)
    ax.plot(t, pred.delta_hat, color="#d62728", label="estimated")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("interference")
    ax.set_title(f"{pred.app_a} with {pred.app_b}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return _render(fig)
