import numpy as np
import pytest

from ifx.traces import MachineSpec, RawSample, RawTrace


def make_sample(window_index=0, window_seconds=5.0, **overrides):
    """A plausible busy window; counters overridable per test."""
    counts = dict(
        cycles=35_000_000_000,
        instructions=9_000_000_000,
        cache_refs=90_000_000,
        cache_misses=9_000_000,
        llc_loads=18_000_000,
        llc_load_misses=2_000_000,
        llc_stores=7_000_000,
        llc_store_misses=900_000,
        branches=1_100_000_000,
        branch_misses=22_000_000,
        page_faults=1_500,
    )
    counts.update(overrides)
    return RawSample(window_index=window_index, window_seconds=window_seconds, **counts)


def make_trace(n_windows=4, app_name="app", s_a=5.0, machine=None, jitter_seed=None):
    """A trace of full windows; optional per-window counter variation."""
    if machine is None:
        machine = MachineSpec(cores=4, cpu_speed_mhz=3500.0)
    rng = np.random.default_rng(jitter_seed) if jitter_seed is not None else None
    samples = []
    for k in range(n_windows):
        overrides = {}
        if rng is not None:
            scale = 0.5 + rng.random()
            overrides = dict(
                cycles=int(35e9 * scale),
                instructions=int(9e9 * scale),
                cache_refs=int(9e7 * (0.5 + rng.random())),
                cache_misses=int(4e6 * (0.5 + rng.random())),
                llc_loads=int(1.8e7 * (0.5 + rng.random())),
                llc_load_misses=int(1.5e6 * (0.5 + rng.random())),
                llc_stores=int(7e6 * (0.5 + rng.random())),
                llc_store_misses=int(8e5 * (0.5 + rng.random())),
                branches=int(1.1e9 * (0.5 + rng.random())),
                branch_misses=int(2e7 * (0.5 + rng.random())),
                page_faults=int(rng.integers(100, 5000)),
            )
        samples.append(make_sample(window_index=k, window_seconds=s_a, **overrides))
    return RawTrace(
        app_name=app_name,
        machine=machine,
        sampling_period_s=s_a,
        samples=tuple(samples),
        total_time_s=n_windows * s_a,
    )


@pytest.fixture
def experiment_machine():
    """The experimental platform: four cores at 3500 MHz."""
    return MachineSpec(cores=4, cpu_speed_mhz=3500.0)
