import json

import numpy as np
import pytest

from ifx.errors import DataError
from ifx.indices import IndexTrace, IndexVector
from ifx.profiles import (
    InterferenceProfile,
    eval_profile,
    interval_count,
    make_profile,
    profile_from_dict,
    profile_to_dict,
    resample,
)

from conftest import make_trace


def profile_from_rows(rows, s_a=5.0, total_time=None, app="app"):
    y = np.array(rows, dtype=float)
    n = y.shape[0]
    return InterferenceProfile(
        app_name=app,
        sampling_period_s=s_a,
        y=y,
        total_time_s=n * s_a if total_time is None else total_time,
        total_instructions=1e9 * np.arange(1, n + 1),
    )


def index_trace_for(raw, rows):
    return IndexTrace(
        app_name=raw.app_name,
        sampling_period_s=raw.sampling_period_s,
        rows=tuple(IndexVector(*r) for r in rows),
    )


def test_make_profile_shapes_and_metadata():
    raw = make_trace(n_windows=3)
    rows = [(0.1, 0.2, 0.3, 0.4)] * 3
    profile = make_profile(index_trace_for(raw, rows), raw)
    assert profile.y.shape == (3, 4)
    assert profile.total_time_s == raw.total_time_s
    assert profile.total_instructions.tolist() == [9e9, 18e9, 27e9]


def test_make_profile_rejects_length_mismatch():
    raw = make_trace(n_windows=3)
    with pytest.raises(DataError):
        make_profile(index_trace_for(raw, [(0.1, 0.2, 0.3, 0.4)] * 2), raw)


def test_make_profile_rejects_app_mismatch():
    raw = make_trace(n_windows=2)
    trace = index_trace_for(raw, [(0.1, 0.2, 0.3, 0.4)] * 2)
    other = IndexTrace(app_name="other", sampling_period_s=5.0, rows=trace.rows)
    with pytest.raises(DataError):
        make_profile(other, raw)


def test_eval_profile_interpolates_and_clamps():
    profile = profile_from_rows([[0.2] * 4, [0.6] * 4])
    assert eval_profile(profile, 1, 7.5) == pytest.approx(0.4)  # midpoint
    assert eval_profile(profile, 1, 5.0) == 0.2  # exact at knot
    assert eval_profile(profile, 1, 0.0) == 0.2  # clamp before first knot
    assert eval_profile(profile, 1, 99.0) == 0.6  # clamp after last knot


def test_eval_profile_exact_at_all_knots():
    rng = np.random.default_rng(5)
    y = rng.uniform(0, 1, size=(9, 4))
    profile = profile_from_rows(y)
    for i in range(9):
        for j in range(4):
            assert eval_profile(profile, j + 1, (i + 1) * 5.0) == y[i, j]


def test_eval_profile_never_overshoots():
    rng = np.random.default_rng(6)
    y = rng.uniform(0, 1, size=(7, 4))
    profile = profile_from_rows(y)
    for t in rng.uniform(0, 40, size=200):
        for j in range(4):
            lo = np.min(y[:, j])
            hi = np.max(y[:, j])
            assert lo - 1e-12 <= eval_profile(profile, j + 1, t) <= hi + 1e-12


def test_eval_profile_validates_index():
    profile = profile_from_rows([[0.5] * 4])
    with pytest.raises(DataError):
        eval_profile(profile, 0, 5.0)
    with pytest.raises(DataError):
        eval_profile(profile, 5, 5.0)


def test_resample_same_period_is_identity():
    rng = np.random.default_rng(7)
    profile = profile_from_rows(rng.uniform(0, 1, size=(6, 4)))
    again = resample(profile, 5.0)
    assert np.allclose(again.y, profile.y)
    assert again.n == profile.n


def test_resample_matches_published_interval_counts():
    # a 17-sample profile at 5 s covers 85 s; coarser periods give the
    # published n column: 9 @ 10 s, 5 @ 20 s, 3 @ 40 s, 1 @ 85 s
    rng = np.random.default_rng(8)
    profile = profile_from_rows(rng.uniform(0, 1, size=(17, 4)))
    assert profile.total_time_s == 85.0
    for period, expected_n in [(5.0, 17), (10.0, 9), (20.0, 5), (40.0, 3), (85.0, 1)]:
        assert resample(profile, period).n == expected_n


def test_resample_linear_profile_is_fixed_point():
    # a profile linear in time re-interpolates exactly at any rate
    n = 11
    t = 5.0 * np.arange(1, n + 1)
    y = np.column_stack([0.01 * t, 0.5 + 0.005 * t, 1 - 0.008 * t, 0.02 * t])
    profile = profile_from_rows(y)
    for period in (2.5, 5.0, 11.0):
        coarse = resample(profile, period)
        times = period * np.arange(1, coarse.n + 1)
        inside = times <= t[-1]  # beyond the last knot the profile clamps
        for j in range(4):
            slope = (y[1, j] - y[0, j]) / 5.0
            expected = y[0, j] + (times[inside] - 5.0) * slope
            clipped = np.clip(expected, min(y[0, j], y[-1, j]), max(y[0, j], y[-1, j]))
            got = np.array([eval_profile(coarse, j + 1, ti) for ti in times[inside]])
            assert np.allclose(got, clipped, atol=1e-12)


def test_resample_twice_is_idempotent():
    rng = np.random.default_rng(9)
    profile = profile_from_rows(rng.uniform(0, 1, size=(12, 4)))
    once = resample(profile, 7.0)
    twice = resample(once, 7.0)
    assert np.allclose(once.y, twice.y)
    assert once.n == twice.n


def test_interval_count_guards_float_noise():
    assert interval_count(85.0, 5.0) == 17
    assert interval_count(85.0, 10.0) == 9
    assert interval_count(0.3, 0.1) == 3
    assert interval_count(12.0, 5.0) == 3


def test_profile_json_round_trip():
    rng = np.random.default_rng(10)
    profile = profile_from_rows(rng.uniform(0, 1, size=(5, 4)))
    payload = json.dumps(profile_to_dict(profile))
    restored = profile_from_dict(json.loads(payload))
    assert json.dumps(profile_to_dict(restored)) == payload
    assert np.array_equal(restored.y, profile.y)


def test_profile_json_validation():
    profile = profile_from_rows([[0.5] * 4])
    data = profile_to_dict(profile)
    bad = dict(data, y=[[0.5, 0.5, 1.5, 0.5]])
    with pytest.raises(DataError):
        profile_from_dict(bad)
    bad = dict(data, instr=[1e9, 5e8])
    with pytest.raises(DataError):
        profile_from_dict(bad)
