import json
from dataclasses import replace

import numpy as np
import pytest

from ifx.cli import run_cli
from ifx.traces import MachineSpec, RawTrace, render_trace_csv

from conftest import make_sample, make_trace


def write_trace(path, trace):
    path.write_text(render_trace_csv(trace))
    return str(path)


def varied_trace(app="app", n_windows=6, seed=0):
    return make_trace(app_name=app, n_windows=n_windows, jitter_seed=seed)


def co_run_trace(app, n_windows, instructions_per_window, s_a=5.0):
    """A slowed-down run: same app, fewer instructions per window."""
    samples = tuple(
        make_sample(window_index=k, instructions=instructions_per_window)
        for k in range(n_windows)
    )
    return RawTrace(
        app_name=app,
        machine=MachineSpec(cores=4, cpu_speed_mhz=3500.0),
        sampling_period_s=s_a,
        samples=samples,
        total_time_s=n_windows * s_a,
    )


def uniform_rate_trace(app, n_windows=6, seed=2):
    """Jittered counters but a constant instruction rate per window."""
    base = varied_trace(app=app, n_windows=n_windows, seed=seed)
    samples = tuple(
        replace(s, instructions=9_000_000_000) for s in base.samples
    )
    return replace(base, samples=samples)


@pytest.fixture
def scenario_dir(tmp_path):
    out = tmp_path / "scenario"
    assert run_cli(["synth", "--demo", "--seed", "3", "--out-dir", str(out)]) == 0
    return out


def test_profile_roundtrip(tmp_path, capsys):
    trace_path = write_trace(tmp_path / "a.csv", varied_trace(seed=1))
    out = tmp_path / "a.profile.json"
    code = run_cli(
        ["profile", "--trace", trace_path, "--model", "preset", "--out", str(out)]
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["app"] == "app"
    assert len(data["y"]) == 6
    assert all(0.0 <= v <= 1.0 for row in data["y"] for v in row)


def test_profile_many_traces_with_bundle(tmp_path):
    paths = [
        write_trace(tmp_path / f"t{k}.csv", varied_trace(app=f"app{k}", seed=k))
        for k in range(3)
    ]
    out_dir = tmp_path / "profiles"
    bundle = tmp_path / "bundle.json"
    argv = ["profile", "--out-dir", str(out_dir), "--save-bundle", str(bundle)]
    for p in paths:
        argv += ["--trace", p]
    assert run_cli(argv) == 0
    assert sorted(p.name for p in out_dir.iterdir()) == [
        "app0.profile.json",
        "app1.profile.json",
        "app2.profile.json",
    ]
    # reusing the saved bundle reproduces the same profiles
    out2 = tmp_path / "profiles2"
    argv = ["profile", "--model", str(bundle), "--out-dir", str(out2)]
    for p in paths:
        argv += ["--trace", p]
    assert run_cli(argv) == 0
    for name in ("app0", "app1", "app2"):
        a = (out_dir / f"{name}.profile.json").read_bytes()
        b = (out2 / f"{name}.profile.json").read_bytes()
        assert a == b


def test_profile_usage_errors(tmp_path):
    trace_path = write_trace(tmp_path / "a.csv", varied_trace())
    assert run_cli(["profile", "--trace", trace_path]) == 1  # no output target
    assert run_cli(["profile", "--out", "x.json"]) == 1  # missing --trace
    assert run_cli(["nonsense"]) == 1


def test_profile_rejects_invalid_trace(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# app=x sA=5 cores=4 mhz=3500 total_time=10\nwrong\n")
    out = tmp_path / "out.json"
    code = run_cli(["profile", "--trace", str(bad), "--out", str(out)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_bench_alignment(tmp_path, capsys):
    solo = write_trace(tmp_path / "solo.csv", uniform_rate_trace("metis"))
    profile_path = tmp_path / "metis.profile.json"
    assert run_cli(["profile", "--trace", solo, "--out", str(profile_path)]) == 0

    # co-runs progress at 2/3 solo speed: every delta is exactly 1.5
    co_paths = {}
    for name in ("povray", "iozone", "stream"):
        co = co_run_trace("metis", n_windows=9, instructions_per_window=6_000_000_000)
        co_paths[name] = write_trace(tmp_path / f"{name}.csv", co)

    obs_path = tmp_path / "obs.json"
    argv = ["bench", "--profile", str(profile_path), "--out", str(obs_path)]
    for name, path in co_paths.items():
        argv += ["--co", f"{name}={path}"]
    assert run_cli(argv) == 0
    data = json.loads(obs_path.read_text())
    assert data["benchmarks"] == ["povray", "iozone", "stream"]
    for column in data["delta"]:
        assert column == pytest.approx([1.5] * 6)
    assert "benchmark wait time" in capsys.readouterr().out


def test_bench_rejects_short_co_run(tmp_path):
    solo = write_trace(tmp_path / "solo.csv", uniform_rate_trace("metis"))
    profile_path = tmp_path / "metis.profile.json"
    assert run_cli(["profile", "--trace", solo, "--out", str(profile_path)]) == 0
    short = co_run_trace("metis", n_windows=2, instructions_per_window=1_000_000_000)
    co = write_trace(tmp_path / "short.csv", short)
    code = run_cli(
        [
            "bench",
            "--profile",
            str(profile_path),
            "--co",
            f"povray={co}",
            "--out",
            str(tmp_path / "obs.json"),
        ]
    )
    assert code == 2


def test_synth_writes_scenario_bundle(scenario_dir):
    assert (scenario_dir / "profile.json").exists()
    assert (scenario_dir / "observations.json").exists()
    assert (scenario_dir / "truth.json").exists()
    benches = sorted(p.name for p in (scenario_dir / "benchmarks").iterdir())
    assert benches == [
        "cache_thrasher.profile.json",
        "cpu_hog.profile.json",
        "mem_streamer.profile.json",
    ]


def test_fit_recovers_demo_truth(scenario_dir, tmp_path):
    model_path = tmp_path / "model.json"
    assert run_cli(
        ["fit", "--scenario", str(scenario_dir), "--out", str(model_path)]
    ) == 0
    model = json.loads(model_path.read_text())
    truth = json.loads((scenario_dir / "truth.json").read_text())
    assert model["scope"] == "app"
    assert np.allclose(model["beta"], truth["beta"], atol=1e-6)


def test_fit_single_pools_scenarios(scenario_dir, tmp_path):
    pooled = tmp_path / "pooled.json"
    code = run_cli(
        [
            "fit",
            "--single",
            "--scenario",
            str(scenario_dir),
            "--scenario",
            str(scenario_dir),
            "--out",
            str(pooled),
        ]
    )
    assert code == 0
    assert json.loads(pooled.read_text())["scope"] == "single"
    # two scenarios without --single is a usage error
    assert (
        run_cli(
            [
                "fit",
                "--scenario",
                str(scenario_dir),
                "--scenario",
                str(scenario_dir),
                "--out",
                str(tmp_path / "x.json"),
            ]
        )
        == 1
    )


def fitted_model(scenario_dir, tmp_path):
    model_path = tmp_path / "model.json"
    assert run_cli(
        ["fit", "--scenario", str(scenario_dir), "--out", str(model_path)]
    ) == 0
    return model_path


def test_predict_and_eval(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    pred_path = tmp_path / "pred.json"
    csv_path = tmp_path / "pred.csv"
    code = run_cli(
        [
            "predict",
            "--model",
            str(model_path),
            "--profile-a",
            str(scenario_dir / "profile.json"),
            "--profile-b",
            str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
            "--out",
            str(pred_path),
            "--csv",
            str(csv_path),
        ]
    )
    assert code == 0
    pred = json.loads(pred_path.read_text())
    assert pred["delay_k"] == 0
    assert len(pred["delta_hat"]) == 20
    assert csv_path.read_text().splitlines()[0] == "t,delta_hat"

    eval_path = tmp_path / "eval.json"
    series_path = tmp_path / "series.csv"
    code = run_cli(
        [
            "eval",
            "--obs",
            str(scenario_dir / "observations.json"),
            "--benchmark",
            "cpu_hog",
            "--pred",
            str(pred_path),
            "--out",
            str(eval_path),
            "--series",
            str(series_path),
        ]
    )
    assert code == 0
    report = json.loads(eval_path.read_text())
    # the demo scenario is noise free, so the fit is essentially exact
    assert abs(report["me"]) < 1e-6
    assert report["acc"] > 0.999999
    assert series_path.read_text().splitlines()[0] == "t,delta,delta_hat"


def test_predict_with_delay_and_periods(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    pred_path = tmp_path / "pred.json"
    code = run_cli(
        [
            "predict",
            "--model",
            str(model_path),
            "--profile-a",
            str(scenario_dir / "profile.json"),
            "--profile-b",
            str(scenario_dir / "benchmarks" / "mem_streamer.profile.json"),
            "--delay",
            "3",
            "--periods",
            "5,10,20,50,100",
            "--out",
            str(pred_path),
        ]
    )
    assert code == 0
    pred = json.loads(pred_path.read_text())
    assert pred["delay_k"] == 3
    study = pred["sampling_study"]
    assert [row["n"] for row in study] == [20, 10, 5, 2, 1]
    assert all("scenario1" in row and "scenario2" in row for row in study)


def test_predict_with_period_override(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    pred_path = tmp_path / "pred.json"
    code = run_cli(
        [
            "predict",
            "--model",
            str(model_path),
            "--profile-a",
            str(scenario_dir / "profile.json"),
            "--profile-b",
            str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
            "--period",
            "20",
            "--out",
            str(pred_path),
        ]
    )
    assert code == 0
    pred = json.loads(pred_path.read_text())
    assert pred["sA"] == 20.0
    assert len(pred["delta_hat"]) == 5  # 100 s run at 20 s intervals
    assert (
        run_cli(
            [
                "predict",
                "--model",
                str(model_path),
                "--profile-a",
                str(scenario_dir / "profile.json"),
                "--profile-b",
                str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
                "--period",
                "-5",
                "--out",
                str(pred_path),
            ]
        )
        == 1
    )


def test_report_outputs(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    out_dir = tmp_path / "report"
    code = run_cli(
        [
            "report",
            "--scenario",
            str(scenario_dir),
            "--model",
            str(model_path),
            "--out-dir",
            str(out_dir),
        ]
    )
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    for expected in (
        "ratios.csv",
        "ratios.txt",
        "metrics.csv",
        "metrics.txt",
        "times.csv",
        "times.txt",
        "series_cpu_hog.csv",
        "fig_profile_app.png",
        "fig_delta_cpu_hog.png",
    ):
        assert expected in names
    # figures are real PNGs
    magic = (out_dir / "fig_profile_app.png").read_bytes()[:8]
    assert magic == b"\x89PNG\r\n\x1a\n"
    ratios = (out_dir / "ratios.txt").read_text()
    assert "app" in ratios and "ratio" in ratios


def test_config_file_supplies_defaults(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    config = tmp_path / "ifx.conf"
    config.write_text("delay=2\n")
    pred_path = tmp_path / "pred.json"
    code = run_cli(
        [
            "predict",
            "--config",
            str(config),
            "--model",
            str(model_path),
            "--profile-a",
            str(scenario_dir / "profile.json"),
            "--profile-b",
            str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
            "--out",
            str(pred_path),
        ]
    )
    assert code == 0
    assert json.loads(pred_path.read_text())["delay_k"] == 2


def test_flags_override_config(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    config = tmp_path / "ifx.conf"
    config.write_text("delay=2\n")
    pred_path = tmp_path / "pred.json"
    code = run_cli(
        [
            "predict",
            "--config",
            str(config),
            "--delay",
            "5",
            "--model",
            str(model_path),
            "--profile-a",
            str(scenario_dir / "profile.json"),
            "--profile-b",
            str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
            "--out",
            str(pred_path),
        ]
    )
    assert code == 0
    assert json.loads(pred_path.read_text())["delay_k"] == 5


def test_jobs_flag_does_not_change_outputs(tmp_path):
    paths = []
    argv_base = []
    for k in range(4):
        p = write_trace(tmp_path / f"t{k}.csv", varied_trace(app=f"app{k}", seed=k))
        paths.append(p)
        argv_base += ["--trace", p]
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    assert run_cli(["profile", "--out-dir", str(serial), *argv_base]) == 0
    assert run_cli(["profile", "--jobs", "4", "--out-dir", str(parallel), *argv_base]) == 0
    for k in range(4):
        name = f"app{k}.profile.json"
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


def test_missing_file_is_data_error(tmp_path):
    assert (
        run_cli(["profile", "--trace", "nope.csv", "--out", str(tmp_path / "x.json")])
        == 2
    )


def test_synth_from_spec_file(tmp_path):
    from ifx.synth import demo_scenario_spec, scenario_spec_to_dict

    app, benches, truth = demo_scenario_spec(seed=5, noise_sigma=0.01)
    spec_path = tmp_path / "scenario.json"
    spec_path.write_text(json.dumps(scenario_spec_to_dict(app, benches, truth)))

    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run_cli(["synth", "--spec", str(spec_path), "--out-dir", str(out_a)]) == 0
    assert run_cli(["synth", "--spec", str(spec_path), "--out-dir", str(out_b)]) == 0
    obs_a = (out_a / "observations.json").read_bytes()
    assert obs_a == (out_b / "observations.json").read_bytes()

    # a seed override changes the noise draw but stays deterministic
    out_c = tmp_path / "c"
    assert (
        run_cli(
            ["synth", "--spec", str(spec_path), "--seed", "9", "--out-dir", str(out_c)]
        )
        == 0
    )
    assert (out_c / "observations.json").read_bytes() != obs_a


def test_eval_reports_epsilon_definition(scenario_dir, tmp_path):
    model_path = fitted_model(scenario_dir, tmp_path)
    pred_path = tmp_path / "pred.json"
    assert (
        run_cli(
            [
                "predict",
                "--model",
                str(model_path),
                "--profile-a",
                str(scenario_dir / "profile.json"),
                "--profile-b",
                str(scenario_dir / "benchmarks" / "cpu_hog.profile.json"),
                "--out",
                str(pred_path),
            ]
        )
        == 0
    )
    eval_path = tmp_path / "eval.json"
    assert (
        run_cli(
            [
                "eval",
                "--obs",
                str(scenario_dir / "observations.json"),
                "--benchmark",
                "cpu_hog",
                "--pred",
                str(pred_path),
                "--out",
                str(eval_path),
            ]
        )
        == 0
    )
    report = json.loads(eval_path.read_text())
    assert report["epsilon"] == pytest.approx(
        report["measured_total_s"] - report["estimated_total_s"], abs=1e-9
    )
    assert "epsilon_definition" in report
