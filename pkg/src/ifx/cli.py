"""Command-line frontend for the four-phase methodology.

Subcommands map onto the pipeline phases: ``profile`` turns traces into
interference profiles, ``bench`` aligns co-runs into observations,
``fit`` estimates the interference coefficients, ``predict`` applies them
to a pairing, ``eval`` scores predictions against measurements, ``synth``
generates ground-truth scenario bundles, and ``report`` renders the
paper-style tables, plot-data CSVs and figures for a whole scenario.

Exit codes: 0 success, 1 usage error, 2 data or validation error.  All
outputs are written atomically (temp file + rename) and are byte-stable
for identical inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plots
from .benchmarking import (
    bench_wait_time,
    build_observations,
    co_run_series,
    observations_from_dict,
    observations_to_dict,
)
from .cfa import paper_preset
from .errors import IfxError
from .indices import apply_bundle, build_bundle, bundle_from_dict, bundle_to_dict
from .metrics import (
    evaluate,
    format_csv,
    format_table,
    ratio_rows,
    ratio_table,
    series_csv,
)
from .prediction import (
    estimate_execution_time,
    prediction_series_csv,
    prediction_to_dict,
    sampling_sensitivity,
)
from .profiles import make_profile, profile_from_dict, profile_to_dict, resample
from .regression import fit_model, fit_single_model
from .regression import model_from_dict as regression_model_from_dict
from .regression import model_to_dict as regression_model_to_dict
from .synth import build_scenario, demo_scenario_spec, scenario_spec_from_dict
from .traces import parse_trace_csv, validate_trace
from .variables import compute_dataset_stats


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_atomic(path: Path, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _write_atomic(path, json.dumps(payload, indent=2) + "\n")


def _read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _read_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _merge_config(args: argparse.Namespace) -> None:
    """Fill options still at None from the config file; flags win."""
    if not getattr(args, "config", None):
        return
    values = _read_config(args.config)
    casts = {
        "jobs": int,
        "seed": int,
        "delay": int,
        "noise": float,
        "period": float,
        "sampling_scenario": int,
    }
    for key, raw in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            cast = casts.get(attr, str)
            setattr(args, attr, cast(raw))


def _load_trace(path):
    with open(path, "r", encoding="utf-8") as handle:
        trace = parse_trace_csv(handle.read())
    report = validate_trace(trace)
    for warning in report.warnings:
        print(f"{path}: warning: {warning}", file=sys.stderr)
    if report.errors:
        raise IfxError(f"{path}: " + "; ".join(report.errors))
    return trace


def _resolve_bundle(model_arg: str, traces):
    if model_arg == "preset":
        model, scores = paper_preset()
        stats = compute_dataset_stats(traces)
        return build_bundle(traces, model, scores, stats)
    return bundle_from_dict(_read_json(model_arg))


# ------------------------------------------------------------------ profile

def _cmd_profile(args) -> int:
    traces = [_load_trace(p) for p in args.trace]
    bundle = _resolve_bundle(args.model, traces)
    if args.save_bundle:
        _write_json(Path(args.save_bundle), bundle_to_dict(bundle))

    if args.out and len(traces) > 1:
        raise UsageError("--out is for a single trace; use --out-dir for many")
    if not args.out and not args.out_dir:
        raise UsageError("need --out or --out-dir")

    def emit(trace):
        profile = make_profile(apply_bundle(trace, bundle), trace)
        if args.out:
            path = Path(args.out)
        else:
            path = Path(args.out_dir) / f"{trace.app_name}.profile.json"
        _write_json(path, profile_to_dict(profile))
        return path

    jobs = args.jobs or 1
    if jobs > 1 and len(traces) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            paths = list(pool.map(emit, traces))
    else:
        paths = [emit(t) for t in traces]
    for path in paths:
        print(path)
    return 0


# -------------------------------------------------------------------- bench

def _cmd_bench(args) -> int:
    profile = profile_from_dict(_read_json(args.profile))
    co_runs = {}
    for item in args.co:
        if "=" not in item:
            raise UsageError(f"--co expects name=trace.csv, got {item!r}")
        name, _, path = item.partition("=")
        co_runs[name] = co_run_series(_load_trace(path))
    obs = build_observations(
        profile.app_name,
        profile.total_instructions,
        co_runs,
        profile.sampling_period_s,
    )
    _write_json(Path(args.out), observations_to_dict(obs))
    if len(obs.benchmark_names) == 3:
        wait = bench_wait_time(obs.tau[-1, :])
        print(f"benchmark wait time: {wait!r} s")
    print(args.out)
    return 0


# ---------------------------------------------------------------- scenarios

def _load_scenario_dir(directory):
    directory = Path(directory)
    profile = profile_from_dict(_read_json(directory / "profile.json"))
    obs = observations_from_dict(_read_json(directory / "observations.json"))
    benches = [
        profile_from_dict(_read_json(directory / "benchmarks" / f"{name}.profile.json"))
        for name in obs.benchmark_names
    ]
    return profile, benches, obs


def _cmd_fit(args) -> int:
    datasets = [_load_scenario_dir(d) for d in args.scenario]
    if args.single:
        model = fit_single_model(datasets)
    else:
        if len(datasets) != 1:
            raise UsageError("fit one scenario at a time, or pass --single to pool")
        model = fit_model(*datasets[0])
    _write_json(Path(args.out), regression_model_to_dict(model))
    print(args.out)
    return 0


# ------------------------------------------------------------------ predict

def _parse_periods(text: str) -> list[float]:
    try:
        periods = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--periods expects comma-separated numbers, got {text!r}")
    if not periods:
        raise UsageError("--periods is empty")
    return periods


def _cmd_predict(args) -> int:
    model = regression_model_from_dict(_read_json(args.model))
    profile_a = profile_from_dict(_read_json(args.profile_a))
    profile_b = profile_from_dict(_read_json(args.profile_b))
    delay = args.delay if args.delay is not None else 0

    if args.period is not None:
        if args.period <= 0:
            raise UsageError("--period must be positive")
        profile_a = resample(profile_a, args.period)
        profile_b = resample(profile_b, args.period)

    pred = estimate_execution_time(model, profile_a, profile_b, delay_k=delay)
    payload = prediction_to_dict(pred, model.scope)

    if args.periods:
        periods = _parse_periods(args.periods)
        scenarios = (1, 2) if args.sampling_scenario is None else (args.sampling_scenario,)
        table: dict[float, dict] = {}
        for scenario in scenarios:
            for row in sampling_sensitivity(model, profile_a, profile_b, periods, scenario):
                entry = table.setdefault(
                    row.period_s, {"n": row.n, "s": row.period_s}
                )
                entry[f"scenario{scenario}"] = row.total_time_s
                if scenario == 2:
                    entry["n"] = row.n
        payload["sampling_study"] = [table[p] for p in periods]

    _write_json(Path(args.out), payload)
    if args.csv:
        _write_atomic(Path(args.csv), prediction_series_csv(pred))
    print(args.out)
    return 0


# --------------------------------------------------------------------- eval

def _cmd_eval(args) -> int:
    obs = observations_from_dict(_read_json(args.obs))
    pred_data = _read_json(args.pred)
    delta_hat = np.array(pred_data["delta_hat"], dtype=float)
    _, delta = obs.column(args.benchmark)
    report = evaluate(delta, delta_hat, obs.s_A)
    payload = {
        "app": obs.app_name,
        "benchmark": args.benchmark,
        "me": report.me,
        "mse": report.mse,
        "acc": report.acc,
        "epsilon": report.epsilon,
        "epsilon_definition": "n * sA * ME, the measured-minus-estimated total time",
        "n": report.n,
        "sA": report.s_A,
        "measured_total_s": float(delta.sum() * obs.s_A),
        "estimated_total_s": float(delta_hat.sum() * obs.s_A),
    }
    _write_json(Path(args.out), payload)
    if args.series:
        times = obs.s_A * np.arange(1, report.n + 1)
        _write_atomic(Path(args.series), series_csv(times, delta, delta_hat))
    print(args.out)
    return 0


# -------------------------------------------------------------------- synth

def _cmd_synth(args) -> int:
    if args.demo and args.spec:
        raise UsageError("--demo and --spec are mutually exclusive")
    if args.demo:
        seed = args.seed if args.seed is not None else 7
        noise = args.noise if args.noise is not None else 0.0
        app_spec, bench_specs, truth = demo_scenario_spec(seed=seed, noise_sigma=noise)
    elif args.spec:
        app_spec, bench_specs, truth = scenario_spec_from_dict(_read_json(args.spec))
        if args.seed is not None:
            app_spec = type(app_spec)(
                name=app_spec.name,
                shapes=app_spec.shapes,
                duration_s=app_spec.duration_s,
                sampling_period_s=app_spec.sampling_period_s,
                seed=args.seed,
            )
    else:
        raise UsageError("need --spec scenario.json or --demo")

    scenario = build_scenario(app_spec, bench_specs, truth)
    out = Path(args.out_dir)
    _write_json(out / "profile.json", profile_to_dict(scenario.app))
    for bench in scenario.benchmarks:
        _write_json(
            out / "benchmarks" / f"{bench.app_name}.profile.json",
            profile_to_dict(bench),
        )
    _write_json(out / "observations.json", observations_to_dict(scenario.observations))
    _write_json(
        out / "truth.json",
        {
            "beta": scenario.truth.beta_true.tolist(),
            "noise_sigma": scenario.truth.noise_sigma,
        },
    )
    print(out)
    return 0


# ------------------------------------------------------------------- report

def _cmd_report(args) -> int:
    profile, benches, obs = _load_scenario_dir(args.scenario)
    model = regression_model_from_dict(_read_json(args.model))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s_a = obs.s_A
    times = s_a * np.arange(1, obs.n_intervals + 1)

    def analyze(pair):
        j, bench = pair
        pred = estimate_execution_time(model, profile, bench)
        delta = obs.delta[:, j]
        cut = min(len(delta), len(pred.delta_hat))
        report = evaluate(delta[:cut], pred.delta_hat[:cut], s_a)
        return bench, pred, report, delta

    jobs = args.jobs or 1
    pairs = list(enumerate(benches))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(analyze, pairs))
    else:
        results = [analyze(p) for p in pairs]

    solo = {profile.app_name: profile.total_time_s}
    cosched = {
        profile.app_name: {
            bench.app_name: float(obs.tau[-1, j]) for j, bench in enumerate(benches)
        }
    }
    ratios = ratio_table(solo, cosched)
    ratio_headers = ["app", "T_A"]
    for bench in benches:
        ratio_headers += [f"T_with_{bench.app_name}", f"ratio_{bench.app_name}"]
    _write_atomic(out / "ratios.csv", format_csv(ratio_headers, ratio_rows(ratios)))
    _write_atomic(out / "ratios.txt", format_table(ratio_headers, ratio_rows(ratios)))

    metric_headers = ["benchmark", "me", "mse", "acc", "epsilon"]
    metric_rows = [
        [bench.app_name, report.me, report.mse, report.acc, report.epsilon]
        for bench, _, report, _ in results
    ]
    _write_atomic(out / "metrics.csv", format_csv(metric_headers, metric_rows))
    _write_atomic(out / "metrics.txt", format_table(metric_headers, metric_rows))

    time_headers = ["benchmark", "measured_s", "estimated_s"]
    time_rows = [
        [bench.app_name, float(obs.tau[-1, j]), pred.total_time_s]
        for j, (bench, pred, _, _) in enumerate(results)
    ]
    _write_atomic(out / "times.csv", format_csv(time_headers, time_rows))
    _write_atomic(out / "times.txt", format_table(time_headers, time_rows))

    for bench, pred, _, delta in results:
        cut = min(len(delta), len(pred.delta_hat))
        _write_atomic(
            out / f"series_{bench.app_name}.csv",
            series_csv(times[:cut], delta[:cut], pred.delta_hat[:cut]),
        )

    _write_atomic(
        out / f"fig_profile_{profile.app_name}.png", plots.profile_figure(profile)
    )
    for bench in benches:
        _write_atomic(
            out / f"fig_profile_{bench.app_name}.png", plots.profile_figure(bench)
        )
    for bench, pred, _, delta in results:
        cut = min(len(delta), len(pred.delta_hat))
        _write_atomic(
            out / f"fig_delta_{bench.app_name}.png",
            plots.delta_figure(
                times[:cut],
                delta[:cut],
                pred.delta_hat[:cut],
                f"{profile.app_name} with {bench.app_name}",
            ),
        )

    print(out)
    return 0


# -------------------------------------------------------------------- wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="ifx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--jobs", type=int, default=None, help="parallel work items")

    p = sub.add_parser("profile", help="trace CSV -> interference profile JSON")
    common(p)
    p.add_argument("--trace", action="append", required=True, help="trace CSV path")
    p.add_argument(
        "--model",
        default="preset",
        help="'preset' (published parameters, CDFs from the input traces) "
        "or a bundle JSON path",
    )
    p.add_argument("--out", help="output profile JSON (single trace)")
    p.add_argument("--out-dir", help="output directory (one file per app)")
    p.add_argument("--save-bundle", help="also write the model bundle JSON here")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("bench", help="co-run traces -> observations JSON")
    common(p)
    p.add_argument("--profile", required=True, help="solo profile JSON of the app")
    p.add_argument(
        "--co",
        action="append",
        required=True,
        help="name=trace.csv for one co-run (repeatable)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("fit", help="scenario dir(s) -> interference model JSON")
    common(p)
    p.add_argument("--scenario", action="append", required=True, help="scenario dir")
    p.add_argument("--single", action="store_true", help="pool all scenarios")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="model + two profiles -> prediction JSON")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--profile-a", required=True)
    p.add_argument("--profile-b", required=True)
    p.add_argument("--delay", type=int, default=None, help="co-runner head start, in its intervals")
    p.add_argument(
        "--period",
        type=float,
        default=None,
        help="resample both profiles to this sampling period before predicting",
    )
    p.add_argument("--periods", help="comma-separated sampling periods to study")
    p.add_argument(
        "--sampling-scenario",
        type=int,
        choices=(1, 2),
        default=None,
        help="restrict the --periods study to one scenario (default: both)",
    )
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write the per-interval series CSV")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="observations + prediction -> error report")
    common(p)
    p.add_argument("--obs", required=True)
    p.add_argument("--benchmark", required=True, help="observation column to score")
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--series", help="also write the (t, delta, delta_hat) CSV")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="scenario spec -> synthetic scenario bundle")
    common(p)
    p.add_argument("--spec", help="scenario spec JSON")
    p.add_argument("--demo", action="store_true", help="use the built-in demo scenario")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", type=float, default=None, help="delta noise sigma (demo)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="scenario + model -> tables, CSVs and figures")
    common(p)
    p.add_argument("--scenario", required=True, help="scenario dir")
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"ifx: usage error: {exc}", file=sys.stderr)
        return 1
    except (IfxError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"ifx: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
