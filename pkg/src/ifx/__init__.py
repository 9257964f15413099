"""Interference indices and execution-time prediction for co-scheduled apps.

The library turns hardware-counter traces into four [0, 1] interference
indices per sampling window, builds piecewise-linear interference profiles
from them, fits a non-negative linear interference model from benchmark
co-runs, and predicts per-interval slowdowns and total execution times for
arbitrary application pairings.
"""

from .benchmarking import (
    BenchmarkObservations,
    align_intervals,
    bench_wait_time,
    build_observations,
    co_run_series,
    interference_deltas,
)
from .cfa import (
    CovarianceMatrix,
    MeasurementModel,
    ScoreMatrix,
    covariance_matrix,
    fit_measurement_model,
    ml_discrepancy,
    paper_preset,
    sample_covariance,
    score,
    score_matrix,
)
from .errors import DataError, FitError, IfxError, ParseError, ValidationError
from .indices import (
    EmpiricalCdf,
    IndexTrace,
    IndexVector,
    ModelBundle,
    RawIndexVector,
    apply_bundle,
    build_bundle,
    build_cdf,
    cdf_transform,
    index_trace,
    raw_indices,
)
from .metrics import EvaluationReport, evaluate, ratio_table
from .prediction import (
    Prediction,
    estimate_delta,
    estimate_execution_time,
    sampling_sensitivity,
)
from .profiles import (
    InterferenceProfile,
    eval_profile,
    interval_count,
    make_profile,
    resample,
)
from .regression import (
    DesignMatrix,
    InterferenceModel,
    assemble_design,
    fit_model,
    fit_single_model,
    nnls,
)
from .synth import (
    GroundTruth,
    Scenario,
    Shape,
    SynthAppSpec,
    build_scenario,
    demo_scenario_spec,
    gen_profile,
    simulate_cosched,
)
from .traces import (
    MachineSpec,
    RawSample,
    RawTrace,
    ValidationReport,
    parse_trace_csv,
    render_trace_csv,
    validate_trace,
)
from .variables import (
    DatasetStats,
    VariableVector,
    compute_dataset_stats,
    derive_variables,
)

__version__ = "0.1.0"
