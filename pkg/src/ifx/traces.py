"""Hardware-counter trace ingestion.

A trace is a sequence of fixed-length sampling windows, each carrying the
raw event totals observed in that window, plus the machine description and
the total solo execution time of the run.

The on-disk interchange is a small CSV dialect::

    # app=<name> sA=<float> cores=<int> mhz=<float> total_time=<float>
    window,seconds,cycles,instructions,cache_refs,cache_misses,llc_loads,\
llc_load_misses,llc_stores,llc_store_misses,branches,branch_misses,page_faults
    0,5.0,17500000000,9000000000,...

UTF-8, ``.`` decimal separator, LF line endings.  The machine label is not
part of the format; round-trips are exact for traces with an empty label.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

TRACE_COLUMNS = (
    "window",
    "seconds",
    "cycles",
    "instructions",
    "cache_refs",
    "cache_misses",
    "llc_loads",
    "llc_load_misses",
    "llc_stores",
    "llc_store_misses",
    "branches",
    "branch_misses",
    "page_faults",
)

_COUNT_FIELDS = TRACE_COLUMNS[2:]

# miss counter -> its reference counter; a miss can never exceed what was tried
_MONOTONE_PAIRS = (
    ("cache_misses", "cache_refs"),
    ("llc_load_misses", "llc_loads"),
    ("llc_store_misses", "llc_stores"),
    ("branch_misses", "branches"),
)

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class MachineSpec:
    """Host machine description: core count and nominal CPU speed in MHz."""

    cores: int
    cpu_speed_mhz: float
    label: str = ""


@dataclass(frozen=True)
class RawSample:
    """Event totals for one sampling window."""

    window_index: int
    window_seconds: float
    cycles: int
    instructions: int
    cache_refs: int
    cache_misses: int
    llc_loads: int
    llc_load_misses: int
    llc_stores: int
    llc_store_misses: int
    branches: int
    branch_misses: int
    page_faults: int


@dataclass(frozen=True)
class RawTrace:
    """A solo run: ordered windows plus machine and timing metadata."""

    app_name: str
    machine: MachineSpec
    sampling_period_s: float
    samples: tuple[RawSample, ...]
    total_time_s: float


@dataclass
class ValidationReport:
    """Diagnostics from :func:`validate_trace`; empty means a clean trace."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def is_clean(self) -> bool:
        return not self.errors and not self.warnings

    def entries(self) -> list[str]:
        return [f"error: {e}" for e in self.errors] + [
            f"warning: {w}" for w in self.warnings
        ]


def _parse_count(text: str, column: str, line: int) -> int:
    """Parse an event count with 64-bit unsigned semantics."""
    text = text.strip()
    try:
        value = int(text)
    except ValueError:
        try:
            as_float = float(text)
        except ValueError:
            raise ParseError(f"non-numeric value {text!r} in column {column}", line)
        if not as_float.is_integer():
            raise ParseError(
                f"non-integer count {text!r} in column {column}", line
            )
        value = int(as_float)
    if value < 0:
        raise ValidationError(f"line {line}: negative count in column {column}")
    if value > _UINT64_MAX:
        raise ParseError(f"count overflows 64 bits in column {column}", line)
    return value


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} in column {column}", line)


def _parse_header_meta(line_text: str) -> dict[str, str]:
    meta = {}
    for token in line_text.lstrip("#").split():
        if "=" not in token:
            raise ParseError(f"malformed header token {token!r}", 1)
        key, _, value = token.partition("=")
        meta[key] = value
    missing = {"app", "sA", "cores", "mhz", "total_time"} - meta.keys()
    if missing:
        raise ParseError(f"header missing keys: {', '.join(sorted(missing))}", 1)
    return meta


def parse_trace_csv(text: str) -> RawTrace:
    """Parse Trace CSV text into a :class:`RawTrace`.

    Raises :class:`ParseError` for structural problems (carrying the line
    number) and :class:`ValidationError` when a miss counter exceeds its
    reference counter.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParseError("expected '# app=... sA=...' comment header", 1)
    meta = _parse_header_meta(lines[0])

    sampling_period = _parse_float(meta["sA"], "sA", 1)
    if sampling_period <= 0:
        raise ValidationError("sampling period sA must be positive")
    cores = _parse_count(meta["cores"], "cores", 1)
    if cores < 1:
        raise ValidationError("machine must have at least one core")
    mhz = _parse_float(meta["mhz"], "mhz", 1)
    if mhz <= 0:
        raise ValidationError("cpu speed must be positive")
    total_time = _parse_float(meta["total_time"], "total_time", 1)

    if len(lines) < 2 or tuple(lines[1].strip().split(",")) != TRACE_COLUMNS:
        raise ParseError(
            "expected column header " + ",".join(TRACE_COLUMNS), 2
        )

    samples = []
    previous_window = None
    for offset, row in enumerate(lines[2:], start=3):
        if not row.strip():
            continue
        fields = row.split(",")
        if len(fields) != len(TRACE_COLUMNS):
            raise ParseError(
                f"expected {len(TRACE_COLUMNS)} columns, got {len(fields)}", offset
            )
        window = _parse_count(fields[0], "window", offset)
        seconds = _parse_float(fields[1], "seconds", offset)
        if seconds <= 0:
            raise ValidationError(f"line {offset}: window_seconds must be positive")
        counts = {
            name: _parse_count(value, name, offset)
            for name, value in zip(_COUNT_FIELDS, fields[2:])
        }
        for miss, ref in _MONOTONE_PAIRS:
            if counts[miss] > counts[ref]:
                raise ValidationError(f"line {offset}: {miss} exceeds {ref}")
        if previous_window is not None and window <= previous_window:
            raise ParseError("window indices must be strictly increasing", offset)
        previous_window = window
        samples.append(RawSample(window_index=window, window_seconds=seconds, **counts))

    if not samples:
        raise ParseError("trace has no sample rows", len(lines))

    return RawTrace(
        app_name=meta["app"],
        machine=MachineSpec(cores=cores, cpu_speed_mhz=mhz),
        sampling_period_s=sampling_period,
        samples=tuple(samples),
        total_time_s=total_time,
    )


def render_trace_csv(trace: RawTrace) -> str:
    """Render a trace back to Trace CSV; inverse of :func:`parse_trace_csv`."""
    lines = [
        "# app={} sA={!r} cores={} mhz={!r} total_time={!r}".format(
            trace.app_name,
            trace.sampling_period_s,
            trace.machine.cores,
            trace.machine.cpu_speed_mhz,
            trace.total_time_s,
        ),
        ",".join(TRACE_COLUMNS),
    ]
    for s in trace.samples:
        lines.append(
            ",".join(
                [
                    str(s.window_index),
                    repr(s.window_seconds),
                    str(s.cycles),
                    str(s.instructions),
                    str(s.cache_refs),
                    str(s.cache_misses),
                    str(s.llc_loads),
                    str(s.llc_load_misses),
                    str(s.llc_stores),
                    str(s.llc_store_misses),
                    str(s.branches),
                    str(s.branch_misses),
                    str(s.page_faults),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def validate_trace(trace: RawTrace) -> ValidationReport:
    """Audit a trace against its documented invariants.

    Returns diagnostics instead of raising so programmatically built traces
    can be checked too.  Zero-instruction windows are warnings (they are
    legal but degrade downstream variables); everything else is an error.
    """
    report = ValidationReport()
    if not trace.samples:
        report.errors.append("trace has no samples")
        return report
    if trace.sampling_period_s <= 0:
        report.errors.append("sampling_period_s must be positive")
    if trace.machine.cores < 1:
        report.errors.append("machine must have at least one core")
    if trace.machine.cpu_speed_mhz <= 0:
        report.errors.append("cpu_speed_mhz must be positive")

    for k, s in enumerate(trace.samples):
        if s.window_seconds <= 0:
            report.errors.append(f"window {k}: window_seconds must be positive")
        last = k == len(trace.samples) - 1
        if not last and s.window_seconds != trace.sampling_period_s:
            report.errors.append(
                f"window {k}: window_seconds {s.window_seconds} != sampling period"
            )
        if last and s.window_seconds > trace.sampling_period_s:
            report.errors.append(
                f"window {k}: final window longer than sampling period"
            )
        for name in _COUNT_FIELDS:
            if getattr(s, name) < 0:
                report.errors.append(f"window {k}: negative count in {name}")
        for miss, ref in _MONOTONE_PAIRS:
            if getattr(s, miss) > getattr(s, ref):
                report.errors.append(f"window {k}: {miss} exceeds {ref}")
        if s.instructions == 0:
            report.warnings.append(f"zero-instruction window {k}")

    min_time = (len(trace.samples) - 1) * trace.sampling_period_s
    if trace.total_time_s < min_time:
        report.errors.append(
            f"total_time_s {trace.total_time_s} shorter than "
            f"{len(trace.samples) - 1} full windows"
        )
    return report


def window_end_times(trace: RawTrace) -> list[float]:
    """Cumulative wall-clock time at the end of each window."""
    times = []
    acc = 0.0
    for s in trace.samples:
        acc += s.window_seconds
        times.append(acc)
    return times


def cumulative_instructions(trace: RawTrace) -> list[int]:
    """Prefix sums of the instruction counts, one entry per window."""
    totals = []
    acc = 0
    for s in trace.samples:
        acc += s.instructions
        totals.append(acc)
    return totals
