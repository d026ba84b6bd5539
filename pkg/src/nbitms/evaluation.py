"""Management-system effectiveness scoring.

For each management function k the effectiveness is P(k) = Q(k) * O(k) / C(k):
work quality, times operation rate, over normalized resource cost. Coverage
of the five standard management functions is scored at 20% per function.
Q is measured as a detection-within-deadline ratio (fault) or a commit ratio
(configuration); the definitions and cost capacities are echoed into every
report header so numbers stay comparable.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from nbitms.errors import ConfigError, DomainError
from nbitms.simfleet.agent import FaultKind, InjectionRecord


class ManagementFunction(enum.Enum):
    FAULT = "FAULT"
    CONFIGURATION = "CONFIGURATION"
    ACCOUNTING = "ACCOUNTING"
    PERFORMANCE = "PERFORMANCE"
    SECURITY = "SECURITY"


ALL_FUNCTIONS = tuple(ManagementFunction)
FUNCTION_WEIGHT = 1.0 / len(ALL_FUNCTIONS)  # five equally important functions

# Fault kinds that represent something wrong a monitoring loop should flag.
DETECTABLE_FAULT_KINDS = (FaultKind.SET_VALUE, FaultKind.MUTE)


@dataclass(frozen=True)
class MetricSample:
    function: ManagementFunction
    q: float
    o: float
    c: float
    window: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"quality must be in [0,1], got {self.q}")
        if self.o < 0:
            raise DomainError(f"operation rate must be >= 0, got {self.o}")


def performance(q: float, o: float, c: float) -> float:
    """Effectiveness for one management function: quality * rate / cost."""
    if c <= 0:
        raise DomainError(f"cost must be positive, got {c}")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"quality must be in [0,1], got {q}")
    if o < 0:
        raise DomainError(f"operation rate must be >= 0, got {o}")
    return q * o / c


@dataclass
class ToolProfile:
    tool_name: str
    coverage: frozenset
    samples: dict = field(default_factory=dict)  # ManagementFunction -> MetricSample

    def __post_init__(self):
        self.coverage = frozenset(self.coverage)
        extra = set(self.samples) - self.coverage
        if extra:
            names = ", ".join(sorted(f.value for f in extra))
            raise DomainError(f"{self.tool_name}: samples for uncovered functions: {names}")


def fcaps_score(profile_or_coverage) -> float:
    """Fraction of the five management functions the tool covers (20% each)."""
    if isinstance(profile_or_coverage, ToolProfile):
        coverage = profile_or_coverage.coverage
    else:
        coverage = frozenset(profile_or_coverage)
    return len(coverage) / len(ALL_FUNCTIONS)


@dataclass(frozen=True)
class CostCapacities:
    """Declared capacities that make the cost metric dimensionless."""

    cpu_cores: float = 1.0
    mem_mib: float = 512.0
    bw_mbit: float = 1.0


@dataclass(frozen=True)
class ResourceUsage:
    cpu_seconds: float = 0.0
    mem_peak_bytes: int = 0
    bytes_transferred: int = 0


def cost_metric(usage: ResourceUsage, window_s: float, capacities: CostCapacities) -> float:
    """Equal-weight mean of CPU, memory, and bandwidth utilization over the
    window, each normalized to its declared capacity."""
    if window_s <= 0:
        raise DomainError("window length must be positive")
    cpu_norm = (usage.cpu_seconds / window_s) / capacities.cpu_cores
    mem_norm = usage.mem_peak_bytes / (capacities.mem_mib * 1024 * 1024)
    bw_norm = (usage.bytes_transferred * 8 / window_s) / (capacities.bw_mbit * 1_000_000)
    return (cpu_norm + mem_norm + bw_norm) / 3.0


def measure_fault_window(
    stats,
    injection_log: Iterable[InjectionRecord],
    deadline_s: float,
    window: tuple[float, float],
    capacities: CostCapacities = CostCapacities(),
) -> MetricSample:
    """Fault-management sample from one engine run against the sim fleet.

    Q is the fraction of detectable faults injected inside the window for
    which an alarm opened within deadline_s of the fault's effective time
    (vacuously 1.0 with no faults); O is protocol PDUs per second; C is the
    normalized resource cost.
    """
    start, end = window
    if end <= start:
        raise DomainError("empty measurement window")
    if deadline_s <= 0:
        raise DomainError("deadline must be positive")

    faults = [
        r
        for r in injection_log
        if r.kind in DETECTABLE_FAULT_KINDS and start <= r.effective_at < end
    ]
    alarm_times: dict[str, list[float]] = {}
    for envelope in stats.alarm_opened_events():
        alarm_times.setdefault(envelope.object_id, []).append(envelope.timestamp)

    detected = 0
    for fault in faults:
        object_ids = stats.objects_for_device(fault.device_id)
        hit = any(
            fault.effective_at <= ts <= fault.effective_at + deadline_s
            for object_id in object_ids
            for ts in alarm_times.get(object_id, [])
        )
        if hit:
            detected += 1

    q = detected / len(faults) if faults else 1.0
    o = (stats.pdus_sent + stats.pdus_received) / (end - start)
    usage = ResourceUsage(
        cpu_seconds=stats.cpu_seconds,
        mem_peak_bytes=stats.mem_peak_bytes,
        bytes_transferred=stats.bytes_sent + stats.bytes_received,
    )
    c = cost_metric(usage, end - start, capacities)
    return MetricSample(function=ManagementFunction.FAULT, q=q, o=o, c=c, window=window)


def measure_config_window(
    transaction_log: Iterable[dict],
    window: tuple[float, float],
    usage: ResourceUsage = ResourceUsage(),
    capacities: CostCapacities = CostCapacities(),
) -> MetricSample:
    """Configuration-management sample from the transaction phase log.

    Q is committed/terminal transactions in the window (vacuously 1.0);
    O is directives attempted per second.
    """
    start, end = window
    if end <= start:
        raise DomainError("empty measurement window")

    terminal = {"COMMITTED": 0, "ROLLED_BACK": 0, "FAILED": 0}
    directives_attempted = 0
    for entry in transaction_log:
        ts = entry.get("ts", 0.0)
        if not start <= ts < end:
            continue
        phase = entry.get("phase")
        if phase in terminal:
            terminal[phase] += 1
        if phase == "APPLYING":
            directives_attempted += int(entry.get("directives", 0))

    total_terminal = sum(terminal.values())
    q = terminal["COMMITTED"] / total_terminal if total_terminal else 1.0
    o = directives_attempted / (end - start)
    c = cost_metric(usage, end - start, capacities)
    return MetricSample(function=ManagementFunction.CONFIGURATION, q=q, o=o, c=c, window=window)


@dataclass
class EvalReport:
    per_tool: dict  # tool_name -> {"fcaps_score", "per_function", "aggregate"}
    ranking: list[str]
    window: tuple[float, float]
    notes: dict

    def to_json(self) -> dict:
        return {
            "api_version": "v1",
            "window": list(self.window),
            "notes": self.notes,
            "ranking": self.ranking,
            "tools": {
                name: {
                    "fcaps_score": row["fcaps_score"],
                    "aggregate": row["aggregate"],
                    "per_function": {k.value: v for k, v in row["per_function"].items()},
                    "coverage": sorted(f.value for f in row["coverage"]),
                }
                for name, row in self.per_tool.items()
            },
        }


REPORT_NOTES = {
    "quality_definitions": {
        "FAULT": "alarms opened within deadline / detectable faults injected (1.0 when none)",
        "CONFIGURATION": "committed transactions / terminal transactions (1.0 when none)",
    },
    "aggregate": "equal-weight mean over the five management functions; uncovered functions score 0",
}


def compare_tools(
    profiles: list[ToolProfile],
    window: tuple[float, float] = (0.0, 0.0),
    capacities: Optional[CostCapacities] = None,
) -> EvalReport:
    """Per-function effectiveness and overall ranking for a set of tools.

    Uncovered functions contribute zero; the aggregate is the equal-weight
    mean over all five functions. Ranking is by aggregate descending with
    alphabetical tie-breaks.
    """
    per_tool = {}
    for profile in profiles:
        if profile.tool_name in per_tool:
            raise DomainError(f"duplicate tool name {profile.tool_name!r}")
        per_function = {}
        for function in ALL_FUNCTIONS:
            if function not in profile.coverage:
                per_function[function] = 0.0
                continue
            sample = profile.samples.get(function)
            if sample is None:
                raise DomainError(
                    f"{profile.tool_name}: covered function {function.value} has no sample"
                )
            try:
                per_function[function] = performance(sample.q, sample.o, sample.c)
            except DomainError as exc:
                raise DomainError(f"{profile.tool_name}/{function.value}: {exc}") from None
        aggregate = sum(per_function.values()) * FUNCTION_WEIGHT
        per_tool[profile.tool_name] = {
            "fcaps_score": fcaps_score(profile),
            "per_function": per_function,
            "aggregate": aggregate,
            "coverage": profile.coverage,
        }

    ranking = sorted(per_tool, key=lambda name: (-per_tool[name]["aggregate"], name))
    notes = dict(REPORT_NOTES)
    if capacities is not None:
        notes["capacities"] = {
            "cpu_cores": capacities.cpu_cores,
            "mem_mib": capacities.mem_mib,
            "bw_mbit": capacities.bw_mbit,
        }
    return EvalReport(per_tool=per_tool, ranking=ranking, window=window, notes=notes)


def render_report(report: EvalReport) -> str:
    """Two text tables: coverage/rating per tool, then per-function P(k)."""
    lines = []
    lines.append("Integrated management functions")
    header = f"{'tool':<14}" + "".join(f"{f.value[:4]:>6}" for f in ALL_FUNCTIONS) + f"{'rating':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for name in report.ranking:
        row = report.per_tool[name]
        marks = "".join(
            f"{'x' if f in row['coverage'] else '-':>6}" for f in ALL_FUNCTIONS
        )
        lines.append(f"{name:<14}{marks}{row['fcaps_score'] * 100:>8.0f}%")

    lines.append("")
    lines.append("Aspects of supervision: P(k) = Q(k)*O(k)/C(k)")
    header2 = f"{'tool':<14}" + "".join(f"{f.value[:4]:>10}" for f in ALL_FUNCTIONS) + f"{'aggregate':>12}"
    lines.append(header2)
    lines.append("-" * len(header2))
    for name in report.ranking:
        row = report.per_tool[name]
        cells = "".join(f"{row['per_function'][f]:>10.3f}" for f in ALL_FUNCTIONS)
        lines.append(f"{name:<14}{cells}{row['aggregate']:>12.3f}")

    lines.append("")
    for key, value in sorted(report.notes.items()):
        lines.append(f"note {key}: {json.dumps(value, sort_keys=True)}")
    return "\n".join(lines)


def load_profiles(path: str | Path) -> list[ToolProfile]:
    """Profile file: JSON with tool_name, coverage, and per-function Q/O/C."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"profile file {path}: {exc}")
    problems = []
    profiles = []
    for i, entry in enumerate(doc.get("profiles", [])):
        name = entry.get("tool_name") or f"profiles[{i}]"
        try:
            coverage = frozenset(ManagementFunction(f) for f in entry.get("coverage", []))
            samples = {}
            for fname, s in entry.get("samples", {}).items():
                function = ManagementFunction(fname)
                samples[function] = MetricSample(
                    function=function,
                    q=float(s["q"]),
                    o=float(s["o"]),
                    c=float(s["c"]),
                    window=tuple(s.get("window", (0.0, 0.0))),
                )
            profiles.append(ToolProfile(tool_name=name, coverage=coverage, samples=samples))
        except (ValueError, KeyError, DomainError) as exc:
            problems.append(f"{name}: {exc}")
    if problems:
        raise ConfigError(f"invalid profile file {path}", problems)
    return profiles
