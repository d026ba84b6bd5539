"""Plugin abstraction layer: command templating, child-process execution,
exit-code mapping, and output/perfdata parsing.

Plugins come in two kinds. MONITORING plugins are scheduled periodically and
their exit code maps to a check status; CONFIGURATION plugins run only inside
configuration transactions. Both use the same child-process contract: a
command line in, captured stdout and an integer exit code out, so stock
monitoring plugins are drop-in compatible.
"""

from __future__ import annotations

import enum
import math
import re
import shlex
import subprocess
import time
from dataclasses import dataclass
from typing import Optional

from nbitms.errors import ConfigError, MacroError, PluginLaunchError
from nbitms.core.objects import CheckStatus, MonitoredObject, ObjectKind

TIMEOUT_GRACE_S = 2.0
UNKNOWN_EXIT_CODE = 3


class PluginKind(enum.Enum):
    MONITORING = "MONITORING"
    CONFIGURATION = "CONFIGURATION"


@dataclass(frozen=True)
class PluginDescriptor:
    name: str
    kind: PluginKind
    command_template: str
    timeout_s: float = 30.0
    expected_runtime_class: str = "script"

    def __post_init__(self):
        if not self.command_template.strip():
            raise ValueError(f"plugin {self.name!r}: empty command template")
        if self.timeout_s <= 0:
            raise ValueError(f"plugin {self.name!r}: timeout must be positive")


# Labels and units live inside a space-separated token grammar, so they may
# not contain whitespace; units additionally may not look like a number tail.
_LABEL_OK = re.compile(r"^[^\s='|]+$")
_UNIT_OK = re.compile(r"^(?![\d.+-])(?![eE][+-]?\d)[^\s;|]+$")


@dataclass(frozen=True)
class PerfDatum:
    label: str
    value: float
    unit: Optional[str] = None
    warn: Optional[float] = None
    crit: Optional[float] = None

    def __post_init__(self):
        if not _LABEL_OK.match(self.label or ""):
            raise ValueError(f"invalid perfdata label {self.label!r}")
        if self.unit is not None and not _UNIT_OK.match(self.unit):
            raise ValueError(f"invalid perfdata unit {self.unit!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"perfdata value must be finite: {self.label}={self.value}")


@dataclass(frozen=True)
class PluginOutcome:
    exit_code: int
    stdout_text: str
    perfdata: tuple[PerfDatum, ...] = ()
    duration_ms: float = 0.0
    timed_out: bool = False


class PluginRegistry:
    """Declarative plugin set from the engine configuration (no auto-discovery)."""

    def __init__(self):
        self._plugins: dict[str, PluginDescriptor] = {}

    def add(self, desc: PluginDescriptor) -> None:
        if desc.name in self._plugins:
            raise ConfigError(f"duplicate plugin name {desc.name!r}")
        self._plugins[desc.name] = desc

    def get(self, name: str) -> Optional[PluginDescriptor]:
        return self._plugins.get(name)

    def names(self) -> list[str]:
        return sorted(self._plugins)


MACRO_RE = re.compile(r"\$([A-Za-z0-9_]*)\$")


def expand_macros(
    template: str, obj: MonitoredObject, extra: Optional[dict[str, str]] = None
) -> tuple[str, list[str]]:
    """Substitute $MACRO$ placeholders; unknown macros stay verbatim and are
    reported in the returned warning list rather than failing the check."""
    if template.count("$") % 2 != 0:
        raise MacroError(f"unbalanced $ in template: {template!r}")
    macros = {
        "HOSTADDRESS": obj.address,
        "HOSTNAME": obj.parent_host if obj.kind == ObjectKind.SERVICE and obj.parent_host else obj.id,
        "OBJECTID": obj.id,
        "DISPLAYNAME": obj.display_name,
    }
    if obj.kind == ObjectKind.SERVICE:
        macros["SERVICEDESC"] = obj.display_name
    for key, value in (extra or {}).items():
        macros[key.upper()] = str(value)

    unknown: list[str] = []

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name in macros:
            return macros[name]
        if name:
            unknown.append(name)
        return match.group(0)

    return MACRO_RE.sub(substitute, template), unknown


def execute_plugin(desc: PluginDescriptor, command: str) -> PluginOutcome:
    """Run the plugin as a child process under the descriptor's wall-clock cap.

    A timeout terminates the process and yields an UNKNOWN-equivalent outcome;
    a missing executable raises PluginLaunchError (measurement failure is not
    the same as a failed launch).
    """
    argv = shlex.split(command)
    if not argv:
        raise PluginLaunchError("empty command")
    started = time.monotonic()
    try:
        proc = subprocess.run(
            argv,
            capture_output=True,
            text=True,
            timeout=desc.timeout_s,
        )
    except subprocess.TimeoutExpired as exc:
        duration_ms = (time.monotonic() - started) * 1000.0
        partial = exc.stdout or ""
        if isinstance(partial, bytes):
            partial = partial.decode("utf-8", errors="replace")
        return PluginOutcome(
            exit_code=UNKNOWN_EXIT_CODE,
            stdout_text=partial,
            duration_ms=duration_ms,
            timed_out=True,
        )
    except (FileNotFoundError, PermissionError, NotADirectoryError) as exc:
        raise PluginLaunchError(f"cannot launch {argv[0]!r}: {exc}") from exc
    except OSError as exc:
        raise PluginLaunchError(f"cannot launch {argv[0]!r}: {exc}") from exc

    duration_ms = (time.monotonic() - started) * 1000.0
    status_text, perfdata, _warnings = parse_plugin_output(proc.stdout)
    return PluginOutcome(
        exit_code=proc.returncode,
        stdout_text=proc.stdout,
        perfdata=tuple(perfdata),
        duration_ms=duration_ms,
        timed_out=False,
    )


EXIT_STATUS_TABLE = {
    0: CheckStatus.OK,
    1: CheckStatus.WARNING,
    2: CheckStatus.CRITICAL,
}


def map_exit_code(code: int) -> CheckStatus:
    return EXIT_STATUS_TABLE.get(code, CheckStatus.UNKNOWN)


def outcome_status(outcome: PluginOutcome) -> CheckStatus:
    """Timed-out plugins are a measurement failure, hence UNKNOWN."""
    if outcome.timed_out:
        return CheckStatus.UNKNOWN
    return map_exit_code(outcome.exit_code)


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
PERF_TOKEN_RE = re.compile(
    rf"^(?P<label>[^='\s]+|'[^']+')"
    rf"=(?P<value>{_NUM})"
    rf"(?P<unit>[^;\s]*)"
    rf"(?:;(?P<warn>{_NUM})?)?"
    rf"(?:;(?P<crit>{_NUM})?)?"
    rf"(?:;[^;\s]*)?(?:;[^;\s]*)?$"
)


def parse_plugin_output(stdout_text: str) -> tuple[str, list[PerfDatum], list[str]]:
    """Split plugin stdout into status text and perfdata.

    Text before the first unescaped '|' is the status line; after it,
    space-separated label=value[unit];[warn];[crit] tokens. Malformed tokens
    are skipped with a warning, never fatal.
    """
    split_at = _find_unescaped_pipe(stdout_text)
    if split_at is None:
        return stdout_text.strip(), [], []
    status_text = stdout_text[:split_at].replace(r"\|", "|").strip()
    perf_text = stdout_text[split_at + 1 :].strip()

    perfdata: list[PerfDatum] = []
    warnings: list[str] = []
    for token in perf_text.split():
        match = PERF_TOKEN_RE.match(token)
        if not match:
            warnings.append(f"malformed perfdata token {token!r}")
            continue
        label = match.group("label")
        if label.startswith("'"):
            label = label[1:-1]
        perfdata.append(
            PerfDatum(
                label=label,
                value=float(match.group("value")),
                unit=match.group("unit") or None,
                warn=float(match.group("warn")) if match.group("warn") else None,
                crit=float(match.group("crit")) if match.group("crit") else None,
            )
        )
    return status_text, perfdata, warnings


def _find_unescaped_pipe(text: str) -> Optional[int]:
    i = 0
    while i < len(text):
        if text[i] == "\\":
            i += 2
            continue
        if text[i] == "|":
            return i
        i += 1
    return None


def render_perfdata(perfdata) -> str:
    """Inverse of the perfdata grammar: parse(render(x)) == x."""
    tokens = []
    for datum in perfdata:
        token = f"{datum.label}={_fmt_number(datum.value)}{datum.unit or ''}"
        if datum.warn is not None or datum.crit is not None:
            token += f";{_fmt_number(datum.warn) if datum.warn is not None else ''}"
            token += f";{_fmt_number(datum.crit) if datum.crit is not None else ''}"
        tokens.append(token)
    return " ".join(tokens)


def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)
