"""Check execution strategies behind one interface.

A check_command is `name!arg1!arg2...`. Two builtin names run in-process
against the device over SNMP (`snmp-value`, `snmp-reach`); anything else is
looked up in the plugin registry and run as a child process.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from nbitms.errors import ConfigError, PluginLaunchError, SnmpProtocolError, SnmpTimeoutError
from nbitms.core.objects import CheckStatus, MonitoredObject
from nbitms.plugins import (
    PluginKind,
    PluginRegistry,
    execute_plugin,
    expand_macros,
    outcome_status,
    parse_plugin_output,
)
from nbitms.snmp.client import SnmpClient
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import BerValue, Integer, OctetString, is_exception

BUILTIN_CHECKS = ("snmp-value", "snmp-reach")
SYS_NAME_INSTANCE = Oid("1.3.6.1.2.1.1.5.0")


@dataclass(frozen=True)
class CheckOutcome:
    status: CheckStatus
    output: str


class CheckRunner(Protocol):
    def run_check(self, obj: MonitoredObject) -> CheckOutcome: ...


def split_check_command(check_command: str) -> tuple[str, list[str]]:
    parts = check_command.split("!")
    return parts[0], parts[1:]


def parse_expected_value(text: str) -> BerValue:
    try:
        return Integer(int(text))
    except ValueError:
        return OctetString.from_text(text)


class SnmpCheckRunner:
    """In-process SNMP polls; works on virtual time through the client factory."""

    def __init__(self, client_factory: Callable[[str], SnmpClient]):
        self.client_factory = client_factory

    def run_check(self, obj: MonitoredObject) -> CheckOutcome:
        name, args = split_check_command(obj.check_command)
        if name == "snmp-value":
            return self._check_value(obj, args)
        if name == "snmp-reach":
            return self._check_reach(obj)
        raise ConfigError(f"{obj.id}: unknown builtin check {name!r}")

    def _check_value(self, obj: MonitoredObject, args: list[str]) -> CheckOutcome:
        if len(args) < 2:
            raise ConfigError(f"{obj.id}: snmp-value needs <oid>!<expected>")
        oid = Oid(args[0])
        expected = parse_expected_value(args[1])
        client = self.client_factory(obj.address)
        try:
            observed = client.get([oid])[0][1]
        except SnmpTimeoutError:
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - no SNMP response from {obj.address}")
        except SnmpProtocolError as exc:
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - SNMP error: {exc}")
        if is_exception(observed):
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - {oid} not present on agent")
        if observed == expected:
            return CheckOutcome(CheckStatus.OK, f"OK - {oid} = {_short(observed)}")
        return CheckOutcome(
            CheckStatus.CRITICAL,
            f"CRITICAL - {oid} = {_short(observed)}, expected {_short(expected)}",
        )

    def _check_reach(self, obj: MonitoredObject) -> CheckOutcome:
        client = self.client_factory(obj.address)
        try:
            client.get([SYS_NAME_INSTANCE])
        except SnmpTimeoutError:
            return CheckOutcome(CheckStatus.CRITICAL, f"CRITICAL - {obj.address} unreachable")
        except SnmpProtocolError as exc:
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - SNMP error: {exc}")
        return CheckOutcome(CheckStatus.OK, f"OK - {obj.address} responds")


class PluginCheckRunner:
    """Expands the plugin's template and runs it as a child process."""

    def __init__(self, registry: PluginRegistry):
        self.registry = registry

    def run_check(self, obj: MonitoredObject) -> CheckOutcome:
        name, args = split_check_command(obj.check_command)
        desc = self.registry.get(name)
        if desc is None:
            raise ConfigError(f"{obj.id}: unknown plugin {name!r}")
        if desc.kind != PluginKind.MONITORING:
            # configuration plugins run only inside transactions, never here
            raise ConfigError(f"{obj.id}: plugin {name!r} is not a monitoring plugin")
        extra = {f"ARG{i}": arg for i, arg in enumerate(args, 1)}
        command, _warnings = expand_macros(desc.command_template, obj, extra)
        try:
            outcome = execute_plugin(desc, command)
        except PluginLaunchError as exc:
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - plugin launch failed: {exc}")
        status_text, _perfdata, _parse_warnings = parse_plugin_output(outcome.stdout_text)
        if outcome.timed_out:
            status_text = f"UNKNOWN - plugin timed out after {desc.timeout_s}s"
        return CheckOutcome(outcome_status(outcome), status_text)


class CompositeCheckRunner:
    """Routes builtin check names to SNMP, everything else to plugins."""

    def __init__(self, snmp_runner: Optional[SnmpCheckRunner], plugin_runner: Optional[PluginCheckRunner]):
        self.snmp_runner = snmp_runner
        self.plugin_runner = plugin_runner

    def run_check(self, obj: MonitoredObject) -> CheckOutcome:
        name, _ = split_check_command(obj.check_command)
        if name in BUILTIN_CHECKS:
            if self.snmp_runner is None:
                raise ConfigError(f"{obj.id}: SNMP checks unavailable (no client factory)")
            return self.snmp_runner.run_check(obj)
        if self.plugin_runner is None:
            raise ConfigError(f"{obj.id}: plugin checks unavailable (no registry)")
        return self.plugin_runner.run_check(obj)


def _short(value: BerValue) -> str:
    if isinstance(value, OctetString):
        return value.text()
    if isinstance(value, Integer):
        return str(value.value)
    return str(value)
