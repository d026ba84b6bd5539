"""Configuration transactions: plan (snapshot current values), apply in order
with reverse-order rollback on failure, then verify every write by reading it
back. The loop closes on observed device state, never on SET responses alone.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

from nbitms.clock import Clock, RealClock
from nbitms.errors import (
    ContractViolationError,
    NotFoundError,
    PlanError,
    SnmpProtocolError,
    SnmpTimeoutError,
)
from nbitms.plugins import PluginDescriptor, PluginKind, execute_plugin, expand_macros
from nbitms.snmp.client import SnmpClient
from nbitms.snmp.mib import MibAccess, MibRegistry
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import BerValue, is_exception, value_to_json


class DirectiveVia(enum.Enum):
    SNMP_SET = "SNMP_SET"
    PLUGIN = "PLUGIN"


class TxnPhase(enum.Enum):
    PLANNED = "PLANNED"
    APPLYING = "APPLYING"
    VERIFYING = "VERIFYING"
    COMMITTED = "COMMITTED"
    ROLLED_BACK = "ROLLED_BACK"
    FAILED = "FAILED"


TERMINAL_PHASES = (TxnPhase.COMMITTED, TxnPhase.ROLLED_BACK, TxnPhase.FAILED)

_PHASE_ORDER = {
    TxnPhase.PLANNED: 0,
    TxnPhase.APPLYING: 1,
    TxnPhase.VERIFYING: 2,
    TxnPhase.COMMITTED: 3,
    TxnPhase.ROLLED_BACK: 3,
    TxnPhase.FAILED: 3,
}


@dataclass(frozen=True)
class DeviceDirective:
    via: DirectiveVia
    oid: Optional[Oid] = None
    intended_value: Optional[BerValue] = None
    plugin_name: Optional[str] = None
    plugin_args: tuple[str, ...] = ()

    def __post_init__(self):
        if self.via == DirectiveVia.SNMP_SET and (self.oid is None or self.intended_value is None):
            raise ValueError("SNMP_SET directive needs oid and intended_value")
        if self.via == DirectiveVia.PLUGIN and not self.plugin_name:
            raise ValueError("PLUGIN directive needs a plugin name")

    def describe(self) -> str:
        if self.via == DirectiveVia.SNMP_SET:
            return f"SET {self.oid} = {self.intended_value}"
        return f"PLUGIN {self.plugin_name} {' '.join(self.plugin_args)}"


@dataclass(frozen=True)
class OperatorCommand:
    command_id: str
    operator_id: str
    target_device: str
    directives: tuple[DeviceDirective, ...]
    issued_ts: float = 0.0

    def __post_init__(self):
        if not self.directives:
            raise ValueError("a command must carry at least one directive")
        object.__setattr__(self, "directives", tuple(self.directives))


class DirectiveStatus(enum.Enum):
    PENDING = "PENDING"
    APPLIED = "APPLIED"
    FAILED = "FAILED"
    ROLLED_BACK = "ROLLED_BACK"
    ROLLBACK_FAILED = "ROLLBACK_FAILED"
    VERIFIED = "VERIFIED"
    MISMATCH = "MISMATCH"
    UNVERIFIED = "UNVERIFIED"


@dataclass
class DirectiveResult:
    index: int
    directive: DeviceDirective
    status: DirectiveStatus = DirectiveStatus.PENDING
    detail: str = ""


@dataclass
class ConfigTransaction:
    txn_id: str
    command: OperatorCommand
    phase: TxnPhase = TxnPhase.PLANNED
    rollback_snapshot: dict = field(default_factory=dict)  # Oid -> prior BerValue
    results: list[DirectiveResult] = field(default_factory=list)
    phase_timestamps: dict = field(default_factory=dict)  # phase name -> ts
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def is_terminal(self) -> bool:
        return self.phase in TERMINAL_PHASES


def _advance_phase(txn: ConfigTransaction, phase: TxnPhase, now: float) -> None:
    if txn.is_terminal:
        raise ContractViolationError(f"{txn.txn_id}: already terminal ({txn.phase.value})")
    if _PHASE_ORDER[phase] <= _PHASE_ORDER[txn.phase]:
        raise ContractViolationError(
            f"{txn.txn_id}: cannot go {txn.phase.value} -> {phase.value}"
        )
    txn.phase = phase
    txn.phase_timestamps[phase.value] = now


def plan_transaction(
    cmd: OperatorCommand,
    registry: MibRegistry,
    client: SnmpClient,
    txn_id: str,
    now: float = 0.0,
) -> ConfigTransaction:
    """Validate directives against the MIB registry and snapshot the current
    value of every SNMP_SET target for rollback.

    Directives on OIDs the registry knows to be read-only fail planning (all
    offenders listed); unknown OIDs plan with a warning and a live-read
    snapshot.
    """
    problems: list[str] = []
    warnings: list[str] = []
    for i, directive in enumerate(cmd.directives, 1):
        if directive.via != DirectiveVia.SNMP_SET:
            continue
        entry = registry.lookup(directive.oid)
        if entry is None:
            warnings.append(f"directive {i}: no MIB entry for {directive.oid}, planning anyway")
            continue
        if entry.access != MibAccess.READ_WRITE:
            problems.append(f"directive {i}: {entry.name} ({directive.oid}) is READ_ONLY")
        elif not registry.syntax_matches(entry, directive.intended_value):
            problems.append(
                f"directive {i}: {entry.name} expects {entry.syntax}, "
                f"got {type(directive.intended_value).__name__}"
            )
    if problems:
        raise PlanError(f"{len(problems)} invalid directive(s)", problems)

    snapshot: dict[Oid, BerValue] = {}
    set_oids = [d.oid for d in cmd.directives if d.via == DirectiveVia.SNMP_SET]
    if set_oids:
        try:
            for oid, value in client.get(set_oids):
                snapshot[oid] = value
        except SnmpTimeoutError as exc:
            raise PlanError(f"cannot read current values from {cmd.target_device}: {exc}")
        except SnmpProtocolError as exc:
            raise PlanError(f"readback rejected by {cmd.target_device}: {exc}")

    txn = ConfigTransaction(
        txn_id=txn_id,
        command=cmd,
        rollback_snapshot=snapshot,
        results=[DirectiveResult(index=i, directive=d) for i, d in enumerate(cmd.directives, 1)],
        warnings=warnings,
    )
    txn.phase_timestamps[TxnPhase.PLANNED.value] = now
    return txn


def run_config_plugin_directive(
    directive: DeviceDirective,
    desc: PluginDescriptor,
    obj=None,
) -> tuple[bool, str]:
    """Execute one configuration-plugin directive; exit 0 means applied."""
    if directive.via != DirectiveVia.PLUGIN:
        raise ContractViolationError("directive is not PLUGIN-kind")
    if desc.kind != PluginKind.CONFIGURATION:
        raise ContractViolationError(
            f"plugin {desc.name!r} is {desc.kind.value}, not CONFIGURATION"
        )
    extra = {f"ARG{i}": arg for i, arg in enumerate(directive.plugin_args, 1)}
    if obj is not None:
        command, _ = expand_macros(desc.command_template, obj, extra)
    else:
        command = desc.command_template
        for key, val in extra.items():
            command = command.replace(f"${key}$", val)
    outcome = execute_plugin(desc, command)
    if outcome.timed_out:
        return False, "plugin timed out"
    if outcome.exit_code == 0:
        return True, outcome.stdout_text.strip()
    return False, outcome.stdout_text.strip() or f"exit code {outcome.exit_code}"


class ConfigManager:
    """Drives transactions through their phases, one live transaction per
    device, appending every phase transition to the transaction log."""

    def __init__(
        self,
        client_factory: Callable[[str], SnmpClient],
        registry: MibRegistry,
        plugin_lookup: Callable[[str], Optional[PluginDescriptor]] = lambda name: None,
        log_path: Optional[Path] = None,
        clock: Clock | None = None,
        on_phase: Optional[Callable[[ConfigTransaction], None]] = None,
    ):
        self.client_factory = client_factory
        self.registry = registry
        self.plugin_lookup = plugin_lookup
        self.log_path = Path(log_path) if log_path else None
        self.clock = clock or RealClock()
        self.on_phase = on_phase
        self.transactions: dict[str, ConfigTransaction] = {}
        self._seq = 0
        self._pending: set[str] = set()
        self._device_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    def get(self, txn_id: str) -> ConfigTransaction:
        try:
            return self.transactions[txn_id]
        except KeyError:
            raise NotFoundError(f"no such transaction {txn_id!r}") from None

    def all(self) -> list[ConfigTransaction]:
        return [self.transactions[k] for k in sorted(self.transactions)]

    def _next_txn_id(self) -> str:
        with self._lock:
            self._seq += 1
            return f"txn-{self._seq:06d}"

    def _device_lock(self, device: str) -> threading.Lock:
        with self._lock:
            return self._device_locks.setdefault(device, threading.Lock())

    def submit(self, cmd: OperatorCommand) -> str:
        """Run the pipeline in the background; the id is known immediately so
        callers can watch TXN_PHASE events or poll for the transaction."""
        txn_id = self._next_txn_id()
        with self._lock:
            self._pending.add(txn_id)
        thread = threading.Thread(
            target=self._execute_submitted, args=(cmd, txn_id), daemon=True
        )
        thread.start()
        return txn_id

    def _execute_submitted(self, cmd: OperatorCommand, txn_id: str) -> None:
        try:
            self.execute(cmd, txn_id=txn_id)
        finally:
            with self._lock:
                self._pending.discard(txn_id)

    def is_pending(self, txn_id: str) -> bool:
        with self._lock:
            return txn_id in self._pending

    def _record_phase(self, txn: ConfigTransaction) -> None:
        entry = {
            "txn_id": txn.txn_id,
            "device": txn.command.target_device,
            "phase": txn.phase.value,
            "ts": self.clock.now(),
            "directives": len(txn.command.directives),
            "operator": txn.command.operator_id,
        }
        if txn.errors:
            entry["errors"] = list(txn.errors)
        if self.log_path:
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        if self.on_phase:
            self.on_phase(txn)

    def execute(self, cmd: OperatorCommand, txn_id: Optional[str] = None) -> ConfigTransaction:
        """plan -> apply -> verify, serialized per target device."""
        if txn_id is None:
            txn_id = self._next_txn_id()
        with self._device_lock(cmd.target_device):
            try:
                client = self.client_factory(cmd.target_device)
            except NotFoundError as exc:
                txn = ConfigTransaction(txn_id=txn_id, command=cmd, phase=TxnPhase.FAILED)
                txn.errors.append(str(exc))
                txn.phase_timestamps[TxnPhase.FAILED.value] = self.clock.now()
                self.transactions[txn_id] = txn
                self._record_phase(txn)
                return txn
            try:
                txn = plan_transaction(cmd, self.registry, client, txn_id, self.clock.now())
            except PlanError as exc:
                txn = ConfigTransaction(txn_id=txn_id, command=cmd, phase=TxnPhase.FAILED)
                txn.errors.extend(exc.problems)
                txn.phase_timestamps[TxnPhase.FAILED.value] = self.clock.now()
                self.transactions[txn_id] = txn
                self._record_phase(txn)
                return txn
            self.transactions[txn_id] = txn
            self._record_phase(txn)
            self.apply_transaction(txn, client)
            if txn.phase == TxnPhase.VERIFYING:
                self.verify_transaction(txn, client)
            return txn

    # -- phase steps --------------------------------------------------------

    def apply_transaction(self, txn: ConfigTransaction, client: SnmpClient) -> ConfigTransaction:
        if txn.phase != TxnPhase.PLANNED:
            raise ContractViolationError(f"{txn.txn_id}: apply requires PLANNED, is {txn.phase.value}")
        _advance_phase(txn, TxnPhase.APPLYING, self.clock.now())
        self._record_phase(txn)

        applied: list[DirectiveResult] = []
        failure: Optional[str] = None
        for result in txn.results:
            directive = result.directive
            ok, detail = self._apply_one(directive, client)
            if ok:
                result.status = DirectiveStatus.APPLIED
                result.detail = detail
                applied.append(result)
            else:
                result.status = DirectiveStatus.FAILED
                result.detail = detail
                failure = f"directive {result.index}: {detail}"
                break

        if failure is None:
            _advance_phase(txn, TxnPhase.VERIFYING, self.clock.now())
            self._record_phase(txn)
            return txn

        txn.errors.append(failure)
        self._roll_back(txn, client, applied)
        return txn

    def _apply_one(self, directive: DeviceDirective, client: SnmpClient) -> tuple[bool, str]:
        if directive.via == DirectiveVia.SNMP_SET:
            try:
                resp = client.set([(directive.oid, directive.intended_value)])
            except SnmpTimeoutError:
                return False, f"device unreachable while setting {directive.oid}"
            if resp.error_status != 0:
                return False, (
                    f"SET {directive.oid} rejected: error_status={resp.error_status} "
                    f"error_index={resp.error_index}"
                )
            return True, f"set {directive.oid}"
        desc = self.plugin_lookup(directive.plugin_name)
        if desc is None:
            return False, f"unknown configuration plugin {directive.plugin_name!r}"
        return run_config_plugin_directive(directive, desc)

    def _roll_back(self, txn: ConfigTransaction, client: SnmpClient,
                   applied: list[DirectiveResult]) -> None:
        """Reverse-order restore of every already-applied SNMP directive."""
        rollback_failed = False
        for result in reversed(applied):
            directive = result.directive
            if directive.via != DirectiveVia.SNMP_SET:
                # Plugin effects cannot be restored generically.
                result.status = DirectiveStatus.ROLLBACK_FAILED
                result.detail += "; plugin directive cannot be rolled back"
                rollback_failed = True
                continue
            prior = txn.rollback_snapshot.get(directive.oid)
            if prior is None or is_exception(prior):
                result.status = DirectiveStatus.ROLLBACK_FAILED
                result.detail += "; no prior value to restore"
                rollback_failed = True
                continue
            try:
                resp = client.set([(directive.oid, prior)])
            except SnmpTimeoutError:
                result.status = DirectiveStatus.ROLLBACK_FAILED
                result.detail += "; rollback timed out"
                txn.errors.append(f"rollback of {directive.oid} timed out")
                rollback_failed = True
                continue
            if resp.error_status != 0:
                result.status = DirectiveStatus.ROLLBACK_FAILED
                result.detail += f"; rollback rejected (error_status={resp.error_status})"
                txn.errors.append(f"rollback of {directive.oid} rejected")
                rollback_failed = True
            else:
                result.status = DirectiveStatus.ROLLED_BACK
        _advance_phase(
            txn, TxnPhase.FAILED if rollback_failed else TxnPhase.ROLLED_BACK, self.clock.now()
        )
        self._record_phase(txn)

    def verify_transaction(self, txn: ConfigTransaction, client: SnmpClient) -> ConfigTransaction:
        """Read every SNMP_SET target back; any mismatch rolls the whole
        transaction back, naming the offending OID."""
        if txn.phase != TxnPhase.VERIFYING:
            raise ContractViolationError(f"{txn.txn_id}: verify requires VERIFYING, is {txn.phase.value}")

        mismatch: Optional[str] = None
        applied = [r for r in txn.results if r.status == DirectiveStatus.APPLIED]
        for result in applied:
            directive = result.directive
            if directive.via != DirectiveVia.SNMP_SET:
                result.status = DirectiveStatus.UNVERIFIED
                result.detail += "; no paired read-plugin"
                continue
            try:
                observed = client.get([directive.oid])[0][1]
            except (SnmpTimeoutError, SnmpProtocolError) as exc:
                mismatch = f"readback of {directive.oid} failed: {exc}"
                result.status = DirectiveStatus.MISMATCH
                result.detail += f"; {mismatch}"
                break
            if observed != directive.intended_value:
                mismatch = (
                    f"{directive.oid} reads back {observed}, intended {directive.intended_value}"
                )
                result.status = DirectiveStatus.MISMATCH
                result.detail += f"; {mismatch}"
                break
            result.status = DirectiveStatus.VERIFIED

        if mismatch is None:
            _advance_phase(txn, TxnPhase.COMMITTED, self.clock.now())
            self._record_phase(txn)
            return txn

        txn.errors.append(mismatch)
        to_restore = [
            r for r in txn.results
            if r.status in (DirectiveStatus.VERIFIED, DirectiveStatus.MISMATCH, DirectiveStatus.APPLIED)
        ]
        self._roll_back(txn, client, to_restore)
        return txn


def transaction_to_json(txn: ConfigTransaction) -> dict:
    return {
        "txn_id": txn.txn_id,
        "device": txn.command.target_device,
        "operator": txn.command.operator_id,
        "phase": txn.phase.value,
        "phase_timestamps": dict(txn.phase_timestamps),
        "warnings": list(txn.warnings),
        "errors": list(txn.errors),
        "directives": [
            {
                "index": r.index,
                "describe": r.directive.describe(),
                "via": r.directive.via.value,
                "oid": str(r.directive.oid) if r.directive.oid else None,
                "intended_value": value_to_json(r.directive.intended_value)
                if r.directive.intended_value is not None
                else None,
                "status": r.status.value,
                "detail": r.detail,
            }
            for r in txn.results
        ],
    }
