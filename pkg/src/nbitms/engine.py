"""The running engine: schedules checks, folds results through the state
machine, keeps the alarm store and event stream, drives configuration
transactions, and exposes snapshots, the map, and run statistics.

All state mutations are serialized through one lock (single writer); check
executions may happen concurrently but results are applied in arrival order.
"""

from __future__ import annotations

import resource
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from nbitms.clock import Clock, RealClock
from nbitms.errors import ConfigError, NotFoundError
from nbitms.core.objects import (
    CheckStatus,
    HostStatus,
    MonitoredObject,
    ObjectKind,
    host_status_of,
)
from nbitms.core.state import (
    CheckResult,
    EventKind,
    ObservedState,
    apply_check_result,
    initial_record,
    snapshot_states,
)
from nbitms.core.alarms import Alarm, AlarmState, AlarmStore
from nbitms.checks import CheckOutcome, CompositeCheckRunner, PluginCheckRunner, SnmpCheckRunner
from nbitms.configmgmt import ConfigManager, ConfigTransaction, OperatorCommand, transaction_to_json
from nbitms.plugins import PluginRegistry
from nbitms.scheduling import ScheduleEntry, build_schedule, next_due, reschedule_after_result
from nbitms.snmp.client import PduCounters, SnmpClient, UdpTransport
from nbitms.snmp.mib import MibRegistry
from nbitms.snmp.oid import Oid
from nbitms.topology import (
    DeviceIdentity,
    IconRule,
    MapNode,
    TopologyGraph,
    compute_reachability,
    render_map_document,
)
from nbitms.simfleet import SimFleet

SIM_ADDRESS_PREFIX = "sim:"


@dataclass(frozen=True)
class EventEnvelope:
    seq: int
    ts: float
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload}


@dataclass(frozen=True)
class AlarmEventRef:
    object_id: str
    timestamp: float


@dataclass
class EngineRunStats:
    """Windowed counters handed to the evaluator."""

    window: tuple[float, float]
    pdus_sent: int
    pdus_received: int
    bytes_sent: int
    bytes_received: int
    cpu_seconds: float
    mem_peak_bytes: int
    alarm_events: list[AlarmEventRef] = field(default_factory=list)
    object_device: dict[str, str] = field(default_factory=dict)

    def alarm_opened_events(self) -> list[AlarmEventRef]:
        return list(self.alarm_events)

    def objects_for_device(self, device_id: str) -> list[str]:
        return [obj for obj, dev in self.object_device.items() if dev == device_id]


class EventLog:
    """Monotonic event stream with a bounded replay buffer."""

    def __init__(self, buffer_size: int = 1000):
        self.buffer: deque[EventEnvelope] = deque(maxlen=buffer_size)
        self.seq = 0
        self.condition = threading.Condition()

    def append(self, kind: str, payload: dict, ts: float) -> EventEnvelope:
        with self.condition:
            self.seq += 1
            envelope = EventEnvelope(seq=self.seq, ts=ts, kind=kind, payload=payload)
            self.buffer.append(envelope)
            self.condition.notify_all()
            return envelope

    def since(self, after_seq: int) -> tuple[list[EventEnvelope], bool]:
        """Envelopes with seq > after_seq; second value is True when the
        buffer no longer reaches back that far (subscriber must resync)."""
        with self.condition:
            envelopes = [e for e in self.buffer if e.seq > after_seq]
            oldest_available = self.buffer[0].seq if self.buffer else self.seq + 1
            needs_resync = after_seq + 1 < oldest_available and after_seq < self.seq
            return envelopes, needs_resync


class Engine:
    def __init__(
        self,
        objects: list[MonitoredObject],
        clock: Clock | None = None,
        check_runner=None,
        *,
        fleet: Optional[SimFleet] = None,
        plugin_registry: Optional[PluginRegistry] = None,
        mib_registry: Optional[MibRegistry] = None,
        icon_rules: Optional[list[IconRule]] = None,
        root_id: str = "management-station",
        community: str = "public",
        snmp_timeout_ms: float = 1000.0,
        snmp_retries: int = 1,
        txn_log_path=None,
        event_buffer: int = 1000,
        identities: Optional[dict[str, DeviceIdentity]] = None,
        capacities=None,
        parallel_checks: int = 1,
    ):
        self.clock = clock or RealClock()
        self.objects: dict[str, MonitoredObject] = {}
        for obj in objects:
            if obj.id in self.objects:
                raise ConfigError(f"duplicate object id {obj.id!r}")
            self.objects[obj.id] = obj
        for obj in objects:
            if obj.kind == ObjectKind.SERVICE and obj.parent_host not in self.objects:
                raise ConfigError(f"service {obj.id!r}: unknown parent_host {obj.parent_host!r}")

        self.fleet = fleet
        self.community = community
        self.snmp_timeout_ms = snmp_timeout_ms
        self.snmp_retries = snmp_retries
        self.counters = PduCounters()
        self.plugin_registry = plugin_registry or PluginRegistry()
        self.mib_registry = mib_registry or MibRegistry()
        self.icon_rules = list(icon_rules or [])
        self.identities = dict(identities or {})
        self.capacities = capacities

        if check_runner is None:
            check_runner = CompositeCheckRunner(
                SnmpCheckRunner(self._client_for_address),
                PluginCheckRunner(self.plugin_registry),
            )
        self.check_runner = check_runner

        self.records = {obj_id: initial_record(obj_id) for obj_id in self.objects}
        self.alarms = AlarmStore()
        self.schedule: dict[str, ScheduleEntry] = {}
        self.events = EventLog(buffer_size=event_buffer)
        self.graph = self._build_graph(root_id)
        self.graph.validate()

        self.config_manager = ConfigManager(
            client_factory=self._client_for_device,
            registry=self.mib_registry,
            plugin_lookup=self.plugin_registry.get,
            log_path=txn_log_path,
            clock=self.clock,
            on_phase=self._on_txn_phase,
        )

        self._lock = threading.RLock()
        self._alarm_event_refs: list[AlarmEventRef] = []
        self._effective_statuses: dict[str, HostStatus] = {}
        self._started_at: Optional[float] = None
        self._cpu_baseline = self._cpu_now()
        self._stop = threading.Event()
        self._run_thread: Optional[threading.Thread] = None
        self._last_snapshot_ts = float("-inf")
        self.parallel_checks = max(1, int(parallel_checks))
        self._check_pool: Optional[ThreadPoolExecutor] = None
        if self.parallel_checks > 1:
            self._check_pool = ThreadPoolExecutor(
                max_workers=self.parallel_checks, thread_name_prefix="check"
            )

    # -- construction helpers ------------------------------------------------

    def _build_graph(self, root_id: str) -> TopologyGraph:
        graph = TopologyGraph(root_id=root_id)
        for obj in self.objects.values():
            if obj.kind != ObjectKind.HOST:
                continue
            parent = obj.parent_host
            graph.add_node(
                MapNode(
                    host_id=obj.id,
                    label=obj.display_name,
                    parent=parent,
                    identity=self.identities.get(obj.id, DeviceIdentity()),
                )
            )
        return graph

    def _client_for_address(self, address: str) -> SnmpClient:
        if address.startswith(SIM_ADDRESS_PREFIX):
            if self.fleet is None:
                raise ConfigError(f"address {address!r} needs an embedded sim fleet")
            device_id = address[len(SIM_ADDRESS_PREFIX):]
            transport = self.fleet.transport_for(device_id, self.clock)
        else:
            host, _, port = address.partition(":")
            transport = UdpTransport(host, int(port) if port else 1161)
        return SnmpClient(
            transport,
            community=self.community,
            timeout_ms=self.snmp_timeout_ms,
            retries=self.snmp_retries,
            clock=self.clock,
            counters=self.counters,
        )

    def _client_for_device(self, device: str) -> SnmpClient:
        obj = self.objects.get(device)
        if obj is not None:
            return self._client_for_address(obj.address)
        if self.fleet is not None and device in self.fleet.agents:
            return self._client_for_address(SIM_ADDRESS_PREFIX + device)
        raise NotFoundError(f"unknown device {device!r}")

    def device_for_object(self, object_id: str) -> Optional[str]:
        obj = self.objects.get(object_id)
        if obj is None:
            return None
        if obj.address.startswith(SIM_ADDRESS_PREFIX):
            return obj.address[len(SIM_ADDRESS_PREFIX):]
        return obj.address

    @staticmethod
    def _cpu_now() -> float:
        usage = resource.getrusage(resource.RUSAGE_SELF)
        return usage.ru_utime + usage.ru_stime

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            now = self.clock.now()
            self._started_at = now
            entries = build_schedule(list(self.objects.values()), now)
            self.schedule = {e.object_id: e for e in entries}
            self._effective_statuses = self._compute_effective()

    def identify_devices(self) -> None:
        """Best-effort SNMP identity discovery for icon matching."""
        for obj in self.objects.values():
            if obj.kind != ObjectKind.HOST or obj.id in self.identities:
                continue
            try:
                client = self._client_for_address(obj.address)
                values = client.get([Oid("1.3.6.1.2.1.1.2.0"), Oid("1.3.6.1.2.1.1.1.0")])
            except Exception:
                continue
            sys_object_id = getattr(values[0][1], "oid", None)
            descr = values[1][1]
            identity = DeviceIdentity(
                sys_object_id=sys_object_id,
                sys_descr=descr.text() if hasattr(descr, "text") else "",
            )
            self.identities[obj.id] = identity
            if obj.id in self.graph.nodes:
                self.graph.nodes[obj.id].identity = identity

    # -- check processing ------------------------------------------------------

    def process_due(self) -> int:
        """Run every due check and fold the results in. Returns batch size.

        Checks execute concurrently up to the configured cap; results are
        applied through the single-writer path in completion order.
        """
        now = self.clock.now()
        batch = next_due(list(self.schedule.values()), now)
        if self.fleet is not None and batch:
            self.fleet.tick(now)
        if self._check_pool is not None and len(batch) > 1:
            futures = [
                (object_id, self._check_pool.submit(self._run_check, self.objects[object_id]))
                for object_id in batch
            ]
            for object_id, future in futures:
                outcome = future.result()
                self.apply_result(object_id, outcome.status, outcome.output)
            return len(batch)
        for object_id in batch:
            obj = self.objects[object_id]
            if self.fleet is not None:
                self.fleet.tick(self.clock.now())
            outcome = self._run_check(obj)
            self.apply_result(object_id, outcome.status, outcome.output)
        return len(batch)

    def _run_check(self, obj: MonitoredObject) -> CheckOutcome:
        try:
            return self.check_runner.run_check(obj)
        except ConfigError:
            raise
        except Exception as exc:  # a broken check must never kill the loop
            return CheckOutcome(CheckStatus.UNKNOWN, f"UNKNOWN - check failed: {exc}")

    def apply_result(self, object_id: str, status: CheckStatus, output: str) -> None:
        with self._lock:
            obj = self.objects.get(object_id)
            if obj is None:
                raise NotFoundError(f"unknown object {object_id!r}")
            now = self.clock.now()
            record = self.records[object_id]
            new_record, events = apply_check_result(
                record, CheckResult(object_id=object_id, status=status, output=output, timestamp=now), obj
            )
            self.records[object_id] = new_record
            for event in events:
                alarm = self.alarms.observe(event)
                payload = {"object_id": event.object_id, "detail": event.detail}
                if event.status is not None:
                    payload["status"] = event.status.value
                if alarm is not None:
                    payload["alarm_id"] = alarm.alarm_id
                    payload["severity"] = alarm.severity.value
                self.events.append(event.kind.value, payload, event.timestamp)
                if event.kind == EventKind.ALARM_OPENED:
                    self._alarm_event_refs.append(AlarmEventRef(event.object_id, event.timestamp))
            entry = self.schedule.get(object_id)
            if entry is not None:
                self.schedule[object_id] = reschedule_after_result(entry, new_record, obj, now)
            if events:
                self._emit_map_changes()

    def _compute_effective(self) -> dict[str, HostStatus]:
        host_statuses = {}
        for obj in self.objects.values():
            if obj.kind == ObjectKind.HOST:
                host_statuses[obj.id] = host_status_of(self.records[obj.id].current_status)
        return compute_reachability(self.graph, host_statuses)

    def _emit_map_changes(self) -> None:
        effective = self._compute_effective()
        changed = sorted(
            host for host, status in effective.items()
            if self._effective_statuses.get(host) != status
        )
        self._effective_statuses = effective
        if changed:
            self.events.append(
                "MAP_CHANGED",
                {"hosts": changed, "statuses": {h: effective[h].value for h in changed}},
                self.clock.now(),
            )

    # -- run loops --------------------------------------------------------------

    def run_until(self, t_end: float, max_steps: int = 1_000_000) -> None:
        """Deterministic virtual-time run: process batches, then jump the
        clock to the next due timestamp until t_end."""
        if self._started_at is None:
            self.start()
        steps = 0
        while steps < max_steps:
            steps += 1
            if self.clock.now() > t_end:
                break
            if self.process_due() > 0:
                continue
            upcoming = [e.next_due_ts for e in self.schedule.values() if e.next_due_ts > self.clock.now()]
            if not upcoming:
                break
            target = min(upcoming)
            if target > t_end:
                break
            self.clock.advance_to(target)

    def run_forever(self, tick_s: float = 0.5) -> None:
        if self._started_at is None:
            self.start()
        while not self._stop.is_set():
            self.process_due()
            self._stop.wait(tick_s)

    def start_background(self, tick_s: float = 0.5) -> None:
        self._run_thread = threading.Thread(
            target=self.run_forever, kwargs={"tick_s": tick_s}, name="engine-loop", daemon=True
        )
        self._run_thread.start()

    def shutdown(self) -> None:
        self._stop.set()
        if self._run_thread is not None:
            self._run_thread.join(timeout=5.0)
        if self._check_pool is not None:
            self._check_pool.shutdown(wait=False)
        if self.fleet is not None:
            self.fleet.stop()

    # -- views --------------------------------------------------------------------

    def snapshot(self) -> ObservedState:
        with self._lock:
            # guard monotonicity even if a real clock steps backwards
            ts = max(self.clock.now(), self._last_snapshot_ts)
            self._last_snapshot_ts = ts
            return snapshot_states(self.records.values(), self.alarms.all(), ts)

    def map_document(self) -> dict:
        with self._lock:
            snapshot = self.snapshot()
            host_statuses = {
                obj.id: host_status_of(self.records[obj.id].current_status)
                for obj in self.objects.values()
                if obj.kind == ObjectKind.HOST
            }
            return render_map_document(self.graph, snapshot, self.icon_rules, host_statuses)

    def ack_alarm(self, alarm_id: str, operator_id: str) -> Alarm:
        with self._lock:
            return self.alarms.acknowledge(alarm_id, operator_id)

    def alarm_list(self, state: Optional[AlarmState] = None) -> list[Alarm]:
        with self._lock:
            return self.alarms.all(state)

    # -- configuration ---------------------------------------------------------------

    def execute_command(self, cmd: OperatorCommand) -> ConfigTransaction:
        return self.config_manager.execute(cmd)

    def submit_command(self, cmd: OperatorCommand) -> str:
        """Run the transaction pipeline in the background; phases stream as
        TXN_PHASE events. Returns the transaction id immediately."""
        return self.config_manager.submit(cmd)

    def _on_txn_phase(self, txn: ConfigTransaction) -> None:
        self.events.append(
            "TXN_PHASE",
            {
                "txn_id": txn.txn_id,
                "device": txn.command.target_device,
                "phase": txn.phase.value,
                "command_id": txn.command.command_id,
                "errors": list(txn.errors),
            },
            self.clock.now(),
        )

    def transaction(self, txn_id: str) -> dict:
        try:
            return transaction_to_json(self.config_manager.get(txn_id))
        except NotFoundError:
            if self.config_manager.is_pending(txn_id):
                return {
                    "txn_id": txn_id,
                    "device": "",
                    "operator": "",
                    "phase": "SUBMITTED",
                    "phase_timestamps": {},
                    "warnings": [],
                    "errors": [],
                    "directives": [],
                }
            raise

    # -- statistics ------------------------------------------------------------------

    def stats(self) -> EngineRunStats:
        with self._lock:
            started = self._started_at if self._started_at is not None else self.clock.now()
            usage = resource.getrusage(resource.RUSAGE_SELF)
            object_device = {}
            for obj in self.objects.values():
                device = self.device_for_object(obj.id)
                if device:
                    object_device[obj.id] = device
            return EngineRunStats(
                window=(started, self.clock.now()),
                pdus_sent=self.counters.pdus_sent,
                pdus_received=self.counters.pdus_received,
                bytes_sent=self.counters.bytes_sent,
                bytes_received=self.counters.bytes_received,
                cpu_seconds=max(self._cpu_now() - self._cpu_baseline, 1e-9),
                mem_peak_bytes=usage.ru_maxrss * 1024,
                alarm_events=list(self._alarm_event_refs),
                object_device=object_device,
            )

    def events_since(self, after_seq: int) -> tuple[list[EventEnvelope], bool]:
        return self.events.since(after_seq)
