"""Engine configuration: one JSON document referencing the registry files.

Validation is not fail-fast: one pass collects every problem it can find so
an operator fixes the file once, not error by error.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nbitms.clock import Clock
from nbitms.errors import ConfigError
from nbitms.core.objects import MonitoredObject, ObjectKind
from nbitms.checks import BUILTIN_CHECKS, split_check_command
from nbitms.engine import Engine
from nbitms.evaluation import CostCapacities
from nbitms.plugins import PluginDescriptor, PluginKind, PluginRegistry
from nbitms.snmp.mib import MibRegistry
from nbitms.snmp.oid import Oid
from nbitms.topology import DeviceIdentity, IconRule, load_icon_rules
from nbitms.simfleet import fleet_from_config

ENV_LISTEN = "NBITMS_LISTEN"
ENV_STATE_DIR = "NBITMS_STATE_DIR"


@dataclass
class EngineConfig:
    path: Path
    listen: str = "127.0.0.1:8080"
    state_dir: Optional[Path] = None
    community: str = "public"
    snmp_timeout_ms: float = 1000.0
    snmp_retries: int = 1
    monitoring_station: str = "management-station"
    parallel_checks: int = 8
    objects: list[MonitoredObject] = field(default_factory=list)
    plugin_registry: PluginRegistry = field(default_factory=PluginRegistry)
    mib_registry: MibRegistry = field(default_factory=MibRegistry)
    icon_rules: list[IconRule] = field(default_factory=list)
    fleet_doc: Optional[dict] = None
    eval_profiles_path: Optional[Path] = None
    ui_path: Optional[Path] = None
    capacities: CostCapacities = field(default_factory=CostCapacities)
    identities: dict[str, DeviceIdentity] = field(default_factory=dict)

    @property
    def state_file(self) -> Optional[Path]:
        return self.state_dir / "state.jsonl" if self.state_dir else None

    @property
    def txn_log_file(self) -> Optional[Path]:
        return self.state_dir / "transactions.log" if self.state_dir else None


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")

    problems: list[str] = []
    base = path.parent

    config = EngineConfig(path=path)
    config.listen = os.environ.get(ENV_LISTEN) or doc.get("listen", config.listen)
    state_dir = os.environ.get(ENV_STATE_DIR) or doc.get("state_dir")
    if state_dir:
        config.state_dir = (base / state_dir).resolve() if not Path(state_dir).is_absolute() else Path(state_dir)
    config.community = doc.get("community", config.community)
    snmp = doc.get("snmp", {})
    config.snmp_timeout_ms = float(snmp.get("timeout_ms", config.snmp_timeout_ms))
    config.snmp_retries = int(snmp.get("retries", config.snmp_retries))
    config.monitoring_station = doc.get("monitoring_station", config.monitoring_station)
    try:
        config.parallel_checks = max(1, int(doc.get("parallel_checks", 8)))
    except (TypeError, ValueError):
        problems.append(f"parallel_checks: not an integer: {doc.get('parallel_checks')!r}")

    caps = doc.get("capacities", {})
    try:
        config.capacities = CostCapacities(
            cpu_cores=float(caps.get("cpu_cores", 1.0)),
            mem_mib=float(caps.get("mem_mib", 512.0)),
            bw_mbit=float(caps.get("bw_mbit", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"capacities: {exc}")

    # plugins first, so object check_commands can be resolved against them
    for i, spec in enumerate(doc.get("plugins", [])):
        name = spec.get("name") or f"plugins[{i}]"
        try:
            desc = PluginDescriptor(
                name=spec["name"],
                kind=PluginKind(spec.get("kind", "MONITORING")),
                command_template=spec["command_template"],
                timeout_s=float(spec.get("timeout_s", 30.0)),
                expected_runtime_class=spec.get("expected_runtime_class", "script"),
            )
            config.plugin_registry.add(desc)
        except (KeyError, ValueError, ConfigError) as exc:
            problems.append(f"plugin {name}: {exc}")

    seen_ids: set[str] = set()
    for i, spec in enumerate(doc.get("objects", [])):
        label = spec.get("id") or f"objects[{i}]"
        try:
            obj = MonitoredObject(
                id=spec["id"],
                kind=ObjectKind(spec.get("kind", "HOST")),
                display_name=spec.get("display_name", spec["id"]),
                address=spec.get("address", ""),
                check_command=spec["check_command"],
                parent_host=spec.get("parent_host"),
                check_interval_s=float(spec.get("check_interval_s", 300.0)),
                retry_interval_s=float(spec.get("retry_interval_s", 60.0)),
                max_check_attempts=int(spec.get("max_check_attempts", 3)),
            )
        except (KeyError, ValueError) as exc:
            problems.append(f"object {label}: {exc}")
            continue
        if obj.id in seen_ids:
            problems.append(f"object {obj.id!r}: duplicate id")
            continue
        seen_ids.add(obj.id)
        config.objects.append(obj)

    by_id = {obj.id: obj for obj in config.objects}
    for obj in config.objects:
        if obj.kind == ObjectKind.SERVICE and obj.parent_host not in by_id:
            problems.append(f"service {obj.id!r}: unknown parent_host {obj.parent_host!r}")
        if obj.kind == ObjectKind.HOST and obj.parent_host and obj.parent_host not in by_id:
            problems.append(f"host {obj.id!r}: unknown parent_host {obj.parent_host!r}")
        head, _ = split_check_command(obj.check_command)
        if head not in BUILTIN_CHECKS:
            desc = config.plugin_registry.get(head)
            if desc is None:
                problems.append(f"object {obj.id!r}: check_command references unknown plugin {head!r}")
            elif desc.kind != PluginKind.MONITORING:
                problems.append(
                    f"object {obj.id!r}: {head!r} is a {desc.kind.value} plugin; "
                    "only MONITORING plugins can be scheduled"
                )

    for host_id, spec in doc.get("identities", {}).items():
        if host_id not in by_id:
            problems.append(f"identities: unknown object {host_id!r}")
            continue
        try:
            config.identities[host_id] = DeviceIdentity(
                sys_object_id=Oid(spec["sys_object_id"]) if spec.get("sys_object_id") else None,
                sys_descr=spec.get("sys_descr", ""),
            )
        except ValueError as exc:
            problems.append(f"identities[{host_id}]: {exc}")

    def resolve(key: str) -> Optional[Path]:
        value = doc.get(key)
        if not value:
            return None
        candidate = base / value if not Path(value).is_absolute() else Path(value)
        if not candidate.exists():
            problems.append(f"{key}: file not found: {candidate}")
            return None
        return candidate

    mib_path = resolve("mib_registry_path")
    if mib_path:
        try:
            config.mib_registry = MibRegistry.load(mib_path)
        except ConfigError as exc:
            problems.extend(exc.problems)

    rules_path = resolve("icon_rules_path")
    if rules_path:
        try:
            config.icon_rules = load_icon_rules(rules_path)
        except ConfigError as exc:
            problems.extend(exc.problems)

    fleet_path = resolve("fleet_path")
    if fleet_path:
        try:
            config.fleet_doc = json.loads(fleet_path.read_text(encoding="utf-8"))
            fleet_from_config(config.fleet_doc)  # validate now, rebuild per engine
        except json.JSONDecodeError as exc:
            problems.append(f"fleet config {fleet_path}:{exc.lineno}: {exc.msg}")
        except ConfigError as exc:
            problems.extend(exc.problems)

    config.eval_profiles_path = resolve("eval_profiles_path")

    # ui_path is lenient: a missing console directory only disables the UI
    ui_value = doc.get("ui_path")
    if ui_value:
        candidate = base / ui_value if not Path(ui_value).is_absolute() else Path(ui_value)
        config.ui_path = candidate if candidate.is_dir() else None

    if problems:
        raise ConfigError(f"invalid config {path}", problems)
    return config


def build_engine(config: EngineConfig, clock: Clock | None = None) -> Engine:
    fleet = fleet_from_config(config.fleet_doc) if config.fleet_doc else None
    if config.state_dir:
        config.state_dir.mkdir(parents=True, exist_ok=True)
    engine = Engine(
        config.objects,
        clock=clock,
        fleet=fleet,
        plugin_registry=config.plugin_registry,
        mib_registry=config.mib_registry,
        icon_rules=config.icon_rules,
        root_id=config.monitoring_station,
        community=config.community,
        snmp_timeout_ms=config.snmp_timeout_ms,
        snmp_retries=config.snmp_retries,
        txn_log_path=config.txn_log_file,
        identities=config.identities,
        capacities=config.capacities,
        parallel_checks=config.parallel_checks,
    )
    return engine
