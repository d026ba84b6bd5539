"""Topology map: device graph, reachability shadowing, and the equipment-type
to icon matcher that replaces the bare "?" placeholder for known vendors."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nbitms.errors import ConfigError
from nbitms.core.objects import HostStatus, host_status_of
from nbitms.core.state import ObservedState
from nbitms.snmp.oid import Oid

FALLBACK_ICON = "?"
ROOT_ICON = "management-station"


class MatcherKind(enum.Enum):
    OID_PREFIX = "OID_PREFIX"
    DESCR_SUBSTRING = "DESCR_SUBSTRING"


@dataclass(frozen=True)
class IconRule:
    rule_id: str
    matcher_kind: MatcherKind
    oid_prefix: Optional[Oid] = None
    descr_substring: Optional[str] = None
    icon_id: str = FALLBACK_ICON
    priority: int = 0

    def __post_init__(self):
        if self.matcher_kind == MatcherKind.OID_PREFIX and self.oid_prefix is None:
            raise ValueError(f"rule {self.rule_id}: OID_PREFIX needs an oid")
        if self.matcher_kind == MatcherKind.DESCR_SUBSTRING and not self.descr_substring:
            raise ValueError(f"rule {self.rule_id}: DESCR_SUBSTRING needs a substring")


@dataclass(frozen=True)
class DeviceIdentity:
    sys_object_id: Optional[Oid] = None
    sys_descr: str = ""


@dataclass
class MapNode:
    host_id: str
    label: str
    parent: Optional[str] = None
    position: Optional[tuple[float, float]] = None
    identity: DeviceIdentity = field(default_factory=DeviceIdentity)
    resolved_icon: str = FALLBACK_ICON


class TopologyGraph:
    """Parent-link forest rooted at the management station."""

    def __init__(self, root_id: str = "management-station"):
        self.root_id = root_id
        self.nodes: dict[str, MapNode] = {}

    def add_node(self, node: MapNode) -> None:
        if node.host_id == self.root_id:
            raise ConfigError(f"host id {node.host_id!r} collides with the root id")
        if node.host_id in self.nodes:
            raise ConfigError(f"duplicate host {node.host_id!r} in topology")
        self.nodes[node.host_id] = node

    def parent_of(self, host_id: str) -> Optional[str]:
        node = self.nodes.get(host_id)
        if node is None:
            return None
        return node.parent  # None means attached to the root

    def validate(self) -> None:
        """Parent references must exist and the links must form a forest."""
        problems = []
        for node in self.nodes.values():
            if node.parent is not None and node.parent not in self.nodes:
                problems.append(f"host {node.host_id!r}: unknown parent {node.parent!r}")
        if problems:
            raise ConfigError("invalid topology", problems)
        for host_id in self.nodes:
            seen = {host_id}
            current = self.parent_of(host_id)
            while current is not None:
                if current in seen:
                    raise ConfigError(f"topology cycle through {current!r}")
                seen.add(current)
                current = self.parent_of(current)

    def ancestors(self, host_id: str) -> list[str]:
        chain = []
        current = self.parent_of(host_id)
        while current is not None:
            chain.append(current)
            current = self.parent_of(current)
        return chain


def match_icon(identity: DeviceIdentity, rules: list[IconRule]) -> str:
    """Highest-priority matching rule wins; ties go to the longest OID prefix,
    then the smallest rule id. No match resolves to the "?" fallback."""
    candidates = []
    descr_lower = identity.sys_descr.lower()
    for rule in rules:
        if rule.matcher_kind == MatcherKind.OID_PREFIX:
            if identity.sys_object_id is not None and identity.sys_object_id.starts_with(rule.oid_prefix):
                candidates.append((rule.priority, len(rule.oid_prefix), rule))
        else:
            if rule.descr_substring.lower() in descr_lower and descr_lower:
                candidates.append((rule.priority, 0, rule))
    if not candidates:
        return FALLBACK_ICON
    candidates.sort(key=lambda c: (-c[0], -c[1], c[2].rule_id))
    return candidates[0][2].icon_id


def compute_reachability(
    graph: TopologyGraph, host_states: dict[str, HostStatus]
) -> dict[str, HostStatus]:
    """A DOWN host below another DOWN host is reclassified UNREACHABLE;
    UP hosts are never reclassified."""
    graph.validate()
    effective: dict[str, HostStatus] = {}
    for host_id in graph.nodes:
        status = host_states.get(host_id, HostStatus.UP)
        if status == HostStatus.DOWN:
            shadowed = any(
                host_states.get(ancestor, HostStatus.UP) == HostStatus.DOWN
                for ancestor in graph.ancestors(host_id)
            )
            effective[host_id] = HostStatus.UNREACHABLE if shadowed else HostStatus.DOWN
        else:
            effective[host_id] = HostStatus.UP
    return effective


def load_icon_rules(path: str | Path) -> list[IconRule]:
    """Rules file: priority<TAB>matcher_kind<TAB>matcher_arg<TAB>icon_id."""
    rules = []
    problems = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            problems.append(f"{path}:{lineno}: expected 4 tab-separated fields")
            continue
        priority_text, kind_text, arg, icon_id = fields
        try:
            kind = MatcherKind(kind_text)
            rule = IconRule(
                rule_id=f"rule-{lineno}",
                matcher_kind=kind,
                oid_prefix=Oid(arg) if kind == MatcherKind.OID_PREFIX else None,
                descr_substring=arg if kind == MatcherKind.DESCR_SUBSTRING else None,
                icon_id=icon_id,
                priority=int(priority_text),
            )
        except ValueError as exc:
            problems.append(f"{path}:{lineno}: {exc}")
            continue
        rules.append(rule)
    if problems:
        raise ConfigError(f"invalid icon rules {path}", problems)
    return rules


def render_map_document(
    graph: TopologyGraph,
    snapshot: ObservedState,
    rules: list[IconRule],
    host_statuses: Optional[dict[str, HostStatus]] = None,
) -> dict:
    """One entry per node with label, icon, effective status, and alarm flag.

    Pure function of its inputs: identical (graph, snapshot, rules) yield
    byte-identical serialized documents.
    """
    if host_statuses is None:
        host_statuses = {}
        for node_id in graph.nodes:
            record = snapshot.record_for(node_id)
            if record is not None:
                host_statuses[node_id] = host_status_of(record.current_status)
    effective = compute_reachability(graph, host_statuses)

    alarmed_hosts = set()
    for alarm in snapshot.open_alarms:
        owner = alarm.object_id
        if owner in graph.nodes:
            alarmed_hosts.add(owner)
        else:
            # service alarms roll up to their host node when the id is host/service
            host_part = owner.split("/", 1)[0]
            if host_part in graph.nodes:
                alarmed_hosts.add(host_part)

    entries = []
    for host_id in sorted(graph.nodes):
        node = graph.nodes[host_id]
        entries.append(
            {
                "host_id": host_id,
                "label": node.label,
                "icon": match_icon(node.identity, rules),
                "status": effective[host_id].value,
                "alarmed": host_id in alarmed_hosts,
                "parent": node.parent if node.parent is not None else graph.root_id,
                "position": list(node.position) if node.position else None,
            }
        )
    return {
        "api_version": "v1",
        "generated_ts": snapshot.snapshot_ts,
        "root": {"host_id": graph.root_id, "icon": ROOT_ICON},
        "nodes": entries,
    }


def map_document_bytes(document: dict) -> bytes:
    return json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")
