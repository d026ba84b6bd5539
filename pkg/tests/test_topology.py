"""Icon matching, reachability shadowing, map rendering purity."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbitms.core.objects import CheckStatus, HostStatus
from nbitms.core.state import StateRecord, snapshot_states
from nbitms.errors import ConfigError
from nbitms.snmp.oid import Oid
from nbitms.topology import (
    FALLBACK_ICON,
    DeviceIdentity,
    IconRule,
    MapNode,
    MatcherKind,
    TopologyGraph,
    compute_reachability,
    load_icon_rules,
    map_document_bytes,
    match_icon,
    render_map_document,
)


def oid_rule(rule_id, prefix, icon_id, priority=10):
    return IconRule(
        rule_id=rule_id,
        matcher_kind=MatcherKind.OID_PREFIX,
        oid_prefix=Oid(prefix),
        icon_id=icon_id,
        priority=priority,
    )


def descr_rule(rule_id, substring, icon_id, priority=10):
    return IconRule(
        rule_id=rule_id,
        matcher_kind=MatcherKind.DESCR_SUBSTRING,
        descr_substring=substring,
        icon_id=icon_id,
        priority=priority,
    )


RULES = [
    oid_rule("r1", "1.3.6.1.4.1.9", "router-vendorA"),
    oid_rule("r2", "1.3.6.1.4.1.2636", "router-vendorB"),
    descr_rule("r3", "switch", "switch-generic", priority=5),
]


# ---------------------------------------------------------------------------
# Icon matching.

def test_vendor_prefix_resolves_icon():
    identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.620"))
    assert match_icon(identity, RULES) == "router-vendorA"


def test_unknown_identity_resolves_question_mark():
    identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.77777.1"))
    assert match_icon(identity, RULES) == FALLBACK_ICON


def test_empty_identity_resolves_question_mark():
    assert match_icon(DeviceIdentity(), RULES) == "?"


def test_longer_prefix_wins_at_equal_priority():
    rules = [
        oid_rule("short", "1.3.6.1.4.1", "generic", priority=10),
        oid_rule("long", "1.3.6.1.4.1.9", "specific", priority=10),
    ]
    identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.1"))
    assert match_icon(identity, rules) == "specific"


def test_priority_beats_prefix_length():
    rules = [
        oid_rule("short", "1.3.6.1.4.1", "generic", priority=100),
        oid_rule("long", "1.3.6.1.4.1.9", "specific", priority=10),
    ]
    identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.1"))
    assert match_icon(identity, rules) == "generic"


def test_descr_substring_case_insensitive():
    identity = DeviceIdentity(sys_descr="Acme SWITCH 24p")
    assert match_icon(identity, RULES) == "switch-generic"


def test_tie_on_everything_falls_to_rule_id():
    rules = [
        descr_rule("b-rule", "router", "icon-b", priority=7),
        descr_rule("a-rule", "router", "icon-a", priority=7),
    ]
    identity = DeviceIdentity(sys_descr="carrier router")
    assert match_icon(identity, rules) == "icon-a"


@given(st.integers(11, 1000))
def test_raising_priority_makes_rule_win(priority):
    rules = RULES + [oid_rule("boost", "1.3.6.1.4.1.9.1", "boosted", priority=priority)]
    identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.620"))
    assert match_icon(identity, rules) == "boosted"


def test_match_icon_total_over_inputs():
    # every input yields some icon (fallback guarantees totality)
    identities = [
        DeviceIdentity(),
        DeviceIdentity(sys_object_id=Oid("0.0")),
        DeviceIdentity(sys_descr="x" * 500),
    ]
    for identity in identities:
        assert isinstance(match_icon(identity, RULES), str)
        assert match_icon(identity, []) == "?"


# ---------------------------------------------------------------------------
# Reachability.

def chain_graph():
    graph = TopologyGraph(root_id="sc")
    graph.add_node(MapNode(host_id="gw", label="Gateway"))
    graph.add_node(MapNode(host_id="dist", label="Distribution", parent="gw"))
    graph.add_node(MapNode(host_id="edge", label="Edge", parent="dist"))
    graph.add_node(MapNode(host_id="standalone", label="Standalone"))
    return graph


def test_child_behind_down_parent_is_unreachable():
    graph = chain_graph()
    states = {"gw": HostStatus.DOWN, "dist": HostStatus.DOWN, "edge": HostStatus.UP,
              "standalone": HostStatus.UP}
    effective = compute_reachability(graph, states)
    assert effective["gw"] == HostStatus.DOWN
    assert effective["dist"] == HostStatus.UNREACHABLE
    assert effective["edge"] == HostStatus.UP


def test_down_child_of_up_parent_stays_down():
    graph = chain_graph()
    effective = compute_reachability(graph, {"dist": HostStatus.DOWN})
    assert effective["dist"] == HostStatus.DOWN


def test_all_up_unchanged():
    graph = chain_graph()
    effective = compute_reachability(graph, {})
    assert set(effective.values()) == {HostStatus.UP}


def test_deep_shadowing_through_unreachable_middle():
    graph = chain_graph()
    states = {"gw": HostStatus.DOWN, "dist": HostStatus.DOWN, "edge": HostStatus.DOWN}
    effective = compute_reachability(graph, states)
    assert effective["dist"] == HostStatus.UNREACHABLE
    assert effective["edge"] == HostStatus.UNREACHABLE


def test_reachability_monotonic_in_down_set():
    graph = chain_graph()
    base = {"gw": HostStatus.DOWN, "dist": HostStatus.DOWN}
    before = compute_reachability(graph, base)
    extended = dict(base, standalone=HostStatus.DOWN)
    after = compute_reachability(graph, extended)
    for host, status in before.items():
        if status == HostStatus.UNREACHABLE:
            assert after[host] == HostStatus.UNREACHABLE


def test_cycle_detection():
    graph = TopologyGraph(root_id="sc")
    graph.add_node(MapNode(host_id="a", label="A", parent="b"))
    graph.add_node(MapNode(host_id="b", label="B", parent="a"))
    with pytest.raises(ConfigError, match="cycle"):
        compute_reachability(graph, {})


def test_unknown_parent_rejected():
    graph = TopologyGraph(root_id="sc")
    graph.add_node(MapNode(host_id="a", label="A", parent="ghost"))
    with pytest.raises(ConfigError):
        graph.validate()


# ---------------------------------------------------------------------------
# Map document.

def demo_snapshot(status=CheckStatus.CRITICAL, alarms=()):
    records = [
        StateRecord(object_id="gw", current_status=CheckStatus.OK),
        StateRecord(object_id="dist", current_status=status),
        StateRecord(object_id="edge", current_status=CheckStatus.OK),
        StateRecord(object_id="standalone", current_status=CheckStatus.OK),
    ]
    return snapshot_states(records, list(alarms), now=42.0)


def test_map_document_assembles_fields():
    graph = chain_graph()
    graph.nodes["dist"].identity = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.620"))

    from nbitms.core.alarms import Alarm

    alarm = Alarm(alarm_id="alarm-1", object_id="dist", severity=CheckStatus.CRITICAL, opened_ts=41.0)
    doc = render_map_document(graph, demo_snapshot(alarms=[alarm]), RULES)
    nodes = {n["host_id"]: n for n in doc["nodes"]}
    assert nodes["dist"]["icon"] == "router-vendorA"
    assert nodes["dist"]["status"] == "DOWN"
    assert nodes["dist"]["alarmed"] is True
    assert nodes["gw"]["icon"] == "?"
    assert nodes["gw"]["alarmed"] is False
    assert doc["root"]["host_id"] == "sc"


def test_empty_graph_renders_empty_document():
    graph = TopologyGraph(root_id="sc")
    doc = render_map_document(graph, snapshot_states([], [], now=1.0), RULES)
    assert doc["nodes"] == []


def test_rendering_is_pure():
    graph = chain_graph()
    snapshot = demo_snapshot()
    a = map_document_bytes(render_map_document(graph, snapshot, RULES))
    b = map_document_bytes(render_map_document(graph, snapshot, RULES))
    assert a == b


def test_service_alarm_rolls_up_to_host_node():
    from nbitms.core.alarms import Alarm

    graph = chain_graph()
    alarm = Alarm(alarm_id="alarm-2", object_id="edge/http", severity=CheckStatus.CRITICAL, opened_ts=40.0)
    doc = render_map_document(graph, demo_snapshot(alarms=[alarm]), RULES)
    nodes = {n["host_id"]: n for n in doc["nodes"]}
    assert nodes["edge"]["alarmed"] is True


# ---------------------------------------------------------------------------
# Rules file.

def test_load_icon_rules(tmp_path):
    path = tmp_path / "icons.rules"
    path.write_text(
        "# vendor icons\n"
        "100\tOID_PREFIX\t1.3.6.1.4.1.9\trouter-vendorA\n"
        "50\tDESCR_SUBSTRING\tswitch\tswitch-generic\n",
        encoding="utf-8",
    )
    rules = load_icon_rules(path)
    assert len(rules) == 2
    assert rules[0].icon_id == "router-vendorA"
    assert rules[1].matcher_kind == MatcherKind.DESCR_SUBSTRING


def test_load_icon_rules_reports_problems(tmp_path):
    path = tmp_path / "icons.rules"
    path.write_text("abc\tOID_PREFIX\t1.3.6\tx\n5\tNOPE\ty\tz\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_icon_rules(path)
    assert len(err.value.problems) == 2
