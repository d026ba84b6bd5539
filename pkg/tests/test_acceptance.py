"""Acceptance suite: each test implements one release criterion at its stated
tolerance and prints one PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import random
import time
from contextlib import contextmanager

import pytest

from nbitms.clock import VirtualClock
from nbitms.configmgmt import (
    DeviceDirective,
    DirectiveVia,
    OperatorCommand,
    TxnPhase,
)
from nbitms.core import (
    AlarmStore,
    CheckResult,
    CheckStatus,
    EventKind,
    MonitoredObject,
    ObjectKind,
    apply_check_result,
    initial_record,
)
from nbitms.errors import DomainError
from nbitms.evaluation import (
    ManagementFunction,
    MetricSample,
    ToolProfile,
    compare_tools,
    fcaps_score,
    measure_fault_window,
    performance,
)
from nbitms.gateway.persistence import load_state, persist_engine_state, restore_engine_state
from nbitms.snmp import ber
from nbitms.snmp.client import SnmpClient
from nbitms.snmp.codec import Message, Pdu, PduType, decode_message, encode_message
from nbitms.snmp.mib import MibAccess, MibEntry, MibRegistry
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import (
    Counter32,
    EndOfMibView,
    Gauge32,
    Integer,
    IpAddress,
    NoSuchInstance,
    NoSuchObject,
    Null,
    ObjectIdentifier,
    OctetString,
    TimeTicks,
)
from nbitms.simfleet import (
    DeviceProfile,
    InProcessTransport,
    SimAgent,
    SimFleet,
    StoreEntry,
)
from nbitms.topology import DeviceIdentity, IconRule, MatcherKind, match_icon

import ber_reference as ref
from engine_harness import build_fleet_engine, oracle_expected_quality
from state_oracle import all_sequences, expected_trace

F = ManagementFunction


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


# ---------------------------------------------------------------------------

def test_fcaps_ratings_exact():
    with criterion("FCAPS ratings: fault+config == 0.40, fault == 0.20, exact, < 1 s"):
        started = time.monotonic()
        assert fcaps_score({F.FAULT, F.CONFIGURATION}) == 0.40
        assert fcaps_score({F.FAULT}) == 0.20
        assert fcaps_score(set(F)) == 1.00
        assert fcaps_score(set()) == 0.00
        assert time.monotonic() - started < 1.0


def test_effectiveness_formula_properties():
    with criterion("Effectiveness formula: homogeneity on 1000 triples @ 1e-12; C<=0 rejected"):
        rng = random.Random(20240901)
        for _ in range(1000):
            q = rng.uniform(0.0, 1.0)
            o = rng.uniform(0.0, 1e4)
            c = rng.uniform(1e-3, 1e3)
            alpha = rng.uniform(0.01, 1.0)  # keeps alpha*q inside [0,1]
            beta = rng.uniform(1e-3, 1e3)
            base = performance(q, o, c)
            assert math.isclose(performance(alpha * q, o, c), alpha * base,
                                rel_tol=1e-12, abs_tol=1e-300)
            assert math.isclose(performance(q, beta * o, c), beta * base,
                                rel_tol=1e-12, abs_tol=1e-300)
            assert math.isclose(performance(q, o, beta * c), base / beta,
                                rel_tol=1e-12, abs_tol=1e-300)
            with pytest.raises(DomainError):
                performance(q, o, 0.0)
            with pytest.raises(DomainError):
                performance(q, o, -c)


def test_ranking_invariance_under_cost_scaling():
    with criterion("Ranking invariance: common cost scaling, 200 trials, 0 violations"):
        rng = random.Random(20240902)
        violations = 0
        for _ in range(200):
            profiles = []
            for i in range(rng.randint(2, 6)):
                coverage = rng.sample(list(F), rng.randint(0, 5))
                samples = {
                    f: MetricSample(
                        function=f,
                        q=rng.uniform(0, 1),
                        o=rng.uniform(0, 100),
                        c=rng.uniform(0.1, 10),
                    )
                    for f in coverage
                }
                profiles.append(
                    ToolProfile(tool_name=f"tool-{i}", coverage=set(coverage), samples=samples)
                )
            alpha = rng.uniform(0.1, 10.0)
            scaled = [
                ToolProfile(
                    tool_name=p.tool_name,
                    coverage=p.coverage,
                    samples={
                        f: MetricSample(function=f, q=s.q, o=s.o, c=s.c * alpha)
                        for f, s in p.samples.items()
                    },
                )
                for p in profiles
            ]
            if compare_tools(profiles).ranking != compare_tools(scaled).ranking:
                violations += 1
        assert violations == 0


def test_comparison_shape_fault_plus_config_ranks_first():
    with criterion("Comparison shape: fault+config profile strictly first at equal cost"):
        fault_sample = MetricSample(function=F.FAULT, q=0.9, o=40.0, c=1.5)
        config_sample = MetricSample(function=F.CONFIGURATION, q=0.9, o=4.0, c=1.5)
        singles = [
            ToolProfile(tool_name=name, coverage={F.FAULT}, samples={F.FAULT: fault_sample})
            for name in ("monitor-a", "monitor-b", "monitor-c")
        ]
        combined = ToolProfile(
            tool_name="combined",
            coverage={F.FAULT, F.CONFIGURATION},
            samples={F.FAULT: fault_sample, F.CONFIGURATION: config_sample},
        )
        report = compare_tools(singles + [combined])
        assert report.ranking[0] == "combined"
        runner_up = report.per_tool[report.ranking[1]]["aggregate"]
        assert report.per_tool["combined"]["aggregate"] > runner_up
        assert report.per_tool["combined"]["fcaps_score"] == 0.40


# ---------------------------------------------------------------------------

def _random_oid(rng):
    first = rng.randint(0, 2)
    second = rng.randint(0, 39) if first < 2 else rng.randint(0, 1000)
    tail = [rng.randint(0, 2**32 - 1) for _ in range(rng.randint(0, 8))]
    return Oid((first, second, *tail))


def _random_value(rng):
    kind = rng.randrange(11)
    if kind == 0:
        return Integer(rng.randint(-(2**63), 2**63 - 1))
    if kind == 1:
        return OctetString(bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 24))))
    if kind == 2:
        return Null()
    if kind == 3:
        return ObjectIdentifier(_random_oid(rng))
    if kind == 4:
        return IpAddress(bytes(rng.getrandbits(8) for _ in range(4)))
    if kind == 5:
        return Counter32(rng.randint(0, 2**32 - 1))
    if kind == 6:
        return Gauge32(rng.randint(0, 2**32 - 1))
    if kind == 7:
        return TimeTicks(rng.randint(0, 2**32 - 1))
    if kind == 8:
        return NoSuchObject()
    if kind == 9:
        return NoSuchInstance()
    return EndOfMibView()


def _random_message(rng):
    pdu_type = rng.choice(list(PduType))
    varbinds = tuple((_random_oid(rng), _random_value(rng)) for _ in range(rng.randint(0, 5)))
    if pdu_type == PduType.RESPONSE:
        error_status = rng.randint(0, 18)
        error_index = rng.randint(0, len(varbinds))
    else:
        error_status = error_index = 0
    return Message(
        community=bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 16))),
        pdu=Pdu(
            pdu_type=pdu_type,
            request_id=rng.randint(-(2**31), 2**31 - 1),
            varbinds=varbinds,
            error_status=error_status,
            error_index=error_index,
        ),
    )


def test_codec_roundtrip_and_oracle_fixtures():
    with criterion("Codec: 10,000-message round-trip; fixture bytes match BER oracle"):
        # frozen fixtures, re-derived from the independent reference encoder
        oid_arcs = (1, 3, 6, 1, 2, 1, 1, 1, 0)
        assert ref.ref_oid(oid_arcs) == bytes.fromhex("06082B06010201010100")
        assert ber.encode_tlv(0x06, ber.encode_oid_content(oid_arcs)) == ref.ref_oid(oid_arcs)
        assert ref.ref_integer(130) == bytes.fromhex("02020082")
        assert ber.encode_tlv(0x02, ber.encode_signed_int(130)) == ref.ref_integer(130)

        rng = random.Random(20240903)
        for _ in range(10_000):
            msg = _random_message(rng)
            wire = encode_message(msg)
            assert decode_message(wire) == msg
            assert encode_message(decode_message(wire)) == wire


# ---------------------------------------------------------------------------

def test_state_machine_exhaustive_against_oracle():
    with criterion("State machine: exhaustive <=6 sequences vs oracle; alarm parity everywhere"):
        for max_attempts in (1, 2, 3):
            obj = MonitoredObject(
                id="host",
                kind=ObjectKind.HOST,
                display_name="host",
                address="10.0.0.1",
                check_command="check",
                max_check_attempts=max_attempts,
            )
            for seq in all_sequences(["OK", "CRITICAL"], 6):
                record = initial_record(obj.id)
                store = AlarmStore()
                opened = closed = 0
                expected = expected_trace(seq, max_attempts)
                for step, (status, want) in enumerate(zip(seq, expected)):
                    result = CheckResult(obj.id, CheckStatus(status), "", float(step))
                    record, events = apply_check_result(record, result, obj)
                    for event in events:
                        store.observe(event)
                        if event.kind == EventKind.ALARM_OPENED:
                            opened += 1
                        elif event.kind == EventKind.ALARM_CLOSED:
                            closed += 1
                    assert record.current_status.value == want["status"]
                    assert record.state_type.value == want["state_type"]
                    assert record.attempt == want["attempt"]
                    assert (store.live_for_object(obj.id) is not None) == want["alarm_open"]
                    assert [e.kind.value for e in events] == want["events"]
                    assert opened - closed in (0, 1)


# ---------------------------------------------------------------------------

SYS_CONTACT = Oid("1.3.6.1.2.1.1.4.0")
SYS_NAME = Oid("1.3.6.1.2.1.1.5.0")
IF_ADMIN = Oid("1.3.6.1.2.1.2.2.1.7.1")
AGENT_RO = Oid("1.3.6.1.4.1.42.7.0")  # read-only on the agent, absent from the MIB registry


def _config_fleet():
    def profile(i):
        return DeviceProfile(
            device_id=f"edge-{i}",
            sys_object_id=Oid(f"1.3.6.1.4.1.9.1.{600 + i}"),
            oid_store={
                SYS_CONTACT: StoreEntry(OctetString.from_text("old@example.net"), MibAccess.READ_WRITE),
                IF_ADMIN: StoreEntry(Integer(1), MibAccess.READ_WRITE),
                AGENT_RO: StoreEntry(Integer(7), MibAccess.READ_ONLY),
            },
        )

    return SimFleet([SimAgent(profile(i)) for i in (1, 2, 3)])


def _store_bytes(agent):
    """Byte-exact image of the agent's OID store."""
    blob = b""
    for oid in sorted(agent.store):
        entry = agent.store[oid]
        vb = encode_message(
            Message(
                community=b"x",
                pdu=Pdu(pdu_type=PduType.RESPONSE, request_id=1, varbinds=((oid, entry.value),)),
            )
        )
        blob += vb
    return blob


def test_config_loop_end_to_end():
    with criterion("Config loop: 3-agent fleet, 2-directive COMMIT + readback; "
                   "notWritable -> ROLLED_BACK byte-for-byte, < 10 s"):
        started = time.monotonic()
        from nbitms.configmgmt import ConfigManager

        clock = VirtualClock()
        fleet = _config_fleet()
        registry = MibRegistry()
        registry.add(MibEntry(Oid("1.3.6.1.2.1.1.4"), "sysContact", "OctetString", MibAccess.READ_WRITE))
        registry.add(MibEntry(Oid("1.3.6.1.2.1.2.2.1.7"), "ifAdminStatus", "Integer", MibAccess.READ_WRITE))

        clients = {}

        def client_for(device):
            if device not in clients:
                clients[device] = SnmpClient(
                    InProcessTransport(fleet.agent(device), clock),
                    timeout_ms=200, retries=0, clock=clock,
                )
            return clients[device]

        manager = ConfigManager(client_factory=client_for, registry=registry, clock=clock)

        # 1) two directives reach COMMITTED, readback equals intended values
        intended_contact = OctetString.from_text("noc@example.net")
        intended_admin = Integer(2)
        txn = manager.execute(
            OperatorCommand(
                command_id="cmd-commit",
                operator_id="noc1",
                target_device="edge-1",
                directives=(
                    DeviceDirective(via=DirectiveVia.SNMP_SET, oid=SYS_CONTACT,
                                    intended_value=intended_contact),
                    DeviceDirective(via=DirectiveVia.SNMP_SET, oid=IF_ADMIN,
                                    intended_value=intended_admin),
                ),
            )
        )
        assert txn.phase == TxnPhase.COMMITTED
        reader = client_for("edge-1")
        assert reader.get_one(SYS_CONTACT) == intended_contact
        assert reader.get_one(IF_ADMIN) == intended_admin

        # 2) injected notWritable failure: pre-state restored byte-for-byte
        agent2 = fleet.agent("edge-2")
        before = _store_bytes(agent2)
        txn2 = manager.execute(
            OperatorCommand(
                command_id="cmd-rollback",
                operator_id="noc1",
                target_device="edge-2",
                directives=(
                    DeviceDirective(via=DirectiveVia.SNMP_SET, oid=SYS_CONTACT,
                                    intended_value=OctetString.from_text("changed@example.net")),
                    DeviceDirective(via=DirectiveVia.SNMP_SET, oid=AGENT_RO,
                                    intended_value=Integer(9)),
                ),
            )
        )
        assert txn2.phase == TxnPhase.ROLLED_BACK
        assert _store_bytes(agent2) == before
        assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------

def test_fault_detection_quality():
    with criterion("Fault detection quality: Q == 1.0 clean run, Q == 0.8 with 2 muted agents"):
        deadline_s = 15.0
        window = (20.0, 60.0)
        fault_at = {i: 30.0 + i for i in range(10)}

        engine, fleet, _ = build_fleet_engine(n_devices=10, check_interval_s=5.0,
                                              fault_at=fault_at)
        engine.start()
        engine.run_until(60.0)
        expected = oracle_expected_quality(fleet.injection_log(), deadline_s, window, 5.0)
        assert expected == 1.0  # oracle prediction from the injection script
        sample = measure_fault_window(engine.stats(), fleet.injection_log(), deadline_s, window)
        assert sample.q == 1.0

        engine2, fleet2, _ = build_fleet_engine(
            n_devices=10, check_interval_s=5.0, fault_at=fault_at, mute_at={3: 2.0, 7: 2.0}
        )
        engine2.start()
        engine2.run_until(60.0)
        expected2 = oracle_expected_quality(fleet2.injection_log(), deadline_s, window, 5.0)
        assert expected2 == 0.8
        sample2 = measure_fault_window(engine2.stats(), fleet2.injection_log(), deadline_s, window)
        assert sample2.q == 0.8


# ---------------------------------------------------------------------------

def test_icon_matching_behavior():
    with criterion("Icon matching: unknown -> '?', vendor prefix -> icon, longest prefix wins"):
        rules = [
            IconRule(rule_id="generic", matcher_kind=MatcherKind.OID_PREFIX,
                     oid_prefix=Oid("1.3.6.1.4.1"), icon_id="generic-device", priority=10),
            IconRule(rule_id="vendorA", matcher_kind=MatcherKind.OID_PREFIX,
                     oid_prefix=Oid("1.3.6.1.4.1.9"), icon_id="router-vendorA", priority=10),
        ]
        unknown = DeviceIdentity(sys_object_id=Oid("1.3.6.1.2.1.99"))
        assert match_icon(unknown, rules) == "?"
        assert match_icon(DeviceIdentity(), rules) == "?"
        known = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.9.1.620"))
        assert match_icon(known, rules) == "router-vendorA"  # longer prefix beats generic
        other = DeviceIdentity(sys_object_id=Oid("1.3.6.1.4.1.2636.1"))
        assert match_icon(other, rules) == "generic-device"


# ---------------------------------------------------------------------------

def test_crash_continuity(tmp_path):
    with criterion("Crash continuity: persist -> kill -> restart reproduces hard states and open alarms"):
        engine1, _, _ = build_fleet_engine(n_devices=6, fault_at={0: 6.0, 3: 8.0, 5: 9.0})
        engine1.start()
        engine1.run_until(25.0)
        engine1.ack_alarm(engine1.alarms.live_for_object("host-3").alarm_id, "noc1")
        path = tmp_path / "state.jsonl"
        persist_engine_state(engine1, path)

        engine2, _, _ = build_fleet_engine(n_devices=6)  # fresh process image
        engine2.start()
        restore_engine_state(engine2, load_state(path))

        assert engine2.records == engine1.records
        alive1 = {a.object_id: a for a in engine1.alarms.all() if not a.is_closed}
        alive2 = {a.object_id: a for a in engine2.alarms.all() if not a.is_closed}
        assert alive1 == alive2
        assert set(alive1) == {"host-0", "host-3", "host-5"}
        assert alive2["host-3"].state.value == "ACKNOWLEDGED"
