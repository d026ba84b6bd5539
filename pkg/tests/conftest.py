"""Shared fixtures: a complete demo deployment written into a temp directory."""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

MIB_TSV = """\
# system group
1.3.6.1.2.1.1.1\tsysDescr\tOctetString\tREAD_ONLY
1.3.6.1.2.1.1.2\tsysObjectID\tOid\tREAD_ONLY
1.3.6.1.2.1.1.3\tsysUpTime\tTimeTicks\tREAD_ONLY
1.3.6.1.2.1.1.4\tsysContact\tOctetString\tREAD_WRITE
1.3.6.1.2.1.1.5\tsysName\tOctetString\tREAD_WRITE
1.3.6.1.2.1.1.6\tsysLocation\tOctetString\tREAD_WRITE
1.3.6.1.2.1.2.2.1.7\tifAdminStatus\tInteger\tREAD_WRITE
1.3.6.1.2.1.2.2.1.8\tifOperStatus\tInteger\tREAD_ONLY\tiface
"""

ICON_RULES = """\
# priority\tmatcher\targ\ticon
100\tOID_PREFIX\t1.3.6.1.4.1.9\trouter-vendorA
100\tOID_PREFIX\t1.3.6.1.4.1.2636\trouter-vendorB
50\tDESCR_SUBSTRING\tswitch\tswitch-generic
"""


def fleet_doc(with_faults=False):
    def device(i, vendor_arc):
        dev = {
            "id": f"edge-{i}",
            "sys_object_id": f"1.3.6.1.4.1.{vendor_arc}",
            "community": "public",
            "oids": {
                "1.3.6.1.2.1.1.4.0": {
                    "type": "OctetString",
                    "value": f"noc-{i}@example.net",
                    "access": "READ_WRITE",
                },
                "1.3.6.1.2.1.2.2.1.7.1": {"type": "Integer", "value": 1, "access": "READ_WRITE"},
                "1.3.6.1.2.1.2.2.1.8.1": {"type": "Integer", "value": 1},
            },
        }
        if with_faults and i == 1:
            dev["faults"] = [
                {"kind": "SET_VALUE", "at": 30.0, "oid": "1.3.6.1.2.1.2.2.1.8.1",
                 "value": {"type": "Integer", "value": 2}}
            ]
        return dev

    return {
        "devices": [
            device(1, "9.1.620"),
            device(2, "2636.1.1.1"),
            device(3, "99999.5"),
        ]
    }


def engine_doc(state_dir=None):
    doc = {
        "api_version": "v1",
        "listen": "127.0.0.1:0",
        "community": "public",
        "snmp": {"timeout_ms": 200, "retries": 0},
        "monitoring_station": "noc",
        "mib_registry_path": "mib.tsv",
        "icon_rules_path": "icons.rules",
        "fleet_path": "fleet.json",
        "eval_profiles_path": "profiles.json",
        "capacities": {"cpu_cores": 1, "mem_mib": 512, "bw_mbit": 1},
        "identities": {
            "edge-1": {"sys_object_id": "1.3.6.1.4.1.9.1.620", "sys_descr": "edge router"},
        },
        "objects": [
            {
                "id": f"edge-{i}",
                "kind": "HOST",
                "display_name": f"Edge router {i}",
                "address": f"sim:edge-{i}",
                "check_command": "snmp-value!1.3.6.1.2.1.2.2.1.8.1!1",
                "check_interval_s": 5.0,
                "retry_interval_s": 1.0,
                "max_check_attempts": 1,
            }
            for i in (1, 2, 3)
        ],
        "plugins": [],
    }
    if state_dir:
        doc["state_dir"] = state_dir
    return doc


PROFILES = {
    "profiles": [
        {
            "tool_name": "nbitms",
            "synthetic_demo": True,
            "coverage": ["FAULT", "CONFIGURATION"],
            "samples": {
                "FAULT": {"q": 1.0, "o": 24.0, "c": 0.4},
                "CONFIGURATION": {"q": 1.0, "o": 2.0, "c": 0.4},
            },
        },
        {
            "tool_name": "monitor-classic",
            "synthetic_demo": True,
            "coverage": ["FAULT"],
            "samples": {"FAULT": {"q": 0.95, "o": 24.0, "c": 0.4}},
        },
        {
            "tool_name": "config-pusher",
            "synthetic_demo": True,
            "coverage": ["CONFIGURATION"],
            "samples": {"CONFIGURATION": {"q": 0.9, "o": 2.0, "c": 0.4}},
        },
        {
            "tool_name": "grapher",
            "synthetic_demo": True,
            "coverage": ["PERFORMANCE"],
            "samples": {"PERFORMANCE": {"q": 0.9, "o": 10.0, "c": 0.4}},
        },
    ]
}


def write_demo_deployment(root: Path, state_dir=None, with_faults=False) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "mib.tsv").write_text(MIB_TSV, encoding="utf-8")
    (root / "icons.rules").write_text(ICON_RULES, encoding="utf-8")
    (root / "fleet.json").write_text(json.dumps(fleet_doc(with_faults), indent=2), encoding="utf-8")
    (root / "profiles.json").write_text(json.dumps(PROFILES, indent=2), encoding="utf-8")
    config_path = root / "engine.json"
    config_path.write_text(json.dumps(engine_doc(state_dir), indent=2), encoding="utf-8")
    return config_path


@pytest.fixture
def demo_config(tmp_path):
    return write_demo_deployment(tmp_path / "demo")
