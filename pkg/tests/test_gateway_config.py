"""Config loading: full demo deployment, error aggregation, env overrides."""

import json

import pytest

from nbitms.clock import VirtualClock
from nbitms.errors import ConfigError
from nbitms.gateway.config import build_engine, load_config

from conftest import engine_doc, write_demo_deployment


def test_load_demo_config(demo_config):
    config = load_config(demo_config)
    assert len(config.objects) == 3
    assert len(config.mib_registry) == 8
    assert len(config.icon_rules) == 3
    assert config.fleet_doc is not None
    assert config.eval_profiles_path is not None
    assert config.monitoring_station == "noc"


def test_build_engine_from_demo(demo_config):
    config = load_config(demo_config)
    engine = build_engine(config, clock=VirtualClock())
    assert set(engine.objects) == {"edge-1", "edge-2", "edge-3"}
    assert engine.fleet is not None
    assert engine.fleet.device_ids() == ["edge-1", "edge-2", "edge-3"]


def test_parse_error_carries_position(tmp_path):
    path = tmp_path / "engine.json"
    path.write_text('{"objects": [}', encoding="utf-8")
    with pytest.raises(ConfigError, match=r":1:"):
        load_config(path)


def test_semantic_errors_aggregated(tmp_path):
    root = tmp_path / "demo"
    write_demo_deployment(root)
    doc = engine_doc()
    doc["objects"].append(
        {
            "id": "svc-orphan",
            "kind": "SERVICE",
            "parent_host": "ghost",
            "address": "sim:edge-1",
            "check_command": "snmp-reach",
        }
    )
    doc["objects"].append(
        {
            "id": "bad-plugin",
            "kind": "HOST",
            "address": "10.0.0.9",
            "check_command": "check_missing!1",
        }
    )
    (root / "engine.json").write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_config(root / "engine.json")
    problems = err.value.problems
    assert any("svc-orphan" in p and "ghost" in p for p in problems)
    assert any("check_missing" in p for p in problems)
    assert len(problems) == 2


def test_missing_referenced_file_reported(tmp_path):
    root = tmp_path / "demo"
    write_demo_deployment(root)
    (root / "mib.tsv").unlink()
    with pytest.raises(ConfigError) as err:
        load_config(root / "engine.json")
    assert any("mib_registry_path" in p for p in err.value.problems)


def test_duplicate_object_id_reported(tmp_path):
    root = tmp_path / "demo"
    write_demo_deployment(root)
    doc = engine_doc()
    doc["objects"].append(dict(doc["objects"][0]))
    (root / "engine.json").write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(ConfigError, match="duplicate"):
        load_config(root / "engine.json")


def test_configuration_plugin_cannot_be_scheduled(tmp_path):
    root = tmp_path / "demo"
    write_demo_deployment(root)
    doc = engine_doc()
    doc["plugins"] = [
        {"name": "push-cfg", "kind": "CONFIGURATION", "command_template": "/bin/true"}
    ]
    doc["objects"][0]["check_command"] = "push-cfg"
    (root / "engine.json").write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_config(root / "engine.json")
    assert any("only MONITORING plugins" in p for p in err.value.problems)


def test_parallel_checks_engine_runs_batch(demo_config):
    config = load_config(demo_config)
    assert config.parallel_checks == 8
    engine = build_engine(config, clock=VirtualClock())
    assert engine._check_pool is not None
    engine.start()
    engine.run_until(20.0)
    assert all(r.last_check_ts is not None for r in engine.records.values())
    engine.shutdown()


def test_env_overrides(demo_config, monkeypatch):
    monkeypatch.setenv("NBITMS_LISTEN", "0.0.0.0:9999")
    monkeypatch.setenv("NBITMS_STATE_DIR", "/tmp/nbitms-test-state")
    config = load_config(demo_config)
    assert config.listen == "0.0.0.0:9999"
    assert str(config.state_dir) == "/tmp/nbitms-test-state"
