"""Operational shell: config loading, persistence, HTTP API, event stream."""

from nbitms.gateway.config import EngineConfig, build_engine, load_config
from nbitms.gateway.persistence import PersistedState, load_state, persist_engine_state, restore_engine_state

__all__ = [
    "EngineConfig",
    "build_engine",
    "load_config",
    "PersistedState",
    "load_state",
    "persist_engine_state",
    "restore_engine_state",
]
