"""State persistence: line-delimited records, atomic whole-file replace.

A load after a persist reproduces records, alarms (with the id counter), and
schedule offsets exactly, so a restart carries every open alarm and hard
state across. A corrupt file is reported, never silently half-loaded.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nbitms.errors import LoadStateError
from nbitms.core.alarms import Alarm, AlarmState
from nbitms.core.objects import CheckStatus, StateType
from nbitms.core.state import StateRecord
from nbitms.scheduling import ScheduleEntry

FORMAT_VERSION = "v1"


@dataclass
class PersistedState:
    saved_ts: float
    alarm_seq: int
    records: list[StateRecord] = field(default_factory=list)
    alarms: list[Alarm] = field(default_factory=list)
    schedule: list[ScheduleEntry] = field(default_factory=list)


def _record_line(record: StateRecord) -> dict:
    return {
        "kind": "record",
        "object_id": record.object_id,
        "current_status": record.current_status.value,
        "state_type": record.state_type.value,
        "attempt": record.attempt,
        "last_check_ts": record.last_check_ts,
        "last_hard_change_ts": record.last_hard_change_ts,
        "last_output": record.last_output,
    }


def _alarm_line(alarm: Alarm) -> dict:
    return {
        "kind": "alarm",
        "alarm_id": alarm.alarm_id,
        "object_id": alarm.object_id,
        "severity": alarm.severity.value,
        "opened_ts": alarm.opened_ts,
        "state": alarm.state.value,
        "ack_by": alarm.ack_by,
        "closed_ts": alarm.closed_ts,
        "detail": alarm.detail,
    }


def _schedule_line(entry: ScheduleEntry) -> dict:
    return {
        "kind": "schedule",
        "object_id": entry.object_id,
        "next_due_ts": entry.next_due_ts,
        "interval_in_use_s": entry.interval_in_use_s,
    }


def persist_state(path: str | Path, state: PersistedState) -> None:
    path = Path(path)
    lines = [
        json.dumps(
            {
                "kind": "meta",
                "api_version": FORMAT_VERSION,
                "saved_ts": state.saved_ts,
                "alarm_seq": state.alarm_seq,
            },
            sort_keys=True,
        )
    ]
    lines += [json.dumps(_record_line(r), sort_keys=True) for r in state.records]
    lines += [json.dumps(_alarm_line(a), sort_keys=True) for a in state.alarms]
    lines += [json.dumps(_schedule_line(e), sort_keys=True) for e in state.schedule]
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_state(path: str | Path) -> Optional[PersistedState]:
    """None when the file does not exist (fresh start); LoadStateError when
    the file exists but cannot be trusted."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LoadStateError(f"cannot read state file {path}: {exc}")
    if not lines:
        raise LoadStateError(f"state file {path} is empty")

    state: Optional[PersistedState] = None
    try:
        for lineno, line in enumerate(lines, 1):
            doc = json.loads(line)
            kind = doc.get("kind")
            if kind == "meta":
                if doc.get("api_version") != FORMAT_VERSION:
                    raise LoadStateError(f"unsupported state format {doc.get('api_version')!r}")
                state = PersistedState(
                    saved_ts=float(doc["saved_ts"]), alarm_seq=int(doc["alarm_seq"])
                )
            elif state is None:
                raise LoadStateError(f"state file {path}: missing meta header")
            elif kind == "record":
                state.records.append(
                    StateRecord(
                        object_id=doc["object_id"],
                        current_status=CheckStatus(doc["current_status"]),
                        state_type=StateType(doc["state_type"]),
                        attempt=int(doc["attempt"]),
                        last_check_ts=doc["last_check_ts"],
                        last_hard_change_ts=doc["last_hard_change_ts"],
                        last_output=doc["last_output"],
                    )
                )
            elif kind == "alarm":
                state.alarms.append(
                    Alarm(
                        alarm_id=doc["alarm_id"],
                        object_id=doc["object_id"],
                        severity=CheckStatus(doc["severity"]),
                        opened_ts=float(doc["opened_ts"]),
                        state=AlarmState(doc["state"]),
                        ack_by=doc["ack_by"],
                        closed_ts=doc["closed_ts"],
                        detail=doc.get("detail", ""),
                    )
                )
            elif kind == "schedule":
                state.schedule.append(
                    ScheduleEntry(
                        object_id=doc["object_id"],
                        next_due_ts=float(doc["next_due_ts"]),
                        interval_in_use_s=float(doc["interval_in_use_s"]),
                    )
                )
            else:
                raise LoadStateError(f"state file {path}:{lineno}: unknown kind {kind!r}")
    except LoadStateError:
        raise
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise LoadStateError(f"corrupt state file {path}: {exc}")
    if state is None:
        raise LoadStateError(f"state file {path}: no meta header")
    return state


def persist_engine_state(engine, path: str | Path) -> None:
    with engine._lock:
        state = PersistedState(
            saved_ts=engine.clock.now(),
            alarm_seq=engine.alarms.next_seq,
            records=sorted(engine.records.values(), key=lambda r: r.object_id),
            alarms=engine.alarms.all(),
            schedule=sorted(engine.schedule.values(), key=lambda e: e.object_id),
        )
    persist_state(path, state)


def restore_engine_state(engine, state: PersistedState) -> None:
    """Apply a persisted state to a freshly built engine (same object set)."""
    with engine._lock:
        for record in state.records:
            if record.object_id in engine.records:
                engine.records[record.object_id] = record
        engine.alarms.restore(list(state.alarms), state.alarm_seq)
        for entry in state.schedule:
            if entry.object_id in engine.objects:
                engine.schedule[entry.object_id] = entry
        if engine._started_at is None:
            engine._started_at = engine.clock.now()
        engine._effective_statuses = engine._compute_effective()
