"""Alarm lifecycle: OPEN -> ACKNOWLEDGED -> CLOSED, one live alarm per object."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from nbitms.errors import InvalidStateError, NotFoundError
from nbitms.core.objects import CheckStatus
from nbitms.core.state import EventKind, StateEvent


class AlarmState(enum.Enum):
    OPEN = "OPEN"
    ACKNOWLEDGED = "ACKNOWLEDGED"
    CLOSED = "CLOSED"


@dataclass(frozen=True)
class Alarm:
    alarm_id: str
    object_id: str
    severity: CheckStatus
    opened_ts: float
    state: AlarmState = AlarmState.OPEN
    ack_by: Optional[str] = None
    closed_ts: Optional[float] = None
    detail: str = ""

    @property
    def is_closed(self) -> bool:
        return self.state == AlarmState.CLOSED


class AlarmStore:
    """Materializes alarms from state events; ids are a deterministic counter
    so replaying an event log reproduces identical alarms."""

    def __init__(self, next_seq: int = 1):
        self._alarms: dict[str, Alarm] = {}
        self._live_by_object: dict[str, str] = {}
        self._next_seq = next_seq

    def observe(self, event: StateEvent) -> Optional[Alarm]:
        if event.kind == EventKind.ALARM_OPENED:
            return self._open(event)
        if event.kind == EventKind.ALARM_CLOSED:
            return self._close(event)
        if event.kind == EventKind.STATE_CHANGED:
            return self._maybe_escalate(event)
        return None

    def _open(self, event: StateEvent) -> Alarm:
        if event.object_id in self._live_by_object:
            raise InvalidStateError(f"object {event.object_id} already has a live alarm")
        alarm = Alarm(
            alarm_id=f"alarm-{self._next_seq}",
            object_id=event.object_id,
            severity=event.status or CheckStatus.UNKNOWN,
            opened_ts=event.timestamp,
            detail=event.detail,
        )
        self._next_seq += 1
        self._alarms[alarm.alarm_id] = alarm
        self._live_by_object[event.object_id] = alarm.alarm_id
        return alarm

    def _close(self, event: StateEvent) -> Optional[Alarm]:
        alarm_id = self._live_by_object.pop(event.object_id, None)
        if alarm_id is None:
            return None
        alarm = replace(
            self._alarms[alarm_id], state=AlarmState.CLOSED, closed_ts=event.timestamp
        )
        self._alarms[alarm_id] = alarm
        return alarm

    def _maybe_escalate(self, event: StateEvent) -> Optional[Alarm]:
        # Severity shifts inside an open problem update the alarm in place.
        alarm_id = self._live_by_object.get(event.object_id)
        if alarm_id is None or event.status in (None, CheckStatus.OK):
            return None
        alarm = replace(self._alarms[alarm_id], severity=event.status)
        self._alarms[alarm_id] = alarm
        return alarm

    def acknowledge(self, alarm_id: str, operator_id: str) -> Alarm:
        """Idempotent on already-acknowledged alarms (first operator wins)."""
        alarm = self._alarms.get(alarm_id)
        if alarm is None:
            raise NotFoundError(f"no such alarm {alarm_id!r}")
        if alarm.state == AlarmState.CLOSED:
            raise InvalidStateError(f"alarm {alarm_id} is closed")
        if alarm.state == AlarmState.ACKNOWLEDGED:
            return alarm
        alarm = replace(alarm, state=AlarmState.ACKNOWLEDGED, ack_by=operator_id)
        self._alarms[alarm_id] = alarm
        return alarm

    def get(self, alarm_id: str) -> Alarm:
        alarm = self._alarms.get(alarm_id)
        if alarm is None:
            raise NotFoundError(f"no such alarm {alarm_id!r}")
        return alarm

    def live_for_object(self, object_id: str) -> Optional[Alarm]:
        alarm_id = self._live_by_object.get(object_id)
        return self._alarms[alarm_id] if alarm_id else None

    def all(self, state: Optional[AlarmState] = None) -> list[Alarm]:
        alarms = sorted(self._alarms.values(), key=lambda a: (a.opened_ts, a.alarm_id))
        if state is None:
            return alarms
        return [a for a in alarms if a.state == state]

    @property
    def next_seq(self) -> int:
        return self._next_seq

    def restore(self, alarms: list[Alarm], next_seq: int) -> None:
        """Rebuild from persisted alarms (used by state loading)."""
        self._alarms = {a.alarm_id: a for a in alarms}
        self._live_by_object = {
            a.object_id: a.alarm_id for a in alarms if not a.is_closed
        }
        self._next_seq = next_seq
