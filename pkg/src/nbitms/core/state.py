"""The soft/hard check-result state machine.

A problem status is tentative (SOFT) until max_check_attempts consecutive
non-OK results confirm it (HARD); only hard transitions raise or clear
alarms. apply_check_result is pure: replaying a result log reproduces
identical states and events.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from nbitms.errors import ContractViolationError
from nbitms.core.objects import CheckStatus, MonitoredObject, StateType


class EventKind(enum.Enum):
    STATE_CHANGED = "STATE_CHANGED"
    ALARM_OPENED = "ALARM_OPENED"
    ALARM_CLOSED = "ALARM_CLOSED"


@dataclass(frozen=True)
class StateEvent:
    kind: EventKind
    object_id: str
    timestamp: float
    detail: str = ""
    status: Optional[CheckStatus] = None


@dataclass(frozen=True)
class CheckResult:
    object_id: str
    status: CheckStatus
    output: str = ""
    timestamp: float = 0.0


@dataclass(frozen=True)
class StateRecord:
    object_id: str
    current_status: CheckStatus = CheckStatus.OK
    state_type: StateType = StateType.HARD
    attempt: int = 1
    last_check_ts: Optional[float] = None
    last_hard_change_ts: Optional[float] = None
    last_output: str = ""

    @property
    def problem_confirmed(self) -> bool:
        """True exactly while an alarm should be open for this object."""
        return self.state_type == StateType.HARD and self.current_status != CheckStatus.OK


def initial_record(object_id: str) -> StateRecord:
    return StateRecord(object_id=object_id)


def apply_check_result(
    record: StateRecord, result: CheckResult, obj: MonitoredObject
) -> tuple[StateRecord, list[StateEvent]]:
    """Fold one check result into the record.

    OK is absorbing: a single OK yields HARD OK at any soft depth. A non-OK
    result increments the attempt counter until max_check_attempts, at which
    point the state hardens and an alarm opens. Severity changes inside a
    hard problem update status without opening a second alarm.
    """
    if record.object_id != obj.id or result.object_id != obj.id:
        raise ContractViolationError(
            f"record/result/object ids disagree: {record.object_id}, {result.object_id}, {obj.id}"
        )

    now = result.timestamp
    was_confirmed = record.problem_confirmed
    status_changed = result.status != record.current_status

    if result.status == CheckStatus.OK:
        new_state = StateType.HARD
        new_attempt = 1
    elif record.problem_confirmed:
        # Already a hard problem: stay hard whatever the (non-OK) severity.
        new_state = StateType.HARD
        new_attempt = obj.max_check_attempts
    else:
        # Starting or deepening a soft problem.
        attempt = 1 if record.current_status == CheckStatus.OK else record.attempt + 1
        attempt = min(attempt, obj.max_check_attempts)
        if attempt >= obj.max_check_attempts:
            new_state = StateType.HARD
            new_attempt = obj.max_check_attempts
        else:
            new_state = StateType.SOFT
            new_attempt = attempt

    hard_changed = new_state == StateType.HARD and (
        record.state_type != StateType.HARD or status_changed
    )
    new_record = replace(
        record,
        current_status=result.status,
        state_type=new_state,
        attempt=new_attempt,
        last_check_ts=now,
        last_hard_change_ts=now if hard_changed else record.last_hard_change_ts,
        last_output=result.output,
    )

    events: list[StateEvent] = []
    if status_changed:
        events.append(
            StateEvent(
                kind=EventKind.STATE_CHANGED,
                object_id=obj.id,
                timestamp=now,
                detail=f"{record.current_status.value} -> {result.status.value} ({new_state.value})",
                status=result.status,
            )
        )
    now_confirmed = new_record.problem_confirmed
    if now_confirmed and not was_confirmed:
        events.append(
            StateEvent(
                kind=EventKind.ALARM_OPENED,
                object_id=obj.id,
                timestamp=now,
                detail=result.output,
                status=result.status,
            )
        )
    elif was_confirmed and not now_confirmed:
        events.append(
            StateEvent(
                kind=EventKind.ALARM_CLOSED,
                object_id=obj.id,
                timestamp=now,
                detail=result.output,
                status=result.status,
            )
        )
    return new_record, events


@dataclass(frozen=True)
class ObservedState:
    """Immutable point-in-time view of every record plus open alarms."""

    snapshot_ts: float
    records: tuple[StateRecord, ...]
    open_alarms: tuple = ()

    def record_for(self, object_id: str) -> Optional[StateRecord]:
        for record in self.records:
            if record.object_id == object_id:
                return record
        return None


def snapshot_states(records, alarms, now: float) -> ObservedState:
    """Records sorted by object id; alarms restricted to non-closed ones."""
    ordered = tuple(sorted(records, key=lambda r: r.object_id))
    open_alarms = tuple(a for a in alarms if not a.is_closed)
    return ObservedState(snapshot_ts=now, records=ordered, open_alarms=open_alarms)
