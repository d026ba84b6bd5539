"""Check scheduling: interleaved initial offsets, due-batch extraction,
retry-aware rescheduling. Driven entirely by an injected clock."""

from __future__ import annotations

from dataclasses import dataclass

from nbitms.core.objects import MonitoredObject, StateType
from nbitms.core.state import StateRecord


@dataclass(frozen=True)
class ScheduleEntry:
    object_id: str
    next_due_ts: float
    interval_in_use_s: float


def build_schedule(objects: list[MonitoredObject], now: float) -> list[ScheduleEntry]:
    """Objects sharing a check interval T are spread at offsets k*T/N in
    stable id order, so simultaneous start never means simultaneous checks."""
    groups: dict[float, list[MonitoredObject]] = {}
    for obj in objects:
        groups.setdefault(obj.check_interval_s, []).append(obj)
    entries = []
    for interval, members in groups.items():
        members.sort(key=lambda o: o.id)
        n = len(members)
        for k, obj in enumerate(members):
            entries.append(
                ScheduleEntry(
                    object_id=obj.id,
                    next_due_ts=now + k * interval / n,
                    interval_in_use_s=interval,
                )
            )
    entries.sort(key=lambda e: (e.next_due_ts, e.object_id))
    return entries


def next_due(schedule: list[ScheduleEntry], now: float) -> list[str]:
    """All due object ids, ordered by due time then id; schedule untouched."""
    due = [e for e in schedule if e.next_due_ts <= now]
    due.sort(key=lambda e: (e.next_due_ts, e.object_id))
    return [e.object_id for e in due]


def reschedule_after_result(
    entry: ScheduleEntry, new_record: StateRecord, obj: MonitoredObject, now: float
) -> ScheduleEntry:
    """Soft problems poll again at the retry interval; hard states return to
    the normal check interval. Never schedules into the past."""
    if new_record.state_type == StateType.SOFT:
        interval = obj.retry_interval_s
    else:
        interval = obj.check_interval_s
    return ScheduleEntry(
        object_id=entry.object_id,
        next_due_ts=now + interval,
        interval_in_use_s=interval,
    )
