"""Managed-object model, check-result state machine, and alarm lifecycle."""

from nbitms.core.objects import (
    CheckStatus,
    HostStatus,
    MonitoredObject,
    ObjectKind,
    StateType,
    host_status_of,
)
from nbitms.core.state import (
    CheckResult,
    EventKind,
    ObservedState,
    StateEvent,
    StateRecord,
    apply_check_result,
    initial_record,
    snapshot_states,
)
from nbitms.core.alarms import Alarm, AlarmState, AlarmStore

__all__ = [
    "CheckStatus",
    "HostStatus",
    "MonitoredObject",
    "ObjectKind",
    "StateType",
    "host_status_of",
    "CheckResult",
    "EventKind",
    "ObservedState",
    "StateEvent",
    "StateRecord",
    "apply_check_result",
    "initial_record",
    "snapshot_states",
    "Alarm",
    "AlarmState",
    "AlarmStore",
]
