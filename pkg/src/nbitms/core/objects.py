"""Monitored hosts and services."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

DEFAULT_CHECK_INTERVAL_S = 300.0
DEFAULT_RETRY_INTERVAL_S = 60.0
DEFAULT_MAX_CHECK_ATTEMPTS = 3


class ObjectKind(enum.Enum):
    HOST = "HOST"
    SERVICE = "SERVICE"


class CheckStatus(enum.Enum):
    """Plugin-reported status; hosts derive UP/DOWN from it."""

    OK = "OK"
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"
    UNKNOWN = "UNKNOWN"


class HostStatus(enum.Enum):
    UP = "UP"
    DOWN = "DOWN"
    UNREACHABLE = "UNREACHABLE"


class StateType(enum.Enum):
    SOFT = "SOFT"
    HARD = "HARD"


def host_status_of(status: CheckStatus) -> HostStatus:
    """OK means UP; any problem status means DOWN. UNREACHABLE is derived
    from topology, never from a check result."""
    return HostStatus.UP if status == CheckStatus.OK else HostStatus.DOWN


@dataclass(frozen=True)
class MonitoredObject:
    id: str
    kind: ObjectKind
    display_name: str
    address: str
    check_command: str
    parent_host: Optional[str] = None
    check_interval_s: float = DEFAULT_CHECK_INTERVAL_S
    retry_interval_s: float = DEFAULT_RETRY_INTERVAL_S
    max_check_attempts: int = DEFAULT_MAX_CHECK_ATTEMPTS

    def __post_init__(self):
        if not self.id:
            raise ValueError("object id must be non-empty")
        if self.kind == ObjectKind.SERVICE and not self.parent_host:
            raise ValueError(f"service {self.id!r} must carry a parent_host")
        if self.kind == ObjectKind.HOST and self.parent_host == self.id:
            raise ValueError(f"host {self.id!r} cannot be its own parent")
        if self.check_interval_s <= 0 or self.retry_interval_s <= 0:
            raise ValueError(f"{self.id!r}: intervals must be positive")
        if self.max_check_attempts < 1:
            raise ValueError(f"{self.id!r}: max_check_attempts must be >= 1")
