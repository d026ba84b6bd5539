"""Simulated SNMP agent fleet with scripted fault injection."""

from nbitms.simfleet.agent import (
    DeviceProfile,
    FaultInjection,
    FaultKind,
    InjectionRecord,
    SimAgent,
    StoreEntry,
    handle_pdu,
)
from nbitms.simfleet.fleet import (
    InProcessTransport,
    SimFleet,
    UdpAgentServer,
    fleet_from_config,
)

__all__ = [
    "DeviceProfile",
    "FaultInjection",
    "FaultKind",
    "InjectionRecord",
    "SimAgent",
    "StoreEntry",
    "handle_pdu",
    "InProcessTransport",
    "SimFleet",
    "UdpAgentServer",
    "fleet_from_config",
]
