"""One simulated SNMP agent: an OID store behind v2c GET/GETNEXT/SET semantics,
with mute/latency/value faults applied on a schedule.

Every injected fault lands in the injection log exactly once with its
effective timestamp; the log is the ground truth against which fault
detection quality is measured.
"""

from __future__ import annotations

import bisect
import enum
import threading
from dataclasses import dataclass, field, replace
from typing import Optional

from nbitms.snmp.codec import ErrorStatus, Message, Pdu, PduType
from nbitms.snmp.mib import MibAccess
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import (
    BerValue,
    EndOfMibView,
    NoSuchObject,
    ObjectIdentifier,
    OctetString,
)

SYS_DESCR = Oid("1.3.6.1.2.1.1.1.0")
SYS_OBJECT_ID = Oid("1.3.6.1.2.1.1.2.0")
SYS_NAME = Oid("1.3.6.1.2.1.1.5.0")


@dataclass(frozen=True)
class StoreEntry:
    value: BerValue
    access: MibAccess = MibAccess.READ_ONLY


class FaultKind(enum.Enum):
    SET_VALUE = "SET_VALUE"
    MUTE = "MUTE"
    LATENCY = "LATENCY"
    RESTORE = "RESTORE"


@dataclass(frozen=True)
class FaultInjection:
    kind: FaultKind
    effective_at: float
    oid: Optional[Oid] = None
    value: Optional[BerValue] = None
    latency_ms: float = 0.0

    def __post_init__(self):
        if self.kind == FaultKind.SET_VALUE and (self.oid is None or self.value is None):
            raise ValueError("SET_VALUE fault needs oid and value")
        if self.kind == FaultKind.LATENCY and self.latency_ms <= 0:
            raise ValueError("LATENCY fault needs a positive latency_ms")


@dataclass(frozen=True)
class InjectionRecord:
    device_id: str
    kind: FaultKind
    effective_at: float
    oid: Optional[Oid] = None
    detail: str = ""


@dataclass
class DeviceProfile:
    device_id: str
    sys_object_id: Oid
    oid_store: dict[Oid, StoreEntry] = field(default_factory=dict)
    latency_ms: float = 0.0
    fault_script: list[FaultInjection] = field(default_factory=list)
    community: str = "public"
    # Scripted effective_at values are offsets from the agent's first
    # activation ("relative", works on any clock) or raw timestamps.
    script_times: str = "relative"

    def __post_init__(self):
        # The system group identity leaves are always present.
        self.oid_store.setdefault(
            SYS_DESCR, StoreEntry(OctetString.from_text(f"{self.device_id} simulated device"))
        )
        self.oid_store.setdefault(
            SYS_OBJECT_ID, StoreEntry(ObjectIdentifier(self.sys_object_id))
        )
        self.oid_store.setdefault(
            SYS_NAME, StoreEntry(OctetString.from_text(self.device_id), MibAccess.READ_WRITE)
        )


def handle_pdu(
    store: dict[Oid, StoreEntry], community: str, msg: Message
) -> Optional[Message]:
    """Pure v2c agent semantics over an OID store.

    Community mismatch is silence (None). SET validates access then syntax
    for every varbind before applying any of them, so a failed SET leaves
    the store untouched.
    """
    if msg.community != community.encode():
        return None
    pdu = msg.pdu
    if pdu.pdu_type == PduType.GET:
        varbinds = tuple(
            (oid, store[oid].value if oid in store else NoSuchObject())
            for oid, _ in pdu.varbinds
        )
        return _response(msg, varbinds)
    if pdu.pdu_type == PduType.GETNEXT:
        ordered = sorted(store)
        varbinds = []
        for oid, _ in pdu.varbinds:
            idx = bisect.bisect_right(ordered, oid)
            if idx < len(ordered):
                successor = ordered[idx]
                varbinds.append((successor, store[successor].value))
            else:
                varbinds.append((oid, EndOfMibView()))
        return _response(msg, tuple(varbinds))
    if pdu.pdu_type == PduType.SET:
        return _handle_set(store, msg)
    # RESPONSE sent at an agent: not meaningful, answer genErr.
    return _response(msg, pdu.varbinds, error_status=int(ErrorStatus.GEN_ERR), error_index=0)


def _handle_set(store: dict[Oid, StoreEntry], msg: Message) -> Message:
    # Validate every varbind before touching the store (all-or-nothing).
    for index, (oid, value) in enumerate(msg.pdu.varbinds, start=1):
        entry = store.get(oid)
        if entry is None:
            return _response(msg, msg.pdu.varbinds, int(ErrorStatus.NO_CREATION), index)
        if entry.access != MibAccess.READ_WRITE:
            return _response(msg, msg.pdu.varbinds, int(ErrorStatus.NOT_WRITABLE), index)
        if type(value) is not type(entry.value):
            return _response(msg, msg.pdu.varbinds, int(ErrorStatus.WRONG_TYPE), index)
    for oid, value in msg.pdu.varbinds:
        store[oid] = replace(store[oid], value=value)
    return _response(msg, msg.pdu.varbinds)


def _response(msg: Message, varbinds, error_status: int = 0, error_index: int = 0) -> Message:
    return Message(
        community=msg.community,
        pdu=Pdu(
            pdu_type=PduType.RESPONSE,
            request_id=msg.pdu.request_id,
            varbinds=tuple(varbinds),
            error_status=error_status,
            error_index=error_index,
        ),
    )


class SimAgent:
    """A device profile plus live behavior state and the injection log.

    PDUs and injections are processed under one lock (one logical mailbox),
    so concurrent clients see a serial agent.
    """

    def __init__(self, profile: DeviceProfile):
        self.profile = profile
        self.store = dict(profile.oid_store)
        self.muted = False
        self.latency_ms = profile.latency_ms
        self.injection_log: list[InjectionRecord] = []
        self._pending_script = sorted(profile.fault_script, key=lambda f: f.effective_at)
        self._script_base: Optional[float] = None
        self._mailbox = threading.RLock()

    @property
    def device_id(self) -> str:
        return self.profile.device_id

    def apply_due_injections(self, now: float) -> None:
        with self._mailbox:
            if self._script_base is None:
                self._script_base = now if self.profile.script_times == "relative" else 0.0
            while (
                self._pending_script
                and self._pending_script[0].effective_at + self._script_base <= now
            ):
                fault = self._pending_script.pop(0)
                self._apply(fault, fault.effective_at + self._script_base)

    def inject(self, fault: FaultInjection) -> None:
        with self._mailbox:
            self._apply(fault, fault.effective_at)

    def _apply(self, fault: FaultInjection, effective_at: float) -> None:
        if fault.kind == FaultKind.SET_VALUE:
            entry = self.store.get(fault.oid)
            if entry is None:
                self.store[fault.oid] = StoreEntry(fault.value)
            else:
                self.store[fault.oid] = replace(entry, value=fault.value)
            detail = f"{fault.oid} := {fault.value}"
        elif fault.kind == FaultKind.MUTE:
            self.muted = True
            detail = "muted"
        elif fault.kind == FaultKind.LATENCY:
            self.latency_ms = fault.latency_ms
            detail = f"latency {fault.latency_ms}ms"
        else:  # RESTORE clears MUTE and LATENCY
            self.muted = False
            self.latency_ms = self.profile.latency_ms
            detail = "restored"
        self.injection_log.append(
            InjectionRecord(
                device_id=self.device_id,
                kind=fault.kind,
                effective_at=effective_at,
                oid=fault.oid,
                detail=detail,
            )
        )

    def handle_message(self, msg: Message, now: float) -> tuple[Optional[Message], float]:
        """Returns (response or None for silence, response latency in ms)."""
        with self._mailbox:
            self.apply_due_injections(now)
            if self.muted:
                return None, 0.0
            response = handle_pdu(self.store, self.profile.community, msg)
            return response, self.latency_ms
