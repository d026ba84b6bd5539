"""Tagged value types carried in SNMP varbinds, plus their JSON form.

The JSON form ({"type": ..., "value": ...}) is shared by fleet configs,
transaction logs, persisted state, and the HTTP API.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from nbitms.snmp.oid import Oid

U32_MAX = 0xFFFFFFFF
I64_MIN = -(2**63)
I64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Integer:
    value: int

    TAG = 0x02


@dataclass(frozen=True)
class OctetString:
    value: bytes

    TAG = 0x04

    @classmethod
    def from_text(cls, text: str) -> "OctetString":
        return cls(text.encode("utf-8"))

    def text(self) -> str:
        return self.value.decode("utf-8", errors="replace")


@dataclass(frozen=True)
class Null:
    TAG = 0x05


@dataclass(frozen=True)
class ObjectIdentifier:
    oid: Oid

    TAG = 0x06


@dataclass(frozen=True)
class IpAddress:
    packed: bytes

    TAG = 0x40

    def __post_init__(self):
        if len(self.packed) != 4:
            raise ValueError("IpAddress must hold exactly 4 bytes")

    @classmethod
    def from_text(cls, dotted: str) -> "IpAddress":
        parts = [int(p) for p in dotted.split(".")]
        if len(parts) != 4 or any(not 0 <= p <= 255 for p in parts):
            raise ValueError(f"malformed IPv4 address {dotted!r}")
        return cls(bytes(parts))

    def text(self) -> str:
        return ".".join(str(b) for b in self.packed)


def _check_u32(value: int, kind: str) -> None:
    if not 0 <= value <= U32_MAX:
        raise ValueError(f"{kind} out of 32-bit unsigned range: {value}")


@dataclass(frozen=True)
class Counter32:
    value: int

    TAG = 0x41

    def __post_init__(self):
        _check_u32(self.value, "Counter32")


@dataclass(frozen=True)
class Gauge32:
    value: int

    TAG = 0x42

    def __post_init__(self):
        _check_u32(self.value, "Gauge32")


@dataclass(frozen=True)
class TimeTicks:
    value: int

    TAG = 0x43

    def __post_init__(self):
        _check_u32(self.value, "TimeTicks")


@dataclass(frozen=True)
class NoSuchObject:
    TAG = 0x80


@dataclass(frozen=True)
class NoSuchInstance:
    TAG = 0x81


@dataclass(frozen=True)
class EndOfMibView:
    TAG = 0x82


@dataclass(frozen=True)
class OpaqueValue:
    """Unknown application-class tag preserved verbatim for round-tripping."""

    tag: int
    content: bytes


BerValue = Union[
    Integer,
    OctetString,
    Null,
    ObjectIdentifier,
    IpAddress,
    Counter32,
    Gauge32,
    TimeTicks,
    NoSuchObject,
    NoSuchInstance,
    EndOfMibView,
    OpaqueValue,
]

EXCEPTION_VALUES = (NoSuchObject, NoSuchInstance, EndOfMibView)

_SYNTAX_NAMES = {
    Integer: "Integer",
    OctetString: "OctetString",
    Null: "Null",
    ObjectIdentifier: "Oid",
    IpAddress: "IpAddress",
    Counter32: "Counter32",
    Gauge32: "Gauge32",
    TimeTicks: "TimeTicks",
    NoSuchObject: "NoSuchObject",
    NoSuchInstance: "NoSuchInstance",
    EndOfMibView: "EndOfMibView",
}

_SYNTAX_BY_NAME = {name: cls for cls, name in _SYNTAX_NAMES.items()}


def syntax_name(value_or_cls) -> str:
    cls = value_or_cls if isinstance(value_or_cls, type) else type(value_or_cls)
    if cls is OpaqueValue:
        return "Opaque"
    return _SYNTAX_NAMES[cls]


def syntax_class(name: str):
    try:
        return _SYNTAX_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown value syntax {name!r}") from None


def is_exception(value: BerValue) -> bool:
    return isinstance(value, EXCEPTION_VALUES)


def value_to_json(value: BerValue) -> dict:
    if isinstance(value, Integer):
        return {"type": "Integer", "value": value.value}
    if isinstance(value, OctetString):
        try:
            return {"type": "OctetString", "value": value.value.decode("utf-8")}
        except UnicodeDecodeError:
            return {"type": "OctetString", "hex": value.value.hex()}
    if isinstance(value, Null):
        return {"type": "Null"}
    if isinstance(value, ObjectIdentifier):
        return {"type": "Oid", "value": str(value.oid)}
    if isinstance(value, IpAddress):
        return {"type": "IpAddress", "value": value.text()}
    if isinstance(value, Counter32):
        return {"type": "Counter32", "value": value.value}
    if isinstance(value, Gauge32):
        return {"type": "Gauge32", "value": value.value}
    if isinstance(value, TimeTicks):
        return {"type": "TimeTicks", "value": value.value}
    if isinstance(value, NoSuchObject):
        return {"type": "NoSuchObject"}
    if isinstance(value, NoSuchInstance):
        return {"type": "NoSuchInstance"}
    if isinstance(value, EndOfMibView):
        return {"type": "EndOfMibView"}
    if isinstance(value, OpaqueValue):
        return {"type": "Opaque", "tag": value.tag, "hex": value.content.hex()}
    raise ValueError(f"not a BerValue: {value!r}")


def value_from_json(doc: dict) -> BerValue:
    kind = doc.get("type")
    if kind == "Integer":
        return Integer(int(doc["value"]))
    if kind == "OctetString":
        if "hex" in doc:
            return OctetString(bytes.fromhex(doc["hex"]))
        return OctetString(str(doc["value"]).encode("utf-8"))
    if kind == "Null":
        return Null()
    if kind == "Oid":
        return ObjectIdentifier(Oid(doc["value"]))
    if kind == "IpAddress":
        return IpAddress.from_text(doc["value"])
    if kind == "Counter32":
        return Counter32(int(doc["value"]))
    if kind == "Gauge32":
        return Gauge32(int(doc["value"]))
    if kind == "TimeTicks":
        return TimeTicks(int(doc["value"]))
    if kind == "NoSuchObject":
        return NoSuchObject()
    if kind == "NoSuchInstance":
        return NoSuchInstance()
    if kind == "EndOfMibView":
        return EndOfMibView()
    if kind == "Opaque":
        return OpaqueValue(int(doc["tag"]), bytes.fromhex(doc["hex"]))
    raise ValueError(f"unknown value syntax {kind!r}")
