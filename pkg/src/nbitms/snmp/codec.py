"""SNMPv2c message model and the BER wire codec.

Encoding is deterministic (minimal definite lengths, two's-complement
integers); decoding is strict and rejects anything a conforming encoder
would never emit, including trailing bytes after the outer sequence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

from nbitms.errors import BerDecodeError, BerEncodeError
from nbitms.snmp import ber
from nbitms.snmp.ber import Reader
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import (
    U32_MAX,
    I64_MAX,
    I64_MIN,
    BerValue,
    Counter32,
    EndOfMibView,
    Gauge32,
    Integer,
    IpAddress,
    NoSuchInstance,
    NoSuchObject,
    Null,
    ObjectIdentifier,
    OctetString,
    OpaqueValue,
    TimeTicks,
)

SNMP_V2C = 1

I32_MIN = -(2**31)
I32_MAX = 2**31 - 1


class PduType(enum.IntEnum):
    GET = 0xA0
    GETNEXT = 0xA1
    RESPONSE = 0xA2
    SET = 0xA3


class ErrorStatus(enum.IntEnum):
    NO_ERROR = 0
    TOO_BIG = 1
    NO_SUCH_NAME = 2
    BAD_VALUE = 3
    READ_ONLY = 4
    GEN_ERR = 5
    NO_ACCESS = 6
    WRONG_TYPE = 7
    WRONG_LENGTH = 8
    NO_CREATION = 11
    NOT_WRITABLE = 17


VarBind = Tuple[Oid, BerValue]


@dataclass(frozen=True)
class Pdu:
    pdu_type: PduType
    request_id: int
    varbinds: tuple[VarBind, ...]
    error_status: int = 0
    error_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "varbinds", tuple(self.varbinds))
        if not I32_MIN <= self.request_id <= I32_MAX:
            raise ValueError(f"request_id out of i32 range: {self.request_id}")
        if self.error_status < 0 or self.error_index < 0:
            raise ValueError("error fields must be non-negative")
        if self.error_index > len(self.varbinds):
            raise ValueError("error_index exceeds varbind count")
        if self.pdu_type != PduType.RESPONSE and (self.error_status or self.error_index):
            raise ValueError("non-RESPONSE PDUs carry error_status=0")


@dataclass(frozen=True)
class Message:
    community: bytes
    pdu: Pdu
    version: int = SNMP_V2C

    def __post_init__(self):
        if self.version != SNMP_V2C:
            raise ValueError("only SNMPv2c (version=1) is supported")
        if not isinstance(self.community, bytes):
            object.__setattr__(self, "community", bytes(self.community))


def _encode_value(value: BerValue) -> bytes:
    if isinstance(value, Integer):
        if not I64_MIN <= value.value <= I64_MAX:
            raise BerEncodeError(f"Integer out of i64 range: {value.value}")
        return ber.encode_tlv(Integer.TAG, ber.encode_signed_int(value.value))
    if isinstance(value, OctetString):
        return ber.encode_tlv(OctetString.TAG, value.value)
    if isinstance(value, Null):
        return ber.encode_tlv(Null.TAG, b"")
    if isinstance(value, ObjectIdentifier):
        return ber.encode_tlv(ObjectIdentifier.TAG, ber.encode_oid_content(value.oid.arcs))
    if isinstance(value, IpAddress):
        return ber.encode_tlv(IpAddress.TAG, value.packed)
    if isinstance(value, (Counter32, Gauge32, TimeTicks)):
        return ber.encode_tlv(value.TAG, ber.encode_unsigned_int(value.value))
    if isinstance(value, (NoSuchObject, NoSuchInstance, EndOfMibView)):
        return ber.encode_tlv(value.TAG, b"")
    if isinstance(value, OpaqueValue):
        return ber.encode_tlv(value.tag, value.content)
    raise BerEncodeError(f"cannot encode {value!r}")


def _decode_value(tag: int, inner: Reader, at: int) -> BerValue:
    if tag == Integer.TAG:
        n = ber.decode_signed_int(inner)
        if not I64_MIN <= n <= I64_MAX:
            raise BerDecodeError("Integer out of i64 range", at)
        return Integer(n)
    if tag == OctetString.TAG:
        return OctetString(inner.remaining())
    if tag == Null.TAG:
        if inner.remaining():
            raise BerDecodeError("Null with non-empty content", at)
        return Null()
    if tag == ObjectIdentifier.TAG:
        return ObjectIdentifier(Oid(ber.decode_oid_content(inner)))
    if tag == IpAddress.TAG:
        raw = inner.remaining()
        if len(raw) != 4:
            raise BerDecodeError("IpAddress must be 4 bytes", at)
        return IpAddress(raw)
    if tag in (Counter32.TAG, Gauge32.TAG, TimeTicks.TAG):
        n = ber.decode_unsigned_int(inner)
        if n > U32_MAX:
            raise BerDecodeError("value exceeds 32 unsigned bits", at)
        return {Counter32.TAG: Counter32, Gauge32.TAG: Gauge32, TimeTicks.TAG: TimeTicks}[tag](n)
    if tag in (NoSuchObject.TAG, NoSuchInstance.TAG, EndOfMibView.TAG):
        if inner.remaining():
            raise BerDecodeError("exception value with non-empty content", at)
        return {
            NoSuchObject.TAG: NoSuchObject,
            NoSuchInstance.TAG: NoSuchInstance,
            EndOfMibView.TAG: EndOfMibView,
        }[tag]()
    if 0x40 <= tag <= 0x7F:
        # Unknown application tag: keep it opaque so it round-trips.
        return OpaqueValue(tag, inner.remaining())
    raise BerDecodeError(f"unsupported value tag 0x{tag:02X}", at)


def _encode_varbind(oid: Oid, value: BerValue) -> bytes:
    content = ber.encode_tlv(ObjectIdentifier.TAG, ber.encode_oid_content(oid.arcs))
    content += _encode_value(value)
    return ber.encode_tlv(ber.SEQUENCE_TAG, content)


def _encode_pdu(pdu: Pdu) -> bytes:
    body = ber.encode_tlv(Integer.TAG, ber.encode_signed_int(pdu.request_id))
    body += ber.encode_tlv(Integer.TAG, ber.encode_signed_int(pdu.error_status))
    body += ber.encode_tlv(Integer.TAG, ber.encode_signed_int(pdu.error_index))
    vbl = b"".join(_encode_varbind(oid, value) for oid, value in pdu.varbinds)
    body += ber.encode_tlv(ber.SEQUENCE_TAG, vbl)
    return ber.encode_tlv(int(pdu.pdu_type), body)


def encode_message(msg: Message) -> bytes:
    body = ber.encode_tlv(Integer.TAG, ber.encode_signed_int(msg.version))
    body += ber.encode_tlv(OctetString.TAG, msg.community)
    body += _encode_pdu(msg.pdu)
    return ber.encode_tlv(ber.SEQUENCE_TAG, body)


def _read_int(reader: Reader, what: str) -> int:
    inner = reader.expect_tag(Integer.TAG, what)
    return ber.decode_signed_int(inner)


def decode_message(data: bytes) -> Message:
    outer = Reader(data)
    if outer.at_end():
        raise BerDecodeError("empty input", 0)
    seq = outer.expect_tag(ber.SEQUENCE_TAG, "message sequence")
    if not outer.at_end():
        raise BerDecodeError("trailing data after message", outer.offset)

    version = _read_int(seq, "version")
    if version != SNMP_V2C:
        raise BerDecodeError(f"unsupported SNMP version {version}", seq.offset)
    community = seq.expect_tag(OctetString.TAG, "community").remaining()

    pdu_start = seq.offset
    tag, pdu_reader = seq.read_tlv()
    try:
        pdu_type = PduType(tag)
    except ValueError:
        raise BerDecodeError(f"unknown PDU tag 0x{tag:02X}", pdu_start) from None
    if not seq.at_end():
        raise BerDecodeError("trailing data inside message sequence", seq.offset)

    request_id = _read_int(pdu_reader, "request-id")
    if not I32_MIN <= request_id <= I32_MAX:
        raise BerDecodeError("request-id out of i32 range", pdu_start)
    error_status = _read_int(pdu_reader, "error-status")
    error_index = _read_int(pdu_reader, "error-index")

    vbl = pdu_reader.expect_tag(ber.SEQUENCE_TAG, "varbind list")
    if not pdu_reader.at_end():
        raise BerDecodeError("trailing data inside PDU", pdu_reader.offset)

    varbinds = []
    while not vbl.at_end():
        vb = vbl.expect_tag(ber.SEQUENCE_TAG, "varbind")
        oid_reader = vb.expect_tag(ObjectIdentifier.TAG, "varbind name")
        oid = Oid(ber.decode_oid_content(oid_reader))
        value_at = vb.offset
        vtag, vreader = vb.read_tlv()
        value = _decode_value(vtag, vreader, value_at)
        if not vb.at_end():
            raise BerDecodeError("trailing data inside varbind", vb.offset)
        varbinds.append((oid, value))

    try:
        pdu = Pdu(
            pdu_type=pdu_type,
            request_id=request_id,
            varbinds=tuple(varbinds),
            error_status=error_status,
            error_index=error_index,
        )
        return Message(community=community, pdu=pdu)
    except ValueError as exc:
        raise BerDecodeError(str(exc), pdu_start) from None
