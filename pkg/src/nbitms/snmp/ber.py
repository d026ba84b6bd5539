"""Low-level BER primitives: definite length, minimal octets, strict decode.

Decoding rejects indefinite lengths, non-minimal length forms, non-minimal
integer and OID sub-identifier encodings, and truncated input; every error
carries the byte offset where it was detected.
"""

from __future__ import annotations

from nbitms.errors import BerDecodeError, BerEncodeError

SEQUENCE_TAG = 0x30


def encode_length(length: int) -> bytes:
    if length < 0:
        raise BerEncodeError("negative length")
    if length < 0x80:
        return bytes([length])
    body = b""
    n = length
    while n:
        body = bytes([n & 0xFF]) + body
        n >>= 8
    return bytes([0x80 | len(body)]) + body


def encode_tlv(tag: int, content: bytes) -> bytes:
    return bytes([tag]) + encode_length(len(content)) + content


def encode_signed_int(value: int) -> bytes:
    """Minimal two's-complement content octets."""
    bits = value.bit_length() if value >= 0 else (value + 1).bit_length()
    return value.to_bytes(bits // 8 + 1, "big", signed=True)


def encode_unsigned_int(value: int) -> bytes:
    """Minimal unsigned content octets with a leading 0x00 if the sign bit is set."""
    if value < 0:
        raise BerEncodeError(f"unsigned value is negative: {value}")
    if value == 0:
        return b"\x00"
    nbytes = (value.bit_length() + 7) // 8
    raw = value.to_bytes(nbytes, "big")
    if raw[0] & 0x80:
        raw = b"\x00" + raw
    return raw


def encode_oid_content(arcs: tuple[int, ...]) -> bytes:
    first = arcs[0] * 40 + arcs[1]
    out = bytearray()
    for arc in (first,) + arcs[2:]:
        out += _encode_base128(arc)
    return bytes(out)


def _encode_base128(arc: int) -> bytes:
    if arc < 0x80:
        return bytes([arc])
    groups = []
    while arc:
        groups.append(arc & 0x7F)
        arc >>= 7
    groups.reverse()
    return bytes([g | 0x80 for g in groups[:-1]] + [groups[-1]])


class Reader:
    """Cursor over a BER byte string with strict bounds checking."""

    def __init__(self, data: bytes, offset: int = 0, end: int | None = None):
        self.data = data
        self.offset = offset
        self.end = len(data) if end is None else end

    def at_end(self) -> bool:
        return self.offset >= self.end

    def fail(self, message: str):
        raise BerDecodeError(message, self.offset)

    def read_byte(self) -> int:
        if self.offset >= self.end:
            self.fail("truncated input")
        b = self.data[self.offset]
        self.offset += 1
        return b

    def read_length(self) -> int:
        first = self.read_byte()
        if first < 0x80:
            return first
        if first == 0x80:
            raise BerDecodeError("indefinite length not allowed", self.offset - 1)
        nbytes = first & 0x7F
        if nbytes > 4:
            raise BerDecodeError("length too large", self.offset - 1)
        if self.offset + nbytes > self.end:
            raise BerDecodeError("truncated length", self.offset)
        raw = self.data[self.offset : self.offset + nbytes]
        self.offset += nbytes
        if raw[0] == 0:
            raise BerDecodeError("non-minimal long-form length", self.offset - nbytes)
        length = int.from_bytes(raw, "big")
        if length < 0x80:
            raise BerDecodeError("non-minimal long-form length", self.offset - nbytes)
        return length

    def read_tlv(self) -> tuple[int, "Reader"]:
        """Returns (tag, content reader) and advances past the element."""
        tag = self.read_byte()
        length = self.read_length()
        if self.offset + length > self.end:
            raise BerDecodeError("element exceeds available input", self.offset)
        inner = Reader(self.data, self.offset, self.offset + length)
        self.offset += length
        return tag, inner

    def expect_tag(self, tag: int, what: str) -> "Reader":
        start = self.offset
        got, inner = self.read_tlv()
        if got != tag:
            raise BerDecodeError(f"expected {what} (tag 0x{tag:02X}), got 0x{got:02X}", start)
        return inner

    def remaining(self) -> bytes:
        return self.data[self.offset : self.end]


def decode_signed_int(reader: Reader) -> int:
    raw = reader.remaining()
    if not raw:
        reader.fail("empty integer content")
    if len(raw) > 1:
        if raw[0] == 0x00 and not raw[1] & 0x80:
            reader.fail("non-minimal integer encoding")
        if raw[0] == 0xFF and raw[1] & 0x80:
            reader.fail("non-minimal integer encoding")
    return int.from_bytes(raw, "big", signed=True)


def decode_unsigned_int(reader: Reader) -> int:
    raw = reader.remaining()
    if not raw:
        reader.fail("empty integer content")
    if raw[0] & 0x80:
        reader.fail("unsigned value encoded as negative")
    if len(raw) > 1 and raw[0] == 0x00 and not raw[1] & 0x80:
        reader.fail("non-minimal integer encoding")
    return int.from_bytes(raw, "big")


def decode_oid_content(reader: Reader) -> tuple[int, ...]:
    raw = reader.remaining()
    if not raw:
        reader.fail("empty OID content")
    subids = []
    pos = 0
    while pos < len(raw):
        if raw[pos] == 0x80:
            raise BerDecodeError("non-minimal OID sub-identifier", reader.offset + pos)
        arc = 0
        while True:
            if pos >= len(raw):
                raise BerDecodeError("truncated OID sub-identifier", reader.offset + pos)
            byte = raw[pos]
            arc = (arc << 7) | (byte & 0x7F)
            pos += 1
            if not byte & 0x80:
                break
        subids.append(arc)
    first = subids[0]
    if first < 40:
        arcs = (0, first) + tuple(subids[1:])
    elif first < 80:
        arcs = (1, first - 40) + tuple(subids[1:])
    else:
        arcs = (2, first - 80) + tuple(subids[1:])
    return arcs
