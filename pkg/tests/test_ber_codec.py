"""BER codec: byte fixtures against the reference oracle, round-trips, strictness."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbitms.errors import BerDecodeError, BerEncodeError
from nbitms.snmp import ber
from nbitms.snmp.ber import Reader
from nbitms.snmp.codec import Message, Pdu, PduType, decode_message, encode_message
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import (
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
    TimeTicks,
)

import ber_reference as ref


# ---------------------------------------------------------------------------
# Frozen fixtures, values computed by tests/ber_reference.py beforehand.

def test_oid_fixture_bytes():
    arcs = (1, 3, 6, 1, 2, 1, 1, 1, 0)
    expected = bytes.fromhex("06082B06010201010100")
    assert ref.ref_oid(arcs) == expected
    assert ber.encode_tlv(0x06, ber.encode_oid_content(arcs)) == expected


def test_integer_130_fixture_bytes():
    expected = bytes.fromhex("02020082")
    assert ref.ref_integer(130) == expected
    assert ber.encode_tlv(0x02, ber.encode_signed_int(130)) == expected


@pytest.mark.parametrize("value", [0, 1, -1, 127, 128, 255, 256, -128, -129, 2**40, -(2**40)])
def test_signed_int_matches_reference(value):
    assert ber.encode_signed_int(value) == ref.ref_signed_int_content(value)


@pytest.mark.parametrize(
    "arcs",
    [(1, 3), (0, 0), (2, 999), (1, 3, 6, 1, 4, 1, 9, 1, 620), (1, 3, 6, 1, 2, 1, 2**20)],
)
def test_oid_content_matches_reference(arcs):
    assert ber.encode_tlv(0x06, ber.encode_oid_content(arcs)) == ref.ref_oid(arcs)


def test_full_message_matches_reference_bytes():
    msg = Message(
        community=b"public",
        pdu=Pdu(
            pdu_type=PduType.GET,
            request_id=0x1234,
            varbinds=((Oid("1.3.6.1.2.1.1.1.0"), Null()),),
        ),
    )
    expected = ref.ref_message(
        b"public",
        ref.ref_pdu(0xA0, 0x1234, 0, 0, [ref.ref_varbind((1, 3, 6, 1, 2, 1, 1, 1, 0), ref.ref_null())]),
    )
    assert encode_message(msg) == expected


def test_response_with_values_matches_reference_bytes():
    msg = Message(
        community=b"c0mm",
        pdu=Pdu(
            pdu_type=PduType.RESPONSE,
            request_id=-7,
            error_status=2,
            error_index=1,
            varbinds=(
                (Oid("1.3.6.1.2.1.1.3.0"), TimeTicks(4294967295)),
                (Oid("1.3.6.1.2.1.1.5.0"), OctetString(b"edge-router-sim")),
                (Oid("1.3.6.1.2.1.4.20.1.1"), IpAddress(bytes([10, 0, 0, 5]))),
            ),
        ),
    )
    expected = ref.ref_message(
        b"c0mm",
        ref.ref_pdu(
            0xA2,
            -7,
            2,
            1,
            [
                ref.ref_varbind((1, 3, 6, 1, 2, 1, 1, 3, 0), ref.ref_unsigned(0x43, 4294967295)),
                ref.ref_varbind((1, 3, 6, 1, 2, 1, 1, 5, 0), ref.ref_octet_string(b"edge-router-sim")),
                ref.ref_varbind((1, 3, 6, 1, 2, 1, 4, 20, 1, 1), ref.ref_ip([10, 0, 0, 5])),
            ],
        ),
    )
    assert encode_message(msg) == expected


def test_exception_values_match_reference_bytes():
    for cls, tag in ((NoSuchObject, 0x80), (NoSuchInstance, 0x81), (EndOfMibView, 0x82)):
        msg = Message(
            community=b"public",
            pdu=Pdu(
                pdu_type=PduType.RESPONSE,
                request_id=1,
                varbinds=((Oid("1.3.6.1.2.1.1.1.0"), cls()),),
            ),
        )
        expected = ref.ref_message(
            b"public",
            ref.ref_pdu(
                0xA2, 1, 0, 0,
                [ref.ref_varbind((1, 3, 6, 1, 2, 1, 1, 1, 0), ref.ref_exception(tag))],
            ),
        )
        assert encode_message(msg) == expected


# ---------------------------------------------------------------------------
# Property round-trips.

oids = st.builds(
    lambda head, tail: Oid(head + tuple(tail)),
    st.one_of(
        st.tuples(st.integers(0, 1), st.integers(0, 39)),
        st.tuples(st.just(2), st.integers(0, 2**16)),
    ),
    st.lists(st.integers(0, 2**32 - 1), max_size=8),
)

values = st.one_of(
    st.integers(-(2**63), 2**63 - 1).map(Integer),
    st.binary(max_size=32).map(OctetString),
    st.just(Null()),
    oids.map(ObjectIdentifier),
    st.binary(min_size=4, max_size=4).map(IpAddress),
    st.integers(0, 2**32 - 1).map(Counter32),
    st.integers(0, 2**32 - 1).map(Gauge32),
    st.integers(0, 2**32 - 1).map(TimeTicks),
    st.just(NoSuchObject()),
    st.just(NoSuchInstance()),
    st.just(EndOfMibView()),
)

varbind_lists = st.lists(st.tuples(oids, values), max_size=5).map(tuple)


@st.composite
def messages(draw):
    pdu_type = draw(st.sampled_from(list(PduType)))
    varbinds = draw(varbind_lists)
    if pdu_type == PduType.RESPONSE:
        error_status = draw(st.integers(0, 18))
        error_index = draw(st.integers(0, len(varbinds)))
    else:
        error_status = error_index = 0
    pdu = Pdu(
        pdu_type=pdu_type,
        request_id=draw(st.integers(-(2**31), 2**31 - 1)),
        varbinds=varbinds,
        error_status=error_status,
        error_index=error_index,
    )
    return Message(community=draw(st.binary(max_size=16)), pdu=pdu)


@given(messages())
def test_decode_encode_roundtrip(msg):
    assert decode_message(encode_message(msg)) == msg


@given(messages())
def test_encode_decode_bytes_roundtrip(msg):
    wire = encode_message(msg)
    assert encode_message(decode_message(wire)) == wire


@given(messages())
def test_encode_is_deterministic(msg):
    assert encode_message(msg) == encode_message(msg)


# ---------------------------------------------------------------------------
# Strict decoding.

def _simple_message():
    return Message(
        community=b"public",
        pdu=Pdu(pdu_type=PduType.GET, request_id=5, varbinds=((Oid("1.3.6.1.2.1.1.1.0"), Null()),)),
    )


def test_decode_empty_input_errors_at_offset_zero():
    with pytest.raises(BerDecodeError) as err:
        decode_message(b"")
    assert err.value.offset == 0


def test_decode_trailing_byte_rejected():
    wire = encode_message(_simple_message()) + b"\x00"
    with pytest.raises(BerDecodeError, match="trailing data"):
        decode_message(wire)


def test_decode_truncated_input_rejected():
    wire = encode_message(_simple_message())
    for cut in (1, 5, len(wire) - 1):
        with pytest.raises(BerDecodeError):
            decode_message(wire[:cut])


def test_non_minimal_long_form_length_rejected():
    # 30 81 05 would mean long-form for a length that fits short form.
    inner = bytes.fromhex("0201050400A000")
    wire = bytes([0x30, 0x81, len(inner)]) + inner
    with pytest.raises(BerDecodeError, match="non-minimal"):
        decode_message(wire)


def test_indefinite_length_rejected():
    with pytest.raises(BerDecodeError, match="indefinite"):
        Reader(bytes([0x30, 0x80, 0x00, 0x00])).read_tlv()


def test_non_minimal_integer_rejected():
    # INTEGER 5 encoded with a redundant leading zero.
    reader = Reader(bytes([0x00, 0x05]))
    with pytest.raises(BerDecodeError, match="non-minimal"):
        ber.decode_signed_int(reader)


def test_non_minimal_oid_subidentifier_rejected():
    # 0x80 continuation prefix is a forbidden leading octet.
    reader = Reader(bytes([0x2B, 0x80, 0x06]))
    with pytest.raises(BerDecodeError, match="non-minimal"):
        ber.decode_oid_content(reader)


def test_unknown_version_rejected():
    msg = _simple_message()
    wire = bytearray(encode_message(msg))
    # version INTEGER content is at a fixed small offset: SEQ hdr(2) TAG(1) LEN(1) value(1)
    assert wire[2] == 0x02 and wire[3] == 0x01
    wire[4] = 0x03
    with pytest.raises(BerDecodeError, match="version"):
        decode_message(bytes(wire))


def test_integer_overflow_encode_rejected():
    msg = Message(
        community=b"x",
        pdu=Pdu(pdu_type=PduType.GET, request_id=1, varbinds=((Oid("1.3"), Integer(2**63)),)),
    )
    with pytest.raises(BerEncodeError):
        encode_message(msg)


def test_pdu_invariants():
    with pytest.raises(ValueError):
        Pdu(pdu_type=PduType.GET, request_id=2**31, varbinds=())
    with pytest.raises(ValueError):
        Pdu(pdu_type=PduType.GET, request_id=1, varbinds=(), error_status=2)
    with pytest.raises(ValueError):
        Pdu(pdu_type=PduType.RESPONSE, request_id=1, varbinds=(), error_index=1)


# ---------------------------------------------------------------------------
# Oid type behavior.

def test_oid_string_roundtrip():
    for text in ("1.3.6.1.2.1.1.5.0", "0.0", "2.100.3"):
        assert str(Oid(text)) == text


def test_oid_validation():
    with pytest.raises(ValueError):
        Oid("1")
    with pytest.raises(ValueError):
        Oid("3.1")
    with pytest.raises(ValueError):
        Oid("1.40")
    with pytest.raises(ValueError):
        Oid("1.-3.5")
    Oid("2.40")  # second arc over 39 is fine under root 2


def test_oid_ordering_is_lexicographic():
    a = Oid("1.3.6")
    b = Oid("1.3.6.1")
    c = Oid("1.3.7")
    assert a < b < c
    assert sorted([c, b, a]) == [a, b, c]


def test_oid_prefix_helpers():
    assert Oid("1.3.6.1.4.1.9.1.620").starts_with(Oid("1.3.6.1.4.1.9"))
    assert not Oid("1.3.6.1.4.1.9").starts_with(Oid("1.3.6.1.4.1.9.1"))
    assert Oid("1.3.6").child(1, 0) == Oid("1.3.6.1.0")
