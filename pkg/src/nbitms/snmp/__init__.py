"""SNMPv2c subset: BER codec, client, and MIB registry."""

from nbitms.snmp.oid import Oid
from nbitms.snmp.values import (
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
from nbitms.snmp.codec import Message, Pdu, PduType, decode_message, encode_message
from nbitms.snmp.client import SnmpClient, Transport, UdpTransport
from nbitms.snmp.mib import MibAccess, MibEntry, MibRegistry

__all__ = [
    "Oid",
    "BerValue",
    "Integer",
    "OctetString",
    "Null",
    "ObjectIdentifier",
    "IpAddress",
    "Counter32",
    "Gauge32",
    "TimeTicks",
    "NoSuchObject",
    "NoSuchInstance",
    "EndOfMibView",
    "OpaqueValue",
    "Message",
    "Pdu",
    "PduType",
    "encode_message",
    "decode_message",
    "SnmpClient",
    "Transport",
    "UdpTransport",
    "MibAccess",
    "MibEntry",
    "MibRegistry",
]
