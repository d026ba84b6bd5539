"""SNMP GET/GETNEXT/SET/walk client with timeout, retry, and request-id discipline."""

from __future__ import annotations

import socket
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from nbitms.clock import Clock, RealClock
from nbitms.errors import BerDecodeError, SnmpProtocolError, SnmpTimeoutError
from nbitms.snmp.codec import I32_MAX, Message, Pdu, PduType, decode_message, encode_message
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import BerValue, EndOfMibView, Null


class Transport(Protocol):
    """One datagram exchange surface; receive returns None on timeout."""

    def send(self, payload: bytes) -> None: ...

    def receive(self, timeout_ms: float) -> Optional[bytes]: ...

    def close(self) -> None: ...


class UdpTransport:
    def __init__(self, host: str, port: int):
        self.addr = (host, port)
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, payload: bytes) -> None:
        self.sock.sendto(payload, self.addr)

    def receive(self, timeout_ms: float) -> Optional[bytes]:
        self.sock.settimeout(max(timeout_ms, 1) / 1000.0)
        try:
            while True:
                data, peer = self.sock.recvfrom(65535)
                if peer[1] == self.addr[1]:
                    return data
        except socket.timeout:
            return None

    def close(self) -> None:
        self.sock.close()


@dataclass
class PduCounters:
    """Shared protocol-traffic tally; feeds the O and bandwidth metrics."""

    pdus_sent: int = 0
    pdus_received: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0


class SnmpClient:
    """v2c command generator bound to one target transport.

    Responses whose request-id does not match the outstanding request are
    discarded and never surfaced. One logical task per session.
    """

    def __init__(
        self,
        transport: Transport,
        community: bytes | str = b"public",
        timeout_ms: float = 1000,
        retries: int = 1,
        clock: Clock | None = None,
        counters: PduCounters | None = None,
    ):
        self.transport = transport
        self.community = community.encode() if isinstance(community, str) else community
        self.timeout_ms = timeout_ms
        self.retries = retries
        self.clock = clock or RealClock()
        self.counters = counters if counters is not None else PduCounters()
        self._request_id = 0

    def close(self) -> None:
        self.transport.close()

    def _next_request_id(self) -> int:
        self._request_id = self._request_id + 1 if self._request_id < I32_MAX else 1
        return self._request_id

    def _exchange(self, pdu: Pdu) -> Pdu:
        raw = encode_message(Message(community=self.community, pdu=pdu))
        for _attempt in range(self.retries + 1):
            self.transport.send(raw)
            self.counters.pdus_sent += 1
            self.counters.bytes_sent += len(raw)
            remaining = float(self.timeout_ms)
            while remaining > 0:
                started = self.clock.now()
                data = self.transport.receive(remaining)
                remaining -= (self.clock.now() - started) * 1000.0
                if data is None:
                    break
                self.counters.bytes_received += len(data)
                try:
                    msg = decode_message(data)
                except BerDecodeError:
                    continue
                self.counters.pdus_received += 1
                if msg.pdu.pdu_type == PduType.RESPONSE and msg.pdu.request_id == pdu.request_id:
                    return msg.pdu
                # Mismatched request-id or non-response: discard, keep waiting.
        raise SnmpTimeoutError(f"no response after {self.retries + 1} attempt(s)")

    def _request(self, pdu_type: PduType, oids: Sequence[Oid]) -> list[tuple[Oid, BerValue]]:
        if not oids:
            raise ValueError("at least one OID required")
        pdu = Pdu(
            pdu_type=pdu_type,
            request_id=self._next_request_id(),
            varbinds=tuple((oid, Null()) for oid in oids),
        )
        resp = self._exchange(pdu)
        if resp.error_status != 0:
            raise SnmpProtocolError(resp.error_status, resp.error_index)
        return list(resp.varbinds)

    def get(self, oids: Sequence[Oid]) -> list[tuple[Oid, BerValue]]:
        return self._request(PduType.GET, oids)

    def get_one(self, oid: Oid) -> BerValue:
        return self.get([oid])[0][1]

    def get_next(self, oids: Sequence[Oid]) -> list[tuple[Oid, BerValue]]:
        return self._request(PduType.GETNEXT, oids)

    def set(self, varbinds: Sequence[tuple[Oid, BerValue]]) -> Pdu:
        """Returns the agent's RESPONSE; the caller inspects error_status."""
        if not varbinds:
            raise ValueError("at least one varbind required")
        pdu = Pdu(
            pdu_type=PduType.SET,
            request_id=self._next_request_id(),
            varbinds=tuple(varbinds),
        )
        return self._exchange(pdu)

    def walk(self, root: Oid) -> list[tuple[Oid, BerValue]]:
        """GETNEXT iteration over the subtree under root, strictly increasing."""
        results: list[tuple[Oid, BerValue]] = []
        current = root
        while True:
            (oid, value), = self.get_next([current])
            if isinstance(value, EndOfMibView):
                break
            if not oid.starts_with(root):
                break
            if oid <= current:
                raise SnmpProtocolError(0, 0, f"agent OID order violation at {oid}")
            results.append((oid, value))
            current = oid
        return results
