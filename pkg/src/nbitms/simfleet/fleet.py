"""Fleet assembly and the two transports: in-process (deterministic, virtual
clock friendly) and UDP loopback (end-to-end runs). Both sit on the same
agent core."""

from __future__ import annotations

import socket
import threading
from typing import Optional

from nbitms.clock import Clock, RealClock
from nbitms.errors import BerDecodeError, ConfigError, NotFoundError
from nbitms.snmp.codec import decode_message, encode_message
from nbitms.snmp.mib import MibAccess
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import value_from_json
from nbitms.simfleet.agent import (
    DeviceProfile,
    FaultInjection,
    FaultKind,
    InjectionRecord,
    SimAgent,
    StoreEntry,
)


def _handle_datagram(agent: SimAgent, raw: bytes, now: float):
    """Bytes in, (bytes or None, latency_ms) out; malformed datagrams are dropped."""
    try:
        msg = decode_message(raw)
    except BerDecodeError:
        agent.apply_due_injections(now)
        return None, 0.0
    response, latency_ms = agent.handle_message(msg, now)
    if response is None:
        return None, latency_ms
    return encode_message(response), latency_ms


class InProcessTransport:
    """Client-side transport wired straight into one agent.

    Waiting is expressed through the injected clock, so a muted agent costs
    exactly the client timeout in virtual time and zero wall time.
    """

    def __init__(self, agent: SimAgent, clock: Clock):
        self.agent = agent
        self.clock = clock
        self._pending: Optional[bytes] = None
        self._pending_latency_ms = 0.0

    def send(self, payload: bytes) -> None:
        data, latency_ms = _handle_datagram(self.agent, payload, self.clock.now())
        self._pending = data
        self._pending_latency_ms = latency_ms

    def receive(self, timeout_ms: float) -> Optional[bytes]:
        if self._pending is None:
            self.clock.sleep(timeout_ms / 1000.0)
            return None
        if self._pending_latency_ms <= timeout_ms:
            self.clock.sleep(self._pending_latency_ms / 1000.0)
            data = self._pending
            self._pending = None
            return data
        # Response still in flight when the caller gives up.
        self.clock.sleep(timeout_ms / 1000.0)
        self._pending_latency_ms -= timeout_ms
        return None

    def close(self) -> None:
        self._pending = None


class UdpAgentServer:
    """One agent bound to a UDP port, served from its own thread."""

    def __init__(self, agent: SimAgent, host: str = "127.0.0.1", port: int = 0,
                 clock: Clock | None = None):
        self.agent = agent
        self.clock = clock or RealClock()
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, port))
        self.sock.settimeout(0.2)
        self.address = self.sock.getsockname()
        self._stop = threading.Event()
        self._thread = threading.Thread(
            target=self._serve, name=f"sim-agent-{agent.device_id}", daemon=True
        )

    @property
    def port(self) -> int:
        return self.address[1]

    def start(self) -> "UdpAgentServer":
        self._thread.start()
        return self

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                raw, peer = self.sock.recvfrom(65535)
            except socket.timeout:
                continue
            except OSError:
                break
            data, latency_ms = _handle_datagram(self.agent, raw, self.clock.now())
            if data is None:
                continue
            if latency_ms > 0:
                self.clock.sleep(latency_ms / 1000.0)
            try:
                self.sock.sendto(data, peer)
            except OSError:
                break

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self.sock.close()


class SimFleet:
    """All simulated agents of one run, addressable by device id."""

    def __init__(self, agents: list[SimAgent]):
        self.agents: dict[str, SimAgent] = {}
        for agent in agents:
            if agent.device_id in self.agents:
                raise ConfigError(f"duplicate device_id {agent.device_id!r}")
            self.agents[agent.device_id] = agent
        self.servers: dict[str, UdpAgentServer] = {}

    def agent(self, device_id: str) -> SimAgent:
        try:
            return self.agents[device_id]
        except KeyError:
            raise NotFoundError(f"no such device {device_id!r}") from None

    def device_ids(self) -> list[str]:
        return sorted(self.agents)

    def transport_for(self, device_id: str, clock: Clock) -> InProcessTransport:
        return InProcessTransport(self.agent(device_id), clock)

    def inject(self, device_id: str, fault: FaultInjection) -> None:
        self.agent(device_id).inject(fault)

    def tick(self, now: float) -> None:
        for agent in self.agents.values():
            agent.apply_due_injections(now)

    def injection_log(self) -> list[InjectionRecord]:
        records = [r for agent in self.agents.values() for r in agent.injection_log]
        records.sort(key=lambda r: (r.effective_at, r.device_id))
        return records

    def start_udp(self, host: str = "127.0.0.1", ports: dict[str, int] | None = None,
                  clock: Clock | None = None) -> dict[str, UdpAgentServer]:
        ports = ports or {}
        for device_id in self.device_ids():
            server = UdpAgentServer(
                self.agents[device_id], host=host, port=ports.get(device_id, 0), clock=clock
            )
            self.servers[device_id] = server.start()
        return self.servers

    def stop(self) -> None:
        for server in self.servers.values():
            server.stop()
        self.servers.clear()


def fleet_from_config(doc: dict) -> SimFleet:
    """Build a fleet from its config document; all problems reported in one pass."""
    problems: list[str] = []
    devices = doc.get("devices")
    if not isinstance(devices, list):
        raise ConfigError("fleet config needs a 'devices' list")

    seen_ids: set[str] = set()
    seen_ports: dict[int, str] = {}
    agents: list[SimAgent] = []
    for i, dev in enumerate(devices):
        label = dev.get("id") or f"devices[{i}]"
        device_id = dev.get("id")
        if not device_id:
            problems.append(f"{label}: missing id")
            continue
        if device_id in seen_ids:
            problems.append(f"duplicate device_id {device_id!r}")
            continue
        seen_ids.add(device_id)
        port = dev.get("port")
        if port is not None:
            if port in seen_ports:
                problems.append(
                    f"{device_id}: port {port} already used by {seen_ports[port]!r}"
                )
                continue
            seen_ports[port] = device_id
        try:
            profile = _profile_from_json(dev)
        except (ValueError, KeyError) as exc:
            problems.append(f"{device_id}: {exc}")
            continue
        agents.append(SimAgent(profile))

    if problems:
        raise ConfigError("invalid fleet config", problems)
    fleet = SimFleet(agents)
    fleet.configured_ports = {  # type: ignore[attr-defined]
        dev["id"]: dev["port"] for dev in devices if dev.get("port") is not None
    }
    return fleet


def _profile_from_json(dev: dict) -> DeviceProfile:
    store: dict[Oid, StoreEntry] = {}
    for oid_text, spec in dev.get("oids", {}).items():
        access = MibAccess(spec.get("access", "READ_ONLY"))
        store[Oid(oid_text)] = StoreEntry(value_from_json(spec), access)
    script = [_fault_from_json(f) for f in dev.get("faults", [])]
    script_times = dev.get("script_times", "relative")
    if script_times not in ("relative", "absolute"):
        raise ValueError(f"script_times must be 'relative' or 'absolute', got {script_times!r}")
    return DeviceProfile(
        device_id=dev["id"],
        sys_object_id=Oid(dev.get("sys_object_id", "1.3.6.1.4.1.99999.1")),
        oid_store=store,
        latency_ms=float(dev.get("latency_ms", 0.0)),
        fault_script=script,
        community=dev.get("community", "public"),
        script_times=script_times,
    )


def _fault_from_json(f: dict) -> FaultInjection:
    kind = FaultKind(f["kind"])
    return FaultInjection(
        kind=kind,
        effective_at=float(f["at"]),
        oid=Oid(f["oid"]) if "oid" in f else None,
        value=value_from_json(f["value"]) if "value" in f else None,
        latency_ms=float(f.get("latency_ms", 0.0)),
    )
