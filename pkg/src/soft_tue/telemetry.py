"""Client-server telemetry: agents stream newline-delimited JSON records
to a collector that logs them, checks per-agent sequence monotonicity,
and maintains a live KPI snapshot plus a traffic capture buffer.

Transport is a local TCP stream socket; the endpoint is configurable via
the CLI flag and the SOFT_TUE_TELEMETRY_ADDR environment variable. Only
logical ticks appear in records, never wall-clock time, so logs are
byte-deterministic.
"""

from __future__ import annotations

import json
import os
import socket
import socketserver
import threading
from dataclasses import dataclass, field

ENV_TELEMETRY_ADDR = "SOFT_TUE_TELEMETRY_ADDR"

KPI_WINDOW_TICKS = 10

COMPONENTS = ("UE", "GNB", "AMF", "HARNESS")
EVENT_KINDS = ("StateTransition", "MsgTx", "MsgRx", "ParseError",
               "ValidationFail", "Kpi", "AttackMarker", "SequenceGap")


class EndpointBusy(OSError):
    pass


@dataclass(frozen=True)
class AgentEvent:
    agent_id: str
    seq: int
    tick: int
    component: str
    kind: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "agent_id": self.agent_id,
            "seq": self.seq,
            "tick": self.tick,
            "component": self.component,
            "kind": self.kind,
            "details": self.details,
        }, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "AgentEvent":
        obj = json.loads(line)
        return cls(
            agent_id=str(obj["agent_id"]),
            seq=int(obj["seq"]),
            tick=int(obj["tick"]),
            component=str(obj["component"]),
            kind=str(obj["kind"]),
            details=dict(obj.get("details", {})),
        )


@dataclass
class KpiRecord:
    ul_bitrate: float = 0.0
    dl_bitrate: float = 0.0
    connection_status: str = "Idle"
    attack_type: str = ""
    duration: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "ul_bitrate": self.ul_bitrate,
            "dl_bitrate": self.dl_bitrate,
            "connection_status": self.connection_status,
            "attack_type": self.attack_type,
            "duration": self.duration,
        }, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class CaptureRecord:
    tick: int
    direction: str  # "UL" | "DL"
    frame_hex: str
    decoded: dict | None = None
    verdict: dict | None = None

    def to_json(self) -> str:
        return json.dumps({
            "tick": self.tick,
            "direction": self.direction,
            "frame_hex": self.frame_hex,
            "decoded": self.decoded,
            "verdict": self.verdict,
        }, sort_keys=True, separators=(",", ":"))


class ListSink:
    """In-process event sink; thread-safe. Used when agents run in the
    same process as the harness (the collector socket is optional)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._events: list[AgentEvent] = []

    def emit(self, event: AgentEvent) -> None:
        with self._lock:
            self._events.append(event)

    @property
    def events(self) -> list[AgentEvent]:
        with self._lock:
            return list(self._events)


class NullSink:
    def emit(self, event: AgentEvent) -> None:
        pass


class SocketSink:
    """Streams records to a collector endpoint, one JSON object per line."""

    def __init__(self, addr: tuple[str, int]):
        self._sock = socket.create_connection(addr)
        self._file = self._sock.makefile("w", encoding="utf-8", newline="\n")
        self._lock = threading.Lock()

    def emit(self, event: AgentEvent) -> None:
        with self._lock:
            self._file.write(event.to_json() + "\n")

    def close(self) -> None:
        with self._lock:
            self._file.flush()
            self._file.close()
            self._sock.close()


class Agent:
    """Named event emitter with a strictly increasing sequence counter."""

    def __init__(self, agent_id: str, component: str, sink):
        self.agent_id = agent_id
        self.component = component
        self.sink = sink
        self._seq = 0

    def emit(self, kind: str, tick: int, **details) -> AgentEvent:
        self._seq += 1
        event = AgentEvent(self.agent_id, self._seq, tick,
                           self.component, kind, details)
        self.sink.emit(event)
        return event


def resolve_endpoint(flag_value: str | None) -> tuple[str, int]:
    """Pick the telemetry endpoint: env var beats the CLI flag."""
    value = os.environ.get(ENV_TELEMETRY_ADDR) or flag_value or "127.0.0.1:0"
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


class _StreamHandler(socketserver.StreamRequestHandler):
    def handle(self):
        collector = self.server.collector  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            collector.ingest_line(line)


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class Collector:
    """Accepts concurrent agent streams and serializes them into an event
    log. Nothing is silently dropped: malformed lines are counted and a
    SequenceGap anomaly record is appended when an agent's seq skips."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        try:
            self._server = _Server((host, port), _StreamHandler)
        except OSError as exc:
            raise EndpointBusy(str(exc)) from exc
        self._server.collector = self
        self._thread: threading.Thread | None = None
        self._lock = threading.Lock()
        self._records: list[AgentEvent] = []
        self._malformed: list[str] = []
        self._last_seq: dict[str, int] = {}
        self._captures: list[CaptureRecord] = []
        self._gap_seq = 0
        self._ul_bytes_by_tick: dict[int, int] = {}
        self._dl_bytes_by_tick: dict[int, int] = {}
        self._connection_status = "Idle"
        self._attack_type = ""
        self._start_tick: int | None = None
        self._max_tick = 0

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def start(self) -> "Collector":
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join()

    # -- ingestion -----------------------------------------------------

    def ingest_line(self, line: str) -> None:
        try:
            event = AgentEvent.from_json(line)
        except (ValueError, KeyError, TypeError):
            with self._lock:
                self._malformed.append(line)
            return
        self.record(event)

    def record(self, event: AgentEvent) -> None:
        with self._lock:
            last = self._last_seq.get(event.agent_id)
            if last is not None and event.seq != last + 1:
                self._gap_seq += 1
                self._records.append(AgentEvent(
                    agent_id="collector", seq=self._gap_seq,
                    tick=event.tick, component="HARNESS", kind="SequenceGap",
                    details={"agent_id": event.agent_id,
                             "expected": last + 1, "got": event.seq}))
            self._last_seq[event.agent_id] = event.seq
            self._records.append(event)
            self._update_kpi(event)

    def _update_kpi(self, event: AgentEvent) -> None:
        self._max_tick = max(self._max_tick, event.tick)
        if event.kind == "MsgTx" and event.component == "UE":
            n = int(event.details.get("bytes", 0))
            self._ul_bytes_by_tick[event.tick] = \
                self._ul_bytes_by_tick.get(event.tick, 0) + n
        elif event.kind == "MsgRx" and event.component == "UE":
            n = int(event.details.get("bytes", 0))
            self._dl_bytes_by_tick[event.tick] = \
                self._dl_bytes_by_tick.get(event.tick, 0) + n
        elif event.kind == "StateTransition" and event.component == "UE":
            self._connection_status = str(event.details.get("to",
                                                            self._connection_status))
        elif event.kind == "AttackMarker":
            self._attack_type = str(event.details.get("scenario",
                                                      self._attack_type))
            if event.details.get("marker") == "start":
                self._start_tick = event.tick

    # -- queries -------------------------------------------------------

    @property
    def records(self) -> list[AgentEvent]:
        with self._lock:
            return list(self._records)

    @property
    def malformed(self) -> list[str]:
        with self._lock:
            return list(self._malformed)

    def snapshot(self) -> KpiRecord:
        """Latest KPI aggregate; bitrates over the most recent 10-tick
        window."""
        with self._lock:
            lo = self._max_tick - KPI_WINDOW_TICKS + 1
            ul = sum(v for t, v in self._ul_bytes_by_tick.items() if t >= lo)
            dl = sum(v for t, v in self._dl_bytes_by_tick.items() if t >= lo)
            duration = 0
            if self._start_tick is not None:
                duration = self._max_tick - self._start_tick
            return KpiRecord(
                ul_bitrate=ul / KPI_WINDOW_TICKS,
                dl_bitrate=dl / KPI_WINDOW_TICKS,
                connection_status=self._connection_status,
                attack_type=self._attack_type,
                duration=duration,
            )

    # -- capture buffer ------------------------------------------------

    def add_capture(self, record: CaptureRecord) -> None:
        with self._lock:
            self._captures.append(record)

    @property
    def captures(self) -> list[CaptureRecord]:
        with self._lock:
            return list(self._captures)

    # -- export --------------------------------------------------------

    def export_events(self, path) -> int:
        records = self.records
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")
        return len(records)

    def export_capture(self, path) -> int:
        captures = self.captures
        with open(path, "w", encoding="utf-8") as fh:
            for rec in captures:
                fh.write(rec.to_json() + "\n")
        return len(captures)
