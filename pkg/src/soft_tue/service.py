"""Operator HTTP API: campaign lifecycle plus a server-sent event feed.

Campaigns run on a single background worker (one at a time, others
queue) so the telemetry stream is unambiguous. Handlers are concurrent
and read only immutable snapshots. Optionally serves the dashboard's
static files.
"""

from __future__ import annotations

import json
import mimetypes
import queue
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .harness import execute_manifest
from .report import RunManifest, manifest_from_dict
from .telemetry import AgentEvent


@dataclass
class CampaignStatus:
    id: str
    phase: str = "Queued"  # Queued -> Running -> Done | Failed
    trials_done: int = 0
    trials_total: int = 0
    result_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "phase": self.phase,
            "progress": {"done": self.trials_done,
                         "total": self.trials_total},
            "result_path": self.result_path,
        }


@dataclass
class _Campaign:
    status: CampaignStatus
    manifest: RunManifest
    report: dict | None = None


class EventBroker:
    """Fan-out of event lines to any number of SSE subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, line: str) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(line)


class CampaignRunner:
    """Background worker executing queued campaigns in order."""

    def __init__(self, base_dir: str = "runs"):
        self.base_dir = Path(base_dir)
        self.broker = EventBroker()
        self._lock = threading.Lock()
        self._campaigns: dict[str, _Campaign] = {}
        self._queue: queue.Queue = queue.Queue()
        self._counter = 0
        self._thread = threading.Thread(target=self._worker, daemon=True)
        self._thread.start()

    def submit(self, manifest: RunManifest) -> CampaignStatus:
        with self._lock:
            self._counter += 1
            cid = f"c{self._counter:04d}"
        if manifest.output_dir in (".", ""):
            manifest.output_dir = str(self.base_dir / cid)
        total = manifest.campaign.trials \
            if manifest.dos is None else manifest.dos.legit_attempts
        status = CampaignStatus(id=cid, trials_total=total)
        with self._lock:
            self._campaigns[cid] = _Campaign(status=status, manifest=manifest)
        self._queue.put(cid)
        return status

    def get(self, cid: str) -> _Campaign | None:
        with self._lock:
            return self._campaigns.get(cid)

    def _worker(self) -> None:
        while True:
            cid = self._queue.get()
            campaign = self.get(cid)
            if campaign is None:
                continue
            campaign.status.phase = "Running"
            self._publish_status(campaign.status)

            def tap(event: AgentEvent, cid=cid, campaign=campaign):
                if event.kind == "Kpi" and event.component == "HARNESS":
                    campaign.status.trials_done += 1
                payload = json.loads(event.to_json())
                payload["campaign_id"] = cid
                self.broker.publish(json.dumps(payload, sort_keys=True,
                                               separators=(",", ":")))

            try:
                report = execute_manifest(campaign.manifest, event_tap=tap)
                campaign.report = report
                campaign.status.result_path = str(
                    Path(campaign.manifest.output_dir) / "report.json")
                campaign.status.phase = "Done"
            except Exception as exc:
                campaign.status.phase = "Failed"
                self.broker.publish(json.dumps(
                    {"campaign_id": cid, "error": str(exc)},
                    sort_keys=True, separators=(",", ":")))
            self._publish_status(campaign.status)

    def _publish_status(self, status: CampaignStatus) -> None:
        payload = dict(status.to_dict(), kind="CampaignStatus")
        self.broker.publish(json.dumps(payload, sort_keys=True,
                                       separators=(",", ":")))


def _make_handler(runner: CampaignRunner, frontend_dir: str | None):
    frontend = Path(frontend_dir) if frontend_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _json(self, code: int, obj) -> None:
            body = json.dumps(obj, sort_keys=True).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        # -- GET -------------------------------------------------------

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/api/health":
                return self._json(200, {"status": "ok"})
            if path == "/api/events":
                return self._stream_events()
            if path.startswith("/api/campaigns/"):
                rest = path[len("/api/campaigns/"):]
                if rest.endswith("/per-bit"):
                    return self._per_bit(rest[:-len("/per-bit")].strip("/"))
                return self._campaign_status(rest.strip("/"))
            if frontend is not None:
                return self._static(path)
            self._json(404, {"error": "not found"})

        def _campaign_status(self, cid: str):
            campaign = runner.get(cid)
            if campaign is None:
                return self._json(404, {"error": f"unknown campaign {cid}"})
            self._json(200, campaign.status.to_dict())

        def _per_bit(self, cid: str):
            campaign = runner.get(cid)
            if campaign is None:
                return self._json(404, {"error": f"unknown campaign {cid}"})
            if campaign.status.phase != "Done" or campaign.report is None:
                return self._json(409, {"error": "campaign not done"})
            per_bit = campaign.report.get("per_bit")
            if per_bit is None:
                return self._json(409, {"error": "no per-bit map for scenario"})
            self._json(200, {"per_bit": per_bit})

        def _stream_events(self):
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            q = runner.broker.subscribe()
            try:
                while True:
                    try:
                        line = q.get(timeout=15.0)
                    except queue.Empty:
                        self.wfile.write(b": keep-alive\n\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(f"data: {line}\n\n".encode("utf-8"))
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                runner.broker.unsubscribe(q)

        def _static(self, path: str):
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (frontend / rel).resolve()
            if not str(target).startswith(str(frontend.resolve())) \
                    or not target.is_file():
                return self._json(404, {"error": "not found"})
            body = target.read_bytes()
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        # -- POST ------------------------------------------------------

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            if path != "/api/campaigns":
                return self._json(404, {"error": "not found"})
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                manifest = manifest_from_dict(json.loads(raw or b"{}"))
            except (ValueError, KeyError, TypeError) as exc:
                return self._json(400, {"error": f"invalid manifest: {exc}"})
            status = runner.submit(manifest)
            self._json(202, {"id": status.id})

    return Handler


def make_server(host: str = "127.0.0.1", port: int = 0,
                frontend_dir: str | None = None,
                base_dir: str = "runs"):
    runner = CampaignRunner(base_dir=base_dir)
    server = ThreadingHTTPServer((host, port),
                                 _make_handler(runner, frontend_dir))
    server.daemon_threads = True
    return server, runner


def serve(host: str = "127.0.0.1", port: int = 8080,
          frontend_dir: str | None = None) -> None:
    server, _ = make_server(host, port, frontend_dir)
    print(f"soft-tue API on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    finally:
        server.server_close()
