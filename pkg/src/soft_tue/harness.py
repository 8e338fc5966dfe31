"""Manifest execution: the controller behind both the CLI and the API.

Runs the six-step flow: configure, connect, execute the scenario,
stream live metrics, collect telemetry, write report files. Telemetry
goes over a local collector socket (client-server, as in production);
the collector also owns the capture buffer.
"""

from __future__ import annotations

import time
from pathlib import Path

from . import fuzz
from .fuzz import Scenario
from .report import (
    RunManifest, build_report, dump_report, write_effect_curve_csv,
    write_per_bit_csv,
)
from .telemetry import AgentEvent, Collector, SocketSink, resolve_endpoint


class TeeSink:
    """Counts and forwards events; optionally taps them for live output."""

    def __init__(self, inner, tap=None):
        self.inner = inner
        self.tap = tap
        self.emitted = 0

    def emit(self, event: AgentEvent) -> None:
        self.emitted += 1
        self.inner.emit(event)
        if self.tap is not None:
            self.tap(event)


def _drain(collector: Collector, expected: int, timeout: float = 10.0) -> None:
    """Wait for in-flight socket records to land before exporting."""
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if len(collector.records) + len(collector.malformed) >= expected:
            return
        time.sleep(0.005)


def execute_manifest(manifest: RunManifest, telemetry_addr: str | None = None,
                     event_tap=None) -> dict:
    """Run the manifest's scenario and write the report files into
    manifest.output_dir. Returns the report dict."""
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    host, port = resolve_endpoint(telemetry_addr)
    collector = Collector(host, port).start()
    sink = TeeSink(SocketSink(collector.address), tap=event_tap)
    try:
        if manifest.campaign.scenario is Scenario.FUZZ_RRC:
            result = fuzz.run_campaign(manifest.campaign, manifest.ran,
                                       manifest.ue, sink=sink,
                                       collector=collector)
            report = build_report(manifest, result=result)
        else:
            dos_result = fuzz.dos_flood(manifest.dos, manifest.ran,
                                        manifest.ue, sink=sink)
            report = build_report(manifest, dos_result=dos_result)
    finally:
        sink.inner.close()
        _drain(collector, sink.emitted)
        collector.export_events(out_dir / "events.log")
        collector.export_capture(out_dir / "capture.log")
        collector.stop()

    (out_dir / "report.json").write_text(dump_report(report),
                                         encoding="utf-8")
    if "per_bit" in report:
        write_per_bit_csv(report["per_bit"], out_dir / "per_bit.csv")
    if "effect_curve" in report:
        write_effect_curve_csv(report["effect_curve"],
                               out_dir / "effect_curve.csv")
    return report
