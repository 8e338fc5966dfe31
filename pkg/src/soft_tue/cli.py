"""Command-line interface: soft-tue run|oracle|report|serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .fuzz import (
    CampaignConfig, CampaignMode, DosConfig, Scenario, oracle_map,
)
from .harness import execute_manifest
from .protocol import RanConfig
from .report import (
    RunManifest, dump_report, write_effect_curve_csv, write_per_bit_csv,
)
from .ue import UeConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soft-tue",
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a test campaign")
    run.add_argument("--scenario", choices=[s.value for s in Scenario],
                     default=Scenario.FUZZ_RRC.value)
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--bits-per-trial", type=int, default=1)
    run.add_argument("--exhaustive", action="store_true")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--cipher", action="store_true")
    run.add_argument("--flood", type=int, default=0)
    run.add_argument("--legit", type=int, default=1)
    run.add_argument("--capacity", type=int, default=16)
    run.add_argument("--expiry", type=int, default=50)
    run.add_argument("--out", default="out")
    run.add_argument("--telemetry", default=None,
                     help="collector endpoint host:port")
    run.add_argument("--quiet", action="store_true")

    oracle = sub.add_parser("oracle",
                            help="write the rule-table single-flip map")
    oracle.add_argument("--expected-tid", type=int, default=1)
    oracle.add_argument("--plmn-count", type=int, default=2)
    oracle.add_argument("--out", default=".")

    report = sub.add_parser("report", help="render CSV views of a report")
    report.add_argument("--report", default="out/report.json")
    report.add_argument("--out", default=None,
                        help="output directory (default: next to the report)")

    serve = sub.add_parser("serve", help="run the operator HTTP API")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--frontend", default=None,
                       help="directory of dashboard static files to serve")
    return parser


def _manifest_from_args(args) -> RunManifest:
    scenario = Scenario(args.scenario)
    campaign = CampaignConfig(
        mode=CampaignMode.EXHAUSTIVE if args.exhaustive else CampaignMode.RANDOM,
        trials=args.trials,
        bits_per_trial=args.bits_per_trial,
        seed=args.seed,
        cipher_enabled=args.cipher,
        scenario=scenario,
    )
    ran = RanConfig(context_capacity=args.capacity,
                    context_expiry_ticks=args.expiry)
    dos = None
    if scenario is Scenario.DOS_FLOOD:
        dos = DosConfig(flood_count=args.flood, legit_attempts=args.legit)
    return RunManifest(campaign=campaign, ran=ran, ue=UeConfig(),
                       dos=dos, output_dir=args.out)


def cmd_run(args) -> int:
    try:
        manifest = _manifest_from_args(args)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2

    def tap(event):
        if args.quiet or event.kind != "Kpi" or event.component != "HARNESS":
            return
        d = event.details
        print(f"trial {d.get('trial')}: bits={d.get('mutation_bits')} "
              f"-> {d.get('terminal')}")

    report = execute_manifest(manifest, telemetry_addr=args.telemetry,
                              event_tap=tap)
    if "dos" in report:
        print(f"legit_success_rate={report['dos']['legit_success_rate']}")
    else:
        print(f"wrote {len(report['outcomes'])} outcomes to "
              f"{manifest.output_dir}/report.json")
    return 0


def cmd_oracle(args) -> int:
    try:
        ran = RanConfig(expected_tid=args.expected_tid,
                        plmn_count=args.plmn_count)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    vmap = oracle_map(ran)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"per_bit": vmap.per_bit()}
    (out_dir / "oracle.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    print(f"wrote {out_dir / 'oracle.json'}")
    return 0


def cmd_report(args) -> int:
    path = Path(args.report)
    if not path.is_file():
        print(f"report not found: {path}", file=sys.stderr)
        return 2
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        print(f"invalid report: {exc}", file=sys.stderr)
        return 2
    if "per_bit" not in report and "effect_curve" not in report:
        print("report has neither per_bit nor effect_curve", file=sys.stderr)
        return 2
    out_dir = Path(args.out) if args.out else path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    if "per_bit" in report:
        n = write_per_bit_csv(report["per_bit"], out_dir / "per_bit.csv")
        print(f"wrote {n} rows to {out_dir / 'per_bit.csv'}")
    if "effect_curve" in report:
        n = write_effect_curve_csv(report["effect_curve"],
                                   out_dir / "effect_curve.csv")
        print(f"wrote {n} rows to {out_dir / 'effect_curve.csv'}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(host=args.host, port=args.port, frontend_dir=args.frontend)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "oracle": cmd_oracle,
                "report": cmd_report, "serve": cmd_serve}
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # internal failure -> exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
