"""Run manifests and report serialization.

report.json is byte-deterministic for a given manifest: keys are sorted,
only logical ticks appear, and set-valued config fields serialize as
sorted lists. per_bit.csv and effect_curve.csv are derived views of the
same report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

from .fuzz import (
    CampaignConfig, CampaignMode, CampaignResult, DosConfig, DosResult,
    Interleave, Scenario, VulnerabilityMap,
)
from .protocol import RanConfig, field_name_for_bit
from .ue import UeConfig


@dataclass
class RunManifest:
    campaign: CampaignConfig
    ran: RanConfig
    ue: UeConfig
    dos: DosConfig | None = None
    output_dir: str = "."

    def __post_init__(self):
        if (self.campaign.scenario is Scenario.DOS_FLOOD) != (self.dos is not None):
            raise ValueError("dos config required iff scenario is dos-flood")


def manifest_to_dict(manifest: RunManifest) -> dict:
    c, r, u = manifest.campaign, manifest.ran, manifest.ue
    out = {
        "campaign": {
            "mode": c.mode.value,
            "trials": c.trials,
            "bits_per_trial": c.bits_per_trial,
            "seed": c.seed,
            "cipher_enabled": c.cipher_enabled,
            "scenario": c.scenario.value,
        },
        "ran": {
            "expected_tid": r.expected_tid,
            "plmn_count": r.plmn_count,
            "valid_causes": sorted(r.valid_causes),
            "valid_reg_types": sorted(r.valid_reg_types),
            "provisioned_sucis": sorted(r.provisioned_sucis),
            "allowed_slices": sorted(r.allowed_slices),
            "context_capacity": r.context_capacity,
            "context_expiry_ticks": r.context_expiry_ticks,
            "silent_drop": r.silent_drop,
        },
        "ue": {
            "ue_key": u.ue_key,
            "suci": u.suci,
            "response_timeout_ticks": u.response_timeout_ticks,
            "cipher_enabled": u.cipher_enabled,
        },
        "output_dir": manifest.output_dir,
    }
    if manifest.dos is not None:
        out["dos"] = {
            "flood_count": manifest.dos.flood_count,
            "legit_attempts": manifest.dos.legit_attempts,
            "interleave": manifest.dos.interleave.value,
        }
    return out


def manifest_from_dict(obj: dict) -> RunManifest:
    c = obj.get("campaign", {})
    campaign = CampaignConfig(
        mode=CampaignMode(c.get("mode", "Random")),
        trials=int(c.get("trials", 100)),
        bits_per_trial=int(c.get("bits_per_trial", 1)),
        seed=int(c.get("seed", 0)),
        cipher_enabled=bool(c.get("cipher_enabled", False)),
        scenario=Scenario(c.get("scenario", "fuzz-rrc")),
    )
    r = obj.get("ran", {})
    ran = RanConfig(
        expected_tid=int(r.get("expected_tid", 1)),
        plmn_count=int(r.get("plmn_count", 2)),
        valid_causes=frozenset(r.get("valid_causes", range(0x09))),
        valid_reg_types=frozenset(r.get("valid_reg_types", {1, 2, 3})),
        provisioned_sucis=frozenset(r.get("provisioned_sucis",
                                          {UeConfig().suci})),
        allowed_slices=frozenset(r.get("allowed_slices", {1, 3})),
        context_capacity=int(r.get("context_capacity", 16)),
        context_expiry_ticks=int(r.get("context_expiry_ticks", 50)),
        silent_drop=bool(r.get("silent_drop", False)),
    )
    u = obj.get("ue", {})
    ue = UeConfig(
        ue_key=int(u.get("ue_key", UeConfig().ue_key)),
        suci=int(u.get("suci", UeConfig().suci)),
        response_timeout_ticks=int(u.get("response_timeout_ticks", 10)),
        cipher_enabled=bool(u.get("cipher_enabled", False)),
    )
    dos = None
    if "dos" in obj and obj["dos"] is not None:
        d = obj["dos"]
        dos = DosConfig(
            flood_count=int(d.get("flood_count", 0)),
            legit_attempts=int(d.get("legit_attempts", 1)),
            interleave=Interleave(d.get("interleave", "FloodFirst")),
        )
    return RunManifest(campaign=campaign, ran=ran, ue=ue, dos=dos,
                       output_dir=str(obj.get("output_dir", ".")))


def outcomes_to_list(result: CampaignResult) -> list[dict]:
    return [{
        "mutation_bits": m.sorted_bits(),
        "terminal": o.terminal.value,
        "cause": o.cause.value if o.cause else None,
        "ticks": o.ticks_elapsed,
        "ul_bytes": o.ul_bytes,
        "dl_bytes": o.dl_bytes,
    } for m, o in result.outcomes]


def build_report(manifest: RunManifest,
                 result: CampaignResult | None = None,
                 dos_result: DosResult | None = None,
                 effect: list[tuple[int, float]] | None = None) -> dict:
    report: dict = {"manifest": manifest_to_dict(manifest)}
    if result is not None:
        report["outcomes"] = outcomes_to_list(result)
        report["per_bit"] = result.map.per_bit()
    if dos_result is not None:
        report["dos"] = {
            "legit_success_rate": dos_result.legit_success_rate,
            "rejected_flood_count": dos_result.rejected_flood_count,
            "legit_outcomes": [o.terminal.value for o in dos_result.outcomes],
        }
    if effect is not None:
        report["effect_curve"] = [{"k": k, "success_rate": rate}
                                  for k, rate in effect]
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_per_bit_csv(per_bit: list[dict], path) -> int:
    """Render the per-bit table; returns data-row count."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bit", "byte", "bit_in_byte", "field_name",
                         "flipped_count", "success_count", "score"])
        for row in per_bit:
            bit = row["bit"]
            writer.writerow([
                bit, bit // 8, bit % 8, field_name_for_bit(bit),
                row["flipped"], row["success"],
                "" if row["score"] is None else row["score"],
            ])
    return len(per_bit)


def write_effect_curve_csv(curve: list[dict], path) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "success_rate"])
        for row in curve:
            writer.writerow([row["k"], row["success_rate"]])
    return len(curve)
