"""Mutation planning, campaign execution, DoS flood, and analysis.

A campaign boots a fresh RAN and UE per trial, installs one Mutation in
the UE's SDU-buffer hook, records the attach outcome, and finally folds
the outcomes into a per-bit vulnerability map: score[b] is the
percentage of trials flipping bit b that still reached an active PDU
session. oracle_map computes the exhaustive single-flip map without the
protocol stack and is the independent check for the full-stack path.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

from . import protocol as proto
from .protocol import Frame, RanConfig, encode_setup_complete, \
    validate_setup_complete
from .ran import RanSim
from .rng import SplitMix64, mix64
from .telemetry import Agent, CaptureRecord, NullSink
from .ue import (
    AttachOutcome, FuzzHook, FuzzTarget, UeConfig, UeState, attach,
    setup_fields,
)

FRAME_BITS = proto.FRAME_BITS


class OutOfRange(IndexError):
    pass


class InvalidK(ValueError):
    pass


@dataclass(frozen=True)
class Mutation:
    bits: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "bits", frozenset(self.bits))
        for b in self.bits:
            if not 0 <= b < FRAME_BITS:
                raise OutOfRange(f"bit index {b} out of [0, {FRAME_BITS})")

    def sorted_bits(self) -> list[int]:
        return sorted(self.bits)


class CampaignMode(Enum):
    EXHAUSTIVE = "Exhaustive"
    RANDOM = "Random"


class Scenario(Enum):
    FUZZ_RRC = "fuzz-rrc"
    DOS_FLOOD = "dos-flood"


class Interleave(Enum):
    FLOOD_FIRST = "FloodFirst"
    MIXED = "Mixed"


@dataclass
class CampaignConfig:
    mode: CampaignMode = CampaignMode.RANDOM
    trials: int = 100
    bits_per_trial: int = 1
    seed: int = 0
    cipher_enabled: bool = False
    scenario: Scenario = Scenario.FUZZ_RRC

    def __post_init__(self):
        if self.mode is CampaignMode.EXHAUSTIVE:
            self.trials = FRAME_BITS
            self.bits_per_trial = 1


@dataclass
class VulnerabilityMap:
    """Per-bit counts and 0-100 scores; never-flipped bits score None."""
    flipped: list[int] = field(default_factory=lambda: [0] * FRAME_BITS)
    success: list[int] = field(default_factory=lambda: [0] * FRAME_BITS)

    @property
    def scores(self) -> list[int | None]:
        out = []
        for f, s in zip(self.flipped, self.success):
            if f == 0:
                out.append(None)
            else:
                # integer round-half-up, portable across languages
                out.append((200 * s + f) // (2 * f))
        return out

    def per_bit(self) -> list[dict]:
        return [{"bit": b, "flipped": f, "success": s, "score": score}
                for b, (f, s, score) in enumerate(
                    zip(self.flipped, self.success, self.scores))]


@dataclass
class DosConfig:
    flood_count: int = 0
    legit_attempts: int = 1
    interleave: Interleave = Interleave.FLOOD_FIRST

    def __post_init__(self):
        if self.flood_count < 0 or self.legit_attempts < 1:
            raise ValueError("need flood_count >= 0 and legit_attempts >= 1")


@dataclass
class DosResult:
    legit_success_rate: float
    rejected_flood_count: int
    outcomes: list = field(default_factory=list)


@dataclass
class CampaignResult:
    config: CampaignConfig
    outcomes: list  # (Mutation, AttachOutcome) in plan order
    map: VulnerabilityMap
    started_tick: int
    finished_tick: int


def plan_exhaustive() -> list[Mutation]:
    """One single-bit mutation per frame bit, ascending."""
    return [Mutation(frozenset({b})) for b in range(FRAME_BITS)]


def plan_random(seed: int, trials: int, k: int) -> list[Mutation]:
    """Seeded plan of `trials` mutations with k distinct bits each."""
    if not 0 <= k <= FRAME_BITS:
        raise InvalidK(f"k must be in [0, {FRAME_BITS}], got {k}")
    rng = SplitMix64(seed)
    return [Mutation(frozenset(rng.sample(FRAME_BITS, k)))
            for _ in range(trials)]


def mutate(frame: Frame, m: Mutation) -> Frame:
    """XOR-flip the mutation's bits; length preserved, involution."""
    for b in m.bits:
        if b >= frame.bit_len:
            raise OutOfRange(f"bit {b} out of range for {frame.bit_len}-bit frame")
    return frame.flip_bits(m.bits)


def plan_for(config: CampaignConfig) -> list[Mutation]:
    if config.mode is CampaignMode.EXHAUSTIVE:
        return plan_exhaustive()
    return plan_random(config.seed, config.trials, config.bits_per_trial)


def run_trial(mutation: Mutation, ran: RanConfig, ue: UeConfig,
              cipher_enabled: bool = False, sink=None, start_tick: int = 0,
              collector=None) -> AttachOutcome:
    """One attach attempt against a freshly booted RAN."""
    sink = sink or NullSink()
    sim = RanSim(config=ran, subscriber_key=ue.ue_key,
                 cipher_enabled=cipher_enabled,
                 gnb_agent=Agent("gnb", "GNB", sink),
                 amf_agent=Agent("amf", "AMF", sink))
    hook = FuzzHook(FuzzTarget.RRC_SETUP_COMPLETE, mutation.bits)
    ue_cfg = dataclasses.replace(ue, cipher_enabled=cipher_enabled)
    trace: list | None = [] if collector is not None else None
    outcome = attach(sim.connect(), ue_cfg, hook,
                     agent=Agent("ue", "UE", sink),
                     start_tick=start_tick, trace=trace)
    if collector is not None:
        for tick, direction, msg in trace:
            record = _capture_record(tick, direction, msg, sim)
            collector.add_capture(record)
    return outcome


def _capture_record(tick: int, direction: str, msg, sim: RanSim) -> CaptureRecord:
    decoded = None
    verdict = None
    if isinstance(msg, proto.RrcSetupComplete):
        frame = proto.keystream_apply(msg.frame, sim.subscriber_key,
                                      sim.cipher_enabled)
        decoded = dataclasses.asdict(proto.decode_setup_complete(frame))
        v = sim.last_verdict
        if v is not None:
            verdict = {"accepted": v.accepted,
                       "cause": v.cause.value if v.cause else None}
    return CaptureRecord(tick=tick, direction=direction,
                         frame_hex=msg.wire().hex(),
                         decoded=decoded, verdict=verdict)


def vulnerability_map(outcomes) -> VulnerabilityMap:
    vmap = VulnerabilityMap()
    for mutation, outcome in outcomes:
        ok = outcome.terminal is UeState.SESSION_ACTIVE
        for b in mutation.bits:
            vmap.flipped[b] += 1
            if ok:
                vmap.success[b] += 1
    return vmap


def run_campaign(config: CampaignConfig, ran: RanConfig | None = None,
                 ue: UeConfig | None = None, sink=None,
                 collector=None) -> CampaignResult:
    """Execute the planned mutations trial by trial, fresh RAN each time.
    Fully deterministic given (config.seed, ran, ue)."""
    if config.scenario is not Scenario.FUZZ_RRC:
        raise ValueError("run_campaign handles the fuzz-rrc scenario only")
    ran = ran or RanConfig()
    ue = ue or UeConfig()
    sink = sink or NullSink()
    harness = Agent("harness", "HARNESS", sink)
    plan = plan_for(config)

    tick = 0
    started = tick
    harness.emit("AttackMarker", tick, marker="start",
                 scenario=config.scenario.value)
    outcomes = []
    for i, mutation in enumerate(plan):
        outcome = run_trial(mutation, ran, ue,
                            cipher_enabled=config.cipher_enabled,
                            sink=sink, start_tick=tick, collector=collector)
        outcomes.append((mutation, outcome))
        tick += outcome.ticks_elapsed
        harness.emit("Kpi", tick, trial=i,
                     terminal=outcome.terminal.value,
                     mutation_bits=mutation.sorted_bits())
    harness.emit("AttackMarker", tick, marker="end",
                 scenario=config.scenario.value)
    return CampaignResult(config=config, outcomes=outcomes,
                          map=vulnerability_map(outcomes),
                          started_tick=started, finished_tick=tick)


def effect_curve(seed: int, trials_per_k: int, ks: list[int],
                 ran: RanConfig | None = None,
                 ue: UeConfig | None = None) -> list[tuple[int, float]]:
    """Success rate of random k-bit campaigns for each k."""
    out = []
    for k in ks:
        cfg = CampaignConfig(mode=CampaignMode.RANDOM, trials=trials_per_k,
                             bits_per_trial=k, seed=mix64(seed ^ (k + 1)))
        result = run_campaign(cfg, ran, ue)
        ok = sum(1 for _, o in result.outcomes
                 if o.terminal is UeState.SESSION_ACTIVE)
        out.append((k, ok / trials_per_k))
    return out


def oracle_map(ran: RanConfig | None = None,
               ue: UeConfig | None = None) -> VulnerabilityMap:
    """Exhaustive single-flip map computed without the protocol stack:
    flip each bit of the baseline frame and apply the rule table directly."""
    ran = ran or RanConfig()
    ue = ue or UeConfig()
    base = encode_setup_complete(setup_fields(ue, tid=ran.expected_tid))
    vmap = VulnerabilityMap()
    for b in range(FRAME_BITS):
        verdict = validate_setup_complete(base.flip_bits({b}), ran)
        vmap.flipped[b] = 1
        vmap.success[b] = 1 if verdict.accepted else 0
    return vmap


def dos_flood(cfg: DosConfig, ran: RanConfig | None = None,
              ue: UeConfig | None = None, sink=None) -> DosResult:
    """Connection-flood scenario against one shared RAN instance.

    Flood requests open RRC contexts and never continue; legitimate
    attaches then compete for the remaining context slots.
    """
    ran = ran or RanConfig()
    ue = ue or UeConfig()
    sink = sink or NullSink()
    sim = RanSim(config=ran, subscriber_key=ue.ue_key,
                 gnb_agent=Agent("gnb", "GNB", sink),
                 amf_agent=Agent("amf", "AMF", sink))
    harness = Agent("harness", "HARNESS", sink)

    tick = 0
    rejected = 0
    outcomes = []
    harness.emit("AttackMarker", tick, marker="start",
                 scenario=Scenario.DOS_FLOOD.value)

    def send_floods(count: int):
        nonlocal tick, rejected
        for i in range(count):
            port = sim.connect()
            replies = port.send(
                proto.RrcSetupRequest(ue_id=0xF0000000 + send_floods.issued),
                tick)
            send_floods.issued += 1
            if any(isinstance(r, proto.RrcReject) for r in replies):
                rejected += 1
            tick += 1
    send_floods.issued = 0

    if cfg.interleave is Interleave.FLOOD_FIRST:
        batches = [cfg.flood_count] + [0] * cfg.legit_attempts
    else:
        per = cfg.flood_count // cfg.legit_attempts
        rem = cfg.flood_count - per * cfg.legit_attempts
        batches = [0] + [per + (1 if i < rem else 0)
                         for i in range(cfg.legit_attempts)]

    send_floods(batches[0])
    successes = 0
    for i in range(cfg.legit_attempts):
        send_floods(batches[i + 1])
        sim.tick_expire(tick)
        legit_cfg = dataclasses.replace(ue, suci=ue.suci)
        outcome = attach(sim.connect(), legit_cfg,
                         agent=Agent(f"ue-{i}", "UE", sink), start_tick=tick)
        outcomes.append(outcome)
        tick += outcome.ticks_elapsed
        if outcome.terminal is UeState.SESSION_ACTIVE:
            successes += 1
            # Free the slot so attempts are independent given capacity.
            sim._release(legit_cfg.suci & 0xFFFFFFFF, tick, "detach")

    harness.emit("AttackMarker", tick, marker="end",
                 scenario=Scenario.DOS_FLOOD.value)
    return DosResult(legit_success_rate=successes / cfg.legit_attempts,
                     rejected_flood_count=rejected, outcomes=outcomes)
