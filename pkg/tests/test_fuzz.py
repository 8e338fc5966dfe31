"""Mutation plans, campaign execution, DoS flood, and the oracle map."""

import pytest

from soft_tue import fuzz
from soft_tue.fuzz import (
    CampaignConfig, CampaignMode, DosConfig, Interleave, InvalidK, Mutation,
    OutOfRange, Scenario, dos_flood, effect_curve, mutate, oracle_map,
    plan_exhaustive, plan_random, run_campaign, vulnerability_map,
)
from soft_tue.protocol import (
    RanConfig, SetupCompleteFields, encode_setup_complete,
)
from soft_tue.rng import SplitMix64
from soft_tue.ue import AttachOutcome, UeConfig, UeState

TOLERATED_BITS = 60
FATAL_BITS = 148


def default_frame():
    return encode_setup_complete(SetupCompleteFields())


def random_ran_config(rng: SplitMix64) -> RanConfig:
    """Randomized RAN config that keeps the baseline frame's field values
    valid (the sets always contain the defaults)."""
    return RanConfig(
        expected_tid=rng.below(16),
        plmn_count=1 + rng.below(16),
        valid_causes=frozenset({0x03} | set(rng.sample(256, rng.below(12)))),
        valid_reg_types=frozenset({0x01} | set(rng.sample(256, rng.below(6)))),
        provisioned_sucis=frozenset(
            {UeConfig().suci} | {rng.next_u64() for _ in range(rng.below(4))}),
        allowed_slices=frozenset(
            {1} | {rng.below(1 << 32) for _ in range(rng.below(4))}),
    )


class TestPlans:
    def test_exhaustive_plan(self):
        plan = plan_exhaustive()
        assert len(plan) == 208
        assert plan[0].bits == {0}
        assert plan[207].bits == {207}
        assert len(set(plan)) == 208

    def test_random_plan_shape(self):
        plan = plan_random(seed=42, trials=100, k=1)
        assert len(plan) == 100
        assert all(len(m.bits) == 1 for m in plan)

    def test_random_plan_k0_identity(self):
        assert all(m.bits == frozenset()
                   for m in plan_random(seed=1, trials=10, k=0))

    def test_random_plan_deterministic(self):
        assert plan_random(7, 50, 3) == plan_random(7, 50, 3)

    def test_random_plan_distinct_bits_within_trial(self):
        for m in plan_random(5, 200, 8):
            assert len(m.bits) == 8

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            plan_random(0, 1, 209)


class TestMutate:
    def test_single_bit(self):
        out = mutate(default_frame(), Mutation(frozenset({0})))
        assert out.data[0] == 0xC3

    def test_identity(self):
        frame = default_frame()
        assert mutate(frame, Mutation()) == frame

    def test_involution(self):
        frame = default_frame()
        m = Mutation(frozenset({3, 77, 200}))
        assert mutate(mutate(frame, m), m) == frame

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            Mutation(frozenset({208}))


class TestOracleMap:
    def test_default_counts(self):
        scores = oracle_map().scores
        assert scores.count(0) == FATAL_BITS
        assert scores.count(100) == TOLERATED_BITS

    def test_suci_bits_all_fatal(self):
        scores = oracle_map().scores
        assert all(scores[b] == 0 for b in range(32, 96))

    def test_reserved_bits_all_tolerated(self):
        scores = oracle_map().scores
        assert all(scores[b] == 100 for b in range(176, 192))

    def test_wide_plmn_tolerates_plmn_nibble(self):
        scores = oracle_map(RanConfig(plmn_count=16)).scores
        assert all(scores[b] == 100 for b in range(12, 16))


class TestVulnerabilityMap:
    def test_single_trial(self):
        outcome = AttachOutcome(UeState.REJECTED, None, 2, 2, 5, 10, 10)
        vmap = vulnerability_map([(Mutation(frozenset({5})), outcome)])
        scores = vmap.scores
        assert scores[5] == 0
        assert all(s is None for i, s in enumerate(scores) if i != 5)

    def test_score_bounds_and_rounding(self):
        ok = AttachOutcome(UeState.SESSION_ACTIVE, None, 5, 5, 8, 10, 10)
        bad = AttachOutcome(UeState.REJECTED, None, 2, 2, 5, 10, 10)
        m = Mutation(frozenset({7}))
        vmap = vulnerability_map([(m, ok), (m, ok), (m, bad)])
        assert vmap.scores[7] == 67  # 2/3 rounds half-up to 67

    def test_flip_count_accounting(self):
        plan = plan_random(11, 50, 3)
        ok = AttachOutcome(UeState.SESSION_ACTIVE, None, 5, 5, 8, 10, 10)
        vmap = vulnerability_map([(m, ok) for m in plan])
        assert sum(vmap.flipped) == sum(len(m.bits) for m in plan)


class TestRunCampaign:
    def test_exhaustive_148_rejected(self):
        result = run_campaign(CampaignConfig(mode=CampaignMode.EXHAUSTIVE))
        rejected = sum(1 for _, o in result.outcomes
                       if o.terminal is UeState.REJECTED)
        assert rejected == FATAL_BITS
        assert len(result.outcomes) == 208

    def test_exhaustive_matches_oracle(self):
        result = run_campaign(CampaignConfig(mode=CampaignMode.EXHAUSTIVE))
        assert result.map.scores == oracle_map().scores

    def test_exhaustive_matches_oracle_random_configs(self):
        rng = SplitMix64(2024)
        for _ in range(5):
            ran = random_ran_config(rng)
            result = run_campaign(
                CampaignConfig(mode=CampaignMode.EXHAUSTIVE), ran)
            assert result.map.scores == oracle_map(ran).scores

    def test_k0_trials_all_succeed(self):
        cfg = CampaignConfig(mode=CampaignMode.RANDOM, trials=10,
                             bits_per_trial=0, seed=1)
        result = run_campaign(cfg)
        assert all(o.terminal is UeState.SESSION_ACTIVE
                   for _, o in result.outcomes)

    def test_cipher_invariance(self):
        base = CampaignConfig(mode=CampaignMode.RANDOM, trials=50,
                              bits_per_trial=2, seed=99)
        on = CampaignConfig(mode=CampaignMode.RANDOM, trials=50,
                            bits_per_trial=2, seed=99, cipher_enabled=True)
        assert run_campaign(base).map.scores == run_campaign(on).map.scores

    def test_determinism(self):
        cfg = CampaignConfig(mode=CampaignMode.RANDOM, trials=30,
                             bits_per_trial=1, seed=5)
        a = run_campaign(cfg)
        b = run_campaign(cfg)
        assert a.outcomes == b.outcomes
        assert a.map.scores == b.map.scores

    def test_exhaustive_scores_only_0_or_100(self):
        result = run_campaign(CampaignConfig(mode=CampaignMode.EXHAUSTIVE))
        assert set(s for s in result.map.scores if s is not None) <= {0, 100}

    def test_rejects_dos_scenario(self):
        with pytest.raises(ValueError):
            run_campaign(CampaignConfig(scenario=Scenario.DOS_FLOOD))


class TestEffectCurve:
    def test_k0_is_one(self):
        assert effect_curve(1, 20, [0]) == [(0, 1.0)]

    def test_k1_near_expected_ratio(self):
        [(_, rate)] = effect_curve(42, 1000, [1])
        assert abs(rate - TOLERATED_BITS / 208) <= 0.04

    def test_k208_is_zero(self):
        [(_, rate)] = effect_curve(3, 20, [208])
        assert rate == 0.0


class TestDosFlood:
    def test_no_flood_full_success(self):
        result = dos_flood(DosConfig(flood_count=0, legit_attempts=10))
        assert result.legit_success_rate == 1.0

    def test_flood_exhausts_capacity(self):
        ran = RanConfig(context_capacity=16, context_expiry_ticks=10**9)
        result = dos_flood(DosConfig(flood_count=64, legit_attempts=10), ran)
        assert result.legit_success_rate == 0.0
        assert result.rejected_flood_count == 64 - 16

    def test_partial_flood_leaves_room(self):
        ran = RanConfig(context_capacity=16, context_expiry_ticks=10**9)
        result = dos_flood(DosConfig(flood_count=8, legit_attempts=10), ran)
        assert result.legit_success_rate == 1.0

    def test_expiry_restores_service(self):
        ran = RanConfig(context_capacity=16, context_expiry_ticks=2)
        result = dos_flood(DosConfig(flood_count=16, legit_attempts=5), ran)
        # flood contexts age out quickly, so later attempts succeed
        assert result.legit_success_rate > 0.0

    def test_mixed_interleave_runs(self):
        ran = RanConfig(context_capacity=16, context_expiry_ticks=10**9)
        result = dos_flood(DosConfig(flood_count=10, legit_attempts=5,
                                     interleave=Interleave.MIXED), ran)
        assert 0.0 <= result.legit_success_rate <= 1.0

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            DosConfig(flood_count=-1)
        with pytest.raises(ValueError):
            DosConfig(legit_attempts=0)
