"""gNB/AMF simulator: contexts, capacity, validation fidelity, agents."""

import pytest

from soft_tue.protocol import (
    AuthenticationRequest, AuthenticationResponse, Frame, RanConfig,
    RegistrationReject, RejectCause, RrcReject, RrcRelease, RrcSetup,
    RrcSetupComplete, RrcSetupRequest, SecurityModeComplete,
    SetupCompleteFields, encode_setup_complete, validate_setup_complete,
)
from soft_tue.ran import ContextPhase, RanSim
from soft_tue.rng import SplitMix64
from soft_tue.telemetry import Agent, ListSink
from soft_tue.ue import FuzzHook, FuzzTarget, UeConfig, UeState, attach


def default_frame() -> Frame:
    return encode_setup_complete(SetupCompleteFields())


class TestRrcSetup:
    def test_free_capacity_gets_setup(self):
        sim = RanSim()
        replies = sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        assert replies == [RrcSetup(tid=sim.config.expected_tid)]

    def test_capacity_bound_17th_rejected(self):
        sim = RanSim(RanConfig(context_capacity=16))
        for i in range(16):
            assert isinstance(sim.handle(i, RrcSetupRequest(ue_id=i), 0)[0],
                              RrcSetup)
        replies = sim.handle(16, RrcSetupRequest(ue_id=16), 0)
        assert isinstance(replies[0], RrcReject)

    def test_restart_replaces_context(self):
        sim = RanSim()
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        sim.handle(1, RrcSetupRequest(ue_id=1), 5)
        assert len(sim.contexts) == 1
        assert sim.contexts[1].created_tick == 5


class TestSetupComplete:
    def test_fuzzed_bit112_rejected_bad_nas_type(self):
        sim = RanSim()
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        frame = default_frame().flip_bits({112})
        replies = sim.handle(1, RrcSetupComplete(frame), 1)
        assert replies == [RegistrationReject(RejectCause.BAD_NAS_TYPE)]
        assert 1 not in sim.contexts  # context released on reject

    def test_accepted_frame_gets_auth_challenge(self):
        sim = RanSim()
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        replies = sim.handle(1, RrcSetupComplete(default_frame()), 1)
        assert isinstance(replies[0], AuthenticationRequest)

    def test_wrong_length_frame_parse_error_release(self):
        sink = ListSink()
        sim = RanSim(gnb_agent=Agent("gnb", "GNB", sink))
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        replies = sim.handle(1, RrcSetupComplete(Frame(b"\x00" * 25)), 1)
        assert replies == [RrcRelease()]
        assert any(e.kind == "ParseError" for e in sink.events)

    def test_verdict_fidelity_random_mutations(self):
        # The gNB's accept/reject equals validate_setup_complete on the
        # same bytes, for 200 random multi-bit mutations.
        rng = SplitMix64(9)
        for _ in range(200):
            k = rng.below(4)
            frame = default_frame().flip_bits(rng.sample(208, k))
            sim = RanSim()
            sim.handle(1, RrcSetupRequest(ue_id=1), 0)
            replies = sim.handle(1, RrcSetupComplete(frame), 1)
            verdict = validate_setup_complete(frame, sim.config)
            if verdict.accepted:
                assert isinstance(replies[0], AuthenticationRequest)
            else:
                assert replies == [RegistrationReject(verdict.cause)]


class TestAmf:
    def _to_auth(self, sim):
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        replies = sim.handle(1, RrcSetupComplete(default_frame()), 1)
        return replies[0].rand

    def test_wrong_res_rejected(self):
        sim = RanSim()
        rand = self._to_auth(sim)
        replies = sim.handle(1, AuthenticationResponse(res=rand ^ 1), 2)
        assert replies == [RegistrationReject(RejectCause.AUTH_FAILURE)]

    def test_security_mode_out_of_order_released(self):
        sim = RanSim()
        self._to_auth(sim)
        replies = sim.handle(1, SecurityModeComplete(), 2)
        assert replies == [RrcRelease()]
        assert 1 not in sim.contexts

    def test_full_chain_reaches_session_active(self):
        sim = RanSim()
        outcome = attach(sim.connect(), UeConfig())
        assert outcome.terminal is UeState.SESSION_ACTIVE
        ctx = next(iter(sim.contexts.values()))
        assert ctx.phase is ContextPhase.SESSION_ACTIVE


class TestTickExpire:
    def test_no_contexts(self):
        assert RanSim().tick_expire(100) == 0

    def test_flood_contexts_expire(self):
        sim = RanSim(RanConfig(context_expiry_ticks=50))
        for i in range(16):
            sim.handle(i, RrcSetupRequest(ue_id=i), 0)
        assert sim.tick_expire(50) == 0  # not yet past expiry
        assert sim.tick_expire(51) == 16
        assert not sim.contexts

    def test_active_sessions_never_reclaimed(self):
        sim = RanSim(RanConfig(context_expiry_ticks=1))
        attach(sim.connect(), UeConfig())
        assert sim.tick_expire(10_000) == 0
        assert len(sim.contexts) == 1


class TestInvariants:
    def test_capacity_safety_under_interleaving(self):
        config = RanConfig(context_capacity=4, context_expiry_ticks=5)
        sim = RanSim(config)
        rng = SplitMix64(3)
        for tick in range(300):
            ue_id = rng.below(12)
            sim.handle(ue_id, RrcSetupRequest(ue_id=ue_id), tick)
            sim.tick_expire(tick)
            assert len(sim.contexts) <= config.context_capacity

    def test_validation_fail_emits_agent_event(self):
        sink = ListSink()
        sim = RanSim(gnb_agent=Agent("gnb", "GNB", sink))
        sim.handle(1, RrcSetupRequest(ue_id=1), 0)
        sim.handle(1, RrcSetupComplete(default_frame().flip_bits({0})), 1)
        fails = [e for e in sink.events if e.kind == "ValidationFail"]
        assert len(fails) == 1
        assert fails[0].details["cause"] == "BadMsgType"

    def test_agent_seq_strictly_increases(self):
        sink = ListSink()
        sim = RanSim(gnb_agent=Agent("gnb", "GNB", sink),
                     amf_agent=Agent("amf", "AMF", sink))
        attach(sim.connect(), UeConfig())
        by_agent = {}
        for e in sink.events:
            assert e.seq == by_agent.get(e.agent_id, 0) + 1
            by_agent[e.agent_id] = e.seq
