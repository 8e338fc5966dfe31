"""The RAN under test: a simulated gNB plus a minimal AMF/core.

Uplink messages are validated against the protocol rule table; the gNB
adds no hidden validation, so the accept/reject decision for any RRC
Setup Complete equals validate_setup_complete on the same bytes.
Connection contexts live in a finite pool; stale RrcPending contexts are
reclaimed by tick_expire. White-box mode wires agent sinks into gNB and
AMF; black-box mode runs the identical simulator with a null sink.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import protocol as proto
from .protocol import (
    AuthenticationRequest, AuthenticationResponse, Frame,
    PduSessionEstablishmentAccept, PduSessionEstablishmentRequest,
    RanConfig, RegistrationAccept, RegistrationReject, RejectCause,
    RrcReject, RrcRelease, RrcSetup, RrcSetupComplete, RrcSetupRequest,
    SecurityModeCommand, SecurityModeComplete, auth_response,
    keystream_apply, validate_setup_complete,
)
from .rng import MASK64, mix64
from .telemetry import Agent, NullSink


class ContextPhase(Enum):
    RRC_PENDING = "RrcPending"
    REGISTERED = "Registered"
    SESSION_ACTIVE = "SessionActive"


class _Stage(Enum):
    AWAIT_SETUP_COMPLETE = "AwaitSetupComplete"
    AWAIT_AUTH = "AwaitAuth"
    AWAIT_SMC = "AwaitSmc"
    AWAIT_PDU = "AwaitPdu"
    DONE = "Done"


@dataclass
class GnbContext:
    ue_id: int
    tid: int
    created_tick: int
    phase: ContextPhase = ContextPhase.RRC_PENDING
    stage: _Stage = _Stage.AWAIT_SETUP_COMPLETE
    expected_res: int = 0


class RanSim:
    """One gNB + AMF instance; processes messages serially in tick order."""

    def __init__(self, config: RanConfig | None = None,
                 subscriber_key: int = proto.DEFAULT_SUBSCRIBER_KEY,
                 cipher_enabled: bool = False,
                 gnb_agent: Agent | None = None,
                 amf_agent: Agent | None = None):
        self.config = config or RanConfig()
        self.subscriber_key = subscriber_key
        self.cipher_enabled = cipher_enabled
        self.gnb = gnb_agent or Agent("gnb", "GNB", NullSink())
        self.amf = amf_agent or Agent("amf", "AMF", NullSink())
        self.contexts: dict[int, GnbContext] = {}
        # Verdict of the most recent RRC Setup Complete, for capture logs.
        self.last_verdict: proto.ValidationVerdict | None = None

    def connect(self) -> "Port":
        return Port(self)

    # -- context pool --------------------------------------------------

    def _release(self, ue_id: int, now: int, reason: str) -> None:
        ctx = self.contexts.pop(ue_id, None)
        if ctx is not None:
            self.gnb.emit("StateTransition", now, ue_id=ue_id,
                          frm=ctx.phase.value, to="Released", reason=reason)

    def tick_expire(self, now: int) -> int:
        """Reclaim stale RrcPending contexts; active sessions are immune."""
        stale = [ctx.ue_id for ctx in self.contexts.values()
                 if ctx.phase is ContextPhase.RRC_PENDING
                 and now - ctx.created_tick > self.config.context_expiry_ticks]
        for ue_id in stale:
            self._release(ue_id, now, "expired")
        return len(stale)

    # -- message handling ----------------------------------------------

    def handle(self, ue_id: int, msg, now: int) -> list:
        self.gnb.emit("MsgRx", now, ue_id=ue_id, msg=type(msg).__name__,
                      bytes=len(msg.wire()))
        replies = self._dispatch(ue_id, msg, now)
        for reply in replies:
            self.gnb.emit("MsgTx", now, ue_id=ue_id,
                          msg=type(reply).__name__, bytes=len(reply.wire()))
        return replies

    def _dispatch(self, ue_id: int, msg, now: int) -> list:
        if isinstance(msg, RrcSetupRequest):
            return self._on_setup_request(ue_id, msg, now)

        ctx = self.contexts.get(ue_id)
        if ctx is None:
            self.gnb.emit("ParseError", now, ue_id=ue_id,
                          anomaly="no_context", msg=type(msg).__name__)
            return [RrcRelease()]

        if isinstance(msg, RrcSetupComplete):
            return self._on_setup_complete(ctx, msg, now)
        if isinstance(msg, (AuthenticationResponse, SecurityModeComplete,
                            PduSessionEstablishmentRequest)):
            return self._amf_handle(ctx, msg, now)

        self.gnb.emit("ParseError", now, ue_id=ue_id,
                      anomaly="unexpected_message", msg=type(msg).__name__)
        self._release(ue_id, now, "protocol_violation")
        return [RrcRelease()]

    def _on_setup_request(self, ue_id: int, msg: RrcSetupRequest,
                          now: int) -> list:
        if ue_id in self.contexts:
            self._release(ue_id, now, "restart")
        if len(self.contexts) >= self.config.context_capacity:
            self.gnb.emit("ValidationFail", now, ue_id=ue_id,
                          cause=RejectCause.NO_CAPACITY.value)
            return [RrcReject(RejectCause.NO_CAPACITY)]
        ctx = GnbContext(ue_id=ue_id, tid=self.config.expected_tid,
                         created_tick=now)
        self.contexts[ue_id] = ctx
        self.gnb.emit("StateTransition", now, ue_id=ue_id,
                      frm="None", to=ctx.phase.value)
        return [RrcSetup(tid=ctx.tid)]

    def _on_setup_complete(self, ctx: GnbContext, msg: RrcSetupComplete,
                           now: int) -> list:
        if ctx.stage is not _Stage.AWAIT_SETUP_COMPLETE:
            self._release(ctx.ue_id, now, "protocol_violation")
            return [RrcRelease()]
        if len(msg.frame.data) != proto.FRAME_LEN:
            self.gnb.emit("ParseError", now, ue_id=ctx.ue_id,
                          anomaly="wrong_length", got=len(msg.frame.data))
            self._release(ctx.ue_id, now, "parse_error")
            return [RrcRelease()]

        frame = keystream_apply(msg.frame, self.subscriber_key,
                                self.cipher_enabled)
        verdict = validate_setup_complete(frame, self.config)
        self.last_verdict = verdict
        if not verdict.accepted:
            self.gnb.emit("ValidationFail", now, ue_id=ctx.ue_id,
                          cause=verdict.cause.value)
            self._release(ctx.ue_id, now, "validation_failed")
            if self.config.silent_drop:
                return []
            return [RegistrationReject(verdict.cause)]

        self.gnb.emit("MsgRx", now, ue_id=ctx.ue_id, msg="ValidSetupComplete",
                      bytes=len(msg.frame.data))
        # Forward to the AMF path: issue the authentication challenge.
        rand = mix64((ctx.ue_id ^ 0xC0FFEE5EED) & MASK64)
        ctx.expected_res = auth_response(rand, self.subscriber_key)
        ctx.stage = _Stage.AWAIT_AUTH
        self.amf.emit("StateTransition", now, ue_id=ctx.ue_id,
                      frm="Idle", to="Authenticating")
        return [AuthenticationRequest(rand=rand)]

    def _amf_handle(self, ctx: GnbContext, msg, now: int) -> list:
        if isinstance(msg, AuthenticationResponse):
            if ctx.stage is not _Stage.AWAIT_AUTH:
                self._release(ctx.ue_id, now, "protocol_violation")
                return [RrcRelease()]
            if msg.res != ctx.expected_res:
                self.amf.emit("ValidationFail", now, ue_id=ctx.ue_id,
                              cause=RejectCause.AUTH_FAILURE.value)
                self._release(ctx.ue_id, now, "auth_failed")
                return [RegistrationReject(RejectCause.AUTH_FAILURE)]
            ctx.stage = _Stage.AWAIT_SMC
            self.amf.emit("StateTransition", now, ue_id=ctx.ue_id,
                          frm="Authenticating", to="SecurityMode")
            return [SecurityModeCommand()]

        if isinstance(msg, SecurityModeComplete):
            if ctx.stage is not _Stage.AWAIT_SMC:
                self._release(ctx.ue_id, now, "protocol_violation")
                return [RrcRelease()]
            ctx.stage = _Stage.AWAIT_PDU
            ctx.phase = ContextPhase.REGISTERED
            self.amf.emit("StateTransition", now, ue_id=ctx.ue_id,
                          frm="SecurityMode", to="Registered")
            return [RegistrationAccept()]

        if isinstance(msg, PduSessionEstablishmentRequest):
            if ctx.stage is not _Stage.AWAIT_PDU:
                self._release(ctx.ue_id, now, "protocol_violation")
                return [RrcRelease()]
            ctx.stage = _Stage.DONE
            ctx.phase = ContextPhase.SESSION_ACTIVE
            self.amf.emit("StateTransition", now, ue_id=ctx.ue_id,
                          frm="Registered", to="SessionActive")
            return [PduSessionEstablishmentAccept(session_id=msg.session_id)]

        raise AssertionError(f"unreachable: {msg!r}")


class Port:
    """Per-UE bidirectional message port: ordered, lossless, tick-stamped."""

    def __init__(self, sim: RanSim):
        self._sim = sim
        self._ue_id: int | None = None

    def send(self, msg, tick: int) -> list:
        if isinstance(msg, RrcSetupRequest):
            self._ue_id = msg.ue_id
        if self._ue_id is None:
            raise RuntimeError("port not bound: no RrcSetupRequest seen")
        return self._sim.handle(self._ue_id, msg, tick)
