"""The soft tester UE: a state machine that runs the full attach,
registration and PDU-session procedure against the simulated RAN, with a
fuzz-injection hook at the SDU buffer.

The hook is applied exactly once, to the encoded RRC Setup Complete
frame only; everything before that exchange is byte-identical to an
unfuzzed run. Time is logical ticks; a single per-response timer of
``response_timeout_ticks`` covers every wait state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from . import protocol as proto
from .protocol import (
    AuthenticationRequest, AuthenticationResponse, Frame,
    PduSessionEstablishmentAccept, PduSessionEstablishmentRequest,
    RegistrationAccept, RegistrationReject, RejectCause, RrcReject,
    RrcRelease, RrcSetup, RrcSetupComplete, RrcSetupRequest,
    SecurityModeCommand, SecurityModeComplete, SetupCompleteFields,
    auth_response, encode_setup_complete, keystream_apply,
)
from .telemetry import Agent, NullSink


class UeState(Enum):
    IDLE = "Idle"
    CELL_SEARCH = "CellSearch"
    RACH_SENT = "RachSent"
    CONNECTED = "Connected"
    REGISTRATION_PENDING = "RegistrationPending"
    AUTHENTICATING = "Authenticating"
    SECURITY_MODE = "SecurityMode"
    REGISTERED = "Registered"
    PDU_SESSION_PENDING = "PduSessionPending"
    SESSION_ACTIVE = "SessionActive"
    REJECTED = "Rejected"
    TIMEOUT = "Timeout"


TERMINAL_STATES = frozenset(
    {UeState.SESSION_ACTIVE, UeState.REJECTED, UeState.TIMEOUT})

# States the UE leaves on its own initiative (no downlink needed): cell
# search degenerates to selecting the only configured cell.
_AUTO_STATES = frozenset(
    {UeState.IDLE, UeState.CELL_SEARCH, UeState.CONNECTED, UeState.REGISTERED})


class Start:
    """Kick the UE out of Idle."""


class Proceed:
    """Internal progression event for states that act without downlink."""


class TimerExpiry:
    """Per-response timer fired."""


class FuzzTarget(Enum):
    NONE = "None"
    RRC_SETUP_COMPLETE = "RrcSetupComplete"


@dataclass(frozen=True)
class FuzzHook:
    target: FuzzTarget = FuzzTarget.NONE
    bits: frozenset = frozenset()

    def apply(self, frame: Frame) -> Frame:
        if self.target is FuzzTarget.NONE:
            return frame
        return frame.flip_bits(self.bits)


IDENTITY_HOOK = FuzzHook()


@dataclass
class UeConfig:
    ue_key: int = proto.DEFAULT_SUBSCRIBER_KEY
    suci: int = proto.DEFAULT_SUCI
    response_timeout_ticks: int = 10
    cipher_enabled: bool = False
    # Registration field choices; tid is taken from the RrcSetup response.
    establishment_cause: int = 0x03
    registration_type: int = 0x01
    sec_caps: int = 0x1100
    slice_id: int = 1

    def __post_init__(self):
        if self.response_timeout_ticks < 1:
            raise ValueError("response_timeout_ticks must be >= 1")


@dataclass(frozen=True)
class AttachOutcome:
    terminal: UeState
    cause: RejectCause | None
    ul_msgs: int
    dl_msgs: int
    ticks_elapsed: int
    ul_bytes: int
    dl_bytes: int


def setup_fields(config: UeConfig, tid: int) -> SetupCompleteFields:
    """The registration frame this UE sends once RRC setup assigns tid."""
    return SetupCompleteFields(
        tid=tid,
        establishment_cause=config.establishment_cause,
        registration_type=config.registration_type,
        suci=config.suci,
        sec_caps=config.sec_caps,
        slice_id=config.slice_id,
    )


class ProtocolViolation(Exception):
    pass


class TesterUe:
    """Single-threaded UE instance; owns no shared state."""

    def __init__(self, config: UeConfig, hook: FuzzHook = IDENTITY_HOOK,
                 agent: Agent | None = None):
        self.config = config
        self.hook = hook
        self.agent = agent or Agent("ue", "UE", NullSink())
        self.state = UeState.IDLE
        self.cause: RejectCause | None = None
        self._tid = 0

    @property
    def ue_id(self) -> int:
        return self.config.suci & 0xFFFFFFFF

    def _transition(self, new_state: UeState, tick: int) -> None:
        self.agent.emit("StateTransition", tick,
                        frm=self.state.value, to=new_state.value)
        self.state = new_state

    def _build_setup_complete(self) -> RrcSetupComplete:
        frame = encode_setup_complete(setup_fields(self.config, self._tid))
        frame = self.hook.apply(frame)
        frame = keystream_apply(frame, self.config.ue_key,
                                self.config.cipher_enabled)
        return RrcSetupComplete(frame)

    def step(self, event, tick: int) -> list:
        """Advance one transition; returns the uplink messages to send."""
        if self.state in TERMINAL_STATES:
            raise ProtocolViolation(f"step in terminal state {self.state}")

        if isinstance(event, TimerExpiry):
            self._transition(UeState.TIMEOUT, tick)
            return []
        if isinstance(event, (RegistrationReject, RrcReject)):
            self.cause = event.cause
            self._transition(UeState.REJECTED, tick)
            return []
        if isinstance(event, RrcRelease):
            self.cause = RejectCause.PROTOCOL_VIOLATION
            self._transition(UeState.REJECTED, tick)
            return []

        match self.state, event:
            case (UeState.IDLE, Start()):
                self._transition(UeState.CELL_SEARCH, tick)
                return []
            case (UeState.CELL_SEARCH, Proceed()):
                self._transition(UeState.RACH_SENT, tick)
                return [RrcSetupRequest(
                    ue_id=self.ue_id,
                    establishment_cause=self.config.establishment_cause)]
            case (UeState.RACH_SENT, RrcSetup(tid=tid)):
                self._tid = tid
                self._transition(UeState.CONNECTED, tick)
                return []
            case (UeState.CONNECTED, Proceed()):
                self._transition(UeState.REGISTRATION_PENDING, tick)
                return [self._build_setup_complete()]
            case (UeState.REGISTRATION_PENDING, AuthenticationRequest(rand=rand)):
                self._transition(UeState.AUTHENTICATING, tick)
                return [AuthenticationResponse(
                    res=auth_response(rand, self.config.ue_key))]
            case (UeState.AUTHENTICATING, SecurityModeCommand()):
                self._transition(UeState.SECURITY_MODE, tick)
                return [SecurityModeComplete()]
            case (UeState.SECURITY_MODE, RegistrationAccept()):
                self._transition(UeState.REGISTERED, tick)
                return []
            case (UeState.REGISTERED, Proceed()):
                self._transition(UeState.PDU_SESSION_PENDING, tick)
                return [PduSessionEstablishmentRequest(session_id=1)]
            case (UeState.PDU_SESSION_PENDING,
                  PduSessionEstablishmentAccept()):
                self._transition(UeState.SESSION_ACTIVE, tick)
                return []
            case _:
                self.agent.emit("ParseError", tick, anomaly="unexpected_event",
                                state=self.state.value,
                                event=type(event).__name__)
                self.cause = RejectCause.PROTOCOL_VIOLATION
                self._transition(UeState.REJECTED, tick)
                return []


def attach(port, config: UeConfig, hook: FuzzHook = IDENTITY_HOOK,
           agent: Agent | None = None, start_tick: int = 0,
           trace: list | None = None) -> AttachOutcome:
    """Drive a fresh UE to a terminal state over the given message port.

    ``port.send(msg, tick)`` must return the downlink replies in order.
    When ``trace`` is a list it receives (tick, direction, message)
    tuples for every message crossing the port.
    """
    ue = TesterUe(config, hook, agent)
    tick = start_tick
    dl_queue: deque = deque()
    ul_msgs = dl_msgs = ul_bytes = dl_bytes = 0
    last_activity = tick

    outs = ue.step(Start(), tick)
    while ue.state not in TERMINAL_STATES:
        if ue.state in _AUTO_STATES:
            outs = ue.step(Proceed(), tick)
        elif dl_queue:
            msg = dl_queue.popleft()
            dl_msgs += 1
            dl_bytes += len(msg.wire())
            ue.agent.emit("MsgRx", tick, msg=type(msg).__name__,
                          bytes=len(msg.wire()))
            if trace is not None:
                trace.append((tick, "DL", msg))
            last_activity = tick
            outs = ue.step(msg, tick)
        elif tick - last_activity >= config.response_timeout_ticks:
            outs = ue.step(TimerExpiry(), tick)
        else:
            tick += 1
            continue

        for msg in outs:
            ul_msgs += 1
            ul_bytes += len(msg.wire())
            ue.agent.emit("MsgTx", tick, msg=type(msg).__name__,
                          bytes=len(msg.wire()))
            if trace is not None:
                trace.append((tick, "UL", msg))
            dl_queue.extend(port.send(msg, tick))
            last_activity = tick
        tick += 1

    return AttachOutcome(
        terminal=ue.state,
        cause=ue.cause if ue.state is UeState.REJECTED else None,
        ul_msgs=ul_msgs,
        dl_msgs=dl_msgs,
        ticks_elapsed=tick - start_tick,
        ul_bytes=ul_bytes,
        dl_bytes=dl_bytes,
    )
