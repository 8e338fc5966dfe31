"""Simplified 5G message set and the bit-exact uplink registration frame.

The RRC Setup Complete frame carried during registration is a fixed
26-byte (208-bit) buffer. Its layout and the gNB/AMF validation rule
table are normative and documented in docs/frame-layout.md. Decoding is
deliberately validation-free so that fuzzed frames still decode; the
rule table is applied by validate_setup_complete in a fixed order.

All operations here are pure functions over value types.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .rng import MASK64, mix64

FRAME_LEN = 26
FRAME_BITS = FRAME_LEN * 8

VALID_MSG_TYPE = 0x43
VALID_NAS_MSG_TYPE = 0x41
DEFAULT_SUCI = 0x0011223344556677
DEFAULT_SUBSCRIBER_KEY = 0x0F1E2D3C4B5A6978


class WrongLength(ValueError):
    """Frame does not have the required byte count."""


class RejectCause(Enum):
    BAD_MSG_TYPE = "BadMsgType"
    BAD_TRANSACTION_ID = "BadTransactionId"
    BAD_PLMN = "BadPlmn"
    BAD_CAUSE = "BadCause"
    BAD_REGISTRATION_TYPE = "BadRegistrationType"
    UNKNOWN_SUBSCRIBER = "UnknownSubscriber"
    NO_SECURITY_ALGO = "NoSecurityAlgo"
    BAD_NAS_TYPE = "BadNasType"
    BAD_SLICE = "BadSlice"
    BAD_LENGTH = "BadLength"
    # Non-validation reject causes used on the RRC path.
    NO_CAPACITY = "NoCapacity"
    AUTH_FAILURE = "AuthFailure"
    PROTOCOL_VIOLATION = "ProtocolViolation"


@dataclass(frozen=True)
class Frame:
    """Fixed-length byte buffer with MSB-first bit addressing.

    Bit index b refers to byte b // 8, mask 0x80 >> (b % 8); bit 0 is the
    most significant bit of byte 0. Mutation never changes length.
    """

    data: bytes

    @property
    def bit_len(self) -> int:
        return len(self.data) * 8

    def bit(self, b: int) -> int:
        if not 0 <= b < self.bit_len:
            raise IndexError(f"bit index {b} out of range")
        return (self.data[b // 8] >> (7 - b % 8)) & 1

    def flip_bits(self, bits) -> "Frame":
        buf = bytearray(self.data)
        for b in bits:
            if not 0 <= b < self.bit_len:
                raise IndexError(f"bit index {b} out of range")
            buf[b // 8] ^= 0x80 >> (b % 8)
        return Frame(bytes(buf))

    def hex(self) -> str:
        return self.data.hex()


_LAYOUT = struct.Struct(">BBBBQHBBIHHH")


@dataclass
class SetupCompleteFields:
    """Field view of the 26-byte registration frame.

    Byte layout (big-endian within multi-byte fields):
    0 msg_type | 1 tid(hi)/plmn_index(lo) | 2 establishment_cause |
    3 registration_type | 4-11 suci | 12-13 sec_caps | 14 nas_msg_type |
    15 nas_key_set_id | 16-19 slice_id | 20-21 ue_caps | 22-23 reserved |
    24-25 length
    """

    msg_type: int = VALID_MSG_TYPE
    tid: int = 1
    plmn_index: int = 0
    establishment_cause: int = 0x03
    registration_type: int = 0x01
    suci: int = DEFAULT_SUCI
    sec_caps: int = 0x1100
    nas_msg_type: int = VALID_NAS_MSG_TYPE
    nas_key_set_id: int = 0
    slice_id: int = 1
    ue_caps: int = 0
    reserved: int = 0
    length: int = FRAME_LEN


def encode_setup_complete(fields: SetupCompleteFields) -> Frame:
    """Pack the field set into its 26-byte wire frame."""
    return Frame(_LAYOUT.pack(
        fields.msg_type & 0xFF,
        ((fields.tid & 0xF) << 4) | (fields.plmn_index & 0xF),
        fields.establishment_cause & 0xFF,
        fields.registration_type & 0xFF,
        fields.suci & MASK64,
        fields.sec_caps & 0xFFFF,
        fields.nas_msg_type & 0xFF,
        fields.nas_key_set_id & 0xFF,
        fields.slice_id & 0xFFFFFFFF,
        fields.ue_caps & 0xFFFF,
        fields.reserved & 0xFFFF,
        fields.length & 0xFFFF,
    ))


def decode_setup_complete(frame: Frame) -> SetupCompleteFields:
    """Read field values from the documented offsets. No validation: a
    fuzzed frame decodes fine and is judged later by the rule table."""
    if len(frame.data) != FRAME_LEN:
        raise WrongLength(f"expected {FRAME_LEN} bytes, got {len(frame.data)}")
    (msg_type, tid_plmn, cause, reg, suci, sec_caps, nas, ksi,
     slice_id, ue_caps, reserved, length) = _LAYOUT.unpack(frame.data)
    return SetupCompleteFields(
        msg_type=msg_type,
        tid=tid_plmn >> 4,
        plmn_index=tid_plmn & 0xF,
        establishment_cause=cause,
        registration_type=reg,
        suci=suci,
        sec_caps=sec_caps,
        nas_msg_type=nas,
        nas_key_set_id=ksi,
        slice_id=slice_id,
        ue_caps=ue_caps,
        reserved=reserved,
        length=length,
    )


@dataclass
class RanConfig:
    """RAN-under-test configuration: the rule table's parameters plus
    context-pool sizing. Also the oracle's input."""

    expected_tid: int = 1
    plmn_count: int = 2
    valid_causes: frozenset = frozenset(range(0x09))
    valid_reg_types: frozenset = frozenset({0x01, 0x02, 0x03})
    provisioned_sucis: frozenset = frozenset({DEFAULT_SUCI})
    allowed_slices: frozenset = frozenset({0x00000001, 0x00000003})
    context_capacity: int = 16
    context_expiry_ticks: int = 50
    silent_drop: bool = False

    def __post_init__(self):
        self.valid_causes = frozenset(self.valid_causes)
        self.valid_reg_types = frozenset(self.valid_reg_types)
        self.provisioned_sucis = frozenset(self.provisioned_sucis)
        self.allowed_slices = frozenset(self.allowed_slices)
        if self.plmn_count < 1 or self.plmn_count > 16:
            raise ValueError("plmn_count must be in [1, 16]")
        for name in ("valid_causes", "valid_reg_types", "provisioned_sucis",
                     "allowed_slices"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")


@dataclass(frozen=True)
class ValidationVerdict:
    accepted: bool
    cause: RejectCause | None = None

    def __post_init__(self):
        if self.accepted == (self.cause is not None):
            raise ValueError("accepted iff cause is absent")


def validate_setup_complete(frame: Frame, config: RanConfig) -> ValidationVerdict:
    """Apply the rule table in fixed order; the first failing rule wins."""
    f = decode_setup_complete(frame)
    if f.msg_type != VALID_MSG_TYPE:
        return ValidationVerdict(False, RejectCause.BAD_MSG_TYPE)
    if f.length != FRAME_LEN:
        return ValidationVerdict(False, RejectCause.BAD_LENGTH)
    if f.tid != config.expected_tid:
        return ValidationVerdict(False, RejectCause.BAD_TRANSACTION_ID)
    if f.plmn_index >= config.plmn_count:
        return ValidationVerdict(False, RejectCause.BAD_PLMN)
    if f.establishment_cause not in config.valid_causes:
        return ValidationVerdict(False, RejectCause.BAD_CAUSE)
    if f.registration_type not in config.valid_reg_types:
        return ValidationVerdict(False, RejectCause.BAD_REGISTRATION_TYPE)
    if f.suci not in config.provisioned_sucis:
        return ValidationVerdict(False, RejectCause.UNKNOWN_SUBSCRIBER)
    caps_hi = (f.sec_caps >> 12) & 0xF
    caps_lo = (f.sec_caps >> 8) & 0xF
    if caps_hi == 0 or caps_lo == 0:
        return ValidationVerdict(False, RejectCause.NO_SECURITY_ALGO)
    if f.nas_msg_type != VALID_NAS_MSG_TYPE:
        return ValidationVerdict(False, RejectCause.BAD_NAS_TYPE)
    if f.slice_id not in config.allowed_slices:
        return ValidationVerdict(False, RejectCause.BAD_SLICE)
    return ValidationVerdict(True)


def keystream_bytes(key: int, n: int) -> bytes:
    """Deterministic keystream: 8-byte blocks of mix64(key ^ block_offset)."""
    out = bytearray()
    offset = 0
    while len(out) < n:
        out += mix64((key ^ offset) & MASK64).to_bytes(8, "big")
        offset += 8
    return bytes(out[:n])


def keystream_apply(frame: Frame, key: int, enabled: bool) -> Frame:
    """XOR the frame with the key's keystream; identity when disabled.
    Applying twice with the same key restores the input."""
    if not enabled:
        return frame
    ks = keystream_bytes(key, len(frame.data))
    return Frame(bytes(a ^ b for a, b in zip(frame.data, ks)))


def auth_response(rand: int, key: int) -> int:
    """Challenge response shared by UE and AMF: mix64(rand XOR key)."""
    return mix64((rand ^ key) & MASK64)


# ---------------------------------------------------------------------------
# Message set. Each message has a wire() encoding used for capture records
# and byte accounting; RrcSetupComplete's wire form is the raw frame.
# ---------------------------------------------------------------------------

class EstablishmentCause(IntEnum):
    EMERGENCY = 0x00
    HIGH_PRIORITY_ACCESS = 0x01
    MT_ACCESS = 0x02
    MO_SIGNALLING = 0x03
    MO_DATA = 0x04
    MO_VOICE_CALL = 0x05
    MO_VIDEO_CALL = 0x06
    MO_SMS = 0x07
    MPS_PRIORITY_ACCESS = 0x08


# Uplink

@dataclass(frozen=True)
class RrcSetupRequest:
    ue_id: int
    establishment_cause: int = EstablishmentCause.MO_SIGNALLING

    def wire(self) -> bytes:
        return struct.pack(">BIB", 0x01, self.ue_id & 0xFFFFFFFF,
                           self.establishment_cause & 0xFF)


@dataclass(frozen=True)
class RrcSetupComplete:
    # Well-formed frames are always 208 bits; the length is checked by the
    # receiver so truncated frames exercise its ParseError path.
    frame: Frame

    def wire(self) -> bytes:
        return self.frame.data


@dataclass(frozen=True)
class AuthenticationResponse:
    res: int

    def wire(self) -> bytes:
        return struct.pack(">BQ", 0x03, self.res & MASK64)


@dataclass(frozen=True)
class SecurityModeComplete:
    def wire(self) -> bytes:
        return b"\x04"


@dataclass(frozen=True)
class PduSessionEstablishmentRequest:
    session_id: int = 1

    def wire(self) -> bytes:
        return struct.pack(">BB", 0x05, self.session_id & 0xFF)


# Downlink

@dataclass(frozen=True)
class RrcSetup:
    tid: int

    def wire(self) -> bytes:
        return struct.pack(">BB", 0x81, self.tid & 0xF)


@dataclass(frozen=True)
class RrcReject:
    cause: RejectCause

    def wire(self) -> bytes:
        return b"\x82"


@dataclass(frozen=True)
class AuthenticationRequest:
    rand: int

    def wire(self) -> bytes:
        return struct.pack(">BQ", 0x83, self.rand & MASK64)


@dataclass(frozen=True)
class SecurityModeCommand:
    ciphering_algo: int = 0x1
    integrity_algo: int = 0x1

    def wire(self) -> bytes:
        return struct.pack(">BB", 0x84,
                           ((self.ciphering_algo & 0xF) << 4)
                           | (self.integrity_algo & 0xF))


@dataclass(frozen=True)
class RegistrationAccept:
    def wire(self) -> bytes:
        return b"\x85"


@dataclass(frozen=True)
class RegistrationReject:
    cause: RejectCause

    def wire(self) -> bytes:
        return b"\x86"


@dataclass(frozen=True)
class PduSessionEstablishmentAccept:
    session_id: int = 1

    def wire(self) -> bytes:
        return struct.pack(">BB", 0x87, self.session_id & 0xFF)


@dataclass(frozen=True)
class RrcRelease:
    def wire(self) -> bytes:
        return b"\x88"


UplinkMessage = (RrcSetupRequest | RrcSetupComplete | AuthenticationResponse
                 | SecurityModeComplete | PduSessionEstablishmentRequest)
DownlinkMessage = (RrcSetup | RrcReject | AuthenticationRequest
                   | SecurityModeCommand | RegistrationAccept
                   | RegistrationReject | PduSessionEstablishmentAccept
                   | RrcRelease)


# Byte-offset to field-name map used by reports and the heatmap.
_FIELD_SPANS = [
    (0, 8, "msg_type"),
    (8, 12, "tid"),
    (12, 16, "plmn_index"),
    (16, 24, "establishment_cause"),
    (24, 32, "registration_type"),
    (32, 96, "suci"),
    (96, 112, "sec_caps"),
    (112, 120, "nas_msg_type"),
    (120, 128, "nas_key_set_id"),
    (128, 160, "slice_id"),
    (160, 176, "ue_caps"),
    (176, 192, "reserved"),
    (192, 208, "length"),
]


def field_name_for_bit(bit: int) -> str:
    for lo, hi, name in _FIELD_SPANS:
        if lo <= bit < hi:
            return name
    raise IndexError(f"bit index {bit} out of range")
