"""Frame layout, validation rule table, and keystream properties."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soft_tue.protocol import (
    FRAME_BITS, FRAME_LEN, Frame, RanConfig, RejectCause,
    SetupCompleteFields, WrongLength, decode_setup_complete,
    encode_setup_complete, field_name_for_bit, keystream_apply,
    validate_setup_complete,
)
from soft_tue.rng import SplitMix64

DEFAULT_HEX = ("43" "10" "03" "01" "0011223344556677" "1100" "41" "00"
               "00000001" "0000" "0000" "001a")


def default_frame() -> Frame:
    return encode_setup_complete(SetupCompleteFields())


def random_fields(rng: SplitMix64) -> SetupCompleteFields:
    return SetupCompleteFields(
        msg_type=rng.below(256),
        tid=rng.below(16),
        plmn_index=rng.below(16),
        establishment_cause=rng.below(256),
        registration_type=rng.below(256),
        suci=rng.next_u64(),
        sec_caps=rng.below(1 << 16),
        nas_msg_type=rng.below(256),
        nas_key_set_id=rng.below(256),
        slice_id=rng.below(1 << 32),
        ue_caps=rng.below(1 << 16),
        reserved=rng.below(1 << 16),
        length=rng.below(1 << 16),
    )


class TestEncodeDecode:
    def test_default_frame_hex(self):
        assert default_frame().data.hex() == DEFAULT_HEX

    def test_frame_is_26_bytes_208_bits(self):
        frame = default_frame()
        assert len(frame.data) == FRAME_LEN
        assert frame.bit_len == FRAME_BITS == 208

    def test_any_fields_encode_to_208_bits(self):
        rng = SplitMix64(1)
        for _ in range(100):
            assert encode_setup_complete(random_fields(rng)).bit_len == 208

    def test_roundtrip_1000_random_field_sets(self):
        rng = SplitMix64(42)
        for _ in range(1000):
            fields = random_fields(rng)
            assert decode_setup_complete(encode_setup_complete(fields)) == fields

    def test_decode_default_hex(self):
        assert decode_setup_complete(Frame(bytes.fromhex(DEFAULT_HEX))) \
            == SetupCompleteFields()

    def test_decode_is_validation_free(self):
        frame = default_frame().flip_bits({0})
        fields = decode_setup_complete(frame)
        assert fields.msg_type == 0xC3

    def test_decode_wrong_length(self):
        with pytest.raises(WrongLength):
            decode_setup_complete(Frame(b"\x00" * 25))


class TestBitAddressing:
    def test_msb_first(self):
        frame = Frame(b"\x80" + b"\x00" * 25)
        assert frame.bit(0) == 1
        assert frame.bit(1) == 0
        assert Frame(b"\x01" + b"\x00" * 25).bit(7) == 1

    def test_flip_is_involution(self):
        frame = default_frame()
        bits = {0, 17, 205}
        assert frame.flip_bits(bits).flip_bits(bits) == frame

    def test_flip_out_of_range(self):
        with pytest.raises(IndexError):
            default_frame().flip_bits({208})


class TestValidation:
    def test_default_accepted(self):
        verdict = validate_setup_complete(default_frame(), RanConfig())
        assert verdict.accepted and verdict.cause is None

    def test_bit0_flip_bad_msg_type(self):
        verdict = validate_setup_complete(default_frame().flip_bits({0}),
                                          RanConfig())
        assert verdict.cause is RejectCause.BAD_MSG_TYPE

    def test_bit32_flip_unknown_subscriber(self):
        verdict = validate_setup_complete(default_frame().flip_bits({32}),
                                          RanConfig())
        assert verdict.cause is RejectCause.UNKNOWN_SUBSCRIBER

    def test_rule_order_earliest_wins(self):
        # Violates msg_type, suci, and nas rules at once.
        frame = default_frame().flip_bits({0, 32, 112})
        verdict = validate_setup_complete(frame, RanConfig())
        assert verdict.cause is RejectCause.BAD_MSG_TYPE
        # Drop the msg_type violation: suci rule is next to fire.
        frame = default_frame().flip_bits({32, 112})
        assert validate_setup_complete(frame, RanConfig()).cause \
            is RejectCause.UNKNOWN_SUBSCRIBER

    def test_validation_is_pure(self):
        frame = default_frame().flip_bits({99})
        config = RanConfig()
        assert validate_setup_complete(frame, config) \
            == validate_setup_complete(frame, config)

    @pytest.mark.parametrize("bit,cause", [
        (8, RejectCause.BAD_TRANSACTION_ID),
        (12, RejectCause.BAD_PLMN),
        (16, RejectCause.BAD_CAUSE),
        (24, RejectCause.BAD_REGISTRATION_TYPE),
        (99, RejectCause.NO_SECURITY_ALGO),
        (112, RejectCause.BAD_NAS_TYPE),
        (159, RejectCause.BAD_SLICE),
        (192, RejectCause.BAD_LENGTH),
    ])
    def test_rule_causes(self, bit, cause):
        verdict = validate_setup_complete(default_frame().flip_bits({bit}),
                                          RanConfig())
        assert verdict.cause is cause

    def test_ignored_fields_tolerate_any_flip(self):
        ignored = list(range(104, 112)) + list(range(120, 128)) \
            + list(range(160, 192))
        for bit in ignored:
            verdict = validate_setup_complete(
                default_frame().flip_bits({bit}), RanConfig())
            assert verdict.accepted, f"bit {bit}"


class TestRanConfig:
    def test_rejects_empty_sets(self):
        with pytest.raises(ValueError):
            RanConfig(valid_causes=frozenset())

    def test_rejects_plmn_count_out_of_range(self):
        with pytest.raises(ValueError):
            RanConfig(plmn_count=0)
        with pytest.raises(ValueError):
            RanConfig(plmn_count=17)


class TestKeystream:
    def test_disabled_is_identity(self):
        frame = default_frame()
        assert keystream_apply(frame, 0xDEAD, False) == frame

    def test_double_apply_restores(self):
        frame = default_frame()
        key = 0x1234567890ABCDEF
        assert keystream_apply(keystream_apply(frame, key, True), key, True) \
            == frame

    def test_cipher_commutes_with_every_single_bit_flip(self):
        frame = default_frame()
        key = 0xFEEDFACE
        for b in range(FRAME_BITS):
            lhs = keystream_apply(frame.flip_bits({b}), key, True)
            rhs = keystream_apply(frame, key, True).flip_bits({b})
            assert lhs == rhs

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
    @settings(max_examples=50)
    def test_length_preserved_and_involutive(self, key, suci):
        frame = encode_setup_complete(SetupCompleteFields(suci=suci))
        enc = keystream_apply(frame, key, True)
        assert len(enc.data) == FRAME_LEN
        assert keystream_apply(enc, key, True) == frame


class TestFieldNames:
    def test_known_bits(self):
        assert field_name_for_bit(0) == "msg_type"
        assert field_name_for_bit(8) == "tid"
        assert field_name_for_bit(12) == "plmn_index"
        assert field_name_for_bit(32) == "suci"
        assert field_name_for_bit(104) == "sec_caps"
        assert field_name_for_bit(207) == "length"

    def test_every_bit_named(self):
        for b in range(FRAME_BITS):
            assert field_name_for_bit(b)
        with pytest.raises(IndexError):
            field_name_for_bit(208)
