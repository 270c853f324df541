import struct
import zlib

import pytest

from rar3crack import aes
from rar3crack.kdf import derive_key
from rar3crack.rar_format import (
    MARKER,
    ArchiveInfo,
    CorruptHeaderError,
    FixtureRecipe,
    MainHeader,
    NotEncryptedError,
    TruncatedArchiveError,
    build_fixture,
    build_header_payload,
    parse_archive,
    validate_marker,
)
from rar3crack.verifier import verify_candidate

from conftest import STD_SALT


def fixture_bytes(password="abcd", salt=STD_SALT, payload=None):
    if payload is None:
        payload = build_header_payload()
    return build_fixture(FixtureRecipe(password=password, salt=salt, header_payload=payload))


def main_header_bytes(flags=0x0080, head_type=0x73, size=13, crc=None):
    tail = struct.pack("<BHH6x", head_type, flags, size)
    if crc is None:
        crc = zlib.crc32(tail) & 0xFFFF
    return struct.pack("<H", crc) + tail


class TestValidateMarker:
    def test_exact_signature(self):
        assert validate_marker(MARKER + b"anything") is True

    def test_zip_signature_rejected(self):
        assert validate_marker(b"PK\x03\x04" + bytes(16)) is False

    def test_short_input_is_error(self):
        with pytest.raises(TruncatedArchiveError):
            validate_marker(MARKER[:6])


class TestParseArchive:
    def test_round_trip(self):
        data = fixture_bytes()
        info = parse_archive(data)
        assert info.salt == STD_SALT
        payload = build_header_payload()
        assert len(info.encrypted_header) == len(payload) + (-len(payload) % 16)

    def test_password_flag_clear(self):
        data = MARKER + main_header_bytes(flags=0x0000) + bytes(32)
        with pytest.raises(NotEncryptedError):
            parse_archive(data)

    def test_seven_trailing_bytes(self):
        data = MARKER + main_header_bytes() + bytes(7)
        with pytest.raises(TruncatedArchiveError):
            parse_archive(data)

    def test_no_complete_block_after_salt(self):
        data = MARKER + main_header_bytes() + bytes(8) + bytes(15)
        with pytest.raises(TruncatedArchiveError):
            parse_archive(data)

    def test_main_header_crc_mismatch(self):
        data = MARKER + main_header_bytes(crc=0xBEEF) + bytes(32)
        with pytest.raises(CorruptHeaderError):
            parse_archive(data)

    def test_wrong_main_header_type(self):
        data = MARKER + main_header_bytes(head_type=0x72) + bytes(32)
        with pytest.raises(CorruptHeaderError):
            parse_archive(data)

    def test_bad_marker(self):
        with pytest.raises(CorruptHeaderError):
            parse_archive(b"PK\x03\x04" + bytes(40))

    def test_truncated_main_header(self):
        with pytest.raises(TruncatedArchiveError):
            parse_archive(MARKER + bytes(5))

    def test_blob_capped_at_1024_and_block_rounded(self):
        data = fixture_bytes() + bytes(1500)
        info = parse_archive(data)
        assert len(info.encrypted_header) == 1024
        data = fixture_bytes() + bytes(5)  # partial trailing block is dropped
        info = parse_archive(data)
        assert len(info.encrypted_header) == 32

    def test_never_reads_past_declared_blob(self):
        # identical prefix, different trailing garbage: same parse result
        a = parse_archive(fixture_bytes() + bytes(1500))
        b = parse_archive(fixture_bytes() + bytes([0xFF]) * 1500)
        assert a.encrypted_header[:32] == b.encrypted_header[:32]
        assert len(a.encrypted_header) == len(b.encrypted_header) == 1024


class TestArchiveInfo:
    def test_salt_length_enforced(self):
        with pytest.raises(ValueError):
            ArchiveInfo(salt=bytes(7), encrypted_header=bytes(16))

    @pytest.mark.parametrize("n", [0, 15, 17, 1040])
    def test_blob_length_enforced(self, n):
        with pytest.raises(ValueError):
            ArchiveInfo(salt=bytes(8), encrypted_header=bytes(n))

    def test_valid_bounds(self):
        ArchiveInfo(salt=bytes(8), encrypted_header=bytes(16))
        ArchiveInfo(salt=bytes(8), encrypted_header=bytes(1024))


class TestBuildFixture:
    def test_end_to_end_dictionary_crack(self):
        # the canonical round trip: built archive is recovered by its password
        info = parse_archive(fixture_bytes(password="abcd", salt=bytes(8)))
        assert verify_candidate(derive_key("abcd", bytes(8)), info) is True
        assert verify_candidate(derive_key("nope", bytes(8)), info) is False

    def test_negative_control_payload(self):
        payload = bytearray(build_header_payload())
        payload[0] ^= 0x01
        info = parse_archive(fixture_bytes(payload=bytes(payload)))
        assert verify_candidate(derive_key("abcd", STD_SALT), info) is False

    def test_salt_changes_ciphertext(self):
        a = fixture_bytes(salt=bytes(8))
        b = fixture_bytes(salt=bytes(7) + b"\x01")
        assert parse_archive(a).encrypted_header != parse_archive(b).encrypted_header

    def test_decryption_reproduces_payload_exactly_when_aligned(self):
        payload = build_header_payload(body=b"x" * 25)  # 32 bytes, already aligned
        assert len(payload) % 16 == 0
        info = parse_archive(fixture_bytes(payload=payload))
        dk = derive_key("abcd", STD_SALT)
        assert aes.cbc_decrypt(info.encrypted_header, dk.key, dk.iv) == payload

    def test_decryption_reproduces_unaligned_payload_as_prefix(self):
        payload = build_header_payload(body=b"y" * 10)
        info = parse_archive(fixture_bytes(payload=payload))
        dk = derive_key("abcd", STD_SALT)
        plain = aes.cbc_decrypt(info.encrypted_header, dk.key, dk.iv)
        assert plain[: len(payload)] == payload
        assert plain[len(payload) :] == bytes(len(plain) - len(payload))

    def test_password_length_range_enforced(self):
        with pytest.raises(ValueError):
            fixture_bytes(password="a" * 26)

    def test_payload_required_and_capped(self):
        with pytest.raises(ValueError):
            fixture_bytes(payload=b"")
        with pytest.raises(ValueError):
            fixture_bytes(payload=bytes(1025))

    def test_salt_length_enforced(self):
        with pytest.raises(ValueError):
            fixture_bytes(salt=bytes(9))


class TestHeaderPayloadBuilder:
    def test_embedded_checksum_matches_rule(self):
        payload = build_header_payload(body=b"data")
        stored = int.from_bytes(payload[:2], "little")
        head_size = int.from_bytes(payload[5:7], "little")
        assert head_size == 11
        assert zlib.crc32(payload[2:head_size]) & 0xFFFF == stored

    def test_main_header_struct_round_trip(self):
        mh = MainHeader(head_crc=0x1234, head_type=0x73, head_flags=0x0080, head_size=13)
        assert MainHeader.parse(mh.pack()) == mh
