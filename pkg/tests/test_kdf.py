import hashlib
import random
import struct

import numpy as np
import pytest

from rar3crack import kdf
from rar3crack.kdf import (
    IV_DIGEST_BYTE,
    IV_SAMPLE_OFFSET_UNITS,
    TOTAL_UNITS,
    UNITS_PER_IV_BYTE,
    KdfLayout,
    LittleBlock,
    Sha1State,
    build_counter_table,
    build_pattern,
    derive_key_naive,
    derive_key_optimized,
    partial_digest,
    sha1_block,
    shared_counter_table,
    utf16le_encode,
)

import oracles

SALT = bytes(range(8))


class TestUtf16leEncode:
    def test_ascii_widening(self):
        assert utf16le_encode("abcd") == bytes.fromhex("6100620063006400")

    def test_single_char(self):
        assert utf16le_encode("A") == b"\x41\x00"

    def test_bmp_char(self):
        assert utf16le_encode("π") == b"\xc0\x03"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            utf16le_encode("")

    def test_too_long_rejected(self):
        with pytest.raises(ValueError):
            utf16le_encode("a" * 26)

    def test_max_length_accepted(self):
        assert len(utf16le_encode("a" * 25)) == 50

    def test_non_bmp_rejected(self):
        with pytest.raises(ValueError):
            utf16le_encode("\U0001f600")

    def test_surrogate_rejected(self):
        with pytest.raises(ValueError):
            utf16le_encode("\ud800")


class TestSha1State:
    def test_empty_vector(self):
        assert Sha1State().digest() == oracles.SHA1_EMPTY

    def test_abc_vector(self):
        s = Sha1State()
        s.update(b"abc")
        assert s.digest() == oracles.SHA1_ABC

    def test_matches_hashlib_on_random_chunking(self):
        rng = random.Random(7)
        msg = rng.randbytes(5000)
        s = Sha1State()
        pos = 0
        while pos < len(msg):
            step = rng.randint(1, 200)
            s.update(msg[pos : pos + step])
            pos += step
        assert s.digest() == hashlib.sha1(msg).digest()
        assert s.byte_count == len(msg)

    def test_sha1_block_single_padded_block(self):
        # manually padded one-block message "abc"
        block = b"abc" + b"\x80" + bytes(52) + struct.pack(">Q", 24)
        s = sha1_block(Sha1State(), block)
        assert struct.pack(">5I", s.h0, s.h1, s.h2, s.h3, s.h4) == oracles.SHA1_ABC

    def test_sha1_block_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            sha1_block(Sha1State(), bytes(63))

    def test_sha1_block_counts_compressions(self):
        s = Sha1State()
        sha1_block(s, bytes(64))
        sha1_block(s, bytes(range(64)))
        assert s.blocks == 2

    def test_different_blocks_give_different_states(self):
        a = sha1_block(Sha1State(), bytes(64))
        b = sha1_block(Sha1State(), bytes(range(64)))
        assert (a.h0, a.h1, a.h2, a.h3, a.h4) != (b.h0, b.h1, b.h2, b.h3, b.h4)

    def test_partial_digest_is_pure(self):
        s = Sha1State()
        s.update(b"abc")
        first = partial_digest(s)
        second = partial_digest(s)
        assert first == second == oracles.SHA1_ABC

    def test_absorb_after_peek_equals_absorb_without_peek(self):
        rng = random.Random(11)
        msg1, msg2 = rng.randbytes(150), rng.randbytes(90)
        peeked = Sha1State()
        peeked.update(msg1)
        partial_digest(peeked)
        peeked.update(msg2)
        straight = Sha1State()
        straight.update(msg1 + msg2)
        assert peeked.digest() == straight.digest()
        # padding compressions happened on the clone, not the running state
        assert peeked.blocks == straight.blocks


class TestLayoutAndLittleBlock:
    @pytest.mark.parametrize("length,unit_len", [(1, 13), (4, 19), (10, 31), (25, 61)])
    def test_unit_len_formula(self, length, unit_len):
        layout = KdfLayout(length)
        assert layout.unit_len == unit_len
        assert layout.total_units == 16 * layout.units_per_iv_byte == 262144

    @pytest.mark.parametrize("bad", [0, 26, -3])
    def test_invalid_length_rejected(self, bad):
        with pytest.raises(ValueError):
            KdfLayout(bad)

    def test_little_block_layout(self):
        lb = LittleBlock(utf16le_encode("abcd"), SALT, 0x010203)
        raw = lb.to_bytes()
        assert len(raw) == 19
        assert raw[:8] == bytes.fromhex("6100620063006400")
        assert raw[8:16] == SALT
        assert raw[16:] == bytes([0x03, 0x02, 0x01])  # least-significant byte first

    def test_little_block_index_range(self):
        with pytest.raises(ValueError):
            LittleBlock(utf16le_encode("a"), SALT, TOTAL_UNITS).to_bytes()


class TestCounterTable:
    def test_table_size_for_len4(self):
        table = build_counter_table(KdfLayout(4))
        assert table.table.size == 4_980_736  # 262144 * 19

    def test_unit_zero_counter_bytes(self):
        table = shared_counter_table(4)
        assert bytes(table.row(0)[-3:]) == b"\x00\x00\x00"

    def test_unit_0x010203_counter_bytes(self):
        table = shared_counter_table(4)
        assert bytes(table.row(0x010203)[-3:]) == bytes([0x03, 0x02, 0x01])

    def test_non_counter_positions_zero(self):
        table = shared_counter_table(1)
        assert not table.table[:, :-3].any()

    def test_read_only_and_cached(self):
        table = shared_counter_table(4)
        assert table is shared_counter_table(4)
        assert not table.table.flags.writeable
        with pytest.raises(ValueError):
            table.table[0, 0] = 1


class TestPatternBuffer:
    def test_direct_construction(self):
        pat = build_pattern("abcd", SALT)
        assert bytes(pat.pattern) == bytes.fromhex("6100620063006400") + SALT + b"\x00\x00\x00"
        assert len(pat.pattern) == 19

    def test_counter_positions_zero(self):
        pat = build_pattern("qwerty", SALT)
        assert bytes(pat.pattern[-3:]) == b"\x00\x00\x00"

    def test_expanded_covers_four_phases(self):
        pat = build_pattern("ab", SALT)
        assert pat.expanded.dtype == np.uint32
        assert pat.expanded.view(np.uint8).tolist() == list(bytes(pat.pattern) * 4)

    def test_or_with_table_row_reproduces_little_block(self):
        rng = random.Random(3)
        pat = build_pattern("abcd", SALT)
        table = shared_counter_table(4)
        for unit in [0, 1, TOTAL_UNITS - 1] + [rng.randrange(TOTAL_UNITS) for _ in range(20)]:
            merged = bytes(np.bitwise_or(table.row(unit), pat.pattern))
            assert merged == LittleBlock(utf16le_encode("abcd"), SALT, unit).to_bytes()

    def test_salt_length_checked(self):
        with pytest.raises(ValueError):
            build_pattern("abcd", bytes(7))


class TestDeriveKey:
    def test_naive_matches_reference(self):
        dk = derive_key_naive("abcd", SALT)
        assert (dk.key, dk.iv) == oracles.rar3_reference_kdf("abcd", SALT)

    def test_naive_deterministic(self):
        assert derive_key_naive("pw", SALT) == derive_key_naive("pw", SALT)

    def test_one_byte_salt_change_changes_key(self):
        other = bytes([SALT[0] ^ 1]) + SALT[1:]
        ref_a = oracles.rar3_reference_kdf("abcd", SALT)
        ref_b = oracles.rar3_reference_kdf("abcd", other)
        assert ref_a != ref_b
        assert (derive_key_naive("abcd", other).key, derive_key_naive("abcd", other).iv) == ref_b

    def test_salt_length_checked(self):
        with pytest.raises(ValueError):
            derive_key_naive("abcd", bytes(9))

    @pytest.mark.parametrize("length", [1, 4, 10, 11, 25])
    def test_optimized_equals_naive_across_lengths(self, length):
        rng = random.Random(1000 + length)
        password = "".join(chr(rng.randrange(33, 127)) for _ in range(length))
        salt = rng.randbytes(8)
        naive = derive_key_naive(password, salt)
        pattern = build_pattern(password, salt)
        optimized = derive_key_optimized(pattern, shared_counter_table(length))
        assert optimized == naive

    def test_optimized_with_all_zero_salt(self):
        naive = derive_key_naive("abcd", bytes(8))
        optimized = derive_key_optimized(build_pattern("abcd", bytes(8)), shared_counter_table(4))
        assert optimized == naive

    def test_optimized_layout_mismatch_rejected(self):
        with pytest.raises(ValueError):
            derive_key_optimized(build_pattern("abc", SALT), shared_counter_table(4))

    def test_optimized_accepts_reusable_work_buffer(self):
        table = shared_counter_table(2)
        work = np.empty_like(table.words)
        a = derive_key_optimized(build_pattern("ab", SALT), table, work=work)
        b = derive_key_optimized(build_pattern("cd", SALT), table, work=work)
        assert a == derive_key_naive("ab", SALT)
        assert b == derive_key_naive("cd", SALT)

    def test_randomized_equivalence_sample(self):
        # quick spot sample; the acceptance suite runs the full 200 cases
        rng = random.Random(42)
        for _ in range(8):
            length = rng.randint(1, 25)
            password = "".join(chr(rng.randrange(0x20, 0x2000)) for _ in range(length))
            salt = rng.randbytes(8)
            naive = derive_key_naive(password, salt)
            optimized = derive_key_optimized(
                build_pattern(password, salt), shared_counter_table(length)
            )
            assert optimized == naive


class TestStreamAndInstrumentation:
    def test_stream_identity_full_length4(self):
        # the OR of pattern and counter table, over all units, is exactly
        # the stream the straight-line routine absorbs
        reference = oracles.rar3_reference_stream("abcd", SALT)
        pat = build_pattern("abcd", SALT)
        table = shared_counter_table(4)
        merged = np.bitwise_or(table.words, pat.expanded[np.newaxis, :])
        assert merged.reshape(-1).view(np.uint8).tobytes() == reference

    def test_block_count_law_fast_backend(self):
        recorded = []

        def factory():
            h = kdf._FastSha1()
            recorded.append(h)
            return h

        derive_key_naive("abcd", SALT, sha1_factory=factory)
        assert recorded[0].blocks == 4096 * 19
        recorded.clear()
        derive_key_optimized(
            build_pattern("abcd", SALT), shared_counter_table(4), sha1_factory=factory
        )
        assert recorded[0].blocks == 4096 * 19

    @pytest.mark.slow
    def test_block_count_law_true_compression_count(self):
        # pure state: every compression is an actual sha1_block call
        recorded = []

        def factory():
            s = Sha1State()
            recorded.append(s)
            return s

        dk = derive_key_naive("a", SALT, sha1_factory=factory)
        assert recorded[0].blocks == 4096 * 13
        assert dk == derive_key_naive("a", SALT)  # backends agree

    def test_iv_sample_points(self):
        # iv[i] is the digest byte right after the first unit of segment i
        dk = derive_key_naive("ab", SALT)
        stream = oracles.rar3_reference_stream("ab", SALT)
        unit_len = KdfLayout(2).unit_len
        for segment in (0, 7, 15):
            cut = (segment * UNITS_PER_IV_BYTE + IV_SAMPLE_OFFSET_UNITS) * unit_len
            expected = hashlib.sha1(stream[:cut]).digest()[IV_DIGEST_BYTE]
            assert dk.iv[segment] == expected

    def test_key_serialization_is_per_word_little_endian(self):
        dk = derive_key_naive("ab", SALT)
        stream = oracles.rar3_reference_stream("ab", SALT)
        digest = hashlib.sha1(stream).digest()
        assert dk.key == struct.pack("<4I", *struct.unpack(">4I", digest[:16]))
