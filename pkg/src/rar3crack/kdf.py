"""Iterated-SHA-1 key derivation for RAR3-style archives.

The derivation absorbs 262,144 repetitions of a short "little block"
(UTF-16LE password, 8-byte salt, 3-byte unit counter) into one running
SHA-1 state and emits a 16-byte AES key plus a 16-byte CBC IV. Two
equivalent paths are provided:

* ``derive_key_naive`` walks the units one by one, re-serializing the
  counter bytes for every unit of every candidate, exactly like the
  classic straight-line routine.
* ``derive_key_optimized`` trades space for time: the counter bytes of
  all units are precomputed once per unit length into a ``CounterTable``
  that every candidate shares, a per-candidate ``PatternBuffer`` holds
  the password/salt bytes with zeros in the counter positions, and the
  full stream is produced by a single word-wide OR of the two, with no
  per-byte bookkeeping.

Published descriptions of the RAR3 key setup disagree on when the IV
byte is sampled (before a segment, right after its first unit, or after
the whole segment). This module follows the de-facto routine used by
real unpackers: the byte is read immediately after the first unit of
each segment, from digest byte 19 (the low byte of the fifth hash word).
Both knobs are single named constants below.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MIN_PASSWORD_LEN = 1
MAX_PASSWORD_LEN = 25

#: Little blocks absorbed per derivation (0x40000).
TOTAL_UNITS = 262144
#: Little blocks per IV byte; 16 segments make the 16-byte IV.
UNITS_PER_IV_BYTE = 16384

#: The IV byte for segment i is sampled once this many units of the
#: segment have been absorbed. The de-facto routine samples right after
#: the segment's first unit (1); UNITS_PER_IV_BYTE would sample after
#: the whole segment instead.
IV_SAMPLE_OFFSET_UNITS = 1
#: Position of the IV byte within the standard 20-byte digest: the low
#: byte of the h4 word.
IV_DIGEST_BYTE = 19

_SHA1_INIT = (0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0)
_MASK = 0xFFFFFFFF


def utf16le_encode(password: str) -> bytes:
    """Encode a password as UTF-16LE, two bytes per character, low byte first.

    Only basic-plane code points are supported (one 16-bit unit each) and
    the length must be 1..25 characters.
    """
    if not MIN_PASSWORD_LEN <= len(password) <= MAX_PASSWORD_LEN:
        raise ValueError(
            f"password length {len(password)} outside supported range "
            f"[{MIN_PASSWORD_LEN}, {MAX_PASSWORD_LEN}]"
        )
    for ch in password:
        cp = ord(ch)
        if cp > 0xFFFF or 0xD800 <= cp <= 0xDFFF:
            raise ValueError(f"unsupported character {ch!r}: not a basic-plane code point")
    return password.encode("utf-16-le")


class Sha1State:
    """Streaming SHA-1 (FIPS 180-1) with an observable running state.

    ``digest()`` is pure: it pads and compresses a clone, so the running
    state can keep absorbing afterwards. ``blocks`` counts compressions
    applied to this state's own stream, which is what the derivation
    block-count law is asserted against.
    """

    __slots__ = ("h0", "h1", "h2", "h3", "h4", "data", "byte_count", "blocks")

    def __init__(self):
        self.h0, self.h1, self.h2, self.h3, self.h4 = _SHA1_INIT
        self.data = bytearray()  # 0..63 pending bytes
        self.byte_count = 0
        self.blocks = 0

    def copy(self) -> Sha1State:
        c = Sha1State.__new__(Sha1State)
        c.h0, c.h1, c.h2, c.h3, c.h4 = self.h0, self.h1, self.h2, self.h3, self.h4
        c.data = bytearray(self.data)
        c.byte_count = self.byte_count
        c.blocks = self.blocks
        return c

    def _compress(self, block: bytes) -> None:
        w = list(struct.unpack(">16I", block))
        for i in range(16, 80):
            x = w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16]
            w.append(((x << 1) | (x >> 31)) & _MASK)
        a, b, c, d, e = self.h0, self.h1, self.h2, self.h3, self.h4
        for i in range(0, 20):
            t = (((a << 5) | (a >> 27)) + ((b & c) | (~b & d)) + e + 0x5A827999 + w[i]) & _MASK
            a, b, c, d, e = t, a, ((b << 30) | (b >> 2)) & _MASK, c, d
        for i in range(20, 40):
            t = (((a << 5) | (a >> 27)) + (b ^ c ^ d) + e + 0x6ED9EBA1 + w[i]) & _MASK
            a, b, c, d, e = t, a, ((b << 30) | (b >> 2)) & _MASK, c, d
        for i in range(40, 60):
            t = (((a << 5) | (a >> 27)) + ((b & c) | (b & d) | (c & d)) + e + 0x8F1BBCDC + w[i]) & _MASK
            a, b, c, d, e = t, a, ((b << 30) | (b >> 2)) & _MASK, c, d
        for i in range(60, 80):
            t = (((a << 5) | (a >> 27)) + (b ^ c ^ d) + e + 0xCA62C1D6 + w[i]) & _MASK
            a, b, c, d, e = t, a, ((b << 30) | (b >> 2)) & _MASK, c, d
        self.h0 = (self.h0 + a) & _MASK
        self.h1 = (self.h1 + b) & _MASK
        self.h2 = (self.h2 + c) & _MASK
        self.h3 = (self.h3 + d) & _MASK
        self.h4 = (self.h4 + e) & _MASK
        self.blocks += 1

    def update(self, data) -> None:
        data = bytes(data)
        self.byte_count += len(data)
        buf = self.data
        if buf:
            need = 64 - len(buf)
            buf += data[:need]
            if len(buf) < 64:
                return
            self._compress(bytes(buf))
            buf.clear()
            data = data[need:]
        full = len(data) - (len(data) % 64)
        for off in range(0, full, 64):
            self._compress(data[off : off + 64])
        if full < len(data):
            buf += data[full:]

    def digest(self) -> bytes:
        """Digest of all bytes absorbed so far; the running state is unchanged."""
        c = self.copy()
        pad = b"\x80" + bytes((119 - c.byte_count % 64) % 64)
        c.update(pad + struct.pack(">Q", self.byte_count * 8))
        return struct.pack(">5I", c.h0, c.h1, c.h2, c.h3, c.h4)

    def hexdigest(self) -> str:
        return self.digest().hex()


def sha1_block(state: Sha1State, block) -> Sha1State:
    """Apply one standard SHA-1 compression of an exact 64-byte block."""
    if len(block) != 64:
        raise ValueError(f"sha1_block needs exactly 64 bytes, got {len(block)}")
    if state.data:
        raise ValueError("state has pending buffered bytes; feed them first")
    state._compress(bytes(block))
    state.byte_count += 64
    return state


def partial_digest(state: Sha1State) -> bytes:
    """Digest of everything absorbed so far; the input state is untouched."""
    return state.digest()


class _FastSha1:
    """hashlib-backed drop-in for Sha1State's update/digest/blocks surface.

    The stdlib compression is what the heavy derivation paths run on;
    ``blocks`` tracks the 64-byte boundaries the absorbed stream crossed,
    i.e. the compressions the backend performed for it.
    """

    __slots__ = ("_h", "_absorbed")

    def __init__(self):
        self._h = hashlib.sha1()
        self._absorbed = 0

    def update(self, data) -> None:
        self._h.update(data)
        self._absorbed += getattr(data, "nbytes", None) or len(data)

    def digest(self) -> bytes:
        return self._h.digest()

    @property
    def byte_count(self) -> int:
        return self._absorbed

    @property
    def blocks(self) -> int:
        return self._absorbed // 64


@dataclass(frozen=True)
class KdfLayout:
    """Geometry of the derivation stream for one password length."""

    password_len: int

    def __post_init__(self):
        if not MIN_PASSWORD_LEN <= self.password_len <= MAX_PASSWORD_LEN:
            raise ValueError(f"password_len {self.password_len} outside [1, 25]")

    @property
    def unit_len(self) -> int:
        # wide password + 8 salt bytes + 3 counter bytes
        return self.password_len * 2 + 8 + 3

    @property
    def total_units(self) -> int:
        return TOTAL_UNITS

    @property
    def units_per_iv_byte(self) -> int:
        return UNITS_PER_IV_BYTE

    @property
    def stream_bytes(self) -> int:
        return TOTAL_UNITS * self.unit_len


@dataclass(frozen=True)
class LittleBlock:
    """One repetition unit of the stream: wide password, salt, 3-byte counter."""

    utf16_password: bytes
    salt: bytes
    index: int

    def to_bytes(self) -> bytes:
        if not 0 <= self.index < TOTAL_UNITS:
            raise ValueError(f"unit index {self.index} outside [0, {TOTAL_UNITS})")
        return self.utf16_password + self.salt + self.index.to_bytes(3, "little")


@dataclass(frozen=True)
class DerivedKey:
    """AES-128 key and CBC IV produced by the derivation."""

    key: bytes
    iv: bytes


@dataclass(frozen=True)
class CounterTable:
    """Precomputed counter bytes for every unit, shared by all candidates.

    ``table`` is (TOTAL_UNITS, unit_len) uint8: row u holds u's three
    counter bytes (least-significant first) in the last three columns and
    zeros everywhere the password/salt pattern will sit. ``words`` views
    the same memory as rows of unit_len uint32 words, each row spanning
    four consecutive units, ready for the word-wide OR. Both views are
    read-only.
    """

    layout: KdfLayout
    table: np.ndarray
    words: np.ndarray

    def row(self, unit: int) -> np.ndarray:
        return self.table[unit]


def build_counter_table(layout: KdfLayout) -> CounterTable:
    ul = layout.unit_len
    flat = np.zeros(TOTAL_UNITS * ul, dtype=np.uint8)
    table = flat.reshape(TOTAL_UNITS, ul)
    u = np.arange(TOTAL_UNITS, dtype=np.uint32)
    table[:, ul - 3] = (u & 0xFF).astype(np.uint8)
    table[:, ul - 2] = ((u >> 8) & 0xFF).astype(np.uint8)
    table[:, ul - 1] = ((u >> 16) & 0xFF).astype(np.uint8)
    flat.flags.writeable = False
    # TOTAL_UNITS is a multiple of 4, so the uint32 view tiles exactly:
    # one row of unit_len words covers four units.
    words = flat.view(np.uint32).reshape(TOTAL_UNITS // 4, ul)
    return CounterTable(layout=layout, table=flat.reshape(TOTAL_UNITS, ul), words=words)


@lru_cache(maxsize=None)
def shared_counter_table(password_len: int) -> CounterTable:
    """Process-wide read-only table cache, one entry per password length."""
    return build_counter_table(KdfLayout(password_len))


@dataclass(frozen=True)
class PatternBuffer:
    """Per-candidate password/salt bytes with zeroed counter positions.

    ``pattern`` is the unit_len-byte template; ``expanded`` is the same
    template repeated over four consecutive unit phases and viewed as
    unit_len uint32 words, so OR-ing it against a CounterTable word row
    assigns four stream bytes at a time.
    """

    layout: KdfLayout
    pattern: np.ndarray
    expanded: np.ndarray


def build_pattern(password: str, salt: bytes) -> PatternBuffer:
    if len(salt) != 8:
        raise ValueError(f"salt must be exactly 8 bytes, got {len(salt)}")
    encoded = utf16le_encode(password)
    layout = KdfLayout(len(password))
    pattern = np.zeros(layout.unit_len, dtype=np.uint8)
    pattern[: len(encoded)] = np.frombuffer(encoded, dtype=np.uint8)
    pattern[len(encoded) : len(encoded) + 8] = np.frombuffer(salt, dtype=np.uint8)
    # trailing 3 counter positions stay zero
    pattern.flags.writeable = False
    expanded = np.tile(pattern, 4)
    expanded.flags.writeable = False
    return PatternBuffer(layout=layout, pattern=pattern, expanded=expanded.view(np.uint32))


def _serialize_key(digest20: bytes) -> bytes:
    # first four digest words, each emitted low byte first
    return struct.pack("<4I", *struct.unpack(">4I", digest20[:16]))


def derive_key_naive(password: str, salt: bytes, *, sha1_factory=None) -> DerivedKey:
    """Straight-line derivation: one running hash, counters serialized per unit."""
    if len(salt) != 8:
        raise ValueError(f"salt must be exactly 8 bytes, got {len(salt)}")
    seed = utf16le_encode(password) + salt
    # plain hashlib unless the caller wants an instrumented state
    h = sha1_factory() if sha1_factory else hashlib.sha1()
    update, digest = h.update, h.digest
    sample_rem = IV_SAMPLE_OFFSET_UNITS - 1
    iv = bytearray()
    for unit in range(TOTAL_UNITS):
        update(seed + unit.to_bytes(3, "little"))
        if unit % UNITS_PER_IV_BYTE == sample_rem:
            iv.append(digest()[IV_DIGEST_BYTE])
    return DerivedKey(key=_serialize_key(digest()), iv=bytes(iv))


def derive_key_optimized(
    pattern: PatternBuffer,
    table: CounterTable,
    *,
    sha1_factory=None,
    work: np.ndarray | None = None,
) -> DerivedKey:
    """Table-driven derivation: whole stream assembled by one word-wide OR.

    Produces byte-identical output to ``derive_key_naive`` for the same
    password and salt. ``work`` may supply a reusable output buffer shaped
    like ``table.words`` to avoid a per-candidate allocation.
    """
    if pattern.layout != table.layout:
        raise ValueError(
            f"layout mismatch: pattern unit_len {pattern.layout.unit_len}, "
            f"table unit_len {table.layout.unit_len}"
        )
    words = table.words
    if work is None or work.shape != words.shape or work.dtype != words.dtype:
        work = np.empty_like(words)
    np.bitwise_or(words, pattern.expanded[np.newaxis, :], out=work)
    stream = work.reshape(-1).view(np.uint8)

    ul = table.layout.unit_len
    h = sha1_factory() if sha1_factory else hashlib.sha1()
    iv = bytearray()
    pos = 0
    for segment in range(16):
        sample_at = (segment * UNITS_PER_IV_BYTE + IV_SAMPLE_OFFSET_UNITS) * ul
        h.update(stream[pos:sample_at])
        pos = sample_at
        iv.append(h.digest()[IV_DIGEST_BYTE])
    h.update(stream[pos:])
    return DerivedKey(key=_serialize_key(h.digest()), iv=bytes(iv))


def derive_key(password: str, salt: bytes) -> DerivedKey:
    """Derive with the optimized path and the shared table cache."""
    return derive_key_optimized(build_pattern(password, salt), shared_counter_table(len(password)))
