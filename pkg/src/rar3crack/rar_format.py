"""RAR3-style container parsing and synthetic fixture building.

Layout handled here: 7-byte marker, 13-byte main header (crc16, type
0x73, flags, size, 6 reserved bytes), 8-byte salt when the password flag
(0x0080) is set, then the encrypted file-header blob. Only the pieces a
password cracker needs are modelled; compression, volumes and file data
are out of scope.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from . import aes, kdf

MARKER = b"Rar!\x1a\x07\x00"
MAIN_HEADER_TYPE = 0x73
PASSWORD_FLAG = 0x0080
MAIN_HEADER_LEN = 13
SALT_LEN = 8
#: Verification never needs more ciphertext than this; longer blobs are cut.
MAX_ENCRYPTED_HEADER = 1024


class ArchiveFormatError(ValueError):
    """Input bytes do not form a parseable encrypted archive."""


class TruncatedArchiveError(ArchiveFormatError):
    """Input ended before a required field."""


class NotEncryptedError(ArchiveFormatError):
    """Main header present but the password flag is clear."""


class CorruptHeaderError(ArchiveFormatError):
    """Main header structure or checksum is wrong."""


@dataclass(frozen=True)
class ArchiveInfo:
    """Salt plus encrypted file-header blob: the cracker's fixed input."""

    salt: bytes
    encrypted_header: bytes

    def __post_init__(self):
        if len(self.salt) != SALT_LEN:
            raise ValueError(f"salt must be {SALT_LEN} bytes, got {len(self.salt)}")
        n = len(self.encrypted_header)
        if n == 0 or n % 16 or n > MAX_ENCRYPTED_HEADER:
            raise ValueError(
                f"encrypted header length {n} not a positive multiple of 16 "
                f"within {MAX_ENCRYPTED_HEADER}"
            )


@dataclass(frozen=True)
class MainHeader:
    head_crc: int
    head_type: int
    head_flags: int
    head_size: int

    def pack(self) -> bytes:
        return struct.pack(
            "<HBHH6x", self.head_crc, self.head_type, self.head_flags, self.head_size
        )

    @classmethod
    def parse(cls, raw: bytes) -> "MainHeader":
        crc, typ, flags, size = struct.unpack_from("<HBHH", raw)
        return cls(head_crc=crc, head_type=typ, head_flags=flags, head_size=size)


@dataclass(frozen=True)
class FixtureRecipe:
    """Forward-path inputs for a self-contained test archive."""

    password: str
    salt: bytes
    header_payload: bytes


def validate_marker(data: bytes) -> bool:
    """True iff the input starts with the 7-byte marker signature."""
    if len(data) < len(MARKER):
        raise TruncatedArchiveError(f"need {len(MARKER)} bytes for the marker, got {len(data)}")
    return data[: len(MARKER)] == MARKER


def parse_archive(data: bytes) -> ArchiveInfo:
    """Extract the salt and the encrypted file-header blob.

    The blob is cut to at most 1024 bytes and rounded down to whole
    16-byte blocks; verification never reads further.
    """
    if not validate_marker(data):
        raise CorruptHeaderError("marker block mismatch: not a supported archive")
    if len(data) < len(MARKER) + MAIN_HEADER_LEN:
        raise TruncatedArchiveError("input ends inside the main header")
    raw = data[len(MARKER) : len(MARKER) + MAIN_HEADER_LEN]
    mh = MainHeader.parse(raw)
    if mh.head_type != MAIN_HEADER_TYPE:
        raise CorruptHeaderError(f"main header type 0x{mh.head_type:02x}, expected 0x73")
    if zlib.crc32(raw[2:]) & 0xFFFF != mh.head_crc:
        raise CorruptHeaderError("main header checksum mismatch")
    if not mh.head_flags & PASSWORD_FLAG:
        raise NotEncryptedError("password flag clear: archive headers are not encrypted")
    rest = data[len(MARKER) + MAIN_HEADER_LEN :]
    if len(rest) < SALT_LEN:
        raise TruncatedArchiveError(f"need {SALT_LEN} salt bytes, got {len(rest)}")
    salt = rest[:SALT_LEN]
    blob = rest[SALT_LEN : SALT_LEN + MAX_ENCRYPTED_HEADER]
    blob = blob[: len(blob) - len(blob) % 16]
    if not blob:
        raise TruncatedArchiveError("no complete ciphertext block after the salt")
    return ArchiveInfo(salt=salt, encrypted_header=blob)


def build_header_payload(body: bytes = b"fixture body bytes", *, head_type: int = 0x74,
                         flags: int = 0x8000) -> bytes:
    """A plaintext file header with a valid embedded checksum.

    Layout: crc16 | type | flags16 | size16 | body, with the checksum
    covering everything from the type byte to the end (low 16 bits of
    CRC-32), which is what the verifier recomputes.
    """
    size = 7 + len(body)
    if size > 0xFFFF:
        raise ValueError("header payload too long for a 16-bit size field")
    covered = struct.pack("<BHH", head_type, flags, size) + body
    crc = zlib.crc32(covered) & 0xFFFF
    return struct.pack("<H", crc) + covered


def build_fixture(recipe: FixtureRecipe) -> bytes:
    """Emit a complete archive encrypted under the recipe's password.

    Round-trip guarantee: parse_archive finds the recipe's salt, and the
    derived key of the correct password decrypts back to the (zero-padded)
    header payload.
    """
    if len(recipe.salt) != SALT_LEN:
        raise ValueError(f"salt must be {SALT_LEN} bytes, got {len(recipe.salt)}")
    payload = recipe.header_payload
    if not payload:
        raise ValueError("header payload must not be empty")
    padded = payload + bytes(-len(payload) % 16)
    if len(padded) > MAX_ENCRYPTED_HEADER:
        raise ValueError(f"padded payload {len(padded)} exceeds {MAX_ENCRYPTED_HEADER} bytes")
    dk = kdf.derive_key(recipe.password, recipe.salt)
    ciphertext = aes.cbc_encrypt(padded, dk.key, dk.iv)
    mh_tail = struct.pack("<BHH6x", MAIN_HEADER_TYPE, PASSWORD_FLAG, MAIN_HEADER_LEN)
    crc = zlib.crc32(mh_tail) & 0xFFFF
    return MARKER + struct.pack("<H", crc) + mh_tail + recipe.salt + ciphertext
