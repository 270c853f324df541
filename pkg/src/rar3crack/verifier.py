"""Candidate verification: AES-CBC header decryption plus CRC check.

A candidate key is accepted when the decrypted leading file header looks
structurally sane (type byte, size bounds) and its stored 16-bit checksum
matches the low 16 bits of CRC-32 over the covered bytes. The structural
checks go beyond a bare checksum comparison; they push the false-accept
rate well below 2**-16 per wrong key.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

from . import aes
from .kdf import DerivedKey
from .rar_format import ArchiveInfo

FILE_HEADER_TYPE = 0x74
MIN_HEADER_SIZE = 7


@dataclass(frozen=True)
class RoundKeys:
    """Expanded AES-128 key schedule; round 0 equals the cipher key."""

    rounds: tuple[bytes, ...]

    def __post_init__(self):
        if len(self.rounds) != 11 or any(len(r) != 16 for r in self.rounds):
            raise ValueError("round keys must be 11 x 16 bytes")


def expand_round_keys(key: bytes) -> RoundKeys:
    return RoundKeys(tuple(aes.expand_key(key)))


def aes128_decrypt_block(block: bytes, rk: RoundKeys) -> bytes:
    """Standard AES-128 inverse cipher on one 16-byte block."""
    return aes.decrypt_block(block, list(rk.rounds))


def cbc_decrypt(ciphertext: bytes, dk: DerivedKey) -> bytes:
    """CBC-decrypt: block 0 XORs the IV, block i XORs ciphertext block i-1."""
    return aes.cbc_decrypt(ciphertext, dk.key, dk.iv)


def crc32(data: bytes) -> int:
    """Standard reflected CRC-32 (poly 0xEDB88320, init/final 0xFFFFFFFF)."""
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class HeaderPlain:
    """Decrypted leading file header: stored checksum plus fixed fields."""

    head_crc: int
    head_type: int
    head_flags: int
    head_size: int
    body: bytes


def parse_header_plain(plaintext: bytes) -> HeaderPlain:
    if len(plaintext) < MIN_HEADER_SIZE:
        raise ValueError(f"header needs at least {MIN_HEADER_SIZE} bytes, got {len(plaintext)}")
    return HeaderPlain(
        head_crc=int.from_bytes(plaintext[0:2], "little"),
        head_type=plaintext[2],
        head_flags=int.from_bytes(plaintext[3:5], "little"),
        head_size=int.from_bytes(plaintext[5:7], "little"),
        body=plaintext[7:],
    )


def verify_header(plaintext: bytes) -> bool:
    """True iff plaintext carries a structurally valid header whose stored
    16-bit checksum matches CRC-32 over bytes 2..head_size-1.

    Malformed input is simply a negative verdict, never an error.
    """
    if len(plaintext) < 16:
        return False
    hdr = parse_header_plain(plaintext)
    if hdr.head_type != FILE_HEADER_TYPE:
        return False
    if not MIN_HEADER_SIZE <= hdr.head_size <= len(plaintext):
        return False
    return crc32(plaintext[2 : hdr.head_size]) & 0xFFFF == hdr.head_crc


def verify_candidate(dk: DerivedKey, archive: ArchiveInfo) -> bool:
    """Decrypt just enough leading blocks to cover the claimed header and
    run the checksum verdict on them.
    """
    blob = archive.encrypted_header
    rks = aes.expand_key(dk.key)
    first = bytes(
        a ^ b for a, b in zip(aes.decrypt_block(blob[:16], rks), dk.iv)
    )
    head_type = first[2]
    head_size = int.from_bytes(first[5:7], "little")
    if head_type != FILE_HEADER_TYPE or head_size < MIN_HEADER_SIZE:
        return False
    if head_size > len(blob):
        return False
    need = min(-(-head_size // 16) * 16, len(blob))
    plain = bytearray(first)
    for off in range(16, need, 16):
        block = blob[off : off + 16]
        plain += bytes(
            a ^ b for a, b in zip(aes.decrypt_block(block, rks), blob[off - 16 : off])
        )
    return verify_header(bytes(plain))
