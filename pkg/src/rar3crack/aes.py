"""AES-128 block cipher and CBC mode, both directions.

Self-contained table-driven implementation (FIPS-197 equivalent). The
decrypt side is the verifier's hot path; the encrypt side exists for the
fixture builder's forward round trip. Tables are derived at import time
and checked by the test suite's known-answer vectors.
"""

from __future__ import annotations


def _xtime(a: int) -> int:
    a <<= 1
    return (a ^ 0x1B) & 0xFF if a & 0x100 else a


def _gmul(a: int, b: int) -> int:
    p = 0
    while b:
        if b & 1:
            p ^= a
        a = _xtime(a)
        b >>= 1
    return p


def _build_sbox() -> tuple[list[int], list[int]]:
    # multiplicative inverses via log/antilog over generator 3
    exp = [0] * 255
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x ^= _xtime(x)
    sbox = [0] * 256
    for a in range(256):
        inv = 0 if a == 0 else exp[(255 - log[a]) % 255]
        s = inv
        for _ in range(4):
            inv = ((inv << 1) | (inv >> 7)) & 0xFF
            s ^= inv
        sbox[a] = s ^ 0x63
    inv_sbox = [0] * 256
    for a, s in enumerate(sbox):
        inv_sbox[s] = a
    return sbox, inv_sbox


SBOX, INV_SBOX = _build_sbox()

_MUL2 = [_gmul(2, b) for b in range(256)]
_MUL3 = [_gmul(3, b) for b in range(256)]
_MUL9 = [_gmul(9, b) for b in range(256)]
_MUL11 = [_gmul(11, b) for b in range(256)]
_MUL13 = [_gmul(13, b) for b in range(256)]
_MUL14 = [_gmul(14, b) for b in range(256)]

# flat state layout: byte i sits at row i % 4, column i // 4
_SHIFT = [(i // 4 + i % 4) % 4 * 4 + i % 4 for i in range(16)]
_INV_SHIFT = [(i // 4 - i % 4) % 4 * 4 + i % 4 for i in range(16)]

_RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36]


def expand_key(key: bytes) -> list[bytes]:
    """AES-128 key schedule: 11 round keys of 16 bytes, round 0 = the key."""
    if len(key) != 16:
        raise ValueError(f"AES-128 key must be 16 bytes, got {len(key)}")
    words = [key[i : i + 4] for i in range(0, 16, 4)]
    for i in range(4, 44):
        t = words[i - 1]
        if i % 4 == 0:
            t = bytes(
                (
                    SBOX[t[1]] ^ _RCON[i // 4 - 1],
                    SBOX[t[2]],
                    SBOX[t[3]],
                    SBOX[t[0]],
                )
            )
        words.append(bytes(a ^ b for a, b in zip(words[i - 4], t)))
    return [b"".join(words[4 * r : 4 * r + 4]) for r in range(11)]


def encrypt_block(block: bytes, round_keys: list[bytes]) -> bytes:
    if len(block) != 16:
        raise ValueError(f"AES block must be 16 bytes, got {len(block)}")
    sbox, shift, mul2, mul3 = SBOX, _SHIFT, _MUL2, _MUL3
    s = [b ^ k for b, k in zip(block, round_keys[0])]
    for r in range(1, 10):
        t = [sbox[s[shift[i]]] for i in range(16)]
        rk = round_keys[r]
        for c in range(0, 16, 4):
            a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
            s[c] = mul2[a0] ^ mul3[a1] ^ a2 ^ a3 ^ rk[c]
            s[c + 1] = a0 ^ mul2[a1] ^ mul3[a2] ^ a3 ^ rk[c + 1]
            s[c + 2] = a0 ^ a1 ^ mul2[a2] ^ mul3[a3] ^ rk[c + 2]
            s[c + 3] = mul3[a0] ^ a1 ^ a2 ^ mul2[a3] ^ rk[c + 3]
    rk = round_keys[10]
    return bytes(sbox[s[shift[i]]] ^ rk[i] for i in range(16))


def decrypt_block(block: bytes, round_keys: list[bytes]) -> bytes:
    if len(block) != 16:
        raise ValueError(f"AES block must be 16 bytes, got {len(block)}")
    isbox, ishift = INV_SBOX, _INV_SHIFT
    m9, m11, m13, m14 = _MUL9, _MUL11, _MUL13, _MUL14
    rk = round_keys[10]
    s = [b ^ k for b, k in zip(block, rk)]
    for r in range(9, 0, -1):
        rk = round_keys[r]
        t = [isbox[s[ishift[i]]] ^ rk[i] for i in range(16)]
        for c in range(0, 16, 4):
            a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
            s[c] = m14[a0] ^ m11[a1] ^ m13[a2] ^ m9[a3]
            s[c + 1] = m9[a0] ^ m14[a1] ^ m11[a2] ^ m13[a3]
            s[c + 2] = m13[a0] ^ m9[a1] ^ m14[a2] ^ m11[a3]
            s[c + 3] = m11[a0] ^ m13[a1] ^ m9[a2] ^ m14[a3]
    rk = round_keys[0]
    return bytes(isbox[s[ishift[i]]] ^ rk[i] for i in range(16))


def _check_cbc_input(data: bytes, what: str) -> None:
    if len(data) == 0 or len(data) % 16:
        raise ValueError(f"{what} length {len(data)} is not a positive multiple of 16")


def cbc_encrypt(plaintext: bytes, key: bytes, iv: bytes) -> bytes:
    _check_cbc_input(plaintext, "plaintext")
    rks = expand_key(key)
    prev = iv
    out = bytearray()
    for off in range(0, len(plaintext), 16):
        block = bytes(a ^ b for a, b in zip(plaintext[off : off + 16], prev))
        prev = encrypt_block(block, rks)
        out += prev
    return bytes(out)


def cbc_decrypt(ciphertext: bytes, key: bytes, iv: bytes) -> bytes:
    _check_cbc_input(ciphertext, "ciphertext")
    rks = expand_key(key)
    prev = iv
    out = bytearray()
    for off in range(0, len(ciphertext), 16):
        block = ciphertext[off : off + 16]
        out += bytes(a ^ b for a, b in zip(decrypt_block(block, rks), prev))
        prev = block
    return bytes(out)
