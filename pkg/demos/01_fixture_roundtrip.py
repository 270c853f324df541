#!/usr/bin/env python3
# Build a synthetic encrypted archive, parse it back, and verify the
# password by decrypting the header and checking its checksum.
#
# Run from the repo root after `pip install -e .`:
#   python demos/01_fixture_roundtrip.py

import os

from rar3crack import (
    FixtureRecipe,
    build_fixture,
    build_header_payload,
    derive_key,
    parse_archive,
    verify_candidate,
)

# A fixture needs three ingredients: a password, an 8-byte salt, and a
# plaintext file header whose embedded checksum is valid. The helper
# builds such a header (type 0x74, checksum over bytes 2..size-1).
password = "hunter2"
salt = os.urandom(8)
payload = build_header_payload(body=b"demo archive entry")
print(f"payload ({len(payload)} bytes): {payload.hex()}")

archive_bytes = build_fixture(FixtureRecipe(password=password, salt=salt, header_payload=payload))
print(f"archive ({len(archive_bytes)} bytes): {archive_bytes[:20].hex()}...")

# The first 20 bytes are the marker block and the main header; the salt
# sits in the clear right after them, then the encrypted header blob.
info = parse_archive(archive_bytes)
print(f"parsed salt: {info.salt.hex()} (matches: {info.salt == salt})")
print(f"encrypted header: {len(info.encrypted_header)} bytes")

# Deriving the key from the right password makes the checksum verdict
# positive; a near-miss password fails.
dk = derive_key(password, info.salt)
print(f"key {dk.key.hex()}  iv {dk.iv.hex()}")
print(f"verify('{password}') -> {verify_candidate(dk, info)}")

wrong = derive_key("hunter3", info.salt)
print(f"verify('hunter3') -> {verify_candidate(wrong, info)}")
