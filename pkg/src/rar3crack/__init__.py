"""Password recovery for RAR3-style encrypted archives.

The pieces: an archive parser that pulls out the salt and encrypted
file-header blob, the iterated-SHA-1 key derivation in a naive and a
table-optimized variant, an AES-CBC + CRC verifier, index-addressable
candidate spaces, and a batched engine that overlaps derivation with
verification. See README.md for the CLI and the demo scripts.
"""

from .candidates import (
    Batch,
    BruteForceSpec,
    CandidateSpec,
    DictionarySpec,
    MaskSpec,
    batches,
    candidate_at,
    expand_charset,
    space_size,
)
from .engine import CrackResult, EngineConfig, EngineError, ProgressEvent, run
from .kdf import (
    CounterTable,
    DerivedKey,
    KdfLayout,
    LittleBlock,
    PatternBuffer,
    Sha1State,
    build_counter_table,
    build_pattern,
    derive_key,
    derive_key_naive,
    derive_key_optimized,
    partial_digest,
    sha1_block,
    shared_counter_table,
    utf16le_encode,
)
from .rar_format import (
    ArchiveFormatError,
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
from .verifier import (
    HeaderPlain,
    RoundKeys,
    aes128_decrypt_block,
    cbc_decrypt,
    crc32,
    expand_round_keys,
    verify_candidate,
    verify_header,
)

__version__ = "0.1.0"

__all__ = [
    "ArchiveFormatError",
    "ArchiveInfo",
    "Batch",
    "BruteForceSpec",
    "CandidateSpec",
    "CorruptHeaderError",
    "CounterTable",
    "CrackResult",
    "DerivedKey",
    "DictionarySpec",
    "EngineConfig",
    "EngineError",
    "FixtureRecipe",
    "HeaderPlain",
    "KdfLayout",
    "LittleBlock",
    "MainHeader",
    "MaskSpec",
    "NotEncryptedError",
    "PatternBuffer",
    "ProgressEvent",
    "RoundKeys",
    "Sha1State",
    "TruncatedArchiveError",
    "aes128_decrypt_block",
    "batches",
    "build_counter_table",
    "build_fixture",
    "build_header_payload",
    "build_pattern",
    "candidate_at",
    "cbc_decrypt",
    "crc32",
    "derive_key",
    "derive_key_naive",
    "derive_key_optimized",
    "expand_charset",
    "expand_round_keys",
    "parse_archive",
    "partial_digest",
    "run",
    "sha1_block",
    "shared_counter_table",
    "space_size",
    "utf16le_encode",
    "validate_marker",
    "verify_candidate",
    "verify_header",
]
