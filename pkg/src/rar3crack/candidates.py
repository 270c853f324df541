"""Index-addressable candidate spaces: dictionary, brute force, mask.

Every space maps a dense index range [0, size) onto passwords with a
fixed global order (odometer order for generated spaces: the last
position varies fastest). That makes batches, progress reporting and
resumption meaningful and keeps multi-worker runs deterministic.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

from .kdf import MAX_PASSWORD_LEN, MIN_PASSWORD_LEN, utf16le_encode

#: hashcat-style class shorthands usable in charsets and masks
CHAR_CLASSES = {
    "l": string.ascii_lowercase,
    "u": string.ascii_uppercase,
    "d": string.digits,
    "s": string.punctuation,
}


def expand_charset(spec: str) -> str:
    """Expand ?l/?u/?d/?s classes and ?? escapes, dropping duplicates."""
    out: list[str] = []
    i = 0
    while i < len(spec):
        ch = spec[i]
        if ch == "?":
            if i + 1 >= len(spec):
                raise ValueError("dangling '?' in charset; use '??' for a literal '?'")
            tag = spec[i + 1]
            if tag == "?":
                out.append("?")
            elif tag in CHAR_CLASSES:
                out.extend(CHAR_CLASSES[tag])
            else:
                raise ValueError(f"unknown character class '?{tag}'")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(dict.fromkeys(out))


def _check_charset(charset: str) -> None:
    if not charset:
        raise ValueError("charset must not be empty")
    if len(set(charset)) != len(charset):
        raise ValueError("charset contains duplicate characters")


@dataclass(frozen=True)
class DictionarySpec:
    """Wordlist materialized into an indexed list.

    ``skipped`` counts source entries dropped for being empty, too long
    or not encodable for the key derivation.
    """

    words: tuple[str, ...]
    skipped: int = 0

    @classmethod
    def from_words(cls, words) -> "DictionarySpec":
        kept: list[str] = []
        skipped = 0
        for w in words:
            try:
                utf16le_encode(w)
            except ValueError:
                skipped += 1
                continue
            kept.append(w)
        return cls(words=tuple(kept), skipped=skipped)

    @classmethod
    def from_file(cls, path) -> "DictionarySpec":
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise ValueError(f"cannot read dictionary {path}: {exc}") from exc
        lines = []
        skipped = 0
        for line in raw.splitlines():
            try:
                lines.append(line.decode("utf-8"))
            except UnicodeDecodeError:
                skipped += 1
        spec = cls.from_words(lines)
        return cls(words=spec.words, skipped=spec.skipped + skipped)

    @property
    def size(self) -> int:
        return len(self.words)

    def candidate_at(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} outside [0, {self.size})")
        return self.words[index]


@dataclass(frozen=True)
class BruteForceSpec:
    """All combinations of a charset at one fixed length, odometer order."""

    charset: str
    length: int

    def __post_init__(self):
        _check_charset(self.charset)
        if not MIN_PASSWORD_LEN <= self.length <= MAX_PASSWORD_LEN:
            raise ValueError(f"length {self.length} outside [1, {MAX_PASSWORD_LEN}]")

    @property
    def size(self) -> int:
        return len(self.charset) ** self.length

    def candidate_at(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} outside [0, {self.size})")
        base = len(self.charset)
        out = []
        for _ in range(self.length):
            index, rem = divmod(index, base)
            out.append(self.charset[rem])
        return "".join(reversed(out))

    def index_of(self, password: str) -> int:
        if len(password) != self.length:
            raise ValueError(f"password length {len(password)} != {self.length}")
        index = 0
        for ch in password:
            index = index * len(self.charset) + self.charset.index(ch)
        return index


@dataclass(frozen=True)
class MaskSpec:
    """Per-position candidate sets: a literal character or a class."""

    elements: tuple[str, ...]

    def __post_init__(self):
        if not MIN_PASSWORD_LEN <= len(self.elements) <= MAX_PASSWORD_LEN:
            raise ValueError(f"mask length {len(self.elements)} outside [1, {MAX_PASSWORD_LEN}]")
        for pos, el in enumerate(self.elements):
            if not el:
                raise ValueError(f"mask position {pos} has an empty candidate set")
            if len(set(el)) != len(el):
                raise ValueError(f"mask position {pos} has duplicate characters")

    @classmethod
    def parse(cls, mask: str) -> "MaskSpec":
        elements: list[str] = []
        i = 0
        while i < len(mask):
            ch = mask[i]
            if ch == "?":
                if i + 1 >= len(mask):
                    raise ValueError("dangling '?' in mask; use '??' for a literal '?'")
                tag = mask[i + 1]
                if tag == "?":
                    elements.append("?")
                elif tag in CHAR_CLASSES:
                    elements.append(CHAR_CLASSES[tag])
                else:
                    raise ValueError(f"unknown character class '?{tag}'")
                i += 2
            else:
                elements.append(ch)
                i += 1
        return cls(elements=tuple(elements))

    @property
    def size(self) -> int:
        n = 1
        for el in self.elements:
            n *= len(el)
        return n

    def candidate_at(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} outside [0, {self.size})")
        out = []
        for el in reversed(self.elements):
            index, rem = divmod(index, len(el))
            out.append(el[rem])
        return "".join(reversed(out))

    def index_of(self, password: str) -> int:
        if len(password) != len(self.elements):
            raise ValueError(f"password length {len(password)} != mask length")
        index = 0
        for ch, el in zip(password, self.elements):
            index = index * len(el) + el.index(ch)
        return index


CandidateSpec = Union[DictionarySpec, BruteForceSpec, MaskSpec]


def space_size(spec: CandidateSpec) -> int:
    return spec.size


def candidate_at(spec: CandidateSpec, index: int) -> str:
    return spec.candidate_at(index)


@dataclass(frozen=True)
class Batch:
    """A contiguous slice of a candidate space."""

    start_index: int
    count: int


def batches(spec: CandidateSpec, batch_size: int, *, start_index: int = 0) -> Iterator[Batch]:
    """Tile [start_index, size) with contiguous ascending batches.

    All batches are full-sized except possibly the last; an empty range
    yields nothing. Arguments are validated immediately, not on first use.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    size = spec.size
    if not 0 <= start_index <= size:
        raise ValueError(f"start_index {start_index} outside [0, {size}]")

    def tile() -> Iterator[Batch]:
        pos = start_index
        while pos < size:
            count = min(batch_size, size - pos)
            yield Batch(start_index=pos, count=count)
            pos += count

    return tile()
