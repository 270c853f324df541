#!/usr/bin/env python3
# Candidate spaces: dictionary, brute force and mask, all addressable by
# a dense index so work can be tiled into batches.
#
#   python demos/03_candidate_spaces.py

from rar3crack import BruteForceSpec, DictionarySpec, MaskSpec, batches, expand_charset

# Brute force: every combination of a charset at a fixed length, in
# odometer order (last position varies fastest).
brute = BruteForceSpec(charset="abc", length=2)
print(f"BruteForce('abc', 2): size {brute.size}")
print(" ", [brute.candidate_at(i) for i in range(brute.size)])

# The classic all-lowercase length-4 space:
lower4 = BruteForceSpec(charset=expand_charset("?l"), length=4)
print(f"BruteForce(?l, 4): size {lower4.size:,}")
print(f"  candidate 0: {lower4.candidate_at(0)!r}, candidate 456975: {lower4.candidate_at(456975)!r}")

# Masks constrain each position with a literal or a class; '??' escapes
# a literal question mark.
mask = MaskSpec.parse("pass?d?d")
print(f"Mask('pass?d?d'): size {mask.size}")
print(f"  first {mask.candidate_at(0)!r}, last {mask.candidate_at(mask.size - 1)!r}")

# Dictionaries are materialized and index-addressable too; unusable
# entries (too long, not encodable) are counted, not fatal.
words = DictionarySpec.from_words(["letmein", "hunter2", "x" * 30, "correct horse"])
print(f"Dictionary: size {words.size}, skipped {words.skipped}")

# Batches tile a space exactly: contiguous, ascending, last one ragged.
tiling = list(batches(lower4, 14336))
print(f"tiling 456,976 by 14,336: {len(tiling)} batches, "
      f"last = ({tiling[-1].start_index}, {tiling[-1].count})")
covered = sum(b.count for b in tiling)
print(f"covered exactly once: {covered == lower4.size}")
