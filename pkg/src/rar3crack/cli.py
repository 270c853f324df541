"""Command-line front end and measurement harness.

Subcommands: crack (dictionary / brute-force / mask recovery), fixture
(build a synthetic encrypted archive), kdf (print the derived key for a
password+salt), bench stages (derivation vs verification stage times)
and bench sweep (throughput across batch sizes / worker counts).

Exit codes for crack: 0 when at least one match was found, 1 when the
space was exhausted without a match, 2 on usage or format errors. Other
subcommands use 0/2. With --format jsonl every progress event and the
final result are emitted as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import engine, kdf, verifier
from .candidates import BruteForceSpec, DictionarySpec, MaskSpec, expand_charset
from .engine import DEFAULT_BATCH_SIZE, EngineConfig
from .rar_format import ArchiveFormatError, FixtureRecipe, build_fixture, build_header_payload, parse_archive

BENCH_DEFAULT_LENGTHS = (4, 10, 11, 25)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rar3crack",
        description="Password recovery for RAR3-style encrypted archives.",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    crack = sub.add_parser("crack", help="recover an archive password")
    crack.add_argument("--archive", required=True, help="path to the encrypted archive")
    crack.add_argument("--mode", required=True, choices=["dict", "brute", "mask"])
    crack.add_argument("--dict", dest="dict_path", help="wordlist file (dict mode)")
    crack.add_argument("--charset", help="literal characters and ?l/?u/?d/?s classes (brute mode)")
    crack.add_argument("--min-len", type=int, help="smallest brute-force length")
    crack.add_argument("--max-len", type=int, help="largest brute-force length")
    crack.add_argument("--mask", help="per-position pattern, e.g. pass?d?d (mask mode)")
    crack.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    crack.add_argument("--workers", type=int, default=None, help="derivation workers")
    crack.add_argument("--start-index", type=int, default=0, help="resume from this candidate index")
    crack.add_argument("--format", choices=["plain", "jsonl"], default="plain")
    crack.add_argument("--sync", action="store_true", help="disable derive/verify overlap")
    crack.add_argument("--quiet", action="store_true", help="suppress per-batch progress")

    fixture = sub.add_parser("fixture", help="build a synthetic encrypted archive")
    fixture.add_argument("--password", required=True)
    fixture.add_argument("--salt", help="16 hex digits; random when omitted")
    fixture.add_argument("--out", required=True, help="output path")
    fixture.add_argument("--corrupt", action="store_true",
                         help="break the embedded checksum (no password will verify)")

    kdfp = sub.add_parser("kdf", help="print the derived AES key and IV")
    kdfp.add_argument("--password", required=True)
    kdfp.add_argument("--salt", required=True, help="16 hex digits")

    bench = sub.add_parser("bench", help="measurement harness")
    bsub = bench.add_subparsers(dest="bench_kind", required=True)

    stages = bsub.add_parser("stages", help="derivation vs verification stage times")
    stages.add_argument("--lengths", default=",".join(map(str, BENCH_DEFAULT_LENGTHS)),
                        help="comma-separated password lengths")
    stages.add_argument("--candidates", type=int, default=1000)
    stages.add_argument("--format", choices=["plain", "jsonl"], default="plain")

    sweep = bsub.add_parser("sweep", help="throughput across batch sizes")
    sweep.add_argument("--batch-sizes", required=True, help="comma-separated batch sizes")
    sweep.add_argument("--workers-list", default="", help="comma-separated worker counts")
    sweep.add_argument("--candidates", type=int, default=2000)
    sweep.add_argument("--length", type=int, default=4, help="password length of the workload")
    sweep.add_argument("--sync", action="store_true")
    sweep.add_argument("--format", choices=["plain", "jsonl"], default="plain")
    return p


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _parse_salt(text: str) -> bytes:
    salt = bytes.fromhex(text)
    if len(salt) != 8:
        raise ValueError(f"salt must be 16 hex digits (8 bytes), got {len(salt)} bytes")
    return salt


def _emit(record: dict, fmt: str) -> None:
    if fmt == "jsonl":
        print(json.dumps(record), flush=True)


def _build_spaces(args) -> list[tuple[str, object]]:
    """One (label, spec) pair per space the crack run sweeps."""
    if args.mode == "dict":
        if not args.dict_path:
            raise ValueError("dict mode needs --dict")
        spec = DictionarySpec.from_file(args.dict_path)
        if spec.skipped:
            print(f"note: skipped {spec.skipped} unusable dictionary entries", file=sys.stderr)
        return [("dict", spec)]
    if args.mode == "brute":
        if not args.charset or args.min_len is None or args.max_len is None:
            raise ValueError("brute mode needs --charset, --min-len and --max-len")
        charset = expand_charset(args.charset)
        if args.min_len > args.max_len:
            raise ValueError("--min-len must not exceed --max-len")
        return [
            (f"len {n}", BruteForceSpec(charset=charset, length=n))
            for n in range(args.min_len, args.max_len + 1)
        ]
    if not args.mask:
        raise ValueError("mask mode needs --mask")
    return [("mask", MaskSpec.parse(args.mask))]


def cmd_crack(args) -> int:
    try:
        data = Path(args.archive).read_bytes()
        info = parse_archive(data)
        spaces = _build_spaces(args)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if args.start_index and len(spaces) > 1:
        return _fail("--start-index only applies to a single space; narrow the length range")

    fmt = args.format
    all_matches: list[dict] = []
    tested_total = 0
    derive_total = verify_total = elapsed_total = 0.0
    for label, spec in spaces:
        size = spec.size

        def on_progress(ev, label=label, size=size):
            if args.quiet:
                return
            if fmt == "jsonl":
                _emit(
                    {
                        "type": "progress",
                        "space": label,
                        "batch_index": ev.batch_index,
                        "last_candidate": ev.last_candidate_tested,
                        "tested": ev.tested_so_far,
                        "space_size": size,
                        "throughput": round(ev.throughput, 2),
                        "matches": ev.matches_so_far,
                    },
                    fmt,
                )
            else:
                print(
                    f"[{label}] batch {ev.batch_index} | "
                    f"tested {ev.tested_so_far:,}/{size:,} | "
                    f"{ev.throughput:,.1f} pw/s | "
                    f"last {ev.last_candidate_tested!r} | matches {ev.matches_so_far}"
                )

        cfg = EngineConfig(
            batch_size=args.batch_size,
            progress_sink=on_progress,
            overlap=not args.sync,
            start_index=args.start_index,
        )
        if args.workers is not None:
            cfg.derivation_workers = args.workers
        try:
            result = engine.run(spec, info, cfg)
        except (ValueError, engine.EngineError) as exc:
            return _fail(str(exc))
        tested_total += result.tested
        derive_total += result.stage_times[0]
        verify_total += result.stage_times[1]
        elapsed_total += result.elapsed
        for index, password in result.matches:
            all_matches.append({"space": label, "index": index, "password": password})
            if fmt == "plain":
                print(f"MATCH space={label} index={index} password={password!r}")

    if fmt == "jsonl":
        _emit(
            {
                "type": "result",
                "matches": all_matches,
                "tested": tested_total,
                "elapsed": round(elapsed_total, 6),
                "throughput": round(tested_total / max(elapsed_total, 1e-9), 2),
                "derivation_total": round(derive_total, 6),
                "verification_total": round(verify_total, 6),
            },
            fmt,
        )
    else:
        print(
            f"done: tested {tested_total:,} in {elapsed_total:.2f} s "
            f"({tested_total / max(elapsed_total, 1e-9):,.1f} pw/s); "
            f"derivation {derive_total:.2f} s, verification {verify_total:.2f} s; "
            f"matches {len(all_matches)}"
        )
    return 0 if all_matches else 1


def cmd_fixture(args) -> int:
    try:
        salt = _parse_salt(args.salt) if args.salt else os.urandom(8)
        payload = build_header_payload()
        if args.corrupt:
            payload = bytes([payload[0] ^ 0x01]) + payload[1:]
        data = build_fixture(FixtureRecipe(password=args.password, salt=salt, header_payload=payload))
        Path(args.out).write_bytes(data)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    print(f"wrote {args.out} ({len(data)} bytes), salt {salt.hex()}")
    return 0


def cmd_kdf(args) -> int:
    try:
        dk = kdf.derive_key(args.password, _parse_salt(args.salt))
    except ValueError as exc:
        return _fail(str(exc))
    print(f"key {dk.key.hex()}")
    print(f"iv  {dk.iv.hex()}")
    return 0


def _print_bench_rows(rows: list[dict], fmt: str, columns: list[str]) -> None:
    if fmt == "jsonl":
        for row in rows:
            print(json.dumps({"type": "bench_row", **row}), flush=True)
        return
    if not rows:
        print("no rows (empty workload)")
        return
    header = "  ".join(f"{c:>18}" for c in columns)
    print(header)
    for row in rows:
        print("  ".join(f"{_fmt_cell(row[c]):>18}" for c in columns))


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def cmd_bench_stages(args) -> int:
    try:
        lengths = [int(x) for x in args.lengths.split(",") if x.strip()]
        if not lengths:
            raise ValueError("--lengths is empty")
        if args.candidates < 0:
            raise ValueError("--candidates must be >= 0")
    except ValueError as exc:
        return _fail(str(exc))

    rows = []
    salt = bytes(range(8))
    for length in lengths:
        try:
            space = BruteForceSpec(charset="abcdefghijklmnopqrstuvwxyz", length=length)
            info = parse_archive(
                build_fixture(
                    FixtureRecipe(password="Z" * length, salt=salt, header_payload=build_header_payload())
                )
            )
        except ValueError as exc:
            return _fail(str(exc))
        if args.candidates == 0:
            continue
        texts = [space.candidate_at(i % space.size) for i in range(args.candidates)]
        table = kdf.shared_counter_table(length)

        t0 = time.perf_counter()
        keys = [
            kdf.derive_key_optimized(kdf.build_pattern(pw, salt), table) for pw in texts
        ]
        derivation_total = time.perf_counter() - t0

        t0 = time.perf_counter()
        hits = sum(verifier.verify_candidate(dk, info) for dk in keys)
        verification_total = time.perf_counter() - t0

        wall = derivation_total + verification_total
        rows.append(
            {
                "password_len": length,
                "candidates": args.candidates,
                "derivation_total": derivation_total,
                "verification_total": verification_total,
                "ratio": derivation_total / max(verification_total, 1e-9),
                "wall_time": wall,
                "passwords_per_second": args.candidates / max(wall, 1e-9),
                "matches": hits,
            }
        )
    _print_bench_rows(
        rows,
        args.format,
        ["password_len", "candidates", "derivation_total", "verification_total", "ratio",
         "wall_time", "passwords_per_second"],
    )
    return 0


def cmd_bench_sweep(args) -> int:
    try:
        batch_sizes = [int(x) for x in args.batch_sizes.split(",") if x.strip()]
        if not batch_sizes:
            raise ValueError("--batch-sizes is empty")
        if any(b < 1 for b in batch_sizes):
            raise ValueError("batch sizes must be >= 1")
        workers_list = [int(x) for x in args.workers_list.split(",") if x.strip()] or [None]
        if any(w is not None and w < 1 for w in workers_list):
            raise ValueError("worker counts must be >= 1")
        if args.candidates < 1:
            raise ValueError("--candidates must be >= 1")
    except ValueError as exc:
        return _fail(str(exc))

    salt = bytes(range(8))
    try:
        info = parse_archive(
            build_fixture(
                FixtureRecipe(password="Z" * args.length, salt=salt, header_payload=build_header_payload())
            )
        )
        base = BruteForceSpec(charset="abcdefghijklmnopqrstuvwxyz0123456789", length=args.length)
    except ValueError as exc:
        return _fail(str(exc))
    workload = DictionarySpec.from_words(
        base.candidate_at(i % base.size) for i in range(args.candidates)
    )

    rows = []
    for workers in workers_list:
        for batch_size in batch_sizes:
            cfg = EngineConfig(batch_size=batch_size, overlap=not args.sync)
            if workers is not None:
                cfg.derivation_workers = workers
            result = engine.run(workload, info, cfg)
            rows.append(
                {
                    "batch_size": batch_size,
                    "workers": workers if workers is not None else cfg.derivation_workers,
                    "tested": result.tested,
                    "passwords_per_second": result.throughput,
                    "derivation_total": result.stage_times[0],
                    "verification_total": result.stage_times[1],
                    "wall_time": result.elapsed,
                }
            )
    _print_bench_rows(
        rows,
        args.format,
        ["batch_size", "workers", "tested", "passwords_per_second", "derivation_total",
         "verification_total", "wall_time"],
    )
    best = max(rows, key=lambda r: r["passwords_per_second"])
    if args.format == "plain":
        print(
            f"best: batch_size={best['batch_size']} workers={best['workers']} "
            f"({best['passwords_per_second']:,.1f} pw/s)"
        )
    else:
        print(json.dumps({"type": "best", "batch_size": best["batch_size"],
                          "workers": best["workers"],
                          "passwords_per_second": best["passwords_per_second"]}), flush=True)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.subcommand == "crack":
            return cmd_crack(args)
        if args.subcommand == "fixture":
            return cmd_fixture(args)
        if args.subcommand == "kdf":
            return cmd_kdf(args)
        if args.subcommand == "bench":
            if args.bench_kind == "stages":
                return cmd_bench_stages(args)
            return cmd_bench_sweep(args)
    except ArchiveFormatError as exc:
        return _fail(str(exc))
    raise AssertionError(f"unhandled subcommand {args.subcommand!r}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
