"""Recovery engine: batched derive/verify pipeline with optional overlap.

The heavy key derivation runs in a small pool of workers, data-parallel
over the candidates of one batch; the cheap AES+CRC verification runs as
a single downstream stage. In overlapped mode the derivation of batch
N+1 proceeds while batch N's keys are being verified, connected by a
bounded queue so memory stays flat. Batches are always verified in
order, matches never stop the scan (a wrong password can pass the 16-bit
check, so the whole space is always swept), and results are identical
whatever the worker count.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kdf, verifier
from .candidates import Batch, CandidateSpec, BruteForceSpec, DictionarySpec, MaskSpec, batches
from .rar_format import ArchiveInfo

DEFAULT_BATCH_SIZE = 14336


def _default_workers() -> int:
    return max(1, (os.cpu_count() or 2) - 1)


@dataclass
class EngineConfig:
    batch_size: int = DEFAULT_BATCH_SIZE
    derivation_workers: int = field(default_factory=_default_workers)
    progress_sink: Optional[Callable[["ProgressEvent"], None]] = None
    #: False selects the plain derive-then-verify mode (for benchmarking
    #: the overlap itself); results are identical either way.
    overlap: bool = True
    start_index: int = 0
    queue_capacity: int = 2
    #: The full space is always swept; kept as an explicit, visible contract.
    exhaust_space: bool = True


@dataclass(frozen=True)
class ProgressEvent:
    batch_index: int
    last_candidate_tested: str
    tested_so_far: int
    throughput: float
    matches_so_far: int


@dataclass(frozen=True)
class CrackResult:
    #: (space index, password) pairs, ascending by index
    matches: tuple[tuple[int, str], ...]
    tested: int
    elapsed: float
    throughput: float
    #: (derivation_total, verification_total) seconds, summed per batch
    stage_times: tuple[float, float]
    derived_count: int
    verified_count: int
    peak_live_key_batches: int


class EngineError(RuntimeError):
    """A stage failed; carries where a manual resume should restart."""

    def __init__(self, message: str, *, last_completed_batch: int, resume_index: int):
        super().__init__(
            f"{message} (last completed batch {last_completed_batch}; "
            f"resume with start index {resume_index})"
        )
        self.last_completed_batch = last_completed_batch
        self.resume_index = resume_index


_tls = threading.local()


def _work_buffer(table: kdf.CounterTable):
    bufs = getattr(_tls, "bufs", None)
    if bufs is None:
        bufs = _tls.bufs = {}
    ul = table.layout.unit_len
    buf = bufs.get(ul)
    if buf is None:
        buf = bufs[ul] = np.empty_like(table.words)
    return buf


def _derive_slice(texts: list[str], salt: bytes, tables: dict[int, kdf.CounterTable]):
    out = []
    for pw in texts:
        table = tables[len(pw)]
        pattern = kdf.build_pattern(pw, salt)
        out.append(kdf.derive_key_optimized(pattern, table, work=_work_buffer(table)))
    return out


def _password_lengths(spec: CandidateSpec) -> set[int]:
    if isinstance(spec, DictionarySpec):
        return {len(w) for w in spec.words}
    if isinstance(spec, BruteForceSpec):
        return {spec.length}
    if isinstance(spec, MaskSpec):
        return {len(spec.elements)}
    raise TypeError(f"unsupported candidate spec {type(spec).__name__}")


class _RunState:
    """Counters shared between the producer and the verification stage."""

    def __init__(self, started: float):
        self.lock = threading.Lock()
        self.started = started
        self.matches: list[tuple[int, str]] = []
        self.tested = 0
        self.derived = 0
        self.verified = 0
        self.derive_time = 0.0
        self.verify_time = 0.0
        self.live_batches = 0
        self.peak_live = 0
        self.completed_batches = 0

    def batch_derived(self, count: int, seconds: float):
        with self.lock:
            self.derived += count
            self.derive_time += seconds
            self.live_batches += 1
            self.peak_live = max(self.peak_live, self.live_batches)

    def batch_verified(self, ordinal: int, texts, found, seconds: float, sink):
        with self.lock:
            self.verified += len(texts)
            self.tested += len(texts)
            self.verify_time += seconds
            self.matches.extend(found)
            self.live_batches -= 1
            self.completed_batches = ordinal + 1
            event = ProgressEvent(
                batch_index=ordinal,
                last_candidate_tested=texts[-1],
                tested_so_far=self.tested,
                throughput=self.tested / max(time.perf_counter() - self.started, 1e-9),
                matches_so_far=len(self.matches),
            )
        if sink is not None:
            sink(event)


def _verify_batch(texts, keys, base_index: int, archive: ArchiveInfo):
    found = []
    for off, (pw, dk) in enumerate(zip(texts, keys)):
        if verifier.verify_candidate(dk, archive):
            found.append((base_index + off, pw))
    return found


def run(spec: CandidateSpec, archive: ArchiveInfo, config: EngineConfig | None = None) -> CrackResult:
    """Derive and verify every candidate in the space exactly once.

    Raises EngineError if a stage fails mid-run; the error carries the
    last fully verified batch and the index to resume from.
    """
    cfg = config or EngineConfig()
    if cfg.batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {cfg.batch_size}")
    if cfg.derivation_workers < 1:
        raise ValueError(f"derivation_workers must be >= 1, got {cfg.derivation_workers}")
    if cfg.queue_capacity < 1:
        raise ValueError(f"queue_capacity must be >= 1, got {cfg.queue_capacity}")
    if not cfg.exhaust_space:
        raise ValueError("early abort is not supported: exhaust_space must stay True")

    # one shared read-only counter table per password length, built up front
    tables = {n: kdf.shared_counter_table(n) for n in _password_lengths(spec)}
    batch_iter = batches(spec, cfg.batch_size, start_index=cfg.start_index)

    started = time.perf_counter()
    state = _RunState(started)
    with ThreadPoolExecutor(
        max_workers=cfg.derivation_workers, thread_name_prefix="derive"
    ) as executor:

        def derive_batch(batch: Batch):
            t0 = time.perf_counter()
            texts = [
                spec.candidate_at(i)
                for i in range(batch.start_index, batch.start_index + batch.count)
            ]
            if cfg.derivation_workers == 1:
                keys = _derive_slice(texts, archive.salt, tables)
            else:
                chunk = -(-batch.count // cfg.derivation_workers)
                futures = [
                    executor.submit(_derive_slice, texts[off : off + chunk], archive.salt, tables)
                    for off in range(0, batch.count, chunk)
                ]
                keys = []
                for f in futures:
                    keys.extend(f.result())
            state.batch_derived(batch.count, time.perf_counter() - t0)
            return texts, keys

        if cfg.overlap:
            _run_overlapped(spec, archive, cfg, state, batch_iter, derive_batch)
        else:
            for ordinal, batch in enumerate(batch_iter):
                try:
                    texts, keys = derive_batch(batch)
                    t0 = time.perf_counter()
                    found = _verify_batch(texts, keys, batch.start_index, archive)
                    dt = time.perf_counter() - t0
                except Exception as exc:
                    raise EngineError(
                        f"stage failure: {exc}",
                        last_completed_batch=state.completed_batches - 1,
                        resume_index=cfg.start_index + state.tested,
                    ) from exc
                state.batch_verified(ordinal, texts, found, dt, cfg.progress_sink)

    elapsed = time.perf_counter() - started
    return CrackResult(
        matches=tuple(state.matches),
        tested=state.tested,
        elapsed=elapsed,
        throughput=state.tested / max(elapsed, 1e-9),
        stage_times=(state.derive_time, state.verify_time),
        derived_count=state.derived,
        verified_count=state.verified,
        peak_live_key_batches=state.peak_live,
    )


def _run_overlapped(spec, archive, cfg, state, batch_iter, derive_batch):
    """Producer derives batch N+1 while the consumer verifies batch N."""
    handoff: queue.Queue = queue.Queue(maxsize=cfg.queue_capacity)
    failure: dict[str, BaseException] = {}

    def consumer():
        draining = False
        while True:
            item = handoff.get()
            if item is None:
                return
            if draining:
                continue
            ordinal, batch, texts, keys = item
            try:
                t0 = time.perf_counter()
                found = _verify_batch(texts, keys, batch.start_index, archive)
                dt = time.perf_counter() - t0
                state.batch_verified(ordinal, texts, found, dt, cfg.progress_sink)
            except BaseException as exc:  # keep consuming so the producer never blocks
                failure["verify"] = exc
                draining = True

    thread = threading.Thread(target=consumer, name="verify", daemon=True)
    thread.start()
    try:
        for ordinal, batch in enumerate(batch_iter):
            if failure:
                break
            texts, keys = derive_batch(batch)
            handoff.put((ordinal, batch, texts, keys))
    except Exception as exc:
        failure.setdefault("derive", exc)
    finally:
        handoff.put(None)
        thread.join()
    if failure:
        exc = failure.get("derive") or failure.get("verify")
        raise EngineError(
            f"stage failure: {exc}",
            last_completed_batch=state.completed_batches - 1,
            resume_index=cfg.start_index + state.tested,
        ) from exc
