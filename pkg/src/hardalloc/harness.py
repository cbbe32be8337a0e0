"""Trace replay, differential shadow checking, invariant sweeps, fuzzing,
and the scripted exploit scenarios.

The shadow model mirrors what a correct allocator must guarantee to the
client (address, usable length, zero fill, byte contents, liveness); any
divergence between it and the allocator under test is a reported violation.
"""
from __future__ import annotations

import hashlib
import random
import threading
import time
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field

from .arraylist import SlabStatus
from .config import PAGE_SIZE, AllocConfig, default_config
from .frontend import Allocator, FreeOutcome
from .provider import Fault, SimProvider
from .sizeclass import SizeClass

OP_KINDS = {"a": 2, "f": 1, "ra": 2, "ca": 3, "ma": 3, "w": 3, "r": 2, "us": 1}


class TraceParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TraceError(RuntimeError):
    """Trace misuse discovered at run time (e.g. reallocating a live id)."""


@dataclass(frozen=True)
class TraceOp:
    thread: int
    kind: str
    id: int
    args: tuple[int, ...] = ()


def parse_trace_text(text: str) -> list[TraceOp]:
    """One op per line: [t<k>] <kind> <id> <args...>; '#' starts a comment."""
    ops: list[TraceOp] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        thread = 0
        if fields[0].startswith("t"):
            try:
                thread = int(fields[0][1:])
            except ValueError:
                raise TraceParseError(line_no, f"bad thread tag {fields[0]!r}") from None
            fields = fields[1:]
        if not fields:
            raise TraceParseError(line_no, "missing op after thread tag")
        kind = fields[0].lower()
        if kind not in OP_KINDS:
            raise TraceParseError(line_no, f"unknown op {kind!r}")
        want = OP_KINDS[kind]
        if len(fields) - 1 != want:
            raise TraceParseError(line_no, f"op {kind!r} takes {want} arguments")
        try:
            nums = [int(f, 16) if kind == "w" and i == len(fields) - 2 else int(f)
                    for i, f in enumerate(fields[1:])]
        except ValueError:
            raise TraceParseError(line_no, f"non-numeric argument in {line!r}") from None
        ops.append(TraceOp(thread, kind, nums[0], tuple(nums[1:])))
    return ops


def parse_trace_file(path: str) -> list[TraceOp]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_text(fh.read())


# -- shadow model ---------------------------------------------------------------


@dataclass
class ShadowBlock:
    id: int
    addr: int | None  # None: the allocation returned null
    requested: int
    usable: int
    live: bool = True
    written: dict[int, int] = field(default_factory=dict)


class ShadowModel:
    """Ground-truth mirror: id -> block plus an interval set of live ranges."""

    def __init__(self):
        self.blocks: dict[int, ShadowBlock] = {}
        self._starts: list[int] = []
        self._intervals: dict[int, tuple[int, int]] = {}  # start -> (end, id)

    def live_blocks(self) -> list[ShadowBlock]:
        return [b for b in self.blocks.values() if b.live]

    def add(self, block: ShadowBlock) -> str | None:
        """Register a live block; returns a violation message on overlap."""
        prior = self.blocks.get(block.id)
        if prior is not None and prior.live:
            raise TraceError(f"id {block.id} is already live")
        start, end = block.addr, block.addr + block.usable
        i = bisect_right(self._starts, start)
        if i > 0:
            p = self._starts[i - 1]
            pend, pid = self._intervals[p]
            if pend > start:
                return f"block {block.id} at {start:#x} overlaps block {pid}"
        if i < len(self._starts):
            n = self._starts[i]
            if n < end:
                return f"block {block.id} at {start:#x} overlaps block {self._intervals[n][1]}"
        insort(self._starts, start)
        self._intervals[start] = (end, block.id)
        self.blocks[block.id] = block
        return None

    def drop(self, block: ShadowBlock) -> None:
        block.live = False
        i = bisect_left(self._starts, block.addr)
        if i < len(self._starts) and self._starts[i] == block.addr:
            self._starts.pop(i)
            self._intervals.pop(block.addr)

    def live_intervals(self) -> list[tuple[int, int, int]]:
        return [(s, *self._intervals[s]) for s in self._starts]

    def block_at(self, addr: int) -> ShadowBlock | None:
        """Live block starting exactly at addr, if any."""
        hit = self._intervals.get(addr)
        return self.blocks.get(hit[1]) if hit is not None else None


def merged_disjoint(shadows: list[ShadowModel]) -> list[str]:
    """Pairwise disjointness of live ranges across per-thread shadows."""
    spans: list[tuple[int, int, int]] = []
    for sh in shadows:
        spans.extend(sh.live_intervals())
    spans.sort()
    problems = []
    for (s0, e0, id0), (s1, _e1, id1) in zip(spans, spans[1:]):
        if e0 > s1:
            problems.append(f"live blocks {id0} and {id1} overlap at {s1:#x}")
    return problems


# -- reports ----------------------------------------------------------------------


@dataclass
class Report:
    ops: int = 0
    nulls: int = 0
    faults: int = 0
    live: int = 0
    invalid_frees: int = 0
    corruption_detected: int = 0
    violations: list[str] = field(default_factory=list)
    seconds: float = 0.0
    digest: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        return (f"ops={self.ops} violations={len(self.violations)} faults={self.faults} "
                f"nulls={self.nulls} invalid_frees={self.invalid_frees} "
                f"corruption_detected={self.corruption_detected} live={self.live} "
                f"hash={self.digest}")


def _collect_counters(alloc: Allocator, report: Report) -> None:
    report.invalid_frees = (sum(sc.stats.invalid_frees for sc in alloc.size_classes)
                            + alloc.unknown_invalid_frees)
    report.corruption_detected = sum(sc.stats.corruption_detected for sc in alloc.size_classes)
    report.live = alloc.live_count()


# -- trace runner ------------------------------------------------------------------


class TraceRunner:
    """Executes ops against the allocator, checking the client-visible contract
    after every op and sweeping structural invariants every check_every ops."""

    def __init__(self, alloc: Allocator, shadow: ShadowModel, check_every: int = 64,
                 sweep_global: bool = True):
        self.alloc = alloc
        self.shadow = shadow
        self.check_every = check_every
        self.sweep_global = sweep_global
        self.report = Report()
        self._trace: list[str] = []  # outcome log feeding the determinism digest
        self._arena_for_tag: dict[int, int] = {}
        self.results: list[str] = []

    def _arena(self, tag: int) -> int:
        # Tags bind to arenas in first-seen round-robin order, mirroring the
        # frontend's thread assignment, so replay stays deterministic.
        arena = self._arena_for_tag.get(tag)
        if arena is None:
            arena = len(self._arena_for_tag) % self.alloc.cfg.nb_arenas
            self._arena_for_tag[tag] = arena
        return arena

    def _violation(self, msg: str) -> None:
        self.report.violations.append(msg)

    def _check_new_block(self, op_no: int, op: TraceOp, addr: int | None,
                         requested: int, alignment: int) -> ShadowBlock | None:
        if addr is None:
            self.report.nulls += 1
            # Remember the null result so later ops on this id behave like
            # client code holding a NULL pointer.
            self.shadow.blocks[op.id] = ShadowBlock(op.id, None, requested, 0, live=False)
            self._log(op_no, op.kind, op.id, "null")
            return None
        if addr % alignment != 0:
            self._violation(f"op {op_no}: block {op.id} at {addr:#x} not {alignment}-aligned")
        usable = self.alloc.malloc_usable_size(addr)
        if usable < requested:
            self._violation(f"op {op_no}: usable {usable} < requested {requested}")
        data = self.alloc.read(addr, requested)
        if data.count(0) != requested:
            self._violation(f"op {op_no}: block {op.id} not zero-filled")
        block = ShadowBlock(op.id, addr, requested, usable)
        overlap = self.shadow.add(block)
        if overlap:
            self._violation(f"op {op_no}: {overlap}")
        self._log(op_no, op.kind, op.id, f"{addr:#x}")
        return block

    def _log(self, op_no: int, kind: str, block_id: int, result: str) -> None:
        line = f"{op_no} {kind} {block_id} {result}"
        self._trace.append(line)
        self.results.append(line)

    def run_op(self, op_no: int, op: TraceOp) -> None:
        self._dispatch(op_no, op)
        self.report.ops += 1
        if self.check_every and self.report.ops % self.check_every == 0:
            self.sweep()

    def _dispatch(self, op_no: int, op: TraceOp) -> None:
        alloc, shadow = self.alloc, self.shadow
        kind = op.kind
        if kind == "a":
            self._check_new_block(op_no, op, alloc.malloc(op.args[0], arena=self._arena(op.thread)),
                                  op.args[0], 16)
        elif kind == "ca":
            n, size = op.args
            addr = alloc.calloc(n, size, arena=self._arena(op.thread))
            self._check_new_block(op_no, op, addr, n * size, 16)
        elif kind == "ma":
            align, size = op.args
            addr = alloc.aligned_alloc(align, size, arena=self._arena(op.thread))
            self._check_new_block(op_no, op, addr, size, max(align, 16))
        elif kind == "f":
            block = shadow.blocks.get(op.id)
            if block is None:
                raise TraceError(f"op {op_no}: free of unknown id {op.id}")
            if block.addr is None:  # free(NULL) is a no-op
                outcome = alloc.free(None)
                self._log(op_no, kind, op.id, outcome.value)
                return
            victim = None if block.live else shadow.block_at(block.addr)
            outcome = alloc.free(block.addr)
            if block.live:
                if outcome is FreeOutcome.INVALID:
                    self._violation(f"op {op_no}: live block {op.id} rejected as invalid")
                shadow.drop(block)
            elif victim is not None:
                # The stale address was handed out again: this double free hits
                # the new owner, which no allocator can tell apart from a valid
                # free.  Mirror that in the shadow instead of flagging it.
                if outcome is not FreeOutcome.INVALID:
                    shadow.drop(victim)
            else:
                if outcome is not FreeOutcome.INVALID:
                    self._violation(f"op {op_no}: double free of {op.id} reported {outcome.value}")
            self._log(op_no, kind, op.id, outcome.value)
        elif kind == "ra":
            new_size = op.args[0]
            block = shadow.blocks.get(op.id)
            if block is None:
                raise TraceError(f"op {op_no}: realloc of unknown id {op.id}")
            if block.addr is None:
                # realloc(NULL, n) behaves as malloc(n)
                addr = alloc.realloc(None, new_size, arena=self._arena(op.thread))
                self._check_new_block(op_no, op, addr, new_size, 16)
                return
            if not block.live:
                victim = shadow.block_at(block.addr)
                addr = alloc.realloc(block.addr, new_size, arena=self._arena(op.thread))
                if victim is not None:
                    if addr is not None and addr != victim.addr:
                        shadow.drop(victim)  # stale-address realloc moved the new owner
                elif addr is not None:
                    self._violation(f"op {op_no}: realloc revived dead block {op.id}")
                self._log(op_no, kind, op.id, "null" if addr is None else f"{addr:#x}")
                return
            addr = alloc.realloc(block.addr, new_size, arena=self._arena(op.thread))
            if new_size == 0:
                shadow.drop(block)
                self._log(op_no, kind, op.id, "freed")
                return
            if addr is None:
                self._log(op_no, kind, op.id, "null")  # old block stays live
                return
            old = dict(block.written)
            old_usable = block.usable
            if addr == block.addr:
                block.requested = new_size
                self._log(op_no, kind, op.id, f"{addr:#x}")
                return
            shadow.drop(block)
            keep = min(old_usable, new_size)
            fresh = ShadowBlock(op.id, addr, new_size, self.alloc.malloc_usable_size(addr))
            fresh.written = {off: b for off, b in old.items() if off < keep}
            if fresh.usable < new_size:
                self._violation(f"op {op_no}: realloc usable {fresh.usable} < {new_size}")
            if addr % 16 != 0:
                self._violation(f"op {op_no}: realloc result {addr:#x} not 16-aligned")
            overlap = self.shadow.add(fresh)
            if overlap:
                self._violation(f"op {op_no}: {overlap}")
            got = self.alloc.read(addr, keep)
            expect = bytes(old.get(i, 0) for i in range(keep))
            if got != expect:
                self._violation(f"op {op_no}: realloc copy mismatch for {op.id}")
            self._log(op_no, kind, op.id, f"{addr:#x}")
        elif kind == "w":
            off, byte = op.args
            block = shadow.blocks.get(op.id)
            if block is None:
                raise TraceError(f"op {op_no}: write to unknown id {op.id}")
            if block.addr is None:  # store through NULL
                self.report.faults += 1
                self._log(op_no, kind, op.id, "fault:null")
                return
            try:
                alloc.write(block.addr + off, bytes([byte]))
            except Fault as f:
                self.report.faults += 1
                self._log(op_no, kind, op.id, f"fault:{f.kind.value}")
                return
            if block.live and off < block.usable:
                block.written[off] = byte
            self._log(op_no, kind, op.id, "ok")
        elif kind == "r":
            off = op.args[0]
            block = shadow.blocks.get(op.id)
            if block is None:
                raise TraceError(f"op {op_no}: read of unknown id {op.id}")
            if block.addr is None:  # load through NULL
                self.report.faults += 1
                self._log(op_no, kind, op.id, "fault:null")
                return
            try:
                data = alloc.read(block.addr + off, 1)
            except Fault as f:
                self.report.faults += 1
                self._log(op_no, kind, op.id, f"fault:{f.kind.value}")
                return
            if block.live and off < block.usable:
                expect = block.written.get(off, 0)
                if data[0] != expect:
                    self._violation(f"op {op_no}: block {op.id} byte {off} is "
                                    f"{data[0]:#x}, client wrote {expect:#x}")
            self._log(op_no, kind, op.id, f"{data[0]:#04x}")
        elif kind == "us":
            block = shadow.blocks.get(op.id)
            if block is None:
                raise TraceError(f"op {op_no}: usable-size of unknown id {op.id}")
            usable = alloc.malloc_usable_size(block.addr)  # None -> 0
            if block.live and usable != block.usable:
                self._violation(f"op {op_no}: usable {usable} != shadow {block.usable}")
            if not block.live and usable != 0:
                self._violation(f"op {op_no}: dead block {op.id} reports usable {usable}")
            self._log(op_no, kind, op.id, str(usable))
        else:  # pragma: no cover
            raise TraceError(f"op {op_no}: unhandled kind {kind}")

    def sweep(self) -> None:
        if self.sweep_global:
            self.report.violations.extend(self.alloc.validate())
        self.report.violations.extend(self._stats_agreement())

    def _stats_agreement(self) -> list[str]:
        """The allocator's per-class live counters must match the shadow."""
        alloc = self.alloc
        per_class = [0] * len(alloc.size_classes)
        large = 0
        base = alloc.data_region.base
        end = base + alloc.data_region.length_bytes
        for block in self.shadow.live_blocks():
            if base <= block.addr < end:
                per_class[(block.addr - base) // alloc.span_bytes] += 1
            else:
                large += 1
        problems = []
        for i, sc in enumerate(alloc.size_classes):
            if sc.stats.live != per_class[i]:
                problems.append(f"class {i}: allocator live {sc.stats.live} != shadow {per_class[i]}")
        if len(alloc.large.map) != large:
            problems.append(f"large: allocator {len(alloc.large.map)} != shadow {large}")
        return problems

    def finish(self) -> Report:
        self.sweep()
        _collect_counters(self.alloc, self.report)
        payload = "\n".join(self._trace) + "\n" + self.alloc.stats_csv()
        payload += "\n".join(self.report.violations)
        self.report.digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
        return self.report


# -- entry points -------------------------------------------------------------------


def replay(ops: list[TraceOp], cfg: AllocConfig | None = None, provider=None,
           check_every: int = 64) -> Report:
    """Run a trace against a fresh allocator.

    Thread tags are simulated deterministically on one thread: each tag is
    bound to an arena in first-seen order, so cross-thread frees are
    exercised while identical inputs give identical reports.
    """
    alloc = Allocator(cfg or default_config(), provider or SimProvider())
    runner = TraceRunner(alloc, ShadowModel(), check_every=check_every)
    t0 = time.perf_counter()
    for op_no, op in enumerate(ops):
        runner.run_op(op_no, op)
    report = runner.finish()
    report.seconds = time.perf_counter() - t0
    return report


_FUZZ_SIZES = (0, 1, 8, 15, 16, 17, 24, 31, 32, 33, 48, 64, 100, 128, 200, 256,
               500, 512, 1000, 1024, 2000, 2048, 3000, 4000, 4088, 4096, 4097,
               5000, 6000, 8000, 8192)
_FUZZ_ALIGNS = (16, 32, 64, 128, 256, 512, 1024, 2048, 4096)


def _fuzz_ops(rng: random.Random, n_ops: int, id_base: int, thread: int):
    """Deterministic op stream over this thread's own blocks only."""
    live: list[int] = []
    next_id = id_base
    for _ in range(n_ops):
        roll = rng.random()
        if live and roll < 0.35:
            i = rng.randrange(len(live))
            block = live[i]
            live[i] = live[-1]
            live.pop()
            yield TraceOp(thread, "f", block)
        elif live and roll < 0.45:
            block = live[rng.randrange(len(live))]
            yield TraceOp(thread, "w", block, (rng.randrange(8), rng.randrange(256)))
        elif live and roll < 0.50:
            block = live[rng.randrange(len(live))]
            yield TraceOp(thread, "r", block, (rng.randrange(8),))
        elif live and roll < 0.55:
            i = rng.randrange(len(live))
            size = rng.choice(_FUZZ_SIZES)
            block = live[i]
            if size == 0:  # realloc-to-zero frees the block
                live[i] = live[-1]
                live.pop()
            yield TraceOp(thread, "ra", block, (size,))
        elif roll < 0.85:
            next_id += 1
            live.append(next_id)
            yield TraceOp(thread, "a", next_id, (rng.choice(_FUZZ_SIZES),))
        elif roll < 0.95:
            next_id += 1
            live.append(next_id)
            yield TraceOp(thread, "ma", next_id,
                          (rng.choice(_FUZZ_ALIGNS), rng.choice(_FUZZ_SIZES)))
        else:
            next_id += 1
            live.append(next_id)
            yield TraceOp(thread, "ca", next_id, (rng.randrange(1, 8), rng.randrange(0, 64)))


def fuzz(seed: int, n_ops: int, n_threads: int, cfg: AllocConfig | None = None,
         provider=None, check_every: int = 64) -> Report:
    """Random op streams over a shared allocator; one stream per thread.

    Global invariants are swept mid-flight only when single-threaded;
    multithreaded runs check them at the quiescent point after join.
    """
    alloc = Allocator(cfg or default_config(), provider or SimProvider())
    single = n_threads == 1
    shadows = [ShadowModel() for _ in range(n_threads)]
    runners = [TraceRunner(alloc, shadows[t], check_every=check_every if single else 0)
               for t in range(n_threads)]
    errors: list[BaseException] = []
    t0 = time.perf_counter()

    def work(t: int) -> None:
        rng = random.Random((seed << 8) ^ t)
        try:
            for op_no, op in enumerate(_fuzz_ops(rng, n_ops, t * 10_000_000, t)):
                runners[t].run_op(op_no, op)
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    if single:
        work(0)
    else:
        threads = [threading.Thread(target=work, args=(t,)) for t in range(n_threads)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    if errors:
        raise errors[0]

    merged = Report()
    for r in runners:
        rep = r.report
        merged.ops += rep.ops
        merged.nulls += rep.nulls
        merged.faults += rep.faults
        merged.violations.extend(rep.violations)
    merged.violations.extend(merged_disjoint(shadows))
    merged.violations.extend(alloc.validate())
    # Final stats agreement over the union of the per-thread shadows.
    union = ShadowModel()
    for sh in shadows:
        union.blocks.update(sh.blocks)
    checker = TraceRunner(alloc, union, check_every=0)
    merged.violations.extend(checker._stats_agreement())
    _collect_counters(alloc, merged)
    payload = "\n".join("\n".join(r._trace) for r in runners) + alloc.stats_csv()
    merged.digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
    merged.seconds = time.perf_counter() - t0
    return merged


# -- exploit scenarios ----------------------------------------------------------------


@dataclass
class ScenarioResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ExploitReport:
    scenarios: list[ScenarioResult] = field(default_factory=list)
    benign_clean: bool = False

    @property
    def ok(self) -> bool:
        return self.benign_clean and all(s.passed for s in self.scenarios)


def _exploit_cfg(base: AllocConfig | None) -> AllocConfig:
    if base is not None:
        return base
    return AllocConfig(slabs_per_class=64, quarantine_capacity=2)


def _heap_fingerprint(sc: SizeClass) -> tuple:
    """Metadata state modulo counters: bitmaps, statuses, quarantine order."""
    cells = sc.cells
    return (
        tuple(tuple(bm._words) if bm else None for bm in sc.bitmaps[:cells.last_used]),
        tuple(cells.status(i) for i in range(cells.last_used)),
        tuple(cells.iter_list(SlabStatus.QUARANTINE)),
        sc.stats.live,
    )


def exploit_suite(cfg: AllocConfig | None = None) -> ExploitReport:
    """Five required attack scenarios plus a benign control run."""
    report = ExploitReport()

    def record(name: str, passed: bool, detail: str) -> None:
        report.scenarios.append(ScenarioResult(name, passed, detail))

    # (1) double free: detected, metadata unchanged
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    p = alloc.malloc(24)
    first = alloc.free(p)
    sc = alloc.size_classes[(p - alloc.data_region.base) // alloc.span_bytes]
    before = _heap_fingerprint(sc)
    second = alloc.free(p)
    clean = not alloc.validate()
    record("double_free",
           first is FreeOutcome.FREED and second is FreeOutcome.INVALID
           and _heap_fingerprint(sc) == before and clean,
           f"first={first.value} second={second.value} metadata_unchanged="
           f"{_heap_fingerprint(sc) == before}")

    # (2) write-after-free, then reallocation: poisoned slot never handed out
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    a = alloc.malloc(24)
    b = alloc.malloc(24)  # keeps the slab partial after a is freed
    alloc.free(a)
    alloc.write(a, b"\x41")  # use-after-free write into the freed slot
    c = alloc.malloc(24)
    sc = alloc.size_classes[(a - alloc.data_region.base) // alloc.span_bytes]
    zeros = c is not None and alloc.read(c, 24) == bytes(24)
    record("write_after_free",
           c is not None and c != a and zeros and sc.stats.corruption_detected >= 1,
           f"reused={c == a} corruption_detected={sc.stats.corruption_detected}")

    # (3) linear overflow within the slot: canary catches it at free
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    p = alloc.malloc(24)
    usable = alloc.malloc_usable_size(p)
    alloc.write(p + usable, b"\x41")  # one byte past the usable area
    outcome = alloc.free(p)
    record("overflow_canary", outcome is FreeOutcome.CORRUPT_CANARY,
           f"free outcome={outcome.value}")

    # (4) large linear overflow past the slab: guard page faults
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    p = alloc.malloc(4000)  # one-slot slab; the next slab index is a guard
    try:
        alloc.write(p + PAGE_SIZE - 8, bytes(16))  # crosses into the guard page
        record("guard_page", False, "overflow write did not fault")
    except Fault as f:
        record("guard_page", f.kind.value == "prot_none", f"fault={f.kind.value}")

    # (5) freed-to-empty slab cools off: pages released, FIFO reuse only
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    region = alloc.data_region
    p1 = alloc.malloc(24)
    page1 = (p1 - region.base) // PAGE_SIZE
    resident_before = region.page_resident(page1)
    alloc.free(p1)  # slab -> quarantine, page released
    released = not region.page_resident(page1)
    p2 = alloc.malloc(24)
    no_reuse = (p2 - region.base) // PAGE_SIZE != page1
    # Overflow the quarantine (capacity 2): the oldest slab recycles first.
    alloc.free(p2)
    p3 = alloc.malloc(24)
    alloc.free(p3)  # third enqueue dequeues the oldest (p1's slab)
    p4 = alloc.malloc(24)
    fifo_reuse = (p4 - region.base) // PAGE_SIZE == page1
    record("quarantine_cooling",
           resident_before and released and no_reuse and fifo_reuse,
           f"released={released} no_reuse={no_reuse} fifo_reuse={fifo_reuse}")

    # Benign control: a clean workload must report zero detections.
    alloc = Allocator(_exploit_cfg(cfg), SimProvider())
    rng = random.Random(1234)
    live: list[tuple[int, int]] = []
    for _ in range(400):
        if live and rng.random() < 0.5:
            addr, _size = live.pop(rng.randrange(len(live)))
            alloc.free(addr)
        else:
            size = rng.choice((8, 16, 24, 48, 100, 256, 1024, 2048))
            addr = alloc.malloc(size)
            if addr is not None:
                usable = alloc.malloc_usable_size(addr)
                alloc.write(addr + rng.randrange(usable), bytes([rng.randrange(256)]))
                live.append((addr, size))
    for addr, _size in live:
        alloc.free(addr)
    detections = (sum(sc.stats.corruption_detected for sc in alloc.size_classes)
                  + sum(sc.stats.invalid_frees for sc in alloc.size_classes)
                  + alloc.unknown_invalid_frees)
    report.benign_clean = detections == 0 and not alloc.validate()
    return report
