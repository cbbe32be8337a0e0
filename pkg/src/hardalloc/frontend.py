"""Public allocator API: malloc / free / calloc / realloc / aligned_alloc /
usable_size with arena dispatch and the region-membership free path.

One data reservation holds every arena's size-class spans contiguously, so
routing a free is pure arithmetic on (address - region base); anything
outside the region must be a large allocation and is settled by map lookup.
"""
from __future__ import annotations

import logging
import threading
from enum import Enum

from .config import (PAGE_SIZE, AllocConfig, InvalidFreePolicy, class_fits_alignment,
                     class_index_for, default_config)
from .large import LargeAllocator
from .provider import SimProvider
from .sizeclass import ZERO_CHECK_FAILED, FreeResult, SizeClass

log = logging.getLogger("hardalloc")

SIZE_MAX = 2 ** 64 - 1


class HeapCorruptionAbort(RuntimeError):
    """Raised under the Abort policy; the CLI turns it into a nonzero exit."""


class FreeOutcome(Enum):
    FREED = "freed"
    INVALID = "invalid"
    CORRUPT_CANARY = "corrupt_canary"
    NOOP = "noop"  # free(NULL)


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


class Allocator:
    def __init__(self, cfg: AllocConfig | None = None, provider=None):
        self.cfg = cfg or default_config()
        self.provider = provider if provider is not None else SimProvider()
        cfg = self.cfg
        nb = cfg.nb_arenas * cfg.nb_classes
        self.span_pages = cfg.slabs_per_class
        self.span_bytes = self.span_pages * PAGE_SIZE
        # Exactly two reservations: client data, and the metadata arena.
        self.data_region = self.provider.reserve(nb * self.span_bytes)
        large_pool = 1 << 16
        md_pages = nb + (large_pool * 48 + PAGE_SIZE - 1) // PAGE_SIZE
        self.metadata_region = self.provider.reserve(md_pages * PAGE_SIZE)
        self.size_classes = tuple(
            SizeClass(cfg, c, self.data_region, (a * cfg.nb_classes + c) * self.span_pages)
            for a in range(cfg.nb_arenas)
            for c in range(cfg.nb_classes)
        )
        self.large = LargeAllocator(self.provider, pool_capacity=large_pool)
        self._tl = threading.local()
        self._arena_counter = 0
        self._arena_lock = threading.Lock()
        self.unknown_invalid_frees = 0

    # -- arena routing ---------------------------------------------------------

    def arena_of_current_thread(self) -> int:
        try:
            return self._tl.arena
        except AttributeError:
            with self._arena_lock:
                arena = self._arena_counter % self.cfg.nb_arenas
                self._arena_counter += 1
            self._tl.arena = arena
            return arena

    def _class_at(self, arena: int, class_index: int) -> SizeClass:
        return self.size_classes[arena * self.cfg.nb_classes + class_index]

    # -- allocation ------------------------------------------------------------

    def malloc(self, size: int, *, arena: int | None = None) -> int | None:
        return self.aligned_alloc(16, size, arena=arena)

    def aligned_alloc(self, alignment: int, size: int, *, arena: int | None = None) -> int | None:
        if not _is_pow2(alignment) or alignment > PAGE_SIZE:
            return None
        alignment = max(alignment, 16)
        first = class_index_for(size, alignment, self.cfg)
        if first is None:
            return self.large.malloc(size)  # page-aligned, so any alignment here holds
        if arena is None:
            arena = self.arena_of_current_thread()
        cfg = self.cfg
        for c in range(first, cfg.nb_classes):
            if not class_fits_alignment(cfg.sc_sizes[c], alignment):
                continue
            sc = self._class_at(arena, c)
            with sc.lock:
                off = sc.malloc()
            if off is ZERO_CHECK_FAILED:
                return None
            if off is not None:
                return self.data_region.base + off
        return None  # arena exhausted; larger classes could not serve either

    def calloc(self, n: int, size: int, *, arena: int | None = None) -> int | None:
        if n < 0 or size < 0:
            return None
        total = n * size
        if total > SIZE_MAX:  # size_t overflow in the C contract
            return None
        return self.malloc(total, arena=arena)

    def realloc(self, address: int | None, new_size: int, *, arena: int | None = None) -> int | None:
        if address is None:
            return self.malloc(new_size, arena=arena)
        if new_size == 0:
            self.free(address)
            return None
        old_usable = self._usable_of(address)
        if old_usable is None:
            self._policy_event(f"realloc of invalid pointer {address:#x}")
            return None
        if self._in_data_region(address):
            current_class = (address - self.data_region.base) // self.span_bytes % self.cfg.nb_classes
            if class_index_for(new_size, 16, self.cfg) == current_class:
                return address  # same class: the slot already fits
        fresh = self.malloc(new_size, arena=arena)
        if fresh is None:
            return None  # old block stays live
        ncopy = min(old_usable, new_size)
        if ncopy:
            self.provider.write(fresh, self.provider.read(address, ncopy))
        self.free(address)
        return fresh

    # -- deallocation ------------------------------------------------------------

    def _in_data_region(self, address: int) -> bool:
        base = self.data_region.base
        return base <= address < base + self.data_region.length_bytes

    def free(self, address: int | None) -> FreeOutcome:
        if address is None or address == 0:
            return FreeOutcome.NOOP
        if self._in_data_region(address):
            rel = address - self.data_region.base
            sc = self.size_classes[rel // self.span_bytes]
            with sc.lock:
                res = sc.free(rel)
            if res is FreeResult.INVALID:
                self._policy_event(f"invalid free of {address:#x} (size class {sc.slot_size})")
                return FreeOutcome.INVALID
            if res is FreeResult.CORRUPT_CANARY:
                self._policy_event(f"canary corrupted at {address:#x} (size class {sc.slot_size})")
                return FreeOutcome.CORRUPT_CANARY
            return FreeOutcome.FREED
        if self.large.free(address):
            return FreeOutcome.FREED
        self.unknown_invalid_frees += 1
        self._policy_event(f"invalid free of unknown address {address:#x}")
        return FreeOutcome.INVALID

    def _policy_event(self, message: str) -> None:
        policy = self.cfg.invalid_free_policy
        if policy is InvalidFreePolicy.IGNORE:
            return
        if policy is InvalidFreePolicy.REPORT:
            log.warning("%s", message)
            return
        raise HeapCorruptionAbort(message)

    # -- introspection -------------------------------------------------------------

    def _usable_of(self, address: int) -> int | None:
        if self._in_data_region(address):
            rel = address - self.data_region.base
            sc = self.size_classes[rel // self.span_bytes]
            with sc.lock:
                return sc.probe(rel)
        return self.large.usable(address)

    def malloc_usable_size(self, address: int | None) -> int:
        if address is None:
            return 0
        usable = self._usable_of(address)
        return usable if usable is not None else 0

    def read(self, address: int, length: int) -> bytes:
        return self.provider.read(address, length)

    def write(self, address: int, data: bytes) -> None:
        self.provider.write(address, data)

    def stats_rows(self) -> list[dict]:
        rows = []
        for a in range(self.cfg.nb_arenas):
            for c in range(self.cfg.nb_classes):
                row = {"arena": a, "class_index": c}
                row.update(self._class_at(a, c).stats_row())
                rows.append(row)
        return rows

    def stats_csv(self) -> str:
        header = "arena,class_index,slot_size,live,slabs_used,quarantined,corruption_detected"
        lines = [header]
        for r in self.stats_rows():
            lines.append(f"{r['arena']},{r['class_index']},{r['slot_size']},{r['live']},"
                         f"{r['slabs_used']},{r['quarantined']},{r['corruption_detected']}")
        return "\n".join(lines) + "\n"

    def live_count(self) -> int:
        return sum(sc.stats.live for sc in self.size_classes) + len(self.large.map)

    def validate(self) -> list[str]:
        problems: list[str] = []
        for sc in self.size_classes:
            with sc.lock:
                problems.extend(sc.validate())
        problems.extend(self.large.validate())
        # Live address ranges across both paths must be pairwise disjoint.
        spans = [(self.data_region.base, self.data_region.length_bytes, "data"),
                 (self.metadata_region.base, self.metadata_region.length_bytes, "metadata")]
        spans.extend((addr, length, "large") for addr, length in self.large.live_spans())
        spans.sort()
        for (a0, l0, n0), (a1, _l1, n1) in zip(spans, spans[1:]):
            if a0 + l0 > a1:
                problems.append(f"span overlap: {n0} at {a0:#x}+{l0} vs {n1} at {a1:#x}")
        return problems
