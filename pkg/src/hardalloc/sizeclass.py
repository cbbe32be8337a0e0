"""One size class: data span, slab cell lists, per-slab bitmaps, one lock.

Slot allocation prefers partially filled slabs, then empty ones, then
extends the watermark (interleaving inaccessible guard slabs), and only
fails once every non-guard slab is full or cooling off in quarantine.
Frees locate the slot by pure arithmetic, verify the canary, zero the
slot, and push freed-empty slabs through the quarantine FIFO with their
pages returned to the OS.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .arraylist import SlabStatus, StatusArrayList
from .bitmap import SlotBitmap
from .config import PAGE_SIZE, AllocConfig, usable_size_of_class
from .locking import DebugLock
from .provider import PagePerm
from . import slab as slabops


class FreeResult(Enum):
    FREED = "freed"
    INVALID = "invalid"
    CORRUPT_CANARY = "corrupt_canary"


# Distinct from None (= class exhausted): the strict zero-check mode failed
# this request after poisoning the corrupted slot.
ZERO_CHECK_FAILED = object()


@dataclass
class SizeClassStats:
    allocs: int = 0
    frees: int = 0
    live: int = 0
    invalid_frees: int = 0
    corruption_detected: int = 0
    quarantine_recycles: int = 0


class SizeClass:
    def __init__(self, cfg: AllocConfig, class_index: int, region, base_page: int):
        self.cfg = cfg
        self.class_index = class_index
        self.slot_size = cfg.sc_sizes[class_index]
        self.usable_size = usable_size_of_class(class_index, cfg)
        self.slot_count = slabops.slot_count(self.slot_size)
        self.region = region
        self.base_page = base_page
        self.base_offset = base_page * PAGE_SIZE
        self.capacity = cfg.slabs_per_class
        self.cells = StatusArrayList(self.capacity)
        self.bitmaps: list[SlotBitmap | None] = [None] * self.capacity
        self.lock = DebugLock()
        self.stats = SizeClassStats()
        # Slots that failed the zero-check: held allocated forever, never handed out.
        self.poisoned: dict[int, set[int]] = {}

    # -- helpers --------------------------------------------------------------

    def _is_guard_index(self, i: int) -> bool:
        g = self.cfg.guard_interval
        return g >= 2 and i % g == g - 1

    def _slot_ref(self, slab: int, slot: int) -> slabops.SlotRef:
        return slabops.SlotRef(self.region, self.base_offset, slab, slot, self.slot_size)

    def _offset_of(self, slab: int, slot: int) -> int:
        return self.base_offset + slab * PAGE_SIZE + slot * self.slot_size

    def _extend(self) -> int | None:
        """Bring the next data slab into service, materializing guard slabs
        around it so a linear overrun off the fresh slab faults."""
        while self.cells.last_used < self.capacity and self._is_guard_index(self.cells.last_used):
            self._make_guard()
        idx = self.cells.extend(SlabStatus.EMPTY)
        if idx is None:
            return None
        self.bitmaps[idx] = SlotBitmap(self.slot_count)
        while self.cells.last_used < self.capacity and self._is_guard_index(self.cells.last_used):
            self._make_guard()
        return idx

    def _make_guard(self) -> None:
        gi = self.cells.extend(SlabStatus.GUARD)
        self.region.protect(self.base_page + gi, 1, PagePerm.NONE)

    def _transition_after_alloc(self, slab: int, bm: SlotBitmap) -> None:
        cur = self.cells.status(slab)
        if bm.is_full():
            if cur is not SlabStatus.FULL:
                self.cells.move(slab, SlabStatus.FULL)
        elif cur is SlabStatus.EMPTY:
            self.cells.move(slab, SlabStatus.PARTIAL)

    # -- operations -----------------------------------------------------------

    def malloc(self):
        """Pick a slot; returns its region-relative byte offset.

        Caller holds the class lock.  Returns None on exhaustion, or the
        ZERO_CHECK_FAILED sentinel in strict mode when corrupted memory
        failed the request.
        """
        cells = self.cells
        while True:
            slab = cells.head(SlabStatus.PARTIAL)
            if slab is None:
                slab = cells.head(SlabStatus.EMPTY)
            if slab is None and cells.quarantine_len > self.cfg.quarantine_capacity:
                slab = cells.dequeue_quarantine()
                if slab is not None:
                    self.stats.quarantine_recycles += 1
            if slab is None:
                slab = self._extend()
            if slab is None:
                return None
            bm = self.bitmaps[slab]
            slot = bm.find_first_available()
            if self.cfg.zero_check_enabled and not slabops.is_slot_zero(
                    self._slot_ref(slab, slot), self.usable_size):
                # Corrupted while free: quarantine the slot itself and retry.
                bm.set_allocated(slot)
                self.poisoned.setdefault(slab, set()).add(slot)
                self.stats.corruption_detected += 1
                self._transition_after_alloc(slab, bm)
                if self.cfg.zero_check_fail_request:
                    return ZERO_CHECK_FAILED
                continue
            bm.set_allocated(slot)
            if self.cfg.canary_enabled:
                slabops.write_canary(self._slot_ref(slab, slot), self.cfg.canary_magic)
            self._transition_after_alloc(slab, bm)
            self.stats.allocs += 1
            self.stats.live += 1
            return self._offset_of(slab, slot)

    def free(self, offset: int) -> FreeResult:
        """Free the slot at a region-relative byte offset; caller holds the lock."""
        loc = slabops.locate(self.base_offset, self.slot_size, offset)
        if loc is None:
            self.stats.invalid_frees += 1
            return FreeResult.INVALID
        slab, slot = loc
        if self.cells.status(slab) not in (SlabStatus.PARTIAL, SlabStatus.FULL):
            self.stats.invalid_frees += 1
            return FreeResult.INVALID
        bm = self.bitmaps[slab]
        if bm.is_available(slot) or slot in self.poisoned.get(slab, ()):
            # Double free or a slot the client never owned: bitmap unchanged.
            self.stats.invalid_frees += 1
            return FreeResult.INVALID
        ref = self._slot_ref(slab, slot)
        result = FreeResult.FREED
        if self.cfg.canary_enabled and not slabops.check_canary(ref, self.cfg.canary_magic):
            self.stats.corruption_detected += 1
            result = FreeResult.CORRUPT_CANARY
        slabops.zero_slot(ref)
        bm.set_available(slot)
        self.stats.frees += 1
        self.stats.live -= 1
        if bm.is_empty():
            self.cells.move(slab, SlabStatus.EMPTY)
            self.cells.enqueue_quarantine(slab)
            self.region.release_pages(self.base_page + slab, 1)
            if self.cells.quarantine_len > self.cfg.quarantine_capacity:
                self.cells.dequeue_quarantine()
                self.stats.quarantine_recycles += 1
        elif self.cells.status(slab) is SlabStatus.FULL:
            self.cells.move(slab, SlabStatus.PARTIAL)
        return result

    def probe(self, offset: int) -> int | None:
        """Usable size when offset names a live allocated slot, else None."""
        loc = slabops.locate(self.base_offset, self.slot_size, offset)
        if loc is None:
            return None
        slab, slot = loc
        if self.cells.status(slab) not in (SlabStatus.PARTIAL, SlabStatus.FULL):
            return None
        if self.bitmaps[slab].is_available(slot) or slot in self.poisoned.get(slab, ()):
            return None
        return self.usable_size

    # -- validation -----------------------------------------------------------

    def validate(self) -> list[str]:
        """Status/content agreement, guard placement, quarantine residency."""
        tag = f"class[{self.class_index}] size {self.slot_size}"
        problems = [f"{tag}: {p}" for p in self.cells.validate()]
        live_bits = 0
        for i in range(self.cells.last_used):
            st = self.cells.status(i)
            if (st is SlabStatus.GUARD) != self._is_guard_index(i):
                problems.append(f"{tag}: slab {i} guard placement violated ({st.name})")
            bm = self.bitmaps[i]
            if st is SlabStatus.GUARD:
                if self.region.page_perm(self.base_page + i) is not PagePerm.NONE:
                    problems.append(f"{tag}: guard slab {i} is accessible")
                continue
            if bm is None:
                problems.append(f"{tag}: slab {i} in service without a bitmap")
                continue
            allocated = bm.count_allocated()
            live_bits += allocated
            if st is SlabStatus.EMPTY and allocated != 0:
                problems.append(f"{tag}: empty slab {i} has {allocated} allocated slots")
            elif st is SlabStatus.PARTIAL and not 0 < allocated < self.slot_count:
                problems.append(f"{tag}: partial slab {i} has {allocated}/{self.slot_count}")
            elif st is SlabStatus.FULL and allocated != self.slot_count:
                problems.append(f"{tag}: full slab {i} has {allocated}/{self.slot_count}")
            elif st is SlabStatus.QUARANTINE:
                if allocated != 0:
                    problems.append(f"{tag}: quarantined slab {i} has allocated slots")
                if self.region.page_resident(self.base_page + i):
                    problems.append(f"{tag}: quarantined slab {i} still resident")
        poisoned_count = sum(len(s) for s in self.poisoned.values())
        if live_bits != self.stats.live + poisoned_count:
            problems.append(f"{tag}: {live_bits} allocated bits but live={self.stats.live} "
                            f"poisoned={poisoned_count}")
        if self.base_page + self.capacity > self.region.length_pages:
            problems.append(f"{tag}: data span exceeds the region")
        return problems

    def stats_row(self) -> dict:
        guards = sum(1 for i in range(self.cells.last_used) if self._is_guard_index(i))
        return {
            "slot_size": self.slot_size,
            "live": self.stats.live,
            "slabs_used": self.cells.last_used - guards,
            "quarantined": self.cells.quarantine_len,
            "corruption_detected": self.stats.corruption_detected,
        }
