"""Page-granular virtual memory with permission and residency tracking.

The simulated backend is the default test surface: guard-page and
quarantine behavior surface as structured Fault errors from checked
accesses instead of process signals.  The OS backend is a thin layer over
mmap/madvise/mprotect kept for the preload shim and smoke tests.
"""
from __future__ import annotations

import ctypes
import mmap as _mmap
import threading
from bisect import bisect_right
from enum import Enum

from .config import PAGE_SIZE


class PagePerm(Enum):
    NONE = 0
    READ_WRITE = 1


class FaultKind(Enum):
    PROT_NONE = "prot_none"
    OUT_OF_RANGE = "out_of_range"


class Fault(Exception):
    """Raised by checked access; never silently swallowed."""

    def __init__(self, region_id: int | None, page_index: int | None, kind: FaultKind):
        self.region_id = region_id
        self.page_index = page_index
        self.kind = kind
        super().__init__(f"fault {kind.value} region={region_id} page={page_index}")


class SimRegion:
    """A reserved span of pages; backing pages materialize on first write,
    mirroring lazily-backed virtual memory."""

    __slots__ = ("id", "base", "length_pages", "_perm", "_resident", "_nresident",
                 "_pages", "_lock", "_provider")

    def __init__(self, region_id: int, base: int, length_pages: int, provider: "SimProvider"):
        self.id = region_id
        self.base = base
        self.length_pages = length_pages
        self._perm = bytearray(b"\x01" * length_pages)  # 1 = ReadWrite, 0 = None
        self._resident = bytearray(length_pages)
        self._nresident = 0
        self._pages: dict[int, bytearray] = {}
        self._lock = threading.Lock()
        self._provider = provider

    @property
    def length_bytes(self) -> int:
        return self.length_pages * PAGE_SIZE

    def _check_pages(self, offset: int, length: int) -> tuple[int, int]:
        if offset < 0 or offset + length > self.length_bytes:
            raise Fault(self.id, offset // PAGE_SIZE if offset >= 0 else None, FaultKind.OUT_OF_RANGE)
        first = offset // PAGE_SIZE
        last = (offset + length - 1) // PAGE_SIZE
        perm = self._perm
        for p in range(first, last + 1):
            if not perm[p]:
                raise Fault(self.id, p, FaultKind.PROT_NONE)
        return first, last

    def checked_read(self, offset: int, length: int) -> bytes:
        if length == 0:
            return b""
        first, last = self._check_pages(offset, length)
        pages = self._pages
        if first == last:
            page = pages.get(first)
            if page is None:
                return bytes(length)
            start = offset - first * PAGE_SIZE
            return bytes(page[start:start + length])
        out = bytearray(length)
        pos = offset
        end = offset + length
        while pos < end:
            p = pos // PAGE_SIZE
            take = min(end, (p + 1) * PAGE_SIZE) - pos
            page = pages.get(p)
            if page is not None:
                start = pos - p * PAGE_SIZE
                out[pos - offset:pos - offset + take] = page[start:start + take]
            pos += take
        return bytes(out)

    def checked_write(self, offset: int, data: bytes) -> None:
        if not data:
            return
        first, last = self._check_pages(offset, len(data))
        pages = self._pages
        pos = offset
        end = offset + len(data)
        while pos < end:
            p = pos // PAGE_SIZE
            take = min(end, (p + 1) * PAGE_SIZE) - pos
            page = pages.get(p)
            if page is None:
                page = pages[p] = bytearray(PAGE_SIZE)
            start = pos - p * PAGE_SIZE
            page[start:start + take] = data[pos - offset:pos - offset + take]
            pos += take
        resident = self._resident
        touched = 0
        with self._lock:
            for p in range(first, last + 1):
                if not resident[p]:
                    resident[p] = 1
                    touched += 1
            if touched:
                self._nresident += touched
        if touched:
            self._provider._resident_delta(touched)

    def release_pages(self, first_page: int, n_pages: int) -> None:
        """Return pages to the OS: contents drop to zero, residency drops, perm kept."""
        if n_pages == 0:
            return
        if first_page < 0 or first_page + n_pages > self.length_pages:
            raise Fault(self.id, first_page, FaultKind.OUT_OF_RANGE)
        freed = 0
        with self._lock:
            for p in range(first_page, first_page + n_pages):
                self._pages.pop(p, None)
                if self._resident[p]:
                    self._resident[p] = 0
                    freed += 1
            self._nresident -= freed
        if freed:
            self._provider._resident_delta(-freed)

    def protect(self, first_page: int, n_pages: int, perm: PagePerm) -> None:
        if n_pages == 0:
            return
        if first_page < 0 or first_page + n_pages > self.length_pages:
            raise Fault(self.id, first_page, FaultKind.OUT_OF_RANGE)
        val = 1 if perm is PagePerm.READ_WRITE else 0
        with self._lock:
            for p in range(first_page, first_page + n_pages):
                self._perm[p] = val

    def resident_count(self) -> int:
        return self._nresident

    def page_perm(self, page: int) -> PagePerm:
        return PagePerm.READ_WRITE if self._perm[page] else PagePerm.NONE

    def page_resident(self, page: int) -> bool:
        return bool(self._resident[page])

    def _teardown(self) -> None:
        pass


class SimProvider:
    """Hands out SimRegions in a modeled virtual address space.

    Reservations are page-aligned, separated by an unmapped gap page, so
    absolute addresses can be resolved back to (region, offset) and
    accesses falling between reservations fault.
    """

    page_size = PAGE_SIZE

    def __init__(self, base_address: int = 0x1000_0000):
        self._next_base = base_address
        self._next_id = 0
        self._bases: list[int] = []
        self._regions: list[SimRegion] = []
        self._lock = threading.Lock()
        self.resident_total = 0
        self.resident_peak = 0

    def reserve(self, nbytes: int):
        if nbytes <= 0 or nbytes % PAGE_SIZE != 0:
            raise ValueError(f"reservation of {nbytes} bytes is not page-granular")
        with self._lock:
            base = self._next_base
            self._next_base = base + nbytes + PAGE_SIZE  # gap page between reservations
            region = self._make_region(self._next_id, base, nbytes // PAGE_SIZE)
            self._next_id += 1
            i = bisect_right(self._bases, base)
            self._bases.insert(i, base)
            self._regions.insert(i, region)
        return region

    def _make_region(self, region_id: int, base: int, pages: int):
        return SimRegion(region_id, base, pages, self)

    def unreserve(self, region) -> None:
        with self._lock:
            i = bisect_right(self._bases, region.base) - 1
            if i < 0 or self._regions[i] is not region:
                raise ValueError("region is not reserved by this provider")
            self._bases.pop(i)
            self._regions.pop(i)
            if region._nresident:
                self.resident_total -= region._nresident
        region._teardown()

    def resolve(self, address: int):
        """Map an absolute address to (region, offset); unmapped -> Fault."""
        with self._lock:
            i = bisect_right(self._bases, address) - 1
            if i >= 0:
                region = self._regions[i]
                off = address - region.base
                if off < region.length_bytes:
                    return region, off
        raise Fault(None, None, FaultKind.OUT_OF_RANGE)

    def read(self, address: int, length: int) -> bytes:
        if length == 0:
            return b""
        region, off = self.resolve(address)
        return region.checked_read(off, length)

    def write(self, address: int, data: bytes) -> None:
        if not data:
            return
        region, off = self.resolve(address)
        region.checked_write(off, data)

    def _resident_delta(self, delta: int) -> None:
        with self._lock:
            self.resident_total += delta
            if self.resident_total > self.resident_peak:
                self.resident_peak = self.resident_total


_PROT_NONE = 0
_PROT_RW = 3  # PROT_READ | PROT_WRITE


def _libc():
    try:
        return ctypes.CDLL(None, use_errno=True)
    except OSError:  # pragma: no cover
        return None


class OSRegion(SimRegion):
    """mmap-backed region; keeps the same bookkeeping tables so checked access
    stays testable while raw out-of-band access hits real page protections."""

    __slots__ = ("_mm", "_buf", "_data")

    def __init__(self, region_id: int, length_pages: int, provider: "OSProvider"):
        # Private anonymous mapping: madvise(DONTNEED) then drops the pages,
        # so released memory reads back as zeros like a fresh page.
        self._mm = _mmap.mmap(-1, length_pages * PAGE_SIZE,
                              flags=_mmap.MAP_PRIVATE | _mmap.MAP_ANONYMOUS)
        self._buf = ctypes.c_char.from_buffer(self._mm)
        addr = ctypes.addressof(self._buf)
        super().__init__(region_id, addr, length_pages, provider)
        self._data = memoryview(self._mm)

    def checked_read(self, offset: int, length: int) -> bytes:
        if length == 0:
            return b""
        self._check_pages(offset, length)
        return bytes(self._data[offset:offset + length])

    def checked_write(self, offset: int, data: bytes) -> None:
        if not data:
            return
        first, last = self._check_pages(offset, len(data))
        self._data[offset:offset + len(data)] = data
        touched = 0
        with self._lock:
            for p in range(first, last + 1):
                if not self._resident[p]:
                    self._resident[p] = 1
                    touched += 1
            self._nresident += touched
        if touched:
            self._provider._resident_delta(touched)

    def release_pages(self, first_page: int, n_pages: int) -> None:
        if n_pages == 0:
            return
        if first_page < 0 or first_page + n_pages > self.length_pages:
            raise Fault(self.id, first_page, FaultKind.OUT_OF_RANGE)
        self._mm.madvise(_mmap.MADV_DONTNEED, first_page * PAGE_SIZE, n_pages * PAGE_SIZE)
        freed = 0
        with self._lock:
            for p in range(first_page, first_page + n_pages):
                if self._resident[p]:
                    self._resident[p] = 0
                    freed += 1
            self._nresident -= freed
        if freed:
            self._provider._resident_delta(-freed)

    def protect(self, first_page: int, n_pages: int, perm: PagePerm) -> None:
        super().protect(first_page, n_pages, perm)
        libc = _libc()
        if libc is None or n_pages == 0:  # pragma: no cover
            return
        prot = _PROT_RW if perm is PagePerm.READ_WRITE else _PROT_NONE
        libc.mprotect(ctypes.c_void_p(self.base + first_page * PAGE_SIZE),
                      ctypes.c_size_t(n_pages * PAGE_SIZE), prot)

    def _teardown(self) -> None:
        self._data.release()
        del self._buf
        self._mm.close()


class OSProvider(SimProvider):
    """Thin OS backend: reservations are real anonymous mappings."""

    def __init__(self):
        super().__init__()

    def reserve(self, nbytes: int):
        if nbytes <= 0 or nbytes % PAGE_SIZE != 0:
            raise ValueError(f"reservation of {nbytes} bytes is not page-granular")
        with self._lock:
            region = OSRegion(self._next_id, nbytes // PAGE_SIZE, self)
            self._next_id += 1
            i = bisect_right(self._bases, region.base)
            self._bases.insert(i, region.base)
            self._regions.insert(i, region)
        return region


def make_provider(name: str):
    if name == "sim":
        return SimProvider()
    if name == "os":
        return OSProvider()
    raise ValueError(f"unknown provider backend {name!r}")
