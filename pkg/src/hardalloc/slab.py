"""Slot-level byte operations inside a page-sized slab.

A slab is exactly one page divided into equal slots; these helpers do the
address arithmetic plus the zeroing and canary protocol for one slot.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import PAGE_SIZE


def slot_count(slot_size: int) -> int:
    """Slots per one-page slab: 128 for the 32B class, 1 for the 4096B class."""
    return PAGE_SIZE // slot_size


@dataclass(frozen=True)
class SlotRef:
    region: object
    class_base: int  # byte offset of the class span within the region
    slab_index: int
    slot_index: int
    slot_size: int

    @property
    def offset(self) -> int:
        return self.class_base + self.slab_index * PAGE_SIZE + self.slot_index * self.slot_size


def slot_offset(ref: SlotRef) -> int:
    return ref.offset


def locate(class_base: int, slot_size: int, byte_offset: int) -> tuple[int, int] | None:
    """Inverse of slot_offset; None for misaligned interiors (invalid-free signal)."""
    rel = byte_offset - class_base
    if rel < 0:
        return None
    slab, within = divmod(rel, PAGE_SIZE)
    slot, rem = divmod(within, slot_size)
    if rem != 0:
        return None
    if slot >= PAGE_SIZE // slot_size:  # slot would not fit in the page
        return None
    return slab, slot


def zero_slot(ref: SlotRef) -> None:
    ref.region.checked_write(ref.offset, bytes(ref.slot_size))


def is_slot_zero(ref: SlotRef, length: int | None = None) -> bool:
    n = ref.slot_size if length is None else length
    return ref.region.checked_read(ref.offset, n) == bytes(n)


def write_canary(ref: SlotRef, magic: bytes) -> None:
    """Install the magic in the final bytes of the slot."""
    ref.region.checked_write(ref.offset + ref.slot_size - len(magic), magic)


def check_canary(ref: SlotRef, magic: bytes) -> bool:
    return ref.region.checked_read(ref.offset + ref.slot_size - len(magic), len(magic)) == magic
