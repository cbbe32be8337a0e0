"""Per-slab slot availability bitmap: bit set = slot available for allocation."""
from __future__ import annotations

WORD_BITS = 64
N_WORDS = 4
MAX_SLOTS = WORD_BITS * N_WORDS  # 4096 / 16


class BitmapStateError(RuntimeError):
    """Double transition: allocating an allocated slot or freeing a free one."""


class SlotBitmap:
    __slots__ = ("nb_slots", "_words", "_available")

    def __init__(self, nb_slots: int):
        if not 1 <= nb_slots <= MAX_SLOTS:
            raise ValueError(f"nb_slots must be in 1..{MAX_SLOTS}, got {nb_slots}")
        self.nb_slots = nb_slots
        # Fixed 4-word storage; bits at positions >= nb_slots are never set.
        words = []
        remaining = nb_slots
        for _ in range(N_WORDS):
            take = min(remaining, WORD_BITS)
            words.append((1 << take) - 1)
            remaining -= take
        self._words = words
        self._available = nb_slots

    def find_first_available(self) -> int | None:
        for wi in range(N_WORDS):
            w = self._words[wi]
            if w:
                return wi * WORD_BITS + ((w & -w).bit_length() - 1)
        return None

    def is_available(self, i: int) -> bool:
        self._check_index(i)
        return bool(self._words[i // WORD_BITS] >> (i % WORD_BITS) & 1)

    def set_allocated(self, i: int) -> None:
        self._check_index(i)
        wi, bit = divmod(i, WORD_BITS)
        mask = 1 << bit
        if not self._words[wi] & mask:
            raise BitmapStateError(f"slot {i} is already allocated")
        self._words[wi] &= ~mask
        self._available -= 1

    def set_available(self, i: int) -> None:
        self._check_index(i)
        wi, bit = divmod(i, WORD_BITS)
        mask = 1 << bit
        if self._words[wi] & mask:
            raise BitmapStateError(f"slot {i} is already available")
        self._words[wi] |= mask
        self._available += 1

    def is_empty(self) -> bool:
        """All slots available (the all-true slab of a fresh/emptied page)."""
        return self._available == self.nb_slots

    def is_full(self) -> bool:
        return self._available == 0

    def count_available(self) -> int:
        return self._available

    def count_allocated(self) -> int:
        return self.nb_slots - self._available

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.nb_slots:
            raise IndexError(f"slot {i} out of range for {self.nb_slots} slots")

    def as_bools(self) -> list[bool]:
        """Availability per slot, for validation and oracle comparison."""
        return [bool(self._words[i // WORD_BITS] >> (i % WORD_BITS) & 1)
                for i in range(self.nb_slots)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SlotBitmap):
            return NotImplemented
        return self.nb_slots == other.nb_slots and self._words == other._words

    def __repr__(self) -> str:
        return f"SlotBitmap(nb_slots={self.nb_slots}, available={self._available})"
