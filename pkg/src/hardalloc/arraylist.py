"""Static cell array whose cells form five disjoint doubly-linked status lists.

Every index below the last_used watermark belongs to exactly one list
(empty / partial / full / quarantine / guard); quarantine is a FIFO queue
with an explicit tail.  Cells at or beyond the watermark are Unused with
nil links, which realizes the "marker for the last used slab" without
seeding enormous free lists.
"""
from __future__ import annotations

from enum import IntEnum


class SlabStatus(IntEnum):
    UNUSED = 0
    EMPTY = 1
    PARTIAL = 2
    FULL = 3
    QUARANTINE = 4
    GUARD = 5


# Statuses that own a head pointer.
_LISTS = (SlabStatus.EMPTY, SlabStatus.PARTIAL, SlabStatus.FULL,
          SlabStatus.QUARANTINE, SlabStatus.GUARD)

_MOVE_SOURCES = {SlabStatus.EMPTY, SlabStatus.PARTIAL, SlabStatus.FULL,
                 SlabStatus.QUARANTINE}
_MOVE_TARGETS = {SlabStatus.EMPTY, SlabStatus.PARTIAL, SlabStatus.FULL}


class ArrayListError(RuntimeError):
    """Invalid status transition or list operation."""


class StatusArrayList:
    __slots__ = ("capacity", "last_used", "quarantine_len",
                 "_status", "_prev", "_next", "_heads", "_q_tail")

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.last_used = 0
        self.quarantine_len = 0
        self._status: list[SlabStatus] = [SlabStatus.UNUSED] * capacity
        self._prev: list[int | None] = [None] * capacity
        self._next: list[int | None] = [None] * capacity
        self._heads: dict[SlabStatus, int | None] = {s: None for s in _LISTS}
        self._q_tail: int | None = None

    # -- linking primitives -------------------------------------------------

    def _link_head(self, i: int, status: SlabStatus) -> None:
        head = self._heads[status]
        self._status[i] = status
        self._prev[i] = None
        self._next[i] = head
        if head is not None:
            self._prev[head] = i
        self._heads[status] = i
        if status is SlabStatus.QUARANTINE and self._q_tail is None:
            self._q_tail = i

    def _unlink(self, i: int) -> None:
        status = self._status[i]
        prev, nxt = self._prev[i], self._next[i]
        if prev is not None:
            self._next[prev] = nxt
        else:
            self._heads[status] = nxt
        if nxt is not None:
            self._prev[nxt] = prev
        if status is SlabStatus.QUARANTINE and self._q_tail == i:
            self._q_tail = prev
        self._prev[i] = None
        self._next[i] = None

    # -- operations ----------------------------------------------------------

    def extend(self, status: SlabStatus) -> int | None:
        """Bring the next index into service at the head of a list.

        Returns None once the watermark hits capacity (size class full).
        """
        if status not in (SlabStatus.EMPTY, SlabStatus.GUARD):
            raise ArrayListError(f"cannot extend into {status.name}")
        if self.last_used >= self.capacity:
            return None
        i = self.last_used
        self.last_used += 1
        self._link_head(i, status)
        return i

    def move(self, i: int, new_status: SlabStatus) -> None:
        if not 0 <= i < self.last_used:
            raise ArrayListError(f"index {i} is beyond the watermark")
        cur = self._status[i]
        if cur is SlabStatus.GUARD:
            raise ArrayListError("guard slabs never change status")
        if cur not in _MOVE_SOURCES or new_status not in _MOVE_TARGETS:
            raise ArrayListError(f"illegal move {cur.name} -> {new_status.name}")
        if cur is new_status:
            return
        was_quarantined = cur is SlabStatus.QUARANTINE
        self._unlink(i)
        if was_quarantined:
            self.quarantine_len -= 1
        self._link_head(i, new_status)

    def enqueue_quarantine(self, i: int) -> None:
        """Move a freed-to-empty slab to the quarantine tail (FIFO)."""
        if not 0 <= i < self.last_used:
            raise ArrayListError(f"index {i} is beyond the watermark")
        if self._status[i] is not SlabStatus.EMPTY:
            raise ArrayListError(f"only empty slabs enter quarantine, got {self._status[i].name}")
        self._unlink(i)
        tail = self._q_tail
        self._status[i] = SlabStatus.QUARANTINE
        self._prev[i] = tail
        self._next[i] = None
        if tail is None:
            self._heads[SlabStatus.QUARANTINE] = i
        else:
            self._next[tail] = i
        self._q_tail = i
        self.quarantine_len += 1

    def dequeue_quarantine(self) -> int | None:
        """Oldest quarantined slab, handed back as Empty; None when empty."""
        head = self._heads[SlabStatus.QUARANTINE]
        if head is None:
            return None
        self._unlink(head)
        self.quarantine_len -= 1
        self._link_head(head, SlabStatus.EMPTY)
        return head

    def status(self, i: int) -> SlabStatus:
        if i < 0:
            raise IndexError(f"negative index {i}")
        if i >= self.last_used:
            return SlabStatus.UNUSED
        return self._status[i]

    def head(self, status: SlabStatus) -> int | None:
        return self._heads[status]

    def iter_list(self, status: SlabStatus):
        """Walk one list; the count bound turns a corrupted cycle into an error."""
        i = self._heads[status]
        steps = 0
        while i is not None:
            steps += 1
            if steps > self.last_used:
                raise ArrayListError(f"cyclic {status.name} list")
            yield i
            i = self._next[i]

    # -- validation ----------------------------------------------------------

    def validate(self) -> list[str]:
        """Well-formedness report: symmetry, acyclicity, head agreement, partition."""
        problems: list[str] = []
        seen: dict[int, SlabStatus] = {}
        for status in _LISTS:
            head = self._heads[status]
            if head is not None and self._prev[head] is not None:
                problems.append(f"{status.name} head {head} has a non-nil prev")
            i = head
            steps = 0
            prev = None
            walk_ok = True
            while i is not None:
                steps += 1
                if steps > self.last_used:
                    problems.append(f"cyclic {status.name} list")
                    walk_ok = False
                    break
                if not 0 <= i < self.last_used:
                    problems.append(f"{status.name} list reaches out-of-range index {i}")
                    walk_ok = False
                    break
                if i in seen:
                    if seen[i] is status:
                        problems.append(f"cyclic {status.name} list revisits index {i}")
                    else:
                        problems.append(f"index {i} appears in both {seen[i].name} "
                                        f"and {status.name}")
                    walk_ok = False
                    break
                seen[i] = status
                if self._status[i] is not status:
                    problems.append(f"index {i} in {status.name} list has status {self._status[i].name}")
                if self._prev[i] != prev:
                    problems.append(f"prev/next asymmetry at index {i} in {status.name} list")
                prev = i
                i = self._next[i]
            if status is SlabStatus.QUARANTINE and walk_ok:
                if prev != self._q_tail:
                    problems.append(f"quarantine tail is {self._q_tail}, walk ends at {prev}")
                if steps != self.quarantine_len:
                    problems.append(f"quarantine_len {self.quarantine_len} != walked {steps}")
        for i in range(self.last_used):
            if i not in seen:
                problems.append(f"index {i} below watermark belongs to no list")
        for i in range(self.last_used, self.capacity):
            if self._status[i] is not SlabStatus.UNUSED:
                problems.append(f"index {i} beyond watermark has status {self._status[i].name}")
            if self._prev[i] is not None or self._next[i] is not None:
                problems.append(f"unused index {i} has non-nil links")
        return problems
