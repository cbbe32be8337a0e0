"""Scoped locks with a per-thread held counter.

No thread may hold two allocator locks at once; that single rule is the
deadlock-freedom argument, so it is enforced structurally: acquiring while
already holding raises before blocking.
"""
from __future__ import annotations

import threading

_held = threading.local()


class LockDisciplineError(RuntimeError):
    """A thread tried to take a second allocator lock."""


class DebugLock:
    __slots__ = ("_lock",)

    def __init__(self):
        self._lock = threading.Lock()

    def __enter__(self):
        count = getattr(_held, "count", 0)
        if count >= 1:
            raise LockDisciplineError("thread already holds an allocator lock")
        self._lock.acquire()
        _held.count = count + 1
        return self

    def __exit__(self, *exc):
        _held.count -= 1
        self._lock.release()
        return False


def held_count() -> int:
    """Allocator locks held by the calling thread (0 or 1 in a correct run)."""
    return getattr(_held, "count", 0)
