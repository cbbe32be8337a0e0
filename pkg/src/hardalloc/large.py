"""Large allocations (> page size): one reservation per block, tracked in an
AVL-tree map from block address to its reserved length, under a single lock."""
from __future__ import annotations

from typing import Any, Iterator, NamedTuple

from .config import PAGE_SIZE
from .locking import DebugLock


class DuplicateKeyError(RuntimeError):
    pass


class AvlNode:
    __slots__ = ("key", "value", "left", "right", "height")

    def __init__(self, key: int, value: Any):
        self.key = key
        self.value = value
        self.left: AvlNode | None = None
        self.right: AvlNode | None = None
        self.height = 1


def _h(n: AvlNode | None) -> int:
    return n.height if n is not None else 0


def _update(n: AvlNode) -> None:
    n.height = 1 + max(_h(n.left), _h(n.right))


def _balance(n: AvlNode) -> int:
    return _h(n.left) - _h(n.right)


def _rot_right(y: AvlNode) -> AvlNode:
    x = y.left
    y.left = x.right
    x.right = y
    _update(y)
    _update(x)
    return x


def _rot_left(x: AvlNode) -> AvlNode:
    y = x.right
    x.right = y.left
    y.left = x
    _update(x)
    _update(y)
    return y


def _rebalance(n: AvlNode) -> AvlNode:
    _update(n)
    b = _balance(n)
    if b > 1:
        if _balance(n.left) < 0:
            n.left = _rot_left(n.left)
        return _rot_right(n)
    if b < -1:
        if _balance(n.right) > 0:
            n.right = _rot_right(n.right)
        return _rot_left(n)
    return n


class AvlMap:
    """Exact-key map with standard single/double rotation rebalancing."""

    def __init__(self):
        self.root: AvlNode | None = None
        self.count = 0

    def insert(self, key: int, value: Any) -> None:
        def rec(n: AvlNode | None) -> AvlNode:
            if n is None:
                return AvlNode(key, value)
            if key == n.key:
                raise DuplicateKeyError(f"key {key:#x} already present")
            if key < n.key:
                n.left = rec(n.left)
            else:
                n.right = rec(n.right)
            return _rebalance(n)

        self.root = rec(self.root)
        self.count += 1

    def find(self, key: int) -> Any | None:
        n = self.root
        while n is not None:
            if key == n.key:
                return n.value
            n = n.left if key < n.key else n.right
        return None

    def remove(self, key: int) -> Any | None:
        removed: list[Any] = []

        def rec(n: AvlNode | None) -> AvlNode | None:
            if n is None:
                return None
            if key < n.key:
                n.left = rec(n.left)
            elif key > n.key:
                n.right = rec(n.right)
            else:
                removed.append(n.value)
                if n.left is None:
                    return n.right
                if n.right is None:
                    return n.left
                # Swap in the in-order successor, then delete it from the right.
                succ = n.right
                while succ.left is not None:
                    succ = succ.left
                n.key, n.value = succ.key, succ.value
                n.right = _remove_min(n.right)
            return _rebalance(n)

        def _remove_min(n: AvlNode) -> AvlNode | None:
            if n.left is None:
                return n.right
            n.left = _remove_min(n.left)
            return _rebalance(n)

        self.root = rec(self.root)
        if not removed:
            return None
        self.count -= 1
        return removed[0]

    def __len__(self) -> int:
        return self.count

    def items(self) -> Iterator[tuple[int, Any]]:
        def rec(n: AvlNode | None):
            if n is None:
                return
            yield from rec(n.left)
            yield (n.key, n.value)
            yield from rec(n.right)

        yield from rec(self.root)

    def validate(self) -> list[str]:
        """BST order, height bookkeeping, and balance factor at every node."""
        problems: list[str] = []

        def rec(n: AvlNode | None, lo: float, hi: float) -> int:
            if n is None:
                return 0
            if not lo < n.key < hi:
                problems.append(f"BST order violated at key {n.key:#x}")
            hl = rec(n.left, lo, n.key)
            hr = rec(n.right, n.key, hi)
            if n.height != 1 + max(hl, hr):
                problems.append(f"stale height at key {n.key:#x}")
            if abs(hl - hr) > 1:
                problems.append(f"balance factor {hl - hr} at key {n.key:#x}")
            return 1 + max(hl, hr)

        rec(self.root, float("-inf"), float("inf"))
        keys = [k for k, _ in self.items()]
        if keys != sorted(keys):
            problems.append("in-order traversal is not sorted")
        if len(keys) != self.count:
            problems.append(f"count {self.count} != {len(keys)} nodes")
        return problems


class LargeSpan(NamedTuple):
    length: int  # reserved bytes (page-rounded request)
    region: Any


class LargeAllocator:
    """Page-span allocations forwarded straight to the provider.

    The node pool is capacity-bounded up front (the metadata budget), so
    tracking a new block never recurses into the allocator being built.
    """

    def __init__(self, provider, pool_capacity: int = 1 << 16):
        self.provider = provider
        self.pool_capacity = pool_capacity
        self.map = AvlMap()
        self.lock = DebugLock()
        self.failed_reservations = 0

    def malloc(self, size: int) -> int | None:
        if size <= 0:
            return None
        with self.lock:
            if len(self.map) >= self.pool_capacity:
                return None
            pages = (size + PAGE_SIZE - 1) // PAGE_SIZE
            try:
                region = self.provider.reserve(pages * PAGE_SIZE)
            except (MemoryError, OSError):
                self.failed_reservations += 1
                return None
            self.map.insert(region.base, LargeSpan(pages * PAGE_SIZE, region))
            return region.base

    def free(self, address: int) -> bool:
        with self.lock:
            span = self.map.remove(address)
            if span is None:
                return False
            self.provider.unreserve(span.region)
            return True

    def usable(self, address: int) -> int | None:
        with self.lock:
            span = self.map.find(address)
            return span.length if span is not None else None

    def live_spans(self) -> list[tuple[int, int]]:
        with self.lock:
            return [(k, v.length) for k, v in self.map.items()]

    def validate(self) -> list[str]:
        with self.lock:
            problems = [f"large: {p}" for p in self.map.validate()]
            for key, span in self.map.items():
                if key != span.region.base:
                    problems.append(f"large: key {key:#x} != region base {span.region.base:#x}")
                if span.length != span.region.length_bytes:
                    problems.append(f"large: recorded {span.length} != reserved "
                                    f"{span.region.length_bytes} at {key:#x}")
            return problems
