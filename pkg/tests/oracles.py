"""Independent reference models shared by the unit tests and the acceptance
suite: a boolean-array bitmap, a map+queue arraylist model, and a dict-backed
AVL check.  These never call into the implementation paths they verify."""
import random
from collections import deque

from hardalloc import AvlMap, SlabStatus, SlotBitmap, StatusArrayList

S = SlabStatus


class BoolArrayOracle:
    """Naive reference: a plain list of availability booleans."""

    def __init__(self, n):
        self.bits = [True] * n

    def find_first(self):
        for i, b in enumerate(self.bits):
            if b:
                return i
        return None

    def set_allocated(self, i):
        assert self.bits[i]
        self.bits[i] = False

    def set_available(self, i):
        assert not self.bits[i]
        self.bits[i] = True

    def count(self):
        return sum(self.bits)


def exhaustive_small_scope_check(max_slots=16):
    """Every state of every bitmap with <= max_slots slots agrees with the
    boolean-array oracle."""
    for n in range(1, max_slots + 1):
        for state in range(1 << n):
            bm = SlotBitmap(n)
            bits = [(state >> i) & 1 == 1 for i in range(n)]  # True = available
            for i, available in enumerate(bits):
                if not available:
                    bm.set_allocated(i)
            expect_first = next((i for i, b in enumerate(bits) if b), None)
            assert bm.find_first_available() == expect_first, (n, state)
            assert bm.count_available() == sum(bits)
            assert bm.is_empty() == all(bits)
            assert bm.is_full() == (not any(bits))
            assert bm.as_bools() == bits
    return True


class MapQueueModel:
    """Reference model for the arraylist: index -> status plus a FIFO."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.status: dict[int, SlabStatus] = {}
        self.fifo: deque[int] = deque()
        self.last_used = 0

    def extend(self, status):
        if self.last_used >= self.capacity:
            return None
        i = self.last_used
        self.last_used += 1
        self.status[i] = status
        return i

    def move(self, i, new_status):
        assert self.status[i] not in (S.GUARD, S.UNUSED)
        if self.status[i] is S.QUARANTINE:
            self.fifo.remove(i)
        self.status[i] = new_status

    def enqueue(self, i):
        assert self.status[i] is S.EMPTY
        self.status[i] = S.QUARANTINE
        self.fifo.append(i)

    def dequeue(self):
        if not self.fifo:
            return None
        i = self.fifo.popleft()
        self.status[i] = S.EMPTY
        return i

    def get_status(self, i):
        return self.status.get(i, S.UNUSED)


def run_model_equivalence(n_ops=10_000, capacity=64, seed=3, validate_every=0):
    """Random valid op sequence checked against the map+queue model."""
    rng = random.Random(seed)
    al, model = StatusArrayList(capacity), MapQueueModel(capacity)
    movable = []  # indices currently in Empty/Partial/Full
    for step in range(n_ops):
        roll = rng.random()
        if roll < 0.30:
            status = S.GUARD if rng.random() < 0.15 else S.EMPTY
            got, want = al.extend(status), model.extend(status)
            assert got == want
            if got is not None and status is S.EMPTY:
                movable.append(got)
        elif roll < 0.60 and movable:
            i = rng.choice(movable)
            target = rng.choice((S.EMPTY, S.PARTIAL, S.FULL))
            al.move(i, target)
            model.move(i, target)
        elif roll < 0.80 and movable:
            i = rng.choice(movable)
            if model.get_status(i) is not S.EMPTY:
                al.move(i, S.EMPTY)
                model.move(i, S.EMPTY)
            al.enqueue_quarantine(i)
            model.enqueue(i)
            movable.remove(i)
        else:
            got, want = al.dequeue_quarantine(), model.dequeue()
            assert got == want
            if got is not None:
                movable.append(got)
        probe = rng.randrange(capacity + 4)
        assert al.status(probe) is model.get_status(probe)
        assert al.quarantine_len == len(model.fifo)
        if validate_every and step % validate_every == 0:
            assert al.validate() == []
    assert al.validate() == []
    assert list(al.iter_list(S.QUARANTINE)) == list(model.fifo)
    return True


def run_avl_oracle(n_ops=10_000, seed=11, validate_every=0):
    """Random insert/remove/find against a dict, with full-shape validation."""
    rng = random.Random(seed)
    m, ref = AvlMap(), {}
    for step in range(n_ops):
        k = rng.randrange(2000)
        roll = rng.random()
        if roll < 0.5:
            if k in ref:
                assert m.find(k) == ref[k]
            else:
                m.insert(k, k * 3)
                ref[k] = k * 3
        elif roll < 0.8:
            assert m.remove(k) == ref.pop(k, None)
        else:
            assert m.find(k) == ref.get(k)
        if validate_every and step % validate_every == 0:
            assert m.validate() == []
            assert dict(m.items()) == ref
    assert m.validate() == []
    assert dict(m.items()) == ref
    keys = [k for k, _ in m.items()]
    assert keys == sorted(keys)
    return True
