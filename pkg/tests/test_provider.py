import random

import pytest

from hardalloc import Fault, FaultKind, OSProvider, PagePerm, SimProvider
from hardalloc.config import PAGE_SIZE


@pytest.fixture
def prov():
    return SimProvider()


def test_reserve_fresh_region(prov):
    r = prov.reserve(2 * PAGE_SIZE)
    assert r.length_pages == 2
    assert r.resident_count() == 0
    assert r.checked_read(0, 1) == b"\x00"


def test_reserve_granularity(prov):
    with pytest.raises(ValueError):
        prov.reserve(4095)
    with pytest.raises(ValueError):
        prov.reserve(0)


def test_release_zeroes_and_drops_residency(prov):
    r = prov.reserve(8 * PAGE_SIZE)
    r.checked_write(3 * PAGE_SIZE, b"\xff" * 16)
    assert r.resident_count() == 1
    r.release_pages(3, 1)
    assert r.checked_read(3 * PAGE_SIZE, 16) == bytes(16)
    assert r.resident_count() == 0


def test_release_out_of_range(prov):
    r = prov.reserve(2 * PAGE_SIZE)
    with pytest.raises(Fault) as e:
        r.release_pages(2, 1)
    assert e.value.kind is FaultKind.OUT_OF_RANGE


def test_protect_roundtrip(prov):
    r = prov.reserve(2 * PAGE_SIZE)
    r.protect(1, 1, PagePerm.NONE)
    with pytest.raises(Fault) as e:
        r.checked_read(PAGE_SIZE, 1)
    assert e.value.kind is FaultKind.PROT_NONE
    r.protect(1, 1, PagePerm.READ_WRITE)
    assert r.checked_read(PAGE_SIZE, 1) == b"\x00"
    r.protect(0, 0, PagePerm.NONE)  # empty range is a no-op
    assert r.checked_read(0, 1) == b"\x00"


def test_read_across_guard_page_faults(prov):
    r = prov.reserve(3 * PAGE_SIZE)
    r.protect(1, 1, PagePerm.NONE)
    with pytest.raises(Fault) as e:
        r.checked_read(PAGE_SIZE - 8, 16)
    assert e.value.kind is FaultKind.PROT_NONE
    with pytest.raises(Fault):
        r.checked_write(PAGE_SIZE - 8, bytes(16))


def test_zero_length_access_succeeds(prov):
    r = prov.reserve(PAGE_SIZE)
    assert r.checked_read(0, 0) == b""
    r.checked_write(0, b"")
    assert r.resident_count() == 0


def test_write_marks_resident_reads_do_not(prov):
    r = prov.reserve(4 * PAGE_SIZE)
    r.checked_read(0, PAGE_SIZE)
    assert r.resident_count() == 0
    r.checked_write(0, b"x")
    assert r.resident_count() == 1
    r.checked_write(2 * PAGE_SIZE - 1, b"xy")  # spans pages 1 and 2
    assert r.resident_count() == 3


def test_residency_matches_set_oracle(prov):
    r = prov.reserve(32 * PAGE_SIZE)
    rng = random.Random(42)
    model: set[int] = set()
    for _ in range(2000):
        page = rng.randrange(32)
        if rng.random() < 0.6:
            r.checked_write(page * PAGE_SIZE + rng.randrange(PAGE_SIZE), b"\x01")
            model.add(page)
        else:
            r.release_pages(page, 1)
            model.discard(page)
        assert r.resident_count() == len(model)


def test_permission_soundness(prov):
    r = prov.reserve(PAGE_SIZE)
    r.checked_write(100, b"secret")
    r.protect(0, 1, PagePerm.NONE)
    with pytest.raises(Fault):
        r.checked_read(100, 6)
    with pytest.raises(Fault):
        r.checked_write(100, b"x")


def test_absolute_address_resolution(prov):
    a = prov.reserve(PAGE_SIZE)
    b = prov.reserve(PAGE_SIZE)
    prov.write(a.base + 10, b"hello")
    assert prov.read(a.base + 10, 5) == b"hello"
    assert prov.read(b.base, 5) == bytes(5)
    # the gap page between reservations is unmapped
    with pytest.raises(Fault) as e:
        prov.read(a.base + PAGE_SIZE, 1)
    assert e.value.kind is FaultKind.OUT_OF_RANGE


def test_unreserve_unmaps_and_updates_totals(prov):
    r = prov.reserve(2 * PAGE_SIZE)
    r.checked_write(0, b"x")
    assert prov.resident_total == 1
    base = r.base
    prov.unreserve(r)
    assert prov.resident_total == 0
    with pytest.raises(Fault):
        prov.read(base, 1)


def test_peak_tracking(prov):
    r = prov.reserve(4 * PAGE_SIZE)
    for p in range(4):
        r.checked_write(p * PAGE_SIZE, b"x")
    r.release_pages(0, 4)
    assert prov.resident_peak == 4
    assert prov.resident_total == 0


def test_os_provider_smoke():
    prov = OSProvider()
    r = prov.reserve(4 * PAGE_SIZE)
    assert r.checked_read(0, 8) == bytes(8)
    r.checked_write(PAGE_SIZE, b"osdata")
    assert r.checked_read(PAGE_SIZE, 6) == b"osdata"
    assert r.resident_count() == 1
    r.release_pages(1, 1)
    assert r.checked_read(PAGE_SIZE, 6) == bytes(6)
    assert r.resident_count() == 0
    r.protect(2, 1, PagePerm.NONE)
    with pytest.raises(Fault):
        r.checked_read(2 * PAGE_SIZE, 1)
    r.protect(2, 1, PagePerm.READ_WRITE)
    assert r.checked_read(2 * PAGE_SIZE, 1) == b"\x00"
    prov.unreserve(r)
