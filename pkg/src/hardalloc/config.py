"""Allocator configuration: size-class ladder, feature toggles, class selection."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum

PAGE_SIZE = 4096
MIN_ALIGNMENT = 16
DEFAULT_CANARY_MAGIC = b"\x7f\xc4\x9a\x12\xde\xad\xca\x0f"


class InvalidFreePolicy(Enum):
    IGNORE = "ignore"
    REPORT = "report"
    ABORT = "abort"


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def default_ladder() -> tuple[int, ...]:
    """Slot sizes 16..128 step 16, then four subdivisions per doubling up to 4096."""
    sizes = list(range(16, 129, 16))
    base, step = 128, 32
    while base < PAGE_SIZE:
        nxt = base * 2
        sizes.extend(range(base + step, nxt + 1, step))
        base, step = nxt, step * 2
    return tuple(sizes)


@dataclass(frozen=True)
class AllocConfig:
    sc_sizes: tuple[int, ...] = field(default_factory=default_ladder)
    nb_arenas: int = 4
    slabs_per_class: int = 1024
    guard_interval: int = 2
    quarantine_capacity: int = 32
    canary_enabled: bool = True
    canary_size: int = 8
    canary_magic: bytes = DEFAULT_CANARY_MAGIC
    zero_check_enabled: bool = True
    # Strict mode: a failed zero-check fails the whole request instead of
    # poisoning the slot and retrying elsewhere.
    zero_check_fail_request: bool = False
    invalid_free_policy: InvalidFreePolicy = InvalidFreePolicy.REPORT
    page_size: int = field(default=PAGE_SIZE, init=False)

    def __post_init__(self) -> None:
        sizes = tuple(self.sc_sizes)
        object.__setattr__(self, "sc_sizes", sizes)
        if not sizes:
            raise ValueError("sc_sizes must not be empty")
        prev = 0
        for s in sizes:
            if s <= prev:
                raise ValueError("sc_sizes must be strictly increasing")
            if s % 16 != 0 or s <= 0:
                raise ValueError(f"size class {s} is not a positive multiple of 16")
            if s > PAGE_SIZE:
                raise ValueError(f"size class {s} exceeds the page size")
            prev = s
        if self.nb_arenas < 1:
            raise ValueError("nb_arenas must be >= 1")
        if self.slabs_per_class < 1:
            raise ValueError("slabs_per_class must be >= 1")
        if self.quarantine_capacity < 0:
            raise ValueError("quarantine_capacity must be >= 0")
        if self.canary_size >= sizes[0]:
            raise ValueError("canary_size must be smaller than the smallest class")
        if len(self.canary_magic) != self.canary_size:
            raise ValueError("canary_magic length must equal canary_size")
        # need -> smallest class index with size >= need, for O(1) selection
        table = []
        idx = 0
        for need in range(PAGE_SIZE + 1):
            while idx < len(sizes) and sizes[idx] < need:
                idx += 1
            table.append(idx if idx < len(sizes) else None)
        object.__setattr__(self, "_need_to_class", tuple(table))

    @property
    def nb_classes(self) -> int:
        return len(self.sc_sizes)

    @property
    def canary_budget(self) -> int:
        return self.canary_size if self.canary_enabled else 0


def default_config() -> AllocConfig:
    return AllocConfig()


def class_index_for(request: int, alignment: int, cfg: AllocConfig) -> int | None:
    """Smallest class fitting request (+canary budget) at the given alignment.

    Returns None when the padded request exceeds the page size, which routes
    the request to the large-allocation path.
    """
    if request < 0:
        raise ValueError("request must be >= 0")
    if not _is_pow2(alignment) or alignment > PAGE_SIZE:
        raise ValueError(f"alignment {alignment} must be a power of two <= {PAGE_SIZE}")
    need = request + cfg.canary_budget
    if need > PAGE_SIZE:
        return None
    first = cfg._need_to_class[need]
    if first is None:
        return None
    if alignment <= MIN_ALIGNMENT:
        return first
    for i in range(first, len(cfg.sc_sizes)):
        size = cfg.sc_sizes[i]
        if size % alignment == 0 and _is_pow2(size // alignment):
            return i
    return None


def class_fits_alignment(size: int, alignment: int) -> bool:
    """A class serves alignment a>16 only when its size is a*2^k."""
    if alignment <= MIN_ALIGNMENT:
        return True
    return size % alignment == 0 and _is_pow2(size // alignment)


def usable_size_of_class(i: int, cfg: AllocConfig) -> int:
    return cfg.sc_sizes[i] - cfg.canary_budget


_ENV_POLICIES = {p.value: p for p in InvalidFreePolicy}


def config_from_env(base: AllocConfig | None = None, env: dict | None = None) -> AllocConfig:
    """Apply HARDALLOC_* environment overrides on top of a base configuration."""
    env = os.environ if env is None else env
    base = base or default_config()
    kwargs: dict = {}
    if "HARDALLOC_ARENAS" in env:
        kwargs["nb_arenas"] = int(env["HARDALLOC_ARENAS"])
    if "HARDALLOC_GUARD_INTERVAL" in env:
        kwargs["guard_interval"] = int(env["HARDALLOC_GUARD_INTERVAL"])
    if "HARDALLOC_QUARANTINE" in env:
        kwargs["quarantine_capacity"] = int(env["HARDALLOC_QUARANTINE"])
    if env.get("HARDALLOC_NO_CANARY"):
        kwargs["canary_enabled"] = False
    if env.get("HARDALLOC_NO_ZERO_CHECK"):
        kwargs["zero_check_enabled"] = False
    if "HARDALLOC_INVALID_FREE" in env:
        raw = env["HARDALLOC_INVALID_FREE"].strip().lower()
        if raw not in _ENV_POLICIES:
            raise ValueError(f"HARDALLOC_INVALID_FREE must be one of {sorted(_ENV_POLICIES)}")
        kwargs["invalid_free_policy"] = _ENV_POLICIES[raw]
    if not kwargs:
        return base
    return AllocConfig(
        sc_sizes=base.sc_sizes,
        nb_arenas=kwargs.get("nb_arenas", base.nb_arenas),
        slabs_per_class=base.slabs_per_class,
        guard_interval=kwargs.get("guard_interval", base.guard_interval),
        quarantine_capacity=kwargs.get("quarantine_capacity", base.quarantine_capacity),
        canary_enabled=kwargs.get("canary_enabled", base.canary_enabled),
        canary_size=base.canary_size,
        canary_magic=base.canary_magic,
        zero_check_enabled=kwargs.get("zero_check_enabled", base.zero_check_enabled),
        zero_check_fail_request=base.zero_check_fail_request,
        invalid_free_policy=kwargs.get("invalid_free_policy", base.invalid_free_policy),
    )
