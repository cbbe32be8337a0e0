"""hardalloc: a hardened slab/size-class allocator model with an executable
invariant harness, trace replayer, fuzzer, and benchmark CLI."""

from .arraylist import ArrayListError, SlabStatus, StatusArrayList
from .bitmap import BitmapStateError, SlotBitmap
from .config import (PAGE_SIZE, AllocConfig, InvalidFreePolicy, class_index_for,
                     config_from_env, default_config, default_ladder,
                     usable_size_of_class)
from .frontend import Allocator, FreeOutcome, HeapCorruptionAbort
from .harness import (ExploitReport, Report, ShadowModel, TraceOp, TraceParseError,
                      TraceRunner, exploit_suite, fuzz, parse_trace_file,
                      parse_trace_text, replay)
from .large import AvlMap, LargeAllocator
from .locking import DebugLock, LockDisciplineError, held_count
from .provider import Fault, FaultKind, OSProvider, PagePerm, SimProvider, make_provider
from .sizeclass import FreeResult, SizeClass
from .slab import SlotRef, check_canary, is_slot_zero, locate, slot_count, slot_offset, write_canary, zero_slot

__version__ = "0.1.0"

__all__ = [
    "AllocConfig", "Allocator", "ArrayListError", "AvlMap", "BitmapStateError",
    "DebugLock", "ExploitReport", "Fault", "FaultKind", "FreeOutcome", "FreeResult",
    "HeapCorruptionAbort", "InvalidFreePolicy", "LargeAllocator", "LockDisciplineError",
    "OSProvider", "PAGE_SIZE", "PagePerm", "Report", "ShadowModel", "SimProvider",
    "SizeClass", "SlabStatus", "SlotBitmap", "SlotRef", "StatusArrayList", "TraceOp",
    "TraceParseError", "TraceRunner", "check_canary", "class_index_for",
    "config_from_env", "default_config", "default_ladder", "exploit_suite", "fuzz",
    "held_count", "is_slot_zero", "locate", "make_provider", "parse_trace_file",
    "parse_trace_text", "replay", "slot_count", "slot_offset", "usable_size_of_class",
    "write_canary", "zero_slot",
]
