"""Desk-scale workload benchmarks: execution time plus a resident-page RSS
proxy per workload, emitted as CSV with a rendered figure alongside."""
from __future__ import annotations

import csv
import queue
import random
import threading
import time
from dataclasses import dataclass

from .config import AllocConfig, default_config
from .frontend import Allocator
from .provider import SimProvider

CSV_HEADER = ["workload", "threads", "ops", "seconds", "ops_per_sec",
              "peak_pages", "final_pages"]

WORKLOAD_NAMES = ("pairs", "churn", "larson_like", "mstress_like", "large_stress")


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    threads: int = 1
    ops: int = 100_000
    seed: int = 1

    def __post_init__(self):
        if self.name not in WORKLOAD_NAMES:
            raise ValueError(f"unknown workload {self.name!r}; expected one of {WORKLOAD_NAMES}")
        if self.threads < 1 or self.ops < 1:
            raise ValueError("threads and ops must be >= 1")


@dataclass
class BenchRow:
    workload: str
    threads: int
    ops: int
    seconds: float
    ops_per_sec: float
    peak_pages: int
    final_pages: int


def _pairs(alloc: Allocator, ops: int, rng: random.Random) -> int:
    done = 0
    for _ in range(ops // 2):
        p = alloc.malloc(64)
        if p is not None:
            alloc.free(p)
        done += 2
    return done


def _churn(alloc: Allocator, ops: int, rng: random.Random) -> int:
    slots: list[int | None] = [None] * 512
    sizes = (16, 24, 32, 48, 64, 96, 128, 256, 512, 1024, 2048)
    done = 0
    for _ in range(ops):
        i = rng.randrange(len(slots))
        if slots[i] is not None:
            alloc.free(slots[i])
            slots[i] = None
        else:
            slots[i] = alloc.malloc(rng.choice(sizes))
        done += 1
    for p in slots:
        if p is not None:
            alloc.free(p)
    return done


def _mstress_like(alloc: Allocator, ops: int, rng: random.Random) -> int:
    live: list[int] = []
    done = 0
    for _ in range(ops):
        if live and rng.random() < 0.4:
            alloc.free(live.pop(rng.randrange(len(live))))
        else:
            size = int(16 * (2 ** (rng.random() * 9)))  # 16 .. ~8192, small-skewed
            p = alloc.malloc(size)
            if p is not None:
                live.append(p)
        done += 1
    for p in live:
        alloc.free(p)
    return done


def _large_stress(alloc: Allocator, ops: int, rng: random.Random) -> int:
    done = 0
    for _ in range(ops // 2):
        p = alloc.malloc(2 * 4096)
        if p is not None:
            alloc.write(p, b"\x01")          # touch both pages so they count
            alloc.write(p + 4097, b"\x01")
            alloc.free(p)
        done += 2
    return done


def _larson_like(alloc: Allocator, spec: WorkloadSpec) -> int:
    """Producers allocate, consumers free across threads, through a queue."""
    n_pairs = max(1, spec.threads // 2)
    per_pair = spec.ops // n_pairs
    handoff: list[queue.Queue] = [queue.Queue(maxsize=128) for _ in range(n_pairs)]
    done = [0] * (2 * n_pairs)
    stop = object()

    def producer(k: int) -> None:
        rng = random.Random((spec.seed << 8) ^ k)
        sizes = (16, 32, 64, 128, 256, 512, 1024)
        for _ in range(per_pair // 2):
            p = alloc.malloc(rng.choice(sizes))
            if p is not None:
                handoff[k].put(p)
            done[k] += 1
        handoff[k].put(stop)

    def consumer(k: int) -> None:
        while True:
            p = handoff[k].get()
            if p is stop:
                return
            alloc.free(p)
            done[n_pairs + k] += 1

    threads = []
    for k in range(n_pairs):
        threads.append(threading.Thread(target=producer, args=(k,)))
        threads.append(threading.Thread(target=consumer, args=(k,)))
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return sum(done)


def run_workload(spec: WorkloadSpec, cfg: AllocConfig | None = None, provider=None) -> BenchRow:
    provider = provider if provider is not None else SimProvider()
    alloc = Allocator(cfg or default_config(), provider)
    rng = random.Random(spec.seed)
    t0 = time.perf_counter()
    if spec.name == "larson_like":
        done = _larson_like(alloc, spec)
    elif spec.threads > 1:
        per_thread = spec.ops // spec.threads
        counts = [0] * spec.threads
        fns = {"pairs": _pairs, "churn": _churn,
               "mstress_like": _mstress_like, "large_stress": _large_stress}
        fn = fns[spec.name]

        def work(t: int) -> None:
            counts[t] = fn(alloc, per_thread, random.Random((spec.seed << 8) ^ t))

        workers = [threading.Thread(target=work, args=(t,)) for t in range(spec.threads)]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
        done = sum(counts)
    else:
        fn = {"pairs": _pairs, "churn": _churn,
              "mstress_like": _mstress_like, "large_stress": _large_stress}[spec.name]
        done = fn(alloc, spec.ops, rng)
    seconds = time.perf_counter() - t0
    return BenchRow(
        workload=spec.name,
        threads=spec.threads,
        ops=done,
        seconds=round(seconds, 6),
        ops_per_sec=round(done / seconds, 1) if seconds > 0 else 0.0,
        peak_pages=provider.resident_peak,
        final_pages=provider.resident_total,
    )


def emit_csv(rows: list[BenchRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.workload, r.threads, r.ops, r.seconds,
                             r.ops_per_sec, r.peak_pages, r.final_pages])


def render_figure(rows: list[BenchRow], path: str) -> None:
    """Throughput and residency bars, written next to the CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{r.workload}\n(t={r.threads})" for r in rows]
    x = range(len(rows))
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(max(6, 2 * len(rows)), 3.2))
    ax0.bar(x, [r.ops_per_sec for r in rows], color="#2b6cb0")
    ax0.set_xticks(list(x), labels, fontsize=8)
    ax0.set_ylabel("ops/sec")
    ax0.set_title("throughput")
    width = 0.4
    ax1.bar([i - width / 2 for i in x], [r.peak_pages for r in rows],
            width=width, label="peak", color="#c05621")
    ax1.bar([i + width / 2 for i in x], [r.final_pages for r in rows],
            width=width, label="final", color="#718096")
    ax1.set_xticks(list(x), labels, fontsize=8)
    ax1.set_ylabel("resident pages")
    ax1.set_title("memory footprint")
    ax1.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
