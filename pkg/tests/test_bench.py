import csv

import pytest

from hardalloc import AllocConfig, SimProvider
from hardalloc.bench import (CSV_HEADER, BenchRow, WorkloadSpec, emit_csv,
                             render_figure, run_workload)


def small_cfg():
    return AllocConfig(slabs_per_class=64, quarantine_capacity=4)


def test_unknown_workload_rejected():
    with pytest.raises(ValueError):
        WorkloadSpec("coffee")
    with pytest.raises(ValueError):
        WorkloadSpec("pairs", threads=0)


def test_pairs_returns_all_memory():
    row = run_workload(WorkloadSpec("pairs", ops=4000, seed=9), small_cfg())
    assert row.ops == 4000
    assert row.ops_per_sec > 0
    assert row.final_pages <= small_cfg().quarantine_capacity + 1


def test_pairs_deterministic():
    r1 = run_workload(WorkloadSpec("pairs", ops=2000, seed=5), small_cfg())
    r2 = run_workload(WorkloadSpec("pairs", ops=2000, seed=5), small_cfg())
    assert (r1.ops, r1.peak_pages, r1.final_pages) == (r2.ops, r2.peak_pages, r2.final_pages)


def test_churn_deterministic_and_drains():
    r1 = run_workload(WorkloadSpec("churn", ops=3000, seed=5), small_cfg())
    r2 = run_workload(WorkloadSpec("churn", ops=3000, seed=5), small_cfg())
    assert (r1.ops, r1.peak_pages) == (r2.ops, r2.peak_pages)
    cfg = small_cfg()
    assert r1.final_pages <= cfg.quarantine_capacity * len(cfg.sc_sizes) + len(cfg.sc_sizes)


def test_large_stress_residency():
    prov = SimProvider()
    row = run_workload(WorkloadSpec("large_stress", ops=200, seed=2), small_cfg(),
                       provider=prov)
    assert row.peak_pages >= 2
    assert row.final_pages == 0


def test_larson_like_cross_thread_frees():
    row = run_workload(WorkloadSpec("larson_like", ops=2000, threads=4, seed=1),
                       small_cfg())
    assert row.ops > 0
    assert row.final_pages <= small_cfg().quarantine_capacity * 8


def test_mstress_like_runs():
    row = run_workload(WorkloadSpec("mstress_like", ops=2000, seed=3), small_cfg())
    assert row.ops == 2000


def test_emit_csv_roundtrip(tmp_path):
    rows = [BenchRow("pairs", 1, 1000, 0.5, 2000.0, 3, 0),
            BenchRow("churn", 2, 500, 0.25, 2000.0, 7, 1)]
    path = tmp_path / "bench.csv"
    emit_csv(rows, str(path))
    with open(path, newline="") as fh:
        parsed = list(csv.reader(fh))
    assert parsed[0] == CSV_HEADER
    assert len(parsed) == 3
    assert all(len(line) == len(CSV_HEADER) for line in parsed)
    assert parsed[1][0] == "pairs" and parsed[1][2] == "1000"


def test_render_figure(tmp_path):
    rows = [BenchRow("pairs", 1, 1000, 0.5, 2000.0, 3, 0)]
    path = tmp_path / "bench.png"
    render_figure(rows, str(path))
    assert path.exists() and path.stat().st_size > 1000
