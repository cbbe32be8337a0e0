import csv

import pytest

from hardalloc.cli import main


@pytest.fixture
def trace(tmp_path):
    p = tmp_path / "t.trace"
    p.write_text("a 1 100\nw 1 0 41\nr 1 0\nf 1\n")
    return str(p)


def test_replay_ok(trace, capsys):
    assert main(["replay", "--trace", trace]) == 0
    out = capsys.readouterr().out
    assert "report:" in out and "violations=0" in out


def test_replay_results_file(trace, tmp_path):
    results = tmp_path / "results.txt"
    assert main(["replay", "--trace", trace, "--results", str(results)]) == 0
    lines = results.read_text().splitlines()
    assert len(lines) == 4


def test_replay_missing_trace(tmp_path):
    assert main(["replay", "--trace", str(tmp_path / "nope")]) == 2


def test_replay_parse_error(tmp_path):
    p = tmp_path / "bad.trace"
    p.write_text("a 1\n")
    assert main(["replay", "--trace", str(p)]) == 2


def test_replay_abort_policy_exit_code(tmp_path):
    p = tmp_path / "df.trace"
    p.write_text("a 1 100\nf 1\nf 1\n")
    assert main(["replay", "--trace", str(p)]) == 0
    assert main(["replay", "--trace", str(p), "--invalid-free", "abort"]) == 134


def test_env_config_applies(tmp_path, monkeypatch):
    p = tmp_path / "df.trace"
    p.write_text("a 1 100\nf 1\nf 1\n")
    monkeypatch.setenv("HARDALLOC_INVALID_FREE", "abort")
    assert main(["replay", "--trace", str(p)]) == 134
    monkeypatch.setenv("HARDALLOC_INVALID_FREE", "ignore")
    assert main(["replay", "--trace", str(p)]) == 0


def test_stats_subcommand(trace, capsys):
    assert main(["stats", "--trace", trace]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "arena,class_index,slot_size,live,slabs_used,quarantined,corruption_detected"
    assert len(out) == 1 + 4 * 28  # one line per class


def test_stats_reports_canary_detection(tmp_path, capsys):
    p = tmp_path / "overflow.trace"
    p.write_text("a 1 24\nw 1 24 41\nf 1\n")
    assert main(["stats", "--trace", str(p)]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert sum(int(r["corruption_detected"]) for r in rows) >= 1


def test_fuzz_subcommand(capsys):
    assert main(["fuzz", "--seed", "3", "--ops", "500", "--threads", "2"]) == 0
    assert "violations=0" in capsys.readouterr().out


def test_exploits_subcommand(capsys):
    assert main(["exploits"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6  # five scenarios plus the benign control


def test_bench_subcommand_csv_and_figure(tmp_path, capsys):
    csv_path = tmp_path / "bench.csv"
    rc = main(["bench", "--workload", "pairs", "--workload", "large_stress",
               "--ops", "1000", "--csv", str(csv_path)])
    assert rc == 0
    assert csv_path.exists()
    png = tmp_path / "bench.png"
    assert png.exists() and png.stat().st_size > 0
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3


def test_bench_no_plot(tmp_path):
    csv_path = tmp_path / "b.csv"
    assert main(["bench", "--workload", "pairs", "--ops", "500",
                 "--csv", str(csv_path), "--no-plot"]) == 0
    assert csv_path.exists()
    assert not (tmp_path / "b.png").exists()


def test_usage_error():
    assert main(["replay"]) == 2
    assert main(["bench", "--workload", "bogus"]) == 2
