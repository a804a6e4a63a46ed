import json
import subprocess
import sys

import pytest

from objprof.cli import main, truth_path
from objprof.trace import load_trace, validate_trace


def gen(tmp_path, *extra, name="trace.ndjson"):
    out = tmp_path / name
    assert main(["gen", "--out", str(out), *extra]) == 0
    return out


def test_gen_writes_trace_and_truth(tmp_path):
    out = gen(tmp_path, "--scenario", "bloat", "--samples", "2000")
    assert truth_path(out) == tmp_path / "trace.truth.json"
    assert validate_trace(load_trace(out)) == []
    assert json.loads(truth_path(out).read_text())["version"] == 1


def test_gen_is_reproducible(tmp_path):
    a = gen(tmp_path, "--scenario", "numa", "--seed", "4", "--samples", "1000", name="a.ndjson")
    b = gen(tmp_path, "--scenario", "numa", "--seed", "4", "--samples", "1000", name="b.ndjson")
    assert a.read_bytes() == b.read_bytes()
    assert truth_path(a).read_bytes() == truth_path(b).read_bytes()


def test_gen_infeasible_shares(tmp_path):
    out = tmp_path / "bad.ndjson"
    rc = main(["gen", "--scenario", "bloat", "--out", str(out),
               "--param", "share=0.9", "--param", "unattributed=0.5"])
    assert rc == 2
    assert not out.exists() and not truth_path(out).exists()


def test_gen_unknown_param(tmp_path):
    assert main(["gen", "--scenario", "bloat", "--out", str(tmp_path / "x"),
                 "--param", "bogus=1"]) == 2


def test_usage_errors(capsys):
    for argv in ([], ["frobnicate"], ["analyze"], ["analyze", "t", "--out", "p", "--min-size", "-1"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2


def test_full_pipeline(tmp_path, capsys):
    trace = gen(tmp_path, "--scenario", "bloat", "--format", "binary")
    prof = tmp_path / "p.json"
    assert main(["analyze", str(trace), "--out", str(prof)]) == 0
    first = prof.read_bytes()
    assert main(["analyze", str(trace), "--out", str(prof)]) == 0
    assert prof.read_bytes() == first
    capsys.readouterr()
    assert main(["report", str(prof), "--top", "3"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("== objects by L1_MISS ==")
    assert "(21.0%)" in text.splitlines()[2]
    assert main(["report", str(prof), "--json", "--top", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["entries"]) == 1 and data["entries"][0]["rank"] == 1
    assert main(["verify", str(trace), "--truth", str(truth_path(trace))]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_report_errors(tmp_path, capsys):
    trace = gen(tmp_path, "--scenario", "stride", "--samples", "500")
    prof = tmp_path / "p.json"
    main(["analyze", str(trace), "--out", str(prof)])
    assert main(["report", str(prof), "--metric", "CYCLES"]) == 2
    assert main(["report", str(prof), "--top", "0"]) == 2
    assert main(["report", str(tmp_path / "missing.json")]) == 3
    capsys.readouterr()
    assert main(["report", str(prof), "--numa"]) == 0
    assert "no NUMA data" in capsys.readouterr().out


def test_invalid_trace_exit_3(tmp_path):
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"seq":0,"time":0,"thread":0,"move":{"src":1,"dst":2,"size":3}}\n')
    assert main(["analyze", str(bad), "--out", str(tmp_path / "p.json")]) == 3
    assert main(["verify", str(bad)]) == 3
    garbage = tmp_path / "garbage.ndjson"
    garbage.write_text("{oops\n")
    assert main(["verify", str(garbage)]) == 3


def test_empty_trace(tmp_path, capsys):
    empty = tmp_path / "empty.ndjson"
    empty.write_bytes(b"")
    prof = tmp_path / "p.json"
    assert main(["analyze", str(empty), "--out", str(prof)]) == 0
    data = json.loads(prof.read_text())
    assert data["sites"] == [] and data["unattributed"] == {"samples": 0}
    assert main(["verify", str(empty)]) == 0
    capsys.readouterr()
    assert main(["report", str(prof)]) == 0
    assert "no attributed samples" in capsys.readouterr().out


def test_verify_detects_mutated_engine(tmp_path, capsys):
    trace = gen(tmp_path, "--scenario", "gc_churn", "--samples", "3000")
    assert main(["verify", str(trace)]) == 0
    assert main(["verify", str(trace), "--no-epoch-fallback"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_min_size_zero(tmp_path):
    trace = gen(tmp_path, "--scenario", "mixed", "--samples", "2000")
    p0, p1 = tmp_path / "p0.json", tmp_path / "p1.json"
    assert main(["analyze", str(trace), "--out", str(p0), "--min-size", "0"]) == 0
    assert main(["analyze", str(trace), "--out", str(p1)]) == 0
    n0 = sum(s["alloc_count"] for s in json.loads(p0.read_text())["sites"])
    n1 = sum(s["alloc_count"] for s in json.loads(p1.read_text())["sites"])
    assert n0 > n1
    assert main(["verify", str(trace), "--min-size", "0"]) == 0


def test_parallel_analyze(tmp_path):
    trace = gen(tmp_path, "--scenario", "gc_churn", "--samples", "2000")
    assert main(["analyze", str(trace), "--out", str(tmp_path / "p.json"), "--parallel"]) == 3
    single = gen(tmp_path, "--scenario", "bloat", "--samples", "1000", name="s.ndjson")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", str(single), "--out", str(a), "--parallel", "2"]) == 0
    assert main(["analyze", str(single), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "objprof", "verify", str(tmp_path / "nope")],
                       capture_output=True)
    assert r.returncode == 3
