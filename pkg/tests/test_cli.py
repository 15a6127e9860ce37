import json
import subprocess
import sys

import pytest

from lfhash.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_model_walk_exits_zero(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(["model", "--p", "2", "--steps", "300", "--seed", "1", "--report", str(path)], capsys)
    assert code == EXIT_OK
    report = json.loads(path.read_text())
    assert report == json.loads(out)
    assert report["ok"] and report["schema"] == 1
    assert {"states", "violations", "ops", "wallclock"} <= set(report)


def test_model_reports_are_deterministic(capsys):
    reports = []
    for _ in range(2):
        code, out, _ = run(["model", "--steps", "200", "--seed", "3", "--runs", "2"], capsys)
        d = json.loads(out)
        d.pop("wallclock")
        reports.append(d)
    assert reports[0] == reports[1]


def test_invalid_process_count_is_a_usage_error(capsys):
    code, _, err = run(["model", "--p", "0"], capsys)
    assert code == EXIT_USAGE and "--p" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["model", "--size", "4"],
        ["model", "--invariants", "Zz9"],
        ["model", "--exhaustive"],
        ["model", "--script-a", "upsert:1"],
        ["model", "--scenario", "nope"],
        ["model", "--p", "1", "--script-b", "find:1"],
        ["stress", "--threads", "0"],
        ["stress", "--mix", "find"],
        ["bench", "--threads", "one"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == EXIT_USAGE


def test_exhaustive_scripts(capsys):
    code, out, _ = run(["model", "--exhaustive", "--script-a", "insert:3:1", "--script-b", "insert:3:2"], capsys)
    d = json.loads(out)
    assert code == EXIT_OK and d["ok"] and d["interleavings"] > 0 and d["kind"] == "exhaustive"


def test_exhaustive_budget_abort(capsys):
    code, _, err = run(
        ["model", "--exhaustive", "--script-a", "insert:3:1", "--script-b", "insert:3:2", "--budget", "10"], capsys
    )
    assert code == EXIT_VIOLATION and "aborted" in err


def test_scenarios(capsys):
    code, out, _ = run(["model", "--scenario", "70,84", "--quiet"], capsys)
    assert code == EXIT_OK and out == ""
    code, out, _ = run(["model", "--list-scenarios"], capsys)
    assert code == EXIT_OK and "123" in out


def test_violation_exit_and_trace(capsys, tmp_path, monkeypatch):
    from lfhash import explorer

    real = explorer.inv.check

    def planted(s, subset=None, **kw):
        out = real(s, subset, **kw)
        if s.steps == 10:
            out.append(explorer.inv.Violation("Xx1", {}))
        return out

    monkeypatch.setattr(explorer.inv, "check", planted)
    trace = tmp_path / "trace.txt"
    code, out, _ = run(["model", "--steps", "50", "--trace", str(trace)], capsys)
    assert code == EXIT_VIOLATION
    assert json.loads(out)["violations"][0]["id"] == "Xx1"
    lines = trace.read_text().splitlines()
    assert lines[0] == "# seed 0" and len(lines) == 11


def test_config_file_and_env_report(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"steps": 120, "runs": 2}))
    rep = tmp_path / "env.json"
    monkeypatch.setenv("LFHASH_REPORT", str(rep))
    code, _, _ = run(["model", "--config", str(cfg), "--quiet"], capsys)
    d = json.loads(rep.read_text())
    assert code == EXIT_OK and d["runs"] == 2 and d["steps"] == 240
    code, _, _ = run(["model", "--config", str(cfg), "--steps", "10", "--quiet"], capsys)
    assert json.loads(rep.read_text())["steps"] == 20
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["model", "--config", str(cfg)], capsys)[0] == EXIT_USAGE


def test_stress_and_history(capsys, tmp_path):
    code, out, _ = run(["stress", "--threads", "2", "--ops", "2000", "--bound", "1", "--size", "16"], capsys)
    d = json.loads(out)
    assert code == EXIT_OK and d["ok"] and d["peak_live"] <= 4
    hist = tmp_path / "h.jsonl"
    code, out, _ = run(["stress", "--threads", "2", "--history", "--windows", "40", "--history-file", str(hist)], capsys)
    assert code == EXIT_OK and json.loads(out)["windows"] == 40
    code, out, _ = run(["lin", str(hist)], capsys)
    assert code == EXIT_OK and json.loads(out)["ok"]


def test_lin_rejects_bad_history(capsys, tmp_path):
    hist = tmp_path / "h.jsonl"
    hist.write_text(
        '{"time": 0, "process": 1, "kind": "inv", "op": "find", "arg": 1}\n'
        '{"time": 1, "process": 1, "kind": "res", "op": "find", "arg": 1, "result": 4294967297}\n'
    )
    code, out, _ = run(["lin", str(hist)], capsys)
    assert code == EXIT_VIOLATION and not json.loads(out)["ok"]
    assert run(["lin", str(tmp_path / "missing.jsonl")], capsys)[0] == EXIT_USAGE


def test_bench_zero_duration(capsys):
    code, out, _ = run(["bench", "--duration", "0"], capsys)
    assert code == EXIT_OK and json.loads(out)["rows"] == []


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lfhash", "model", "--steps", "20", "--quiet"], capture_output=True)
    assert proc.returncode == 0
