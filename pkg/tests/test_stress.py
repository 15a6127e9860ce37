import json

import pytest

from lfhash.errors import ConstraintError
from lfhash.stress import (
    READ_MOSTLY,
    RandomWorkload,
    migration_conservation,
    parse_mix,
    run_bench,
    run_stress,
    run_windows,
    table_duplicates,
)
from lfhash.encoding import DEL, DONE, NULL, make_value


def test_parse_mix():
    assert parse_mix("find=90,insert=4,delete=4,assign=2") == READ_MOSTLY
    with pytest.raises(ValueError):
        parse_mix("find=1,upsert=3")
    with pytest.raises(ValueError):
        parse_mix("find")


def test_workload_is_seeded():
    a = RandomWorkload(3, 16).batch(50)
    b = RandomWorkload(3, 16).batch(50)
    assert a == b and a != RandomWorkload(4, 16).batch(50)


def test_duplicate_scan():
    v, w = make_value(1, 1), make_value(1, 2)
    assert table_duplicates([v, NULL, DEL, DONE]) == []
    assert table_duplicates([v, w]) == [1]


def test_single_thread_stress_matches_reference():
    r = run_stress(1, 5000, addresses=64, initial_size=16, initial_bound=2, seed=1)
    assert r.ok and r.oracle_match is True and r.migrations > 0


def test_multi_thread_stress_stays_within_table_bound():
    r = run_stress(4, 3000, addresses=64, initial_size=16, initial_bound=1, seed=2)
    assert r.ok and r.peak_live <= r.live_bound == 8 and r.migrations > 0
    assert r.violations == [] and r.duplicates == []


def test_recorded_windows_are_linearizable(tmp_path):
    path = tmp_path / "h.jsonl"
    r = run_windows(threads=3, windows=150, ops_per_window=6, seed=5, history_path=path)
    assert r.ok and r.windows == 150 and r.operations == 900
    lines = path.read_text().splitlines()
    assert len(lines) == 1800 and json.loads(lines[0])["kind"] == "inv"


def test_window_size_is_checked():
    with pytest.raises(ConstraintError):
        run_windows(threads=4, ops_per_window=9)


def test_migration_preserves_contents():
    for helpers in (1, 2):
        r = migration_conservation(processes=2, helpers=helpers, seed=helpers)
        assert r.ok, (r.migrated, r.duplicates)


def test_bench_rows():
    assert run_bench([1, 2], 0) == []
    rows = run_bench([1, 2], 0.05)
    assert [r["threads"] for r in rows] == [1, 2]
    assert all(r["ops"] > 0 for r in rows)
    ro = run_bench([2], 0.05, mix={"find": 1})
    assert ro[0]["migrations"] == 0
