"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line (shown live and repeated in the
terminal summary). The model suite is shared by several checks and runs
once per session; expect it to take several minutes.
"""

import random
import time

import pytest

from conftest import ACCEPTANCE_LINES
from lfhash import invariants
from lfhash.explorer import RACES, run_suite
from lfhash.linearizability import brute_force_linearizable, check_linearizable
from lfhash.model import ModelConfig, init
from lfhash.stress import READ_MOSTLY, migration_conservation, run_bench, run_stress, run_windows

from lin_histories import random_initial, random_operations

SUITE_CONFIG = ModelConfig(processes=2, initial_size=8, initial_bound=3)
SUITE_SEEDS = 1000
SUITE_STEPS = 2000


def report(name: str, ok: bool, detail: str, blocking: bool = True) -> None:
    tag = "PASS" if ok else ("FAIL" if blocking else "INFO")
    line = f"[{tag}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="session")
def suite():
    return run_suite(SUITE_CONFIG, seeds=range(SUITE_SEEDS), max_steps=SUITE_STEPS)


def kinds(suite, *wanted: str) -> list:
    return [(r.seed, f) for r in suite.failed for f in r.findings if f.kind in wanted]


def test_sequential_oracle_equivalence():
    r = run_stress(1, 100_000, addresses=256, seed=0)
    ok = r.ok and r.oracle_match is True and r.seconds < 5.0
    report("sequential oracle", ok, f"{r.ops} ops, match={r.oracle_match}, {r.seconds:.2f}s (limit 5s)")
    assert ok


@pytest.mark.slow
def test_model_invariant_suite(suite):
    bad = kinds(suite, "invariant")
    ok = not bad and suite.runs == SUITE_SEEDS and suite.min_migrations >= 1
    report(
        "model invariant suite",
        ok,
        f"{suite.runs} runs x {SUITE_STEPS} steps, {suite.states} states checked, "
        f"{len(bad)} violations, min migrations/run {suite.min_migrations}, {suite.wallclock:.0f}s",
    )
    assert ok, bad[:5]
    assert suite.ok, [f.to_json() for r in suite.failed for f in r.findings][:5]


def test_init_state():
    configs = [SUITE_CONFIG, ModelConfig(processes=3, initial_size=16, initial_bound=4), ModelConfig(processes=1)]
    found = {str(c.to_json()): invariants.check(init(c)) for c in configs}
    ok = not any(found.values())
    report("init check", ok, f"{len(configs)} configurations, {sum(map(len, found.values()))} violations")
    assert ok, found


def test_exhaustive_micro_races():
    rows = []
    for race in RACES.values():
        rep = race.run()
        steps = max(rep.max_steps.values())
        rows.append((race.name, rep.ok, rep.contested, rep.states, rep.interleavings, steps, race.limits))
    ok = all(r[1] and r[2] > 0 for r in rows)
    detail = ", ".join(f"{n}:{'ok' if good else 'BAD'}/{c} contested/{st} states" for n, good, c, st, *_ in rows)
    report("exhaustive races", ok, detail)
    assert ok, rows


@pytest.mark.slow
def test_atomicity(suite):
    bad = kinds(suite, "atomicity")
    ok = not bad and suite.atomicity_checked == suite.ops > 0
    report("atomicity", ok, f"{suite.atomicity_checked} completed calls with cnt=1, {len(bad)} exceptions")
    assert ok, bad[:5]


@pytest.mark.slow
def test_memory_bound(suite):
    model_bad = kinds(suite, "memory", "protocol", "pigeonhole")
    live = run_stress(4, 100_000, addresses=256, initial_size=16, initial_bound=1, seed=1)
    ok = (
        not model_bad
        and suite.peak_live <= 2 * SUITE_CONFIG.processes
        and live.ok
        and live.migrations >= 50
        and live.peak_live <= live.live_bound
    )
    report(
        "memory bound",
        ok,
        f"model peak {suite.peak_live}/{2 * SUITE_CONFIG.processes}; live 4x{live.ops // 4} ops, "
        f"{live.migrations} migrations, peak {live.peak_live}/{live.live_bound}, "
        f"{len(live.violations)} protocol errors",
    )
    assert ok, (model_bad[:5], live.to_json())


@pytest.mark.slow
def test_lock_freedom_enabledness(suite):
    bad = kinds(suite, "progress")
    ok = not bad and suite.progress_checked == suite.states
    report("lock-freedom enabledness", ok, f"{suite.progress_checked} states x {SUITE_CONFIG.processes} processes, {len(bad)} stuck")
    assert ok, bad[:5]


def test_migration_conservation():
    reports = [migration_conservation(processes=p, helpers=h, seed=s) for s, (p, h) in enumerate([(2, 1), (2, 2), (4, 4), (4, 1)])]
    ok = all(r.ok for r in reports)
    report(
        "migration conservation",
        ok,
        ", ".join(f"{len(r.before)} entries kept={r.before == r.after} dups={len(r.duplicates)}" for r in reports),
    )
    assert ok


def test_linearizability():
    w = run_windows(threads=4, windows=10_000, ops_per_window=8, hot_addresses=2, seed=0)
    rng = random.Random(2024)
    disagreements = 0
    for _ in range(100):
        ops = random_operations(rng)
        initial = random_initial(rng)
        disagreements += check_linearizable(ops, initial).ok != brute_force_linearizable(ops, initial)
    ok = w.ok and w.windows == 10_000 and disagreements == 0
    report(
        "linearizability",
        ok,
        f"{w.windows} windows ({w.concurrent_windows} concurrent) failed={w.failed_window}; "
        f"checker vs enumeration: {disagreements}/100 disagree",
    )
    assert ok


def test_throughput_scaling_is_informational():
    rows = run_bench([1, 4], 1.0, mix=READ_MOSTLY)
    one, four = (r["ops"] / r["seconds"] for r in rows)
    ratio = four / one
    report(
        "throughput scaling",
        ratio >= 1.5,
        f"1 thread {one:,.0f} ops/s, 4 threads {four:,.0f} ops/s, ratio {ratio:.2f} (target 1.5, non-blocking)",
        blocking=False,
    )
    assert one > 0 and four > 0
