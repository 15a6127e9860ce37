import pytest

from lfhash import explorer, model
from lfhash.encoding import make_value
from lfhash.explorer import (
    RACES,
    BudgetExceeded,
    Workload,
    advance,
    at,
    check_lock_freedom,
    format_trace,
    parse_script,
    pigeonhole_excess,
    replay,
    run_exhaustive,
    run_random,
    run_suite,
    settle,
)
from lfhash.model import ModelConfig, init
from lfhash.spec_oracle import ReferenceMap


def test_parse_script():
    assert parse_script("insert:3:2, find:3; delete:3, assign:4, release") == [
        ("insert", make_value(3, 2)),
        ("find", 3),
        ("delete", 3),
        ("assign", make_value(4, 1)),
        ("release", None),
    ]
    for bad in ("upsert:1", "find", "find:1:2", "release:1", "insert:0"):
        with pytest.raises(ValueError):
            parse_script(bad)


def test_zero_steps_reports_initial_state():
    r = run_random(ModelConfig(), seed=0, max_steps=0)
    assert r.ok and r.steps == 0 and r.states == 1 and r.checked_states == 1 and r.ops == 0


def test_short_walk_is_clean_and_deterministic():
    a = run_random(ModelConfig(), seed=1, max_steps=2000)
    b = run_random(ModelConfig(), seed=1, max_steps=2000)
    assert a.ok, a.findings
    assert a.to_json()["violations"] == [] and a.schedule == b.schedule
    assert a.migrations >= 1 and a.peak_live <= 4 and a.atomicity_checked == a.ops > 0
    assert replay(ModelConfig(), a.schedule).fingerprint()[:-1] is not None


def test_replay_reproduces_walk():
    r = run_random(ModelConfig(), seed=2, max_steps=300, keep_states=300)
    s = replay(ModelConfig(), r.schedule)
    assert s.fingerprint() == r.kept[-1].fingerprint()


def test_scripted_single_process_matches_oracle():
    script = parse_script("insert:4:1, find:4, delete:4, find:4")
    r = run_random(ModelConfig(processes=1, initial_size=8, initial_bound=3), seed=0, max_steps=500, scripts={1: script})
    assert r.ok and r.quiescent
    ref = ReferenceMap()
    want = [(op, arg, getattr(ref, op)(arg)) for op, arg in script]
    assert r.results[1] == want


def test_adversarial_mode_and_default_choices():
    r = run_random(ModelConfig(), seed=5, max_steps=1500, mode="adversarial", choice_policy="default")
    assert r.ok and r.mode == "adversarial"


def test_three_processes_tight_sizing():
    r = run_random(ModelConfig(processes=3, initial_size=16, initial_bound=3, sizing="tight"), seed=3, max_steps=1500)
    assert r.ok and r.peak_live <= 6


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_random(ModelConfig(), mode="chaotic")
    with pytest.raises(KeyError):
        run_random(ModelConfig(), subset=["Nope1"])
    with pytest.raises(ValueError):
        run_random(ModelConfig(), check_every=0)


def test_sparse_checking_still_checks_ghost_steps():
    r = run_random(ModelConfig(), seed=4, max_steps=1000, check_every=50)
    assert r.ok and 20 < r.checked_states < 1000


def test_violation_produces_trace(monkeypatch):
    real = explorer.inv.check

    def broken(s, subset=None, **kw):
        out = real(s, subset, **kw)
        if s.steps == 40:
            out.append(explorer.inv.Violation("Xx1", {"planted": True}))
        return out

    monkeypatch.setattr(explorer.inv, "check", broken)
    r = run_random(ModelConfig(), seed=1, max_steps=200)
    assert not r.ok and r.steps == 40
    assert r.findings[0].ident == "Xx1" and r.findings[0].step == 40
    assert len(r.trace) == 40 and r.trace[0].split()[0] == "1" and r.trace[-1].split()[0] == "40"
    d = r.to_json()
    assert d["violations"][0]["id"] == "Xx1" and len(d["schedule"]) == 40 and d["final_state"]["steps"] == 40


def test_atomicity_breach_is_reported(monkeypatch):
    orig = model.TRANSITIONS[14]

    def double(s, pr, c):
        pr.cnt_fi += 1
        orig(s, pr, c)

    monkeypatch.setitem(model.TRANSITIONS, 14, double)
    r = run_random(ModelConfig(), seed=1, max_steps=2000, subset=["He1"])
    assert any(f.kind == "atomicity" for f in r.findings)


def test_lock_freedom_on_initial_and_walk_states():
    assert check_lock_freedom([init(ModelConfig())])
    r = run_random(ModelConfig(), seed=6, max_steps=600, keep_states=5, progress="off")
    res = check_lock_freedom(r.kept)
    assert res.ok and res.states == len(r.kept)


def test_corrupted_state_is_a_model_soundness_failure():
    s = init(ModelConfig())
    settle(s, 1)
    advance(s, 1, at(7, 1), [("find", 1)])
    s.H[s.procs[1].index] = 0
    del s.heap.tables[1]
    res = check_lock_freedom([s])
    assert not res
    f = res.failures[0]
    assert (f.process, f.label, f.reason, f.kind) == (1, 7, "not-enabled", "model-soundness")


def test_pigeonhole_count():
    s = init(ModelConfig())
    assert pigeonhole_excess(s) is None
    s.procs[1].pc = 78
    q = s.procs[2]
    q.pc, q.index, q.i_mig = 104, 1, 2  # three claims, the most one process can hold
    assert pigeonhole_excess(s) is None
    # an artificial state: two others each holding three claims exceeds 2P-1 = 5
    s = init(ModelConfig(processes=3, initial_size=16, initial_bound=3))
    s.procs[1].pc = 78
    for p, mig in ((2, 2), (3, 3)):
        q = s.procs[p]
        q.pc, q.index, q.i_mig = 104, 1, mig
    w = pigeonhole_excess(s)
    assert w == {"process": 1, "claims": 6, "limit": 5}


def test_suite_aggregates():
    seen = []
    suite = run_suite(ModelConfig(), range(3), 300, progress_cb=seen.append)
    assert suite.ok and suite.runs == 3 == len(seen) and suite.steps == 900
    d = suite.to_json()
    assert d["schema"] == explorer.SCHEMA_VERSION and {"states", "violations", "ops", "wallclock"} <= set(d)


def test_workload_idles_after_script():
    w = Workload(2, scripts={1: [("find", 1)]})
    assert w.has_next(1) and not w.has_next(2)
    assert w.take(1) == ("find", 1)
    assert not w.has_next(1)
    with pytest.raises(IndexError):
        w.take(1)


def test_trace_lines_name_process_and_label():
    lines = format_trace(ModelConfig(), [(1, None), (2, None), (1, None)])
    assert [l.split()[1:3] for l in lines] == [["p1", "L0"], ["p2", "L0"], ["p1", "L59"]]
    bad = format_trace(ModelConfig(), [(1, None)] * 6 + [(1, ("find", 0))])
    assert len(bad) == 7 and "!!" in bad[-1]


# exhaustive ---------------------------------------------------------------


def test_distinct_inserts_both_land():
    s = init(ModelConfig())
    r = run_exhaustive(
        s,
        {1: parse_script("insert:3:1"), 2: parse_script("insert:4:2")},
        limits={1: 40, 2: 40},
        postcondition=lambda a, b: None if set(b.X) == {3, 4} else {"X": sorted(b.X)},
    )
    assert r.ok and r.leaves > 0 and r.interleavings > 1000


def test_same_address_inserts_have_one_winner():
    s = init(ModelConfig())

    def one_true(a, b):
        res = [e[4] for e in explorer.responses(a, b)]
        return None if sorted(res) == [False, True] else {"results": res}

    r = run_exhaustive(
        s, {1: parse_script("insert:3:1"), 2: parse_script("insert:3:2")}, limits={1: 40, 2: 40}, postcondition=one_true
    )
    assert r.ok


def test_budget_overrun_aborts():
    s = init(ModelConfig())
    with pytest.raises(BudgetExceeded):
        run_exhaustive(s, {1: parse_script("insert:3:1"), 2: parse_script("insert:3:2")}, limits={1: 40, 2: 40}, budget=50)


def test_start_state_is_not_modified():
    s = init(ModelConfig())
    fp = s.fingerprint()
    run_exhaustive(s, {1: parse_script("find:1"), 2: parse_script("find:1")}, limits={1: 12, 2: 12})
    assert s.fingerprint() == fp


@pytest.mark.parametrize("name", list(RACES))
def test_race_window(name):
    r = RACES[name].run()
    assert r.ok, r.findings[:3]
    assert r.contested > 0
    assert max(r.max_steps.values()) <= 16
    assert r.to_json()["interleavings"] == r.interleavings


def test_race_postcondition_catches_a_broken_clear(monkeypatch):
    def clear_without_compare(s, pr, c):
        i = pr.i_rA
        s.H[i] = 0
        pr.pc = 71
        s.record(("cas", pr.p, "70", True, i, pr.h_rA))

    monkeypatch.setitem(model.TRANSITIONS, 70, clear_without_compare)
    r = run_exhaustive(
        RACES["70"].build(),
        scripts=RACES["70"].scripts,
        postcondition=RACES["70"].postcondition,
        subset=["He1"],
    )
    assert any(f["kind"] in ("postcondition", "protocol") for f in r.findings)


def test_race_postcondition_catches_a_broken_claim(monkeypatch):
    def claim_without_test(s, pr, c):
        pr.i_nT = c
        s.prot[c] = 1
        pr.b_nT = True
        pr.pc = 81
        s.record(("cas", pr.p, "78", True, c))

    monkeypatch.setitem(model.TRANSITIONS, 78, claim_without_test)
    sc = RACES["78"]
    r = run_exhaustive(sc.build(), postcondition=sc.postcondition, choice_filter=sc.choice_filter, subset=["He1"])
    assert any(f["kind"] == "postcondition" for f in r.findings)
