import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfhash import invariants as inv
from lfhash.encoding import make_value
from lfhash.explorer import advance, at, run_op, run_random, settle
from lfhash.heap_tables import Hashtable
from lfhash.model import ModelConfig, init


def ids(violations):
    return {v.ident for v in violations}


def test_catalogue_shape():
    assert len(inv.ALL) >= 200
    assert inv.TOMBSTONES == {"Cu5", "Ne21"}
    fams = {i.family for i in inv.REGISTRY.values()}
    assert {"Co", "Cn", "No", "He", "Cu", "Ne", "fi", "de", "in", "as", "rA", "nT", "mi", "mC", "mE", "pr", "bu", "Ot"} <= fams


def test_resolve_ids_and_families():
    assert [i.ident for i in inv.resolve(["He1"])] == ["He1"]
    assert {i.ident for i in inv.resolve(["Cn"])} >= {"Cn1", "Cn2", "Cn3", "Cn4"}
    with pytest.raises(KeyError):
        inv.resolve(["Zz1"])


@pytest.mark.parametrize(
    "config",
    [
        ModelConfig(),
        ModelConfig(processes=1, initial_size=4, initial_bound=1),
        ModelConfig(processes=3, initial_size=16, initial_bound=3, sizing="tight"),
    ],
)
def test_initial_state_satisfies_everything(config):
    assert inv.check(init(config)) == []
    assert inv.check(init(config), guarded=False) == []


def _walk_states(seed: int, steps: int, every: int):
    r = run_random(ModelConfig(), seed=seed, max_steps=steps, keep_states=every, progress="off")
    assert r.ok, r.findings
    return r.kept


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_guards_do_not_hide_violations(seed):
    for s in _walk_states(seed, 400, 7):
        assert inv.check(s) == inv.check(s, guarded=False) == []


def test_heap_slot_zero_is_detected():
    s = init(ModelConfig())
    s.heap.tables[0] = Hashtable.blank(8, 3)
    assert "He1" in ids(inv.check(s))


def test_extra_ghost_entry_is_detected():
    s = init(ModelConfig())
    s.X[7] = make_value(7, 1)
    assert inv.check(s)


def test_double_count_is_detected():
    s = init(ModelConfig())
    settle(s, 1)
    run_op(s, 1, ("insert", make_value(2, 1)))
    advance(s, 1, at(14, 1), [("find", 2)])
    assert inv.check(s, ["Cn1"]) == []
    s.procs[1].cnt_fi = 2
    assert ids(inv.check(s)) >= {"Cn1"}


def test_busy_counter_drift_is_detected():
    s = init(ModelConfig())
    s.busy[1] += 1
    assert any(i.startswith("bu") for i in ids(inv.check(s)))


def test_lost_table_is_detected():
    s = init(ModelConfig())
    del s.heap.tables[1]
    found = ids(inv.check(s))
    assert {"He2", "He3"} <= found


def test_first_only_stops_early():
    s = init(ModelConfig())
    s.busy[1] += 1
    s.X[7] = make_value(7, 1)
    assert len(inv.check(s, first_only=True)) == 1
    assert len(inv.check(s)) > 1


def test_subset_restricts_checks():
    s = init(ModelConfig())
    s.heap.tables[0] = Hashtable.blank(8, 3)
    assert ids(inv.check(s, ["Cn"])) == set()
    assert ids(inv.check(s, ["He1"])) == {"He1"}


def test_violation_serialises():
    s = init(ModelConfig())
    s.heap.tables[0] = Hashtable.blank(8, 3)
    v = inv.check(s, ["He1"])[0]
    assert v.to_json() == {"id": "He1", "witness": {"h": 0}}


def test_set_counts_are_reported():
    s = init(ModelConfig())
    counts = inv.count_sets(s)
    assert counts["nbSet1"] == 1 and "prSet1(1)" in counts
