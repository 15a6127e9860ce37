import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfhash.encoding import NULL, make_value
from lfhash.errors import ConstraintError, NotEnabled
from lfhash.explorer import advance, at, run_op, settle
from lfhash.model import (
    LABEL_SET,
    LABELS,
    ModelConfig,
    ModelState,
    choices,
    default_choice,
    enabled,
    init,
    needs_choice,
    step,
    successor,
)
from lfhash.spec_oracle import ReferenceMap


def test_label_catalogue():
    assert len(LABELS) == 80 == len(LABEL_SET)


def test_initial_state():
    s = init(ModelConfig(processes=3, initial_size=16, initial_bound=5))
    assert s.currInd == 1
    assert s.H[1] == 1 and s.H[2:] == [0] * 5
    assert s.busy[1] == 1 and s.prot[1] == 1
    assert s.next == [0] * 7
    assert s.heap.h_index == 2 and s.heap.live_count() == 1
    assert s.X == {} and s.Y == [NULL] * 16
    assert all(pr.pc == 0 and pr.index == 1 for pr in s.procs[1:])


def test_config_validation():
    with pytest.raises(ConstraintError):
        ModelConfig(processes=2, initial_size=8, initial_bound=4)
    with pytest.raises(ValueError):
        ModelConfig(processes=0)
    with pytest.raises(ValueError):
        ModelConfig(mixer="fancy")


def test_choice_points():
    s = init(ModelConfig())
    assert not needs_choice(s, 1)
    assert choices(s, 1) == [None]
    settle(s, 1)
    assert needs_choice(s, 1)
    assert choices(s, 1, [("find", 1)]) == [("find", 1)]
    with pytest.raises(NotEnabled):
        step(s, 1, ("upsert", 1))
    with pytest.raises(NotEnabled):
        step(s, 1, ("find", 0))
    with pytest.raises(NotEnabled):
        step(s, 1, ("insert", 5))  # address field is 0


def test_successor_is_deterministic_and_leaves_source_alone():
    s = init(ModelConfig())
    settle(s, 1)
    before = s.fingerprint()
    a = successor(s, 1, ("insert", make_value(2, 1)))
    b = successor(s, 1, ("insert", make_value(2, 1)))
    assert a.fingerprint() == b.fingerprint()
    assert s.fingerprint() == before


def test_json_round_trip_preserves_state():
    s = init(ModelConfig())
    settle(s, 1, [("insert", make_value(2, 1)), ("insert", make_value(3, 1))])
    advance(s, 2, at(60, 2))
    t = ModelState.from_json(s.to_json())
    assert t.fingerprint()[:-1] == s.fingerprint()[:-1]  # everything but the event log


def test_single_process_calls_match_reference():
    s = init(ModelConfig(processes=1, initial_size=8, initial_bound=3))
    ref = ReferenceMap()
    settle(s, 1)
    script = [
        ("insert", make_value(1, 1)),
        ("find", 1),
        ("insert", make_value(1, 2)),
        ("assign", make_value(1, 3)),
        ("find", 1),
        ("delete", 1),
        ("delete", 1),
        ("find", 1),
    ] + [("insert", make_value(a, a)) for a in range(2, 9)]
    for op, arg in script:
        assert run_op(s, 1, (op, arg)) == getattr(ref, op)(arg)
    assert s.X == ref.contents()
    assert s.migrations >= 1


@given(st.lists(st.tuples(st.sampled_from(["find", "delete", "insert", "assign"]), st.integers(1, 5), st.integers(1, 3)), max_size=25))
def test_sequential_model_agrees_with_reference(script):
    s = init(ModelConfig(processes=1, initial_size=8, initial_bound=3))
    ref = ReferenceMap()
    settle(s, 1)
    for op, a, pay in script:
        arg = a if op in ("find", "delete") else make_value(a, pay)
        assert run_op(s, 1, (op, arg)) == getattr(ref, op)(arg)
    assert s.X == ref.contents()


def test_default_choice_prefers_free_slots():
    s = init(ModelConfig())
    s.procs[1].pc = 78
    s.prot[2] = 1
    assert default_choice(s, 1) == 3
    assert enabled(s, 1, 3) and not enabled(s, 1, 9)
