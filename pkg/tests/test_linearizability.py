import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfhash.encoding import NULL, make_value
from lfhash.linearizability import (
    Event,
    History,
    HistoryError,
    Operation,
    WindowTooLarge,
    brute_force_linearizable,
    check_history,
    check_linearizable,
)

from lin_histories import random_initial, random_operations

V = make_value(1, 7)


def op(p, name, arg, res, start, end):
    return Operation(p, name, arg, res, start, end)


def test_sequential_insert_then_find():
    ops = [op(1, "insert", V, True, 0, 1), op(2, "find", 1, V, 2, 3)]
    v = check_linearizable(ops)
    assert v.ok and v.order == [0, 1]


def test_find_of_a_value_never_inserted():
    assert not check_linearizable([op(1, "find", 1, V, 0, 1)]).ok


def test_overlapping_find_may_precede_insert():
    ops = [op(1, "insert", V, True, 0, 3), op(2, "find", 1, NULL, 1, 2)]
    v = check_linearizable(ops)
    assert v.ok and v.order == [1, 0]


def test_real_time_order_is_respected():
    # the find finished before the insert began, so it cannot see the value
    ops = [op(2, "find", 1, V, 0, 1), op(1, "insert", V, True, 2, 3)]
    assert not check_linearizable(ops).ok


def test_pending_operation_may_or_may_not_take_effect():
    ins = op(1, "insert", V, None, 0, None)
    assert check_linearizable([ins, op(2, "find", 1, V, 1, 2)]).ok
    assert check_linearizable([ins, op(2, "find", 1, NULL, 1, 2)]).ok


def test_two_successful_inserts_of_one_address_are_rejected():
    ops = [op(1, "insert", V, True, 0, 2), op(2, "insert", make_value(1, 8), True, 1, 3)]
    assert not check_linearizable(ops).ok


def test_window_limit_is_enforced():
    ops = [op(i, "find", 1, NULL, 2 * i, 2 * i + 1) for i in range(9)]
    with pytest.raises(WindowTooLarge):
        check_linearizable(ops, limit=8)


def test_all_final_states_are_collected():
    ops = [op(1, "assign", V, None, 0, 3), op(2, "assign", make_value(1, 8), None, 1, 2)]
    v = check_linearizable(ops, all_finals=True)
    assert v.final_states == {frozenset({(1, V)}), frozenset({(1, make_value(1, 8))})}


@settings(max_examples=100)
@given(st.integers(0, 2**32))
def test_agrees_with_enumeration(seed):
    rng = random.Random(seed)
    ops = random_operations(rng)
    initial = random_initial(rng)
    assert check_linearizable(ops, initial).ok == brute_force_linearizable(ops, initial)


def test_enumeration_sees_both_verdicts():
    rng = random.Random(0)
    verdicts = set()
    for _ in range(100):
        ops = random_operations(rng)
        verdicts.add(brute_force_linearizable(ops, random_initial(rng)))
    assert verdicts == {True, False}


def _events(*rows):
    return History([Event(*r) for r in rows])


def test_history_validation():
    with pytest.raises(HistoryError):
        _events((0, 1, "res", "find", 1, NULL)).validate()
    with pytest.raises(HistoryError):
        _events((0, 1, "inv", "find", 1), (1, 1, "inv", "find", 2)).validate()
    with pytest.raises(HistoryError):
        _events((1, 1, "inv", "find", 1), (0, 1, "res", "find", 1, NULL)).validate()


def test_windows_split_at_quiescence_and_states_carry(tmp_path):
    h = _events(
        (0, 1, "inv", "assign", V),
        (1, 2, "inv", "assign", make_value(1, 8)),
        (2, 1, "res", "assign", V, None),
        (3, 2, "res", "assign", make_value(1, 8), None),
        (4, 1, "inv", "find", 1),
        (5, 1, "res", "find", 1, make_value(1, 8)),
    )
    assert [len(w) for w in h.windows()] == [4, 2]
    r = check_history(h)
    assert r.ok and r.windows == 2 and r.concurrent_windows == 1 and r.max_states == 2
    path = tmp_path / "h.jsonl"
    h.dump(path)
    assert History.load(path).events == h.events


def test_history_failure_names_window():
    h = _events(
        (0, 1, "inv", "insert", V), (1, 1, "res", "insert", V, True),
        (2, 1, "inv", "insert", V), (3, 1, "res", "insert", V, True),
    )
    r = check_history(h)
    assert not r.ok and r.failed_window == 1
