import random
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfhash.encoding import NULL, make_value
from lfhash.errors import ConstraintError, ProtocolViolation
from lfhash.linearizability import Recorder, check_history
from lfhash.lockfree_map import LockFreeHashMap, default_bound
from lfhash.spec_oracle import ReferenceMap
from lfhash.stress import fine_switching, table_duplicates


def test_basic_calls():
    m = LockFreeHashMap(1, 16)
    h = m.register()
    v, w = make_value(5, 1), make_value(5, 2)
    assert h.find(5) == NULL
    assert h.insert(v) is True
    assert h.insert(w) is False
    assert h.find(5) == v
    assert h.assign(w) is None
    assert h.find(5) == w
    assert h.delete(5) is True
    assert h.delete(5) is False
    assert h.find(5) == NULL


def test_argument_checks():
    h = LockFreeHashMap(1, 16).register()
    with pytest.raises(ConstraintError):
        h.find(0)
    with pytest.raises(ConstraintError):
        h.insert(7)  # address field 0
    with pytest.raises(ConstraintError):
        h.assign(NULL)


def test_construction_checks():
    with pytest.raises(ConstraintError):
        LockFreeHashMap(0)
    with pytest.raises(ConstraintError):
        LockFreeHashMap(2, 8, 4)
    with pytest.raises(ConstraintError):
        LockFreeHashMap(2, 8, sizing="golden")
    assert default_bound(32, 2) == 27
    assert default_bound(4, 2) == 1


def test_registration_limit():
    m = LockFreeHashMap(2, 16)
    a, b = m.register(), m.register()
    assert (a.p, b.p) == (1, 2) and m.handles == (a, b)
    with pytest.raises(ConstraintError):
        m.register()


def test_growth_keeps_contents():
    m = LockFreeHashMap(1, 4, 1)
    h = m.register()
    vals = {a: make_value(a, a) for a in range(1, 200)}
    for v in vals.values():
        assert h.insert(v)
    h.release()
    assert m.contents() == vals
    assert m.migrations > 3
    assert m.live_tables() <= 2
    assert m.peak_live <= 2
    assert table_duplicates(m.current_table().slots) == []


@given(
    st.lists(
        st.tuples(st.sampled_from(["find", "delete", "insert", "assign"]), st.integers(1, 12), st.integers(0, 4)),
        max_size=200,
    ),
    st.sampled_from(["pow2", "tight"]),
)
def test_single_handle_matches_reference(script, sizing):
    m = LockFreeHashMap(2, 8, 1, sizing=sizing)
    h, ref = m.register(), ReferenceMap()
    for op, a, pay in script:
        arg = a if op in ("find", "delete") else make_value(a, pay)
        assert getattr(h, op)(arg) == getattr(ref, op)(arg)
    h.release()
    assert m.contents() == ref.contents()


def test_handles_can_take_turns():
    m = LockFreeHashMap(3, 8, 1)
    hs = [m.register() for _ in range(3)]
    ref = ReferenceMap()
    rng = random.Random(4)
    for i in range(3000):
        h = hs[rng.randrange(3)]
        a = rng.randint(1, 20)
        op = rng.choice(["find", "delete", "insert", "assign"])
        arg = a if op in ("find", "delete") else make_value(a, i % 7)
        assert getattr(h, op)(arg) == getattr(ref, op)(arg)
        if rng.random() < 0.1:
            h.release()
    for h in hs:
        h.release()
    assert m.contents() == ref.contents()
    assert m.peak_live <= 6


def test_force_migration_moves_everything():
    m = LockFreeHashMap(2, 32)
    h = m.register()
    for a in range(1, 15):
        h.insert(make_value(a, 9))
    h.delete(3)
    h.release()
    before = m.contents()
    old = m.current_table()
    h.force_migration()
    h.release()
    assert m.migrations == 1
    assert m.current_table() is not old and old.freed
    assert m.contents() == before
    assert m.live_tables() == 1


def test_events_describe_calls():
    rec = Recorder()
    m = LockFreeHashMap(1, 16, on_event=rec)
    h = m.register()
    h.insert(make_value(2, 1))
    h.find(2)
    hist = rec.drain()
    assert [(e.kind, e.op) for e in hist.events] == [
        ("inv", "insert"), ("res", "insert"), ("inv", "find"), ("res", "find")
    ]
    assert check_history(hist).ok


def test_stats_shape():
    m = LockFreeHashMap(2, 16)
    st_ = m.stats()
    assert st_["live_tables"] == 1 and st_["migrations"] == 0 and st_["current_size"] == 16


def test_use_after_free_is_caught():
    m = LockFreeHashMap(1, 16)
    h = m.register()
    h.insert(make_value(1, 1))
    h.release()
    t = m.current_table()
    m.heap.deallocate(t)
    with pytest.raises(ProtocolViolation):
        h.find(1)


def test_concurrent_disjoint_writers():
    m = LockFreeHashMap(4, 16, 1)
    hs = [m.register() for _ in range(4)]
    errors = []

    def work(i):
        try:
            h = hs[i]
            for k in range(300):
                a = 1 + i * 1000 + k
                assert h.insert(make_value(a, i))
                if k % 3 == 0:
                    assert h.delete(a)
            h.release()
        except BaseException as exc:  # pragma: no cover - surfaced below
            errors.append(exc)

    with fine_switching():
        ts = [threading.Thread(target=work, args=(i,)) for i in range(4)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
    assert errors == []
    expect = {1 + i * 1000 + k: make_value(1 + i * 1000 + k, i) for i in range(4) for k in range(300) if k % 3}
    assert m.contents() == expect
    assert m.peak_live <= 8
