import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfhash.errors import ConstraintError, ProtocolViolation
from lfhash.heap_tables import HeapModel, LiveHeap, check_dimensions, next_dimensions
from lfhash.shared_control import BUSY, PROT, SharedControl


def test_dimension_constraint():
    check_dimensions(8, 3, 2)  # 3 + 4 < 8
    with pytest.raises(ConstraintError):
        check_dimensions(8, 4, 2)  # 4 + 4 == 8
    with pytest.raises(ConstraintError):
        check_dimensions(3, 0, 4)
    with pytest.raises(ConstraintError):
        check_dimensions(8, -1, 1)


@given(
    st.integers(1, 500),
    st.integers(0, 500),
    st.integers(1, 16),
    st.sampled_from(["pow2", "tight"]),
)
def test_successor_dimensions_leave_room(bound, dels, P, policy):
    dels = min(dels, bound)
    size, new_bound = next_dimensions(bound, dels, P, policy)
    assert new_bound > bound - dels + 2 * P
    assert size > new_bound + 2 * P
    assert size >= P
    check_dimensions(size, new_bound, P)
    if policy == "pow2":
        assert size & (size - 1) == 0


def test_unknown_sizing_policy():
    with pytest.raises(ConstraintError):
        next_dimensions(3, 0, 2, "golden")


def test_heap_model_ids_start_at_one_and_never_repeat():
    heap = HeapModel(2)
    a = heap.allocate(8, 3)
    b = heap.allocate(8, 3)
    assert (a, b) == (1, 2)
    heap.deallocate(a)
    assert heap.allocate(8, 3) == 3
    assert 0 not in heap
    assert heap.live_count() == 2
    assert heap.peak_live == 2


def test_heap_model_double_free_is_reported():
    heap = HeapModel(1)
    h = heap.allocate(4, 1)
    heap.deallocate(h)
    with pytest.raises(ProtocolViolation):
        heap.deallocate(h)
    with pytest.raises(ProtocolViolation):
        heap.deallocate(42)


def test_heap_model_copy_is_deep():
    heap = HeapModel(1)
    h = heap.allocate(4, 1)
    other = heap.copy()
    other.tables[h].table[0] = 99
    assert heap.tables[h].table[0] == 0


def test_live_heap_tracks_live_and_freed():
    heap = LiveHeap(2)
    t1 = heap.allocate(8, 3)
    t2 = heap.allocate(8, 3)
    assert heap.live_count() == 2 and heap.allocations == 2
    heap.deallocate(t1)
    assert t1.freed and not heap.is_live(t1) and heap.is_live(t2)
    with pytest.raises(ProtocolViolation):
        heap.deallocate(t1)
    assert heap.peak_live == 2


def test_live_table_cas():
    t = LiveHeap(1).allocate(4, 1)
    assert t.cas(0, 0, 7)
    assert not t.cas(0, 0, 8)
    assert t.slots[0] == 7


def test_registry_initial_state():
    c = SharedControl(2)
    snap = c.snapshot()
    assert snap["currInd"] == 1
    assert snap["busy"] == [1, 0, 0, 0] and snap["prot"] == [1, 0, 0, 0]
    assert len(snap["H"]) == 4


def test_counters_and_underflow():
    c = SharedControl(1)
    c.ctr_inc(BUSY, 2)
    assert c.ctr_dec(BUSY, 2) == 0
    with pytest.raises(ProtocolViolation):
        c.ctr_dec(BUSY, 2)
    with pytest.raises(IndexError):
        c.ctr_inc(PROT, 3)
    with pytest.raises(ValueError):
        c.ctr_inc("other", 1)


def test_slot_claim_and_successor_link():
    c = SharedControl(2)
    assert not c.tas_prot(1)
    assert c.tas_prot(2)
    assert not c.tas_prot(2)
    assert c.cas_next(1, 2)
    assert not c.cas_next(1, 3)
    assert c.next[1] == 2


def test_current_index_swing_runs_hook_once():
    c = SharedControl(2)
    calls = []
    assert c.cas_currInd(1, 2, lambda: calls.append(1))
    assert not c.cas_currInd(1, 3, lambda: calls.append(2))
    assert c.currInd == 2 and calls == [1]


def test_clear_registry_entry():
    c = SharedControl(2)
    marker = object()
    c.store_H(2, marker)
    assert not c.cas_H_clear(2, object())
    assert c.cas_H_clear(2, marker)
    assert not c.cas_H_clear(2, marker)


def test_slot_claim_has_one_winner_under_threads():
    for _ in range(50):
        c = SharedControl(4)
        wins = []
        gate = threading.Barrier(4)

        def claim():
            gate.wait()
            wins.append(c.tas_prot(5))

        ts = [threading.Thread(target=claim) for _ in range(4)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        assert wins.count(True) == 1
