"""The concurrent map.

Each :class:`ProcessHandle` is one participant. Its procedures follow the
model's statements one for one; the comments carry the model labels so the
two can be read side by side. Slot and registry reads are plain reads,
every write that other participants race on is a compare-and-swap or a
counter update performed atomically.

A handle acquires access to the current table lazily on its first
operation and keeps it between operations, exactly like a model process
that loops in its main loop. Call :meth:`ProcessHandle.release` to drop it.
"""

from __future__ import annotations

import itertools
import threading
import time
from typing import Callable

from .encoding import (
    DEL,
    DONE,
    MAX_ADDRESS,
    NULL,
    Mixer,
    adr,
    default_mix,
    identity_mix,
    is_user_value,
    mark_old,
    oldp,
    val,
)
from .errors import ConstraintError, ProtocolViolation
from .heap_tables import SIZING_POLICIES, LiveHeap, LiveTable, check_dimensions, next_dimensions
from .linearizability import Event
from .shared_control import BUSY, PROT, SharedControl

DEFAULT_INITIAL_SIZE = 32

MIXERS: dict[str, Mixer] = {"default": default_mix, "identity": identity_mix}


def default_bound(size: int, processes: int) -> int:
    """Largest bound admissible for ``size``, clamped to at least 1."""
    return max(1, size - 2 * processes - 1)


EventHook = Callable[[Event], None]


class LockFreeHashMap:
    """Lock-free resizable map from nonzero addresses to one-word values.

    Args:
        processes: maximum number of participants ``P``.
        initial_size: length of the first table.
        initial_bound: occupancy threshold of the first table; defaults to
            ``initial_size - 2P - 1`` clamped to at least 1.
        sizing: successor sizing policy, ``"pow2"`` or ``"tight"``.
        mixer: address mixing function or its name.
        instrumented: check protocol counters, use-after-free and probe
            bounds at run time, raising :class:`ProtocolViolation`.
        on_event: optional hook receiving an
            :class:`~lfhash.linearizability.Event` at every invocation and
            response.
        preempt: give up the interpreter at every shared-memory step so
            that threads interleave far more often; for testing.
    """

    def __init__(
        self,
        processes: int,
        initial_size: int = DEFAULT_INITIAL_SIZE,
        initial_bound: int | None = None,
        sizing: str = "pow2",
        mixer: Mixer | str = "default",
        instrumented: bool = True,
        on_event: EventHook | None = None,
        preempt: bool = False,
    ):
        if processes < 1:
            raise ConstraintError(f"need at least one process, got {processes}")
        if sizing not in SIZING_POLICIES:
            raise ConstraintError(f"unknown sizing policy {sizing!r}")
        bound = default_bound(initial_size, processes) if initial_bound is None else initial_bound
        check_dimensions(initial_size, bound, processes)
        self.processes = processes
        self.sizing = sizing
        self.mix: Mixer = MIXERS[mixer] if isinstance(mixer, str) else mixer
        self.instrumented = instrumented
        self.on_event = on_event
        self.preempt = preempt
        self.ctl = SharedControl(processes, instrumented=instrumented)
        self.heap = LiveHeap(processes)
        self.ctl.H[1] = self.heap.allocate(initial_size, bound)
        self.migrations = 0
        self._clock = itertools.count()
        self._handles: list[ProcessHandle] = []
        self._register_lock = threading.Lock()

    # participants -----------------------------------------------------------

    def register(self) -> "ProcessHandle":
        """Claim the next free participant id."""
        with self._register_lock:
            if len(self._handles) >= self.processes:
                raise ConstraintError(f"all {self.processes} participants registered")
            handle = ProcessHandle(self, len(self._handles) + 1)
            self._handles.append(handle)
            return handle

    @property
    def handles(self) -> tuple["ProcessHandle", ...]:
        return tuple(self._handles)

    # shared helpers ---------------------------------------------------------

    def key(self, a: int, l: int, n: int) -> int:
        return (self.mix(a) + n) % l

    def tick(self) -> int:
        return next(self._clock)

    def emit(self, event: Event) -> None:
        if self.on_event is not None:
            self.on_event(event)

    def live_tables(self) -> int:
        return self.heap.live_count()

    @property
    def peak_live(self) -> int:
        return self.heap.peak_live

    def current_table(self) -> LiveTable:
        return self.ctl.H[self.ctl.currInd]

    def contents(self) -> dict[int, int]:
        """Address-to-value map read from the current table.

        Only meaningful at quiescence: no handle inside an operation and no
        migration in progress.
        """
        out = {}
        for e in self.current_table().slots:
            v = val(e)
            if v != NULL:
                out[adr(v)] = v
        return out

    def stats(self) -> dict:
        cur = self.current_table()
        return {
            "processes": self.processes,
            "current_size": cur.size,
            "current_bound": cur.bound,
            "current_occ": cur.occ,
            "current_dels": cur.dels,
            "live_tables": self.heap.live_count(),
            "peak_live": self.heap.peak_live,
            "allocations": self.heap.allocations,
            "migrations": self.migrations,
        }

    def _allocate(self, size: int, bound: int) -> LiveTable:
        table = self.heap.allocate(size, bound)
        if self.instrumented and self.heap.live_count() > 2 * self.processes:
            raise ProtocolViolation(
                f"{self.heap.live_count()} live tables exceed 2P={2 * self.processes}"
            )
        return table


def _yield() -> None:
    time.sleep(0)


def _stay() -> None:
    pass


class ProcessHandle:
    """One participant's view of the map.

    A handle may move between threads between operations but must never be
    used by two threads at once.
    """

    def __init__(self, owner: LockFreeHashMap, p: int):
        self.map = owner
        self.ctl = owner.ctl
        self.p = p
        self.index = 1
        self.holding = False
        self.scan_offset = 0
        self.last_cnt = 0
        self.refreshes = 0
        self.pause = _yield if owner.preempt else _stay

    def __repr__(self) -> str:
        return f"ProcessHandle(p={self.p}, index={self.index}, holding={self.holding})"

    # checks -----------------------------------------------------------------

    def _table(self, h) -> LiveTable:
        if self.map.instrumented:
            if h == 0 or h is None:
                raise ProtocolViolation(f"process {self.p} dereferenced an empty slot")
            if h.freed:
                raise ProtocolViolation(f"process {self.p} used freed table {h.ident}")
        return h

    def _probe_ok(self, n: int, l: int) -> None:
        if self.map.instrumented and n >= l:
            raise ProtocolViolation(f"process {self.p} probed past table end ({n} >= {l})")

    def _finish(self, op: str, arg: int, result, cnt: int):
        self.last_cnt = cnt
        if self.map.instrumented and cnt != 1:
            raise ProtocolViolation(f"{op} by process {self.p} took effect {cnt} times")
        m = self.map
        if m.on_event is not None:
            m.emit(Event(m.tick(), self.p, "res", op, arg, result))
        return result

    def _start(self, op: str, arg: int) -> None:
        m = self.map
        if m.on_event is not None:
            m.emit(Event(m.tick(), self.p, "inv", op, arg))
        if not self.holding:
            self.get_access()

    @staticmethod
    def _check_address(a: int) -> None:
        if not 0 < a <= MAX_ADDRESS:
            raise ConstraintError(f"address must be in 1..{MAX_ADDRESS}, got {a}")

    @staticmethod
    def _check_value(v: int) -> None:
        if not is_user_value(v):
            raise ConstraintError(f"not a storable value: {v:#x}")

    # primary operations -----------------------------------------------------

    def find(self, a: int) -> int:
        """Value stored at ``a``, or NULL."""
        self._check_address(a)
        self._start("find", a)
        ctl, key = self.ctl, self.map.key
        h = self._table(ctl.H[self.index])  # 5
        n = 0
        cnt = 0
        l = h.size  # 6
        while True:
            self._probe_ok(n, l)
            self.pause()
            r = h.slots[key(a, l, n)]  # 7
            hit = r == NULL or a == adr(r)
            if hit:
                cnt += 1
            if r == DONE:  # 8
                self.refresh()
                h = self._table(ctl.H[self.index])  # 10
                n = 0
                l = h.size  # 11
            else:
                n += 1
            if hit:  # 13
                break
        return self._finish("find", a, val(r), cnt)

    def delete(self, a: int) -> bool:
        """Remove the value at ``a``; True iff one was present."""
        self._check_address(a)
        self._start("delete", a)
        ctl, key = self.ctl, self.map.key
        h = self._table(ctl.H[self.index])  # 15
        suc = False
        cnt = 0
        l = h.size  # 16
        n = 0
        while True:
            self._probe_ok(n, l)
            self.pause()
            k = key(a, l, n)  # 17
            r = h.slots[k]
            if r == NULL:
                cnt += 1
            if oldp(r):  # 18
                self.refresh()
                h = self._table(ctl.H[self.index])  # 20
                l = h.size  # 21
                n = 0
            elif a == adr(r):
                self.pause()
                if h.cas(k, r, DEL):
                    suc = True
                    cnt += 1
            else:
                n += 1
            if suc or r == NULL:
                break
        if suc:
            h.bump_dels()  # 25
        return self._finish("delete", a, suc, cnt)

    def insert(self, v: int) -> bool:
        """Store ``v`` if its address is empty; True iff stored."""
        self._check_value(v)
        a = adr(v)
        self._start("insert", v)
        ctl, key = self.ctl, self.map.key
        h = self._table(ctl.H[self.index])  # 27
        cnt = 0
        if h.occ > h.bound:  # 28
            self.new_table()
            h = self._table(ctl.H[self.index])  # 30
        n = 0  # 31
        l = h.size
        suc = False
        while True:
            self._probe_ok(n, l)
            k = key(a, l, n)  # 32
            self.pause()
            r = h.slots[k]  # 33
            if a == adr(r):
                cnt += 1
            if oldp(r):  # 35
                self.refresh()
                h = self._table(ctl.H[self.index])  # 36
                n = 0  # 37
                l = h.size
            elif r == NULL:
                self.pause()
                if h.cas(k, NULL, v):
                    suc = True
                    cnt += 1
            else:
                n += 1
            if suc or a == adr(r):
                break
        if suc:
            h.bump_occ()  # 41
        return self._finish("insert", v, suc, cnt)

    def assign(self, v: int) -> None:
        """Store ``v`` whether or not its address is occupied."""
        self._check_value(v)
        a = adr(v)
        self._start("assign", v)
        ctl, key = self.ctl, self.map.key
        h = self._table(ctl.H[self.index])  # 43
        cnt = 0
        if h.occ > h.bound:  # 44
            self.new_table()
            h = self._table(ctl.H[self.index])  # 46
        n = 0  # 47
        l = h.size
        suc = False
        while True:
            self._probe_ok(n, l)
            k = key(a, l, n)  # 48
            self.pause()
            r = h.slots[k]  # 49
            if oldp(r):  # 50
                self.refresh()
                h = self._table(ctl.H[self.index])  # 51
                n = 0  # 52
                l = h.size
            elif r == NULL or a == adr(r):
                self.pause()
                if h.cas(k, r, v):
                    suc = True
                    cnt += 1
            else:
                n += 1
            if suc:
                break
        if r == NULL:
            h.bump_occ()  # 57
        return self._finish("assign", v, None, cnt)

    def release(self) -> None:
        """Drop access to the current table until the next operation."""
        if self.holding:
            self.release_access(self.index)
            self.holding = False

    # access management ------------------------------------------------------

    def get_access(self) -> None:
        ctl = self.ctl
        while True:
            self.pause()
            self.index = ctl.currInd  # 59
            ctl.ctr_inc(PROT, self.index)  # 60
            self.pause()
            if self.index == ctl.currInd:  # 61
                ctl.ctr_inc(BUSY, self.index)  # 62
                self.pause()
                if self.index == ctl.currInd:  # 63
                    self.holding = True
                    return
                self.release_access(self.index)
            else:
                ctl.ctr_dec(PROT, self.index)  # 65

    def release_access(self, i: int) -> None:
        ctl = self.ctl
        self.pause()
        h = ctl.H[i]  # 67
        ctl.ctr_dec(BUSY, i)  # 68
        self.pause()
        if h != 0 and ctl.busy[i] == 0:  # 69
            self.pause()
            if ctl.cas_H_clear(i, h):  # 70
                self.map.heap.deallocate(h)  # 71
        ctl.ctr_dec(PROT, i)  # 72

    # resizing ---------------------------------------------------------------

    def new_table(self) -> None:
        """Make sure a successor of the current table exists, then help migrate."""
        ctl = self.ctl
        slots = 2 * self.map.processes
        self.pause()
        while ctl.next[self.index] == 0:  # 77
            i = (self.p + self.scan_offset) % slots + 1  # 78
            if not ctl.tas_prot(i):
                self.scan_offset += 1
                continue
            ctl.set_busy(i, 1)  # 81
            cur = self._table(ctl.H[self.index])  # 82
            size, bound = next_dimensions(cur.bound, cur.dels, self.map.processes, self.map.sizing)
            ctl.store_H(i, self.map._allocate(size, bound))
            ctl.store_next(i, 0)  # 83
            self.pause()
            if not ctl.cas_next(self.index, i):  # 84
                self.release_access(i)
        self.refresh()

    def refresh(self) -> None:
        """Move to the current table, migrating first if this one is outdated."""
        self.refreshes += 1
        if self.index != self.ctl.currInd:  # 90
            self.release_access(self.index)
            self.get_access()
        else:
            self.migrate()

    def migrate(self) -> None:
        ctl = self.ctl
        self.pause()
        i = ctl.next[self.index]  # 94
        ctl.ctr_inc(PROT, i)  # 95
        self.pause()
        if self.index != ctl.currInd:  # 97
            ctl.ctr_dec(PROT, i)  # 98
            return
        ctl.ctr_inc(BUSY, i)  # 99
        h = ctl.H[i]  # 100
        self.pause()
        if self.index == ctl.currInd:  # 101
            self.move_contents(self._table(ctl.H[self.index]), self._table(h))
            index = self.index

            def swung():
                self.map.migrations += 1

            self.pause()
            if ctl.cas_currInd(index, i, swung):  # 103
                ctl.ctr_dec(BUSY, index)  # 104
                ctl.ctr_dec(PROT, index)  # 105
        self.release_access(i)

    def move_contents(self, source: LiveTable, target: LiveTable) -> None:
        """Copy every slot of ``source`` into ``target``, marking it done."""
        ctl = self.ctl
        size = source.size
        start = self.p * size // self.map.processes % size
        pending = list(range(start, size)) + list(range(start))
        pos = 0
        self.pause()
        while ctl.currInd == self.index and pos < len(pending):  # 110
            i = pending[pos]  # 111
            v = source.slots[i]
            if v == DONE:
                pos += 1
                continue
            self.pause()
            if source.cas(i, v, mark_old(v)):  # 114
                if val(v) != NULL:  # 116
                    self.move_element(val(v), target)
                self.pause()
                source.store(i, DONE)  # 117
                pos += 1  # 118

    def move_element(self, v: int, target: LiveTable) -> None:
        """Place ``v`` in ``target`` unless it is already there."""
        ctl, key = self.ctl, self.map.key
        n = 0  # 120
        b = False
        a = adr(v)
        m = target.size
        while True:
            if self.map.instrumented and n >= m:
                raise ProtocolViolation(f"process {self.p} found no free slot while moving")
            self.pause()
            k = key(a, m, n)  # 121
            w = target.slots[k]
            if w == NULL:
                self.pause()
                b = target.cas(k, NULL, v)  # 123
            else:
                n += 1
            self.pause()
            if b or a == adr(w) or ctl.currInd != self.index:  # 125
                break
        if b:
            target.bump_occ()  # 126

    def force_migration(self) -> None:
        """Allocate a successor if needed and run a migration to completion."""
        if not self.holding:
            self.get_access()
        while True:
            before = self.map.migrations
            start = self.ctl.currInd
            self.new_table()
            if self.map.migrations != before or self.ctl.currInd != start:
                return
