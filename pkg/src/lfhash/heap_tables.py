"""Hash-table records and the allocation model.

``HeapModel`` is the idealised heap used by the model: an unbounded map from
table identifiers to tables with a monotone identifier counter that starts
at 1, so identifier 0 always means "no table". ``LiveHeap`` plays the same
role for the concurrent library, where identifiers name real objects and a
live-allocation gauge makes the 2P bound observable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .encoding import NULL
from .errors import ConstraintError, ProtocolViolation


def check_dimensions(size: int, bound: int, processes: int) -> None:
    """Raise ConstraintError unless ``bound + 2P < size`` and ``size >= P``."""
    if bound < 0:
        raise ConstraintError(f"bound must be non-negative, got {bound}")
    if not bound + 2 * processes < size:
        raise ConstraintError(
            f"need bound + 2P < size, got bound={bound} P={processes} size={size}"
        )
    if size < processes:
        raise ConstraintError(f"need size >= P, got size={size} P={processes}")


SIZING_POLICIES = ("pow2", "tight")


def next_dimensions(
    bound: int, dels: int, processes: int, policy: str = "pow2"
) -> tuple[int, int]:
    """Size and bound for the successor of a table with ``bound`` and ``dels``.

    Both policies give ``new_bound > bound - dels + 2P`` and
    ``new_size > new_bound + 2P``. "pow2" adds headroom of half the live
    count and rounds the size up to a power of two. "tight" uses the
    smallest admissible numbers, which keeps model states small.
    """
    live = bound - dels
    two_p = 2 * processes
    if policy == "tight":
        new_bound = max(1, live + two_p + 1)
        return new_bound + two_p + 1, new_bound
    if policy != "pow2":
        raise ConstraintError(f"unknown sizing policy {policy!r}")
    new_bound = max(1, live + two_p + max(1, -(-live // 2)))
    size = 1
    while size <= new_bound + two_p or size < processes:
        size *= 2
    return size, new_bound


@dataclass(eq=False)
class Hashtable:
    """Open-addressing table. ``size`` and ``bound`` never change after creation."""

    size: int
    bound: int
    occ: int = 0
    dels: int = 0
    table: list[int] = field(default_factory=list)

    @classmethod
    def blank(cls, size: int, bound: int) -> "Hashtable":
        return cls(size, bound, 0, 0, [NULL] * size)

    def copy(self) -> "Hashtable":
        return Hashtable(self.size, self.bound, self.occ, self.dels, list(self.table))

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "bound": self.bound,
            "occ": self.occ,
            "dels": self.dels,
            "table": list(self.table),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Hashtable":
        return cls(d["size"], d["bound"], d["occ"], d["dels"], list(d["table"]))


class HeapModel:
    """Identifier-keyed heap; ``heap[0]`` is never present."""

    __slots__ = ("processes", "tables", "h_index", "peak_live")

    def __init__(self, processes: int):
        self.processes = processes
        self.tables: dict[int, Hashtable] = {}
        self.h_index = 1
        self.peak_live = 0

    def allocate(self, size: int, bound: int) -> int:
        check_dimensions(size, bound, self.processes)
        ident = self.h_index
        self.tables[ident] = Hashtable.blank(size, bound)
        self.h_index = ident + 1
        if len(self.tables) > self.peak_live:
            self.peak_live = len(self.tables)
        return ident

    def deallocate(self, ident: int) -> None:
        if ident not in self.tables:
            raise ProtocolViolation(f"deallocation of absent table {ident}")
        del self.tables[ident]

    def get(self, ident: int) -> Hashtable | None:
        return self.tables.get(ident)

    def __contains__(self, ident: int) -> bool:
        return ident in self.tables

    def live_count(self) -> int:
        return len(self.tables)

    def copy(self) -> "HeapModel":
        other = HeapModel.__new__(HeapModel)
        other.processes = self.processes
        other.tables = {k: t.copy() for k, t in self.tables.items()}
        other.h_index = self.h_index
        other.peak_live = self.peak_live
        return other

    def to_json(self) -> dict:
        return {
            "h_index": self.h_index,
            "tables": {str(k): t.to_json() for k, t in sorted(self.tables.items())},
        }


class LiveTable:
    """A table used by the concurrent library.

    Slot reads are plain list reads. Every slot write and every counter
    update goes through ``lock`` so that compare-and-swap is a single atomic
    step with respect to other writers.
    """

    __slots__ = ("ident", "size", "bound", "occ", "dels", "slots", "lock", "freed")

    def __init__(self, ident: int, size: int, bound: int):
        self.ident = ident
        self.size = size
        self.bound = bound
        self.occ = 0
        self.dels = 0
        self.slots = [NULL] * size
        self.lock = threading.Lock()
        self.freed = False

    def cas(self, k: int, expect: int, new: int) -> bool:
        with self.lock:
            if self.slots[k] == expect:
                self.slots[k] = new
                return True
            return False

    def store(self, k: int, new: int) -> None:
        with self.lock:
            self.slots[k] = new

    def bump_occ(self) -> None:
        with self.lock:
            self.occ += 1

    def bump_dels(self) -> None:
        with self.lock:
            self.dels += 1

    def __repr__(self) -> str:
        return f"LiveTable(ident={self.ident}, size={self.size}, bound={self.bound})"


class LiveHeap:
    """Allocator for live tables with a live-count gauge and free checking."""

    def __init__(self, processes: int):
        self.processes = processes
        self._lock = threading.Lock()
        self._live: dict[int, LiveTable] = {}
        self._next_ident = 1
        self.peak_live = 0
        self.allocations = 0

    def allocate(self, size: int, bound: int) -> LiveTable:
        check_dimensions(size, bound, self.processes)
        with self._lock:
            ident = self._next_ident
            self._next_ident += 1
            table = LiveTable(ident, size, bound)
            self._live[ident] = table
            self.allocations += 1
            if len(self._live) > self.peak_live:
                self.peak_live = len(self._live)
            return table

    def deallocate(self, table: LiveTable) -> None:
        with self._lock:
            if self._live.get(table.ident) is not table:
                raise ProtocolViolation(f"deallocation of absent table {table.ident}")
            del self._live[table.ident]
            table.freed = True

    def live_count(self) -> int:
        return len(self._live)

    def is_live(self, table: LiveTable) -> bool:
        return self._live.get(table.ident) is table
