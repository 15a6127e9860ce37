"""The registry of 2P table slots shared by all participants.

Slots are numbered 1..2P; list position 0 is unused so that index 0 can keep
its meaning of "no slot" in ``next``. Every method is one atomic action.
The atomics are emulated with a single mutex, which gives the sequentially
consistent interleaving semantics the protocol is proved against.
"""

from __future__ import annotations

import threading
from typing import Any, Callable

from .errors import ProtocolViolation

BUSY = "busy"
PROT = "prot"


class SharedControl:
    def __init__(self, processes: int, instrumented: bool = True):
        if processes < 1:
            raise ValueError("need at least one process")
        self.processes = processes
        self.slots = 2 * processes
        self.instrumented = instrumented
        n = self.slots + 1
        self.H: list[Any] = [0] * n
        self.busy = [0] * n
        self.prot = [0] * n
        self.next = [0] * n
        self.currInd = 1
        self.busy[1] = 1
        self.prot[1] = 1
        self._lock = threading.Lock()

    def _counter(self, which: str) -> list[int]:
        if which == BUSY:
            return self.busy
        if which == PROT:
            return self.prot
        raise ValueError(f"unknown counter {which!r}")

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.slots:
            raise IndexError(f"slot {i} outside 1..{self.slots}")

    def ctr_inc(self, which: str, i: int) -> None:
        ctr = self._counter(which)
        self._check_index(i)
        with self._lock:
            ctr[i] += 1

    def ctr_dec(self, which: str, i: int) -> int:
        """Decrement and return the new value."""
        ctr = self._counter(which)
        self._check_index(i)
        with self._lock:
            if self.instrumented and ctr[i] == 0:
                raise ProtocolViolation(f"{which}[{i}] decremented below zero")
            ctr[i] -= 1
            return ctr[i]

    def tas_prot(self, i: int) -> bool:
        """Claim slot ``i`` if nobody protects it."""
        self._check_index(i)
        with self._lock:
            if self.prot[i] == 0:
                self.prot[i] = 1
                return True
            return False

    def set_busy(self, i: int, value: int) -> None:
        self._check_index(i)
        with self._lock:
            self.busy[i] = value

    def store_H(self, i: int, table: Any) -> None:
        self._check_index(i)
        with self._lock:
            self.H[i] = table

    def store_next(self, i: int, value: int) -> None:
        self._check_index(i)
        with self._lock:
            self.next[i] = value

    def cas_next(self, i: int, new: int) -> bool:
        """Set ``next[i] = new`` if it is still 0."""
        self._check_index(i)
        with self._lock:
            if self.next[i] == 0:
                self.next[i] = new
                return True
            return False

    def cas_currInd(
        self, expect: int, new: int, on_success: Callable[[], None] | None = None
    ) -> bool:
        """Swing ``currInd`` from ``expect`` to ``new``.

        ``on_success`` runs inside the same atomic action; instrumented code
        uses it for bookkeeping that must coincide with the swing.
        """
        with self._lock:
            if self.currInd != expect:
                return False
            self.currInd = new
            if on_success is not None:
                on_success()
            return True

    def cas_H_clear(self, i: int, expect: Any) -> bool:
        """Clear ``H[i]`` if it still holds ``expect``; exactly one racer wins."""
        self._check_index(i)
        with self._lock:
            current = self.H[i]
            if current == 0 or current != expect:
                return False
            self.H[i] = 0
            return True

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "currInd": self.currInd,
                "H": [getattr(h, "ident", h) for h in self.H[1:]],
                "busy": self.busy[1:],
                "prot": self.prot[1:],
                "next": self.next[1:],
            }
