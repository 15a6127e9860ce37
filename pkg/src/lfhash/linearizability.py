"""Operation histories and a small-window linearizability checker.

A history is a time-ordered list of invocation and response events. The
checker searches for a total order of the operations that respects
real-time precedence and replays correctly against the sequential map
specification. Operations without a response may be linearized anywhere
after their invocation or left out entirely.

Long histories are cut at quiescent points, where no operation is open.
Because two linearizations of the same window can leave different map
contents, :func:`check_history` carries the set of every possible
abstract state from one window into the next.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

from .spec_oracle import apply_op

OPS = ("find", "delete", "insert", "assign")
DEFAULT_WINDOW = 8

State = frozenset  # frozenset of (address, value) pairs


@dataclass(frozen=True)
class Event:
    time: int
    process: int
    kind: str  # "inv" or "res"
    op: str
    arg: int | None
    result: object = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Event":
        return cls(d["time"], d["process"], d["kind"], d["op"], d.get("arg"), d.get("result"))


@dataclass(frozen=True)
class Operation:
    process: int
    op: str
    arg: int
    result: object
    start: int
    end: int | None  # None while pending

    @property
    def pending(self) -> bool:
        return self.end is None


class HistoryError(ValueError):
    pass


@dataclass
class History:
    events: list[Event] = field(default_factory=list)

    def append(self, e: Event) -> None:
        self.events.append(e)

    def __len__(self) -> int:
        return len(self.events)

    def validate(self) -> None:
        """Per process, invocations and responses alternate and match."""
        open_op: dict[int, Event] = {}
        last = None
        for e in self.events:
            if last is not None and e.time < last:
                raise HistoryError(f"events out of time order at {e}")
            last = e.time
            if e.kind == "inv":
                if e.process in open_op:
                    raise HistoryError(f"process {e.process} invoked twice: {e}")
                open_op[e.process] = e
            elif e.kind == "res":
                inv = open_op.pop(e.process, None)
                if inv is None or inv.op != e.op or inv.arg != e.arg:
                    raise HistoryError(f"response without matching invocation: {e}")
            else:
                raise HistoryError(f"unknown event kind {e.kind!r}")

    def operations(self) -> list[Operation]:
        self.validate()
        open_op: dict[int, Event] = {}
        ops: list[Operation | None] = []
        slot: dict[int, int] = {}
        for e in self.events:
            if e.kind == "inv":
                open_op[e.process] = e
                slot[e.process] = len(ops)
                ops.append(None)
            else:
                inv = open_op.pop(e.process)
                ops[slot.pop(e.process)] = Operation(
                    e.process, e.op, e.arg, e.result, inv.time, e.time
                )
        for p, inv in open_op.items():
            ops[slot[p]] = Operation(p, inv.op, inv.arg, None, inv.time, None)
        return ops  # type: ignore[return-value]

    def windows(self) -> Iterator["History"]:
        """Sub-histories between consecutive quiescent points."""
        current: list[Event] = []
        open_count = 0
        for e in self.events:
            current.append(e)
            open_count += 1 if e.kind == "inv" else -1
            if open_count == 0:
                yield History(current)
                current = []
        if current:
            yield History(current)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.events:
                fh.write(json.dumps(e.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> "History":
        with open(path) as fh:
            return cls([Event.from_json(json.loads(line)) for line in fh if line.strip()])


class Recorder:
    """Event hook with per-thread buffers.

    Each thread appends to its own list; :meth:`drain` merges the buffers by
    time and must only be called while no operation is running.
    """

    def __init__(self):
        self._local = threading.local()
        self._buffers: list[list[Event]] = []
        self._lock = threading.Lock()

    def __call__(self, event) -> None:
        buf = getattr(self._local, "buf", None)
        if buf is None:
            buf = self._local.buf = []
            with self._lock:
                self._buffers.append(buf)
        buf.append(event)

    def drain(self) -> History:
        with self._lock:
            merged = [e for buf in self._buffers for e in buf]
            for buf in self._buffers:
                buf.clear()
        merged.sort(key=lambda e: e.time)
        return History(merged)


# ---------------------------------------------------------------------------
# Sequential replay


def _freeze(X: dict[int, int]) -> State:
    return frozenset(X.items())


def replay(state: State, op: Operation) -> tuple[State, bool]:
    """Apply ``op`` to ``state``; second item tells whether the result matches."""
    X = dict(state)
    got = apply_op(X, op.op, op.arg)
    ok = op.pending or _same_result(op.op, got, op.result)
    return _freeze(X), ok


def _same_result(op: str, got, want) -> bool:
    if op == "assign":
        return want is None
    if op in ("delete", "insert"):
        return bool(got) == bool(want) and isinstance(want, bool)
    return got == want


@dataclass
class Verdict:
    ok: bool
    order: list[int] | None
    final_states: set[State]
    explored: int = 0

    def __bool__(self) -> bool:
        return self.ok


class WindowTooLarge(ValueError):
    pass


def check_linearizable(
    ops: list[Operation],
    initial: Iterable[State] | State | dict | None = None,
    limit: int = DEFAULT_WINDOW,
    all_finals: bool = False,
) -> Verdict:
    """Search for a linearization of ``ops`` from one of the initial states.

    Returns a verdict with a witness order (indices into ``ops``) when one
    exists. With ``all_finals`` the search continues after the first
    witness and ``final_states`` holds every state some linearization can
    end in, which is what chaining windows needs.
    """
    if len(ops) > limit:
        raise WindowTooLarge(f"{len(ops)} operations exceed the window limit {limit}")
    starts = _initial_states(initial)
    n = len(ops)
    required = 0
    for i, op in enumerate(ops):
        if not op.pending:
            required |= 1 << i
    # op j may go next only once every op that responded before j's
    # invocation has been placed
    preds = [0] * n
    for j, b in enumerate(ops):
        for i, a in enumerate(ops):
            if i != j and a.end is not None and a.end < b.start:
                preds[j] |= 1 << i

    finals: set[State] = set()
    seen: set[tuple[int, State]] = set()
    witness: list[int] | None = None
    order: list[int] = []
    explored = 0

    def dfs(done: int, state: State) -> bool:
        nonlocal witness, explored
        if (done, state) in seen:
            return False
        seen.add((done, state))
        explored += 1
        if done & required == required:
            finals.add(state)
            if witness is None:
                witness = list(order)
            if not all_finals:
                return True
        for j in range(n):
            bit = 1 << j
            if done & bit or preds[j] & ~done:
                continue
            nxt, ok = replay(state, ops[j])
            if not ok:
                continue
            order.append(j)
            stop = dfs(done | bit, nxt)
            order.pop()
            if stop:
                return True
        return False

    for s0 in starts:
        if dfs(0, s0) and not all_finals:
            break
    return Verdict(witness is not None, witness, finals, explored)


def _initial_states(initial) -> list[State]:
    if initial is None:
        return [frozenset()]
    if isinstance(initial, dict):
        return [_freeze(initial)]
    if isinstance(initial, frozenset):
        return [initial]
    return list(initial)


def brute_force_linearizable(
    ops: list[Operation], initial: dict | None = None
) -> bool:
    """Reference verdict by enumerating every ordering of every admissible subset."""
    start = _freeze(initial or {})
    complete = [i for i, op in enumerate(ops) if not op.pending]
    pending = [i for i, op in enumerate(ops) if op.pending]
    for k in range(len(pending) + 1):
        for extra in itertools.combinations(pending, k):
            chosen = complete + list(extra)
            for perm in itertools.permutations(chosen):
                if _respects_real_time(ops, perm) and _replays(ops, perm, start):
                    return True
    return False


def _respects_real_time(ops: list[Operation], perm) -> bool:
    for x in range(len(perm)):
        for y in range(x + 1, len(perm)):
            later, earlier = ops[perm[x]], ops[perm[y]]
            if earlier.end is not None and earlier.end < later.start:
                return False
    return True


def _replays(ops: list[Operation], perm, start: State) -> bool:
    X = dict(start)
    for i in perm:
        op = ops[i]
        got = apply_op(X, op.op, op.arg)
        if not op.pending and not _same_result(op.op, got, op.result):
            return False
    return True


@dataclass
class HistoryReport:
    ok: bool
    windows: int
    operations: int
    concurrent_windows: int
    max_states: int
    failed_window: int | None = None

    def to_json(self) -> dict:
        return asdict(self)


def check_history(
    history: History,
    initial: dict | None = None,
    limit: int = DEFAULT_WINDOW,
    max_states: int = 4096,
) -> HistoryReport:
    """Check a whole history window by window."""
    states: set[State] = {_freeze(initial or {})}
    windows = ops_total = concurrent = widest = 0
    for w in history.windows():
        ops = w.operations()
        windows += 1
        ops_total += len(ops)
        if _overlaps(ops):
            concurrent += 1
        verdict = check_linearizable(ops, states, limit=limit, all_finals=True)
        if not verdict.ok:
            return HistoryReport(False, windows, ops_total, concurrent, widest, windows - 1)
        states = verdict.final_states
        widest = max(widest, len(states))
        if len(states) > max_states:
            raise WindowTooLarge(f"{len(states)} candidate states after window {windows}")
    return HistoryReport(True, windows, ops_total, concurrent, widest)


def _overlaps(ops: list[Operation]) -> bool:
    spans = sorted((op.start, op.end if op.end is not None else 1 << 62) for op in ops)
    return any(b[0] < a[1] for a, b in zip(spans, spans[1:]))
