"""Schedule exploration over the transition model.

Two drivers share the same per-state checks:

* :func:`run_random` walks one seeded random schedule, checking the
  invariant catalogue, progress (every process has an enabled step that
  moves its program counter), call atomicity, the live-table bound and the
  slot-claim pigeonhole count.
* :func:`run_exhaustive` enumerates every interleaving of a short window
  from a prepositioned state and evaluates a postcondition at each leaf.
  :data:`RACES` holds ready-made windows around each compare-and-swap site.

Reports serialise to JSON; violations carry a replayable schedule and a
step-by-step trace.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from . import invariants as inv
from .encoding import DEL, DONE, NULL, adr, make_value, oldp
from .errors import NotEnabled, ProtocolViolation
from .model import (
    ModelConfig,
    ModelState,
    RETURN_LABELS,
    choices,
    default_choice,
    describe_step,
    enabled,
    init,
    needs_choice,
    step,
)

SCHEMA_VERSION = 1

# Labels whose statement updates X, Y or a cnt ghost, or returns a call.
GHOST_LABELS = frozenset({7, 17, 18, 33, 35, 50, 103, 14, 26, 42, 57})

CALL_OPS = ("find", "delete", "insert", "assign")
DEFAULT_WEIGHTS = {"find": 30, "insert": 30, "delete": 25, "assign": 10, "release": 5}

Op = tuple  # (name, argument)
Schedule = list  # [(process, choice), ...]


# ---------------------------------------------------------------------------
# Workloads


def parse_script(text: str) -> list[Op]:
    """Parse ``"insert:3:1, find:3, delete:3, release"`` into model ops.

    ``insert`` and ``assign`` take ``address[:payload]`` (payload defaults
    to 1); ``find`` and ``delete`` take an address.
    """
    out: list[Op] = []
    for raw in text.replace(";", ",").split(","):
        tok = raw.strip()
        if not tok:
            continue
        name, *fields = [f.strip() for f in tok.split(":")]
        if name == "release":
            if fields:
                raise ValueError(f"release takes no argument: {tok!r}")
            out.append(("release", None))
            continue
        if name not in CALL_OPS or not 1 <= len(fields) <= 2:
            raise ValueError(f"bad script item {tok!r}")
        a = int(fields[0])
        if name in ("insert", "assign"):
            pay = int(fields[1]) if len(fields) == 2 else 1
            out.append((name, make_value(a, pay)))
        else:
            if len(fields) != 1:
                raise ValueError(f"{name} takes only an address: {tok!r}")
            make_value(a)  # range check
            out.append((name, a))
    return out


class Workload:
    """Source of operations for the main-loop choice.

    With ``scripts`` each listed process runs its own finite op list and is
    idle afterwards; unlisted processes are idle from the start. Without
    scripts every process draws random ops over ``addresses`` small
    addresses, after an optional per-process ``prefix``.
    """

    def __init__(
        self,
        processes: int,
        scripts: dict[int, Sequence[Op]] | None = None,
        seed: int = 0,
        addresses: int = 4,
        payloads: int = 3,
        weights: dict[str, int] | None = None,
        prefix: dict[int, Sequence[Op]] | None = None,
    ):
        self.P = processes
        self.rng = random.Random(f"workload:{seed}")
        self.addresses = addresses
        self.payloads = payloads
        w = weights or DEFAULT_WEIGHTS
        self._names = list(w)
        self._weights = [w[n] for n in self._names]
        self.scripted = scripts is not None
        src = scripts if scripts is not None else (prefix or {})
        self.queues = {p: list(src.get(p, ())) for p in range(1, processes + 1)}
        for p, q in self.queues.items():
            q.reverse()

    def has_next(self, p: int) -> bool:
        return bool(self.queues[p]) or not self.scripted

    def take(self, p: int) -> Op:
        q = self.queues[p]
        if q:
            return q.pop()
        if self.scripted:
            raise IndexError(f"script for process {p} is exhausted")
        return self.random_op()

    def random_op(self) -> Op:
        name = self.rng.choices(self._names, self._weights)[0]
        if name == "release":
            return ("release", None)
        a = self.rng.randint(1, self.addresses)
        if name in ("find", "delete"):
            return (name, a)
        return (name, make_value(a, self.rng.randint(1, self.payloads)))


def migration_prefix(config: ModelConfig, first_address: int = 1) -> dict[int, list[Op]]:
    """Inserts for process 1 that overflow the initial bound, forcing a migration."""
    n = config.initial_bound + 1
    return {1: [("insert", make_value(first_address + i, 1)) for i in range(n)]}


# ---------------------------------------------------------------------------
# Per-state checks


def progress_witness(s: ModelState, p: int) -> Any:
    """A choice that moves ``pc(p)`` when taken, or raise LookupError.

    Label 1 is probed with a single find; any enabled op leaves label 1.
    """
    pc = s.procs[p].pc
    opts = choices(s, p, [("find", 1)]) if needs_choice(s, p) else [None]
    for c in opts:
        if not enabled(s, p, c):
            continue
        t = s.clone()
        step(t, p, c, check=False)
        if t.procs[p].pc != pc:
            return c
    raise LookupError(f"process {p} has no enabled pc-changing step at label {pc}")


@dataclass
class ProgressFailure:
    state: int
    process: int
    label: int
    reason: str  # "not-enabled" or "self-loop"
    kind: str = "model-soundness"

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class LockFreedomResult:
    ok: bool
    states: int
    failures: list[ProgressFailure] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_lock_freedom(states: Iterable[ModelState]) -> LockFreedomResult:
    """Every process in every state has an enabled step that changes its pc.

    A failure means the model itself is unsound at that state (a statement
    would dereference something undefined); it is reported as such rather
    than as evidence against the algorithm.
    """
    failures = []
    n = 0
    for idx, s in enumerate(states):
        n += 1
        failures.extend(_progress_failures(s, idx))
    return LockFreedomResult(not failures, n, failures)


def _progress_failures(s: ModelState, idx: int) -> list[ProgressFailure]:
    out = []
    for p in range(1, s.P + 1):
        pc = s.procs[p].pc
        if not enabled(s, p):
            out.append(ProgressFailure(idx, p, pc, "not-enabled"))
            continue
        try:
            progress_witness(s, p)
        except LookupError:
            out.append(ProgressFailure(idx, p, pc, "self-loop"))
    return out


def pigeonhole_excess(s: ModelState) -> dict | None:
    """Witness when a process at 78 sees more than 2P-1 foreign slot claims.

    Counts, over every registry slot, the other processes in prSet1 or
    prSet2 of that slot.
    """
    limit = 2 * s.P - 1
    slots = range(1, 2 * s.P + 1)
    for p in range(1, s.P + 1):
        if s.procs[p].pc != 78:
            continue
        total = 0
        for q in range(1, s.P + 1):
            if q == p:
                continue
            pr = s.procs[q]
            total += sum(inv._pr1(pr, i) + inv._pr2(pr, i) for i in slots)
        if total > limit:
            return {"process": p, "claims": total, "limit": limit}
    return None


def _new_events(s: ModelState, old_log) -> list[tuple]:
    out, node = [], s.log
    while node is not old_log and node is not None:
        out.append(node[0])
        node = node[1]
    out.reverse()
    return out


# ---------------------------------------------------------------------------
# Random walks


@dataclass
class Finding:
    """One failed check during a walk."""

    kind: str  # "invariant", "atomicity", "progress", "memory", "pigeonhole", "protocol"
    ident: str
    step: int
    witness: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "id": self.ident, "step": self.step, "witness": self.witness}


@dataclass
class WalkReport:
    config: dict
    seed: int
    mode: str
    steps: int = 0
    states: int = 0
    checked_states: int = 0
    calls: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    atomicity_checked: int = 0
    peak_live: int = 0
    migrations: int = 0
    pigeonhole_states: int = 0
    progress_checked: int = 0
    quiescent: bool = False
    findings: list[Finding] = field(default_factory=list)
    schedule: list = field(default_factory=list)
    trace: list[str] | None = None
    final_state: dict | None = None
    wallclock: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.findings

    @property
    def ops(self) -> int:
        return sum(self.calls.values())

    def to_json(self, full: bool = False) -> dict:
        d = {
            "schema": SCHEMA_VERSION,
            "kind": "walk",
            "config": self.config,
            "seed": self.seed,
            "mode": self.mode,
            "ok": self.ok,
            "steps": self.steps,
            "states": self.states,
            "checked_states": self.checked_states,
            "ops": self.ops,
            "calls": self.calls,
            "atomicity_checked": self.atomicity_checked,
            "peak_live": self.peak_live,
            "migrations": self.migrations,
            "pigeonhole_states": self.pigeonhole_states,
            "progress_checked": self.progress_checked,
            "violations": [f.to_json() for f in self.findings],
            "wallclock": round(self.wallclock, 4),
        }
        if self.findings or full:
            d["schedule"] = [list(x) for x in self.schedule]
            d["trace"] = self.trace
            d["final_state"] = self.final_state
        return d


def run_random(
    config: ModelConfig | None = None,
    seed: int = 0,
    max_steps: int = 2000,
    scripts: dict[int, Sequence[Op]] | None = None,
    check_every: int = 1,
    mode: str = "uniform",
    subset: Iterable[str] | None = None,
    choice_policy: str = "random",
    progress: str = "full",
    force_migration: bool = True,
    workload: Workload | None = None,
    stop_on_violation: bool = True,
    keep_states: int = 0,
) -> WalkReport:
    """Walk one random schedule of ``max_steps`` transitions.

    ``mode`` is "uniform" (each step picks uniformly among processes that can
    move) or "adversarial" (one seeded victim process is picked 50 times
    less often than the rest). ``choice_policy`` resolves slot choices at
    labels 78 and 111 either at random or as the live library does.
    ``progress`` is "full" (clone-and-step every process at every state),
    "enabled" (enabledness only) or "off". With ``keep_states`` > 0 every
    that-many-th state is cloned into ``report.kept`` for later checks.
    """
    if mode not in ("uniform", "adversarial"):
        raise ValueError(f"unknown mode {mode!r}")
    if choice_policy not in ("random", "default"):
        raise ValueError(f"unknown choice policy {choice_policy!r}")
    if progress not in ("full", "enabled", "off"):
        raise ValueError(f"unknown progress mode {progress!r}")
    if check_every < 1:
        raise ValueError("check_every must be positive")
    config = config or ModelConfig()
    subset = list(subset) if subset is not None else None
    inv.resolve(subset)  # fail early on unknown ids
    P = config.processes
    rng = random.Random(f"schedule:{seed}")
    if workload is None:
        prefix = migration_prefix(config) if force_migration and scripts is None else None
        workload = Workload(P, scripts=scripts, seed=seed, prefix=prefix)
    victim = rng.randint(1, P) if mode == "adversarial" else 0

    rep = WalkReport(config.to_json(), seed, mode)
    rep.calls = {op: 0 for op in CALL_OPS}
    rep.results = {p: [] for p in range(1, P + 1)}
    kept: list[ModelState] = []
    started = time.perf_counter()
    s = init(config)

    def examine(state: ModelState, n: int, full: bool) -> None:
        if full:
            rep.checked_states += 1
            for v in inv.check(state, subset):
                rep.findings.append(Finding("invariant", v.ident, n, v.witness))
        live = state.heap.live_count()
        rep.peak_live = max(rep.peak_live, live)
        if live > 2 * P:
            rep.findings.append(Finding("memory", "No1", n, {"live": live, "limit": 2 * P}))
        if any(state.procs[p].pc == 78 for p in range(1, P + 1)):
            rep.pigeonhole_states += 1
            w = pigeonhole_excess(state)
            if w is not None:
                rep.findings.append(Finding("pigeonhole", "78", n, w))
        if progress == "full":
            rep.progress_checked += 1
            for f in _progress_failures(state, n):
                rep.findings.append(Finding("progress", "stuck", n, f.to_json()))
        elif progress == "enabled":
            rep.progress_checked += 1
            for p in range(1, P + 1):
                if not enabled(state, p):
                    w = ProgressFailure(n, p, state.procs[p].pc, "not-enabled").to_json()
                    rep.findings.append(Finding("progress", "stuck", n, w))
        if keep_states and n % keep_states == 0:
            kept.append(state.clone())

    examine(s, 0, True)
    for n in range(1, max_steps + 1):
        if rep.findings and stop_on_violation:
            break
        movers = [
            p for p in range(1, P + 1)
            if (s.procs[p].pc != 1 or workload.has_next(p)) and enabled(s, p)
        ]  # fmt: skip
        if not movers:
            rep.quiescent = True
            break
        if victim and len(movers) > 1:
            weights = [1 if p == victim else 50 for p in movers]
            p = rng.choices(movers, weights)[0]
        else:
            p = rng.choice(movers)
        pr = s.procs[p]
        pc = pr.pc
        if pc == 1:
            c = workload.take(p)
        elif pc in (78, 111) and choice_policy == "default":
            c = default_choice(s, p)
        elif pc == 78:
            c = rng.randint(1, 2 * P)
        elif pc == 111:
            c = rng.choice(pr.moving())
        else:
            c = None
        rep.schedule.append((p, c))
        old_log = s.log
        try:
            step(s, p, c)
        except NotEnabled as exc:
            rep.findings.append(Finding("progress", "stuck", n, {"error": str(exc)}))
            break
        except ProtocolViolation as exc:
            rep.findings.append(Finding("protocol", "heap", n, {"error": str(exc)}))
            break
        rep.steps = n
        if s.procs[p].pc == pc:
            rep.findings.append(
                Finding("progress", "stuck", n, {"process": p, "label": pc, "reason": "self-loop"})
            )
        for ev in _new_events(s, old_log):
            if ev[0] != "res":
                continue
            _, q, op, arg, result, cnt = ev
            rep.results[q].append((op, arg, result))
            if op in CALL_OPS:
                rep.calls[op] += 1
                rep.atomicity_checked += 1
                if cnt != 1:
                    rep.findings.append(
                        Finding("atomicity", f"cnt_{op}", n, {"process": q, "op": op, "arg": arg, "cnt": cnt})
                    )
        examine(s, n, n % check_every == 0 or pc in GHOST_LABELS)

    rep.states = rep.steps + 1
    rep.migrations = s.migrations
    rep.wallclock = time.perf_counter() - started
    rep.kept = kept  # type: ignore[attr-defined]
    if rep.findings:
        rep.trace = format_trace(config, rep.schedule)
        rep.final_state = s.to_json()
    return rep


def replay(config: ModelConfig, schedule: Schedule, start: ModelState | None = None) -> ModelState:
    """Re-execute a recorded schedule; the result equals the recorded final state."""
    s = start.clone() if start is not None else init(config)
    for p, c in schedule:
        step(s, p, c)
    return s


def format_trace(
    config: ModelConfig, schedule: Schedule, start: ModelState | None = None
) -> list[str]:
    """One line per step: step number, process, label and what changed.

    Replays stop at the first step that cannot be taken; the last line then
    names the failure.
    """
    s = start.clone() if start is not None else init(config)
    lines = []
    for n, (p, c) in enumerate(schedule, 1):
        before = s.clone()
        pc = s.procs[p].pc
        try:
            step(s, p, c)
        except (NotEnabled, ProtocolViolation) as exc:
            lines.append(f"{n:6d} p{p} L{pc:<3d} !! {exc}")
            break
        choice = "" if c is None else f" [{_fmt_choice(c)}]"
        lines.append(f"{n:6d} p{p} L{pc:<3d}{choice} {describe_step(before, s, p)}".rstrip())
    return lines


def _fmt_choice(c: Any) -> str:
    if isinstance(c, tuple):
        op, arg = c
        if arg is None:
            return op
        if op in ("insert", "assign"):
            return f"{op} {adr(arg)}:{arg & 0xFFFFFFFF}"
        return f"{op} {arg}"
    return str(c)


@dataclass
class SuiteReport:
    """Aggregate over many seeds."""

    config: dict
    runs: int = 0
    steps: int = 0
    states: int = 0
    ops: int = 0
    atomicity_checked: int = 0
    peak_live: int = 0
    min_migrations: int | None = None
    total_migrations: int = 0
    pigeonhole_states: int = 0
    progress_checked: int = 0
    failed: list[WalkReport] = field(default_factory=list)
    wallclock: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failed

    def add(self, r: WalkReport) -> None:
        self.runs += 1
        self.steps += r.steps
        self.states += r.states
        self.ops += r.ops
        self.atomicity_checked += r.atomicity_checked
        self.peak_live = max(self.peak_live, r.peak_live)
        self.min_migrations = (
            r.migrations if self.min_migrations is None else min(self.min_migrations, r.migrations)
        )
        self.total_migrations += r.migrations
        self.pigeonhole_states += r.pigeonhole_states
        self.progress_checked += r.progress_checked
        if not r.ok:
            self.failed.append(r)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "suite",
            "config": self.config,
            "ok": self.ok,
            "runs": self.runs,
            "steps": self.steps,
            "states": self.states,
            "ops": self.ops,
            "atomicity_checked": self.atomicity_checked,
            "peak_live": self.peak_live,
            "min_migrations": self.min_migrations,
            "total_migrations": self.total_migrations,
            "pigeonhole_states": self.pigeonhole_states,
            "progress_checked": self.progress_checked,
            "violations": [
                {"seed": r.seed, **f.to_json()} for r in self.failed for f in r.findings
            ],
            "failed_runs": [r.to_json() for r in self.failed],
            "wallclock": round(self.wallclock, 3),
        }


def run_suite(
    config: ModelConfig | None = None,
    seeds: Iterable[int] = range(10),
    max_steps: int = 2000,
    progress_cb: Callable[[WalkReport], None] | None = None,
    **kwargs: Any,
) -> SuiteReport:
    """Run :func:`run_random` once per seed and aggregate."""
    config = config or ModelConfig()
    suite = SuiteReport(config.to_json())
    started = time.perf_counter()
    for seed in seeds:
        r = run_random(config, seed=seed, max_steps=max_steps, **kwargs)
        suite.add(r)
        if progress_cb is not None:
            progress_cb(r)
    suite.wallclock = time.perf_counter() - started
    return suite


# ---------------------------------------------------------------------------
# Positioning helpers


def advance(
    s: ModelState,
    p: int,
    until: Callable[[ModelState], bool],
    ops: Sequence[Op] = (),
    chooser: Callable[[ModelState, int], Any] | None = None,
    limit: int = 5000,
) -> ModelState:
    """Run process ``p`` alone until ``until(s)`` holds; mutates ``s``.

    ``ops`` feed the main-loop choice in order; slot choices come from
    ``chooser`` (default: the live library's policy).

    Raises:
        RuntimeError: if the ops run out or ``limit`` steps pass first.
    """
    queue = list(ops)
    queue.reverse()
    for _ in range(limit):
        if until(s):
            return s
        pc = s.procs[p].pc
        if pc == 1:
            if not queue:
                raise RuntimeError(f"process {p} ran out of ops before reaching the target")
            c = queue.pop()
        elif pc in (78, 111):
            c = (chooser or default_choice)(s, p)
        else:
            c = None
        step(s, p, c)
    if until(s):
        return s
    raise RuntimeError(f"process {p} did not reach the target within {limit} steps")


def at(label: int, p: int) -> Callable[[ModelState], bool]:
    return lambda s: s.procs[p].pc == label


def settle(s: ModelState, p: int, ops: Sequence[Op] = ()) -> ModelState:
    """Bring ``p`` to label 1, then run each of ``ops`` to completion."""
    if s.procs[p].pc != 1:
        advance(s, p, at(1, p))
    for op in ops:
        run_op(s, p, op)
    return s


def run_op(s: ModelState, p: int, op: Op) -> Any:
    """Run one complete call for ``p`` from label 1; return its result."""
    if s.procs[p].pc != 1:
        raise RuntimeError(f"process {p} is not at the main loop")
    old = s.log
    advance(s, p, lambda st: st.procs[p].pc == 1 and st.log is not old and _returned(st, old, p), [op])
    for ev in reversed(_new_events(s, old)):
        if ev[0] == "res" and ev[1] == p:
            return ev[4]
    raise AssertionError("call returned without a response event")


def _returned(s: ModelState, old, p: int) -> bool:
    return any(e[0] == "res" and e[1] == p for e in _new_events(s, old))


# ---------------------------------------------------------------------------
# Exhaustive interleaving


class BudgetExceeded(RuntimeError):
    """The exhaustive search hit its state budget and was abandoned."""


Postcondition = Callable[[ModelState, ModelState], "dict | None"]
ChoiceFilter = Callable[[ModelState, int, Any], bool]


@dataclass
class ExhaustiveReport:
    name: str
    states: int = 0
    interleavings: int = 0
    leaves: int = 0
    contested: int = 0
    max_steps: dict = field(default_factory=dict)
    findings: list[dict] = field(default_factory=list)
    wallclock: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.findings

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "exhaustive",
            "name": self.name,
            "ok": self.ok,
            "states": self.states,
            "interleavings": self.interleavings,
            "leaves": self.leaves,
            "contested": self.contested,
            "max_steps": self.max_steps,
            "violations": self.findings,
            "wallclock": round(self.wallclock, 4),
        }


def run_exhaustive(
    start: ModelState,
    scripts: dict[int, Sequence[Op]] | None = None,
    limits: dict[int, int] | None = None,
    postcondition: Postcondition | None = None,
    contested: Callable[[ModelState, ModelState], bool] | None = None,
    choice_filter: ChoiceFilter | None = None,
    subset: Iterable[str] | None = None,
    budget: int = 200_000,
    name: str = "custom",
    verify_roundtrip: bool = True,
    max_findings: int = 20,
) -> ExhaustiveReport:
    """Enumerate every interleaving of the processes from ``start``.

    Process ``p`` takes at most ``limits[p]`` steps (default 12) and stops
    early once it is back at label 1 with its script consumed. Choices at
    labels 78 and 111 range over every option that ``choice_filter``
    admits. Invariants are checked at every distinct state; the
    postcondition (called with the start and leaf state) at every leaf.

    Raises:
        BudgetExceeded: once more than ``budget`` distinct states are seen.
    """
    P = start.P
    scripts = {p: list(scripts.get(p, ())) if scripts else [] for p in range(1, P + 1)}
    limits = {p: (limits or {}).get(p, 12) for p in range(1, P + 1)}
    subset = list(subset) if subset is not None else None
    rep = ExhaustiveReport(name)
    rep.max_steps = {p: 0 for p in range(1, P + 1)}
    memo: dict[tuple, int] = {}
    started = time.perf_counter()

    def note(kind: str, ident: str, path: list, witness: dict) -> None:
        if len(rep.findings) < max_findings:
            rep.findings.append(
                {"kind": kind, "id": ident, "schedule": [list(x) for x in path], "witness": witness}
            )
        else:
            rep.findings.append({"kind": kind, "id": ident})

    def options(s: ModelState, p: int, used: tuple, taken: tuple) -> list:
        if taken[p - 1] >= limits[p]:
            return []
        pr = s.procs[p]
        if pr.pc == 1:
            if used[p - 1] >= len(scripts[p]):
                return []
            opts = [scripts[p][used[p - 1]]]
        else:
            opts = choices(s, p)
        out = []
        for c in opts:
            if choice_filter is not None and c is not None and pr.pc != 1 and not choice_filter(s, p, c):
                continue
            if enabled(s, p, c):
                out.append(c)
        return out

    path: list = []

    def dfs(s: ModelState, used: tuple, taken: tuple) -> int:
        key = (s.fingerprint(), used, taken)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= budget:
            raise BudgetExceeded(f"{name}: more than {budget} states; raise the budget or shorten the window")
        memo[key] = 0
        rep.states += 1
        for v in inv.check(s, subset):
            note("invariant", v.ident, path, v.witness)
        fp = s.fingerprint() if verify_roundtrip else None
        total = 0
        moved = False
        for p in range(1, P + 1):
            for c in options(s, p, used, taken):
                moved = True
                t = s.clone()
                try:
                    step(t, p, c, check=False)
                except ProtocolViolation as exc:
                    note("protocol", "heap", path + [(p, c)], {"error": str(exc)})
                    continue
                nu = used
                if s.procs[p].pc == 1:
                    nu = used[: p - 1] + (used[p - 1] + 1,) + used[p:]
                nt = taken[: p - 1] + (taken[p - 1] + 1,) + taken[p:]
                rep.max_steps[p] = max(rep.max_steps[p], nt[p - 1])
                path.append((p, c))
                total += dfs(t, nu, nt)
                path.pop()
        if verify_roundtrip and s.fingerprint() != fp:
            note("soundness", "undo", path, {"error": "state changed while exploring successors"})
        if not moved:
            total = 1
            rep.leaves += 1
            if contested is not None and contested(start, s):
                rep.contested += 1
            if postcondition is not None:
                w = postcondition(start, s)
                if w is not None:
                    note("postcondition", name, path, w)
        memo[key] = total
        return total

    zero = tuple(0 for _ in range(P))
    rep.interleavings = dfs(start.clone(), zero, zero)
    rep.wallclock = time.perf_counter() - started
    return rep


# ---------------------------------------------------------------------------
# Race windows


def cas_events(s: ModelState, since: ModelState | None = None, sites: Iterable[str] | None = None) -> list[tuple]:
    """CAS events recorded after ``since`` (all when None), optionally by site."""
    evs = _new_events(s, since.log) if since is not None else s.events()
    wanted = set(sites) if sites is not None else None
    return [e for e in evs if e[0] == "cas" and (wanted is None or e[2] in wanted)]


SLOT_SITES = ("18b", "35b", "50b", "114", "123")


def cas_groups(s: ModelState, since: ModelState, sites: Iterable[str]) -> dict[tuple, list[tuple]]:
    """Group CAS events by target and expected value.

    Slot CASes are keyed by (table, slot, expected) across every slot site,
    so a delete and a tag on the same slot land in one group. Registry
    CASes are keyed by site and target index (plus the expected table for
    releases).
    """
    groups: dict[tuple, list[tuple]] = {}
    for e in cas_events(s, since, sites):
        site, detail = e[2], e[4:]
        if site in SLOT_SITES:
            k = ("slot",) + tuple(detail)
        elif site in ("84", "103"):
            # the new value differs per racer; the target is the registry index
            k = (site, detail[0])
        else:
            k = (site,) + tuple(detail)
        groups.setdefault(k, []).append(e)
    return groups


def one_winner(sites: Iterable[str]) -> Postcondition:
    """Postcondition: every group with two or more attempts has exactly one success."""
    sites = tuple(sites)

    def post(start: ModelState, end: ModelState) -> dict | None:
        for k, evs in cas_groups(end, start, sites).items():
            if len({e[1] for e in evs}) < 2:
                continue
            wins = sum(1 for e in evs if e[3])
            if wins != 1:
                return {"group": list(k), "attempts": [list(e[:4]) for e in evs], "winners": wins}
        return None

    return post


def is_contested(sites: Iterable[str]) -> Callable[[ModelState, ModelState], bool]:
    """Whether two different processes attempted a CAS on the same target."""
    sites = tuple(sites)

    def test(start: ModelState, end: ModelState) -> bool:
        return any(len({e[1] for e in evs}) >= 2 for evs in cas_groups(end, start, sites).values())

    return test


def both(*posts: Postcondition) -> Postcondition:
    def post(start: ModelState, end: ModelState) -> dict | None:
        for f in posts:
            w = f(start, end)
            if w is not None:
                return w
        return None

    return post


def responses(start: ModelState, end: ModelState) -> list[tuple]:
    return [e for e in _new_events(end, start.log) if e[0] == "res"]


@dataclass
class RaceScenario:
    name: str
    site: str
    summary: str
    build: Callable[[], ModelState]
    postcondition: Postcondition
    contested: Callable[[ModelState, ModelState], bool]
    scripts: dict[int, list[Op]] = field(default_factory=dict)
    limits: dict[int, int] = field(default_factory=lambda: {1: 12, 2: 12})
    choice_filter: ChoiceFilter | None = None

    def run(self, budget: int = 200_000, subset: Iterable[str] | None = None) -> ExhaustiveReport:
        return run_exhaustive(
            self.build(),
            scripts=self.scripts,
            limits=self.limits,
            postcondition=self.postcondition,
            contested=self.contested,
            choice_filter=self.choice_filter,
            subset=subset,
            budget=budget,
            name=self.name,
        )


RACE_CONFIG = ModelConfig(processes=2, initial_size=8, initial_bound=3)


def _fresh() -> ModelState:
    s = init(RACE_CONFIG)
    settle(s, 1)
    settle(s, 2)
    return s


def _ins(a: int, pay: int = 1) -> Op:
    return ("insert", make_value(a, pay))


def _filled(n: int) -> ModelState:
    """Both processes at the main loop; process 1 has inserted ``n`` addresses."""
    s = _fresh()
    for a in range(1, n + 1):
        run_op(s, 1, _ins(a))
    return s


def _both_at_new_table() -> ModelState:
    """Table past its bound; both processes inside newTable at label 77."""
    s = _filled(4)
    advance(s, 1, at(77, 1), [_ins(11)])
    advance(s, 2, at(77, 2), [_ins(12)])
    return s


def _both_moving() -> ModelState:
    """Both processes migrating the same table, at label 110 with every slot pending."""
    s = _both_at_new_table()
    advance(s, 1, at(110, 1))
    advance(s, 2, at(110, 2))
    return s


def _slot_of(s: ModelState, table: int, a: int) -> int:
    t = s.heap.tables[table]
    for i, e in enumerate(t.table):
        if e not in (NULL, DEL) and not oldp(e) and adr(e) == a:
            return i
    raise LookupError(f"address {a} not in table {table}")


def _avoiding(slot: int) -> Callable[[ModelState, int], int]:
    def choose(s: ModelState, p: int) -> int:
        pending = s.procs[p].moving()
        rest = [i for i in pending if i != slot]
        return (rest or pending)[0]

    return choose


def _build_18b() -> ModelState:
    s = _filled(1)
    return s


def _post_18b(start: ModelState, end: ModelState) -> dict | None:
    wins = [e for e in responses(start, end) if e[2] == "delete" and e[4] is True]
    if len(wins) > 1:
        return {"successful_deletes": len(wins)}
    done = [e for e in responses(start, end) if e[2] == "delete"]
    if len(done) == 2 and len(wins) != 1:
        return {"successful_deletes": len(wins)}
    return None


def _post_35b_same(start: ModelState, end: ModelState) -> dict | None:
    res = [e for e in responses(start, end) if e[2] == "insert"]
    wins = [e for e in res if e[4] is True]
    if len(wins) > 1 or len(res) == 2 and len(wins) != 1:
        return {"successful_inserts": len(wins), "completed": len(res)}
    return None


def _post_35b_distinct(start: ModelState, end: ModelState) -> dict | None:
    res = [e for e in responses(start, end) if e[2] == "insert"]
    if len(res) == 2:
        if not all(e[4] is True for e in res):
            return {"results": [e[4] for e in res]}
        missing = [a for a in (5, 6) if a not in end.X]
        if missing:
            return {"missing": missing}
    return None


def _post_50b(start: ModelState, end: ModelState) -> dict | None:
    res = [e for e in responses(start, end) if e[2] == "assign"]
    if len(res) == 2:
        wins = [e for e in cas_events(end, start, ["50b"]) if e[3]]
        if end.X.get(5) not in (make_value(5, 1), make_value(5, 2)):
            return {"X5": end.X.get(5)}
        # process p assigns payload p, so the last successful CAS decides X
        if wins and end.X[5] != make_value(5, wins[-1][1]):
            return {"X5": end.X[5], "last_winner": list(wins[-1][:4])}
    return None


def _build_70() -> ModelState:
    """Process 1 has just finished a migration and is about to release the old
    table; process 2 still holds the old table and will release it too."""
    s = _fresh()
    old = s.currInd

    def releasing_old(st: ModelState) -> bool:
        pr = st.procs[1]
        return st.migrations == 1 and pr.pc == 67 and pr.i_rA == old
    advance(s, 1, releasing_old, [_ins(a) for a in range(1, 8)])
    return s


def _post_70(start: ModelState, end: ModelState) -> dict | None:
    w = one_winner(["70"])(start, end)
    if w is not None:
        return w
    freed = [e for e in cas_events(end, start, ["70"]) if e[3]]
    if len(freed) > 1:
        return {"clears": [list(e) for e in freed]}
    return None


def _build_84() -> ModelState:
    return _both_at_new_table()


def _slot_per_process(s: ModelState, p: int, c: Any) -> bool:
    return c == 1 + p  # process 1 claims slot 2, process 2 claims slot 3


def _post_84(start: ModelState, end: ModelState) -> dict | None:
    w = one_winner(["84"])(start, end)
    if w is not None:
        return w
    return _loser_unreclaimed(start, end)


def _loser_unreclaimed(start: ModelState, end: ModelState) -> dict | None:
    """Once the losing racer is back at 77 its table must be gone."""
    evs = cas_events(end, start, ["84"])
    loser = next((e for e in evs if not e[3]), None)
    if loser is None:
        return None
    p, slot = loser[1], loser[5]
    after = _new_events(end, start.log)
    tail = after[after.index(loser) + 1:]
    if end.procs[p].pc != 77:
        return None
    freed = [e for e in tail if e[0] == "cas" and e[2] == "70" and e[1] == p and e[4] == slot and e[3]]
    if not freed:
        return {"loser": p, "slot": slot, "error": "no release of the losing table"}
    h = freed[0][5]
    if h in end.heap.tables or end.H[slot] != 0:
        return {"loser": p, "slot": slot, "table": h, "H": end.H[slot]}
    return None


def _loser_back(start: ModelState, end: ModelState) -> bool:
    evs = cas_events(end, start, ["84"])
    loser = next((e for e in evs if not e[3]), None)
    return len(evs) == 2 and loser is not None and end.procs[loser[1]].pc == 77


def _build_78() -> ModelState:
    return _both_at_new_table()


def _only_slot_2(s: ModelState, p: int, c: Any) -> bool:
    return s.procs[p].pc != 78 or c == 2


def _build_103() -> ModelState:
    """Both migrators at 110 with one pending slot, and that slot is null."""
    s = _both_moving()
    from_h = s.procs[1].from_mC
    last = next(i for i, e in enumerate(s.heap.tables[from_h].table) if e == NULL)

    def one_left(p: int) -> Callable[[ModelState], bool]:
        return lambda st: st.procs[p].pc == 110 and st.procs[p].moving() == [last]

    advance(s, 1, one_left(1), chooser=_avoiding(last))
    advance(s, 2, one_left(2), chooser=_avoiding(last))
    return s


def _post_103(start: ModelState, end: ModelState) -> dict | None:
    w = one_winner(["103", "114"])(start, end)
    if w is not None:
        return w
    if end.migrations - start.migrations > 1:
        return {"migrations": end.migrations - start.migrations}
    return None


def _build_114() -> ModelState:
    """Process 1 migrating, about to pick the slot holding address 1;
    process 2 at the main loop, about to delete address 1."""
    s = _filled(4)
    advance(s, 1, at(110, 1), [_ins(11)])
    return s


def _slot_of_address_1(s: ModelState, p: int, c: Any) -> bool:
    if s.procs[p].pc != 111:
        return True
    return c == _home(s, s.procs[p].from_mC)


def _home(s: ModelState, table: int) -> int:
    t = s.heap.tables[table]
    for i, e in enumerate(t.table):
        if e not in (NULL, DEL, DONE) and adr(e) == 1:
            return i
    return -1


def _post_114(start: ModelState, end: ModelState) -> dict | None:
    w = one_winner(["18b", "114"])(start, end)
    if w is not None:
        return w
    dels = [e for e in responses(start, end) if e[2] == "delete"]
    if dels and dels[0][4] is True and 1 in end.X:
        return {"deleted_but_present": end.X[1]}
    return None


def _build_123() -> ModelState:
    """Both migrators hold the same tagged value at 120, bound for the same table."""
    s = _both_moving()
    from_h = s.procs[1].from_mC
    k = _home(s, from_h)

    def pick(st: ModelState, p: int) -> int:
        return k

    advance(s, 1, at(120, 1), chooser=pick)
    advance(s, 2, at(120, 2), chooser=pick)
    return s


def _post_123(start: ModelState, end: ModelState) -> dict | None:
    w = one_winner(["123"])(start, end)
    if w is not None:
        return w
    to = start.procs[1].to
    t = end.heap.tables.get(to)
    if t is not None:
        copies = sum(1 for e in t.table if e not in (NULL, DEL, DONE) and adr(e) == 1)
        if copies > 1:
            return {"copies_of_address_1": copies}
    return None


def _races() -> dict[str, RaceScenario]:
    slot_sites = list(SLOT_SITES)
    out = [
        RaceScenario(
            "18b", "18b", "two deletes of the same present address",
            _build_18b, both(one_winner(slot_sites), _post_18b), is_contested(slot_sites),
            scripts={1: [("delete", 1)], 2: [("delete", 1)]},
        ),
        RaceScenario(
            "35b", "35b", "two inserts of the same address",
            _fresh, both(one_winner(slot_sites), _post_35b_same), is_contested(slot_sites),
            scripts={1: [_ins(5, 1)], 2: [_ins(5, 2)]},
        ),
        RaceScenario(
            "35b-distinct", "35b", "two inserts of different addresses",
            _fresh, both(one_winner(slot_sites), _post_35b_distinct), lambda a, b: True,
            scripts={1: [_ins(5, 1)], 2: [_ins(6, 2)]},
        ),
        RaceScenario(
            "50b", "50b", "two assigns to the same address",
            _fresh, both(one_winner(slot_sites), _post_50b), is_contested(slot_sites),
            scripts={1: [("assign", make_value(5, 1))], 2: [("assign", make_value(5, 2))]},
            limits={1: 16, 2: 16},
        ),
        RaceScenario(
            "70", "70", "two releases of a retired table",
            _build_70, _post_70, is_contested(["70"]),
            scripts={2: [("release", None)]},
        ),
        RaceScenario(
            "78", "78", "two slot claims restricted to one registry slot",
            _build_78, one_winner(["78"]), is_contested(["78"]),
            choice_filter=_only_slot_2,
        ),
        RaceScenario(
            "84", "84", "two new tables racing to become the successor",
            _build_84, _post_84, _loser_back,
            choice_filter=_slot_per_process,
        ),
        RaceScenario(
            "103", "103", "two migrators finishing the same migration",
            _build_103, _post_103, is_contested(["103"]),
        ),
        RaceScenario(
            "114", "114", "a delete racing a migration tag on the same slot",
            _build_114, _post_114, is_contested(["18b", "114"]),
            scripts={2: [("delete", 1)]},
            choice_filter=_slot_of_address_1,
        ),
        RaceScenario(
            "123", "123", "two movers of the same value",
            _build_123, _post_123, is_contested(["123"]),
        ),
    ]
    return {r.name: r for r in out}


RACES: dict[str, RaceScenario] = _races()
