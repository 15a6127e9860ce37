"""Workloads that drive the live map from real threads.

CPython threads interleave at bytecode granularity under the interpreter
lock, so the harness shortens the switch interval while a run is active to
get more interleavings per operation.
"""

from __future__ import annotations

import contextlib
import json
import random
import sys
import threading
import time
from dataclasses import asdict, dataclass, field

from .encoding import NULL, adr, make_value, val
from .errors import ConstraintError, ProtocolViolation
from .linearizability import Recorder, check_linearizable
from .lockfree_map import LockFreeHashMap, ProcessHandle
from .spec_oracle import ReferenceMap

DEFAULT_MIX = {"find": 25, "insert": 25, "delete": 25, "assign": 25}
READ_MOSTLY = {"find": 90, "insert": 4, "delete": 4, "assign": 2}


def parse_mix(text: str) -> dict[str, int]:
    """Parse ``"find=90,insert=5,delete=5"`` into weights."""
    out: dict[str, int] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, weight = part.partition("=")
        if name not in DEFAULT_MIX:
            raise ConstraintError(f"unknown operation {name!r} in mix")
        try:
            out[name] = int(weight)
        except ValueError:
            raise ConstraintError(f"bad weight in mix entry {part!r}") from None
        if out[name] < 0:
            raise ConstraintError(f"negative weight in mix entry {part!r}")
    if not out or sum(out.values()) == 0:
        raise ConstraintError("mix needs at least one positive weight")
    return out


class RandomWorkload:
    """Seeded stream of ``(op, arg)`` pairs over a fixed address range."""

    def __init__(self, seed: int, addresses: int | list[int], mix: dict[str, int] | None = None):
        self.rng = random.Random(seed)
        self.addresses = list(range(1, addresses + 1)) if isinstance(addresses, int) else list(addresses)
        weights = mix or DEFAULT_MIX
        self.ops = [op for op in weights if weights[op] > 0]
        self.weights = [weights[op] for op in self.ops]
        self._payload = 0

    def next(self) -> tuple[str, int]:
        op = self.rng.choices(self.ops, self.weights)[0]
        a = self.rng.choice(self.addresses)
        if op in ("insert", "assign"):
            self._payload += 1
            return op, make_value(a, self._payload)
        return op, a

    def batch(self, n: int) -> list[tuple[str, int]]:
        return [self.next() for _ in range(n)]


def apply(target, op: str, arg: int):
    return getattr(target, op)(arg)


@contextlib.contextmanager
def fine_switching(interval: float = 1e-6):
    old = sys.getswitchinterval()
    sys.setswitchinterval(interval)
    try:
        yield
    finally:
        sys.setswitchinterval(old)


def _run_threads(targets) -> list[BaseException]:
    errors: list[BaseException] = []
    lock = threading.Lock()

    def wrap(fn):
        def run():
            try:
                fn()
            except BaseException as exc:  # reported, not swallowed
                with lock:
                    errors.append(exc)
        return run

    threads = [threading.Thread(target=wrap(fn), daemon=True) for fn in targets]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return errors


def table_duplicates(table_slots: list[int]) -> list[int]:
    """Addresses stored more than once in one table."""
    seen, dup = set(), []
    for e in table_slots:
        a = adr(e) if val(e) != NULL else 0
        if a:
            if a in seen:
                dup.append(a)
            seen.add(a)
    return dup


@dataclass
class StressReport:
    threads: int
    ops: int
    seconds: float
    ops_per_sec: float
    migrations: int
    peak_live: int
    live_bound: int
    violations: list[str] = field(default_factory=list)
    oracle_match: bool | None = None
    duplicates: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            not self.violations
            and not self.duplicates
            and self.peak_live <= self.live_bound
            and self.oracle_match is not False
        )

    def to_json(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def run_stress(
    threads: int,
    ops_per_thread: int,
    mix: dict[str, int] | None = None,
    addresses: int = 256,
    initial_size: int = 32,
    initial_bound: int | None = None,
    processes: int | None = None,
    seed: int = 0,
    sizing: str = "pow2",
    preempt: bool = False,
) -> StressReport:
    """Free-running threads on one map; single-thread runs are replayed on a reference map."""
    P = processes or threads
    if not 1 <= threads <= P:
        raise ConstraintError(f"need 1 <= threads <= P, got threads={threads} P={P}")
    m = LockFreeHashMap(P, initial_size, initial_bound, sizing=sizing, preempt=preempt)
    handles = [m.register() for _ in range(threads)]
    scripts = [RandomWorkload(seed * 1000 + h.p, addresses, mix).batch(ops_per_thread) for h in handles]
    results: list[list] = [[] for _ in handles]
    start = threading.Barrier(threads)

    def worker(h: ProcessHandle, script, out):
        def run():
            start.wait()
            for op, arg in script:
                out.append(apply(h, op, arg))
            h.release()
        return run

    t0 = time.perf_counter()
    with fine_switching():
        errors = _run_threads([worker(h, s, r) for h, s, r in zip(handles, scripts, results)])
    seconds = time.perf_counter() - t0
    done = sum(len(r) for r in results)
    report = StressReport(
        threads=threads,
        ops=done,
        seconds=seconds,
        ops_per_sec=done / seconds if seconds > 0 else 0.0,
        migrations=m.migrations,
        peak_live=m.peak_live,
        live_bound=2 * P,
        violations=[f"{type(e).__name__}: {e}" for e in errors],
        duplicates=table_duplicates(m.current_table().slots),
    )
    if threads == 1 and not errors:
        ref = ReferenceMap()
        expected = [apply(ref, op, arg) for op, arg in scripts[0]]
        report.oracle_match = expected == results[0] and ref.contents() == m.contents()
    return report


@dataclass
class WindowReport:
    threads: int
    windows: int
    operations: int
    concurrent_windows: int
    migrations: int
    peak_live: int
    live_bound: int
    failed_window: int | None = None
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed_window is None and not self.violations and self.peak_live <= self.live_bound

    def to_json(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def run_windows(
    threads: int = 4,
    windows: int = 1000,
    ops_per_window: int = 8,
    hot_addresses: int = 2,
    initial_size: int | None = None,
    initial_bound: int = 1,
    seed: int = 0,
    mix: dict[str, int] | None = None,
    history_path=None,
    preempt: bool = True,
) -> WindowReport:
    """Rounds of at most ``ops_per_window`` operations, each checked for linearizability.

    All threads meet at a barrier between rounds, so each round starts and
    ends at a quiescent point. The set of abstract states reachable by the
    linearizations found so far is carried from round to round.
    """
    if ops_per_window > 8 or ops_per_window < threads:
        raise ConstraintError("need threads <= ops_per_window <= 8")
    P = threads
    size = initial_size or max(8, 1 << (2 * P + initial_bound + 1).bit_length())
    recorder = Recorder()
    m = LockFreeHashMap(P, size, initial_bound, on_event=recorder, preempt=preempt)
    handles = [m.register() for _ in range(threads)]
    share = [ops_per_window // threads + (1 if i < ops_per_window % threads else 0) for i in range(threads)]
    rngs = [RandomWorkload(seed * 1000 + h.p, hot_addresses, mix) for h in handles]
    plans = [[rngs[i].batch(share[i]) for _ in range(windows)] for i in range(threads)]
    gate = threading.Barrier(threads + 1)
    stop = threading.Event()
    errors: list[BaseException] = []

    def worker(i: int):
        def run():
            h = handles[i]
            try:
                for w in range(windows):
                    gate.wait()
                    if stop.is_set():
                        return
                    for op, arg in plans[i][w]:
                        apply(h, op, arg)
                    gate.wait()
            except threading.BrokenBarrierError:
                return
            except BaseException as exc:
                errors.append(exc)
                gate.abort()
        return run

    states = {frozenset()}
    report = WindowReport(threads, 0, 0, 0, 0, 0, 2 * P)
    sink = open(history_path, "w") if history_path else None
    workers = [threading.Thread(target=worker(i), daemon=True) for i in range(threads)]
    with fine_switching():
        for t in workers:
            t.start()
        try:
            for w in range(windows):
                gate.wait()
                gate.wait()
                hist = recorder.drain()
                if sink:
                    for e in hist.events:
                        sink.write(json.dumps(e.to_json()) + "\n")
                ops = hist.operations()
                report.windows += 1
                report.operations += len(ops)
                spans = sorted((o.start, o.end) for o in ops)
                if any(b[0] < a[1] for a, b in zip(spans, spans[1:])):
                    report.concurrent_windows += 1
                verdict = check_linearizable(ops, states, limit=8, all_finals=True)
                if not verdict.ok:
                    report.failed_window = w
                    stop.set()
                    gate.abort()
                    break
                states = verdict.final_states
        except threading.BrokenBarrierError:
            pass
        finally:
            stop.set()
            with contextlib.suppress(threading.BrokenBarrierError):
                gate.abort()
            for t in workers:
                t.join()
            if sink:
                sink.close()
    report.violations = [f"{type(e).__name__}: {e}" for e in errors]
    report.migrations = m.migrations
    report.peak_live = m.peak_live
    return report


@dataclass
class ConservationReport:
    before: dict[int, int]
    after: dict[int, int]
    migrated: bool
    duplicates: list[int]

    @property
    def ok(self) -> bool:
        return self.migrated and self.before == self.after and not self.duplicates


def migration_conservation(
    processes: int = 2,
    fill: int = 40,
    addresses: int = 64,
    helpers: int = 1,
    seed: int = 0,
    churn: int = 200,
) -> ConservationReport:
    """Snapshot, force one full migration with ``helpers`` threads, snapshot again."""
    m = LockFreeHashMap(processes, 128)
    handles = [m.register() for _ in range(processes)]
    load = RandomWorkload(seed, addresses)
    h0 = handles[0]
    for _ in range(fill):
        h0.insert(make_value(load.rng.randint(1, addresses), load.rng.randint(1, 1 << 20)))
    for op, arg in load.batch(churn):
        apply(h0, op, arg)
    for h in handles:
        h.release()
    before = m.contents()
    migrations = m.migrations
    gate = threading.Barrier(helpers)

    def helper(h: ProcessHandle):
        def run():
            gate.wait()
            h.force_migration()
            h.release()
        return run

    with fine_switching():
        errors = _run_threads([helper(h) for h in handles[:helpers]])
    if errors:
        raise ProtocolViolation(f"migration failed: {errors[0]!r}")
    after = m.contents()
    return ConservationReport(
        before,
        after,
        migrated=m.migrations > migrations,
        duplicates=table_duplicates(m.current_table().slots),
    )


def run_bench(
    thread_counts: list[int],
    duration: float,
    mix: dict[str, int] | None = None,
    addresses: int = 1024,
    preload: int = 512,
    seed: int = 0,
) -> list[dict]:
    """Throughput per thread count; each row runs for ``duration`` seconds."""
    if duration <= 0:
        return []
    rows = []
    for n in thread_counts:
        m = LockFreeHashMap(n, 64)
        handles = [m.register() for _ in range(n)]
        pre = RandomWorkload(seed, addresses)
        for _ in range(preload):
            handles[0].insert(make_value(pre.rng.randint(1, addresses), 1))
        counts = [0] * n
        gate = threading.Barrier(n + 1)
        deadline = [0.0]

        def worker(i: int):
            def run():
                h, load = handles[i], RandomWorkload(seed + i + 1, addresses, mix or READ_MOSTLY)
                script = load.batch(4096)
                gate.wait()
                end = deadline[0]
                done = 0
                while time.perf_counter() < end:
                    for op, arg in script[done % 4096 : done % 4096 + 64]:
                        apply(h, op, arg)
                    done += 64
                counts[i] = done
                h.release()
            return run

        migrations0 = m.migrations
        threads = [threading.Thread(target=worker(i), daemon=True) for i in range(n)]
        for t in threads:
            t.start()
        deadline[0] = time.perf_counter() + duration
        gate.wait()
        t0 = time.perf_counter()
        for t in threads:
            t.join()
        seconds = time.perf_counter() - t0
        total = sum(counts)
        rows.append(
            {
                "threads": n,
                "ops": total,
                "seconds": round(seconds, 4),
                "ops_per_sec": round(total / seconds, 1) if seconds > 0 else 0.0,
                "migrations": m.migrations - migrations0,
                "peak_live": m.peak_live,
            }
        )
    return rows
