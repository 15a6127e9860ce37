"""Explicit-state transition system for the map protocol.

One transition per labelled atomic statement. Each process record holds a
program counter ``pc`` naming the statement it will execute next, its
registry slot ``index``, every procedure local (suffixed with the procedure
abbreviation: fi, del, ins, ass, rA, nT, mig, mC, mE), the four return
slots, and the ghost variables ``cnt``, ``rS`` and ``sucS``. Shared state is
the registry, the heap, the abstract map ``X`` and the shadow array ``Y``.

Nondeterminism is explicit. The only statements that need a choice are the
main-loop dispatch at label 1 (which operation to call), the free-slot pick
at 78 and the slot pick at 111; :func:`choices` lists the options and
:func:`step` takes one of them.

States are mutable. :func:`step` updates in place; use
:meth:`ModelState.clone` or :func:`successor` when the predecessor is still
needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .encoding import (
    DEL,
    DONE,
    NULL,
    Mixer,
    adr,
    default_mix,
    describe,
    identity_mix,
    make_value,
    mark_old,
    oldp,
    val,
)
from .errors import NotEnabled
from .heap_tables import Hashtable, HeapModel, check_dimensions, next_dimensions

LABELS = (
    0, 1, 5, 6, 7, 8, 10, 11, 13, 14, 15, 16, 17, 18, 20, 21, 25, 26, 27, 28,
    30, 31, 32, 33, 35, 36, 37, 41, 42, 43, 44, 46, 47, 48, 49, 50, 51, 52,
    57, 59, 60, 61, 62, 63, 65, 67, 68, 69, 70, 71, 72, 77, 78, 81, 82, 83,
    84, 90, 94, 95, 97, 98, 99, 100, 101, 102, 103, 104, 105, 110, 111, 114,
    116, 117, 118, 120, 121, 123, 125, 126,
)  # fmt: skip
LABEL_SET = frozenset(LABELS)

RETURN_GA = frozenset({1, 10, 20, 30, 36, 46, 51})
RETURN_RA = frozenset({0, 59, 77, 90})
RETURN_REF = frozenset({10, 20, 30, 36, 46, 51})
RETURN_NT = frozenset({30, 46})

# Labels where an operation returns to the main loop.
RETURN_LABELS = {14: "find", 26: "delete", 42: "insert", 57: "assign"}
# Compare-and-swap style statements whose success is logged.
RACE_SITES = ("18b", "35b", "50b", "70", "78", "84", "103", "114", "123")

OPS = ("find", "delete", "insert", "assign", "release")

MIXERS: dict[str, Mixer] = {"default": default_mix, "identity": identity_mix}


@dataclass(frozen=True)
class ModelConfig:
    processes: int = 2
    initial_size: int = 8
    initial_bound: int = 3
    sizing: str = "pow2"
    mixer: str = "default"

    def __post_init__(self):
        if self.processes < 1:
            raise ValueError("processes must be at least 1")
        if self.mixer not in MIXERS:
            raise ValueError(f"unknown mixer {self.mixer!r}")
        check_dimensions(self.initial_size, self.initial_bound, self.processes)

    def to_json(self) -> dict:
        return {
            "processes": self.processes,
            "initial_size": self.initial_size,
            "initial_bound": self.initial_bound,
            "sizing": self.sizing,
            "mixer": self.mixer,
        }


class Proc:
    """Private state of one process. Fields follow the procedure-suffix naming."""

    def __init__(self, p: int):
        dummy = make_value(1, 0)
        self.p = p
        self.pc = 0
        self.index = 1
        self.op = ""
        # find
        self.a_fi = 1
        self.r_fi = NULL
        self.n_fi = 0
        self.l_fi = 0
        self.h_fi = 0
        self.cnt_fi = 0
        self.rS_fi = NULL
        # delete
        self.a_del = 1
        self.r_del = NULL
        self.k_del = 0
        self.l_del = 0
        self.n_del = 0
        self.h_del = 0
        self.suc_del = False
        self.cnt_del = 0
        self.sucS_del = False
        # insert
        self.v_ins = dummy
        self.a_ins = 1
        self.r_ins = NULL
        self.k_ins = 0
        self.l_ins = 0
        self.n_ins = 0
        self.h_ins = 0
        self.suc_ins = False
        self.cnt_ins = 0
        self.sucS_ins = False
        # assign
        self.v_ass = dummy
        self.a_ass = 1
        self.r_ass = NULL
        self.k_ass = 0
        self.l_ass = 0
        self.n_ass = 0
        self.h_ass = 0
        self.suc_ass = False
        self.cnt_ass = 0
        # getAccess / releaseAccess / refresh
        self.return_gA = 1
        self.i_rA = 1
        self.h_rA = 0
        self.return_rA = 0
        self.return_ref = 10
        # newTable
        self.i_nT = 1
        self.b_nT = False
        self.bb_nT = False
        self.return_nT = 30
        # migrate
        self.i_mig = 0
        self.h_mig = 0
        self.b_mig = False
        # moveContents
        self.from_mC = 0
        self.to = 0
        self.i_mC = 0
        self.v_mC = NULL
        self.b_mC = False
        self.toBeMoved = 0  # bit set of slot numbers
        # moveElement
        self.a_mE = 1
        self.v_mE = dummy
        self.k_mE = 0
        self.m_mE = 0
        self.n_mE = 0
        self.w_mE = NULL
        self.b_mE = False

    def copy(self) -> "Proc":
        other = object.__new__(Proc)
        other.__dict__ = dict(self.__dict__)
        return other

    def key(self) -> tuple:
        return tuple(self.__dict__.values())

    def moving(self) -> list[int]:
        """Slot numbers still in ``toBeMoved``."""
        bits, out, i = self.toBeMoved, [], 0
        while bits:
            if bits & 1:
                out.append(i)
            bits >>= 1
            i += 1
        return out

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["toBeMoved"] = self.moving()
        return d


class ModelState:
    """Global state: registry, heap, ghosts and one record per process."""

    def __init__(self, config: ModelConfig):
        P = config.processes
        self.config = config
        self.P = P
        self.mix = MIXERS[config.mixer]
        n = 2 * P + 1
        self.H = [0] * n
        self.busy = [0] * n
        self.prot = [0] * n
        self.next = [0] * n
        self.currInd = 1
        self.heap = HeapModel(P)
        self.X: dict[int, int] = {}
        self.Y: list[int] = []
        self.procs: list[Proc | None] = [None] + [Proc(p) for p in range(1, P + 1)]
        # linked list of events, newest first: (event, rest)
        self.log: tuple | None = None
        self.steps = 0
        self.migrations = 0
        self._mix_cache: dict[int, int] = {}

    def clone(self) -> "ModelState":
        other = object.__new__(ModelState)
        other.config = self.config
        other.P = self.P
        other.mix = self.mix
        other.H = list(self.H)
        other.busy = list(self.busy)
        other.prot = list(self.prot)
        other.next = list(self.next)
        other.currInd = self.currInd
        other.heap = self.heap.copy()
        other.X = dict(self.X)
        other.Y = list(self.Y)
        other.procs = [None] + [pr.copy() for pr in self.procs[1:]]
        other.log = self.log
        other.steps = self.steps
        other.migrations = self.migrations
        other._mix_cache = self._mix_cache
        return other

    def key(self, a: int, l: int, n: int) -> int:
        h = self._mix_cache.get(a)
        if h is None:
            h = self._mix_cache[a] = self.mix(a)
        return (h + n) % l

    def table(self, h: int) -> Hashtable | None:
        return self.heap.tables.get(h)

    @property
    def current(self) -> Hashtable | None:
        return self.heap.tables.get(self.H[self.currInd])

    def record(self, event: tuple) -> None:
        self.log = (event, self.log)

    def events(self) -> list[tuple]:
        out, node = [], self.log
        while node is not None:
            out.append(node[0])
            node = node[1]
        out.reverse()
        return out

    def fingerprint(self) -> tuple:
        """Hashable digest of the full state, including the event log."""
        return (
            tuple(self.H),
            tuple(self.busy),
            tuple(self.prot),
            tuple(self.next),
            self.currInd,
            self.heap.h_index,
            tuple(
                (k, t.size, t.bound, t.occ, t.dels, tuple(t.table))
                for k, t in sorted(self.heap.tables.items())
            ),
            tuple(sorted(self.X.items())),
            tuple(self.Y),
            tuple(pr.key() for pr in self.procs[1:]),
            self.log,
        )

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "currInd": self.currInd,
            "H": self.H[1:],
            "busy": self.busy[1:],
            "prot": self.prot[1:],
            "next": self.next[1:],
            "heap": self.heap.to_json(),
            "X": {str(a): v for a, v in sorted(self.X.items())},
            "Y": list(self.Y),
            "procs": [pr.to_json() for pr in self.procs[1:]],
            "steps": self.steps,
            "migrations": self.migrations,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ModelState":
        s = cls(ModelConfig(**d["config"]))
        s.currInd = d["currInd"]
        s.H = [0] + list(d["H"])
        s.busy = [0] + list(d["busy"])
        s.prot = [0] + list(d["prot"])
        s.next = [0] + list(d["next"])
        s.heap.h_index = d["heap"]["h_index"]
        s.heap.tables = {
            int(k): Hashtable.from_json(t) for k, t in d["heap"]["tables"].items()
        }
        s.X = {int(a): v for a, v in d["X"].items()}
        s.Y = list(d["Y"])
        for pd in d["procs"]:
            pr = s.procs[pd["p"]]
            for name, value in pd.items():
                setattr(pr, name, value)
            pr.toBeMoved = sum(1 << i for i in pd["toBeMoved"])
        s.steps = d["steps"]
        s.migrations = d["migrations"]
        return s


def init(config: ModelConfig | None = None, **kwargs: Any) -> ModelState:
    """Initial state: one blank table in slot 1, every process at label 0."""
    if config is None:
        config = ModelConfig(**kwargs)
    s = ModelState(config)
    s.H[1] = s.heap.allocate(config.initial_size, config.initial_bound)
    s.busy[1] = 1
    s.prot[1] = 1
    s.Y = [NULL] * config.initial_size
    return s


# ---------------------------------------------------------------------------
# Transitions. Each takes (state, process record, choice) and sets pr.pc.


def _release(pr: Proc, i: int, back: int) -> None:
    pr.i_rA = i
    pr.return_rA = back
    pr.pc = 67


def _main0(s, pr, c):
    pr.return_gA = 1
    pr.pc = 59


def _main1(s, pr, c):
    op, arg = c
    pr.op = op
    if op == "release":
        s.record(("inv", pr.p, op, None))
        _release(pr, pr.index, 0)
        return
    s.record(("inv", pr.p, op, arg))
    if op == "find":
        pr.a_fi = arg
        pr.pc = 5
    elif op == "delete":
        pr.a_del = arg
        pr.pc = 15
    elif op == "insert":
        pr.v_ins = arg
        pr.a_ins = adr(arg)
        pr.pc = 27
    else:
        pr.v_ass = arg
        pr.a_ass = adr(arg)
        pr.pc = 43


def _finish(s, pr, op, arg, result, cnt):
    s.record(("res", pr.p, op, arg, result, cnt))
    pr.pc = 1


# find


def _fi5(s, pr, c):
    pr.h_fi = s.H[pr.index]
    pr.n_fi = 0
    pr.cnt_fi = 0
    pr.pc = 6


def _fi6(s, pr, c):
    pr.l_fi = s.heap.tables[pr.h_fi].size
    pr.pc = 7


def _fi7(s, pr, c):
    a = pr.a_fi
    r = s.heap.tables[pr.h_fi].table[s.key(a, pr.l_fi, pr.n_fi)]
    pr.r_fi = r
    if r == NULL or a == adr(r):
        pr.cnt_fi += 1
        pr.rS_fi = s.X.get(a, NULL)
    pr.pc = 8


def _fi8(s, pr, c):
    if pr.r_fi == DONE:
        pr.return_ref = 10
        pr.pc = 90
    else:
        pr.n_fi += 1
        pr.pc = 13


def _fi10(s, pr, c):
    pr.h_fi = s.H[pr.index]
    pr.n_fi = 0
    pr.pc = 11


def _fi11(s, pr, c):
    pr.l_fi = s.heap.tables[pr.h_fi].size
    pr.pc = 13


def _fi13(s, pr, c):
    r = pr.r_fi
    pr.pc = 14 if r == NULL or pr.a_fi == adr(r) else 7


def _fi14(s, pr, c):
    _finish(s, pr, "find", pr.a_fi, val(pr.r_fi), pr.cnt_fi)


# delete


def _del15(s, pr, c):
    pr.h_del = s.H[pr.index]
    pr.suc_del = False
    pr.cnt_del = 0
    pr.pc = 16


def _del16(s, pr, c):
    pr.l_del = s.heap.tables[pr.h_del].size
    pr.n_del = 0
    pr.pc = 17


def _del17(s, pr, c):
    a = pr.a_del
    k = pr.k_del = s.key(a, pr.l_del, pr.n_del)
    r = pr.r_del = s.heap.tables[pr.h_del].table[k]
    if r == NULL:
        pr.cnt_del += 1
        pr.sucS_del = s.X.pop(a, NULL) != NULL
    pr.pc = 18


def _del18(s, pr, c):
    r = pr.r_del
    if oldp(r):
        pr.return_ref = 20
        pr.pc = 90
        return
    a = pr.a_del
    if a == adr(r):
        t = s.heap.tables[pr.h_del]
        k = pr.k_del
        ok = t.table[k] == r
        if ok:
            pr.suc_del = True
            t.table[k] = DEL
            pr.cnt_del += 1
            pr.sucS_del = s.X.pop(a, NULL) != NULL
            s.Y[k] = DEL
        s.record(("cas", pr.p, "18b", ok, pr.h_del, k, r))
    else:
        pr.n_del += 1
    pr.pc = 25 if pr.suc_del or r == NULL else 17


def _del20(s, pr, c):
    pr.h_del = s.H[pr.index]
    pr.pc = 21


def _del21(s, pr, c):
    pr.l_del = s.heap.tables[pr.h_del].size
    pr.n_del = 0
    pr.pc = 25 if pr.suc_del or pr.r_del == NULL else 17


def _del25(s, pr, c):
    if pr.suc_del:
        s.heap.tables[pr.h_del].dels += 1
    pr.pc = 26


def _del26(s, pr, c):
    _finish(s, pr, "delete", pr.a_del, pr.suc_del, pr.cnt_del)


# insert


def _ins27(s, pr, c):
    pr.h_ins = s.H[pr.index]
    pr.cnt_ins = 0
    pr.pc = 28


def _ins28(s, pr, c):
    t = s.heap.tables[pr.h_ins]
    if t.occ > t.bound:
        pr.return_nT = 30
        pr.pc = 77
    else:
        pr.pc = 31


def _ins30(s, pr, c):
    pr.h_ins = s.H[pr.index]
    pr.pc = 31


def _ins31(s, pr, c):
    pr.n_ins = 0
    pr.l_ins = s.heap.tables[pr.h_ins].size
    pr.suc_ins = False
    pr.pc = 32


def _ins32(s, pr, c):
    pr.k_ins = s.key(pr.a_ins, pr.l_ins, pr.n_ins)
    pr.pc = 33


def _ins33(s, pr, c):
    r = pr.r_ins = s.heap.tables[pr.h_ins].table[pr.k_ins]
    a = pr.a_ins
    if a == adr(r):
        pr.cnt_ins += 1
        pr.sucS_ins = _spec_insert(s.X, a, pr.v_ins)
    pr.pc = 35


def _spec_insert(X, a, v):
    if X.get(a, NULL) == NULL:
        X[a] = v
        return True
    return False


def _ins35(s, pr, c):
    r = pr.r_ins
    if oldp(r):
        pr.return_ref = 36
        pr.pc = 90
        return
    if r == NULL:
        t = s.heap.tables[pr.h_ins]
        k = pr.k_ins
        ok = t.table[k] == NULL
        if ok:
            pr.suc_ins = True
            t.table[k] = pr.v_ins
            pr.cnt_ins += 1
            pr.sucS_ins = _spec_insert(s.X, pr.a_ins, pr.v_ins)
            s.Y[k] = pr.v_ins
        s.record(("cas", pr.p, "35b", ok, pr.h_ins, k, NULL))
    else:
        pr.n_ins += 1
    pr.pc = 41 if pr.suc_ins or pr.a_ins == adr(r) else 32


def _ins36(s, pr, c):
    pr.h_ins = s.H[pr.index]
    pr.pc = 37


def _ins37(s, pr, c):
    pr.n_ins = 0
    pr.l_ins = s.heap.tables[pr.h_ins].size
    pr.pc = 41 if pr.suc_ins or pr.a_ins == adr(pr.r_ins) else 32


def _ins41(s, pr, c):
    if pr.suc_ins:
        s.heap.tables[pr.h_ins].occ += 1
    pr.pc = 42


def _ins42(s, pr, c):
    _finish(s, pr, "insert", pr.v_ins, pr.suc_ins, pr.cnt_ins)


# assign


def _ass43(s, pr, c):
    pr.h_ass = s.H[pr.index]
    pr.cnt_ass = 0
    pr.pc = 44


def _ass44(s, pr, c):
    t = s.heap.tables[pr.h_ass]
    if t.occ > t.bound:
        pr.return_nT = 46
        pr.pc = 77
    else:
        pr.pc = 47


def _ass46(s, pr, c):
    pr.h_ass = s.H[pr.index]
    pr.pc = 47


def _ass47(s, pr, c):
    pr.n_ass = 0
    pr.l_ass = s.heap.tables[pr.h_ass].size
    pr.suc_ass = False
    pr.pc = 48


def _ass48(s, pr, c):
    pr.k_ass = s.key(pr.a_ass, pr.l_ass, pr.n_ass)
    pr.pc = 49


def _ass49(s, pr, c):
    pr.r_ass = s.heap.tables[pr.h_ass].table[pr.k_ass]
    pr.pc = 50


def _ass50(s, pr, c):
    r = pr.r_ass
    if oldp(r):
        pr.return_ref = 51
        pr.pc = 90
        return
    if r == NULL or pr.a_ass == adr(r):
        t = s.heap.tables[pr.h_ass]
        k = pr.k_ass
        ok = t.table[k] == r
        if ok:
            pr.suc_ass = True
            t.table[k] = pr.v_ass
            pr.cnt_ass += 1
            s.X[pr.a_ass] = pr.v_ass
            s.Y[k] = pr.v_ass
        s.record(("cas", pr.p, "50b", ok, pr.h_ass, k, r))
    else:
        pr.n_ass += 1
    pr.pc = 57 if pr.suc_ass else 48


def _ass51(s, pr, c):
    pr.h_ass = s.H[pr.index]
    pr.pc = 52


def _ass52(s, pr, c):
    pr.n_ass = 0
    pr.l_ass = s.heap.tables[pr.h_ass].size
    pr.pc = 57 if pr.suc_ass else 48


def _ass57(s, pr, c):
    if pr.r_ass == NULL:
        s.heap.tables[pr.h_ass].occ += 1
    _finish(s, pr, "assign", pr.v_ass, None, pr.cnt_ass)


# getAccess


def _gA59(s, pr, c):
    pr.index = s.currInd
    pr.pc = 60


def _gA60(s, pr, c):
    s.prot[pr.index] += 1
    pr.pc = 61


def _gA61(s, pr, c):
    pr.pc = 62 if pr.index == s.currInd else 65


def _gA62(s, pr, c):
    s.busy[pr.index] += 1
    pr.pc = 63


def _gA63(s, pr, c):
    if pr.index == s.currInd:
        pr.pc = pr.return_gA
    else:
        _release(pr, pr.index, 59)


def _gA65(s, pr, c):
    s.prot[pr.index] -= 1
    pr.pc = 59


# releaseAccess


def _rA67(s, pr, c):
    pr.h_rA = s.H[pr.i_rA]
    pr.pc = 68


def _rA68(s, pr, c):
    s.busy[pr.i_rA] -= 1
    pr.pc = 69


def _rA69(s, pr, c):
    pr.pc = 70 if pr.h_rA != 0 and s.busy[pr.i_rA] == 0 else 72


def _rA70(s, pr, c):
    i = pr.i_rA
    ok = s.H[i] == pr.h_rA
    if ok:
        s.H[i] = 0
        pr.pc = 71
    else:
        pr.pc = 72
    s.record(("cas", pr.p, "70", ok, i, pr.h_rA))


def _rA71(s, pr, c):
    s.heap.deallocate(pr.h_rA)
    pr.pc = 72


def _rA72(s, pr, c):
    s.prot[pr.i_rA] -= 1
    back = pr.return_rA
    if back == 90:
        pr.pc = pr.return_ref
    else:
        pr.pc = back
        if back == 0:
            s.record(("res", pr.p, "release", None, None, 1))


# newTable


def _nT77(s, pr, c):
    if s.next[pr.index] == 0:
        pr.pc = 78
    else:
        pr.return_ref = pr.return_nT
        pr.pc = 90


def _nT78(s, pr, c):
    i = pr.i_nT = c
    ok = pr.b_nT = s.prot[i] == 0
    if ok:
        s.prot[i] = 1
        pr.pc = 81
    else:
        pr.pc = 77
    s.record(("cas", pr.p, "78", ok, i))


def _nT81(s, pr, c):
    s.busy[pr.i_nT] = 1
    pr.pc = 82


def _nT82(s, pr, c):
    cur = s.heap.tables[s.H[pr.index]]
    size, bound = next_dimensions(cur.bound, cur.dels, s.P, s.config.sizing)
    s.H[pr.i_nT] = s.heap.allocate(size, bound)
    pr.pc = 83


def _nT83(s, pr, c):
    s.next[pr.i_nT] = 0
    pr.pc = 84


def _nT84(s, pr, c):
    ok = pr.bb_nT = s.next[pr.index] == 0
    if ok:
        s.next[pr.index] = pr.i_nT
        pr.pc = 77
    else:
        _release(pr, pr.i_nT, 77)
    s.record(("cas", pr.p, "84", ok, pr.index, pr.i_nT))


# refresh and migrate


def _ref90(s, pr, c):
    if pr.index != s.currInd:
        pr.return_gA = pr.return_ref
        _release(pr, pr.index, 59)
    else:
        pr.pc = 94


def _mig94(s, pr, c):
    pr.i_mig = s.next[pr.index]
    pr.pc = 95


def _mig95(s, pr, c):
    s.prot[pr.i_mig] += 1
    pr.pc = 97


def _mig97(s, pr, c):
    pr.pc = 98 if pr.index != s.currInd else 99


def _mig98(s, pr, c):
    s.prot[pr.i_mig] -= 1
    pr.pc = pr.return_ref


def _mig99(s, pr, c):
    s.busy[pr.i_mig] += 1
    pr.pc = 100


def _mig100(s, pr, c):
    pr.h_mig = s.H[pr.i_mig]
    pr.pc = 101


def _mig101(s, pr, c):
    if pr.index == s.currInd:
        pr.pc = 102
    else:
        _release(pr, pr.i_mig, 90)


def _mig102(s, pr, c):
    pr.from_mC = s.H[pr.index]
    pr.to = pr.h_mig
    pr.toBeMoved = (1 << s.heap.tables[pr.from_mC].size) - 1
    pr.pc = 110


def _mig103(s, pr, c):
    ok = pr.b_mig = s.currInd == pr.index
    if ok:
        s.currInd = pr.i_mig
        s.Y = list(s.heap.tables[s.H[pr.i_mig]].table)
        s.migrations += 1
        pr.pc = 104
    else:
        _release(pr, pr.i_mig, 90)
    s.record(("cas", pr.p, "103", ok, pr.index, pr.i_mig))


def _mig104(s, pr, c):
    s.busy[pr.index] -= 1
    pr.pc = 105


def _mig105(s, pr, c):
    s.prot[pr.index] -= 1
    _release(pr, pr.i_mig, 90)


# moveContents


def _mC110(s, pr, c):
    pr.pc = 111 if s.currInd == pr.index and pr.toBeMoved else 103


def _mC111(s, pr, c):
    i = pr.i_mC = c
    v = pr.v_mC = s.heap.tables[pr.from_mC].table[i]
    if v == DONE:
        pr.toBeMoved &= ~(1 << i)
        pr.pc = 110
    else:
        pr.pc = 114


def _mC114(s, pr, c):
    t = s.heap.tables[pr.from_mC]
    i = pr.i_mC
    ok = pr.b_mC = t.table[i] == pr.v_mC
    if ok:
        t.table[i] = mark_old(pr.v_mC)
        pr.pc = 116
    else:
        pr.pc = 110
    s.record(("cas", pr.p, "114", ok, pr.from_mC, i, pr.v_mC))


def _mC116(s, pr, c):
    v = val(pr.v_mC)
    if v != NULL:
        pr.v_mE = v
        pr.pc = 120
    else:
        pr.pc = 117


def _mC117(s, pr, c):
    s.heap.tables[pr.from_mC].table[pr.i_mC] = DONE
    pr.pc = 118


def _mC118(s, pr, c):
    pr.toBeMoved &= ~(1 << pr.i_mC)
    pr.pc = 110


# moveElement


def _mE120(s, pr, c):
    pr.n_mE = 0
    pr.b_mE = False
    pr.a_mE = adr(pr.v_mE)
    pr.m_mE = s.heap.tables[pr.to].size
    pr.pc = 121


def _mE121(s, pr, c):
    k = pr.k_mE = s.key(pr.a_mE, pr.m_mE, pr.n_mE)
    w = pr.w_mE = s.heap.tables[pr.to].table[k]
    if w == NULL:
        pr.pc = 123
    else:
        pr.n_mE += 1
        pr.pc = 125


def _mE123(s, pr, c):
    t = s.heap.tables[pr.to]
    ok = pr.b_mE = t.table[pr.k_mE] == NULL
    if ok:
        t.table[pr.k_mE] = pr.v_mE
    pr.pc = 125
    s.record(("cas", pr.p, "123", ok, pr.to, pr.k_mE, NULL))


def _mE125(s, pr, c):
    done = pr.b_mE or pr.a_mE == adr(pr.w_mE) or s.currInd != pr.index
    pr.pc = 126 if done else 121


def _mE126(s, pr, c):
    if pr.b_mE:
        s.heap.tables[pr.to].occ += 1
    pr.pc = 117


TRANSITIONS: dict[int, Callable[[ModelState, Proc, Any], None]] = {
    0: _main0, 1: _main1,
    5: _fi5, 6: _fi6, 7: _fi7, 8: _fi8, 10: _fi10, 11: _fi11, 13: _fi13,
    14: _fi14,
    15: _del15, 16: _del16, 17: _del17, 18: _del18, 20: _del20, 21: _del21,
    25: _del25, 26: _del26,
    27: _ins27, 28: _ins28, 30: _ins30, 31: _ins31, 32: _ins32, 33: _ins33,
    35: _ins35, 36: _ins36, 37: _ins37, 41: _ins41, 42: _ins42,
    43: _ass43, 44: _ass44, 46: _ass46, 47: _ass47, 48: _ass48, 49: _ass49,
    50: _ass50, 51: _ass51, 52: _ass52, 57: _ass57,
    59: _gA59, 60: _gA60, 61: _gA61, 62: _gA62, 63: _gA63, 65: _gA65,
    67: _rA67, 68: _rA68, 69: _rA69, 70: _rA70, 71: _rA71, 72: _rA72,
    77: _nT77, 78: _nT78, 81: _nT81, 82: _nT82, 83: _nT83, 84: _nT84,
    90: _ref90,
    94: _mig94, 95: _mig95, 97: _mig97, 98: _mig98, 99: _mig99,
    100: _mig100, 101: _mig101, 102: _mig102, 103: _mig103, 104: _mig104,
    105: _mig105,
    110: _mC110, 111: _mC111, 114: _mC114, 116: _mC116, 117: _mC117,
    118: _mC118,
    120: _mE120, 121: _mE121, 123: _mE123, 125: _mE125, 126: _mE126,
}  # fmt: skip

assert set(TRANSITIONS) == LABEL_SET


# ---------------------------------------------------------------------------
# Well-definedness preconditions. A transition is enabled iff its
# precondition holds; labels without an entry are always enabled.


def _live(s: ModelState, h: int) -> Hashtable | None:
    return s.heap.tables.get(h)


def _sized(s, h, l):
    t = s.heap.tables.get(h)
    return t is not None and t.size == l


def _valid_op(s, pr, c):
    if not isinstance(c, tuple) or len(c) != 2 or c[0] not in OPS:
        return False
    op, arg = c
    if op == "release":
        return True
    if op in ("find", "delete"):
        return isinstance(arg, int) and arg != 0
    return isinstance(arg, int) and arg != NULL and adr(arg) != 0 and not oldp(arg)


def _pre_slot78(s, pr, c):
    return isinstance(c, int) and 1 <= c <= 2 * s.P


def _pre_111(s, pr, c):
    t = _live(s, pr.from_mC)
    return (
        t is not None
        and isinstance(c, int)
        and 0 <= c < t.size
        and bool(pr.toBeMoved >> c & 1)
    )


def _cas18(s, pr, c):
    r = pr.r_del
    if oldp(r) or pr.a_del != adr(r):
        return True
    t = _live(s, pr.h_del)
    return t is not None and pr.k_del < t.size and pr.k_del < len(s.Y)


def _cas35(s, pr, c):
    r = pr.r_ins
    if oldp(r) or r != NULL:
        return True
    t = _live(s, pr.h_ins)
    return t is not None and pr.k_ins < t.size and pr.k_ins < len(s.Y)


def _cas50(s, pr, c):
    r = pr.r_ass
    if oldp(r) or not (r == NULL or pr.a_ass == adr(r)):
        return True
    t = _live(s, pr.h_ass)
    return t is not None and pr.k_ass < t.size and pr.k_ass < len(s.Y)


def _slot_ok(s, h, i):
    t = _live(s, h)
    return t is not None and 0 <= i < t.size


PRECONDITIONS: dict[int, Callable[[ModelState, Proc, Any], bool]] = {
    1: _valid_op,
    6: lambda s, pr, c: _live(s, pr.h_fi) is not None,
    7: lambda s, pr, c: _sized(s, pr.h_fi, pr.l_fi),
    11: lambda s, pr, c: _live(s, pr.h_fi) is not None,
    16: lambda s, pr, c: _live(s, pr.h_del) is not None,
    17: lambda s, pr, c: _sized(s, pr.h_del, pr.l_del),
    18: _cas18,
    21: lambda s, pr, c: _live(s, pr.h_del) is not None,
    25: lambda s, pr, c: not pr.suc_del or _live(s, pr.h_del) is not None,
    28: lambda s, pr, c: _live(s, pr.h_ins) is not None,
    31: lambda s, pr, c: _live(s, pr.h_ins) is not None,
    33: lambda s, pr, c: _slot_ok(s, pr.h_ins, pr.k_ins),
    35: _cas35,
    37: lambda s, pr, c: _live(s, pr.h_ins) is not None,
    41: lambda s, pr, c: not pr.suc_ins or _live(s, pr.h_ins) is not None,
    44: lambda s, pr, c: _live(s, pr.h_ass) is not None,
    47: lambda s, pr, c: _live(s, pr.h_ass) is not None,
    49: lambda s, pr, c: _slot_ok(s, pr.h_ass, pr.k_ass),
    50: _cas50,
    52: lambda s, pr, c: _live(s, pr.h_ass) is not None,
    57: lambda s, pr, c: pr.r_ass != NULL or _live(s, pr.h_ass) is not None,
    60: lambda s, pr, c: 1 <= pr.index <= 2 * s.P,
    71: lambda s, pr, c: pr.h_rA in s.heap.tables,
    78: _pre_slot78,
    82: lambda s, pr, c: _live(s, s.H[pr.index]) is not None,
    95: lambda s, pr, c: 1 <= pr.i_mig <= 2 * s.P,
    102: lambda s, pr, c: _live(s, s.H[pr.index]) is not None,
    103: lambda s, pr, c: s.currInd != pr.index or _live(s, s.H[pr.i_mig]) is not None,
    111: _pre_111,
    114: lambda s, pr, c: _slot_ok(s, pr.from_mC, pr.i_mC),
    117: lambda s, pr, c: _slot_ok(s, pr.from_mC, pr.i_mC),
    120: lambda s, pr, c: _live(s, pr.to) is not None,
    121: lambda s, pr, c: _sized(s, pr.to, pr.m_mE),
    123: lambda s, pr, c: _slot_ok(s, pr.to, pr.k_mE),
    126: lambda s, pr, c: not pr.b_mE or _live(s, pr.to) is not None,
}  # fmt: skip


def choices(s: ModelState, p: int, ops: Iterable[tuple] | None = None) -> list:
    """Options for the statement process ``p`` is about to execute.

    At label 1 the options are operations; pass them as ``ops`` because the
    model does not fix a workload. Labels without a choice return ``[None]``.
    """
    pr = s.procs[p]
    pc = pr.pc
    if pc == 1:
        return list(ops) if ops is not None else []
    if pc == 78:
        return list(range(1, 2 * s.P + 1))
    if pc == 111:
        return pr.moving()
    return [None]


def needs_choice(s: ModelState, p: int) -> bool:
    return s.procs[p].pc in (1, 78, 111)


def enabled(s: ModelState, p: int, choice: Any = None) -> bool:
    """Whether process ``p`` can take its next transition.

    For the choice statements (1, 78, 111) a ``None`` choice asks whether
    *some* choice is available; label 1 always has one.
    """
    pr = s.procs[p]
    pc = pr.pc
    if pc not in LABEL_SET:
        return False
    pre = PRECONDITIONS.get(pc)
    if pre is None:
        return True
    if choice is None and pc in (1, 78, 111):
        if pc == 1:
            return True
        opts = choices(s, p)
        return any(pre(s, pr, c) for c in opts)
    try:
        return bool(pre(s, pr, choice))
    except (IndexError, KeyError, TypeError):
        return False


def step(s: ModelState, p: int, choice: Any = None, check: bool = True) -> ModelState:
    """Execute the statement at ``pc(p)`` in place and return ``s``.

    Raises:
        NotEnabled: if the precondition fails (only when ``check`` is true).
    """
    pr = s.procs[p]
    if check and not enabled(s, p, choice):
        raise NotEnabled(f"process {p} not enabled at label {pr.pc} (choice={choice!r})")
    TRANSITIONS[pr.pc](s, pr, choice)
    s.steps += 1
    return s


def successor(s: ModelState, p: int, choice: Any = None) -> ModelState:
    return step(s.clone(), p, choice)


def default_choice(s: ModelState, p: int) -> Any:
    """Deterministic choice matching the live library's policies.

    Slot claims scan round-robin from a per-process start; migration starts
    at ``p * size // P`` and walks cyclically. Not defined for label 1.
    """
    pr = s.procs[p]
    if pr.pc == 78:
        slots = 2 * s.P
        for off in range(slots):
            i = (p + off) % slots + 1
            if s.prot[i] == 0:
                return i
        return p % slots + 1
    if pr.pc == 111:
        t = s.heap.tables[pr.from_mC]
        start = p * t.size // s.P
        pending = pr.moving()
        later = [i for i in pending if i >= start]
        return (later or pending)[0]
    return None


def describe_step(before: ModelState, after: ModelState, p: int) -> str:
    """One-line summary of what process ``p`` changed."""
    b, a = before.procs[p], after.procs[p]
    parts = []
    for name, old in b.__dict__.items():
        new = getattr(a, name)
        if new != old and name != "pc":
            parts.append(f"{name}={_fmt(name, new)}")
    for name in ("H", "busy", "prot", "next"):
        old_l, new_l = getattr(before, name), getattr(after, name)
        for i in range(1, len(old_l)):
            if old_l[i] != new_l[i]:
                parts.append(f"{name}[{i}]={new_l[i]}")
    if before.currInd != after.currInd:
        parts.append(f"currInd={after.currInd}")
    if before.heap.h_index != after.heap.h_index:
        parts.append(f"alloc#{after.heap.h_index - 1}")
    freed = set(before.heap.tables) - set(after.heap.tables)
    if freed:
        parts.append(f"free#{min(freed)}")
    for h, t in after.heap.tables.items():
        old_t = before.heap.tables.get(h)
        if old_t is None:
            continue
        for k, (x, y) in enumerate(zip(old_t.table, t.table)):
            if x != y:
                parts.append(f"T{h}[{k}]={describe(y)}")
        if old_t.occ != t.occ:
            parts.append(f"T{h}.occ={t.occ}")
        if old_t.dels != t.dels:
            parts.append(f"T{h}.dels={t.dels}")
    if before.X != after.X:
        parts.append("X=" + _fmt_map(after.X))
    return f"{b.pc}->{a.pc} " + " ".join(parts)


def _fmt(name: str, value: Any) -> str:
    if name.startswith(("r_", "v_", "w_", "rS_")) and isinstance(value, int):
        return describe(value)
    if name == "toBeMoved":
        return str(bin(value))
    return str(value)


def _fmt_map(X: dict[int, int]) -> str:
    return "{" + ", ".join(f"{a}:{describe(v)}" for a, v in sorted(X.items())) + "}"
