"""Executable safety invariants over :class:`~lfhash.model.ModelState`.

Every predicate returns ``None`` when it holds and a witness dict when it is
violated. Three scopes exist:

* global predicates see the whole state;
* process predicates are evaluated once per process ``p``;
* pair predicates are evaluated for every ordered pair ``(p, r)``.

Process and pair predicates carry a *label guard*: the set of program
counters of ``p`` for which the antecedent can be true. The checker skips a
predicate when ``pc(p)`` is outside its guard. Guards are a dispatch
optimisation only; every predicate body re-tests its own antecedent, and
``check(..., guarded=False)`` evaluates everything.

Quantifier domains: slot indices range over the table in question, registry
indices over ``1..2P``, processes over ``1..P``. Address quantifiers range
over the nonzero addresses occurring in ``X`` or in any live table or ``Y``;
any other nonzero address satisfies the address-indexed predicates
vacuously because it matches no slot. A dereference of an absent table, or
of a slot beyond a table's end, is reported as a violation of the predicate
that performed it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable

from .encoding import DEL, DONE, NULL, adr, oldp, val
from .heap_tables import Hashtable
from .model import LABELS, LABEL_SET, RETURN_GA, RETURN_NT, RETURN_RA, RETURN_REF, ModelState, Proc

GLOBAL = "global"
PROCESS = "process"
PAIR = "pair"


class Undefined(Exception):
    """A predicate dereferenced something that does not exist."""


@dataclass(frozen=True)
class Invariant:
    ident: str
    family: str
    scope: str
    fn: Callable | None
    guard: frozenset | None = None
    tombstone: bool = False

    @property
    def doc(self) -> str:
        return (self.fn.__doc__ or "").strip() if self.fn else "eliminated"


@dataclass(frozen=True)
class Violation:
    ident: str
    witness: dict

    def to_json(self) -> dict:
        return {"id": self.ident, "witness": self.witness}


REGISTRY: dict[str, Invariant] = {}


def _family(ident: str) -> str:
    return ident.rstrip("0123456789a")


def invariant(ident: str, scope: str = GLOBAL, pcs: Iterable[int] | None = None):
    """Register a predicate under ``ident``."""

    def deco(fn):
        if ident in REGISTRY:
            raise ValueError(f"duplicate invariant id {ident}")
        guard = None
        if scope != GLOBAL:
            guard = frozenset(pcs) if pcs is not None else LABEL_SET
            unknown = guard - LABEL_SET
            if unknown:
                raise ValueError(f"{ident}: guard has unknown labels {sorted(unknown)}")
        REGISTRY[ident] = Invariant(ident, _family(ident), scope, fn, guard)
        return fn

    return deco


def _tombstone(ident: str) -> None:
    REGISTRY[ident] = Invariant(ident, _family(ident), GLOBAL, None, tombstone=True)


def labels(*parts) -> frozenset:
    """Labels selected by ints and inclusive ``(lo, hi)`` ranges."""
    out = set()
    for part in parts:
        if isinstance(part, tuple):
            lo, hi = part
            out.update(x for x in LABELS if lo <= x <= hi)
        else:
            out.add(part)
    return frozenset(out) & LABEL_SET


def at_least(lo: int) -> frozenset:
    return labels((lo, 10**9))


# ---------------------------------------------------------------------------
# Conventions


def find(r: int, a: int) -> bool:
    """``r`` is null or carries address ``a``."""
    return r == NULL or a == adr(r)


def holds_index(q: Proc) -> bool:
    """pc in [1,58], or pc > 65 and not releasing its own index."""
    pc = q.pc
    return 1 <= pc <= 58 or pc > 65 and not (67 <= pc <= 72 and q.i_rA == q.index)


def uses_index(q: Proc) -> bool:
    """pc in [1,58], or pc >= 62 and pc != 65."""
    pc = q.pc
    return 1 <= pc <= 58 or pc >= 62 and pc != 65


HOLDS_INDEX = labels((1, 58), *[x for x in LABELS if x > 65])
USES_INDEX = labels((1, 58), *[x for x in LABELS if x >= 62 and x != 65])


def _within_call(q: Proc, targets: frozenset, via_new_table: frozenset = frozenset()) -> bool:
    """Inside getAccess/releaseAccess/refresh/migrate/newTable on the way back to ``targets``."""
    pc = q.pc
    if 59 <= pc <= 65:
        return q.return_gA in targets
    if 67 <= pc <= 72:
        ra = q.return_rA
        return (
            ra == 59 and q.return_gA in targets
            or ra == 77 and q.return_nT in via_new_table
            or ra == 90 and q.return_ref in targets
        )
    if 77 <= pc <= 84:
        return q.return_nT in via_new_table
    if pc >= 90:
        return q.return_ref in targets
    return False


CALL_LABELS = labels((59, 65), (67, 72), *at_least(90))
CALL_LABELS_NT = CALL_LABELS | labels((77, 84))


def deleting(q: Proc) -> bool:
    return 18 <= q.pc <= 21 or _within_call(q, _T20)


def inserting(q: Proc) -> bool:
    return 35 <= q.pc <= 37 or _within_call(q, _T36)


_T10 = frozenset({10})
_T20 = frozenset({20})
_T30 = frozenset({30})
_T36 = frozenset({36})
_T46 = frozenset({46})
_T46_51 = frozenset({46, 51})


# ---------------------------------------------------------------------------
# Evaluation context with cached derived quantities


class Ctx:
    def __init__(self, s: ModelState):
        self.s = s
        self.P = s.P
        self.two_p = 2 * s.P
        self.tables = s.heap.tables
        self.procs = [(p, s.procs[p]) for p in range(1, s.P + 1)]

    def table(self, h: int) -> Hashtable:
        t = self.tables.get(h)
        if t is None:
            raise Undefined(f"table {h} is not allocated")
        return t

    def size_or_zero(self, h: int) -> int:
        t = self.tables.get(h)
        return t.size if t is not None else 0

    @cached_property
    def cur(self) -> Hashtable:
        return self.table(self.s.H[self.s.currInd])

    @cached_property
    def cs(self) -> int:
        return self.cur.size

    @cached_property
    def Y(self) -> list[int]:
        Y = self.s.Y
        if len(Y) < self.cs:
            raise Undefined(f"Y has {len(Y)} slots, current table has {self.cs}")
        return Y

    @cached_property
    def nxt(self) -> int:
        return self.s.next[self.s.currInd]

    @cached_property
    def hn(self) -> Hashtable | None:
        """Successor table, or None when ``next(currInd) = 0``."""
        if self.nxt == 0:
            return None
        return self.table(self.s.H[self.nxt])

    @cached_property
    def hn_slots(self) -> list[int]:
        return self.hn.table if self.hn is not None else []

    @cached_property
    def y_nonnull(self) -> int:
        Y = self.Y
        return sum(1 for k in range(self.cs) if Y[k] != NULL)

    @cached_property
    def addresses(self) -> list[int]:
        out = {a for a in self.s.X if a != 0}
        for e in self.s.Y:
            a = adr(e)
            if a:
                out.add(a)
        for t in self.tables.values():
            for e in t.table:
                a = adr(e)
                if a:
                    out.add(a)
        return sorted(out)

    def probe(self, slots: list[int], size: int, a: int) -> list[int]:
        """Entries along the probe sequence of ``a`` (positions 0..size-1)."""
        start = self.s.key(a, size, 0)
        return slots[start:size] + slots[:start]

    @cached_property
    def y_probes(self) -> dict[int, list[int]]:
        cs, Y = self.cs, self.Y
        return {a: self.probe(Y, cs, a) for a in self.addresses}

    @cached_property
    def hn_probes(self) -> dict[int, list[int]]:
        hn = self.hn
        if hn is None:
            return {a: [] for a in self.addresses}
        return {a: self.probe(hn.table, hn.size, a) for a in self.addresses}

    def X(self, a: int) -> int:
        return self.s.X.get(a, NULL)

    # set definitions -----------------------------------------------------

    @cached_property
    def nbSet1(self) -> set[int]:
        hi = self.s.heap.h_index
        return {k for k in self.tables if k < hi}

    @cached_property
    def nbSet2(self) -> set[int]:
        s = self.s
        out = {i for i in range(1, self.two_p + 1) if s.H[i] != 0}
        out.update(q.i_rA for _, q in self.procs if q.pc == 71)
        return out

    @cached_property
    def deSet1(self) -> int:
        Y = self.Y
        return sum(1 for k in range(self.cs) if Y[k] == DEL)

    @cached_property
    def deSet2(self) -> int:
        ci = self.s.currInd
        return sum(1 for _, q in self.procs if q.index == ci and q.pc == 25 and q.suc_del)

    @cached_property
    def deSet3(self) -> int:
        return sum(1 for e in self.hn_slots if e == DEL)

    @cached_property
    def ocSet1(self) -> int:
        return sum(1 for _, q in self.procs if _oc1(q, self.s.currInd))

    @cached_property
    def ocSet2(self) -> int:
        h = self.s.H[self.s.currInd]
        return sum(1 for _, q in self.procs if q.pc >= 125 and q.b_mE and q.to == h)

    @cached_property
    def ocSet3(self) -> int:
        ci = self.s.currInd
        return sum(
            1
            for _, q in self.procs
            if q.index == ci
            and (q.pc == 41 and q.suc_ins or q.pc == 57 and q.r_ass == NULL)
        )

    @cached_property
    def ocSet4(self) -> int:
        Y = self.Y
        return sum(1 for k in range(self.cs) if val(Y[k]) != NULL)

    @cached_property
    def ocSet5(self) -> int:
        return sum(1 for e in self.hn_slots if val(e) != NULL)

    @cached_property
    def ocSet6(self) -> int:
        return sum(1 for e in self.hn_slots if e != NULL)

    @cached_property
    def ocSet7(self) -> int:
        h = self.s.H[self.nxt]
        return sum(1 for _, q in self.procs if q.pc >= 125 and q.b_mE and q.to == h)

    def prSet(self, which: int, i: int) -> int:
        test = _PR_SETS[which]
        return sum(1 for _, q in self.procs if test(q, i))

    def buSet(self, which: int, i: int) -> int:
        test = _BU_SETS[which]
        return sum(1 for _, q in self.procs if test(q, i))


def _oc1(q: Proc, ci: int) -> bool:
    pc = q.pc
    if q.index != ci or 30 <= pc <= 41 or 46 <= pc <= 57:
        return True
    if 59 <= pc <= 65:
        return q.return_gA >= 30
    if 67 <= pc <= 72:
        return q.return_rA == 59 and q.return_gA >= 30 or q.return_rA == 90 and q.return_ref >= 30
    return (pc == 90 or 104 <= pc <= 105) and q.return_ref >= 30


def _pr1(q, i):
    return q.index == i and q.pc not in (0, 59, 60)


def _pr2(q, i):
    pc = q.pc
    return (
        q.index == i and pc in (104, 105)
        or q.i_rA == i and q.index != i and 67 <= pc <= 72
        or q.i_nT == i and 81 <= pc <= 84
        or q.i_mig == i and pc >= 97
    )


def _pr3(q, i):
    pc = q.pc
    return (
        q.index == i and (61 <= pc <= 65 or 104 <= pc <= 105)
        or q.i_rA == i and pc == 72
        or q.i_nT == i and 81 <= pc <= 82
        or q.i_mig == i and 97 <= pc <= 98
    )


def _pr4(q, i):
    pc = q.pc
    return q.index == i and 61 <= pc <= 65 or q.i_mig == i and 97 <= pc <= 98


def _bu1(q, i):
    pc = q.pc
    return q.index == i and (
        (1 <= pc <= 58 or 62 < pc <= 68) and pc != 65
        or 69 <= pc <= 72 and q.return_rA > 59
        or pc > 72
    )


def _bu2(q, i):
    pc = q.pc
    return (
        q.index == i and pc == 104
        or q.i_rA == i and q.index != i and 67 <= pc <= 68
        or q.i_nT == i and 82 <= pc <= 84
        or q.i_mig == i and pc >= 100
    )


_PR_SETS = {1: _pr1, 2: _pr2, 3: _pr3, 4: _pr4}
_BU_SETS = {1: _bu1, 2: _bu2}


def _count(b: bool) -> int:
    return 1 if b else 0


def _w(**kw) -> dict:
    return kw


# ---------------------------------------------------------------------------
# Main correctness properties


@invariant("Co1", PROCESS, [14])
def Co1(c, p, q):
    """pc=14 => val(r_fi) = rS_fi"""
    if q.pc == 14 and val(q.r_fi) != q.rS_fi:
        return _w(p=p, r_fi=q.r_fi, rS_fi=q.rS_fi)


@invariant("Co2", PROCESS, [25, 26])
def Co2(c, p, q):
    """pc in {25,26} => suc_del = sucS_del"""
    if q.pc in (25, 26) and q.suc_del != q.sucS_del:
        return _w(p=p, suc=q.suc_del, sucS=q.sucS_del)


@invariant("Co3", PROCESS, [41, 42])
def Co3(c, p, q):
    """pc in {41,42} => suc_ins = sucS_ins"""
    if q.pc in (41, 42) and q.suc_ins != q.sucS_ins:
        return _w(p=p, suc=q.suc_ins, sucS=q.sucS_ins)


@invariant("Cn1", PROCESS, [14])
def Cn1(c, p, q):
    """pc=14 => cnt_fi = 1"""
    if q.pc == 14 and q.cnt_fi != 1:
        return _w(p=p, cnt=q.cnt_fi)


@invariant("Cn2", PROCESS, [25, 26])
def Cn2(c, p, q):
    """pc in {25,26} => cnt_del = 1"""
    if q.pc in (25, 26) and q.cnt_del != 1:
        return _w(p=p, cnt=q.cnt_del)


@invariant("Cn3", PROCESS, [41, 42])
def Cn3(c, p, q):
    """pc in {41,42} => cnt_ins = 1"""
    if q.pc in (41, 42) and q.cnt_ins != 1:
        return _w(p=p, cnt=q.cnt_ins)


@invariant("Cn4", PROCESS, [57])
def Cn4(c, p, q):
    """pc=57 => cnt_ass = 1"""
    if q.pc == 57 and q.cnt_ass != 1:
        return _w(p=p, cnt=q.cnt_ass)


@invariant("No1")
def No1(c):
    """#nbSet1 <= 2P"""
    n = len(c.nbSet1)
    if n > c.two_p:
        return _w(live=n)


@invariant("No2")
def No2(c):
    """#nbSet1 = #nbSet2"""
    if len(c.nbSet1) != len(c.nbSet2):
        return _w(nbSet1=sorted(c.nbSet1), nbSet2=sorted(c.nbSet2))


# ---------------------------------------------------------------------------
# Heap


@invariant("He1")
def He1(c):
    """Heap(0) is absent"""
    if 0 in c.tables:
        return _w(h=0)


@invariant("He2")
def He2(c):
    """H(i) != 0 iff Heap(H(i)) is present"""
    H = c.s.H
    for i in range(1, c.two_p + 1):
        if (H[i] != 0) != (H[i] in c.tables):
            return _w(i=i, h=H[i])


@invariant("He3")
def He3(c):
    """Heap(H(currInd)) is present"""
    if c.s.H[c.s.currInd] not in c.tables:
        return _w(currInd=c.s.currInd, h=c.s.H[c.s.currInd])


@invariant("He4", PROCESS, HOLDS_INDEX)
def He4(c, p, q):
    """holds_index => Heap(H(index)) is present"""
    if holds_index(q) and c.s.H[q.index] not in c.tables:
        return _w(p=p, index=q.index, pc=q.pc)


@invariant("He5")
def He5(c):
    """Heap(H(i)) present => H(i).size >= P"""
    H = c.s.H
    for i in range(1, c.two_p + 1):
        t = c.tables.get(H[i])
        if t is not None and t.size < c.P:
            return _w(i=i, size=t.size)


@invariant("He6")
def He6(c):
    """next(currInd) != 0 => Heap(H(next(currInd))) present"""
    if c.nxt != 0 and c.s.H[c.nxt] not in c.tables:
        return _w(next=c.nxt)


# ---------------------------------------------------------------------------
# Table pointers


@invariant("Ha1")
def Ha1(c):
    """H_index > 0"""
    if not c.s.heap.h_index > 0:
        return _w(h_index=c.s.heap.h_index)


@invariant("Ha2")
def Ha2(c):
    """H(i) < H_index"""
    H, hi = c.s.H, c.s.heap.h_index
    for i in range(1, c.two_p + 1):
        if not H[i] < hi:
            return _w(i=i, h=H[i], h_index=hi)


@invariant("Ha3")
def Ha3(c):
    """i != j and Heap(H(i)) present => H(i) != H(j)"""
    H = c.s.H
    seen: dict[int, int] = {}
    for i in range(1, c.two_p + 1):
        h = H[i]
        if h in c.tables:
            if h in seen:
                return _w(i=seen[h], j=i, h=h)
            seen[h] = i
    # a dangling duplicate of a live pointer is caught above; pairs where
    # only one side is live cannot be equal


@invariant("Ha4", PROCESS)
def Ha4(c, p, q):
    """index != currInd => H(index) != H(currInd)"""
    s = c.s
    if q.index != s.currInd and s.H[q.index] == s.H[s.currInd]:
        return _w(p=p, index=q.index)


# ---------------------------------------------------------------------------
# Ghost counters


@invariant("Cn5", PROCESS, [6, 7])
def Cn5(c, p, q):
    """pc in [6,7] => cnt_fi = 0"""
    if 6 <= q.pc <= 7 and q.cnt_fi != 0:
        return _w(p=p, cnt=q.cnt_fi)


@invariant("Cn6", PROCESS, labels((8, 13)) | CALL_LABELS)
def Cn6(c, p, q):
    """in find after the probe read => cnt_fi = #Find(r_fi, a_fi)"""
    if 8 <= q.pc <= 13 or _within_call(q, _T10):
        if q.cnt_fi != _count(find(q.r_fi, q.a_fi)):
            return _w(p=p, pc=q.pc, cnt=q.cnt_fi, r_fi=q.r_fi)


@invariant("Cn7", PROCESS, labels(16, 17, 20, 21) | CALL_LABELS)
def Cn7(c, p, q):
    """in delete before the probe read => cnt_del = 0"""
    pc = q.pc
    if (16 <= pc <= 21 and pc != 18) or _within_call(q, _T20):
        if q.cnt_del != 0:
            return _w(p=p, pc=pc, cnt=q.cnt_del)


@invariant("Cn8", PROCESS, [18])
def Cn8(c, p, q):
    """pc=18 => cnt_del = #(r_del = null)"""
    if q.pc == 18 and q.cnt_del != _count(q.r_del == NULL):
        return _w(p=p, cnt=q.cnt_del, r_del=q.r_del)


@invariant("Cn9", PROCESS, labels((28, 33)) | CALL_LABELS_NT)
def Cn9(c, p, q):
    """in insert before the probe read => cnt_ins = 0"""
    if 28 <= q.pc <= 33 or _within_call(q, _T30, _T30):
        if q.cnt_ins != 0:
            return _w(p=p, pc=q.pc, cnt=q.cnt_ins)


@invariant("Cn10", PROCESS, labels((35, 37)) | CALL_LABELS)
def Cn10(c, p, q):
    """in insert after the probe read => cnt_ins = #(a_ins = ADR(r_ins) or suc_ins)"""
    if 35 <= q.pc <= 37 or _within_call(q, _T36):
        want = _count(q.a_ins == adr(q.r_ins) or q.suc_ins)
        if q.cnt_ins != want:
            return _w(p=p, pc=q.pc, cnt=q.cnt_ins, want=want)


@invariant("Cn11", PROCESS, labels((44, 52)) | CALL_LABELS_NT)
def Cn11(c, p, q):
    """in assign before success => cnt_ass = 0"""
    if 44 <= q.pc <= 52 or _within_call(q, _T46_51, _T46):
        if q.cnt_ass != 0:
            return _w(p=p, pc=q.pc, cnt=q.cnt_ass)


# ---------------------------------------------------------------------------
# Current table and Y


@invariant("Cu1", PROCESS, HOLDS_INDEX)
def Cu1(c, p, q):
    """an outdated table held by a process is fully migrated"""
    s = c.s
    if not holds_index(q):
        return None
    h = s.H[q.index]
    if h == s.H[s.currInd]:
        return None
    t = c.table(h)
    for k, e in enumerate(t.table):
        if e != DONE:
            return _w(p=p, index=q.index, k=k, entry=e)


@invariant("Cu2")
def Cu2(c):
    """#{k < curSize | Y[k] != null} < curSize"""
    if not c.y_nonnull < c.cs:
        return _w(nonnull=c.y_nonnull, curSize=c.cs)


@invariant("Cu3")
def Cu3(c):
    """H(currInd).bound + 2P < curSize"""
    if not c.cur.bound + c.two_p < c.cs:
        return _w(bound=c.cur.bound, curSize=c.cs)


@invariant("Cu4")
def Cu4(c):
    """H(currInd).dels + #deSet2 = #deSet1"""
    if c.cur.dels + c.deSet2 != c.deSet1:
        return _w(dels=c.cur.dels, deSet2=c.deSet2, deSet1=c.deSet1)


_tombstone("Cu5")


@invariant("Cu6")
def Cu6(c):
    """H(currInd).occ + #ocSet1 + #ocSet2 <= H(currInd).bound + 2P"""
    lhs = c.cur.occ + c.ocSet1 + c.ocSet2
    if lhs > c.cur.bound + c.two_p:
        return _w(occ=c.cur.occ, ocSet1=c.ocSet1, ocSet2=c.ocSet2, bound=c.cur.bound)


@invariant("Cu7")
def Cu7(c):
    """#{k | Y[k] != null} = H(currInd).occ + #ocSet2 + #ocSet3"""
    rhs = c.cur.occ + c.ocSet2 + c.ocSet3
    if c.y_nonnull != rhs:
        return _w(nonnull=c.y_nonnull, occ=c.cur.occ, ocSet2=c.ocSet2, ocSet3=c.ocSet3)


@invariant("Cu8")
def Cu8(c):
    """next(currInd) = 0 => no old-tagged entry in the current table"""
    if c.nxt == 0:
        for n in range(c.cs):
            if oldp(c.cur.table[n]):
                return _w(n=n)


@invariant("Cu9")
def Cu9(c):
    """untagged current entries equal Y"""
    T, Y = c.cur.table, c.Y
    for n in range(c.cs):
        if not oldp(T[n]) and T[n] != Y[n]:
            return _w(n=n, entry=T[n], y=Y[n])


@invariant("Cu10")
def Cu10(c):
    """tagged non-null current entries carry Y's value"""
    T, Y = c.cur.table, c.Y
    for n in range(c.cs):
        e = T[n]
        if oldp(e) and val(e) != NULL and val(e) != val(Y[n]):
            return _w(n=n, entry=e, y=Y[n])


def _least_find(entries: list[int], a: int) -> int | None:
    for n, e in enumerate(entries):
        if e == NULL or a == adr(e):
            return n
    return None


@invariant("Cu11")
def Cu11(c):
    """LeastFind(a,n) => X(a) = val(Y[key(a,curSize,n)])"""
    for a, ys in c.y_probes.items():
        n = _least_find(ys, a)
        if n is not None and c.X(a) != val(ys[n]):
            return _w(a=a, n=n, X=c.X(a), y=ys[n])


@invariant("Cu12")
def Cu12(c):
    """X(a) = val(Y[key(a,curSize,n)]) != null => LeastFind(a,n)"""
    for a, ys in c.y_probes.items():
        x = c.X(a)
        if x == NULL:
            continue
        first = _least_find(ys, a)
        for n, e in enumerate(ys):
            if val(e) == x and n != first:
                return _w(a=a, n=n, least=first)


def _unique_match(entries: list[int], a: int, x: int) -> dict | None:
    hits = [n for n, e in enumerate(entries) if val(e) == x]
    if not hits:
        return None
    same = [m for m, e in enumerate(entries) if adr(e) == a]
    for n in hits:
        for m in same:
            if m != n:
                return _w(a=a, n=n, m=m)
    return None


@invariant("Cu13")
def Cu13(c):
    """X(a) found at probe n => no other probe position carries address a"""
    for a, ys in c.y_probes.items():
        x = c.X(a)
        if x != NULL:
            w = _unique_match(ys, a, x)
            if w:
                return w


@invariant("Cu14")
def Cu14(c):
    """X(a) = null => no non-null Y entry carries address a"""
    for a, ys in c.y_probes.items():
        if c.X(a) == NULL:
            for n, e in enumerate(ys):
                if val(e) != NULL and adr(e) == a:
                    return _w(a=a, n=n, entry=e)


@invariant("Cu15")
def Cu15(c):
    """X(a) != null => X(a) occurs along a's probe sequence in Y"""
    for a, ys in c.y_probes.items():
        x = c.X(a)
        if x != NULL and not any(val(e) == x for e in ys):
            return _w(a=a, X=x)


@invariant("Cu16")
def Cu16(c):
    """non-null values of Y are pairwise distinct (bijection onto the value set)"""
    Y = c.Y
    vals = [val(Y[m]) for m in range(c.cs) if val(Y[m]) != NULL]
    if len(vals) != len(set(vals)):
        return _w(values=vals)


# ---------------------------------------------------------------------------
# next and the successor table


@invariant("Ne1")
def Ne1(c):
    """currInd != next(currInd)"""
    if c.s.currInd == c.nxt:
        return _w(currInd=c.s.currInd)


@invariant("Ne2")
def Ne2(c):
    """next(currInd) != 0 => next(next(currInd)) = 0"""
    if c.nxt != 0 and c.s.next[c.nxt] != 0:
        return _w(next=c.nxt, next2=c.s.next[c.nxt])


NE3_LABELS = labels((1, 59), *[x for x in LABELS if x >= 62 and x != 65])


@invariant("Ne3", PROCESS, NE3_LABELS)
def Ne3(c, p, q):
    """pc in [1,59] or (pc >= 62 and pc != 65) => index != next(currInd)"""
    pc = q.pc
    if (1 <= pc <= 59 or pc >= 62 and pc != 65) and q.index == c.nxt:
        return _w(p=p, pc=pc, index=q.index)


@invariant("Ne4", PROCESS, USES_INDEX)
def Ne4(c, p, q):
    """uses_index => index != next(index)"""
    if uses_index(q) and q.index == c.s.next[q.index]:
        return _w(p=p, index=q.index)


@invariant("Ne5", PROCESS, USES_INDEX)
def Ne5(c, p, q):
    """uses_index and next(index) = 0 => index = currInd"""
    if uses_index(q) and c.s.next[q.index] == 0 and q.index != c.s.currInd:
        return _w(p=p, pc=q.pc, index=q.index)


@invariant("Ne6")
def Ne6(c):
    """next(currInd) != 0 => #ocSet6 <= #{Y != null} - dels - #deSet2"""
    if c.nxt != 0:
        rhs = c.y_nonnull - c.cur.dels - c.deSet2
        if c.ocSet6 > rhs:
            return _w(ocSet6=c.ocSet6, rhs=rhs)


@invariant("Ne7")
def Ne7(c):
    """next(currInd) != 0 => bound - dels + 2P <= successor bound"""
    if c.nxt != 0:
        cur, hn = c.cur, c.hn
        if cur.bound - cur.dels + c.two_p > hn.bound:
            return _w(bound=cur.bound, dels=cur.dels, next_bound=hn.bound)


@invariant("Ne8")
def Ne8(c):
    """next(currInd) != 0 => successor bound + 2P < successor size"""
    if c.nxt != 0 and not c.hn.bound + c.two_p < c.hn.size:
        return _w(bound=c.hn.bound, size=c.hn.size)


@invariant("Ne9")
def Ne9(c):
    """next(currInd) != 0 => successor dels = #deSet3"""
    if c.nxt != 0 and c.hn.dels != c.deSet3:
        return _w(dels=c.hn.dels, deSet3=c.deSet3)


@invariant("Ne9a")
def Ne9a(c):
    """next(currInd) != 0 => successor dels = 0"""
    if c.nxt != 0 and c.hn.dels != 0:
        return _w(dels=c.hn.dels)


@invariant("Ne10")
def Ne10(c):
    """next(currInd) != 0 => successor holds no del or done"""
    if c.nxt != 0:
        for k, e in enumerate(c.hn.table):
            if e == DEL or e == DONE:
                return _w(k=k, entry=e)


@invariant("Ne11")
def Ne11(c):
    """next(currInd) != 0 => successor holds no old-tagged entry"""
    if c.nxt != 0:
        for k, e in enumerate(c.hn.table):
            if oldp(e):
                return _w(k=k, entry=e)


def _done_addresses(c: Ctx) -> list[tuple[int, int]]:
    """(k, a) for current slots marked done, with a = ADR(Y[k]) nonzero."""
    T, Y = c.cur.table, c.Y
    out = []
    for k in range(c.cs):
        if T[k] == DONE:
            a = adr(Y[k])
            if a:
                out.append((k, a))
    return out


def _hn_probe(c: Ctx, a: int) -> list[int]:
    probes = c.hn_probes
    if a in probes:
        return probes[a]
    hn = c.hn
    return c.probe(hn.table, hn.size, a) if hn is not None else []


@invariant("Ne12")
def Ne12(c):
    """migrated address a: LeastFind(h,a,m) => X(a) = val(h.table[key(a,h.size,m)])"""
    for k, a in _done_addresses(c):
        hs = _hn_probe(c, a)
        m = _least_find(hs, a)
        if m is not None and c.X(a) != val(hs[m]):
            return _w(k=k, a=a, m=m, X=c.X(a), entry=hs[m])


@invariant("Ne13")
def Ne13(c):
    """migrated address a: X(a) = val(h entry at probe m) != null => LeastFind(h,a,m)"""
    for k, a in _done_addresses(c):
        x = c.X(a)
        if x == NULL:
            continue
        hs = _hn_probe(c, a)
        first = _least_find(hs, a)
        for m, e in enumerate(hs):
            if val(e) == x and m != first:
                return _w(k=k, a=a, m=m, least=first)


@invariant("Ne14")
def Ne14(c):
    """next(currInd) != 0: X(a) = val(h entry at probe k) != null => LeastFind(h,a,k)"""
    if c.nxt == 0:
        return None
    for a in c.s.X:
        if a == 0:
            continue
        x = c.X(a)
        hs = _hn_probe(c, a)
        first = _least_find(hs, a)
        for k, e in enumerate(hs):
            if val(e) == x and k != first:
                return _w(a=a, k=k, least=first)


@invariant("Ne15")
def Ne15(c):
    """migrated address a with X(a) in h at probe m: no other probe carries a"""
    for k, a in _done_addresses(c):
        x = c.X(a)
        if x != NULL:
            w = _unique_match(_hn_probe(c, a), a, x)
            if w:
                w["k"] = k
                return w


@invariant("Ne16")
def Ne16(c):
    """migrated address a with X(a) = null: no non-null h entry carries a"""
    for k, a in _done_addresses(c):
        if c.X(a) == NULL:
            for m, e in enumerate(_hn_probe(c, a)):
                if val(e) != NULL and adr(e) == a:
                    return _w(k=k, a=a, m=m, entry=e)


@invariant("Ne17")
def Ne17(c):
    """next(currInd) != 0: every address in h has X(a) = that value, non-null"""
    if c.nxt == 0:
        return None
    for m, e in enumerate(c.hn.table):
        a = adr(e)
        if a != 0 and (c.X(a) != val(e) or c.X(a) == NULL):
            return _w(m=m, a=a, entry=e, X=c.X(a))


@invariant("Ne18")
def Ne18(c):
    """next(currInd) != 0: every value in h came from an old-tagged current slot"""
    if c.nxt == 0:
        return None
    T, Y = c.cur.table, c.Y
    sources = {val(Y[n]) for n in range(c.cs) if oldp(T[n])}
    for m, e in enumerate(c.hn.table):
        if adr(e) != 0 and val(e) not in sources:
            return _w(m=m, entry=e)


@invariant("Ne19")
def Ne19(c):
    """next(currInd) != 0: each address occurs at most once in h"""
    if c.nxt == 0:
        return None
    seen: dict[int, int] = {}
    for m, e in enumerate(c.hn.table):
        a = adr(e)
        if a:
            if a in seen:
                return _w(a=a, m=seen[a], n=m)
            seen[a] = m


@invariant("Ne20")
def Ne20(c):
    """migrated address a with X(a) != null: X(a) occurs along a's probe sequence in h"""
    for k, a in _done_addresses(c):
        x = c.X(a)
        if x != NULL and not any(val(e) == x for e in _hn_probe(c, a)):
            return _w(k=k, a=a, X=x)


_tombstone("Ne21")


@invariant("Ne22")
def Ne22(c):
    """next(currInd) != 0 => #ocSet6 = successor occ + #ocSet7"""
    if c.nxt != 0 and c.ocSet6 != c.hn.occ + c.ocSet7:
        return _w(ocSet6=c.ocSet6, occ=c.hn.occ, ocSet7=c.ocSet7)


@invariant("Ne23")
def Ne23(c):
    """next(currInd) != 0 => successor occ <= successor bound"""
    if c.nxt != 0 and c.hn.occ > c.hn.bound:
        return _w(occ=c.hn.occ, bound=c.hn.bound)


@invariant("Ne24")
def Ne24(c):
    """next(currInd) != 0 => #ocSet5 <= #ocSet4"""
    if c.nxt != 0 and c.ocSet5 > c.ocSet4:
        return _w(ocSet5=c.ocSet5, ocSet4=c.ocSet4)


def _nonnull_vals(entries: Iterable[int]) -> list[int]:
    return [v for v in map(val, entries) if v != NULL]


@invariant("Ne25")
def Ne25(c):
    """next(currInd) != 0: non-null values of h are pairwise distinct"""
    if c.nxt != 0:
        vals = _nonnull_vals(c.hn.table)
        if len(vals) != len(set(vals)):
            return _w(values=vals)


@invariant("Ne26")
def Ne26(c):
    """next(currInd) != 0: #distinct values of h <= #distinct values of Y"""
    if c.nxt != 0:
        hv = set(_nonnull_vals(c.hn.table))
        yv = set(_nonnull_vals(c.Y[: c.cs]))
        if len(hv) > len(yv):
            return _w(h_values=len(hv), y_values=len(yv))


@invariant("Ne27")
def Ne27(c):
    """next(currInd) != 0: #non-null slots of h <= #non-null slots of Y"""
    if c.nxt != 0:
        hn = len(_nonnull_vals(c.hn.table))
        if hn and hn > c.ocSet4:
            return _w(h_slots=hn, y_slots=c.ocSet4)


# ---------------------------------------------------------------------------
# find


@invariant("fi1", PROCESS)
def fi1(c, p, q):
    """a_fi != 0"""
    if q.a_fi == 0:
        return _w(p=p)


@invariant("fi2", PROCESS, [6, 11])
def fi2(c, p, q):
    """pc in {6,11} => n_fi = 0"""
    if q.pc in (6, 11) and q.n_fi != 0:
        return _w(p=p, n=q.n_fi)


@invariant("fi3", PROCESS, [7, 8, 13])
def fi3(c, p, q):
    """pc in {7,8,13} => l_fi = h_fi.size"""
    if q.pc in (7, 8, 13) and q.l_fi != c.table(q.h_fi).size:
        return _w(p=p, l=q.l_fi, h=q.h_fi)


@invariant("fi4", PROCESS, labels((6, 13)) - {10})
def fi4(c, p, q):
    """pc in [6,13] \\ {10} => h_fi = H(index)"""
    if 6 <= q.pc <= 13 and q.pc != 10 and q.h_fi != c.s.H[q.index]:
        return _w(p=p, h=q.h_fi, index=q.index)


def _is_current(c: Ctx, h: int) -> bool:
    return h == c.s.H[c.s.currInd]


@invariant("fi5", PROCESS, [7])
def fi5(c, p, q):
    """pc=7 and h_fi current => n_fi < curSize"""
    if q.pc == 7 and _is_current(c, q.h_fi) and not q.n_fi < c.cs:
        return _w(p=p, n=q.n_fi)


@invariant("fi6", PROCESS, [8])
def fi6(c, p, q):
    """pc=8, current, missed, not done => Y at the probe also misses"""
    if q.pc == 8 and _is_current(c, q.h_fi) and not find(q.r_fi, q.a_fi) and q.r_fi != DONE:
        y = c.Y[c.s.key(q.a_fi, c.cs, q.n_fi)]
        if find(y, q.a_fi):
            return _w(p=p, n=q.n_fi, y=y)


def _prefix_misses(c: Ctx, p: int, a: int, n: int) -> dict | None:
    Y, cs, key = c.Y, c.cs, c.s.key
    for m in range(n):
        if find(Y[key(a, cs, m)], a):
            return _w(p=p, a=a, m=m)
    return None


@invariant("fi7", PROCESS, [13])
def fi7(c, p, q):
    """pc=13, current, missed => Y misses at all probes m < n_fi"""
    if q.pc == 13 and _is_current(c, q.h_fi) and not find(q.r_fi, q.a_fi):
        return _prefix_misses(c, p, q.a_fi, q.n_fi)


@invariant("fi8", PROCESS, [7, 8])
def fi8(c, p, q):
    """pc in {7,8}, current => Y misses at all probes m < n_fi"""
    if q.pc in (7, 8) and _is_current(c, q.h_fi):
        return _prefix_misses(c, p, q.a_fi, q.n_fi)


def _slot_claim(c: Ctx, p: int, h: int, a: int, l: int, n: int) -> dict | None:
    t = c.table(h)
    e = t.table[c.s.key(a, l, n)]
    if find(e, a) and c.X(a) != val(e):
        return _w(p=p, a=a, n=n, entry=e, X=c.X(a))
    return None


@invariant("fi9", PROCESS, [7])
def fi9(c, p, q):
    """pc=7 and Find(t, a_fi) => X(a_fi) = val(t)"""
    if q.pc == 7:
        return _slot_claim(c, p, q.h_fi, q.a_fi, q.l_fi, q.n_fi)


@invariant("fi10", PROCESS, LABEL_SET - {5, 6, 7})
def fi10(c, p, q):
    """pc not in (1,7] and Find(r_fi, a_fi) => val(r_fi) = rS_fi"""
    if q.pc not in (5, 6, 7) and find(q.r_fi, q.a_fi) and val(q.r_fi) != q.rS_fi:
        return _w(p=p, pc=q.pc, r_fi=q.r_fi, rS=q.rS_fi)


def _old_needs_next(c: Ctx, p: int, q: Proc, r: int) -> dict | None:
    if oldp(r) and q.index == c.s.currInd and c.nxt == 0:
        return _w(p=p, r=r)
    return None


@invariant("fi11", PROCESS, [8])
def fi11(c, p, q):
    """pc=8, old r_fi, index current => next(currInd) != 0"""
    if q.pc == 8:
        return _old_needs_next(c, p, q, q.r_fi)


# ---------------------------------------------------------------------------
# delete


@invariant("de1", PROCESS)
def de1(c, p, q):
    """a_del != 0"""
    if q.a_del == 0:
        return _w(p=p)


@invariant("de2", PROCESS, [17, 18])
def de2(c, p, q):
    """pc in {17,18} => l_del = h_del.size"""
    if q.pc in (17, 18) and q.l_del != c.table(q.h_del).size:
        return _w(p=p, l=q.l_del)


@invariant("de3", PROCESS, labels((16, 25)) - {20})
def de3(c, p, q):
    """pc in [16,25] \\ {20} => h_del = H(index)"""
    if 16 <= q.pc <= 25 and q.pc != 20 and q.h_del != c.s.H[q.index]:
        return _w(p=p, h=q.h_del, index=q.index)


@invariant("de4", PROCESS, [18])
def de4(c, p, q):
    """pc=18 => k_del = key(a_del, l_del, n_del)"""
    if q.pc == 18 and q.k_del != c.s.key(q.a_del, q.l_del, q.n_del):
        return _w(p=p, k=q.k_del)


@invariant("de5", PROCESS, labels(16, 17, (18, 21)) | CALL_LABELS)
def de5(c, p, q):
    """pc in {16,17} or Deleting => not suc_del"""
    if (q.pc in (16, 17) or deleting(q)) and q.suc_del:
        return _w(p=p, pc=q.pc)


@invariant("de6", PROCESS, labels((18, 21)) | CALL_LABELS)
def de6(c, p, q):
    """Deleting and sucS_del => r_del != null"""
    if deleting(q) and q.sucS_del and q.r_del == NULL:
        return _w(p=p, pc=q.pc)


def _cas_on_current(c: Ctx, p: int, h: int, k: int) -> dict | None:
    if not oldp(c.table(h).table[k]) and not _is_current(c, h):
        return _w(p=p, h=h, k=k)
    return None


@invariant("de7", PROCESS, [18])
def de7(c, p, q):
    """pc=18 and h_del[k_del] untagged => h_del current"""
    if q.pc == 18:
        return _cas_on_current(c, p, q.h_del, q.k_del)


@invariant("de8", PROCESS, [17, 18])
def de8(c, p, q):
    """pc in {17,18}, current => n_del < curSize"""
    if q.pc in (17, 18) and _is_current(c, q.h_del) and not q.n_del < c.cs:
        return _w(p=p, n=q.n_del)


def _y_agrees(c: Ctx, p: int, h: int, a: int, n: int, r: int) -> dict | None:
    if val(r) != NULL or r == DEL:
        y = c.Y[c.s.key(a, c.table(h).size, n)]
        if not (y != NULL and (y == DEL or adr(y) == adr(r))):
            return _w(p=p, a=a, n=n, r=r, y=y)
    return None


@invariant("de9", PROCESS, [18])
def de9(c, p, q):
    """pc=18, current, r_del a value or del => Y at the probe is del or same address"""
    if q.pc == 18 and _is_current(c, q.h_del):
        return _y_agrees(c, p, q.h_del, q.a_del, q.n_del, q.r_del)


@invariant("de10", PROCESS, [17, 18])
def de10(c, p, q):
    """pc in {17,18}, current => Y misses at all probes m < n_del"""
    if q.pc in (17, 18) and _is_current(c, q.h_del):
        return _prefix_misses(c, p, q.a_del, q.n_del)


@invariant("de11", PROCESS, [17, 18])
def de11(c, p, q):
    """pc in {17,18} and Find(t, a_del) => X(a_del) = val(t)"""
    if q.pc in (17, 18):
        return _slot_claim(c, p, q.h_del, q.a_del, q.l_del, q.n_del)


@invariant("de12", PROCESS, [18])
def de12(c, p, q):
    """pc=18, old r_del, index current => next(currInd) != 0"""
    if q.pc == 18:
        return _old_needs_next(c, p, q, q.r_del)


@invariant("de13", PROCESS, [18])
def de13(c, p, q):
    """pc=18 => k_del < H(index).size"""
    if q.pc == 18 and not q.k_del < c.table(c.s.H[q.index]).size:
        return _w(p=p, k=q.k_del)


# ---------------------------------------------------------------------------
# insert


@invariant("in1", PROCESS)
def in1(c, p, q):
    """a_ins = ADR(v_ins) and v_ins != null"""
    if q.a_ins != adr(q.v_ins) or q.v_ins == NULL:
        return _w(p=p, a=q.a_ins, v=q.v_ins)


@invariant("in2", PROCESS, labels((32, 35)))
def in2(c, p, q):
    """pc in [32,35] => l_ins = h_ins.size"""
    if 32 <= q.pc <= 35 and q.l_ins != c.table(q.h_ins).size:
        return _w(p=p, l=q.l_ins)


@invariant("in3", PROCESS, labels((28, 41)) - {30, 36})
def in3(c, p, q):
    """pc in [28,41] \\ {30,36} => h_ins = H(index)"""
    if 28 <= q.pc <= 41 and q.pc not in (30, 36) and q.h_ins != c.s.H[q.index]:
        return _w(p=p, h=q.h_ins, index=q.index)


@invariant("in4", PROCESS, [33, 35])
def in4(c, p, q):
    """pc in {33,35} => k_ins = key(a_ins, l_ins, n_ins)"""
    if q.pc in (33, 35) and q.k_ins != c.s.key(q.a_ins, q.l_ins, q.n_ins):
        return _w(p=p, k=q.k_ins)


@invariant("in5", PROCESS, labels((32, 33), (35, 37)) | CALL_LABELS)
def in5(c, p, q):
    """pc in [32,33] or Inserting => not suc_ins"""
    if (32 <= q.pc <= 33 or inserting(q)) and q.suc_ins:
        return _w(p=p, pc=q.pc)


@invariant("in6", PROCESS, labels((35, 37)) | CALL_LABELS)
def in6(c, p, q):
    """Inserting and sucS_ins => ADR(r_ins) != a_ins"""
    if inserting(q) and q.sucS_ins and adr(q.r_ins) == q.a_ins:
        return _w(p=p, pc=q.pc)


@invariant("in7", PROCESS, [35])
def in7(c, p, q):
    """pc=35 and h_ins[k_ins] untagged => h_ins current"""
    if q.pc == 35:
        return _cas_on_current(c, p, q.h_ins, q.k_ins)


@invariant("in8", PROCESS, [33, 35])
def in8(c, p, q):
    """pc in {33,35}, current => n_ins < curSize"""
    if q.pc in (33, 35) and _is_current(c, q.h_ins) and not q.n_ins < c.cs:
        return _w(p=p, n=q.n_ins)


@invariant("in9", PROCESS, [35])
def in9(c, p, q):
    """pc=35, current, r_ins a value or del => Y at the probe is del or same address"""
    if q.pc == 35 and _is_current(c, q.h_ins):
        return _y_agrees(c, p, q.h_ins, q.a_ins, q.n_ins, q.r_ins)


@invariant("in10", PROCESS, [32, 33, 35])
def in10(c, p, q):
    """pc in {32,33,35}, current => Y misses at all probes m < n_ins"""
    if q.pc in (32, 33, 35) and _is_current(c, q.h_ins):
        return _prefix_misses(c, p, q.a_ins, q.n_ins)


@invariant("in11", PROCESS, [33, 35])
def in11(c, p, q):
    """pc in {33,35} and Find(t, a_ins) => X(a_ins) = val(t)"""
    if q.pc in (33, 35):
        return _slot_claim(c, p, q.h_ins, q.a_ins, q.l_ins, q.n_ins)


@invariant("in12", PROCESS, [35])
def in12(c, p, q):
    """pc=35, old r_ins, index current => next(currInd) != 0"""
    if q.pc == 35:
        return _old_needs_next(c, p, q, q.r_ins)


@invariant("in13", PROCESS, [35])
def in13(c, p, q):
    """pc=35 => k_ins < H(index).size"""
    if q.pc == 35 and not q.k_ins < c.table(c.s.H[q.index]).size:
        return _w(p=p, k=q.k_ins)


# ---------------------------------------------------------------------------
# assign


@invariant("as1", PROCESS)
def as1(c, p, q):
    """a_ass = ADR(v_ass) and v_ass != null"""
    if q.a_ass != adr(q.v_ass) or q.v_ass == NULL:
        return _w(p=p, a=q.a_ass, v=q.v_ass)


@invariant("as2", PROCESS, labels((48, 50)))
def as2(c, p, q):
    """pc in [48,50] => l_ass = h_ass.size"""
    if 48 <= q.pc <= 50 and q.l_ass != c.table(q.h_ass).size:
        return _w(p=p, l=q.l_ass)


@invariant("as3", PROCESS, labels((44, 57)) - {46, 51})
def as3(c, p, q):
    """pc in [44,57] \\ {46,51} => h_ass = H(index)"""
    if 44 <= q.pc <= 57 and q.pc not in (46, 51) and q.h_ass != c.s.H[q.index]:
        return _w(p=p, h=q.h_ass, index=q.index)


@invariant("as4", PROCESS, [49, 50])
def as4(c, p, q):
    """pc in {49,50} => k_ass = key(a_ass, l_ass, n_ass)"""
    if q.pc in (49, 50) and q.k_ass != c.s.key(q.a_ass, q.l_ass, q.n_ass):
        return _w(p=p, k=q.k_ass)


@invariant("as5", PROCESS, [50])
def as5(c, p, q):
    """pc=50 and h_ass[k_ass] untagged => h_ass current"""
    if q.pc == 50:
        return _cas_on_current(c, p, q.h_ass, q.k_ass)


@invariant("as6", PROCESS, [50])
def as6(c, p, q):
    """pc=50, current => n_ass < curSize"""
    if q.pc == 50 and _is_current(c, q.h_ass) and not q.n_ass < c.cs:
        return _w(p=p, n=q.n_ass)


@invariant("as7", PROCESS, [50])
def as7(c, p, q):
    """pc=50, current, r_ass a value or del => Y at the probe is del or same address"""
    if q.pc == 50 and _is_current(c, q.h_ass):
        return _y_agrees(c, p, q.h_ass, q.a_ass, q.n_ass, q.r_ass)


@invariant("as8", PROCESS, [48, 49, 50])
def as8(c, p, q):
    """pc in {48,49,50}, current => Y misses at all probes m < n_ass"""
    if q.pc in (48, 49, 50) and _is_current(c, q.h_ass):
        return _prefix_misses(c, p, q.a_ass, q.n_ass)


@invariant("as9", PROCESS, [50])
def as9(c, p, q):
    """pc=50 and Find(t, a_ass) => X(a_ass) = val(t)"""
    if q.pc == 50:
        return _slot_claim(c, p, q.h_ass, q.a_ass, q.l_ass, q.n_ass)


@invariant("as10", PROCESS, [50])
def as10(c, p, q):
    """pc=50, old r_ass, index current => next(currInd) != 0"""
    if q.pc == 50:
        return _old_needs_next(c, p, q, q.r_ass)


@invariant("as11", PROCESS, [50])
def as11(c, p, q):
    """pc=50 => k_ass < H(index).size"""
    if q.pc == 50 and not q.k_ass < c.table(c.s.H[q.index]).size:
        return _w(p=p, k=q.k_ass)


# ---------------------------------------------------------------------------
# releaseAccess


@invariant("rA1", PROCESS)
def rA1(c, p, q):
    """h_rA < H_index"""
    if not q.h_rA < c.s.heap.h_index:
        return _w(p=p, h=q.h_rA)


@invariant("rA2", PROCESS, [70, 71])
def rA2(c, p, q):
    """pc in [70,71] => h_rA != 0"""
    if q.pc in (70, 71) and q.h_rA == 0:
        return _w(p=p)


@invariant("rA3", PROCESS, [71])
def rA3(c, p, q):
    """pc=71 => Heap(h_rA) present"""
    if q.pc == 71 and q.h_rA not in c.tables:
        return _w(p=p, h=q.h_rA)


@invariant("rA4", PROCESS, [71])
def rA4(c, p, q):
    """pc=71 => H(i_rA) = 0"""
    if q.pc == 71 and c.s.H[q.i_rA] != 0:
        return _w(p=p, i=q.i_rA)


@invariant("rA5", PROCESS, [71])
def rA5(c, p, q):
    """pc=71 => h_rA != H(i) for all i"""
    if q.pc == 71:
        H = c.s.H
        for i in range(1, c.two_p + 1):
            if H[i] == q.h_rA:
                return _w(p=p, i=i, h=q.h_rA)


@invariant("rA6", PROCESS, [70])
def rA6(c, p, q):
    """pc=70 => H(i_rA) != H(currInd)"""
    if q.pc == 70 and c.s.H[q.i_rA] == c.s.H[c.s.currInd]:
        return _w(p=p, i=q.i_rA)


@invariant("rA7", PAIR, [70])
def rA7(c, p, q, r, qr):
    """pc=70 and holds_index(r) => H(i_rA) != H(index.r)"""
    if q.pc == 70 and holds_index(qr) and c.s.H[q.i_rA] == c.s.H[qr.index]:
        return _w(p=p, r=r, i=q.i_rA, index_r=qr.index)


@invariant("rA8", PROCESS, [70])
def rA8(c, p, q):
    """pc=70 => i_rA != next(currInd)"""
    if q.pc == 70 and q.i_rA == c.nxt:
        return _w(p=p, i=q.i_rA)


@invariant("rA9", PROCESS, labels((68, 72)))
def rA9(c, p, q):
    """pc in [68,72] and (h_rA = 0 or h_rA != H(i_rA)) => H(i_rA) = 0"""
    if 68 <= q.pc <= 72:
        h = c.s.H[q.i_rA]
        if (q.h_rA == 0 or q.h_rA != h) and h != 0:
            return _w(p=p, i=q.i_rA, h_rA=q.h_rA, H=h)


_RA_LABELS = labels((67, 72))


@invariant("rA10", PROCESS, _RA_LABELS)
def rA10(c, p, q):
    """releasing with return 0 or 59 => i_rA = index"""
    if 67 <= q.pc <= 72 and q.return_rA in (0, 59) and q.i_rA != q.index:
        return _w(p=p, i=q.i_rA, index=q.index)


@invariant("rA11", PROCESS, _RA_LABELS)
def rA11(c, p, q):
    """releasing with return 77 or 90 => i_rA != index"""
    if 67 <= q.pc <= 72 and q.return_rA in (77, 90) and q.i_rA == q.index:
        return _w(p=p, i=q.i_rA)


@invariant("rA12", PROCESS, _RA_LABELS)
def rA12(c, p, q):
    """releasing with return 77 => next(index) != 0"""
    if 67 <= q.pc <= 72 and q.return_rA == 77 and c.s.next[q.index] == 0:
        return _w(p=p, index=q.index)


@invariant("rA13", PAIR, [71])
def rA13(c, p, q, r, qr):
    """two distinct processes at 71 free distinct tables"""
    if p != r and q.pc == 71 and qr.pc == 71 and q.h_rA == qr.h_rA:
        return _w(p=p, r=r, h=q.h_rA)


@invariant("rA14", PAIR, [71])
def rA14(c, p, q, r, qr):
    """two distinct processes at 71 release distinct slots"""
    if p != r and q.pc == 71 and qr.pc == 71 and q.i_rA == qr.i_rA:
        return _w(p=p, r=r, i=q.i_rA)


# ---------------------------------------------------------------------------
# newTable

_NT_ALL = labels((81, 84))
_NT_LATE = labels(83, 84)


@invariant("nT1", PROCESS, [81, 82])
def nT1(c, p, q):
    """pc in [81,82] => Heap(H(i_nT)) absent"""
    if 81 <= q.pc <= 82 and c.s.H[q.i_nT] in c.tables:
        return _w(p=p, i=q.i_nT)


@invariant("nT2", PROCESS, _NT_LATE)
def nT2(c, p, q):
    """pc in [83,84] => Heap(H(i_nT)) present"""
    if 83 <= q.pc <= 84 and c.s.H[q.i_nT] not in c.tables:
        return _w(p=p, i=q.i_nT)


@invariant("nT3", PROCESS, [84])
def nT3(c, p, q):
    """pc=84 => next(i_nT) = 0"""
    if q.pc == 84 and c.s.next[q.i_nT] != 0:
        return _w(p=p, i=q.i_nT)


def _new_table(c: Ctx, q: Proc) -> Hashtable:
    return c.table(c.s.H[q.i_nT])


@invariant("nT4", PROCESS, _NT_LATE)
def nT4(c, p, q):
    """pc in [83,84] => new table dels = 0"""
    if 83 <= q.pc <= 84 and _new_table(c, q).dels != 0:
        return _w(p=p)


@invariant("nT5", PROCESS, _NT_LATE)
def nT5(c, p, q):
    """pc in [83,84] => new table occ = 0"""
    if 83 <= q.pc <= 84 and _new_table(c, q).occ != 0:
        return _w(p=p)


@invariant("nT6", PROCESS, _NT_LATE)
def nT6(c, p, q):
    """pc in [83,84] => new table bound + 2P < size"""
    if 83 <= q.pc <= 84:
        t = _new_table(c, q)
        if not t.bound + c.two_p < t.size:
            return _w(p=p, bound=t.bound, size=t.size)


@invariant("nT7", PROCESS, _NT_LATE)
def nT7(c, p, q):
    """pc in [83,84], index current => bound - dels + 2P < new bound"""
    if 83 <= q.pc <= 84 and q.index == c.s.currInd:
        t = _new_table(c, q)
        if not c.cur.bound - c.cur.dels + c.two_p < t.bound:
            return _w(p=p, new_bound=t.bound)


@invariant("nT8", PROCESS, _NT_LATE)
def nT8(c, p, q):
    """pc in [83,84] => new table is all null"""
    if 83 <= q.pc <= 84:
        for k, e in enumerate(_new_table(c, q).table):
            if e != NULL:
                return _w(p=p, k=k, entry=e)


@invariant("nT9", PROCESS, _NT_ALL)
def nT9(c, p, q):
    """pc in [81,84] => i_nT != currInd"""
    if 81 <= q.pc <= 84 and q.i_nT == c.s.currInd:
        return _w(p=p, i=q.i_nT)


@invariant("nT10", PAIR, _NT_ALL)
def nT10(c, p, q, r, qr):
    """pc in [81,84] and uses_index(r) => i_nT != index.r"""
    if 81 <= q.pc <= 84 and uses_index(qr) and q.i_nT == qr.index:
        return _w(p=p, r=r, i=q.i_nT)


@invariant("nT11", PROCESS, _NT_ALL)
def nT11(c, p, q):
    """pc in [81,84] => i_nT != next(currInd)"""
    if 81 <= q.pc <= 84 and q.i_nT == c.nxt:
        return _w(p=p, i=q.i_nT)


@invariant("nT12", PROCESS, _NT_ALL)
def nT12(c, p, q):
    """pc in [81,84] => H(i_nT) != H(currInd)"""
    if 81 <= q.pc <= 84 and c.s.H[q.i_nT] == c.s.H[c.s.currInd]:
        return _w(p=p, i=q.i_nT)


@invariant("nT13", PAIR, _NT_ALL)
def nT13(c, p, q, r, qr):
    """pc in [81,84] and holds_index(r) => H(i_nT) != H(index.r)"""
    if 81 <= q.pc <= 84 and holds_index(qr) and c.s.H[q.i_nT] == c.s.H[qr.index]:
        return _w(p=p, r=r, i=q.i_nT)


@invariant("nT14", PAIR, _NT_ALL)
def nT14(c, p, q, r, qr):
    """pc in [81,84] and pc.r in [67,72] => i_nT != i_rA.r"""
    if 81 <= q.pc <= 84 and 67 <= qr.pc <= 72 and q.i_nT == qr.i_rA:
        return _w(p=p, r=r, i=q.i_nT)


@invariant("nT15", PAIR, _NT_LATE)
def nT15(c, p, q, r, qr):
    """pc in [83,84] and pc.r in [67,72] => H(i_nT) != H(i_rA.r)"""
    if 83 <= q.pc <= 84 and 67 <= qr.pc <= 72 and c.s.H[q.i_nT] == c.s.H[qr.i_rA]:
        return _w(p=p, r=r, i=q.i_nT, i_r=qr.i_rA)


@invariant("nT16", PAIR, _NT_ALL)
def nT16(c, p, q, r, qr):
    """distinct processes in [81,84] claim distinct slots"""
    if p != r and 81 <= q.pc <= 84 and 81 <= qr.pc <= 84 and q.i_nT == qr.i_nT:
        return _w(p=p, r=r, i=q.i_nT)


@invariant("nT17", PAIR, _NT_ALL)
def nT17(c, p, q, r, qr):
    """pc in [81,84], pc.r in [95,99], index.r current => i_nT != i_mig.r"""
    if (
        81 <= q.pc <= 84
        and 95 <= qr.pc <= 99
        and qr.index == c.s.currInd
        and q.i_nT == qr.i_mig
    ):
        return _w(p=p, r=r, i=q.i_nT)


@invariant("nT18", PAIR, _NT_ALL)
def nT18(c, p, q, r, qr):
    """pc in [81,84] and pc.r >= 99 => i_nT != i_mig.r"""
    if 81 <= q.pc <= 84 and qr.pc >= 99 and q.i_nT == qr.i_mig:
        return _w(p=p, r=r, i=q.i_nT)


# ---------------------------------------------------------------------------
# migrate


@invariant("mi1", PROCESS, [98, 104, 105])
def mi1(c, p, q):
    """pc in {98,104,105} => index != currInd"""
    if q.pc in (98, 104, 105) and q.index == c.s.currInd:
        return _w(p=p, pc=q.pc)


_MIG = at_least(95)


@invariant("mi2", PROCESS, _MIG)
def mi2(c, p, q):
    """pc >= 95 => i_mig != index"""
    if q.pc >= 95 and q.i_mig == q.index:
        return _w(p=p, i=q.i_mig)


@invariant("mi3", PROCESS, [94])
def mi3(c, p, q):
    """pc=94 => next(index) > 0"""
    if q.pc == 94 and not c.s.next[q.index] > 0:
        return _w(p=p, index=q.index)


@invariant("mi4", PROCESS, _MIG)
def mi4(c, p, q):
    """pc >= 95 => i_mig != 0"""
    if q.pc >= 95 and q.i_mig == 0:
        return _w(p=p)


@invariant("mi5", PROCESS, _MIG)
def mi5(c, p, q):
    """pc >= 95 => i_mig = next(index)"""
    if q.pc >= 95 and q.i_mig != c.s.next[q.index]:
        return _w(p=p, i=q.i_mig, next=c.s.next[q.index])


def _migrating_current(c: Ctx, q: Proc) -> bool:
    """(pc in [95,103] or pc >= 110) and index = currInd"""
    pc = q.pc
    return (95 <= pc <= 103 or pc >= 110) and q.index == c.s.currInd


@invariant("mi6", PAIR, _MIG)
def mi6(c, p, q, r, qr):
    """migrator past its checks and pc.r=70 => i_rA.r != i_mig"""
    pc = q.pc
    if qr.pc == 70 and (
        95 <= pc < 102 and q.index == c.s.currInd or 102 <= pc <= 103 or pc >= 110
    ):
        if qr.i_rA == q.i_mig:
            return _w(p=p, r=r, i=q.i_mig)


@invariant("mi7", PROCESS, _MIG)
def mi7(c, p, q):
    """(pc in [95,97] and index current) or pc >= 99 => i_mig != next(i_mig)"""
    pc = q.pc
    if (95 <= pc <= 97 and q.index == c.s.currInd or pc >= 99) and q.i_mig == c.s.next[q.i_mig]:
        return _w(p=p, i=q.i_mig)


@invariant("mi8", PROCESS, _MIG)
def mi8(c, p, q):
    """migrating from the current table => next(i_mig) = 0"""
    pc = q.pc
    if (95 <= pc <= 97 or 99 <= pc <= 103 or pc >= 110) and q.index == c.s.currInd:
        if c.s.next[q.i_mig] != 0:
            return _w(p=p, i=q.i_mig)


@invariant("mi9", PROCESS, _MIG)
def mi9(c, p, q):
    """migrating from the current table => H(i_mig) != H(currInd)"""
    if _migrating_current(c, q) and c.s.H[q.i_mig] == c.s.H[c.s.currInd]:
        return _w(p=p, i=q.i_mig)


@invariant("mi10", PAIR, _MIG)
def mi10(c, p, q, r, qr):
    """migrating from the current table and uses_index(r) => H(i_mig) != H(index.r)"""
    if _migrating_current(c, q) and uses_index(qr) and c.s.H[q.i_mig] == c.s.H[qr.index]:
        return _w(p=p, r=r, i=q.i_mig)


@invariant("mi11", PROCESS, [101, 102])
def mi11(c, p, q):
    """(pc=101 and index current) or pc=102 => h_mig = H(i_mig)"""
    if (q.pc == 101 and q.index == c.s.currInd or q.pc == 102) and q.h_mig != c.s.H[q.i_mig]:
        return _w(p=p, h=q.h_mig)


@invariant("mi12", PROCESS, _MIG)
def mi12(c, p, q):
    """(pc >= 95 and index current) or pc in {102,103} or pc >= 110 => Heap(H(i_mig)) present"""
    pc = q.pc
    if pc >= 95 and q.index == c.s.currInd or pc in (102, 103) or pc >= 110:
        if c.s.H[q.i_mig] not in c.tables:
            return _w(p=p, i=q.i_mig)


def _at_swing(c: Ctx, q: Proc) -> bool:
    return q.pc == 103 and q.index == c.s.currInd


@invariant("mi13", PROCESS, [103])
def mi13(c, p, q):
    """pc=103, index current => the whole current table is done"""
    if _at_swing(c, q):
        T = c.table(c.s.H[q.index]).table
        for k in range(c.cs):
            if T[k] != DONE:
                return _w(p=p, k=k, entry=T[k])


def _mig_probes(c: Ctx, q: Proc) -> tuple[Hashtable, dict[int, list[int]]]:
    h = c.table(c.s.H[q.i_mig])
    return h, {a: c.probe(h.table, h.size, a) for a in c.addresses}


@invariant("mi14", PROCESS, [103])
def mi14(c, p, q):
    """at the swing: LeastFind(H(i_mig),a,n) => X(a) = that entry's value"""
    if _at_swing(c, q):
        _, probes = _mig_probes(c, q)
        for a, hs in probes.items():
            n = _least_find(hs, a)
            if n is not None and c.X(a) != val(hs[n]):
                return _w(p=p, a=a, n=n)


@invariant("mi15", PROCESS, [103])
def mi15(c, p, q):
    """at the swing: X(a) = val(entry at probe n) != null => LeastFind(H(i_mig),a,n)"""
    if _at_swing(c, q):
        _, probes = _mig_probes(c, q)
        for a, hs in probes.items():
            x = c.X(a)
            if x == NULL:
                continue
            first = _least_find(hs, a)
            for n, e in enumerate(hs):
                if val(e) == x and n != first:
                    return _w(p=p, a=a, n=n, least=first)


@invariant("mi16", PROCESS, [103])
def mi16(c, p, q):
    """at the swing: H(i_mig) holds no old-tagged entry"""
    if _at_swing(c, q):
        for k, e in enumerate(c.table(c.s.H[q.i_mig]).table):
            if oldp(e):
                return _w(p=p, k=k, entry=e)


@invariant("mi17", PROCESS, [103])
def mi17(c, p, q):
    """at the swing: X(a) found at probe k => no other probe carries a"""
    if _at_swing(c, q):
        _, probes = _mig_probes(c, q)
        for a, hs in probes.items():
            x = c.X(a)
            if x != NULL:
                w = _unique_match(hs, a, x)
                if w:
                    w["p"] = p
                    return w


@invariant("mi18", PROCESS, [103])
def mi18(c, p, q):
    """at the swing: X(a) = null => no non-null entry carries a"""
    if _at_swing(c, q):
        _, probes = _mig_probes(c, q)
        for a, hs in probes.items():
            if c.X(a) == NULL:
                for k, e in enumerate(hs):
                    if val(e) != NULL and adr(e) == a:
                        return _w(p=p, a=a, k=k)


@invariant("mi19", PROCESS, [103])
def mi19(c, p, q):
    """at the swing: X(a) != null => X(a) occurs along a's probe sequence in H(i_mig)"""
    if _at_swing(c, q):
        _, probes = _mig_probes(c, q)
        for a, hs in probes.items():
            x = c.X(a)
            if x != NULL and not any(val(e) == x for e in hs):
                return _w(p=p, a=a)


@invariant("mi20", PROCESS, [117, 125, 126])
def mi20(c, p, q):
    """a value being moved is already reachable in the successor table"""
    pc = q.pc
    s = c.s
    if pc not in (117, 125, 126):
        return None
    if pc == 117:
        cond = val(c.table(s.H[q.index]).table[q.i_mC]) != NULL
    elif pc == 126:
        cond = q.index == s.currInd
    else:
        cond = q.index == s.currInd and (
            q.b_mE or val(q.w_mE) != NULL and q.a_mE == adr(q.w_mE)
        )
    if not cond:
        return None
    a = adr(s.Y[q.i_mC]) if q.i_mC < len(s.Y) else 0
    x = c.X(a)
    if x == NULL:
        return None
    if not any(val(e) == x for e in _hn_probe(c, a)):
        return _w(p=p, pc=pc, a=a, X=x)


# ---------------------------------------------------------------------------
# moveContents

_MC = at_least(110)


@invariant("mC1", PROCESS, labels(103) | _MC)
def mC1(c, p, q):
    """pc=103 or pc >= 110 => to = H(i_mig)"""
    if (q.pc == 103 or q.pc >= 110) and q.to != c.s.H[q.i_mig]:
        return _w(p=p, to=q.to, i=q.i_mig)


@invariant("mC2", PROCESS, _MC)
def mC2(c, p, q):
    """pc >= 110 => from = H(index)"""
    if q.pc >= 110 and q.from_mC != c.s.H[q.index]:
        return _w(p=p, frm=q.from_mC)


@invariant("mC3", PROCESS, at_least(103))
def mC3(c, p, q):
    """pc > 102 => toBeMoved within H(index).size"""
    if q.pc > 102 and q.toBeMoved:
        size = c.table(c.s.H[q.index]).size
        if q.toBeMoved >> size:
            return _w(p=p, size=size, pending=q.moving())


@invariant("mC4", PROCESS, [111])
def mC4(c, p, q):
    """pc=111 => toBeMoved has an element below from.size"""
    if q.pc == 111:
        size = c.table(q.from_mC).size
        if not q.toBeMoved & ((1 << size) - 1):
            return _w(p=p)


@invariant("mC5", PROCESS, at_least(114) - {118})
def mC5(c, p, q):
    """pc >= 114, pc != 118 => v_mC != done"""
    if q.pc >= 114 and q.pc != 118 and q.v_mC == DONE:
        return _w(p=p)


@invariant("mC6", PROCESS, at_least(114))
def mC6(c, p, q):
    """pc >= 114 => i_mC < H(index).size"""
    if q.pc >= 114 and not q.i_mC < c.table(c.s.H[q.index]).size:
        return _w(p=p, i=q.i_mC)


@invariant("mC7", PROCESS, [118])
def mC7(c, p, q):
    """pc=118 => H(index).table[i_mC] = done"""
    if q.pc == 118 and c.table(c.s.H[q.index]).table[q.i_mC] != DONE:
        return _w(p=p, i=q.i_mC)


@invariant("mC8", PROCESS, _MC)
def mC8(c, p, q):
    """pc >= 110 => slots no longer in toBeMoved are done"""
    if q.pc >= 110:
        T = c.table(c.s.H[q.index]).table
        bits = q.toBeMoved
        for k, e in enumerate(T):
            if not bits >> k & 1 and e != DONE:
                return _w(p=p, k=k, entry=e)


@invariant("mC9", PROCESS, _MC)
def mC9(c, p, q):
    """pc >= 110, index current, toBeMoved empty => every slot done"""
    if q.pc >= 110 and q.index == c.s.currInd and not q.toBeMoved:
        for k, e in enumerate(c.table(c.s.H[q.index]).table):
            if e != DONE:
                return _w(p=p, k=k, entry=e)


@invariant("mC10", PROCESS, at_least(116))
def mC10(c, p, q):
    """a moved value's first probe slot in H(i_mig) is occupied"""
    if q.pc >= 116 and val(q.v_mC) != NULL:
        if c.table(c.s.H[q.index]).table[q.i_mC] == DONE:
            h = c.table(c.s.H[q.i_mig])
            if h.table[c.s.key(adr(q.v_mC), h.size, 0)] == NULL:
                return _w(p=p, a=adr(q.v_mC))


@invariant("mC11", PROCESS, at_least(116))
def mC11(c, p, q):
    """pc >= 116 and slot not yet done => slot is old-tagged v_mC"""
    if q.pc >= 116:
        e = c.table(c.s.H[q.index]).table[q.i_mC]
        if e != DONE and not (val(q.v_mC) == val(e) and oldp(e)):
            return _w(p=p, i=q.i_mC, entry=e, v=q.v_mC)


@invariant("mC12", PROCESS, at_least(116))
def mC12(c, p, q):
    """pc >= 116, index current, v_mC non-null => val(v_mC) = val(Y[i_mC])"""
    if q.pc >= 116 and q.index == c.s.currInd and val(q.v_mC) != NULL:
        if val(q.v_mC) != val(c.Y[q.i_mC]):
            return _w(p=p, i=q.i_mC)


# ---------------------------------------------------------------------------
# moveElement

_ME = at_least(120)


@invariant("mE1", PROCESS, _ME)
def mE1(c, p, q):
    """pc >= 120 => val(v_mC) = v_mE"""
    if q.pc >= 120 and val(q.v_mC) != q.v_mE:
        return _w(p=p)


@invariant("mE2", PROCESS, _ME)
def mE2(c, p, q):
    """pc >= 120 => v_mE != null"""
    if q.pc >= 120 and q.v_mE == NULL:
        return _w(p=p)


@invariant("mE3", PROCESS, _ME)
def mE3(c, p, q):
    """pc >= 120 => to = H(i_mig)"""
    if q.pc >= 120 and q.to != c.s.H[q.i_mig]:
        return _w(p=p)


@invariant("mE4", PROCESS, at_least(121))
def mE4(c, p, q):
    """pc >= 121 => a_mE = ADR(v_mC)"""
    if q.pc >= 121 and q.a_mE != adr(q.v_mC):
        return _w(p=p)


@invariant("mE5", PROCESS, at_least(121))
def mE5(c, p, q):
    """pc >= 121 => m_mE = to.size"""
    if q.pc >= 121 and q.m_mE != c.table(q.to).size:
        return _w(p=p)


@invariant("mE6", PROCESS, [121, 123])
def mE6(c, p, q):
    """pc in {121,123} => not b_mE"""
    if q.pc in (121, 123) and q.b_mE:
        return _w(p=p)


@invariant("mE7", PROCESS, [123])
def mE7(c, p, q):
    """pc=123 => k_mE = key(a_mE, to.size, n_mE)"""
    if q.pc == 123 and q.k_mE != c.s.key(q.a_mE, c.table(q.to).size, q.n_mE):
        return _w(p=p)


@invariant("mE8", PROCESS, at_least(123))
def mE8(c, p, q):
    """pc >= 123 => k_mE < H(i_mig).size"""
    if q.pc >= 123 and not q.k_mE < c.table(c.s.H[q.i_mig]).size:
        return _w(p=p, k=q.k_mE)


@invariant("mE9", PROCESS, [120])
def mE9(c, p, q):
    """pc=120 and first probe of v_mE in to is null => index current"""
    if q.pc == 120:
        t = c.table(q.to)
        if t.table[c.s.key(adr(q.v_mE), t.size, 0)] == NULL and q.index != c.s.currInd:
            return _w(p=p)


def _probe_free(c: Ctx, q: Proc) -> bool:
    t = c.table(q.to)
    return t.table[c.s.key(q.a_mE, t.size, q.n_mE)] == NULL


@invariant("mE10", PROCESS, [121, 123])
def mE10(c, p, q):
    """pc in {121,123} and probe slot null => index current"""
    if q.pc in (121, 123) and _probe_free(c, q) and q.index != c.s.currInd:
        return _w(p=p)


@invariant("mE11", PAIR, [121, 123])
def mE11(c, p, q, r, qr):
    """pc in {121,123}, probe slot null, pc.r=103 => index.r != currInd"""
    if q.pc in (121, 123) and qr.pc == 103 and _probe_free(c, q):
        if qr.index == c.s.currInd:
            return _w(p=p, r=r)


@invariant("mE12", PROCESS, [121, 123])
def mE12(c, p, q):
    """pc in {121,123}, moving into the successor => n_mE < its size"""
    if q.pc in (121, 123) and c.nxt != 0 and q.to == c.s.H[c.nxt]:
        if not q.n_mE < c.hn.size:
            return _w(p=p, n=q.n_mE)


@invariant("mE13", PROCESS, [123, 125])
def mE13(c, p, q):
    """pc in {123,125}, w_mE non-null => slot k_mE keeps w's address or is del/done"""
    if q.pc in (123, 125) and q.w_mE != NULL:
        e = c.table(q.to).table[q.k_mE]
        if not (adr(q.w_mE) == adr(e) or e == DEL or e == DONE):
            return _w(p=p, w=q.w_mE, entry=e)


@invariant("mE14", PROCESS, at_least(123))
def mE14(c, p, q):
    """pc >= 123, w_mE non-null => H(i_mig).table[k_mE] non-null"""
    if q.pc >= 123 and q.w_mE != NULL:
        if c.table(c.s.H[q.i_mig]).table[q.k_mE] == NULL:
            return _w(p=p, k=q.k_mE)


@invariant("mE15", PROCESS, [117, 121, 123, 125])
def mE15(c, p, q):
    """once a value is being placed, its first probe slot in H(i_mig) is occupied"""
    pc = q.pc
    if (
        pc == 117 and val(q.v_mC) != NULL
        or pc in (121, 123) and q.n_mE > 0
        or pc == 125
    ):
        h = c.table(c.s.H[q.i_mig])
        if h.table[c.s.key(adr(q.v_mC), h.size, 0)] == NULL:
            return _w(p=p, pc=pc)


@invariant("mE16", PROCESS, [121, 123, 125])
def mE16(c, p, q):
    """while placing, every probe before n_mE misses a_mE"""
    pc = q.pc
    if pc in (121, 123) or pc == 125 and not q.b_mE and (
        val(q.w_mE) == NULL or q.a_mE != adr(q.w_mE)
    ):
        t = c.table(q.to)
        for m in range(q.n_mE):
            if find(t.table[c.s.key(q.a_mE, t.size, m)], q.a_mE):
                return _w(p=p, m=m)


# ---------------------------------------------------------------------------
# prot


def _registry(c: Ctx) -> range:
    return range(1, c.two_p + 1)


@invariant("pr1")
def pr1(c):
    """prot[i] = #prSet1(i) + #prSet2(i) + #(currInd=i) + #(next(currInd)=i)"""
    s = c.s
    for i in _registry(c):
        want = (
            c.prSet(1, i) + c.prSet(2, i) + _count(s.currInd == i) + _count(c.nxt == i)
        )
        if s.prot[i] != want:
            return _w(i=i, prot=s.prot[i], want=want)


@invariant("pr2")
def pr2(c):
    """prot[currInd] > 0"""
    if not c.s.prot[c.s.currInd] > 0:
        return _w(currInd=c.s.currInd)


@invariant("pr3", PROCESS, USES_INDEX)
def pr3(c, p, q):
    """uses_index => prot[index] > 0"""
    if uses_index(q) and not c.s.prot[q.index] > 0:
        return _w(p=p, index=q.index)


@invariant("pr4")
def pr4(c):
    """next(currInd) != 0 => prot[next(currInd)] > 0"""
    if c.nxt != 0 and not c.s.prot[c.nxt] > 0:
        return _w(next=c.nxt)


@invariant("pr5")
def pr5(c):
    """prot[i] = 0 => Heap(H(i)) absent"""
    s = c.s
    for i in _registry(c):
        if s.prot[i] == 0 and s.H[i] in c.tables:
            return _w(i=i)


@invariant("pr6")
def pr6(c):
    """prot[i] <= #prSet3(i) and busy[i] = 0 => Heap(H(i)) absent"""
    s = c.s
    for i in _registry(c):
        if s.busy[i] == 0 and s.H[i] in c.tables and s.prot[i] <= c.prSet(3, i):
            return _w(i=i)


@invariant("pr7", PROCESS, _RA_LABELS)
def pr7(c, p, q):
    """pc in [67,72] => prot[i_rA] > 0"""
    if 67 <= q.pc <= 72 and not c.s.prot[q.i_rA] > 0:
        return _w(p=p, i=q.i_rA)


@invariant("pr8", PROCESS, _NT_ALL)
def pr8(c, p, q):
    """pc in [81,84] => prot[i_nT] > 0"""
    if 81 <= q.pc <= 84 and not c.s.prot[q.i_nT] > 0:
        return _w(p=p, i=q.i_nT)


@invariant("pr9", PROCESS, at_least(97))
def pr9(c, p, q):
    """pc >= 97 => prot[i_mig] > 0"""
    if q.pc >= 97 and not c.s.prot[q.i_mig] > 0:
        return _w(p=p, i=q.i_mig)


@invariant("pr10", PROCESS, [81, 82])
def pr10(c, p, q):
    """pc in [81,82] => prot[i_nT] = #prSet4(i_nT) + 1"""
    if 81 <= q.pc <= 82:
        want = c.prSet(4, q.i_nT) + 1
        if c.s.prot[q.i_nT] != want:
            return _w(p=p, i=q.i_nT, prot=c.s.prot[q.i_nT], want=want)


# ---------------------------------------------------------------------------
# busy


@invariant("bu1")
def bu1(c):
    """busy[i] = #buSet1(i) + #buSet2(i) + #(currInd=i) + #(next(currInd)=i)"""
    s = c.s
    for i in _registry(c):
        want = (
            c.buSet(1, i) + c.buSet(2, i) + _count(s.currInd == i) + _count(c.nxt == i)
        )
        if s.busy[i] != want:
            return _w(i=i, busy=s.busy[i], want=want)


@invariant("bu2")
def bu2(c):
    """busy[currInd] > 0"""
    if not c.s.busy[c.s.currInd] > 0:
        return _w(currInd=c.s.currInd)


@invariant("bu3", PROCESS, HOLDS_INDEX)
def bu3(c, p, q):
    """holds_index => busy[index] > 0"""
    if holds_index(q) and not c.s.busy[q.index] > 0:
        return _w(p=p, index=q.index)


@invariant("bu4")
def bu4(c):
    """next(currInd) != 0 => busy[next(currInd)] > 0"""
    if c.nxt != 0 and not c.s.busy[c.nxt] > 0:
        return _w(next=c.nxt)


@invariant("bu5", PROCESS, [81])
def bu5(c, p, q):
    """pc=81 => busy[i_nT] = 0"""
    if q.pc == 81 and c.s.busy[q.i_nT] != 0:
        return _w(p=p, i=q.i_nT)


@invariant("bu6", PROCESS, at_least(100))
def bu6(c, p, q):
    """pc >= 100 => busy[i_mig] > 0"""
    if q.pc >= 100 and not c.s.busy[q.i_mig] > 0:
        return _w(p=p, i=q.i_mig)


# ---------------------------------------------------------------------------
# other


@invariant("Ot1")
def Ot1(c):
    """X(0) = null"""
    if c.s.X.get(0, NULL) != NULL:
        return _w(X0=c.s.X[0])


@invariant("Ot2")
def Ot2(c):
    """X(a) != null => ADR(X(a)) = a"""
    for a, v in c.s.X.items():
        if v != NULL and adr(v) != a:
            return _w(a=a, v=v)


@invariant("Ot3", PROCESS)
def Ot3(c, p, q):
    """return slots range over their admissible label sets"""
    if (
        q.return_gA not in RETURN_GA
        or q.return_rA not in RETURN_RA
        or q.return_ref not in RETURN_REF
        or q.return_nT not in RETURN_NT
    ):
        return _w(p=p, gA=q.return_gA, rA=q.return_rA, ref=q.return_ref, nT=q.return_nT)


@invariant("Ot4", PROCESS)
def Ot4(c, p, q):
    """pc is a statement label"""
    if q.pc not in LABEL_SET:
        return _w(p=p, pc=q.pc)


# ---------------------------------------------------------------------------
# Checking

TOMBSTONES = frozenset(k for k, v in REGISTRY.items() if v.tombstone)
ALL = tuple(REGISTRY)


def _dispatch(selected: Iterable[Invariant]):
    glob, per_label, pair_label = [], {}, {}
    for inv in selected:
        if inv.tombstone:
            continue
        if inv.scope == GLOBAL:
            glob.append(inv)
        else:
            table = per_label if inv.scope == PROCESS else pair_label
            for pc in inv.guard:
                table.setdefault(pc, []).append(inv)
    return glob, per_label, pair_label


_FULL = _dispatch(REGISTRY.values())
_UNGUARDED_LABELS = {pc: None for pc in LABEL_SET}


def resolve(subset: Iterable[str] | None) -> list[Invariant]:
    """Invariants named by ``subset`` (ids or family prefixes); all when None."""
    if subset is None:
        return list(REGISTRY.values())
    out = []
    for name in subset:
        if name in REGISTRY:
            out.append(REGISTRY[name])
            continue
        fam = [inv for inv in REGISTRY.values() if inv.family == name]
        if not fam:
            raise KeyError(f"unknown invariant or family {name!r}")
        out.extend(fam)
    return out


def _run(inv: Invariant, args) -> Violation | None:
    try:
        w = inv.fn(*args)
    except Undefined as exc:
        w = {"undefined": str(exc)}
    except (IndexError, KeyError) as exc:
        w = {"undefined": f"{type(exc).__name__}: {exc}"}
    if w is None:
        return None
    return Violation(inv.ident, w)


def check(
    s: ModelState,
    subset: Iterable[str] | None = None,
    guarded: bool = True,
    first_only: bool = False,
) -> list[Violation]:
    """Evaluate the selected invariants on ``s`` and list the violations.

    With ``guarded=False`` every process and pair predicate runs for every
    process regardless of its label, which is slower but independent of the
    guard annotations.
    """
    if subset is None:
        glob, per_label, pair_label = _FULL
    else:
        glob, per_label, pair_label = _dispatch(resolve(subset))
    if not guarded:
        proc_all = [i for lst in per_label.values() for i in lst]
        pair_all = [i for lst in pair_label.values() for i in lst]
        proc_all = list({i.ident: i for i in proc_all}.values())
        pair_all = list({i.ident: i for i in pair_all}.values())
    c = Ctx(s)
    out: list[Violation] = []
    for inv in glob:
        v = _run(inv, (c,))
        if v is not None:
            out.append(v)
            if first_only:
                return out
    procs = c.procs
    for p, q in procs:
        if guarded:
            invs = per_label.get(q.pc, ())
            pairs = pair_label.get(q.pc, ())
        else:
            invs, pairs = proc_all, pair_all
        for inv in invs:
            v = _run(inv, (c, p, q))
            if v is not None:
                out.append(v)
                if first_only:
                    return out
        for inv in pairs:
            for r, qr in procs:
                v = _run(inv, (c, p, q, r, qr))
                if v is not None:
                    out.append(v)
                    if first_only:
                        return out
    return out


def count_sets(s: ModelState) -> dict:
    """Cardinalities of every auxiliary set, for diagnostics."""
    c = Ctx(s)
    out = {
        "nbSet1": len(c.nbSet1),
        "nbSet2": len(c.nbSet2),
        "deSet2": c.deSet2,
        "ocSet1": c.ocSet1,
        "ocSet2": c.ocSet2,
        "ocSet3": c.ocSet3,
        "ocSet7": c.ocSet7,
    }
    if s.H[s.currInd] in s.heap.tables:
        out.update(deSet1=c.deSet1, ocSet4=c.ocSet4)
    if c.nxt == 0 or s.H[c.nxt] in s.heap.tables:
        out.update(deSet3=c.deSet3, ocSet5=c.ocSet5, ocSet6=c.ocSet6)
    for i in _registry(c):
        out[f"prSet1({i})"] = c.prSet(1, i)
        out[f"prSet2({i})"] = c.prSet(2, i)
        out[f"prSet3({i})"] = c.prSet(3, i)
        out[f"prSet4({i})"] = c.prSet(4, i)
        out[f"buSet1({i})"] = c.buSet(1, i)
        out[f"buSet2({i})"] = c.buSet(2, i)
    return out
