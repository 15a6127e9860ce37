"""Sequential specification of the map operations.

The abstract map ``X`` is total: every address maps to a value, null by
default, and only non-null entries are stored in the dict. The ``spec_*``
functions are pure and return the successor map with the result.
:func:`apply_op` is the in-place form the model runs as its ghost action,
and :class:`ReferenceMap` wraps it for black-box replay.
"""

from __future__ import annotations

from .encoding import NULL, adr


def spec_find(X: dict[int, int], a: int) -> int:
    return X.get(a, NULL)


def spec_delete(X: dict[int, int], a: int) -> tuple[dict[int, int], bool]:
    if X.get(a, NULL) == NULL:
        return X, False
    rest = dict(X)
    del rest[a]
    return rest, True


def spec_insert(X: dict[int, int], v: int) -> tuple[dict[int, int], bool]:
    a = adr(v)
    if X.get(a, NULL) != NULL:
        return X, False
    return {**X, a: v}, True


def spec_assign(X: dict[int, int], v: int) -> dict[int, int]:
    return {**X, adr(v): v}


def apply_op(X: dict[int, int], op: str, arg: int):
    """Run one operation on ``X`` in place and return its result.

    ``arg`` is an address for find/delete and a value for insert/assign.
    Assign returns None.
    """
    if op == "find":
        return X.get(arg, NULL)
    if op == "delete":
        return X.pop(arg, NULL) != NULL
    if op == "insert":
        a = adr(arg)
        if X.get(a, NULL) == NULL:
            X[a] = arg
            return True
        return False
    if op == "assign":
        X[adr(arg)] = arg
        return None
    raise ValueError(f"unknown operation {op!r}")


class ReferenceMap:
    """Plain single-threaded map with the same interface as a process handle."""

    def __init__(self):
        self.X: dict[int, int] = {}

    def find(self, a: int) -> int:
        return apply_op(self.X, "find", a)

    def delete(self, a: int) -> bool:
        return apply_op(self.X, "delete", a)

    def insert(self, v: int) -> bool:
        return apply_op(self.X, "insert", v)

    def assign(self, v: int) -> None:
        apply_op(self.X, "assign", v)

    def contents(self) -> dict[int, int]:
        return dict(self.X)
