"""Word-level encoding of table entries and the probe-key function.

An entry is a single unsigned 64-bit word. The top bit is the *old* tag,
set while a table is being migrated. The remaining 63 bits are the body:

    body == 0           null (no value)
    body == 1           the deletion tombstone ``del``
    body >= 1 << 32     a user value: (address << 32) | payload

Because a user value always has a nonzero address field, the two reserved
bodies can never be produced by :func:`make_value`. Marking ``del`` as old
yields ``done`` (old-tagged null), so an old-tagged tombstone never exists.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

OLD_BIT = 1 << 63
BODY_MASK = OLD_BIT - 1
ADDRESS_SHIFT = 32
PAYLOAD_MASK = (1 << ADDRESS_SHIFT) - 1
MAX_ADDRESS = (1 << 31) - 1
MAX_PAYLOAD = PAYLOAD_MASK

NULL = 0
DEL = 1
DONE = OLD_BIT

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def make_value(address: int, payload: int = 0) -> int:
    """Build a user value carrying ``address`` in its address field.

    Raises:
        ValueError: if the address is 0 or either field is out of range.
    """
    if not 0 < address <= MAX_ADDRESS:
        raise ValueError(f"address must be in 1..{MAX_ADDRESS}, got {address}")
    if not 0 <= payload <= MAX_PAYLOAD:
        raise ValueError(f"payload must be in 0..{MAX_PAYLOAD}, got {payload}")
    return (address << ADDRESS_SHIFT) | payload


def is_user_value(v: int) -> bool:
    """True for values produced by :func:`make_value`."""
    return ADDRESS_SHIFT <= v.bit_length() <= 63 and v >> ADDRESS_SHIFT != 0


def is_entry(e: int) -> bool:
    """True for any well-formed entry word (null, del, value, or old-tagged)."""
    if not 0 <= e <= _MASK64:
        return False
    body = e & BODY_MASK
    if body == NULL:
        return True
    if body == DEL:
        return not e & OLD_BIT
    return body >> ADDRESS_SHIFT != 0


def val(e: int) -> int:
    """Strip the old tag; ``del`` maps to null."""
    body = e & BODY_MASK
    return NULL if body == DEL else body


def oldp(e: int) -> bool:
    return e >= OLD_BIT


def mark_old(e: int) -> int:
    """Old-tagged form of ``val(e)``; ``mark_old(del)`` is ``done``."""
    return OLD_BIT | val(e)


def adr(e: int) -> int:
    """Address of the value underneath ``e``; 0 iff that value is null."""
    return (e & BODY_MASK) >> ADDRESS_SHIFT


def payload(e: int) -> int:
    return val(e) & PAYLOAD_MASK


class Entry(NamedTuple):
    old: bool
    kind: str  # "null", "del" or "value"
    address: int = 0
    payload: int = 0


def decode(e: int) -> Entry:
    if not is_entry(e):
        raise ValueError(f"not a well-formed entry: {e:#x}")
    body = e & BODY_MASK
    old = bool(e & OLD_BIT)
    if body == NULL:
        return Entry(old, "null")
    if body == DEL:
        return Entry(False, "del")
    return Entry(old, "value", body >> ADDRESS_SHIFT, body & PAYLOAD_MASK)


def encode(entry: Entry) -> int:
    if entry.kind == "null":
        return DONE if entry.old else NULL
    if entry.kind == "del":
        if entry.old:
            raise ValueError("del has no old-tagged form")
        return DEL
    if entry.kind == "value":
        v = make_value(entry.address, entry.payload)
        return OLD_BIT | v if entry.old else v
    raise ValueError(f"unknown entry kind {entry.kind!r}")


def describe(e: int) -> str:
    """Short human-readable rendering used in traces."""
    if e == NULL:
        return "null"
    if e == DEL:
        return "del"
    if e == DONE:
        return "done"
    body = e & BODY_MASK
    text = f"{body >> ADDRESS_SHIFT}:{body & PAYLOAD_MASK}"
    return f"old({text})" if e & OLD_BIT else text


Mixer = Callable[[int], int]


def default_mix(a: int) -> int:
    """Multiplicative (Fibonacci) hash; returns the high 32 bits."""
    return ((a * _GOLDEN) & _MASK64) >> 32


def identity_mix(a: int) -> int:
    return a


def key(a: int, l: int, n: int, mix: Mixer = default_mix) -> int:
    """Index of the n-th probe for address ``a`` in a table of length ``l``.

    Linear probing from ``mix(a)``, so for fixed ``(a, l)`` the first ``l``
    probes visit every index exactly once.
    """
    if l < 1:
        raise ValueError("table length must be at least 1")
    return (mix(a) + n) % l
