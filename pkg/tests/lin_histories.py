"""Random small histories shared by the checker tests and the acceptance suite."""

import random

from lfhash.encoding import NULL, make_value
from lfhash.linearizability import Operation


def random_operations(rng: random.Random, n: int = 4, addresses: int = 2) -> list[Operation]:
    """``n`` operations on distinct processes with random spans and results.

    Roughly one in five is left pending. Results are drawn from the values
    the history can produce, so both verdicts occur often.
    """
    times = sorted(rng.sample(range(100), 2 * n))
    rng.shuffle(times)
    vals = [make_value(a, p) for a in range(1, addresses + 1) for p in (1, 2)]
    ops = []
    for i in range(n):
        t0, t1 = sorted(times[2 * i : 2 * i + 2])
        op = rng.choice(["find", "delete", "insert", "assign"])
        if op in ("find", "delete"):
            arg = rng.randint(1, addresses)
        else:
            arg = rng.choice(vals)
        if op == "find":
            res = rng.choice([NULL] + [v for v in vals if v >> 32 == arg])
        elif op == "assign":
            res = None
        else:
            res = rng.random() < 0.5
        pending = rng.random() < 0.2
        ops.append(Operation(i + 1, op, arg, None if pending else res, t0, None if pending else t1))
    return ops


def random_initial(rng: random.Random, addresses: int = 2) -> dict:
    return {a: make_value(a, 1) for a in range(1, addresses + 1) if rng.random() < 0.3}
