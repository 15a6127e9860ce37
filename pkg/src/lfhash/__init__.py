"""Lock-free resizable open-addressing hash map, with a transition model of
the same protocol, an invariant catalogue, schedule explorers and a
linearizability checker."""

from .encoding import DEL, DONE, NULL, adr, make_value, payload
from .errors import ConstraintError, NotEnabled, ProtocolViolation
from .lockfree_map import LockFreeHashMap, ProcessHandle
from .model import ModelConfig, ModelState, init, step
from .spec_oracle import ReferenceMap

__version__ = "0.1.0"

__all__ = [
    "DEL",
    "DONE",
    "NULL",
    "ConstraintError",
    "LockFreeHashMap",
    "ModelConfig",
    "ModelState",
    "NotEnabled",
    "ProcessHandle",
    "ProtocolViolation",
    "ReferenceMap",
    "adr",
    "init",
    "make_value",
    "payload",
    "step",
]
