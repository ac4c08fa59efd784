"""Bitset evaluation kernel with a compiled fast path.

The compiled module is used when it was built and imports cleanly; set
``ITLBENCH_PURE_KERNEL=1`` to force the pure-Python implementation. Models
with more than 64 worlds always go through the pure-Python code.
"""

import os

from . import _pykernel as pure
from ._pykernel import ATOM, BOT, AND, OR, IMP, NEXT, UNTIL, RELEASE

compiled = None
if not os.environ.get("ITLBENCH_PURE_KERNEL"):
    try:
        from . import _ckernel as compiled
    except ImportError:
        compiled = None

BACKEND = "compiled" if compiled is not None else "pure"

__all__ = ["ATOM", "BOT", "AND", "OR", "IMP", "NEXT", "UNTIL", "RELEASE",
           "BACKEND", "evaluate", "find_counterexample", "filter_models"]


def _impl(n: int):
    if compiled is not None and n <= 64:
        return compiled
    return pure


def evaluate(ops, xs, ys, n, up, succ, atom_masks):
    return _impl(n).evaluate(ops, xs, ys, n, up, succ, atom_masks)


def find_counterexample(ops, xs, ys, n, up, succ, valuations, premises, goals,
                        prem_end, world=-1):
    if not valuations:
        return None
    return _impl(n).find_counterexample(ops, xs, ys, n, up, succ, valuations,
                                        premises, goals, prem_end, world)


def filter_models(ops, xs, ys, n, up, succ, valuations, premises, world):
    if not valuations:
        return []
    return _impl(n).filter_models(ops, xs, ys, n, up, succ, valuations,
                                  premises, world)
