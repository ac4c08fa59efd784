"""Verification of intuitionistic and intuitionistic temporal bisimulations."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formula import Formula, atoms_of
from .kripke import FiniteModel, bits, load_model, orbit, require_model
from .semantics import extensions


@dataclass(frozen=True)
class BisimRelation:
    left: FiniteModel
    right: FiniteModel
    pairs: frozenset[tuple[int, int]]
    checks: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", frozenset((int(a), int(b)) for a, b in self.pairs))
        for a, b in self.pairs:
            if not (0 <= a < self.left.n and 0 <= b < self.right.n):
                raise IndexError(f"pair ({a}, {b}) out of range")

    @property
    def passed(self) -> tuple[str, ...]:
        """Conditions verified so far; empty if nothing verified or a check failed."""
        if any(not c for c in self.checks.values()):
            return ()
        out: list[str] = []
        for c in self.checks.values():
            out += [x for x in c.conditions if x not in out]
        return tuple(out)

    def image(self, w1: int) -> set[int]:
        return {b for a, b in self.pairs if a == w1}

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Violation:
    condition: str
    pair: tuple[int, int]
    detail: str
    k: int | None = None


@dataclass(frozen=True)
class BisimCheck:
    ok: bool
    conditions: tuple[str, ...]
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


PROP_CONDITIONS = ("C1", "C2", "C3")
TEMPORAL_CONDITIONS = ("C1", "C2", "C3", "C5", "C6", "C7", "C8", "C9")


def _val(m: FiniteModel, w: int, names: Iterable[str]) -> frozenset[str]:
    return m.valuation[w] & frozenset(names)


def _prop_violation(r: BisimRelation, a: int, b: int) -> Violation | None:
    m1, m2 = r.left, r.right
    names = set(m1.atoms) | set(m2.atoms)
    if _val(m1, a, names) != _val(m2, b, names):
        return Violation("C1", (a, b), f"valuations {sorted(m1.valuation[a])} and "
                                       f"{sorted(m2.valuation[b])} differ")
    for v1 in bits(m1.up[a]):
        if not any((v1, v2) in r.pairs for v2 in bits(m2.up[b])):
            return Violation("C2", (a, b), f"move to {v1} on the left is unmatched")
    for v2 in bits(m2.up[b]):
        if not any((v1, v2) in r.pairs for v1 in bits(m1.up[a])):
            return Violation("C3", (a, b), f"move to {v2} on the right is unmatched")
    return None


def verify_prop_bisim(r: BisimRelation) -> BisimCheck:
    """Check the valuation, forth and back conditions on every pair."""
    if ("prop", None) in r.checks:
        return r.checks[("prop", None)]
    require_model(r.left)
    require_model(r.right)
    for a, b in sorted(r.pairs):
        v = _prop_violation(r, a, b)
        if v is not None:
            return r.checks.setdefault(("prop", None), BisimCheck(False, PROP_CONDITIONS, v))
    return r.checks.setdefault(("prop", None), BisimCheck(True, PROP_CONDITIONS))


def greatest_prop_bisim(m1: FiniteModel, m2: FiniteModel) -> BisimRelation:
    """Largest relation satisfying C1-C3, by removing violating pairs until stable."""
    require_model(m1)
    require_model(m2)
    names = set(m1.atoms) | set(m2.atoms)
    pairs = {(a, b) for a in range(m1.n) for b in range(m2.n)
             if _val(m1, a, names) == _val(m2, b, names)}
    changed = True
    while changed:
        changed = False
        r = BisimRelation(m1, m2, frozenset(pairs))
        for p in sorted(pairs):
            if _prop_violation(r, *p) is not None:
                pairs.discard(p)
                changed = True
    return BisimRelation(m1, m2, frozenset(pairs))


def _cover_masks(r: BisimRelation) -> tuple[list[int], list[int]]:
    """For each left world x: right worlds related to something above x, and
    right worlds related to something below x."""
    m1 = r.left
    img = [0] * m1.n
    for a, b in r.pairs:
        img[a] |= 1 << b
    above = [0] * m1.n
    below = [0] * m1.n
    for x in range(m1.n):
        for v in bits(m1.up[x]):
            above[x] |= img[v]
        for v in bits(m1.down[x]):
            below[x] |= img[v]
    return above, below


def _alternation(matrix: Sequence[Sequence[bool]], bound: int) -> int | None:
    """First outer index ``ko`` with no inner ``ki`` such that
    ``matrix[ko][ki]`` holds and every inner ``j < ki`` is covered by some
    outer ``jo < ko``; ``None`` when every outer index has a witness."""
    covered = [False] * bound
    for ko in range(bound):
        if ko > 0:
            row = matrix[ko - 1]
            for j in range(bound):
                covered[j] = covered[j] or row[j]
        ok = False
        for ki in range(bound):
            if matrix[ko][ki]:
                ok = True
                break
            if not covered[ki]:
                break
        if not ok:
            return ko
    return None


def default_k_bound(r: BisimRelation, w1: int, w2: int) -> int:
    o1, o2 = orbit(r.left, w1), orbit(r.right, w2)
    return (o1.preperiod + o1.period) * (o2.preperiod + o2.period)


def verify_temporal_bisim(r: BisimRelation, k_bound: int | None = None) -> BisimCheck:
    """Check C1-C3 and C5 exactly and C6-C9 for all offsets below the bound.

    The default bound per pair is the product of the two orbit lengths;
    the paired orbit walk is periodic within that many steps.
    """
    key = ("temporal", k_bound)
    if key not in r.checks:
        r.checks[key] = _verify_temporal(r, k_bound)
    return r.checks[key]


def _verify_temporal(r: BisimRelation, k_bound: int | None) -> BisimCheck:
    m1, m2 = r.left, r.right
    require_model(m1)
    require_model(m2)
    s1, s2 = m1.require_temporal(), m2.require_temporal()
    for a, b in sorted(r.pairs):
        v = _prop_violation(r, a, b)
        if v is not None:
            return BisimCheck(False, TEMPORAL_CONDITIONS, v)
        if (s1[a], s2[b]) not in r.pairs:
            return BisimCheck(False, TEMPORAL_CONDITIONS,
                              Violation("C5", (a, b), f"successors ({s1[a]}, {s2[b]}) not related"))
    above, below = _cover_masks(r)
    for a, b in sorted(r.pairs):
        bound = k_bound if k_bound is not None else default_k_bound(r, a, b)
        path1 = [m1.step(a, k) for k in range(bound)]
        path2 = [m2.step(b, k) for k in range(bound)]
        # forth[k1][k2]: some related pair sits above path1[k1] and below path2[k2]
        forth = [[bool(above[x] & m2.down[y]) for y in path2] for x in path1]
        back = [[bool(below[x] & m2.up[y]) for y in path2] for x in path1]
        forth_t = [list(col) for col in zip(*forth)]
        back_t = [list(col) for col in zip(*back)]
        for name, matrix in (("C6", forth), ("C7", back_t), ("C8", forth_t), ("C9", back)):
            k = _alternation(matrix, bound)
            if k is not None:
                return BisimCheck(False, TEMPORAL_CONDITIONS,
                                  Violation(name, (a, b), f"no witness for offset {k}", k))
    return BisimCheck(True, TEMPORAL_CONDITIONS)


def verify(r: BisimRelation, k_bound: int | None = None) -> BisimCheck:
    if r.left.is_temporal and r.right.is_temporal:
        return verify_temporal_bisim(r, k_bound)
    return verify_prop_bisim(r)


class UnverifiedRelationError(ValueError):
    pass


@dataclass(frozen=True)
class InvarianceResult:
    ok: bool
    checked: int
    differing: Formula | None = None

    def __bool__(self) -> bool:
        return self.ok


def invariance_harness(r: BisimRelation, w1: int, w2: int,
                       probe: Iterable[Formula]) -> InvarianceResult:
    """Compare the probe formulas at two related worlds.

    The relation is verified first; an unverified relation or an unrelated
    pair is rejected before any formula is evaluated.
    """
    if (w1, w2) not in r.pairs:
        raise UnverifiedRelationError(f"({w1}, {w2}) is not in the relation")
    check = verify(r)
    if not check:
        raise UnverifiedRelationError(f"relation fails verification: {check.violation}")
    probe = list(probe)
    missing = atoms_of(probe) - (set(r.left.atoms) & set(r.right.atoms))
    if missing:
        raise ValueError(f"probe atoms {sorted(missing)} are not shared by both models")
    e1 = extensions(r.left, probe)
    e2 = extensions(r.right, probe)
    for f in probe:
        if bool((e1[f] >> w1) & 1) != bool((e2[f] >> w2) & 1):
            return InvarianceResult(False, len(probe), f)
    return InvarianceResult(True, len(probe))


# -------------------------------------------------------------------- JSON

def relation_to_json(r: BisimRelation, left: str, right: str) -> dict:
    return {"left": left, "right": right, "pairs": sorted(list(p) for p in r.pairs)}


def load_relation(path: str) -> BisimRelation:
    """Load a relation file; model paths resolve relative to the file."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    left = load_model(os.path.join(base, data["left"]))
    right = load_model(os.path.join(base, data["right"]))
    return BisimRelation(left, right, frozenset(tuple(p) for p in data["pairs"]))
