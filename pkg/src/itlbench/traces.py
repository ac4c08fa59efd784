"""Here-and-there traces presented as lassos.

A lasso with prefix length ``l`` and loop length ``lam`` has ``l + lam``
states ``(H_i, T_i)``; instant ``i >= l + lam`` behaves as state
``l + (i - l) mod lam``. Evaluation goes through a finite Kripke model with
worlds ``2*i`` (here) and ``2*i + 1`` (there) for each state ``i``: the map
from the infinite timeline onto these states is a bounded morphism, so both
satisfy the same formulas.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from . import kernel
from .formula import BOT, Formula, atoms_of, check_alphabet
from .kripke import FiniteModel, Frame, bits
from .semantics import (DEFAULT_BUDGET, BudgetExceeded, Outcome, Verdict, compile_formulas,
                        extensions, run)

Shape = tuple[int, int]


@dataclass(frozen=True)
class ThtLasso:
    atoms: tuple[str, ...]
    prefix: int
    loop: int
    H: tuple[frozenset[str], ...]
    T: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", check_alphabet(self.atoms))
        object.__setattr__(self, "H", tuple(frozenset(h) for h in self.H))
        object.__setattr__(self, "T", tuple(frozenset(t) for t in self.T))
        if self.prefix < 0 or self.loop < 1:
            raise ValueError("lasso needs prefix >= 0 and loop >= 1")
        k = self.prefix + self.loop
        if len(self.H) != k or len(self.T) != k:
            raise ValueError(f"lasso of shape ({self.prefix}, {self.loop}) needs {k} states")
        known = set(self.atoms)
        for i, (h, t) in enumerate(zip(self.H, self.T)):
            if not h <= t:
                raise ValueError(f"state {i}: here-set {sorted(h)} is not within there-set {sorted(t)}")
            if not t <= known:
                raise ValueError(f"state {i} uses atoms outside the alphabet")

    @classmethod
    def total(cls, atoms: Sequence[str], prefix: int, loop: int,
              states: Sequence[Iterable[str]]) -> "ThtLasso":
        states = tuple(frozenset(s) for s in states)
        return cls(tuple(atoms), prefix, loop, states, states)

    @property
    def horizon(self) -> int:
        return self.prefix + self.loop

    @property
    def shape(self) -> Shape:
        return (self.prefix, self.loop)

    def state(self, i: int) -> int:
        if i < 0:
            raise ValueError("instants are non-negative")
        if i < self.horizon:
            return i
        return self.prefix + (i - self.prefix) % self.loop

    def here(self, i: int) -> frozenset[str]:
        return self.H[self.state(i)]

    def there(self, i: int) -> frozenset[str]:
        return self.T[self.state(i)]

    @cached_property
    def model(self) -> FiniteModel:
        """The finite here-and-there model this lasso denotes."""
        k = self.horizon
        frame = tht_frame(self.prefix, self.loop)
        val = []
        for i in range(k):
            val += [self.H[i], self.T[i]]
        names = [f"({i},{layer})" for i in range(k) for layer in (0, 1)]
        order = frozenset((w, v) for w in range(2 * k) for v in bits(frame.up[w]))
        return FiniteModel(self.atoms, order, tuple(val), frame.succ, tuple(names))

    def unrolled(self, prefix: int, loop: int) -> "ThtLasso | None":
        """The same trace presented with another shape, if that shape fits it."""
        k = prefix + loop
        cand = ThtLasso(self.atoms, prefix, loop,
                        tuple(self.here(i) for i in range(k)),
                        tuple(self.there(i) for i in range(k)))
        return cand if same_trace(cand, self) else None


@lru_cache(maxsize=None)
def tht_frame(prefix: int, loop: int) -> Frame:
    k = prefix + loop
    up = []
    for i in range(k):
        up += [(1 << 2 * i) | (1 << 2 * i + 1), 1 << 2 * i + 1]
    succ = []
    for i in range(k):
        j = i + 1 if i + 1 < k else prefix
        succ += [2 * j, 2 * j + 1]
    return Frame(2 * k, tuple(up), tuple(succ))


def world_of(t: ThtLasso, i: int, layer: int) -> int:
    if layer not in (0, 1):
        raise ValueError("layer must be 0 or 1")
    return 2 * t.state(i) + layer


def tht_satisfies(t: ThtLasso, i: int, layer: int, f: Formula) -> bool:
    w = world_of(t, i, layer)
    return bool((extensions(t.model, [f], check=False)[f] >> w) & 1)


def is_total(t: ThtLasso) -> bool:
    return t.H == t.T


def _alignment(a: ThtLasso, b: ThtLasso) -> int:
    return max(a.prefix, b.prefix) + math.lcm(a.loop, b.loop)


def _same_alphabet(a: ThtLasso, b: ThtLasso) -> None:
    if set(a.atoms) != set(b.atoms):
        raise ValueError("lassos over different alphabets")


def leq(a: ThtLasso, b: ThtLasso) -> bool:
    """Same there-trace and pointwise smaller here-trace.

    Beyond ``max(prefix)`` both traces repeat with period ``lcm(loop)``, so
    comparing that many instants decides the infinite comparison.
    """
    _same_alphabet(a, b)
    return all(a.there(i) == b.there(i) and a.here(i) <= b.here(i)
               for i in range(_alignment(a, b)))


def same_trace(a: ThtLasso, b: ThtLasso) -> bool:
    _same_alphabet(a, b)
    return all(a.there(i) == b.there(i) and a.here(i) == b.here(i)
               for i in range(_alignment(a, b)))


def same_there_trace(a: ThtLasso, b: ThtLasso) -> bool:
    _same_alphabet(a, b)
    return all(a.there(i) == b.there(i) for i in range(_alignment(a, b)))


def lt(a: ThtLasso, b: ThtLasso) -> bool:
    return leq(a, b) and not same_trace(a, b)


def canonical(t: ThtLasso) -> ThtLasso:
    """The presentation of ``t`` with the shortest loop, then shortest prefix."""
    for loop in range(1, t.loop + 1):
        if t.loop % loop:
            continue
        for prefix in range(t.prefix + 1):
            cand = t.unrolled(prefix, loop)
            if cand is not None:
                return cand
    return t


def shapes(max_prefix: int, max_loop: int) -> tuple[Shape, ...]:
    """All ``(prefix, loop)`` within the bounds, by total length then prefix."""
    if max_prefix < 0 or max_loop < 1:
        raise ValueError("shape bounds need max_prefix >= 0 and max_loop >= 1")
    out = [(p, q) for p in range(max_prefix + 1) for q in range(1, max_loop + 1)]
    return tuple(sorted(out, key=lambda s: (s[0] + s[1], s[0])))


def shapes_up_to(length: int) -> tuple[Shape, ...]:
    """All shapes with ``prefix + loop <= length``."""
    out = [(p, q) for p in range(length) for q in range(1, length - p + 1)]
    return tuple(sorted(out, key=lambda s: (s[0] + s[1], s[0])))


def _check_shapes(shape_set: Iterable[Shape]) -> tuple[Shape, ...]:
    out = tuple(dict.fromkeys((int(p), int(q)) for p, q in shape_set))
    for p, q in out:
        if p < 0 or q < 1:
            raise ValueError(f"invalid lasso shape ({p}, {q})")
    return tuple(sorted(out, key=lambda s: (s[0] + s[1], s[0])))


@lru_cache(maxsize=256)
def _valuation_masks(shape: Shape, n_atoms: int, total_only: bool) -> tuple[tuple[int, ...], ...]:
    k = shape[0] + shape[1]
    # per state: 0 = absent, 1 = there only, 2 = here and there
    choices = (0, 2) if total_only else (0, 1, 2)
    per_atom = []
    for combo in itertools.product(choices, repeat=k):
        m = 0
        for i, c in enumerate(combo):
            if c:
                m |= 1 << (2 * i + 1)
            if c == 2:
                m |= 1 << (2 * i)
        per_atom.append(m)
    return tuple(itertools.product(per_atom, repeat=n_atoms))


def lasso_from_masks(atoms: Sequence[str], shape: Shape, masks: Sequence[int]) -> ThtLasso:
    k = shape[0] + shape[1]
    H = [frozenset(p for p, m in zip(atoms, masks) if (m >> 2 * i) & 1) for i in range(k)]
    T = [frozenset(p for p, m in zip(atoms, masks) if (m >> 2 * i + 1) & 1) for i in range(k)]
    return ThtLasso(tuple(atoms), shape[0], shape[1], tuple(H), tuple(T))


def lasso_count(shape: Shape, n_atoms: int, total_only: bool = False) -> int:
    return (2 if total_only else 3) ** ((shape[0] + shape[1]) * n_atoms)


def _budget(shape_set: Sequence[Shape], n_atoms: int, total_only: bool, budget: int) -> None:
    count = sum(lasso_count(s, n_atoms, total_only) for s in shape_set)
    if count > budget:
        raise BudgetExceeded(f"{count} lassos exceed the budget of {budget}")


def enumerate_lassos(alphabet: Sequence[str], shape_set: Iterable[Shape],
                     total_only: bool = False) -> Iterator[ThtLasso]:
    atoms = check_alphabet(alphabet)
    for shape in _check_shapes(shape_set):
        for masks in _valuation_masks(shape, len(atoms), total_only):
            yield lasso_from_masks(atoms, shape, masks)


def _alphabet(gamma: Sequence[Formula], alphabet: Sequence[str] | None) -> tuple[str, ...]:
    if alphabet is not None:
        return check_alphabet(alphabet)
    return tuple(sorted(atoms_of(gamma)))


def lasso_models(gamma: Iterable[Formula], alphabet: Sequence[str], shape: Shape,
                 total_only: bool = False) -> list[ThtLasso]:
    """Every lasso of ``shape`` satisfying all of ``gamma`` at (0,0)."""
    gamma = list(gamma)
    atoms = check_alphabet(alphabet)
    program = compile_formulas(gamma, atoms)
    frame = tht_frame(*shape)
    vals = _valuation_masks(shape, len(atoms), total_only)
    premises = [program.slots[g] for g in gamma]
    hits = kernel.filter_models(program.ops, program.xs, program.ys, frame.n, frame.up,
                                frame.succ, vals, premises, 0)
    return [lasso_from_masks(atoms, shape, vals[i]) for i in hits]


def tht_consistent_bounded(gamma: Iterable[Formula], shape_set: Iterable[Shape],
                           alphabet: Sequence[str] | None = None, total_only: bool = False,
                           budget: int = DEFAULT_BUDGET) -> Verdict:
    """Search lassos of the given shapes for a model of ``gamma`` at (0,0).

    With ``total_only`` only total lassos are searched, which is classical
    LTL satisfiability over those shapes.
    """
    gamma = list(gamma)
    atoms = _alphabet(gamma, alphabet)
    shape_set = _check_shapes(shape_set)
    _budget(shape_set, len(atoms), total_only, budget)
    bounds = {"shapes": [list(s) for s in shape_set], "alphabet": list(atoms),
              "semantics": "LTL" if total_only else "THT"}
    # a model of gamma is a countermodel to gamma entailing falsity
    program = compile_formulas(gamma, atoms)
    prem_end = len(program)
    compile_formulas([BOT], atoms, program)
    premises = [program.slots[g] for g in gamma]
    for shape in shape_set:
        frame = tht_frame(*shape)
        vals = _valuation_masks(shape, len(atoms), total_only)
        hit = kernel.find_counterexample(program.ops, program.xs, program.ys, frame.n, frame.up,
                                         frame.succ, vals, premises, [program.slots[BOT]],
                                         prem_end, 0)
        if hit is not None:
            return Verdict(Outcome.MODEL_FOUND, bounds, lasso_from_masks(atoms, shape, vals[hit[0]]), 0)
    return Verdict(Outcome.NO_MODEL, bounds)


def ltl_consistent_bounded(gamma: Iterable[Formula], shape_set: Iterable[Shape],
                           alphabet: Sequence[str] | None = None,
                           budget: int = DEFAULT_BUDGET) -> Verdict:
    return tht_consistent_bounded(gamma, shape_set, alphabet, True, budget)


def tht_bounded_entails(gamma: Iterable[Formula], delta: Iterable[Formula],
                        shape_set: Iterable[Shape], alphabet: Sequence[str] | None = None,
                        budget: int = DEFAULT_BUDGET, total_only: bool = False) -> Verdict:
    """Search for a lasso satisfying ``gamma`` at (0,0) but refuting some ``delta``."""
    gamma, delta = list(gamma), list(delta)
    atoms = _alphabet(gamma + delta, alphabet)
    shape_set = _check_shapes(shape_set)
    _budget(shape_set, len(atoms), total_only, budget)
    bounds = {"shapes": [list(s) for s in shape_set], "alphabet": list(atoms),
              "semantics": "LTL" if total_only else "THT"}
    if not delta:
        return Verdict(Outcome.NO_COUNTEREXAMPLE, bounds)
    program = compile_formulas(gamma, atoms)
    prem_end = len(program)
    compile_formulas(delta, atoms, program)
    premises = [program.slots[g] for g in gamma]
    goals = [program.slots[d] for d in delta]
    for shape in shape_set:
        frame = tht_frame(*shape)
        vals = _valuation_masks(shape, len(atoms), total_only)
        hit = kernel.find_counterexample(program.ops, program.xs, program.ys, frame.n, frame.up,
                                         frame.succ, vals, premises, goals, prem_end, 0)
        if hit is not None:
            vi, _, gi = hit
            return Verdict(Outcome.REFUTED, bounds, lasso_from_masks(atoms, shape, vals[vi]), 0,
                           delta[gi])
    return Verdict(Outcome.NO_COUNTEREXAMPLE, bounds)


def evaluate_lasso(t: ThtLasso, formulas: Iterable[Formula]) -> dict[Formula, int]:
    """Bitsets over the lasso's ``2 * (prefix + loop)`` worlds, per formula."""
    formulas = list(formulas)
    program = compile_formulas(formulas, t.atoms)
    out = run(program, tht_frame(t.prefix, t.loop), t.model.atom_masks)
    return {f: out[program.slots[f]] for f in formulas}


# -------------------------------------------------------------------- JSON

def lasso_to_json(t: ThtLasso) -> dict:
    return {"atoms": list(t.atoms), "prefix": t.prefix, "loop": t.loop,
            "H": [sorted(h) for h in t.H], "T": [sorted(s) for s in t.T]}


def lasso_from_json(data: dict) -> ThtLasso:
    try:
        return ThtLasso(tuple(data["atoms"]), int(data["prefix"]), int(data["loop"]),
                        tuple(data["H"]), tuple(data["T"]))
    except KeyError as exc:
        raise ValueError(f"lasso file lacks field {exc}") from None


def load_lasso(path: str) -> ThtLasso:
    with open(path, encoding="utf-8") as fh:
        return lasso_from_json(json.load(fh))
