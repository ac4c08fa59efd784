"""Satisfaction, frame validity and bounded local consequence.

Formulas are compiled to a post-order program and evaluated on all worlds
at once by the bitset kernel. Implication at ``w`` holds when no world in
the upset of ``w`` satisfies the antecedent but not the consequent.

Until and release are computed as fixpoints of their one-step unfoldings
``b | (a & pre(X))`` (least) and ``b & (a | pre(X))`` (greatest), where
``pre(X)`` is the set of worlds whose successor lies in ``X``. Because the
successor relation is a total function on a finite set, the path from any
world is a lasso: the least fixpoint contains exactly the worlds with a
finite witness ``k`` for until, and the greatest fixpoint excludes exactly
the worlds with a finite violation ``k`` for release. This is the same as
quantifying over all ``k >= 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from . import kernel
from .formula import (And, Atom, Bot, Formula, Implies, Next, Or, Release, Until,
                      atoms_of, bd_axiom, closure_of)
from .kripke import (FiniteModel, Frame, LogicClass, ModelError, PropositionalModelError,
                     bits, frames, parse_logic, require_model, upsets, valuations)

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


class UnknownAtomError(ModelError):
    pass


@dataclass
class Program:
    ops: list[int]
    xs: list[int]
    ys: list[int]
    slots: dict[Formula, int]
    temporal: bool

    def __len__(self) -> int:
        return len(self.ops)


def compile_formulas(formulas: Iterable[Formula], alphabet: Sequence[str],
                     program: Program | None = None) -> Program:
    """Append every subformula of ``formulas`` to ``program`` in post-order."""
    if program is None:
        program = Program([], [], [], {}, False)
    index = {p: i for i, p in enumerate(alphabet)}
    slots = program.slots
    for node in closure_of(formulas):
        if node in slots:
            continue
        if isinstance(node, Atom):
            if node.name not in index:
                raise UnknownAtomError(f"atom {node.name!r} is not in the alphabet {list(alphabet)}")
            op, x, y = kernel.ATOM, index[node.name], 0
        elif isinstance(node, Bot):
            op, x, y = kernel.BOT, 0, 0
        elif isinstance(node, Next):
            op, x, y = kernel.NEXT, slots[node.body], 0
            program.temporal = True
        else:
            op = {And: kernel.AND, Or: kernel.OR, Implies: kernel.IMP,
                  Until: kernel.UNTIL, Release: kernel.RELEASE}[type(node)]
            x, y = slots[node.lhs], slots[node.rhs]
            if op in (kernel.UNTIL, kernel.RELEASE):
                program.temporal = True
        slots[node] = len(program.ops)
        program.ops.append(op)
        program.xs.append(x)
        program.ys.append(y)
    return program


def _check_frame(program: Program, frame: Frame) -> None:
    if program.temporal and frame.succ is None:
        raise PropositionalModelError("temporal connective evaluated on a propositional model")


def run(program: Program, frame: Frame, masks: Sequence[int]) -> list[int]:
    _check_frame(program, frame)
    return kernel.evaluate(program.ops, program.xs, program.ys, frame.n, frame.up,
                           frame.succ, masks)


def extensions(m: FiniteModel, formulas: Iterable[Formula], check: bool = True) -> dict[Formula, int]:
    """Map each formula to the bitset of worlds where it holds."""
    formulas = list(formulas)
    if check:
        require_model(m)
    program = compile_formulas(formulas, m.atoms)
    out = run(program, m.frame, m.atom_masks)
    return {f: out[program.slots[f]] for f in formulas}


def extension(m: FiniteModel, f: Formula, check: bool = True) -> frozenset[int]:
    return frozenset(bits(extensions(m, [f], check)[f]))


def satisfies(m: FiniteModel, w: int, f: Formula, check: bool = True) -> bool:
    """Whether ``f`` holds at world ``w``.

    ``check=False`` skips the partial-order and monotonicity checks, which
    is only useful for deliberately malformed models.
    """
    if not 0 <= w < m.n:
        raise ModelError(f"world {w} out of range")
    return bool((extensions(m, [f], check)[f] >> w) & 1)


# --------------------------------------------------------------- verdicts

class Outcome(enum.Enum):
    REFUTED = "refuted"
    NO_COUNTEREXAMPLE = "no-counterexample-up-to-bound"
    MODEL_FOUND = "model-found"
    NO_MODEL = "no-model-up-to-bound"


@dataclass(frozen=True)
class Verdict:
    """Result of a bounded search.

    For consequence queries the witness is a countermodel and ``point`` the
    world (or instant) where the premises hold and ``failed`` does not. For
    consistency queries the witness is a model of the premises.
    """

    outcome: Outcome
    bounds: dict = field(default_factory=dict)
    witness: Any = None
    point: int | None = None
    failed: Formula | None = None

    @property
    def refuted(self) -> bool:
        return self.outcome is Outcome.REFUTED

    @property
    def found(self) -> bool:
        return self.outcome is Outcome.MODEL_FOUND

    @property
    def conclusive(self) -> bool:
        return self.outcome in (Outcome.REFUTED, Outcome.MODEL_FOUND)


def _budget_check(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise BudgetExceeded(f"{what}: {count} valuations exceed the budget of {budget}")


def _as_frame(f: FiniteModel | Frame) -> Frame:
    return f.frame if isinstance(f, FiniteModel) else f


def frame_counterexample(frame: FiniteModel | Frame, f: Formula,
                         budget: int = DEFAULT_BUDGET) -> tuple[FiniteModel, int] | None:
    """A valuation and world refuting ``f`` on ``frame``, or ``None`` if valid."""
    frame = _as_frame(frame)
    alphabet = sorted(atoms_of([f]))
    _budget_check(len(upsets(frame.up)) ** len(alphabet), budget, "frame validity")
    program = compile_formulas([f], alphabet)
    _check_frame(program, frame)
    vals = valuations(frame, len(alphabet))
    hit = kernel.find_counterexample(program.ops, program.xs, program.ys, frame.n, frame.up,
                                     frame.succ, vals, [], [program.slots[f]], 0, -1)
    if hit is None:
        return None
    vi, w, _ = hit
    return FiniteModel.from_frame(frame, alphabet, vals[vi]), w


def frame_valid(frame: FiniteModel | Frame, f: Formula, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether ``f`` holds at every world under every monotone valuation."""
    return frame_counterexample(frame, f, budget) is None


def validates_bd(frame: FiniteModel | Frame, n: int, budget: int = DEFAULT_BUDGET) -> bool:
    return frame_valid(frame, bd_axiom(n), budget)


def bounded_consequence(logic: str | LogicClass, gamma: Iterable[Formula],
                        delta: Iterable[Formula], max_worlds: int = 3,
                        alphabet: Sequence[str] | None = None,
                        budget: int = DEFAULT_BUDGET) -> Verdict:
    """Search the models of ``logic`` up to ``max_worlds`` worlds for a world
    satisfying all of ``gamma`` and refuting some member of ``delta``."""
    logic = parse_logic(logic)
    if logic.kind == "THT":
        raise ValueError("THT consequence is decided over lassos; use traces.tht_bounded_entails")
    gamma, delta = list(gamma), list(delta)
    names = sorted(atoms_of(gamma + delta) | set(alphabet or ()))
    bounds = {"logic": str(logic), "max_worlds": max_worlds, "alphabet": names}
    fs = frames(logic, max_worlds)
    _budget_check(sum(len(upsets(fr.up)) ** len(names) for fr in fs), budget,
                  f"{logic} consequence")
    program = compile_formulas(gamma, names)
    prem_end = len(program)
    compile_formulas(delta, names, program)
    premises = [program.slots[g] for g in gamma]
    goals = [program.slots[d] for d in delta]
    if not goals:
        return Verdict(Outcome.NO_COUNTEREXAMPLE, bounds)
    for fr in fs:
        _check_frame(program, fr)
        vals = valuations(fr, len(names))
        hit = kernel.find_counterexample(program.ops, program.xs, program.ys, fr.n, fr.up,
                                         fr.succ, vals, premises, goals, prem_end, -1)
        if hit is not None:
            vi, w, gi = hit
            model = FiniteModel.from_frame(fr, names, vals[vi])
            return Verdict(Outcome.REFUTED, bounds, model, w, delta[gi])
    return Verdict(Outcome.NO_COUNTEREXAMPLE, bounds)


def bounded_model(logic: str | LogicClass, gamma: Iterable[Formula], max_worlds: int = 3,
                  alphabet: Sequence[str] | None = None,
                  budget: int = DEFAULT_BUDGET) -> Verdict:
    """Search the models of ``logic`` for a world satisfying all of ``gamma``."""
    v = bounded_consequence(logic, gamma, [Bot()], max_worlds, alphabet, budget)
    if v.refuted:
        return Verdict(Outcome.MODEL_FOUND, v.bounds, v.witness, v.point)
    return Verdict(Outcome.NO_MODEL, v.bounds)
