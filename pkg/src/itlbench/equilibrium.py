"""Equilibrium models and the fixpoint characterizations built on them."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from . import kernel
from .formula import (Atom, Formula, ParseError, atoms_of, check_alphabet, closure_of,
                      is_temporal, neg, parse, temporal_atoms)
from .kripke import FiniteModel, Frame
from .semantics import bounded_consequence, compile_formulas, extensions, run
from .traces import (Shape, ThtLasso, _check_shapes, canonical, evaluate_lasso, is_total,
                     lasso_from_masks, lasso_models, tht_bounded_entails, tht_frame)

HT_FRAME = Frame(2, (0b11, 0b10))


@dataclass(frozen=True)
class EquilibriumResult:
    models: tuple
    search_bounds: dict = field(default_factory=dict)
    minimality_bounds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Theory:
    formulas: tuple[Formula, ...]
    declared: tuple[str, ...] | None = None

    @property
    def alphabet(self) -> tuple[str, ...]:
        """Declared atoms followed by any others used, sorted."""
        base = self.declared or ()
        return check_alphabet(tuple(base) + tuple(sorted(atoms_of(self.formulas) - set(base))))


# '#' starts a comment unless it is the constant #t or #f
_COMMENT = re.compile(r"#(?![tf](?![A-Za-z0-9_]))")


def parse_theory(text: str) -> Theory:
    """One formula per line; ``#`` comments; ``@atoms p q`` declares the alphabet.

    Parse errors report the byte offset within the whole text.
    """
    formulas = []
    declared = None
    offset = 0
    for line in text.splitlines(keepends=True):
        m = _COMMENT.search(line)
        body = line[:m.start()] if m else line
        stripped = body.strip()
        if stripped.startswith("@atoms"):
            names = stripped[len("@atoms"):].split()
            declared = check_alphabet(tuple(declared or ()) + tuple(names))
        elif stripped:
            try:
                formulas.append(parse(body))
            except ParseError as exc:
                raise ParseError(exc.message, offset + exc.offset, exc.expected) from None
        offset += len(line.encode("utf-8"))
    return Theory(tuple(formulas), declared)


def load_theory(path: str) -> Theory:
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read())


def ht_model(alphabet: Sequence[str], here: Iterable[str], there: Iterable[str]) -> FiniteModel:
    """The two-world model with ``here`` at world 0 and ``there`` at world 1."""
    return FiniteModel(tuple(alphabet), frozenset({(0, 0), (0, 1), (1, 1)}),
                       (frozenset(here), frozenset(there)))


def _subsets(atoms: Sequence[str]) -> list[frozenset[str]]:
    out = []
    for k in range(len(atoms) + 1):
        out += [frozenset(c) for c in itertools.combinations(atoms, k)]
    return out


def _require_propositional(gamma: Sequence[Formula]) -> None:
    for g in gamma:
        if is_temporal(g):
            raise ValueError("temporal connective in a propositional theory")


def _ht_alphabet(gamma: Sequence[Formula], alphabet: Sequence[str]) -> tuple[str, ...]:
    extra = sorted(atoms_of(gamma) - set(alphabet))
    return check_alphabet(tuple(alphabet) + tuple(extra))


def ht_equilibrium_models(gamma: Iterable[Formula], alphabet: Sequence[str]) -> EquilibriumResult:
    """Total here-and-there models ``(T, T)`` of ``gamma`` with no smaller ``(H, T)`` model."""
    gamma = list(gamma)
    _require_propositional(gamma)
    atoms = _ht_alphabet(gamma, alphabet)
    program = compile_formulas(gamma, atoms)
    premises = [program.slots[g] for g in gamma]

    def holds(here: frozenset[str], there: frozenset[str]) -> bool:
        masks = [(1 if p in here else 0) | (2 if p in there else 0) for p in atoms]
        out = run(program, HT_FRAME, masks)
        return all(out[s] & 1 for s in premises)

    found = []
    for there in _subsets(atoms):
        if not holds(there, there):
            continue
        if any(holds(here, there) for here in _subsets(sorted(there)) if here != there):
            continue
        found.append(there)
    return EquilibriumResult(tuple(found), {"alphabet": list(atoms), "exact": True},
                             {"exact": True})


def _lasso_key(t: ThtLasso) -> tuple:
    return (t.horizon, t.prefix, tuple(tuple(sorted(s)) for s in t.T),
            tuple(tuple(sorted(s)) for s in t.H))


def minimality_shapes(shape_set: Iterable[Shape], extra_prefix: int = 0,
                      loop_multiplier: int = 1) -> tuple[Shape, ...]:
    """Shapes searched for smaller models: the search shapes, optionally widened."""
    out = set()
    for p, q in shape_set:
        for a in range(extra_prefix + 1):
            for b in range(1, loop_multiplier + 1):
                out.add((p + a, q * b))
    return _check_shapes(out)


def _here_variants(t: ThtLasso) -> list[tuple[int, ...]]:
    """Valuation masks for every lasso with the there-trace of ``t`` and a
    strictly smaller here-trace."""
    k = t.horizon
    per_state = [_subsets(sorted(t.T[i])) for i in range(k)]
    out = []
    for hs in itertools.product(*per_state):
        if all(h == s for h, s in zip(hs, t.T)):
            continue
        masks = []
        for p in t.atoms:
            m = 0
            for i in range(k):
                if p in t.T[i]:
                    m |= 1 << (2 * i + 1)
                if p in hs[i]:
                    m |= 1 << (2 * i)
            masks.append(m)
        out.append(tuple(masks))
    return out


def smaller_model(gamma: Sequence[Formula], t: ThtLasso,
                  shape_set: Iterable[Shape]) -> ThtLasso | None:
    """A model of ``gamma`` strictly below ``t``, searched over the shapes
    of ``shape_set`` that can present the there-trace of ``t``."""
    program = compile_formulas(gamma, t.atoms)
    premises = [program.slots[g] for g in gamma]
    for shape in _check_shapes(shape_set):
        shaped = t.unrolled(*shape)
        if shaped is None:
            continue
        vals = _here_variants(shaped)
        frame = tht_frame(*shape)
        hits = kernel.filter_models(program.ops, program.xs, program.ys, frame.n, frame.up,
                                    frame.succ, vals, premises, 0)
        if hits:
            return lasso_from_masks(t.atoms, shape, vals[hits[0]])
    return None


def tel_equilibrium_models(gamma: Iterable[Formula], alphabet: Sequence[str],
                           shape_set: Iterable[Shape], extra_prefix: int = 0,
                           loop_multiplier: int = 1) -> EquilibriumResult:
    """Temporal equilibrium models among the total lassos of ``shape_set``.

    A candidate survives when no strictly smaller lasso with the same
    there-trace satisfies ``gamma``; smaller lassos are searched over every
    shape in ``shape_set`` (widened by ``extra_prefix`` and
    ``loop_multiplier``) that fits the candidate's there-trace. Candidates
    are reported once each, in their shortest presentation.
    """
    gamma = list(gamma)
    atoms = _ht_alphabet(gamma, alphabet)
    shape_set = _check_shapes(shape_set)
    min_shapes = minimality_shapes(shape_set, extra_prefix, loop_multiplier)
    seen: dict[tuple, ThtLasso] = {}
    for shape in shape_set:
        for t in lasso_models(gamma, atoms, shape, total_only=True):
            c = canonical(t)
            seen.setdefault(_lasso_key(c), c)
    survivors = [t for key, t in sorted(seen.items()) if smaller_model(gamma, t, min_shapes) is None]
    return EquilibriumResult(
        tuple(survivors),
        {"shapes": [list(s) for s in shape_set], "alphabet": list(atoms)},
        {"shapes": [list(s) for s in min_shapes], "extra_prefix": extra_prefix,
         "loop_multiplier": loop_multiplier},
    )


# ----------------------------------------------------------------- theories

RootModel = Union[FiniteModel, ThtLasso, frozenset]


@dataclass(frozen=True)
class TheoryOf:
    model: RootModel
    probe: tuple[Formula, ...]
    holds: tuple[Formula, ...]

    def __contains__(self, f: Formula) -> bool:
        return f in self.holds


def theory_of(model: RootModel, probe: Iterable[Formula],
              alphabet: Sequence[str] | None = None) -> TheoryOf:
    """Members of ``probe`` true at the root of a total model.

    An atom set is read as the total here-and-there model over
    ``alphabet``; a Kripke model is evaluated at world 0; a lasso at (0,0).
    """
    probe = tuple(dict.fromkeys(probe))
    if isinstance(model, ThtLasso):
        if not is_total(model):
            raise ValueError("theory_of needs a total lasso")
        ext = evaluate_lasso(model, probe)
    else:
        if isinstance(model, (frozenset, set)):
            atoms = _ht_alphabet(probe, alphabet or sorted(model))
            m = ht_model(atoms, model, model)
        else:
            m = model
        ext = extensions(m, probe)
    return TheoryOf(model, probe, tuple(f for f in probe if ext[f] & 1))


def _literal_probe(gamma: Sequence[Formula], atoms: Sequence[str]) -> list[Formula]:
    lits = [Atom(p) for p in atoms]
    return list(dict.fromkeys(closure_of(gamma) + lits + [neg(a) for a in lits]))


def completion_hypotheses(alphabet: Sequence[str], there: Iterable[str]) -> list[Formula]:
    there = set(there)
    return [neg(neg(Atom(p))) if p in there else neg(Atom(p)) for p in alphabet]


def completion_check_prop(gamma: Iterable[Formula], alphabet: Sequence[str],
                          there: Iterable[str], probe: Iterable[Formula] | None = None) -> bool:
    """Whether ``gamma`` plus the negation hypotheses of ``there`` entails, in
    here-and-there, exactly the probe formulas true in the total model."""
    gamma = list(gamma)
    _require_propositional(gamma)
    there = frozenset(there)
    probe = list(probe) if probe is not None else None
    atoms = _ht_alphabet(gamma + (probe or []), alphabet)
    if probe is None:
        probe = _literal_probe(gamma, atoms)
    hyp = completion_hypotheses(atoms, there)
    truth = theory_of(there, probe, atoms)
    for f in probe:
        entailed = not bounded_consequence("HT", gamma + hyp, [f], 2, atoms).refuted
        if entailed != (f in truth):
            return False
    return True


# ------------------------------------------------------------- fixpoint check

def hypothesis_horizon(t: ThtLasso, shape_set: Iterable[Shape]) -> int:
    """Instants the negation hypotheses must cover so that any lasso of the
    searched shapes agreeing with them has the there-trace of ``t``."""
    return max(max(t.prefix, p) + math.lcm(t.loop, q) for p, q in _check_shapes(shape_set))


def fixpoint_hypotheses(t: ThtLasso, horizon: int) -> list[Formula]:
    out = []
    for ta in temporal_atoms(t.atoms, horizon):
        f = ta.formula()
        out.append(neg(neg(f)) if ta.atom in t.there(ta.offset) else neg(f))
    return out


@dataclass(frozen=True)
class FixpointResult:
    holds: bool
    bounds: dict
    mismatch: Formula | None = None

    def __bool__(self) -> bool:
        return self.holds


def tel_fixpoint_check(gamma: Iterable[Formula], alphabet: Sequence[str], t: ThtLasso,
                       probe: Iterable[Formula] | None = None,
                       shape_set: Iterable[Shape] | None = None) -> FixpointResult:
    """Whether ``gamma`` plus the negation hypotheses read off ``t`` entails,
    over lassos of ``shape_set``, exactly the probe formulas true in ``t``."""
    if not is_total(t):
        raise ValueError("the fixpoint check needs a total lasso")
    gamma = list(gamma)
    atoms = _ht_alphabet(gamma, alphabet)
    if set(atoms) != set(t.atoms):
        t = ThtLasso(atoms, t.prefix, t.loop, t.H, t.T)
    shape_set = _check_shapes(shape_set if shape_set is not None else [t.shape])
    horizon = hypothesis_horizon(t, shape_set)
    hyp = fixpoint_hypotheses(t, horizon)
    if probe is None:
        base = closure_of(gamma) + [ta.formula() for ta in temporal_atoms(atoms, horizon)]
        probe = list(dict.fromkeys(base + [neg(f) for f in base]))
    probe = list(probe)
    truth = theory_of(t, probe)
    bounds = {"shapes": [list(s) for s in shape_set], "alphabet": list(atoms),
              "hypothesis_horizon": horizon}
    for f in probe:
        entailed = not tht_bounded_entails(gamma + hyp, [f], shape_set, atoms).refuted
        if entailed != (f in truth):
            return FixpointResult(False, bounds, f)
    return FixpointResult(True, bounds)
