"""Safe belief sets for propositional and temporal theories.

A candidate belief set ``T`` is accepted at a logic when the theory plus
the negation premises read off ``T`` is classically (resp. LTL) consistent
and entails every member of ``T`` in that logic.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formula import Atom, Formula, atoms_of, check_alphabet, is_temporal, neg, next_n
from .kripke import parse_logic
from .semantics import Verdict, bounded_consequence, bounded_model
from .traces import (Shape, ThtLasso, _check_shapes, canonical, enumerate_lassos,
                     ltl_consistent_bounded, tht_bounded_entails)

DEFAULT_TEMPORAL_LOGIC = "ITLbd(2)"


@dataclass(frozen=True)
class SafeBeliefVerdict:
    logic: str
    consistent: bool
    entailment: Verdict
    bounds: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.consistent and not self.entailment.refuted


def _alphabet(gamma: Sequence[Formula], alphabet: Sequence[str]) -> tuple[str, ...]:
    extra = sorted(atoms_of(gamma) - set(alphabet))
    return check_alphabet(tuple(alphabet) + tuple(extra))


def prop_premises(gamma: Sequence[Formula], alphabet: Sequence[str],
                  beliefs: Iterable[str]) -> list[Formula]:
    beliefs = set(beliefs)
    return list(gamma) + [neg(neg(Atom(p))) if p in beliefs else neg(Atom(p)) for p in alphabet]


def prop_safe_belief_check(logic: str, gamma: Iterable[Formula], alphabet: Sequence[str],
                           beliefs: Iterable[str], max_worlds: int = 4) -> SafeBeliefVerdict:
    """Check both safe-belief conditions for an atom set at INT, KC, BD(n) or HT.

    Consistency is decided by a classical truth table, which is the same
    verdict in every intermediate logic. Entailment of the beliefs is a
    bounded countermodel search in ``logic`` (exact for HT).
    """
    gamma = list(gamma)
    if any(is_temporal(g) for g in gamma):
        raise ValueError("temporal connective in a propositional theory")
    lc = parse_logic(logic)
    if lc.temporal:
        raise ValueError(f"{lc} is not a propositional logic")
    atoms = _alphabet(gamma, alphabet)
    beliefs = frozenset(beliefs)
    premises = prop_premises(gamma, atoms, beliefs)
    consistent = bounded_model("BD(1)", premises, 1, atoms).found
    goals = [Atom(p) for p in atoms if p in beliefs]
    verdict = bounded_consequence(lc, premises, goals, max_worlds, atoms)
    return SafeBeliefVerdict(str(lc), consistent, verdict,
                             {"alphabet": list(atoms), "max_worlds": max_worlds})


# ----------------------------------------------------------- temporal sets

@dataclass(frozen=True)
class TemporalBeliefSet:
    """An ultimately periodic set of temporal atoms ``o^i p``.

    ``members[s]`` lists the atoms believed at state ``s``; instants past the
    prefix repeat with the loop as in a lasso.
    """

    atoms: tuple[str, ...]
    prefix: int
    loop: int
    members: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", check_alphabet(self.atoms))
        object.__setattr__(self, "members", tuple(frozenset(m) for m in self.members))
        if self.prefix < 0 or self.loop < 1 or len(self.members) != self.prefix + self.loop:
            raise ValueError("belief set shape does not match its state list")
        for m in self.members:
            if not m <= set(self.atoms):
                raise ValueError("belief set uses atoms outside the alphabet")

    @property
    def horizon(self) -> int:
        return self.prefix + self.loop

    def at(self, i: int) -> frozenset[str]:
        if i >= self.horizon:
            i = self.prefix + (i - self.prefix) % self.loop
        return self.members[i]

    def contains(self, atom: str, i: int) -> bool:
        return atom in self.at(i)


def belief_to_lasso(beliefs: TemporalBeliefSet) -> ThtLasso:
    return ThtLasso.total(beliefs.atoms, beliefs.prefix, beliefs.loop, beliefs.members)


def lasso_to_belief(t: ThtLasso) -> TemporalBeliefSet:
    if t.H != t.T:
        raise ValueError("only total lassos correspond to belief sets")
    return TemporalBeliefSet(t.atoms, t.prefix, t.loop, t.T)


def premise_horizon(beliefs: TemporalBeliefSet, shape_set: Iterable[Shape]) -> int:
    """Instants covered by the premises: enough that every lasso of the
    searched shapes meeting them has exactly the belief set's trace."""
    return max(max(beliefs.prefix, p) + math.lcm(beliefs.loop, q)
               for p, q in _check_shapes(shape_set))


def temporal_premises(gamma: Sequence[Formula], beliefs: TemporalBeliefSet,
                      horizon: int) -> list[Formula]:
    out = list(gamma)
    for i in range(horizon):
        for p in beliefs.atoms:
            lit = neg(neg(Atom(p))) if beliefs.contains(p, i) else neg(Atom(p))
            out.append(next_n(lit, i))
    return out


def temporal_conclusions(beliefs: TemporalBeliefSet, horizon: int) -> list[Formula]:
    return [next_n(Atom(p), i) for i in range(horizon) for p in beliefs.atoms
            if beliefs.contains(p, i)]


def temporal_safe_belief_check(logic: str, gamma: Iterable[Formula], alphabet: Sequence[str],
                               beliefs: TemporalBeliefSet, shape_set: Iterable[Shape],
                               max_worlds: int = 4,
                               horizon: int | None = None) -> SafeBeliefVerdict:
    """Check both temporal safe-belief conditions at THT or ITLbd(n).

    Consistency is an LTL search over total lassos of ``shape_set``. For THT
    the entailment is searched over lassos of ``shape_set``; for the Kripke
    classes over enumerated models with up to ``max_worlds`` worlds.
    """
    gamma = list(gamma)
    lc = parse_logic(logic)
    if not lc.temporal:
        raise ValueError(f"{lc} is not a temporal logic")
    atoms = _alphabet(gamma, alphabet)
    if set(atoms) != set(beliefs.atoms):
        beliefs = TemporalBeliefSet(atoms, beliefs.prefix, beliefs.loop, beliefs.members)
    shape_set = _check_shapes(shape_set)
    h = horizon if horizon is not None else premise_horizon(beliefs, shape_set)
    premises = temporal_premises(gamma, beliefs, h)
    goals = temporal_conclusions(beliefs, h)
    consistent = ltl_consistent_bounded(premises, shape_set, atoms).found
    if lc.kind == "THT":
        verdict = tht_bounded_entails(premises, goals, shape_set, atoms)
    else:
        verdict = bounded_consequence(lc, premises, goals, max_worlds, atoms)
    bounds = {"alphabet": list(atoms), "shapes": [list(s) for s in shape_set],
              "premise_horizon": h}
    if lc.kind != "THT":
        bounds["max_worlds"] = max_worlds
    return SafeBeliefVerdict(str(lc), consistent, verdict, bounds)


def candidate_belief_sets(alphabet: Sequence[str],
                          shape_set: Iterable[Shape]) -> list[TemporalBeliefSet]:
    """Distinct ultimately periodic belief sets presentable in ``shape_set``."""
    seen: dict[tuple, TemporalBeliefSet] = {}
    for t in enumerate_lassos(alphabet, shape_set, total_only=True):
        c = canonical(t)
        key = (c.horizon, c.prefix, tuple(tuple(sorted(s)) for s in c.T))
        seen.setdefault(key, lasso_to_belief(c))
    return [seen[k] for k in sorted(seen)]


# ------------------------------------------------------------- coincidence

@dataclass(frozen=True)
class CoincidenceReport:
    logics: tuple[str, ...]
    accepted: dict
    differences: dict
    bounds: dict
    verdicts: dict = field(default_factory=dict, repr=False)

    @property
    def coincide(self) -> bool:
        return not any(self.differences.values())


def _prop_candidates(atoms: Sequence[str]) -> list[frozenset[str]]:
    out = []
    for k in range(len(atoms) + 1):
        out += [frozenset(c) for c in itertools.combinations(atoms, k)]
    return out


def _check_task(task: tuple) -> SafeBeliefVerdict:
    name, gamma, atoms, b, shape_set, max_worlds = task
    if shape_set is None:
        return prop_safe_belief_check(name, gamma, atoms, b, max_worlds)
    return temporal_safe_belief_check(name, gamma, atoms, b, shape_set, max_worlds)


def coincidence_harness(gamma: Iterable[Formula], alphabet: Sequence[str],
                        logics: Sequence[str], shape_set: Iterable[Shape] | None = None,
                        max_worlds: int = 4, jobs: int = 1) -> CoincidenceReport:
    """Run the safe-belief check for every candidate at every logic and
    compare the accepted sets pairwise.

    With ``jobs > 1`` the checks run in a process pool; results are
    collected in candidate order, so the report does not depend on ``jobs``.
    """
    gamma = list(gamma)
    classes = [parse_logic(l) for l in logics]
    temporal = {c.temporal for c in classes}
    if len(temporal) != 1:
        raise ValueError("cannot mix propositional and temporal logics")
    atoms = _alphabet(gamma, alphabet)
    names = tuple(str(c) for c in classes)
    if temporal.pop():
        if shape_set is None:
            raise ValueError("temporal coincidence needs lasso shapes")
        shape_set = _check_shapes(shape_set)
        cands: list = candidate_belief_sets(atoms, shape_set)
        bounds = {"alphabet": list(atoms), "shapes": [list(s) for s in shape_set],
                  "max_worlds": max_worlds}
    else:
        shape_set = None
        cands = _prop_candidates(atoms)
        bounds = {"alphabet": list(atoms), "max_worlds": max_worlds}
    tasks = [(name, gamma, atoms, b, shape_set, max_worlds) for name in names for b in cands]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_task, tasks))
    else:
        results = [_check_task(t) for t in tasks]
    accepted: dict[str, list] = {n: [] for n in names}
    verdicts: dict[str, dict] = {n: {} for n in names}
    for task, v in zip(tasks, results):
        name, b = task[0], task[3]
        verdicts[name][b] = v
        if v.accepted:
            accepted[name].append(b)
    differences = {}
    for a, b in itertools.combinations(names, 2):
        sa, sb = set(accepted[a]), set(accepted[b])
        differences[(a, b)] = sorted(sa ^ sb, key=repr)
    return CoincidenceReport(names, accepted, differences, bounds, verdicts)


# -------------------------------------------------------------------- JSON

def belief_to_json(b: TemporalBeliefSet) -> dict:
    return {"atoms": list(b.atoms), "prefix": b.prefix, "loop": b.loop,
            "in": [sorted(m) for m in b.members]}


def belief_from_json(data: dict) -> TemporalBeliefSet:
    try:
        return TemporalBeliefSet(tuple(data["atoms"]), int(data["prefix"]), int(data["loop"]),
                                 tuple(data["in"]))
    except KeyError as exc:
        raise ValueError(f"belief-set file lacks field {exc}") from None


def load_belief(path: str) -> TemporalBeliefSet:
    with open(path, encoding="utf-8") as fh:
        return belief_from_json(json.load(fh))
