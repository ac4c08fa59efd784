"""Model surgeries that return the transformed model with a bisimulation witness.

Each construction checks its preconditions first and raises
``PreconditionError`` naming the offending world. Internal consistency
checks raise ``InternalInconsistency``; those indicate a semantics bug.
"""

from __future__ import annotations

from typing import Sequence

from .bisim import BisimRelation, verify
from .formula import Atom, Or, always, neg
from .kripke import (FiniteModel, ModelError, bits, is_maximal, maximal_worlds, orbit,
                     require_model, validate)
from .semantics import extensions
from .equilibrium import ht_model
from .traces import ThtLasso


class PreconditionError(ModelError):
    pass


class InternalInconsistency(RuntimeError):
    pass


def _alphabet(m: FiniteModel, a: Sequence[str] | None) -> tuple[str, ...]:
    if a is None:
        return m.atoms
    unknown = set(a) - set(m.atoms)
    if unknown:
        raise PreconditionError(f"atoms {sorted(unknown)} are not in the model's alphabet")
    return tuple(a)


def _fresh_name(taken: set[str], base: str) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def _names_for(m: FiniteModel, kept: Sequence[int], fresh: Sequence[str]) -> tuple[str, ...]:
    old = [m.label(v) for v in kept]
    taken = set(old)
    return tuple(old + [_fresh_name(taken, f) for f in fresh])


def _check(r: BisimRelation, verify_witness: bool) -> BisimRelation:
    if verify_witness:
        c = verify(r)
        if not c:
            raise InternalInconsistency(f"construction witness fails verification: {c.violation}")
    return r


# ------------------------------------------------------------ propositional

def weak_em_holds(m: FiniteModel, w: int, a: Sequence[str] | None = None) -> bool:
    """Whether ``~p | ~~p`` holds at ``w`` for every atom of ``a``.

    When it does, every maximal world above ``w`` must agree on ``a``; a
    disagreement raises ``InternalInconsistency``.
    """
    require_model(m)
    a = _alphabet(m, a)
    fs = [Or(neg(Atom(p)), neg(neg(Atom(p)))) for p in a]
    ext = extensions(m, fs, check=False)
    holds = all((ext[f] >> w) & 1 for f in fs)
    if holds:
        tops = sorted(maximal_worlds(m, w))
        first = m.valuation[tops[0]] & set(a)
        for v in tops[1:]:
            if m.valuation[v] & set(a) != first:
                raise InternalInconsistency(
                    f"weak excluded middle holds at {m.label(w)} but maximal worlds "
                    f"{m.label(tops[0])} and {m.label(v)} disagree")
    return holds


def merge_maximals_prop(m: FiniteModel, w: int,
                        verify_witness: bool = True) -> tuple[FiniteModel, int, BisimRelation]:
    """Restrict to the upset of ``w`` and replace its maximal worlds by one fresh top.

    Returns the new model, the image of ``w`` and the relation pairing
    every kept world with its copy and every maximal world with the top.
    """
    if m.is_temporal:
        raise PreconditionError("propositional merge applied to a temporal model")
    if not weak_em_holds(m, w):
        raise PreconditionError(f"weak excluded middle fails at world {m.label(w)}")
    tops = sorted(maximal_worlds(m, w))
    kept = [v for v in bits(m.up[w]) if not is_maximal(m, v)]
    index = {v: i for i, v in enumerate(kept)}
    u = len(kept)
    order = {(index[a], index[b]) for a, b in m.order if a in index and b in index}
    order |= {(i, u) for i in range(u + 1)}
    val = [m.valuation[v] for v in kept] + [m.valuation[tops[0]]]
    names = _names_for(m, kept, ["u"])
    out = FiniteModel(m.atoms, frozenset(order), tuple(val), None, names)
    pairs = {(v, index[v]) for v in kept} | {(t, u) for t in tops}
    root = index.get(w, u)
    return out, root, _check(BisimRelation(m, out, frozenset(pairs)), verify_witness)


def contract_to_ht(m: FiniteModel, w: int,
                   verify_witness: bool = True) -> tuple[FiniteModel, BisimRelation]:
    """Collapse the upset of ``w`` onto a two-world here-and-there model.

    Requires a unique maximal world above ``w`` and one shared valuation on
    every world strictly above ``w``.
    """
    require_model(m)
    if m.is_temporal:
        raise PreconditionError("propositional contraction applied to a temporal model")
    tops = sorted(maximal_worlds(m, w))
    if len(tops) != 1:
        raise PreconditionError(f"world {m.label(w)} sees {len(tops)} maximal worlds: "
                                f"{[m.label(t) for t in tops]}")
    there = m.valuation[tops[0]]
    above = m.strict_upset(w)
    for v in above:
        if m.valuation[v] != there:
            raise PreconditionError(f"world {m.label(v)} above {m.label(w)} has valuation "
                                    f"{sorted(m.valuation[v])}, expected {sorted(there)}")
    out = ht_model(m.atoms, m.valuation[w], there)
    pairs = {(w, 0)} | {(v, 1) for v in above}
    if not above:
        pairs.add((w, 1))
    return out, _check(BisimRelation(m, out, frozenset(pairs)), verify_witness)


# ----------------------------------------------------------------- temporal

def _require_persistent(m: FiniteModel) -> int:
    m.require_temporal()
    report = validate(m)
    if "ITLp" not in report.logic_tags:
        raise PreconditionError("model is not persistent (forward and backward confluent)")
    return report.depth


def _orbit_upset(m: FiniteModel, w: int) -> tuple[list[int], int]:
    ob = orbit(m, w)
    carrier = 0
    for s in ob.path:
        carrier |= m.up[s]
    return list(ob.path), carrier


def merge_maximals_temporal(m: FiniteModel, w: int, a: Sequence[str] | None = None,
                            verify_witness: bool = True) -> tuple[FiniteModel, int, BisimRelation]:
    """Temporal version of the maximal-world merge.

    The carrier is the union of the upsets of the orbit states of ``w``.
    Its maximal worlds are grouped into classes: two maxima are in one
    class when some orbit state sees both. Each class becomes one fresh
    top world; the remaining worlds are kept. On a persistent model the
    successor of a maximal world is maximal, so successors of classes are
    well defined. ``a`` defaults to the model's whole alphabet.
    """
    depth = _require_persistent(m)
    a = _alphabet(m, a)
    fs = [always(Or(neg(Atom(p)), neg(neg(Atom(p))))) for p in a]
    ext = extensions(m, fs, check=False)
    for p, f in zip(a, fs):
        if not (ext[f] >> w) & 1:
            raise PreconditionError(f"always(~{p} | ~~{p}) fails at world {m.label(w)}")
    path, carrier = _orbit_upset(m, w)
    succ = m.succ
    tops = [v for v in bits(carrier) if is_maximal(m, v)]
    parent = {t: t for t in tops}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in path:
        group = sorted(maximal_worlds(m, s))
        for t in group[1:]:
            parent[find(t)] = find(group[0])
    # classes ordered by the first orbit state that sees them
    class_of: dict[int, int] = {}
    for s in path:
        for t in sorted(maximal_worlds(m, s)):
            class_of.setdefault(find(t), len(class_of))
    members: list[list[int]] = [[] for _ in class_of]
    for t in tops:
        members[class_of[find(t)]].append(t)

    names_a = set(a)
    for group in members:
        ref = m.valuation[group[0]] & names_a
        for t in group[1:]:
            if m.valuation[t] & names_a != ref:
                raise InternalInconsistency(
                    f"maximal worlds {m.label(group[0])} and {m.label(t)} disagree despite "
                    f"weak excluded middle along the orbit")

    kept = [v for v in bits(carrier) if not is_maximal(m, v)]
    index = {v: i for i, v in enumerate(kept)}
    base = len(kept)

    def image(x: int) -> int:
        return index[x] if x in index else base + class_of[find(x)]

    order = {(index[x], index[y]) for x, y in m.order if x in index and y in index}
    for x in kept:
        for t in maximal_worlds(m, x):
            order.add((index[x], image(t)))
    order |= {(base + c, base + c) for c in range(len(members))}
    new_succ = [image(succ[x]) for x in kept]
    for c, group in enumerate(members):
        targets = {image(succ[t]) for t in group}
        if len(targets) != 1 or min(targets) < base:
            raise InternalInconsistency(f"successors of merged class {c} are not one merged world")
        new_succ.append(targets.pop())
    val = [m.valuation[x] for x in kept] + [m.valuation[g[0]] for g in members]
    fresh = ["u"] if len(members) == 1 else [f"u{c}" for c in range(len(members))]
    out = FiniteModel(m.atoms, frozenset(order), tuple(val), tuple(new_succ),
                      _names_for(m, kept, fresh))
    report = validate(out)
    if "ITLp" not in report.logic_tags or report.depth > depth:
        raise InternalInconsistency(f"merged model fails re-validation: {sorted(report.logic_tags)}")
    pairs = {(x, image(x)) for x in bits(carrier)}
    return out, image(w), _check(BisimRelation(m, out, frozenset(pairs)), verify_witness)


def contract_to_tht(m: FiniteModel, w: int, verify_witness: bool = True,
                    successor_coherent: bool = True) -> tuple[ThtLasso, BisimRelation]:
    """Collapse the orbit of ``w`` onto a temporal here-and-there lasso.

    Each orbit state must see a unique maximal world and one shared
    valuation on every world strictly above it. By default a third
    condition is enforced as well: the successor of a world strictly above
    an orbit state lies strictly above the next orbit state, unless that
    next state is maximal. Without it the witness relation can break the
    successor clause; ``successor_coherent=False`` skips the check.
    """
    _require_persistent(m)
    path, _ = _orbit_upset(m, w)
    ob = orbit(m, w)
    succ = m.succ
    there = []
    for i, s in enumerate(path):
        tops = sorted(maximal_worlds(m, s))
        if len(tops) != 1:
            raise PreconditionError(f"instant {i}: world {m.label(s)} sees {len(tops)} "
                                    f"maximal worlds {[m.label(t) for t in tops]}")
        there.append(m.valuation[tops[0]])
        for v in m.strict_upset(s):
            if m.valuation[v] != there[i]:
                raise PreconditionError(f"instant {i}: world {m.label(v)} above {m.label(s)} has "
                                        f"valuation {sorted(m.valuation[v])}, "
                                        f"expected {sorted(there[i])}")
    if successor_coherent:
        for i, s in enumerate(path):
            nxt = path[(i + 1) if i + 1 < len(path) else ob.preperiod]
            if is_maximal(m, nxt):
                continue
            for v in m.strict_upset(s):
                if succ[v] == nxt:
                    raise PreconditionError(
                        f"instant {i}: successor of world {m.label(v)} above {m.label(s)} is the "
                        f"next orbit state {m.label(nxt)} itself")
    lasso = ThtLasso(m.atoms, ob.preperiod, ob.period,
                     tuple(m.valuation[s] for s in path), tuple(there))
    pairs = set()
    for i, s in enumerate(path):
        pairs.add((s, 2 * i))
        pairs |= {(v, 2 * i + 1) for v in m.strict_upset(s)}
        if is_maximal(m, s):
            pairs.add((s, 2 * i + 1))
    return lasso, _check(BisimRelation(m, lasso.model, frozenset(pairs)), verify_witness)


def extract_classical_trace(m: FiniteModel, w: int) -> ThtLasso:
    """The total lasso read off the orbit of the lowest-index maximal world above ``w``."""
    _require_persistent(m)
    v = min(maximal_worlds(m, w))
    ob = orbit(m, v)
    return ThtLasso.total(m.atoms, ob.preperiod, ob.period, [m.valuation[x] for x in ob.path])
