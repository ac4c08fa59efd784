"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import corpus  # noqa: E402
import oracles  # noqa: E402
from sample_models import forward_only, no_classical_model  # noqa: E402
from itlbench.bisim import invariance_harness, verify  # noqa: E402
from itlbench.constructions import (contract_to_ht, contract_to_tht, merge_maximals_prop,  # noqa: E402
                                    merge_maximals_temporal)
from itlbench.equilibrium import (completion_check_prop, ht_equilibrium_models,  # noqa: E402
                                  tel_equilibrium_models, tel_fixpoint_check)
from itlbench.formula import (Atom, bd_axiom, closure, hosoi_axiom, neg, parse,  # noqa: E402
                              random_formula)
from itlbench.kripke import (FiniteModel, frame_depth, frames, is_maximal, parse_logic,  # noqa: E402
                             validate)
from itlbench.safebeliefs import (belief_to_lasso, coincidence_harness, premise_horizon,  # noqa: E402
                                  temporal_conclusions, temporal_premises,
                                  temporal_safe_belief_check)
from itlbench.semantics import (bounded_consequence, extensions, frame_counterexample,  # noqa: E402
                                frame_valid, satisfies, validates_bd)
from itlbench.traces import (ThtLasso, canonical, enumerate_lassos, evaluate_lasso, ltl_consistent_bounded,  # noqa: E402
                             shapes, shapes_up_to)

RESULTS: dict[int, str] = {}
NOTES: list[str] = []


def record(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} [{num:2d}] {title}: {detail}"
    RESULTS[num] = line
    print(line)


def chain(n: int) -> FiniteModel:
    return FiniteModel.build([], [(i, i + 1) for i in range(n - 1)], [[]] * n)


def _atom_names(f) -> set[str]:
    return {x.name for x in closure(f) if isinstance(x, Atom)}


# ----------------------------------------------------------------- criteria

def criterion_1():
    m = forward_only()
    x, y, w = m.world("x"), m.world("y"), m.world("w")
    facts = [satisfies(m, x, parse("o p")), not satisfies(m, x, parse("p")),
             satisfies(m, y, parse("p")), not satisfies(m, y, parse("o p")),
             not satisfies(m, w, parse("(o p -> p) | (p -> o p)"))]
    r = validate(m)
    ok = all(facts) and r.forward_confluent and not r.backward_confluent
    record(1, "forward-only model facts", ok,
           f"{sum(facts)}/5 satisfaction facts, forward={r.forward_confluent}, "
           f"backward={r.backward_confluent}")
    return ok


def criterion_2():
    m = no_classical_model()
    w = m.world("w")
    gamma = [parse("~o p"), parse("~o ~p")]
    holds = all(satisfies(m, w, g) for g in gamma)
    sh = shapes_up_to(4)
    v = ltl_consistent_bounded(gamma, sh, alphabet=["p"])
    checked = 0
    oracle_models = 0
    for t in enumerate_lassos(["p"], sh, total_only=True):
        checked += 1
        if all(oracles.ltl_eval(list(t.T), t.prefix, 0, g) for g in gamma):
            oracle_models += 1
    ok = holds and not v.found and oracle_models == 0
    record(2, "theory with a model but no classical trace", ok,
           f"holds at w={holds}, total lassos checked={checked}, LTL models={oracle_models}")
    return ok


def criterion_3():
    bad = 0
    total = 0
    for fr in frames(parse_logic("INT"), 4):
        d = frame_depth(fr.up)
        for n in (1, 2, 3):
            total += 1
            if validates_bd(fr, n) != (d <= n):
                bad += 1
    ok = bad == 0 and total == 24 * 3
    record(3, "depth axiom holds exactly on frames of bounded depth", ok,
           f"{total} frame/bound pairs, {bad} discrepancies")
    return ok


def criterion_4():
    h = hosoi_axiom("p", "q")
    ht = chain(2)
    valid_ht = frame_valid(ht, h)
    cm = frame_counterexample(chain(3), h)
    refuted3 = cm is not None and not satisfies(cm[0], cm[1], h)
    cm1 = frame_counterexample(chain(2), bd_axiom(1))
    refuted_bd1 = cm1 is not None and not satisfies(cm1[0], cm1[1], bd_axiom(1))
    ok = valid_ht and refuted3 and refuted_bd1
    record(4, "two-world axiom", ok,
           f"valid on 2-chain={valid_ht}, refuted on 3-chain={refuted3}, "
           f"depth-1 axiom refuted on 2-chain={refuted_bd1}")
    return ok


def criterion_5():
    fs = [parse("(o p -> o q) -> o (p -> q)"), parse("(<> p -> [] q) -> [] (p -> q)")]
    pf = frames(parse_logic("ITLp"), 4)
    valid = all(frame_valid(fr, f) for fr in pf for f in fs)
    found = []
    for f in fs:
        v = bounded_consequence("ITLe", [], [f], max_worlds=4)
        if v.refuted and not satisfies(v.witness, v.point, f):
            found.append((f, v.witness.n))
    ok = valid and bool(found)
    record(5, "persistence axioms", ok,
           f"valid on all {len(pf)} persistent frames={valid}, "
           f"non-persistent countermodels for {len(found)}/2 formulas "
           f"(sizes {[n for _, n in found]})")
    return ok


def criterion_6():
    pf = frames(parse_logic("ITLp"), 4)
    bad = sum(1 for fr in pf for w in range(fr.n)
              if fr.up[w] == 1 << w and fr.up[fr.succ[w]] != 1 << fr.succ[w])
    m = forward_only()
    y = m.world("y")
    violation = is_maximal(m, y) and not is_maximal(m, m.succ[y]) and m.label(m.succ[y]) == "w"
    ok = bad == 0 and violation
    record(6, "successors of maximal worlds are maximal", ok,
           f"{len(pf)} persistent frames, {bad} violations; forward-only violation at y={violation}")
    return ok


CORPUS_SIZE = 100
PROBE_SIZE = 50


def criterion_7():
    rng = random.Random(2024)
    temporal_probe = [random_formula(rng, ["p", "q"], 4) for _ in range(PROBE_SIZE)]
    prop_probe = [random_formula(rng, ["p", "q"], 4, temporal=False) for _ in range(PROBE_SIZE)]
    stats = {}
    failures = 0
    for kind in ("merge", "contract", "merge-temporal", "contract-temporal"):
        cases = corpus.generate(kind, CORPUS_SIZE, seed=7)
        pairs = 0
        for case in cases:
            m, w = case.model, case.world
            assert m.n <= corpus.MAX_WORLDS and len(m.atoms) <= 2
            if kind == "merge":
                _, _, rel = merge_maximals_prop(m, w, verify_witness=False)
            elif kind == "contract":
                _, rel = contract_to_ht(m, w, verify_witness=False)
            elif kind == "merge-temporal":
                _, _, rel = merge_maximals_temporal(m, w, verify_witness=False)
            else:
                _, rel = contract_to_tht(m, w, verify_witness=False)
            if not verify(rel):
                failures += 1
                continue
            base = temporal_probe if kind.endswith("temporal") else prop_probe
            probe = [f for f in base if _atom_names(f) <= set(m.atoms)]
            if len(m.atoms) == 2:
                assert len(probe) == PROBE_SIZE
            for a, b in sorted(rel.pairs):
                pairs += 1
                if not invariance_harness(rel, a, b, probe):
                    failures += 1
        stats[kind] = (len(cases), pairs)
    drawn, incoherent = corpus.unguarded_contractions(1000, seed=7)
    broken = sum(1 for c in incoherent
                 if not verify(contract_to_tht(c.model, c.world, verify_witness=False,
                                               successor_coherent=False)[1]))
    NOTES.append(f"note [ 7] {len(incoherent)} of {drawn} persistent models meeting the per-instant "
                 f"contraction conditions fail successor coherence; the unguarded witness fails "
                 f"verification on {broken} of them")
    ok = failures == 0 and all(n >= CORPUS_SIZE for n, _ in stats.values())
    record(7, "construction witnesses verify and preserve formulas", ok,
           ", ".join(f"{k}: {n} models/{p} pairs" for k, (n, p) in stats.items())
           + f", {PROBE_SIZE} probe formulas, {failures} violations")
    return ok


PROP_SUITE = ["", "~p -> q", "p | q", "~p", "p | ~p -> p"]


def criterion_8():
    atoms = ["p", "q"]
    mismatches = []
    for text in PROP_SUITE:
        gamma = [parse(text)] if text else []
        eq = set(ht_equilibrium_models(gamma, atoms).models)
        rep = coincidence_harness(gamma, atoms, ["HT", "INT"], max_worlds=4)
        ht_safe = set(rep.accepted["HT"])
        int_safe = set(rep.accepted["INT"])
        cands = [frozenset(c) for c in ([], ["p"], ["q"], ["p", "q"])]
        completion = {c for c in cands if completion_check_prop(gamma, atoms, c)}
        if not (eq == ht_safe == completion == int_safe):
            mismatches.append(text or "(empty)")
    ok = not mismatches
    record(8, "propositional characterizations coincide", ok,
           f"{len(PROP_SUITE)} theories over {{p,q}}, INT bound 4 worlds, "
           f"mismatches: {mismatches or 'none'}")
    return ok


TEMPORAL_SUITE = [("", ["p"]), ("", ["p", "q"]), ("[] p", ["p"]), ("[] p", ["p", "q"]),
                  ("[](~p -> q)", ["p", "q"])]


def criterion_9():
    sh = shapes(1, 2)
    first_half = []
    second_half = []
    replayed = 0
    for text, atoms in TEMPORAL_SUITE:
        gamma = [parse(text)] if text else []
        tel = {(t.prefix, t.loop, t.T) for t in tel_equilibrium_models(gamma, atoms, sh).models}
        rep = coincidence_harness(gamma, atoms, ["THT", "ITLbd(2)"], sh, max_worlds=4)
        tht = {(b.prefix, b.loop, b.members) for b in rep.accepted["THT"]}
        fix = set()
        for t in enumerate_lassos(atoms, sh, total_only=True):
            if tel_fixpoint_check(gamma, atoms, t, shape_set=sh):
                c = canonical(t)
                fix.add((c.prefix, c.loop, c.T))
        if not tel == tht == fix:
            first_half.append(f"{text or '(empty)'}/{''.join(atoms)}")
        for b in rep.differences[("THT", "ITLbd(2)")]:
            second_half.append(b)
            # the here-and-there countermodel is itself a depth-2 persistent model
            v = temporal_safe_belief_check("THT", gamma, atoms, b, sh)
            lasso = v.entailment.witness
            m = lasso.model
            h = premise_horizon(b, sh)
            ext = extensions(m, temporal_premises(gamma, b, h) + temporal_conclusions(b, h))
            if ("ITLbd(2)" in validate(m).logic_tags
                    and all(ext[f] & 1 for f in temporal_premises(gamma, b, h))
                    and not all(ext[f] & 1 for f in temporal_conclusions(b, h))):
                replayed += 1
    if second_half:
        sizes = sorted({2 * belief_to_lasso(b).horizon for b in second_half})
        NOTES.append(f"note [ 9] each of the {len(second_half)} depth-2 acceptances missing at "
                     f"THT is refuted by a persistent depth-2 model with {sizes} worlds "
                     f"({replayed} replayed); the 4-world bound cannot see them")
    ok = not first_half and not second_half
    record(9, "temporal characterizations coincide", ok,
           f"shapes prefix<=1 loop<=2; equilibria = THT safe beliefs = fixpoint: "
           f"{'yes' if not first_half else 'no ' + str(first_half)}; depth-2 vs THT at <=4 "
           f"worlds: {len(second_half)} mismatches")
    return ok


def _random_lassos(count: int, seed: int, total: bool):
    rng = random.Random(seed)
    for _ in range(count):
        atoms = ["p", "q"]
        prefix, loop, here, there = oracles.random_lasso_states(rng, atoms, total=total)
        yield rng, ThtLasso(tuple(atoms), prefix, loop, tuple(here), tuple(there))


def criterion_10():
    violations = 0
    checks = 0
    for rng, t in _random_lassos(1000, 10, total=False):
        fs = [random_formula(rng, ["p", "q"], 4) for _ in range(3)]
        ext = evaluate_lasso(t, fs + [neg(f) for f in fs])
        for f in fs:
            for i in range(t.horizon):
                here = ext[f] >> 2 * i & 1
                there = ext[f] >> 2 * i + 1 & 1
                neg_here = ext[neg(f)] >> 2 * i & 1
                checks += 1
                if neg_here != (not there) or (here and not there):
                    violations += 1
    ok = violations == 0
    record(10, "negation reads the there-layer and truth persists upward", ok,
           f"1000 lassos, {checks} instant/formula checks, {violations} violations")
    return ok


def criterion_11():
    mismatches = 0
    checks = 0
    for rng, t in _random_lassos(500, 11, total=True):
        fs = [random_formula(rng, ["p", "q"], 4) for _ in range(4)]
        ext = evaluate_lasso(t, fs)
        for f in fs:
            for i in range(t.horizon):
                checks += 1
                if bool(ext[f] >> 2 * i & 1) != oracles.ltl_eval(list(t.T), t.prefix, i, f):
                    mismatches += 1
    ok = mismatches == 0
    record(11, "total lassos evaluate classically", ok,
           f"500 total lassos, {checks} checks against an independent evaluator, "
           f"{mismatches} mismatches")
    return ok


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 12)])
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for note in NOTES:
        print(note)
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
