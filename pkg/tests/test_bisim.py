import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import models
from sample_models import fan_merged_expected, fan_model, forward_only, staged_merge_model
from itlbench.bisim import (BisimRelation, UnverifiedRelationError, default_k_bound,
                            greatest_prop_bisim, invariance_harness, load_relation,
                            relation_to_json, verify, verify_prop_bisim, verify_temporal_bisim)
from itlbench.formula import Atom, random_formula
from itlbench.kripke import FiniteModel, save_model


def identity(m):
    return BisimRelation(m, m, frozenset((w, w) for w in range(m.n)))


def probe(seed, atoms, n=30, temporal=True):
    rng = random.Random(seed)
    return [random_formula(rng, list(atoms), 4, temporal=temporal) for _ in range(n)]


@given(models("ITLe", 4))
def test_identity_is_temporal_bisimulation(m):
    r = identity(m)
    assert verify(r)
    assert r.passed == ("C1", "C2", "C3", "C5", "C6", "C7", "C8", "C9")


@given(models("INT", 4))
def test_identity_is_prop_bisimulation(m):
    assert verify(identity(m))


def test_valuation_violation():
    m = fan_model()
    r = BisimRelation(m, m, frozenset({(0, 1)}))
    c = verify_prop_bisim(r)
    assert not c and c.violation.condition == "C1" and c.violation.pair == (0, 1)
    assert r.passed == ()


def test_forth_violation():
    m = fan_model()
    r = BisimRelation(m, m, frozenset({(0, 0)}))
    c = verify(r)
    assert c.violation.condition == "C2"


def test_successor_violation():
    # two worlds swapping under succ; relating (0, 0) requires (1, 1)
    m = FiniteModel.build(["p"], [], [[], []], [1, 0])
    r = BisimRelation(m, m, frozenset({(0, 1), (1, 0), (0, 0)}))
    c = verify(r)
    assert c.violation.condition == "C5" and c.violation.pair == (0, 0)
    assert verify(identity(staged_merge_model()))


def test_greatest_prop_bisim_on_fan():
    from itlbench.constructions import merge_maximals_prop
    m = fan_model()
    merged, root, witness = merge_maximals_prop(m, m.world("w"))
    g = greatest_prop_bisim(m, merged)
    assert g.pairs == witness.pairs
    assert verify(g)
    assert merged == fan_merged_expected()


def test_greatest_prop_bisim_is_locally_maximal():
    rng = random.Random(4)
    from itlbench.kripke import enumerate_models
    pool = list(enumerate_models("INT", ["p"], 3))
    for _ in range(40):
        m1, m2 = rng.choice(pool), rng.choice(pool)
        g = greatest_prop_bisim(m1, m2)
        assert verify(g)
        for pair in itertools.product(range(m1.n), range(m2.n)):
            if pair not in g:
                assert not verify(BisimRelation(m1, m2, g.pairs | {pair}))


def _relations(m1, m2, rng, count):
    compatible = [(a, b) for a in range(m1.n) for b in range(m2.n)
                  if m1.valuation[a] == m2.valuation[b]]
    for _ in range(count):
        yield BisimRelation(m1, m2, frozenset(x for x in compatible if rng.random() < 0.7))


def test_verified_temporal_relations_preserve_formulas():
    rng = random.Random(8)
    from itlbench.kripke import enumerate_models
    pool = list(enumerate_models("ITLp", ["p"], 3))
    fs = probe(1, ["p"], 40)
    passed = 0
    for _ in range(400):
        m1, m2 = rng.choice(pool), rng.choice(pool)
        for r in _relations(m1, m2, rng, 3):
            if r.pairs and verify(r):
                passed += 1
                a, b = min(r.pairs)
                assert invariance_harness(r, a, b, fs)
    assert passed >= 50


def test_verification_monotone_in_k_bound():
    rng = random.Random(9)
    from itlbench.kripke import enumerate_models
    pool = list(enumerate_models("ITLe", ["p"], 3))
    for _ in range(300):
        m1, m2 = rng.choice(pool), rng.choice(pool)
        for r in _relations(m1, m2, rng, 2):
            results = [bool(verify_temporal_bisim(r, k)) for k in range(1, 8)]
            # passing at a bound implies passing at every smaller bound
            for i in range(len(results)):
                if results[i]:
                    assert all(results[:i])


def test_default_k_bound():
    m = forward_only()
    x = m.world("x")
    assert default_k_bound(identity(m), x, x) == 9


def test_harness_rejects_bad_inputs():
    m = fan_model()
    bad = BisimRelation(m, m, frozenset({(0, 0)}))
    with pytest.raises(UnverifiedRelationError):
        invariance_harness(bad, 0, 0, [Atom("p")])
    good = identity(m)
    with pytest.raises(UnverifiedRelationError):
        invariance_harness(good, 0, 1, [Atom("p")])
    with pytest.raises(ValueError):
        invariance_harness(good, 0, 0, [Atom("zz")])


def test_harness_detects_difference_on_corrupted_relation():
    m = fan_model()
    r = identity(m)
    corrupt = BisimRelation(m, m, r.pairs | {(1, 3)})
    assert not verify(corrupt)


def test_index_validation():
    m = fan_model()
    with pytest.raises(IndexError):
        BisimRelation(m, m, frozenset({(0, 99)}))


def test_relation_file_round_trip(tmp_path):
    m = staged_merge_model()
    save_model(m, str(tmp_path / "a.json"))
    r = identity(m)
    (tmp_path / "r.json").write_text(json.dumps(relation_to_json(r, "a.json", "a.json")))
    loaded = load_relation(str(tmp_path / "r.json"))
    assert loaded.pairs == r.pairs and loaded.left == m


@settings(max_examples=60)
@given(models("ITLp", 3, atoms=("p",)), models("ITLp", 3, atoms=("p",)), st.integers(0, 1000))
def test_random_verified_relations_sound(m1, m2, seed):
    rng = random.Random(seed)
    fs = probe(seed, ["p"], 15)
    for r in _relations(m1, m2, rng, 4):
        if r.pairs and verify(r):
            for a, b in r.pairs:
                assert invariance_harness(r, a, b, fs)
