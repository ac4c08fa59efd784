import random

import pytest

import corpus
from sample_models import (diamond_model, fan_merged_expected, fan_model, forward_only,
                     incoherent_contraction_model, staged_contraction_model, staged_merge_model)
from itlbench.bisim import invariance_harness, verify
from itlbench.constructions import (InternalInconsistency, PreconditionError, contract_to_ht,
                                    contract_to_tht, extract_classical_trace, merge_maximals_prop,
                                    merge_maximals_temporal, weak_em_holds)
from itlbench.formula import Atom, always, parse, random_formula
from itlbench.kripke import FiniteModel, maximal_worlds, validate
from itlbench.semantics import extensions, satisfies
from itlbench.traces import is_total, tht_satisfies


def probe(seed, atoms, temporal, n=50):
    rng = random.Random(seed)
    return [random_formula(rng, list(atoms), 4, temporal=temporal) for _ in range(n)]


def test_weak_em():
    m = fan_model()
    assert weak_em_holds(m, m.world("w"))
    m2 = FiniteModel.build(["p"], [(0, 1), (0, 2)], [[], ["p"], []])
    assert not weak_em_holds(m2, 0)
    assert weak_em_holds(m2, 1)


def test_fan_merge():
    m = fan_model()
    out, root, rel = merge_maximals_prop(m, m.world("w"))
    assert out == fan_merged_expected()
    assert out.label(root) == "w"
    assert verify(rel)
    assert invariance_harness(rel, m.world("w"), root, probe(1, "pqr", False))
    assert {out.label(b) for a, b in rel.pairs if m.label(a).startswith("u")} == {"u"}


def test_merge_precondition():
    m = FiniteModel.build(["p"], [(0, 1), (0, 2)], [[], ["p"], []])
    with pytest.raises(PreconditionError, match="world 0"):
        merge_maximals_prop(m, 0)
    with pytest.raises(PreconditionError):
        merge_maximals_prop(forward_only(), 0)


def test_merge_at_maximal_world():
    m = fan_model()
    out, root, rel = merge_maximals_prop(m, m.world("u2"))
    assert out.n == 1 and root == 0 and verify(rel)


def test_diamond_contraction():
    m = diamond_model()
    ht, rel = contract_to_ht(m, m.world("w"))
    assert ht.n == 2
    assert ht.valuation == (frozenset(), frozenset({"p"}))
    assert verify(rel)
    assert invariance_harness(rel, m.world("w"), 0, probe(2, "p", False))


def test_contraction_preconditions():
    with pytest.raises(PreconditionError, match="maximal worlds"):
        contract_to_ht(fan_model(), 0)
    m = FiniteModel.build(["p"], [(0, 1), (1, 2)], [[], [], ["p"]])
    with pytest.raises(PreconditionError, match="valuation"):
        contract_to_ht(m, 0)


def test_contraction_at_maximal_world():
    m = diamond_model()
    ht, rel = contract_to_ht(m, m.world("u"))
    assert (m.world("u"), 0) in rel and (m.world("u"), 1) in rel
    assert verify(rel)


def test_staged_merge():
    m = staged_merge_model()
    out, root, rel = merge_maximals_temporal(m, m.world("w0"))
    assert out.n == 12
    assert sorted(n for n in out.names if n.startswith("u")) == ["u0", "u1", "u2"]
    assert "ITLp" in validate(out).logic_tags
    assert verify(rel)
    assert invariance_harness(rel, m.world("w0"), root, probe(3, "pq", True))


def test_temporal_merge_needs_persistence_and_weak_em():
    with pytest.raises(PreconditionError, match="persistent"):
        merge_maximals_temporal(forward_only(), 0)
    m = FiniteModel.build(["p"], [(0, 1), (0, 2)], [[], ["p"], []], [0, 1, 2])
    with pytest.raises(PreconditionError, match="~p"):
        merge_maximals_temporal(m, 0)
    with pytest.raises(PreconditionError, match="alphabet"):
        merge_maximals_temporal(staged_merge_model(), 0, ["zz"])


def test_staged_contraction():
    m = staged_contraction_model()
    lasso, rel = contract_to_tht(m, m.world("w0"))
    assert lasso.shape == (2, 1)
    assert lasso.T == (frozenset({"p"}), frozenset({"p", "q"}), frozenset({"q"}))
    assert lasso.H == (frozenset(), frozenset({"q"}), frozenset())
    assert verify(rel)
    for f in probe(4, "pq", True):
        assert satisfies(m, m.world("w0"), f) == tht_satisfies(lasso, 0, 0, f)


def test_incoherent_contraction_rejected():
    m = incoherent_contraction_model()
    s0 = m.world("s0")
    with pytest.raises(PreconditionError, match="successor"):
        contract_to_tht(m, s0)
    # without the extra condition the naive witness fails the successor clause
    with pytest.raises(InternalInconsistency, match="C5"):
        contract_to_tht(m, s0, successor_coherent=False)
    lasso, rel = contract_to_tht(m, s0, verify_witness=False, successor_coherent=False)
    assert verify(rel).violation.condition == "C5"
    # and the lasso really disagrees with the model: v sees q but steps to s1
    f = parse("q -> o p")
    assert not satisfies(m, s0, f)
    assert tht_satisfies(lasso, 0, 0, f)


def test_tht_contraction_preconditions():
    with pytest.raises(PreconditionError, match="instant 0"):
        contract_to_tht(staged_merge_model(), 0)


def test_classical_trace_extraction():
    m = staged_merge_model()
    w = m.world("w0")
    t = extract_classical_trace(m, w)
    assert is_total(t)
    top = min(maximal_worlds(m, w))
    assert t.T[0] == m.valuation[top]
    for f in probe(5, "pq", True):
        if satisfies(m, w, f):
            assert tht_satisfies(t, 0, 0, f)


def _check_case(case, fs):
    m, w = case.model, case.world
    if case.kind == "merge":
        out, root, rel = merge_maximals_prop(m, w, verify_witness=False)
    elif case.kind == "contract":
        out, rel = contract_to_ht(m, w, verify_witness=False)
    elif case.kind == "merge-temporal":
        out, root, rel = merge_maximals_temporal(m, w, verify_witness=False)
    else:
        out, rel = contract_to_tht(m, w, verify_witness=False)
    assert verify(rel), (case, verify(rel).violation)
    for a, b in sorted(rel.pairs):
        assert invariance_harness(rel, a, b, fs)


@pytest.mark.parametrize("kind,temporal", [("merge", False), ("contract", False),
                                           ("merge-temporal", True), ("contract-temporal", True)])
def test_random_corpus(kind, temporal):
    fs = probe(6, "pq", temporal, 20)
    for case in corpus.generate(kind, 30, seed=11):
        atoms = set(case.model.atoms)
        _check_case(case, [f for f in fs if {a.name for a in _atoms(f)} <= atoms])


def _atoms(f):
    from itlbench.formula import closure
    return [x for x in closure(f) if isinstance(x, Atom)]


def test_random_classical_extraction():
    fs = probe(7, "pq", True, 30)
    for case in corpus.generate("merge-temporal", 30, seed=12):
        m, w = case.model, case.world
        t = extract_classical_trace(m, w)
        usable = [f for f in fs if {a.name for a in _atoms(f)} <= set(m.atoms)]
        ext = extensions(m, usable)
        for f in usable:
            if ext[f] >> w & 1:
                assert tht_satisfies(t, 0, 0, f)


def test_always_weak_em_is_checked_along_orbit():
    m = staged_merge_model()
    assert satisfies(m, m.world("w0"), always(parse("~p | ~~p")))
