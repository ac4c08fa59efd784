import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import formulas
from itlbench.formula import TOP, Atom, ParseError, Next, Or, neg, parse, random_formula
from itlbench.equilibrium import (completion_check_prop, hypothesis_horizon,
                                  ht_equilibrium_models, minimality_shapes, parse_theory,
                                  smaller_model, tel_equilibrium_models, tel_fixpoint_check,
                                  theory_of)
from itlbench.traces import ThtLasso, enumerate_lassos, shapes

p, q = Atom("p"), Atom("q")

SUITE = ["", "~p -> q", "p | q", "~p", "p | ~p -> p"]


def theory(text):
    return [parse(text)] if text else []


def test_parse_theory_comments_and_declarations():
    th = parse_theory("@atoms r\n# a comment\np -> q   # trailing\n#t\n\n~#f # x\n")
    assert th.formulas == (parse("p -> q"), TOP, neg(parse("#f")))
    assert th.declared == ("r",)
    assert th.alphabet == ("r", "p", "q")


def test_parse_theory_error_offsets_are_global():
    with pytest.raises(ParseError) as exc:
        parse_theory("p\nq $ r\n")
    assert exc.value.offset == 4


def test_parse_theory_rejects_bad_declaration():
    with pytest.raises(ValueError):
        parse_theory("@atoms P\n")


def test_ht_equilibrium_examples():
    got = {t: ht_equilibrium_models(theory(t), ["p", "q"]).models for t in SUITE}
    assert got == {"": (frozenset(),), "~p -> q": (frozenset({"q"}),),
                   "p | q": (frozenset({"p"}), frozenset({"q"})), "~p": (frozenset(),),
                   "p | ~p -> p": ()}


@pytest.mark.parametrize("text", SUITE)
def test_ht_equilibria_match_brute_force(text):
    assert set(ht_equilibrium_models(theory(text), ["p", "q"]).models) == \
        oracles.naive_ht_equilibria(theory(text), ["p", "q"])


@given(st.lists(formulas(temporal=False, max_leaves=6), max_size=3))
def test_ht_equilibria_random(gamma):
    assert set(ht_equilibrium_models(gamma, ["p", "q"]).models) == \
        oracles.naive_ht_equilibria(gamma, ["p", "q"])


def test_temporal_theory_rejected():
    with pytest.raises(ValueError):
        ht_equilibrium_models([Next(p)], ["p"])


@pytest.mark.parametrize("text", SUITE)
def test_completion_check_matches_equilibria(text):
    eq = set(ht_equilibrium_models(theory(text), ["p", "q"]).models)
    for bits in range(4):
        there = frozenset(a for i, a in enumerate("pq") if bits >> i & 1)
        assert completion_check_prop(theory(text), ["p", "q"], there) == (there in eq)


@settings(max_examples=40)
@given(st.lists(formulas(temporal=False, max_leaves=6), min_size=1, max_size=2))
def test_completion_check_random(gamma):
    eq = set(ht_equilibrium_models(gamma, ["p", "q"]).models)
    for bits in range(4):
        there = frozenset(a for i, a in enumerate("pq") if bits >> i & 1)
        assert completion_check_prop(gamma, ["p", "q"], there) == (there in eq)


def _keys(result):
    return {oracles._trace_key(t.prefix, list(t.T)) for t in result.models}


def test_eventually_frozen():
    res = tel_equilibrium_models([parse("<> p")], ["p"], shapes(1, 2))
    got = [(t.prefix, t.loop, [sorted(s) for s in t.T]) for t in res.models]
    assert got == [(0, 2, [[], ["p"]]), (1, 1, [["p"], []]), (1, 2, [[], [], ["p"]])]
    assert res.search_bounds["shapes"] == [[0, 1], [0, 2], [1, 1], [1, 2]]


def test_widening_minimality_shapes_drops_bound_artifacts():
    res = tel_equilibrium_models([parse("<> p")], ["p"], shapes(1, 2), extra_prefix=2)
    got = [(t.prefix, t.loop, [sorted(s) for s in t.T]) for t in res.models]
    assert got == [(1, 1, [["p"], []])]
    assert minimality_shapes([(0, 1)], 1, 2) == ((0, 1), (0, 2), (1, 1), (1, 2))


@pytest.mark.parametrize("text,atoms", [
    ("", ["p"]), ("[] p", ["p"]), ("[](~p -> q)", ["p", "q"]), ("<> p", ["p"]),
    ("p | q", ["p", "q"]), ("[](p -> o p) & (p | ~p)", ["p"]), ("o p -> p", ["p"]),
])
def test_tel_equilibria_match_brute_force(text, atoms):
    sh = shapes(1, 2)
    res = tel_equilibrium_models(theory(text), atoms, sh)
    assert _keys(res) == oracles.naive_tel_equilibria(theory(text), atoms, sh)


def test_tel_equilibria_random():
    rng = random.Random(17)
    sh = shapes(1, 2)
    for _ in range(25):
        gamma = [random_formula(rng, ["p"], 3)]
        assert _keys(tel_equilibrium_models(gamma, ["p"], sh)) == \
            oracles.naive_tel_equilibria(gamma, ["p"], sh)


def test_smaller_model():
    t = ThtLasso.total(["p"], 0, 1, [["p"]])
    assert smaller_model([], t, [(0, 1)]) is not None
    assert smaller_model([parse("[] p")], t, [(0, 1), (1, 1)]) is None


@pytest.mark.parametrize("text,atoms", [("", ["p"]), ("[] p", ["p"]), ("[](~p -> q)", ["p", "q"])])
def test_fixpoint_check_matches_equilibria(text, atoms):
    sh = shapes(1, 2)
    eq = _keys(tel_equilibrium_models(theory(text), atoms, sh))
    for t in enumerate_lassos(atoms, sh, total_only=True):
        key = oracles._trace_key(t.prefix, list(t.T))
        assert bool(tel_fixpoint_check(theory(text), atoms, t, shape_set=sh)) == (key in eq)


def test_fixpoint_result_reports_bounds_and_mismatch():
    t = ThtLasso.total(["p"], 0, 1, [["p"]])
    res = tel_fixpoint_check([], ["p"], t, shape_set=[(0, 1), (1, 2)])
    assert not res
    assert res.mismatch is not None
    assert res.bounds["hypothesis_horizon"] == hypothesis_horizon(t, [(0, 1), (1, 2)]) == 3
    with pytest.raises(ValueError):
        tel_fixpoint_check([], ["p"], ThtLasso(("p",), 0, 1, ([],), (["p"],)))


def test_theory_of():
    th = theory_of(frozenset({"p"}), [p, q, Or(p, q), neg(q)], ["p", "q"])
    assert set(th.holds) == {p, Or(p, q), neg(q)}
    t = ThtLasso.total(["p"], 0, 2, [[], ["p"]])
    th = theory_of(t, [p, Next(p), parse("<> p"), parse("[] p")])
    assert set(th.holds) == {Next(p), parse("<> p")}
    with pytest.raises(ValueError):
        theory_of(ThtLasso(("p",), 0, 1, ([],), (["p"],)), [p])
