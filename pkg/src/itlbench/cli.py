"""Command-line front end.

Exit status: 0 when the property holds or models are found, 1 when it is
refuted or nothing is found, 2 when the answer only holds up to the search
bound, and 64 or above for usage, input and budget errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from . import bisim, constructions, equilibrium, kripke, safebeliefs, semantics, traces
from .formula import Formula, ParseError, atoms_of, parse, show

SCHEMA_VERSION = 1

EXIT_HOLDS = 0
EXIT_REFUTED = 1
EXIT_BOUNDED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66
EXIT_CANTCREATE = 73
EXIT_BUDGET = 75


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        raise UsageError(message)


class Report:
    def __init__(self, cmd: str, verdict: str, status: int, bounds: dict | None = None,
                 witness: Any = None, lines: list[str] | None = None):
        self.cmd = cmd
        self.verdict = verdict
        self.status = status
        self.bounds = bounds or {}
        self.witness = witness
        self.lines = lines or []

    def envelope(self) -> dict:
        return {"version": SCHEMA_VERSION, "cmd": self.cmd, "verdict": self.verdict,
                "bounds": self.bounds, "witness": self.witness}


# ------------------------------------------------------------------ helpers

def _theory(path: str) -> equilibrium.Theory:
    return equilibrium.load_theory(path)


def _formulas_arg(text: str) -> list[Formula]:
    """A theory file if ``text`` names one, otherwise a single formula."""
    if os.path.isfile(text):
        return list(_theory(text).formulas)
    return [parse(text)]


def _atom_list(text: str | None) -> list[str]:
    if not text:
        return []
    return [a for a in text.replace(",", " ").split() if a]


def _shape_set(args: argparse.Namespace) -> tuple[traces.Shape, ...]:
    return traces.shapes(args.prefix, args.loop)


def _model_json(m: kripke.FiniteModel) -> dict:
    return kripke.model_to_json(m)


def _write_json(path: str | None, data: dict) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)


def _exact(logic: kripke.LogicClass, max_worlds: int) -> bool:
    """Whether bounded consequence at this bound is a decision procedure."""
    return ((logic.kind == "HT" and max_worlds >= 2)
            or (logic.kind == "BD" and logic.n == 1 and max_worlds >= 1))


def _lasso_text(t: traces.ThtLasso) -> str:
    def fmt(s: frozenset[str]) -> str:
        return "{" + ",".join(sorted(s)) + "}"
    states = []
    for i in range(t.horizon):
        cell = fmt(t.T[i]) if t.H[i] == t.T[i] else f"{fmt(t.H[i])}/{fmt(t.T[i])}"
        states.append(("(" if i == t.prefix else "") + cell)
    return " ".join(states) + ")^w"


def _belief_text(b: safebeliefs.TemporalBeliefSet) -> str:
    return _lasso_text(safebeliefs.belief_to_lasso(b))


def _verdict_witness(v: semantics.Verdict) -> Any:
    if v.witness is None:
        return None
    w = v.witness
    data = traces.lasso_to_json(w) if isinstance(w, traces.ThtLasso) else _model_json(w)
    out = {"model": data, "point": v.point}
    if v.failed is not None:
        out["failed"] = show(v.failed)
    return out


# ----------------------------------------------------------------- commands

def cmd_parse(args: argparse.Namespace) -> Report:
    th = _theory(args.file)
    shown = [show(f) for f in th.formulas]
    return Report("parse", "ok", EXIT_HOLDS, {"alphabet": list(th.alphabet)},
                  {"formulas": shown}, shown)


def cmd_validate(args: argparse.Namespace) -> Report:
    m = kripke.load_model(args.model)
    rep = kripke.validate(m).as_dict()
    ok = rep["is_partial_order"] and rep["monotone"]
    lines = [f"{k}: {json.dumps(v)}" for k, v in rep.items()]
    return Report("validate", "valid-model" if ok else "invalid-model",
                  EXIT_HOLDS if ok else EXIT_REFUTED, {}, rep, lines)


def cmd_check(args: argparse.Namespace) -> Report:
    m = kripke.load_model(args.model)
    w = m.world(args.world)
    f = parse(args.formula)
    holds = semantics.satisfies(m, w, f)
    return Report("check", "true" if holds else "false", EXIT_HOLDS if holds else EXIT_REFUTED,
                  {}, {"world": m.label(w), "formula": show(f)}, [str(holds).lower()])


def cmd_frame_valid(args: argparse.Namespace) -> Report:
    m = kripke.load_model(args.model)
    f = parse(args.formula)
    hit = semantics.frame_counterexample(m, f, args.budget)
    if hit is None:
        return Report("frame-valid", "valid", EXIT_HOLDS, {"exhaustive": True}, None, ["valid"])
    cm, w = hit
    return Report("frame-valid", "refuted", EXIT_REFUTED, {"exhaustive": True},
                  {"model": _model_json(cm), "point": w},
                  [f"refuted at world {m.label(w)} with valuation "
                   f"{[sorted(v) for v in cm.valuation]}"])


def cmd_entail(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    goals = _formulas_arg(args.goals)
    logic = kripke.parse_logic(args.logic)
    alphabet = sorted(set(th.alphabet) | atoms_of(goals))
    if logic.kind == "THT":
        shape_set = traces.shapes_up_to(args.bound)
        v = traces.tht_bounded_entails(th.formulas, goals, shape_set, alphabet,
                                       budget=args.budget)
        exact = False
    else:
        v = semantics.bounded_consequence(logic, th.formulas, goals, args.bound, alphabet,
                                          args.budget)
        exact = _exact(logic, args.bound)
    if v.refuted:
        return Report("entail", "refuted", EXIT_REFUTED, v.bounds, _verdict_witness(v),
                      [f"refuted: {show(v.failed)} fails at point {v.point}"])
    if exact:
        return Report("entail", "entailed", EXIT_HOLDS, v.bounds, None, ["entailed"])
    return Report("entail", v.outcome.value, EXIT_BOUNDED, v.bounds, None,
                  [f"no countermodel up to bound {args.bound}"])


def cmd_tel_solve(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    res = equilibrium.tel_equilibrium_models(th.formulas, th.alphabet, _shape_set(args),
                                             args.extra_prefix, args.loop_multiplier)
    bounds = {"search": res.search_bounds, "minimality": res.minimality_bounds}
    wit = [traces.lasso_to_json(t) for t in res.models]
    lines = [_lasso_text(t) for t in res.models]
    if res.models:
        return Report("tel-solve", "models-found", EXIT_HOLDS, bounds, wit, lines)
    return Report("tel-solve", "no-model-up-to-bound", EXIT_BOUNDED, bounds, wit,
                  ["no equilibrium model up to the bound"])


def cmd_eq_solve(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    res = equilibrium.ht_equilibrium_models(th.formulas, th.alphabet)
    wit = [sorted(m) for m in res.models]
    lines = ["{" + ",".join(m) + "}" for m in wit]
    if res.models:
        return Report("eq-solve", "models-found", EXIT_HOLDS, res.search_bounds, wit, lines)
    return Report("eq-solve", "no-model", EXIT_REFUTED, res.search_bounds, wit,
                  ["no equilibrium model"])


def cmd_completion_check(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    there = _atom_list(args.there)
    alphabet = sorted(set(th.alphabet) | set(there))
    ok = equilibrium.completion_check_prop(th.formulas, alphabet, there)
    bounds = {"alphabet": alphabet, "exact": True}
    return Report("completion-check", "holds" if ok else "fails",
                  EXIT_HOLDS if ok else EXIT_REFUTED, bounds, {"there": sorted(there)},
                  ["holds" if ok else "fails"])


def cmd_fixpoint_check(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    t = traces.load_lasso(args.lasso)
    shape_set = _shape_set(args) if args.prefix is not None else None
    res = equilibrium.tel_fixpoint_check(th.formulas, sorted(set(th.alphabet) | set(t.atoms)),
                                         t, shape_set=shape_set)
    if res.holds:
        return Report("fixpoint-check", "holds", EXIT_HOLDS, res.bounds, None, ["holds"])
    return Report("fixpoint-check", "fails", EXIT_REFUTED, res.bounds,
                  {"mismatch": show(res.mismatch)}, [f"fails on {show(res.mismatch)}"])


def cmd_safe_beliefs(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    logic = kripke.parse_logic(args.logic)
    if logic.temporal:
        if args.prefix is None:
            raise UsageError("temporal logics need --prefix and --loop")
        shape_set = _shape_set(args)
        if args.beliefs:
            b = safebeliefs.load_belief(args.beliefs)
            alphabet = sorted(set(th.alphabet) | set(b.atoms))
            v = safebeliefs.temporal_safe_belief_check(logic, th.formulas, alphabet, b, shape_set,
                                                       args.bound)
            return _single_belief(v, _belief_text(b))
        rep = safebeliefs.coincidence_harness(th.formulas, th.alphabet, [str(logic)], shape_set,
                                              args.bound, args.jobs)
        found = rep.accepted[str(logic)]
        return _belief_listing(rep, [safebeliefs.belief_to_json(b) for b in found],
                               [_belief_text(b) for b in found])
    if args.there is not None:
        there = _atom_list(args.there)
        alphabet = sorted(set(th.alphabet) | set(there))
        v = safebeliefs.prop_safe_belief_check(logic, th.formulas, alphabet, there, args.bound)
        exact = _exact(logic, args.bound)
        return _single_belief(v, "{" + ",".join(sorted(there)) + "}", exact)
    rep = safebeliefs.coincidence_harness(th.formulas, th.alphabet, [str(logic)], None,
                                          args.bound, args.jobs)
    found = rep.accepted[str(logic)]
    return _belief_listing(rep, [sorted(b) for b in found],
                           ["{" + ",".join(sorted(b)) + "}" for b in found])


def _single_belief(v: safebeliefs.SafeBeliefVerdict, text: str, exact: bool = False) -> Report:
    bounds = dict(v.bounds)
    if not v.consistent:
        return Report("safe-beliefs", "inconsistent", EXIT_REFUTED, bounds, None,
                      [f"{text}: premises are classically inconsistent"])
    if v.entailment.refuted:
        return Report("safe-beliefs", "rejected", EXIT_REFUTED, bounds,
                      _verdict_witness(v.entailment), [f"{text}: rejected"])
    if exact:
        return Report("safe-beliefs", "accepted", EXIT_HOLDS, bounds, None, [f"{text}: accepted"])
    return Report("safe-beliefs", "accepted-up-to-bound", EXIT_BOUNDED, bounds, None,
                  [f"{text}: accepted up to the bound"])


def _belief_listing(rep: safebeliefs.CoincidenceReport, wit: list, lines: list[str]) -> Report:
    if wit:
        return Report("safe-beliefs", "beliefs-found", EXIT_HOLDS, rep.bounds, wit, lines)
    return Report("safe-beliefs", "none-found", EXIT_REFUTED, rep.bounds, wit,
                  ["no safe belief set"])


def cmd_coincide(args: argparse.Namespace) -> Report:
    th = _theory(args.theory)
    logics = [l for l in args.logics.split(",") if l]
    if len(logics) < 2:
        raise UsageError("--logics needs at least two logics")
    classes = [kripke.parse_logic(l) for l in logics]
    shape_set = None
    if classes[0].temporal:
        if args.prefix is None:
            raise UsageError("temporal logics need --prefix and --loop")
        shape_set = _shape_set(args)
    rep = safebeliefs.coincidence_harness(th.formulas, th.alphabet, logics, shape_set,
                                          args.bound, args.jobs)

    def enc(b: Any) -> Any:
        return safebeliefs.belief_to_json(b) if shape_set else sorted(b)

    def txt(b: Any) -> str:
        return _belief_text(b) if shape_set else "{" + ",".join(sorted(b)) + "}"

    wit = {"accepted": {k: [enc(b) for b in v] for k, v in rep.accepted.items()},
           "differences": {f"{a} vs {b}": [enc(x) for x in d]
                           for (a, b), d in rep.differences.items()}}
    lines = [f"{k}: {' '.join(txt(b) for b in v) or '(none)'}" for k, v in rep.accepted.items()]
    if not rep.coincide:
        for (a, b), d in rep.differences.items():
            if d:
                lines.append(f"differ {a} vs {b}: {' '.join(txt(x) for x in d)}")
        return Report("coincide", "differ", EXIT_REFUTED, rep.bounds, wit, lines)
    lines.append("coincide")
    exact = all(_exact(c, args.bound) for c in classes if c.kind != "THT") and shape_set is None
    return Report("coincide", "coincide" if exact else "coincide-up-to-bound",
                  EXIT_HOLDS if exact else EXIT_BOUNDED, rep.bounds, wit, lines)


def _load_pairs(path: str, left: kripke.FiniteModel, right: kripke.FiniteModel) -> bisim.BisimRelation:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    pairs = data["pairs"] if isinstance(data, dict) else data
    return bisim.BisimRelation(left, right, frozenset(tuple(p) for p in pairs))


def cmd_bisim_verify(args: argparse.Namespace) -> Report:
    left, right = kripke.load_model(args.left), kripke.load_model(args.right)
    r = _load_pairs(args.relation, left, right)
    c = bisim.verify(r, args.k_bound)
    bounds = {"conditions": list(c.conditions)}
    if args.k_bound is not None:
        bounds["k_bound"] = args.k_bound
    if c.ok:
        return Report("bisim-verify", "bisimulation", EXIT_HOLDS, bounds, None,
                      [f"bisimulation ({', '.join(c.conditions)})"])
    v = c.violation
    wit = {"condition": v.condition, "pair": list(v.pair), "detail": v.detail, "k": v.k}
    return Report("bisim-verify", "not-a-bisimulation", EXIT_REFUTED, bounds, wit,
                  [f"{v.condition} fails at {list(v.pair)}: {v.detail}"])


def cmd_bisim_greatest(args: argparse.Namespace) -> Report:
    left, right = kripke.load_model(args.left), kripke.load_model(args.right)
    r = bisim.greatest_prop_bisim(left, right)
    data = bisim.relation_to_json(r, os.path.relpath(args.left), os.path.relpath(args.right))
    _write_json(args.out, data)
    lines = [f"{left.label(a)} ~ {right.label(b)}" for a, b in sorted(r.pairs)]
    status = EXIT_HOLDS if r.pairs else EXIT_REFUTED
    return Report("bisim-greatest", "found" if r.pairs else "empty", status,
                  {"exact": True}, data, lines or ["(empty)"])


def cmd_contract(args: argparse.Namespace) -> Report:
    m = kripke.load_model(args.model)
    w = m.world(args.world)
    kind = args.kind
    try:
        if kind == "ht":
            out, r = constructions.contract_to_ht(m, w)
            root = 0
        elif kind == "merge":
            out, root, r = constructions.merge_maximals_prop(m, w)
        elif kind == "merge-t":
            out, root, r = constructions.merge_maximals_temporal(m, w)
        elif kind == "tht":
            lasso, r = constructions.contract_to_tht(m, w)
        else:
            lasso = constructions.extract_classical_trace(m, w)
            r = None
    except constructions.PreconditionError as exc:
        return Report("contract", "precondition-failed", EXIT_REFUTED, {}, {"error": str(exc)},
                      [f"precondition failed: {exc}"])
    if kind in ("tht", "classical"):
        data = traces.lasso_to_json(lasso)
        lines = [_lasso_text(lasso)]
        wit: dict = {"lasso": data, "root": [0, 0]}
    else:
        data = _model_json(out)
        lines = [f"{out.n} worlds, root {out.label(root)}"]
        wit = {"model": data, "root": root}
    if r is not None:
        wit["pairs"] = sorted(list(p) for p in r.pairs)
        lines += [f"{m.label(a)} ~ {r.right.label(b)}" for a, b in sorted(r.pairs)]
    _write_json(args.out, data)
    if args.relation_out:
        # the relation's right-hand side must be a Kripke model file
        right_path = args.model_out if kind == "tht" else args.out
        if r is None or right_path is None:
            raise UsageError("--relation-out needs --out (and --model-out for tht)")
        if kind == "tht":
            _write_json(right_path, _model_json(r.right))
        base = os.path.dirname(os.path.abspath(args.relation_out))
        _write_json(args.relation_out,
                    bisim.relation_to_json(r, os.path.relpath(os.path.abspath(args.model), base),
                                           os.path.relpath(os.path.abspath(right_path), base)))
    return Report("contract", "constructed", EXIT_HOLDS, {}, wit, lines)


# ------------------------------------------------------------------ parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--budget", type=int, default=semantics.DEFAULT_BUDGET,
                   help="maximum number of valuations to enumerate")


def _add_shapes(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--prefix", type=int, required=required, help="maximum lasso prefix length")
    p.add_argument("--loop", type=int, required=required,
                   help="maximum lasso loop length")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="itlbench", description="Intuitionistic temporal logic workbench")
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse a theory file and print its formulas")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("validate", help="report frame properties of a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="evaluate a formula at a world")
    p.add_argument("model")
    p.add_argument("world")
    p.add_argument("formula")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("frame-valid", help="check a formula under every valuation of a frame")
    p.add_argument("model")
    p.add_argument("formula")
    p.set_defaults(func=cmd_frame_valid)

    p = sub.add_parser("entail", help="bounded local consequence")
    p.add_argument("--logic", required=True)
    p.add_argument("--bound", type=int, required=True,
                   help="maximum worlds, or maximum lasso length for THT")
    p.add_argument("theory")
    p.add_argument("goals", help="theory file or single formula")
    p.set_defaults(func=cmd_entail)

    p = sub.add_parser("tel-solve", help="temporal equilibrium models over lasso shapes")
    _add_shapes(p, required=True)
    p.add_argument("--extra-prefix", type=int, default=0)
    p.add_argument("--loop-multiplier", type=int, default=1)
    p.add_argument("theory")
    p.set_defaults(func=cmd_tel_solve)

    p = sub.add_parser("eq-solve", help="propositional equilibrium models")
    p.add_argument("theory")
    p.set_defaults(func=cmd_eq_solve)

    p = sub.add_parser("completion-check", help="propositional fixpoint check for an atom set")
    p.add_argument("--there", required=True, help="comma-separated atoms of the total model")
    p.add_argument("theory")
    p.set_defaults(func=cmd_completion_check)

    p = sub.add_parser("fixpoint-check", help="temporal fixpoint check for a total lasso")
    _add_shapes(p)
    p.add_argument("theory")
    p.add_argument("lasso")
    p.set_defaults(func=cmd_fixpoint_check)

    p = sub.add_parser("safe-beliefs", help="safe belief sets at a logic")
    p.add_argument("--logic", required=True)
    p.add_argument("--bound", type=int, default=4, help="maximum worlds")
    p.add_argument("--there", default=None, help="check one propositional atom set")
    p.add_argument("--beliefs", default=None, help="check one temporal belief-set file")
    _add_shapes(p)
    p.add_argument("theory")
    p.set_defaults(func=cmd_safe_beliefs)

    p = sub.add_parser("coincide", help="compare safe belief sets across logics")
    p.add_argument("--logics", required=True, help="comma-separated logics")
    p.add_argument("--bound", type=int, default=4, help="maximum worlds")
    _add_shapes(p)
    p.add_argument("theory")
    p.set_defaults(func=cmd_coincide)

    p = sub.add_parser("bisim-verify", help="verify a bisimulation between two models")
    p.add_argument("--k-bound", type=int, default=None)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("relation")
    p.set_defaults(func=cmd_bisim_verify)

    p = sub.add_parser("bisim-greatest", help="largest propositional bisimulation")
    p.add_argument("--out", default=None, help="write the relation file here")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_bisim_greatest)

    p = sub.add_parser("contract", help="run a model construction")
    p.add_argument("kind", choices=["ht", "tht", "merge", "merge-t", "classical"])
    p.add_argument("model")
    p.add_argument("world")
    p.add_argument("--out", default=None, help="write the transformed model or lasso here")
    p.add_argument("--relation-out", default=None, help="write the witness relation here")
    p.add_argument("--model-out", default=None,
                   help="for tht: write the finite here-and-there model the relation refers to")
    p.set_defaults(func=cmd_contract)

    for p in sub.choices.values():
        _add_common(p)
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return top


def _emit(report: Report, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report.envelope(), indent=1, sort_keys=True))
    else:
        for line in report.lines:
            print(line)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    as_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        if args.cmd in ("tel-solve", "fixpoint-check", "safe-beliefs", "coincide") and \
                (args.prefix is None) != (args.loop is None):
            raise UsageError("--prefix and --loop go together")
        report = args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE, as_json)
    except FileNotFoundError as exc:
        return _fail("io", f"cannot read {exc.filename}", EXIT_NOINPUT, as_json)
    except OSError as exc:
        return _fail("io", f"cannot access {exc.filename}: {exc.strerror}", EXIT_CANTCREATE,
                     as_json)
    except semantics.BudgetExceeded as exc:
        return _fail("budget", str(exc), EXIT_BUDGET, as_json)
    except (ParseError, kripke.ModelError, ValueError, KeyError, IndexError) as exc:
        return _fail("input", str(exc), EXIT_DATA, as_json)
    _emit(report, args.json)
    return report.status


def _fail(kind: str, message: str, status: int, as_json: bool) -> int:
    if as_json:
        print(json.dumps({"version": SCHEMA_VERSION, "cmd": None, "verdict": "error",
                          "bounds": {}, "witness": {"kind": kind, "message": message}},
                         indent=1, sort_keys=True))
    else:
        print(f"itlbench: {kind} error: {message}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
