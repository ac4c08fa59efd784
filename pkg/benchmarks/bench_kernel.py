"""Compare the compiled and pure-Python evaluation kernels.

Runs three workloads through both backends, checks they agree, and prints
wall-clock times:

* validity of the depth-2 axiom on every ITLbd(2) frame up to 4 worlds
* bounded consequence search over ITLp frames up to 4 worlds
* filtering all 2-atom lassos of length up to 4 by a temporal theory

Usage: python benchmarks/bench_kernel.py [--repeat N] [--seed S]
"""

from __future__ import annotations

import argparse
import random
import time

from itlbench import kernel
from itlbench.formula import bd_axiom, random_formula
from itlbench.kernel import _pykernel
from itlbench.kripke import frames, parse_logic, valuations
from itlbench.semantics import compile_formulas
from itlbench.traces import _valuation_masks, shapes_up_to, tht_frame


def _validity(impl, program, fs, k):
    hits = []
    for fr in fs:
        vals = valuations(fr, k)
        hits.append(impl.find_counterexample(program.ops, program.xs, program.ys, fr.n, fr.up,
                                             fr.succ, vals, [], [len(program.ops) - 1], 0, -1))
    return hits


def _filter(impl, program, premises, shape_set, k):
    out = []
    for shape in shape_set:
        fr = tht_frame(*shape)
        vals = _valuation_masks(shape, k, False)
        out.append(impl.filter_models(program.ops, program.xs, program.ys, fr.n, fr.up,
                                      fr.succ, vals, premises, 0))
    return out


def _time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    if kernel.compiled is None:
        print("compiled kernel not built; only the pure-Python kernel is available")
    rng = random.Random(args.seed)
    atoms = ["p", "q"]
    f = random_formula(rng, atoms, 4)
    g = random_formula(rng, atoms, 3)
    bd2 = bd_axiom(2)
    program = compile_formulas([bd2], ["p1", "p2"])

    workloads = []
    fs = frames(parse_logic("ITLbd(2)"), 4)
    workloads.append(("validity on ITLbd(2) frames <= 4 worlds",
                      lambda impl: _validity(impl, program, fs, 2)))
    prog2 = compile_formulas([g], atoms)
    prem_end = len(prog2.ops)
    compile_formulas([f], atoms, prog2)
    fs_p = frames(parse_logic("ITLp"), 4)

    def consequence(impl):
        out = []
        for fr in fs_p:
            vals = valuations(fr, 2)
            out.append(impl.find_counterexample(prog2.ops, prog2.xs, prog2.ys, fr.n, fr.up,
                                                fr.succ, vals, [prog2.slots[g]], [prog2.slots[f]],
                                                prem_end, -1))
        return out

    workloads.append(("consequence on ITLp frames <= 4 worlds", consequence))
    prog3 = compile_formulas([g], atoms)
    workloads.append(("lasso filtering, length <= 4",
                      lambda impl: _filter(impl, prog3, [prog3.slots[g]], shapes_up_to(4), 2)))

    print(f"{'workload':45s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}")
    for name, fn in workloads:
        tp, rp = _time(lambda: fn(_pykernel), args.repeat)
        if kernel.compiled is not None:
            tc, rc = _time(lambda: fn(kernel.compiled), args.repeat)
            if rc != rp:
                raise SystemExit(f"backends disagree on {name}")
            print(f"{name:45s} {tp:10.3f} {tc:13.3f} {tp / tc:7.1f}x")
        else:
            print(f"{name:45s} {tp:10.3f} {'-':>13s} {'-':>8s}")


if __name__ == "__main__":
    main()
