"""Pure-Python evaluation kernel.

A program is a post-order list of instructions ``(op, x, y)``; ``x`` and
``y`` index earlier slots (or the atom table for ``ATOM``). World sets are
Python ints used as bitsets, so there is no limit on the number of worlds.
"""

ATOM, BOT, AND, OR, IMP, NEXT, UNTIL, RELEASE = range(8)


def _pre(mask, n, succ):
    out = 0
    for w in range(n):
        if (mask >> succ[w]) & 1:
            out |= 1 << w
    return out


def _run(ops, xs, ys, n, up, succ, atom_masks, out, start, stop):
    for k in range(start, stop):
        op = ops[k]
        if op == ATOM:
            out[k] = atom_masks[xs[k]]
        elif op == BOT:
            out[k] = 0
        elif op == AND:
            out[k] = out[xs[k]] & out[ys[k]]
        elif op == OR:
            out[k] = out[xs[k]] | out[ys[k]]
        elif op == IMP:
            bad = out[xs[k]] & ~out[ys[k]]
            m = 0
            for w in range(n):
                if not (up[w] & bad):
                    m |= 1 << w
            out[k] = m
        elif op == NEXT:
            out[k] = _pre(out[xs[k]], n, succ)
        elif op == UNTIL:
            a, b = out[xs[k]], out[ys[k]]
            cur = b
            while True:
                nxt = b | (a & _pre(cur, n, succ))
                if nxt == cur:
                    break
                cur = nxt
            out[k] = cur
        elif op == RELEASE:
            a, b = out[xs[k]], out[ys[k]]
            cur = b
            while True:
                nxt = b & (a | _pre(cur, n, succ))
                if nxt == cur:
                    break
                cur = nxt
            out[k] = cur
        else:
            raise ValueError(f"unknown opcode {op}")


def evaluate(ops, xs, ys, n, up, succ, atom_masks):
    out = [0] * len(ops)
    _run(ops, xs, ys, n, up, succ, atom_masks, out, 0, len(ops))
    return out


def find_counterexample(ops, xs, ys, n, up, succ, valuations, premises, goals,
                        prem_end, world):
    """First ``(valuation, world, goal)`` where all premises hold and a goal fails.

    ``world`` restricts the search to one world; ``-1`` means any world.
    Slots below ``prem_end`` are evaluated first so valuations falsifying
    the premises everywhere skip the rest of the program.
    """
    full = (1 << n) - 1 if world < 0 else 1 << world
    total = len(ops)
    out = [0] * total
    for vi, masks in enumerate(valuations):
        _run(ops, xs, ys, n, up, succ, masks, out, 0, prem_end)
        prem = full
        for p in premises:
            prem &= out[p]
        if not prem:
            continue
        _run(ops, xs, ys, n, up, succ, masks, out, prem_end, total)
        for w in range(n):
            if (prem >> w) & 1:
                for gi, g in enumerate(goals):
                    if not (out[g] >> w) & 1:
                        return vi, w, gi
    return None


def filter_models(ops, xs, ys, n, up, succ, valuations, premises, world):
    """Indices of valuations under which every premise holds at ``world``."""
    bit = 1 << world
    found = []
    out = [0] * len(ops)
    for vi, masks in enumerate(valuations):
        _run(ops, xs, ys, n, up, succ, masks, out, 0, len(ops))
        ok = True
        for p in premises:
            if not out[p] & bit:
                ok = False
                break
        if ok:
            found.append(vi)
    return found
