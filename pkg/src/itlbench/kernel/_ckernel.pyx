# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled evaluation kernel for models with at most 64 worlds.

Same interface and semantics as the pure-Python kernel; world sets are
``uint64`` bitsets.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef enum:
    ATOM = 0
    BOT = 1
    AND = 2
    OR = 3
    IMP = 4
    NEXT = 5
    UNTIL = 6
    RELEASE = 7

MAX_WORLDS = 64


cdef inline uint64_t _pre(uint64_t mask, int n, int* succ) nogil:
    cdef uint64_t out = 0
    cdef int w
    for w in range(n):
        if (mask >> succ[w]) & 1:
            out |= (<uint64_t>1) << w
    return out


cdef int _run(int* ops, int* xs, int* ys, int n, uint64_t* up, int* succ,
              uint64_t* atoms, uint64_t* out, int start, int stop) nogil:
    cdef int k, w, op
    cdef uint64_t a, b, cur, nxt, bad, m
    for k in range(start, stop):
        op = ops[k]
        if op == ATOM:
            out[k] = atoms[xs[k]]
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
                if (up[w] & bad) == 0:
                    m |= (<uint64_t>1) << w
            out[k] = m
        elif op == NEXT:
            out[k] = _pre(out[xs[k]], n, succ)
        elif op == UNTIL:
            a = out[xs[k]]
            b = out[ys[k]]
            cur = b
            while True:
                nxt = b | (a & _pre(cur, n, succ))
                if nxt == cur:
                    break
                cur = nxt
            out[k] = cur
        elif op == RELEASE:
            a = out[xs[k]]
            b = out[ys[k]]
            cur = b
            while True:
                nxt = b & (a | _pre(cur, n, succ))
                if nxt == cur:
                    break
                cur = nxt
            out[k] = cur
        else:
            return -1
    return 0


cdef class _Buffers:
    cdef int* ops
    cdef int* xs
    cdef int* ys
    cdef int* succ
    cdef uint64_t* up
    cdef uint64_t* out
    cdef int size
    cdef int n

    def __cinit__(self, ops, xs, ys, int n, up, succ):
        cdef int k
        self.size = len(ops)
        self.n = n
        self.ops = <int*>malloc(max(self.size, 1) * sizeof(int))
        self.xs = <int*>malloc(max(self.size, 1) * sizeof(int))
        self.ys = <int*>malloc(max(self.size, 1) * sizeof(int))
        self.out = <uint64_t*>malloc(max(self.size, 1) * sizeof(uint64_t))
        self.up = <uint64_t*>malloc(max(n, 1) * sizeof(uint64_t))
        self.succ = <int*>malloc(max(n, 1) * sizeof(int))
        if not (self.ops and self.xs and self.ys and self.out and self.up and self.succ):
            raise MemoryError()
        for k in range(self.size):
            self.ops[k] = ops[k]
            self.xs[k] = xs[k]
            self.ys[k] = ys[k]
        for k in range(n):
            self.up[k] = up[k]
            self.succ[k] = succ[k] if succ is not None else k

    def __dealloc__(self):
        free(self.ops)
        free(self.xs)
        free(self.ys)
        free(self.out)
        free(self.up)
        free(self.succ)


cdef uint64_t* _flatten(valuations, int width, int* count) except NULL:
    cdef int v = len(valuations)
    cdef int i, j
    cdef uint64_t* flat = <uint64_t*>malloc(max(v * width, 1) * sizeof(uint64_t))
    if not flat:
        raise MemoryError()
    for i in range(v):
        masks = valuations[i]
        for j in range(width):
            flat[i * width + j] = masks[j]
    count[0] = v
    return flat


def evaluate(ops, xs, ys, int n, up, succ, atom_masks):
    cdef _Buffers b = _Buffers(ops, xs, ys, n, up, succ)
    cdef int width = len(atom_masks)
    cdef int count
    cdef uint64_t* flat = _flatten([atom_masks], width, &count)
    cdef int rc
    try:
        rc = _run(b.ops, b.xs, b.ys, n, b.up, b.succ, flat, b.out, 0, b.size)
        if rc != 0:
            raise ValueError("unknown opcode")
        return [b.out[k] for k in range(b.size)]
    finally:
        free(flat)


def find_counterexample(ops, xs, ys, int n, up, succ, valuations, premises,
                        goals, int prem_end, int world):
    cdef _Buffers b = _Buffers(ops, xs, ys, n, up, succ)
    cdef int width = len(valuations[0]) if len(valuations) else 0
    cdef int count, vi, w, gi, i
    cdef uint64_t* flat = _flatten(valuations, width, &count)
    cdef int np_ = len(premises)
    cdef int ng = len(goals)
    cdef int* prem = <int*>malloc(max(np_, 1) * sizeof(int))
    cdef int* gl = <int*>malloc(max(ng, 1) * sizeof(int))
    cdef uint64_t full, mask
    cdef int hit_v = -1, hit_w = -1, hit_g = -1
    if n == 64:
        full = <uint64_t>0xFFFFFFFFFFFFFFFF
    else:
        full = ((<uint64_t>1) << n) - 1
    if world >= 0:
        full = (<uint64_t>1) << world
    try:
        for i in range(np_):
            prem[i] = premises[i]
        for i in range(ng):
            gl[i] = goals[i]
        with nogil:
            for vi in range(count):
                _run(b.ops, b.xs, b.ys, n, b.up, b.succ, flat + vi * width, b.out, 0, prem_end)
                mask = full
                for i in range(np_):
                    mask &= b.out[prem[i]]
                if mask == 0:
                    continue
                _run(b.ops, b.xs, b.ys, n, b.up, b.succ, flat + vi * width, b.out, prem_end, b.size)
                for w in range(n):
                    if (mask >> w) & 1:
                        for gi in range(ng):
                            if not ((b.out[gl[gi]] >> w) & 1):
                                hit_v = vi
                                hit_w = w
                                hit_g = gi
                                break
                    if hit_v >= 0:
                        break
                if hit_v >= 0:
                    break
    finally:
        free(flat)
        free(prem)
        free(gl)
    if hit_v < 0:
        return None
    return hit_v, hit_w, hit_g


def filter_models(ops, xs, ys, int n, up, succ, valuations, premises, int world):
    cdef _Buffers b = _Buffers(ops, xs, ys, n, up, succ)
    cdef int width = len(valuations[0]) if len(valuations) else 0
    cdef int count, vi, i, ok
    cdef uint64_t* flat = _flatten(valuations, width, &count)
    cdef int np_ = len(premises)
    cdef int* prem = <int*>malloc(max(np_, 1) * sizeof(int))
    cdef uint64_t bit = (<uint64_t>1) << world
    found = []
    try:
        for i in range(np_):
            prem[i] = premises[i]
        for vi in range(count):
            _run(b.ops, b.xs, b.ys, n, b.up, b.succ, flat + vi * width, b.out, 0, b.size)
            ok = 1
            for i in range(np_):
                if not (b.out[prem[i]] & bit):
                    ok = 0
                    break
            if ok:
                found.append(vi)
    finally:
        free(flat)
        free(prem)
    return found
