"""Formulas of propositional and temporal intuitionistic logic.

Only the core connectives are represented. Negation, truth, always,
eventually and the biconditional are built by helper functions that
expand into the core tree, so no derived node ever exists.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Next:
    body: "Formula"


@dataclass(frozen=True)
class Until:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Release:
    lhs: "Formula"
    rhs: "Formula"


Formula = Union[Atom, Bot, And, Or, Implies, Next, Until, Release]

BOT = Bot()
TOP = Implies(BOT, BOT)

_BINARY = (And, Or, Implies, Until, Release)
_TEMPORAL = (Next, Until, Release)


def neg(f: Formula) -> Formula:
    return Implies(f, BOT)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def always(f: Formula) -> Formula:
    return Release(BOT, f)


def eventually(f: Formula) -> Formula:
    return Until(TOP, f)


def next_n(f: Formula, n: int) -> Formula:
    for _ in range(n):
        f = Next(f)
    return f


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return BOT
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _BINARY):
        return (f.lhs, f.rhs)
    if isinstance(f, Next):
        return (f.body,)
    return ()


def rebuild(f: Formula, kids: Sequence[Formula]) -> Formula:
    if isinstance(f, _BINARY):
        return type(f)(kids[0], kids[1])
    if isinstance(f, Next):
        return Next(kids[0])
    return f


def _postorder(f: Formula) -> Iterator[Formula]:
    # iterative so deep ○^i chains do not hit the recursion limit
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        stack.append((node, True))
        for kid in reversed(children(node)):
            stack.append((kid, False))


def closure(f: Formula) -> list[Formula]:
    """All subformulas of ``f`` in post-order with duplicates removed."""
    return closure_of([f])


def closure_of(fs: Iterable[Formula]) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for f in fs:
        for node in _postorder(f):
            seen.setdefault(node, None)
    return list(seen)


def atoms(f: Formula) -> set[str]:
    return {n.name for n in _postorder(f) if isinstance(n, Atom)}


def atoms_of(fs: Iterable[Formula]) -> set[str]:
    out: set[str] = set()
    for f in fs:
        out |= atoms(f)
    return out


def is_temporal(f: Formula) -> bool:
    return any(isinstance(n, _TEMPORAL) for n in _postorder(f))


def depth(f: Formula) -> int:
    kids = children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def size(f: Formula) -> int:
    return sum(1 for _ in _postorder(f))


def substitute(f: Formula, s: Mapping[str, Formula]) -> Formula:
    if isinstance(f, Atom):
        return s.get(f.name, f)
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, [substitute(k, s) for k in kids])


def bd_axiom(n: int) -> Formula:
    if n < 1:
        raise ValueError("bd axiom needs n >= 1")
    p1 = Atom("p1")
    f: Formula = Or(p1, neg(p1))
    for k in range(2, n + 1):
        pk = Atom(f"p{k}")
        f = Or(pk, Implies(pk, f))
    return f


def hosoi_axiom(p: str, q: str) -> Formula:
    if p == q:
        raise ValueError("hosoi axiom needs two distinct atoms")
    a, b = Atom(p), Atom(q)
    return Or(Or(a, Implies(a, b)), neg(b))


@dataclass(frozen=True, order=True)
class TemporalAtom:
    offset: int
    atom: str

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise ValueError("temporal atom offset must be non-negative")

    def formula(self) -> Formula:
        return next_n(Atom(self.atom), self.offset)


def temporal_atoms(alphabet: Sequence[str], horizon: int) -> list[TemporalAtom]:
    """``o^i p`` for every ``i < horizon`` and ``p`` in the alphabet, offset-major."""
    return [TemporalAtom(i, p) for i in range(horizon) for p in alphabet]


def check_alphabet(names: Iterable[str]) -> tuple[str, ...]:
    out = tuple(names)
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate atoms in alphabet {list(out)}")
    for name in out:
        if not _ATOM_RE.fullmatch(name) or name == "o":
            raise ValueError(f"invalid atom name {name!r}")
    return out


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: Iterable[str]):
        self.message = message
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at byte {offset} (expected one of: {exp})")


_ATOM_RE = re.compile(r"[a-z][a-zA-Z0-9_]*")
_SYMBOLS = ("->", "[]", "<>", "#t", "#f", "~", "&", "|", "(", ")", "U", "R")
_PRIMARY_START = {"atom", "#t", "#f", "("}
_UNARY_START = _PRIMARY_START | {"~", "o", "[]", "<>"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks: list[tuple[str, str, int]] = []
    raw = text.encode("utf-8")
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        offset = len(text[:i].encode("utf-8"))
        m = _ATOM_RE.match(text, i)
        if m:
            word = m.group()
            toks.append(("o" if word == "o" else "atom", word, offset))
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append((sym, sym, offset))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", offset, _UNARY_START | {"->", "|", "&", "U", "R", ")"})
    toks.append(("eof", "", len(raw)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> str:
        return self.toks[self.pos][0]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: Iterable[str]):
        kind, value, offset = self.toks[self.pos]
        what = "end of input" if kind == "eof" else repr(value)
        raise ParseError(f"unexpected {what}", offset, expected)

    def formula(self) -> Formula:
        f = self.impl()
        if self.peek() != "eof":
            self.fail({"->", "|", "&", "U", "R", "eof"})
        return f

    def impl(self) -> Formula:
        lhs = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(lhs, self.impl())
        return lhs

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind = self.peek()
        if kind == "~":
            self.take()
            return neg(self.unary())
        if kind == "o":
            self.take()
            return Next(self.unary())
        if kind == "[]":
            self.take()
            return always(self.unary())
        if kind == "<>":
            self.take()
            return eventually(self.unary())
        lhs = self.primary()
        if self.peek() == "U":
            self.take()
            return Until(lhs, self.unary())
        if self.peek() == "R":
            self.take()
            return Release(lhs, self.unary())
        return lhs

    def primary(self) -> Formula:
        kind, value, _ = self.toks[self.pos]
        if kind == "atom":
            self.take()
            return Atom(value)
        if kind == "#t":
            self.take()
            return TOP
        if kind == "#f":
            self.take()
            return BOT
        if kind == "(":
            self.take()
            f = self.impl()
            if self.peek() != ")":
                self.fail({")", "->", "|", "&", "U", "R"})
            self.take()
            return f
        self.fail(_UNARY_START)


def parse(text: str) -> Formula:
    return _Parser(text).formula()


# --------------------------------------------------------------- printing

_IMP, _OR, _AND, _UNARY, _PRIMARY = range(5)


def _level(f: Formula) -> int:
    if isinstance(f, (Atom, Bot)) or f == TOP:
        return _PRIMARY
    if isinstance(f, Implies) and f.rhs == BOT:
        return _UNARY
    if isinstance(f, (Next, Until, Release)):
        return _UNARY
    if isinstance(f, And):
        return _AND
    if isinstance(f, Or):
        return _OR
    return _IMP


def _fmt(f: Formula, need: int) -> str:
    text = _render(f)
    return text if _level(f) >= need else f"({text})"


def _render(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bot):
        return "#f"
    if f == TOP:
        return "#t"
    if isinstance(f, Implies) and f.rhs == BOT:
        return "~" + _fmt(f.lhs, _UNARY)
    if isinstance(f, Next):
        return "o " + _fmt(f.body, _UNARY)
    if isinstance(f, Release) and f.lhs == BOT:
        return "[]" + _fmt(f.rhs, _UNARY)
    if isinstance(f, Until) and f.lhs == TOP:
        return "<>" + _fmt(f.rhs, _UNARY)
    if isinstance(f, Until):
        return f"{_fmt(f.lhs, _PRIMARY)} U {_fmt(f.rhs, _UNARY)}"
    if isinstance(f, Release):
        return f"{_fmt(f.lhs, _PRIMARY)} R {_fmt(f.rhs, _UNARY)}"
    if isinstance(f, And):
        return f"{_fmt(f.lhs, _AND)} & {_fmt(f.rhs, _UNARY)}"
    if isinstance(f, Or):
        return f"{_fmt(f.lhs, _OR)} | {_fmt(f.rhs, _AND)}"
    return f"{_fmt(f.lhs, _OR)} -> {_fmt(f.rhs, _IMP)}"


def show(f: Formula) -> str:
    """Render ``f`` in the concrete syntax accepted by :func:`parse`."""
    return _render(f)


# ------------------------------------------------------- random formulas

def random_formula(rng: random.Random, alphabet: Sequence[str], max_depth: int,
                   temporal: bool = True) -> Formula:
    if max_depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.1:
            return BOT
        return Atom(rng.choice(list(alphabet)))
    ops = ["and", "or", "imp", "neg"]
    if temporal:
        ops += ["next", "until", "release", "always"]
        if max_depth >= 2:
            ops.append("eventually")
    op = rng.choice(ops)
    sub = lambda: random_formula(rng, alphabet, max_depth - 1, temporal)  # noqa: E731
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "imp":
        return Implies(sub(), sub())
    if op == "neg":
        return neg(sub())
    if op == "next":
        return Next(sub())
    if op == "until":
        return Until(sub(), sub())
    if op == "release":
        return Release(sub(), sub())
    if op == "always":
        return always(sub())
    return eventually(sub())
