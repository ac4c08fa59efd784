"""Finite intuitionistic (temporal) Kripke models.

Worlds are the integers ``0..n-1``. World sets are handled internally as
int bitsets: ``up[w]`` is the set of worlds above ``w`` (including ``w``).
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

from .formula import check_alphabet

INFINITE_DEPTH = math.inf


class ModelError(ValueError):
    pass


class PropositionalModelError(ModelError):
    """A temporal operation was requested on a model without successor function."""


def bits(mask: int) -> Iterator[int]:
    w = 0
    while mask:
        if mask & 1:
            yield w
        mask >>= 1
        w += 1


def to_mask(worlds: Iterable[int]) -> int:
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


class Frame(NamedTuple):
    n: int
    up: tuple[int, ...]
    succ: tuple[int, ...] | None = None


def _close(n: int, pairs: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    up = [1 << w for w in range(n)]
    for a, b in pairs:
        up[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for w in range(n):
            acc = up[w]
            for v in bits(up[w]):
                acc |= up[v]
            if acc != up[w]:
                up[w] = acc
                changed = True
    return tuple(up)


@dataclass(frozen=True)
class FiniteModel:
    """A finite Kripke model; ``succ`` is ``None`` for propositional models.

    ``order`` is stored as given. Use :meth:`build` to close a generating
    relation reflexively and transitively.
    """

    atoms: tuple[str, ...]
    order: frozenset[tuple[int, int]]
    valuation: tuple[frozenset[str], ...]
    succ: tuple[int, ...] | None = None
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", check_alphabet(self.atoms))
        object.__setattr__(self, "order", frozenset((int(a), int(b)) for a, b in self.order))
        object.__setattr__(self, "valuation", tuple(frozenset(v) for v in self.valuation))
        n = len(self.valuation)
        if n == 0:
            raise ModelError("a model needs at least one world")
        for a, b in self.order:
            if not (0 <= a < n and 0 <= b < n):
                raise ModelError(f"order pair ({a}, {b}) out of range")
        known = set(self.atoms)
        for w, v in enumerate(self.valuation):
            if not v <= known:
                raise ModelError(f"world {w} uses atoms {sorted(v - known)} outside the alphabet")
        if self.succ is not None:
            object.__setattr__(self, "succ", tuple(int(s) for s in self.succ))
            if len(self.succ) != n or any(not 0 <= s < n for s in self.succ):
                raise ModelError("succ must be a total function on the worlds")
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != n or len(set(self.names)) != n:
                raise ModelError("world names must be distinct, one per world")

    @classmethod
    def build(cls, atoms: Sequence[str], order: Iterable[tuple[int, int]],
              valuation: Sequence[Iterable[str]], succ: Sequence[int] | None = None,
              names: Sequence[str] | None = None) -> "FiniteModel":
        """Close ``order`` reflexively and transitively, rejecting cycles."""
        n = len(valuation)
        pairs = list(order)
        for a, b in pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise ModelError(f"order pair ({a}, {b}) out of range")
        up = _close(n, pairs)
        for w in range(n):
            for v in bits(up[w]):
                if v != w and (up[v] >> w) & 1:
                    raise ModelError(f"order is not antisymmetric: worlds {w} and {v}")
        closed = frozenset((w, v) for w in range(n) for v in bits(up[w]))
        return cls(tuple(atoms), closed, tuple(frozenset(v) for v in valuation),
                   None if succ is None else tuple(succ), None if names is None else tuple(names))

    @classmethod
    def from_frame(cls, frame: Frame, atoms: Sequence[str], masks: Sequence[int]) -> "FiniteModel":
        val = [frozenset(a for a, m in zip(atoms, masks) if (m >> w) & 1) for w in range(frame.n)]
        order = frozenset((w, v) for w in range(frame.n) for v in bits(frame.up[w]))
        return cls(tuple(atoms), order, tuple(val), frame.succ)

    @property
    def n(self) -> int:
        return len(self.valuation)

    @property
    def is_temporal(self) -> bool:
        return self.succ is not None

    @cached_property
    def up(self) -> tuple[int, ...]:
        up = [0] * self.n
        for a, b in self.order:
            up[a] |= 1 << b
        return tuple(up)

    @cached_property
    def down(self) -> tuple[int, ...]:
        down = [0] * self.n
        for a, b in self.order:
            down[b] |= 1 << a
        return tuple(down)

    @cached_property
    def atom_masks(self) -> tuple[int, ...]:
        return tuple(to_mask(w for w in range(self.n) if p in self.valuation[w]) for p in self.atoms)

    @property
    def frame(self) -> Frame:
        return Frame(self.n, self.up, self.succ)

    def leq(self, w: int, v: int) -> bool:
        return (w, v) in self.order

    def upset(self, w: int) -> list[int]:
        return list(bits(self.up[w]))

    def strict_upset(self, w: int) -> list[int]:
        return [v for v in bits(self.up[w]) if v != w]

    def world(self, ref: int | str) -> int:
        """Resolve a world given by index or by name."""
        if isinstance(ref, str):
            if self.names is not None and ref in self.names:
                return self.names.index(ref)
            if re.fullmatch(r"\d+", ref):
                ref = int(ref)
            else:
                raise ModelError(f"unknown world {ref!r}")
        if not 0 <= ref < self.n:
            raise ModelError(f"world {ref} out of range")
        return ref

    def label(self, w: int) -> str:
        return self.names[w] if self.names is not None else str(w)

    def require_temporal(self) -> tuple[int, ...]:
        if self.succ is None:
            raise PropositionalModelError("temporal operation on a propositional model")
        return self.succ

    def step(self, w: int, k: int = 1) -> int:
        succ = self.require_temporal()
        for _ in range(k):
            w = succ[w]
        return w


# ------------------------------------------------------------ validation

@dataclass(frozen=True)
class FrameReport:
    is_partial_order: bool
    monotone: bool
    forward_confluent: bool
    backward_confluent: bool
    depth: float | None
    topwidth1: bool
    logic_tags: frozenset[str]

    def as_dict(self) -> dict:
        return {
            "is_partial_order": self.is_partial_order,
            "monotone": self.monotone,
            "forward_confluent": self.forward_confluent,
            "backward_confluent": self.backward_confluent,
            "depth": self.depth,
            "topwidth1": self.topwidth1,
            "logic_tags": sorted(self.logic_tags),
        }


def _is_partial_order(m: FiniteModel) -> bool:
    up = m.up
    for w in range(m.n):
        if not (up[w] >> w) & 1:
            return False
        for v in bits(up[w]):
            if up[v] & ~up[w]:
                return False
            if v != w and (up[v] >> w) & 1:
                return False
    return True


def _depth_from(up: Sequence[int], w: int, memo: dict[int, int]) -> int:
    if w in memo:
        return memo[w]
    above = [v for v in bits(up[w]) if v != w]
    d = 1 + max((_depth_from(up, v, memo) for v in above), default=0)
    memo[w] = d
    return d


def frame_depth(up: Sequence[int]) -> int:
    memo: dict[int, int] = {}
    return max((_depth_from(up, w, memo) for w in range(len(up))), default=0)


def forward_confluent(up: Sequence[int], succ: Sequence[int]) -> bool:
    for w in range(len(up)):
        for v in bits(up[w]):
            if not (up[succ[w]] >> succ[v]) & 1:
                return False
    return True


def backward_confluent(up: Sequence[int], succ: Sequence[int]) -> bool:
    n = len(up)
    images = [0] * n
    for w in range(n):
        for t in bits(up[w]):
            images[w] |= 1 << succ[t]
    for w in range(n):
        if up[succ[w]] & ~images[w]:
            return False
    return True


def has_top(up: Sequence[int]) -> bool:
    return any(all((up[v] >> u) & 1 for v in range(len(up))) for u in range(len(up)))


def _component_sizes(m: FiniteModel) -> list[int]:
    n = m.n
    seen = 0
    sizes = []
    for w in range(n):
        if (seen >> w) & 1:
            continue
        comp = 1 << w
        frontier = comp
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= m.up[v] | m.down[v]
            nxt &= ~comp
            comp |= nxt
            frontier = nxt
        seen |= comp
        sizes.append(bin(comp).count("1"))
    return sizes


def validate(m: FiniteModel) -> FrameReport:
    po = _is_partial_order(m)
    up = m.up
    mono = all(m.valuation[a] <= m.valuation[b] for a, b in m.order)
    fwd = bwd = False
    if m.succ is not None and po:
        fwd = forward_confluent(up, m.succ)
        bwd = backward_confluent(up, m.succ)
    depth = frame_depth(up) if po else None
    top = po and has_top(up)
    tags: set[str] = set()
    if po and mono:
        if m.succ is not None:
            if fwd:
                tags.add("ITLe")
            if fwd and bwd:
                tags.add("ITLp")
                tags.add(f"ITLbd({depth})")
                if depth == 1:
                    tags.add("LTLshape")
                if max(_component_sizes(m)) <= 2:
                    tags.add("HTshape")
        elif m.n == 2 and depth == 2:
            tags.add("HTshape")
    return FrameReport(po, mono, fwd, bwd, depth, top, frozenset(tags))


def require_model(m: FiniteModel) -> None:
    """Reject models whose order is not a partial order or whose valuation is not monotone."""
    if not _is_partial_order(m):
        raise ModelError("order is not a partial order")
    for a, b in m.order:
        if not m.valuation[a] <= m.valuation[b]:
            raise ModelError(f"valuation not monotone along {a} <= {b}")


def depth_at(m: FiniteModel, w: int) -> int:
    return _depth_from(m.up, w, {})


def maximal_worlds(m: FiniteModel, w: int) -> set[int]:
    return {v for v in bits(m.up[w]) if m.up[v] == 1 << v}


def is_maximal(m: FiniteModel, w: int) -> bool:
    return m.up[w] == 1 << w


def generated_subframe(m: FiniteModel, w: int) -> tuple[FiniteModel, dict[int, int]]:
    """Restrict ``m`` to the upset of ``w``, closed under succ for temporal models.

    Returns the restricted model and the map from old to new world indices.
    """
    carrier = m.up[w]
    if m.succ is not None:
        frontier = carrier
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= m.up[m.succ[v]]
            nxt &= ~carrier
            carrier |= nxt
            frontier = nxt
    old = list(bits(carrier))
    index = {v: i for i, v in enumerate(old)}
    order = [(index[a], index[b]) for a, b in m.order if a in index and b in index]
    val = [m.valuation[v] for v in old]
    succ = None if m.succ is None else [index[m.succ[v]] for v in old]
    names = None if m.names is None else [m.names[v] for v in old]
    return FiniteModel(m.atoms, frozenset(order), tuple(val), succ, names), index


@dataclass(frozen=True)
class OrbitInfo:
    start: int
    preperiod: int
    period: int
    path: tuple[int, ...]

    def at(self, k: int) -> int:
        """World reached after ``k`` successor steps."""
        if k < len(self.path):
            return self.path[k]
        return self.path[self.preperiod + (k - self.preperiod) % self.period]


def orbit(m: FiniteModel, w: int) -> OrbitInfo:
    succ = m.require_temporal()
    seen: dict[int, int] = {}
    path = []
    cur = w
    while cur not in seen:
        seen[cur] = len(path)
        path.append(cur)
        cur = succ[cur]
    rho = seen[cur]
    return OrbitInfo(w, rho, len(path) - rho, tuple(path))


# ----------------------------------------------------------- logic classes

@dataclass(frozen=True)
class LogicClass:
    """A class of frames: INT, KC, BD(n), HT, ITLe, ITLp, ITLbd(n) or THT."""

    kind: str
    n: int | None = None

    @property
    def temporal(self) -> bool:
        return self.kind in ("ITLe", "ITLp", "ITLbd", "THT")

    def __str__(self) -> str:
        return f"{self.kind}({self.n})" if self.n is not None else self.kind

    def admits(self, frame: Frame, depth: int | None = None) -> bool:
        """Whether a partial-order frame belongs to the class."""
        if self.temporal != (frame.succ is not None):
            return False
        if depth is None:
            depth = frame_depth(frame.up)
        k = self.kind
        if k == "INT":
            return True
        if k == "KC":
            return has_top(frame.up)
        if k == "BD":
            return depth <= self.n
        if k == "HT":
            return frame.n == 2 and depth == 2
        if k == "THT":
            raise ModelError("THT models are lassos; use the traces module")
        if not forward_confluent(frame.up, frame.succ):
            return False
        if k == "ITLe":
            return True
        if not backward_confluent(frame.up, frame.succ):
            return False
        return k == "ITLp" or depth <= self.n


_ALIASES = {"HTSHAPE": "HT", "LTL": "ITLBD(1)", "LTLSHAPE": "ITLBD(1)", "CL": "BD(1)"}


def parse_logic(text: str | LogicClass) -> LogicClass:
    if isinstance(text, LogicClass):
        return text
    key = text.strip().replace(" ", "").upper()
    key = _ALIASES.get(key, key)
    m = re.fullmatch(r"(BD|ITLBD)\(?(\d+)\)?", key)
    if m:
        n = int(m.group(2))
        if n < 1:
            raise ValueError("depth bound must be at least 1")
        return LogicClass("BD" if m.group(1) == "BD" else "ITLbd", n)
    names = {"INT": "INT", "KC": "KC", "HT": "HT", "ITLE": "ITLe", "ITLP": "ITLp", "THT": "THT"}
    if key in names:
        return LogicClass(names[key])
    raise ValueError(f"unknown logic {text!r}")


# ------------------------------------------------------------ enumeration

def _relabel(up: Sequence[int], perm: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(up)
    for w, m in enumerate(up):
        out[perm[w]] = to_mask(perm[v] for v in bits(m))
    return tuple(out)


def _canonical(up: tuple[int, ...]) -> tuple[int, ...]:
    return min(_relabel(up, p) for p in itertools.permutations(range(len(up))))


@lru_cache(maxsize=None)
def posets(n: int) -> tuple[tuple[int, ...], ...]:
    """Partial orders on ``n`` points up to isomorphism, as up-mask tuples."""
    if n < 1:
        return ()
    if n == 1:
        return ((1,),)
    found: set[tuple[int, ...]] = set()
    for base in posets(n - 1):
        k = n - 1
        for down in range(1 << k):
            # the new point sits above ``down`` and below ``upm``
            if any(not (down >> v) & 1 for w in bits(down) for v in range(k) if (base[v] >> w) & 1):
                continue
            for upm in range(1 << k):
                if upm & down:
                    continue
                if any(base[u] & ~upm for u in bits(upm)):
                    continue
                if any(upm & ~base[d] for d in bits(down)):
                    continue
                up = list(base) + [(1 << k) | upm]
                for d in bits(down):
                    up[d] |= (1 << k) | upm
                found.add(_canonical(tuple(up)))
    return tuple(sorted(found))


def automorphisms(up: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [p for p in itertools.permutations(range(len(up))) if _relabel(up, p) == up]


def _succ_reps(up: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    n = len(up)
    auts = [p for p in automorphisms(up) if list(p) != list(range(n))]
    for succ in itertools.product(range(n), repeat=n):
        minimal = True
        for p in auts:
            image = [0] * n
            for w in range(n):
                image[p[w]] = p[succ[w]]
            if tuple(image) < succ:
                minimal = False
                break
        if minimal:
            yield succ


@lru_cache(maxsize=None)
def frames(logic: LogicClass, max_worlds: int) -> tuple[Frame, ...]:
    """All frames of ``logic`` with at most ``max_worlds`` worlds, up to isomorphism."""
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    out = []
    for n in range(1, max_worlds + 1):
        if logic.kind == "HT" and n != 2:
            continue
        for up in posets(n):
            d = frame_depth(up)
            if logic.temporal:
                if logic.kind == "ITLbd" and d > logic.n:
                    continue
                for succ in _succ_reps(up):
                    fr = Frame(n, up, succ)
                    if logic.admits(fr, d):
                        out.append(fr)
            else:
                fr = Frame(n, up)
                if logic.admits(fr, d):
                    out.append(fr)
    return tuple(out)


@lru_cache(maxsize=None)
def upsets(up: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(s for s in range(1 << len(up)) if all(up[w] & ~s == 0 for w in bits(s)))


@lru_cache(maxsize=4096)
def valuations(frame: Frame, k: int) -> tuple[tuple[int, ...], ...]:
    """Every monotone valuation of ``k`` atoms, as tuples of extension masks."""
    return tuple(itertools.product(upsets(frame.up), repeat=k))


def enumerate_models(logic: str | LogicClass, alphabet: Sequence[str],
                     max_worlds: int) -> Iterator[FiniteModel]:
    logic = parse_logic(logic)
    atoms = check_alphabet(alphabet)
    for fr in frames(logic, max_worlds):
        for masks in valuations(fr, len(atoms)):
            yield FiniteModel.from_frame(fr, atoms, masks)


# -------------------------------------------------------------------- JSON

def model_to_json(m: FiniteModel) -> dict:
    out: dict = {
        "atoms": list(m.atoms),
        "worlds": m.n,
        "order": sorted([a, b] for a, b in m.order if a != b),
    }
    if m.succ is not None:
        out["succ"] = list(m.succ)
    out["val"] = [sorted(v) for v in m.valuation]
    if m.names is not None:
        out["names"] = list(m.names)
    return out


def model_from_json(data: dict) -> FiniteModel:
    try:
        n = int(data["worlds"])
        val = data["val"]
        if len(val) != n:
            raise ModelError(f"expected {n} valuation entries, got {len(val)}")
        return FiniteModel.build(data["atoms"], [tuple(p) for p in data.get("order", [])],
                                 val, data.get("succ"), data.get("names"))
    except KeyError as exc:
        raise ModelError(f"model file lacks field {exc}") from None


def load_model(path: str) -> FiniteModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def save_model(m: FiniteModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(m), fh, indent=1)
