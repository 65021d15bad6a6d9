"""Finite permutations and explicit permutation groups.

Composition convention: ``compose(p, q)`` applies ``p`` first and then ``q``,
so ``compose(p, q)(i) == q(p(i))``.  This is the right-action convention used
for group actions throughout the package; ``p * q`` is shorthand for it.

Groups are stored as explicit, closed element sets.  Carriers here are
register sets of a handful of elements, so enumerating a group is cheap and
keeps subgroup tests and quotients trivial.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence


class PermError(ValueError):
    pass


class Perm(tuple):
    """A permutation of ``{0..n-1}``; position ``i`` holds the image of ``i``."""

    __slots__ = ()

    def __new__(cls, images: Iterable[int] = ()):
        images = tuple(images)
        if sorted(images) != list(range(len(images))):
            raise PermError(f"not a permutation: {images}")
        return super().__new__(cls, images)

    @classmethod
    def identity(cls, n: int) -> Perm:
        return tuple.__new__(cls, range(n))

    @classmethod
    def _trusted(cls, images) -> Perm:
        return tuple.__new__(cls, images)

    @property
    def size(self) -> int:
        return len(self)

    def __call__(self, i: int) -> int:
        return self[i]

    def __mul__(self, other: Perm) -> Perm:
        return compose(self, other)

    def inverse(self) -> Perm:
        inv = [0] * len(self)
        for i, j in enumerate(self):
            inv[j] = i
        return Perm._trusted(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(len(self)):
            if start in seen or self[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            j = self[start]
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self[j]
            out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        return format_cycles(self)

    def __repr__(self) -> str:
        return f"Perm({format_cycles(self)}, n={len(self)})"


def format_cycles(p: Perm) -> str:
    cycles = p.cycles()
    if not cycles:
        return "()"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int) -> Perm:
    """Parse cycle notation such as ``(0 1)(2 3)``; ``()`` is the identity."""
    text = text.strip()
    if not re.fullmatch(r"(\([^()]*\)\s*)+", text):
        raise PermError(f"bad cycle notation: {text!r}")
    images = list(range(n))
    touched = set()
    for body in _CYCLE.findall(text):
        items = [int(tok) for tok in body.replace(",", " ").split()]
        if len(items) <= 1:
            continue
        for x in items:
            if not 0 <= x < n:
                raise PermError(f"point {x} outside carrier of size {n}")
            if x in touched:
                raise PermError(f"point {x} occurs in two cycles: {text!r}")
            touched.add(x)
        for a, b in zip(items, items[1:] + items[:1]):
            images[a] = b
    return Perm._trusted(images)


def compose(p: Perm, q: Perm) -> Perm:
    """Apply ``p`` first, then ``q``."""
    if len(p) != len(q):
        raise PermError(f"size mismatch: {len(p)} vs {len(q)}")
    return Perm._trusted(q[i] for i in p)


@dataclass(frozen=True)
class PermGroup:
    carrier_size: int
    elements: frozenset

    def __post_init__(self):
        for g in self.elements:
            if len(g) != self.carrier_size:
                raise PermError(f"element {g!r} does not act on {self.carrier_size} points")

    @classmethod
    def trivial(cls, n: int) -> PermGroup:
        return cls(n, frozenset([Perm.identity(n)]))

    @classmethod
    def symmetric(cls, n: int) -> PermGroup:
        from itertools import permutations

        return cls(n, frozenset(Perm._trusted(p) for p in permutations(range(n))))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def __contains__(self, p) -> bool:
        return p in self.elements

    def issubgroup(self, other: PermGroup) -> bool:
        return self.carrier_size == other.carrier_size and self.elements <= other.elements

    def is_group(self) -> bool:
        ident = Perm.identity(self.carrier_size)
        if ident not in self.elements:
            return False
        return all(compose(a, b) in self.elements for a in self.elements for b in self.elements)

    def generators_text(self) -> str:
        """Cycle notation of a small generating set, joined by ``;``."""
        gens: list[Perm] = []
        span = closure([], self.carrier_size)
        for g in self:
            if g not in span:
                gens.append(g)
                span = closure(gens, self.carrier_size)
        return "; ".join(format_cycles(g) for g in gens) if gens else "()"


def closure(generators: Iterable[Perm], carrier_size: int) -> PermGroup:
    """Smallest group containing ``generators``, by breadth-first closure."""
    gens = [Perm(g) for g in generators]
    for g in gens:
        if len(g) != carrier_size:
            raise PermError(f"generator {g!r} does not act on {carrier_size} points")
    ident = Perm.identity(carrier_size)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                k = compose(h, g)
                if k not in seen:
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    return PermGroup(carrier_size, frozenset(seen))


def conjugate(g: PermGroup, p: Perm) -> PermGroup:
    """``{p^-1 s p : s in g}`` with left-first composition, i.e. ``x -> p(s(p^-1(x)))``."""
    if len(p) != g.carrier_size:
        raise PermError(f"size mismatch: {len(p)} vs {g.carrier_size}")
    inv = p.inverse()
    return PermGroup(g.carrier_size, frozenset(compose(compose(inv, s), p) for s in g.elements))


def intersect(g: PermGroup, h: PermGroup) -> PermGroup:
    if g.carrier_size != h.carrier_size:
        raise PermError(f"size mismatch: {g.carrier_size} vs {h.carrier_size}")
    return PermGroup(g.carrier_size, g.elements & h.elements)


def act(word: Sequence, sigma: Perm) -> tuple:
    """The sequence ``word ∘ sigma``: position ``i`` receives ``word[sigma(i)]``."""
    return tuple(word[j] for j in sigma)


def canonical_under(g: PermGroup, word: Sequence) -> tuple[tuple, Perm]:
    """Lexicographically least ``word ∘ s`` over ``s in g`` and a witnessing ``s``.

    Ties between witnesses are broken by the least witness, so the result is
    deterministic.
    """
    if len(word) != g.carrier_size:
        raise PermError(f"word of length {len(word)} for carrier of size {g.carrier_size}")
    best = None
    best_sigma = None
    for s in sorted(g.elements):
        cand = act(word, s)
        if best is None or cand < best:
            best, best_sigma = cand, s
    return best, best_sigma


def canonical_word(g: PermGroup, word: Sequence) -> tuple:
    if g.order == 1:
        return tuple(word)
    return min(act(word, s) for s in g.elements)
