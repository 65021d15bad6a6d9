"""Fraisse-class backends: equality, total order and the random graph.

A backend bundles the finite-structure combinatorics of its class (membership,
automorphisms, embeddings, one-point extensions, amalgams, canonical forms)
with a concrete presentation of the limit structure, so that every abstract
configuration can be realized by actual data values:

* equality: natural numbers, no relations;
* order: exact rationals with ``<``;
* graph: natural numbers, where for ``x < y`` the vertices are adjacent iff
  bit ``x`` of ``y`` is set.

Structures have carrier ``{0..n-1}`` and a set of facts ``(rel, (i, j))``.
Order facts list every pair ``i < j`` of the strict order (transitively
closed); graph facts list every edge in both directions.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .perm import Perm, PermGroup


class StructError(ValueError):
    pass


@dataclass(frozen=True)
class FinStruct:
    n: int
    facts: frozenset = frozenset()

    def __post_init__(self):
        for rel, args in self.facts:
            for x in args:
                if not 0 <= x < self.n:
                    raise StructError(f"fact {rel}{args} refers outside carrier of size {self.n}")

    @classmethod
    def make(cls, n: int, facts: Iterable = ()) -> FinStruct:
        return cls(n, frozenset((rel, tuple(args)) for rel, args in facts))

    def sorted_facts(self) -> tuple:
        return tuple(sorted(self.facts))

    def pairs(self, rel: str) -> frozenset:
        return frozenset(args for r, args in self.facts if r == rel)

    def __str__(self) -> str:
        parts = [f"n={self.n}"]
        seen = set()
        for rel, (i, j) in self.sorted_facts():
            if rel == "E":
                if (j, i) in seen:
                    continue
                seen.add((i, j))
                parts.append(f"E({i},{j})")
            else:
                parts.append(f"{i}{rel}{j}")
        return "struct{" + "; ".join(parts) + "}"


def relabel(s: FinStruct, pi: Sequence[int]) -> FinStruct:
    """Rename carrier element ``x`` to ``pi[x]``."""
    return FinStruct(s.n, frozenset((rel, tuple(pi[x] for x in args)) for rel, args in s.facts))


def restrict(s: FinStruct, indices: Sequence[int]) -> FinStruct:
    """Substructure on ``indices``; ``indices[k]`` becomes element ``k``."""
    pos = {x: k for k, x in enumerate(indices)}
    if len(pos) != len(indices):
        raise StructError(f"repeated index in {indices}")
    facts = frozenset(
        (rel, tuple(pos[x] for x in args))
        for rel, args in s.facts
        if all(x in pos for x in args)
    )
    return FinStruct(len(indices), facts)


def _preserves(s_rels, t_rels, f: Sequence[int], pairs: Iterable[tuple[int, int]]) -> bool:
    for x, y in pairs:
        for rs, rt in zip(s_rels, t_rels):
            if ((x, y) in rs) != ((f[x], f[y]) in rt):
                return False
    return True


class Backend:
    """Common machinery; subclasses fix the signature and the limit."""

    name = ""
    relations: tuple[str, ...] = ()

    # -- structures ---------------------------------------------------

    def close(self, n: int, facts: Iterable) -> FinStruct:
        return FinStruct.make(n, facts)

    def member(self, s: FinStruct) -> bool:
        raise NotImplementedError

    def _rels(self, s: FinStruct) -> list[frozenset]:
        return [s.pairs(r) for r in self.relations]

    def is_embedding(self, b: FinStruct, a: FinStruct, f: Sequence[int]) -> bool:
        if len(f) != b.n or len(set(f)) != len(f) or any(not 0 <= x < a.n for x in f):
            return False
        pairs = itertools.permutations(range(b.n), 2)
        return _preserves(self._rels(b), self._rels(a), f, pairs)

    def is_automorphism(self, s: FinStruct, p: Sequence[int]) -> bool:
        return self.is_embedding(s, s, p)

    def embeddings(self, b: FinStruct, a: FinStruct) -> list[tuple[int, ...]]:
        """All embeddings of ``b`` into ``a`` as index sequences, in lexicographic order."""
        rb, ra = self._rels(b), self._rels(a)
        out: list[tuple[int, ...]] = []
        f: list[int] = []
        used = set()

        def extend():
            k = len(f)
            if k == b.n:
                out.append(tuple(f))
                return
            for y in range(a.n):
                if y in used:
                    continue
                f.append(y)
                ok = True
                for x in range(k):
                    for rs, rt in zip(rb, ra):
                        if ((x, k) in rs) != ((f[x], y) in rt) or ((k, x) in rs) != ((y, f[x]) in rt):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    used.add(y)
                    extend()
                    used.discard(y)
                f.pop()

        extend()
        return out

    def automorphisms(self, s: FinStruct) -> PermGroup:
        if not self.member(s):
            raise StructError(f"{s} is not a {self.name} structure")
        return PermGroup(s.n, frozenset(Perm._trusted(f) for f in self.embeddings(s, s)))

    def one_point_extensions(self, a: FinStruct) -> list[FinStruct]:
        raise NotImplementedError

    def amalgams(self, a: FinStruct, b: FinStruct, j: Sequence[int], c: int) -> list[FinStruct]:
        """Structures on ``c`` points extending ``a`` (on ``0..a.n-1``) and ``b`` (placed by ``j``).

        ``j`` must agree with ``a`` on the shared indices; the shared part is
        assumed to be a partial isomorphism already.
        """
        raise NotImplementedError

    def canonical_form(self, s: FinStruct) -> tuple[FinStruct, Perm]:
        """Isomorphism-invariant representative and the relabeling reaching it."""
        return _canonical_cached(self, s)

    def _canonical(self, s: FinStruct) -> tuple[FinStruct, Perm]:
        raise NotImplementedError

    # -- the limit ----------------------------------------------------

    def induced_struct(self, values: Sequence) -> FinStruct:
        if len(set(values)) != len(values):
            raise StructError(f"values are not pairwise distinct: {list(values)}")
        return self._induced(list(values))

    def _induced(self, values: list) -> FinStruct:
        raise NotImplementedError

    def witness(self, a_star: FinStruct, valuation: Sequence, forbidden=frozenset()):
        """A value ``d`` outside ``valuation`` and ``forbidden`` realizing ``a_star`` over ``valuation``."""
        raise NotImplementedError

    def realize(self, shape: FinStruct, forbidden=frozenset()) -> tuple:
        """Concrete distinct values inducing ``shape``, chosen one by one."""
        vals: list = []
        for k in range(shape.n):
            d = self.witness(restrict(shape, range(k + 1)), vals, forbidden)
            vals.append(d)
        return tuple(vals)

    def extension_type(self, valuation: Sequence, d) -> FinStruct:
        return self.induced_struct(list(valuation) + [d])

    # -- values -------------------------------------------------------

    def parse_value(self, text: str):
        raise NotImplementedError

    def format_value(self, v) -> str:
        return str(v)

    def fresh_values(self, used: Iterable, count: int) -> list:
        """``count`` values outside ``used`` (no structural requirement)."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{self.name} backend>"


@lru_cache(maxsize=None)
def _canonical_cached(backend: Backend, s: FinStruct):
    return backend._canonical(s)


class EqualityBackend(Backend):
    name = "equality"
    relations = ()

    def member(self, s: FinStruct) -> bool:
        return not s.facts

    def is_embedding(self, b, a, f) -> bool:
        return len(f) == b.n and len(set(f)) == len(f) and all(0 <= x < a.n for x in f)

    def embeddings(self, b, a):
        return list(itertools.permutations(range(a.n), b.n))

    def one_point_extensions(self, a):
        return [FinStruct(a.n + 1)]

    def amalgams(self, a, b, j, c):
        return [FinStruct(c)]

    def _canonical(self, s):
        return s, Perm.identity(s.n)

    def _induced(self, values):
        return FinStruct(len(values))

    def witness(self, a_star, valuation, forbidden=frozenset()):
        taken = set(valuation) | set(forbidden)
        d = 0
        while d in taken:
            d += 1
        return d

    def parse_value(self, text):
        text = text.strip()
        if not re.fullmatch(r"\d+", text):
            raise ValueError(f"not a natural number: {text!r}")
        return int(text)

    def fresh_values(self, used, count):
        used = set(used)
        out = []
        d = 0
        while len(out) < count:
            if d not in used:
                out.append(d)
            d += 1
        return out


class OrderBackend(Backend):
    name = "order"
    relations = ("<",)

    def close(self, n, facts):
        less = {tuple(args) for rel, args in facts if rel == "<"}
        for rel, args in facts:
            if rel != "<":
                raise StructError(f"relation {rel!r} not in the order signature")
        changed = True
        while changed:
            changed = False
            for (x, y), (y2, z) in itertools.product(list(less), list(less)):
                if y == y2 and (x, z) not in less:
                    less.add((x, z))
                    changed = True
        return FinStruct.make(n, (("<", p) for p in less))

    def member(self, s):
        less = s.pairs("<")
        if any(rel != "<" for rel, _ in s.facts):
            return False
        for x in range(s.n):
            if (x, x) in less:
                return False
            for y in range(x + 1, s.n):
                if ((x, y) in less) == ((y, x) in less):
                    return False
        for (x, y) in less:
            for z in range(s.n):
                if (y, z) in less and (x, z) not in less:
                    return False
        return True

    @staticmethod
    def ranks(s: FinStruct) -> list[int]:
        """Position of each element in the order (number of elements below it)."""
        below = [0] * s.n
        for _, (x, y) in s.facts:
            below[y] += 1
        return below

    def chain(self, n: int) -> FinStruct:
        return FinStruct.make(n, (("<", (i, j)) for i in range(n) for j in range(i + 1, n)))

    def embeddings(self, b, a):
        # an order embedding is determined by an increasing choice of images
        rb, ra = self.ranks(b), self.ranks(a)
        by_rank_a = sorted(range(a.n), key=lambda x: ra[x])
        out = []
        for chosen in itertools.combinations(by_rank_a, b.n):
            out.append(tuple(chosen[rb[x]] for x in range(b.n)))
        return sorted(out)

    def automorphisms(self, s):
        if not self.member(s):
            raise StructError(f"{s} is not a total order")
        return PermGroup.trivial(s.n)

    def one_point_extensions(self, a):
        rank = self.ranks(a)
        out = []
        for pos in range(a.n + 1):
            facts = set(a.facts)
            for x in range(a.n):
                facts.add(("<", (x, a.n)) if rank[x] < pos else ("<", (a.n, x)))
            out.append(FinStruct(a.n + 1, frozenset(facts)))
        return out

    def amalgams(self, a, b, j, c):
        ra, rb = self.ranks(a), self.ranks(b)
        seq_a = sorted(range(a.n), key=lambda x: ra[x])
        seq_b = [j[y] for y in sorted(range(b.n), key=lambda y: rb[y])]
        shared = set(seq_a) & set(seq_b)
        merged: list[list[int]] = []

        def merge(i, k, acc):
            if i == len(seq_a) and k == len(seq_b):
                merged.append(list(acc))
                return
            ha = seq_a[i] if i < len(seq_a) else None
            hb = seq_b[k] if k < len(seq_b) else None
            if ha is not None and ha == hb:
                merge(i + 1, k + 1, acc + [ha])
                return
            if ha is not None and ha not in shared:
                merge(i + 1, k, acc + [ha])
            if hb is not None and hb not in shared:
                merge(i, k + 1, acc + [hb])

        merge(0, 0, [])
        out = []
        for seq in merged:
            facts = frozenset(("<", (seq[p], seq[q])) for p in range(c) for q in range(p + 1, c))
            out.append(FinStruct(c, facts))
        return out

    def _canonical(self, s):
        pi = Perm._trusted(self.ranks(s))
        return relabel(s, pi), pi

    def _induced(self, values):
        n = len(values)
        facts = frozenset(
            ("<", (i, j)) for i in range(n) for j in range(n) if values[i] < values[j]
        )
        return FinStruct(n, facts)

    def witness(self, a_star, valuation, forbidden=frozenset()):
        n = len(valuation)
        below = [valuation[i] for i in range(n) if ("<", (i, n)) in a_star.facts]
        above = [valuation[i] for i in range(n) if ("<", (n, i)) in a_star.facts]
        taken = set(valuation) | set(forbidden)
        lo = max(below) if below else None
        hi = min(above) if above else None
        if lo is not None and hi is not None:
            d = (lo + hi) / 2
            while d in taken:
                hi = d
                d = (lo + hi) / 2
            return Fraction(d)
        if lo is not None:
            d = Fraction(lo) + 1
            while d in taken:
                d += 1
            return d
        if hi is not None:
            d = Fraction(hi) - 1
            while d in taken:
                d -= 1
            return d
        d = Fraction(0)
        while d in taken:
            d += 1
        return d

    def parse_value(self, text):
        text = text.strip()
        if not re.fullmatch(r"-?\d+(/\d+)?", text):
            raise ValueError(f"not a rational number: {text!r}")
        v = Fraction(text)
        return v

    def fresh_values(self, used, count):
        used = set(used)
        top = max(used) if used else Fraction(-1)
        return [Fraction(top) + k + 1 for k in range(count)]


def rado_adjacent(x: int, y: int) -> bool:
    if x == y:
        return False
    if x > y:
        x, y = y, x
    return x < y.bit_length() and (y >> x) & 1 == 1


class GraphBackend(Backend):
    name = "graph"
    relations = ("E",)
    search_limit = 1024

    def close(self, n, facts):
        edges = set()
        for rel, (x, y) in facts:
            if rel != "E":
                raise StructError(f"relation {rel!r} not in the graph signature")
            edges.add((x, y))
            edges.add((y, x))
        return FinStruct.make(n, (("E", e) for e in edges))

    def member(self, s):
        if any(rel != "E" for rel, _ in s.facts):
            return False
        edges = s.pairs("E")
        return all(x != y and (y, x) in edges for x, y in edges)

    def one_point_extensions(self, a):
        out = []
        for mask in range(1 << a.n):
            facts = set(a.facts)
            for x in range(a.n):
                if mask >> x & 1:
                    facts.add(("E", (x, a.n)))
                    facts.add(("E", (a.n, x)))
            out.append(FinStruct(a.n + 1, frozenset(facts)))
        return out

    def amalgams(self, a, b, j, c):
        base = set(a.facts)
        for _, (x, y) in b.facts:
            base.add(("E", (j[x], j[y])))
        image = set(j)
        a_only = [x for x in range(a.n) if x not in image]
        b_only = [y for y in range(a.n, c)]
        free = [(x, y) for x in a_only for y in b_only]
        out = []
        for choice in itertools.product((False, True), repeat=len(free)):
            facts = set(base)
            for (x, y), on in zip(free, choice):
                if on:
                    facts.add(("E", (x, y)))
                    facts.add(("E", (y, x)))
            out.append(FinStruct(c, frozenset(facts)))
        return out

    def _canonical(self, s):
        n = s.n
        edges = s.pairs("E")
        deg = [sum(1 for y in range(n) if (x, y) in edges) for x in range(n)]
        # only relabelings listing vertices by decreasing degree are tried;
        # degree is invariant, so the minimum is still an isomorphism invariant
        classes: dict[int, list[int]] = {}
        for x in range(n):
            classes.setdefault(-deg[x], []).append(x)
        blocks = [classes[k] for k in sorted(classes)]
        best = None
        best_pi = None
        for combo in itertools.product(*(itertools.permutations(b) for b in blocks)):
            order = [x for block in combo for x in block]
            pi = [0] * n
            for new, old in enumerate(order):
                pi[old] = new
            key = tuple(sorted((pi[x], pi[y]) for x, y in edges))
            if best is None or key < best:
                best, best_pi = key, pi
        pi = Perm._trusted(best_pi if best_pi is not None else range(n))
        return relabel(s, pi), pi

    def _induced(self, values):
        n = len(values)
        facts = frozenset(
            ("E", (i, j))
            for i in range(n)
            for j in range(n)
            if i != j and rado_adjacent(values[i], values[j])
        )
        return FinStruct(n, facts)

    def witness(self, a_star, valuation, forbidden=frozenset()):
        n = len(valuation)
        want = [("E", (i, n)) in a_star.facts for i in range(n)]
        taken = set(valuation) | set(forbidden)
        for d in range(self.search_limit):
            if d in taken:
                continue
            if all(rado_adjacent(v, d) == w for v, w in zip(valuation, want)):
                return d
        top = max(taken) + 1 if taken else 0
        d = 1 << top
        for v, w in zip(valuation, want):
            if w:
                d |= 1 << v
        return d

    def parse_value(self, text):
        text = text.strip()
        m = re.fullmatch(r"g?(\d+)", text)
        if not m:
            raise ValueError(f"not a graph vertex: {text!r}")
        return int(m.group(1))

    def format_value(self, v):
        return f"g{v}"

    def fresh_values(self, used, count):
        return EqualityBackend.fresh_values(self, used, count)


EQUALITY = EqualityBackend()
ORDER = OrderBackend()
GRAPH = GraphBackend()
BACKENDS = {b.name: b for b in (EQUALITY, ORDER, GRAPH)}


def get_backend(name: str) -> Backend:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown symmetry {name!r}; expected one of {sorted(BACKENDS)}") from None


def partial_isos(backend: Backend, a: FinStruct, b: FinStruct):
    """Partial injections ``rho`` from ``a`` to ``b`` that are isomorphisms of the induced parts.

    Each is a tuple of length ``a.n`` holding the matched index of ``b`` or -1.
    """
    ra, rb = backend._rels(a), backend._rels(b)
    rho = [-1] * a.n
    used = set()
    out = []

    def go(x):
        if x == a.n:
            out.append(tuple(rho))
            return
        go(x + 1)
        for y in range(b.n):
            if y in used:
                continue
            ok = True
            for x2 in range(x):
                y2 = rho[x2]
                if y2 < 0:
                    continue
                for r1, r2 in zip(ra, rb):
                    if ((x, x2) in r1) != ((y, y2) in r2) or ((x2, x) in r1) != ((y2, y) in r2):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                rho[x] = y
                used.add(y)
                go(x + 1)
                used.discard(y)
                rho[x] = -1

    go(0)
    return out
