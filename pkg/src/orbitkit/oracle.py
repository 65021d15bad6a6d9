"""Brute-force semantics over finite sets of data values.

Everything here enumerates concrete objects.  Relations between values are
recomputed locally (see ``pattern`` and ``adjacent``) instead of going through the
backends, so orbit counts and languages obtained here are an independent
check on the symbolic machinery.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import automata
from .automata import FraisseDFA
from .fma import FMA, And, Atom, Const, Not, evaluate
from .nfa import NominalNFA
from .nomset import Element, NomSet, pair
from .perm import act
from .symmetry import Backend, get_backend


def adjacent(x: int, y: int) -> bool:
    """Edge relation of the random graph on naturals: bit ``min`` of ``max``."""
    if x == y:
        return False
    lo, hi = min(x, y), max(x, y)
    return (hi >> lo) & 1 == 1


def pattern(kind: str, values: Sequence) -> tuple:
    """Relations among ``values`` (assumed distinct), positionally."""
    if kind == "equality":
        return ()
    n = len(values)
    if kind == "order":
        return tuple(values[i] < values[j] for i in range(n) for j in range(i + 1, n))
    return tuple(adjacent(values[i], values[j]) for i in range(n) for j in range(i + 1, n))


@dataclass(frozen=True)
class FiniteDomain:
    backend: Backend
    values: tuple

    def __post_init__(self):
        if len(set(self.values)) != len(self.values):
            raise ValueError("domain values must be distinct")

    @classmethod
    def parse(cls, backend: Backend | str, text: str) -> FiniteDomain:
        if isinstance(backend, str):
            backend = get_backend(backend)
        vals = [backend.parse_value(t) for t in text.replace(",", " ").split()]
        return cls(backend, tuple(vals))

    @classmethod
    def default(cls, backend: Backend | str, size: int) -> FiniteDomain:
        if isinstance(backend, str):
            backend = get_backend(backend)
        return cls(backend, tuple(range(size)))


@dataclass
class ClassicalAutomaton:
    alphabet: tuple
    initial: frozenset
    accepting_pred: object  # state -> bool
    successors: object  # (state, letter) -> iterable of states
    _cache: dict = field(default_factory=dict, repr=False)

    def _succ(self, s, a) -> frozenset:
        key = (s, a)
        if key not in self._cache:
            self._cache[key] = frozenset(self.successors(s, a))
        return self._cache[key]

    def step(self, states: frozenset, a) -> frozenset:
        out = set()
        for s in states:
            out |= self._succ(s, a)
        return frozenset(out)

    def accepts(self, word: Sequence) -> bool:
        cur = self.initial
        for a in word:
            cur = self.step(cur, a)
            if not cur:
                return False
        return any(self.accepting_pred(s) for s in cur)

    def language_upto(self, maxlen: int) -> set[tuple]:
        """Accepted words of length at most ``maxlen``, by breadth-first expansion."""
        out = set()
        layer = {(): self.initial}
        for length in range(maxlen + 1):
            nxt = {}
            for w, cur in layer.items():
                if any(self.accepting_pred(s) for s in cur):
                    out.add(w)
                if length == maxlen:
                    continue
                for a in self.alphabet:
                    st = self.step(cur, a)
                    if st:
                        nxt[w + (a,)] = st
            layer = nxt
        return out


def language_upto(c: ClassicalAutomaton, maxlen: int) -> set[tuple]:
    return c.language_upto(maxlen)


def words(alphabet: Sequence, maxlen: int) -> Iterable[tuple]:
    for n in range(maxlen + 1):
        yield from itertools.product(alphabet, repeat=n)


# -- restrictions of automata ------------------------------------------------------


def _check_backend(obj_backend: Backend, dom: FiniteDomain):
    if obj_backend is not dom.backend:
        raise ValueError(f"domain is for {dom.backend.name}, automaton uses {obj_backend.name}")


def reachable_states(c: ClassicalAutomaton) -> list[frozenset]:
    """Reachable subset-states, in breadth-first order."""
    seen = {c.initial: None}
    todo = [c.initial]
    while todo:
        cur = todo.pop(0)
        for a in c.alphabet:
            nxt = c.step(cur, a)
            if nxt not in seen:
                seen[nxt] = None
                todo.append(nxt)
    return list(seen)


def myhill_nerode_classes(c: ClassicalAutomaton) -> int:
    """Number of residual classes of the language, by Moore refinement."""
    states = reachable_states(c)
    block = {s: int(any(c.accepting_pred(x) for x in s)) for s in states}
    while True:
        sig = {s: (block[s],) + tuple(block[c.step(s, a)] for a in c.alphabet) for s in states}
        ids = {k: i for i, k in enumerate(sorted(set(sig.values())))}
        new = {s: ids[sig[s]] for s in states}
        if len(ids) == len(set(block.values())):
            return len(ids)
        block = new


def restrict_dfa(d: FraisseDFA, dom: FiniteDomain) -> ClassicalAutomaton:
    _check_backend(d.backend, dom)
    return ClassicalAutomaton(
        alphabet=dom.values,
        initial=frozenset([automata.initial_config(d)]),
        accepting_pred=lambda c: c.orbit in d.accepting,
        successors=lambda c, v: [automata.step(d, c, v)],
    )


def elements_over(s: NomSet, values: Sequence) -> list[Element]:
    """All elements of ``s`` whose valuation uses only ``values``."""
    out = []
    for oid, o in enumerate(s.orbits):
        seen = set()
        for v in itertools.permutations(values, o.size):
            if not _fits(s.backend, o.shape, v):
                continue
            canon = min(act(v, g) for g in o.sym)
            if canon not in seen:
                seen.add(canon)
                out.append(Element(oid, canon))
    return out


def _fits(backend: Backend, shape, v: Sequence) -> bool:
    kind = backend.name
    if kind == "equality":
        return True
    n = len(v)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if kind == "order":
                if (("<", (i, j)) in shape.facts) != (v[i] < v[j]):
                    return False
            elif (("E", (i, j)) in shape.facts) != adjacent(v[i], v[j]):
                return False
    return True


def extra_values(dom: FiniteDomain, count: int) -> list:
    """Values outside the domain used for guessed register contents."""
    if dom.backend.name == "order":
        top = max(dom.values, default=0)
        return [top + 1 + k for k in range(count)]
    top = max(dom.values, default=-1)
    return [top + 1 + k for k in range(count)]


def restrict_nfa(a: NominalNFA, dom: FiniteDomain, extras: int | None = None) -> ClassicalAutomaton:
    """Classical NFA over ``dom``; states may also use a few values outside ``dom``.

    Exact whenever guessed values only need to be fresh for the current
    configuration (always true for the equality symmetry).
    """
    _check_backend(a.backend, dom)
    k = max((o.size for o in a.states.orbits), default=0)
    pool = list(dom.values) + extra_values(dom, 2 * k if extras is None else extras)
    states = elements_over(a.states, pool)
    by_orbit: dict[int, list] = {}
    for q in states:
        by_orbit.setdefault(q.orbit, []).append(q)
    letters = elements_over(a.alphabet, dom.values)

    def eps_closure(qs: Iterable) -> set:
        seen = set(qs)
        todo = list(seen)
        while todo and a.eps:
            q = todo.pop()
            for q2 in states:
                if q2 not in seen and a.has_eps(q, q2):
                    seen.add(q2)
                    todo.append(q2)
        return seen

    def succ(q, l):
        out = set()
        e = pair(a.qa, q, l)
        targets = {a.qaq.tags[z].right for z in a.trans_from(e.orbit)}
        for t in targets:
            for q2 in by_orbit.get(t, ()):
                if pair(a.qaq, e, q2).orbit in a.trans:
                    out.add(q2)
        return eps_closure(out)

    init = eps_closure(q for q in states if q.orbit in a.initial)
    return ClassicalAutomaton(
        alphabet=tuple(letters),
        initial=frozenset(init),
        accepting_pred=lambda q: q.orbit in a.accepting,
        successors=succ,
    )


def restrict_fma(m: FMA, dom: FiniteDomain) -> ClassicalAutomaton:
    """Configurations are (control, registers) with registers over ``dom`` plus extras or unset."""
    pool = list(dom.values) + extra_values(dom, 2 * m.registers)
    reg_choices = list(itertools.product([None] + pool, repeat=m.registers))
    letters = tuple((lab, v) for lab in m.labels for v in dom.values)

    by_source: dict = {}
    for c0, lab0, phi, c2 in m.trans:
        by_source.setdefault((c0, lab0), []).append((phi, _compiled(phi), c2))

    def succ(cfg, letter):
        c, regs = cfg
        lab, d = letter
        out = set()
        for phi, test, c2 in by_source.get((c, lab), ()):
            if _settled(phi, regs, d) is False:
                continue
            for after in reg_choices:
                if test(regs, d, after):
                    out.add((c2, after))
        return out

    none = (None,) * m.registers
    return ClassicalAutomaton(
        alphabet=letters,
        initial=frozenset((c, none) for c in m.initial),
        accepting_pred=lambda cfg: cfg[0] in m.accepting,
        successors=succ,
    )


def _source(c) -> str:
    if isinstance(c, Const):
        return repr(c.value)
    if isinstance(c, Atom):
        x, y = (("d" if n[0] == "input" else f"{n[0][0]}[{n[1]}]") for n in (c.left, c.right))
        return f"({x} is not None and {y} is not None and {x} {c.op} {y})"
    if isinstance(c, Not):
        return f"(not {_source(c.arg)})"
    joiner = " and " if isinstance(c, And) else " or "
    return "(" + joiner.join(_source(a) for a in c.args) + ")"


def _compiled(c):
    """The constraint as a function of (before, input, after); unset registers are None."""
    return eval(f"lambda b, d, a: {_source(c)}")


def _settled(c, before, d):
    """Three-valued value of a constraint when the ``after`` registers are unknown."""
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Atom):
        if c.left[0] == "after" or c.right[0] == "after":
            return None
        return evaluate(c, before, d, ())
    if isinstance(c, Not):
        v = _settled(c.arg, before, d)
        return None if v is None else not v
    vals = [_settled(a, before, d) for a in c.args]
    if isinstance(c, And):
        if False in vals:
            return False
        return None if None in vals else True
    if True in vals:
        return True
    return None if None in vals else False


def restrict(obj, dom: FiniteDomain) -> ClassicalAutomaton:
    if isinstance(obj, FraisseDFA):
        return restrict_dfa(obj, dom)
    if isinstance(obj, NominalNFA):
        return restrict_nfa(obj, dom)
    if isinstance(obj, FMA):
        return restrict_fma(obj, dom)
    raise TypeError(f"cannot restrict {type(obj).__name__}")


# -- orbit counting ---------------------------------------------------------------


def arity(node) -> int:
    kind = node[0]
    if kind == "atom":
        return 1
    if kind in ("tuple", "dtuple", "otuple"):
        return node[1]
    if kind == "set2":
        return 2
    if kind == "prod":
        return arity(node[1]) + arity(node[2])
    if kind == "sum":
        return max(arity(node[1]), arity(node[2]))
    if kind == "lit":
        return max(int(s.split("=")[1].split(";")[0].split("}")[0]) for s, _ in node[1])
    raise ValueError(f"unknown node {kind!r}")


def concrete_elements(node, dom: FiniteDomain) -> list:
    """Concrete elements of the expression over ``dom``."""
    kind = node[0]
    vals = dom.values
    b = dom.backend.name
    if kind == "atom":
        return [("v", x) for x in vals]
    if kind == "tuple":
        return [("t",) + tuple(("v", x) for x in t) for t in itertools.product(vals, repeat=node[1])]
    if kind == "dtuple":
        return [("t",) + tuple(("v", x) for x in t) for t in itertools.permutations(vals, node[1])]
    if kind == "otuple":
        if b != "order":
            raise ValueError("otuple needs the order symmetry")
        return [("t",) + tuple(("v", x) for x in t) for t in itertools.combinations(sorted(vals), node[1])]
    if kind == "set2":
        return [("s", frozenset([("v", x), ("v", y)])) for x, y in itertools.combinations(vals, 2)]
    if kind == "prod":
        return [("t", x, y) for x in concrete_elements(node[1], dom) for y in concrete_elements(node[2], dom)]
    if kind == "sum":
        return [("tag", 0, x) for x in concrete_elements(node[1], dom)] + [
            ("tag", 1, y) for y in concrete_elements(node[2], dom)
        ]
    if kind == "lit":
        from .formats import build_sym, parse_struct

        out = []
        for i, (text, sym) in enumerate(node[1]):
            shape = parse_struct(dom.backend, text)
            group = build_sym(shape.n, sym)
            seen = set()
            for v in itertools.permutations(vals, shape.n):
                if not _fits(dom.backend, shape, v):
                    continue
                images = frozenset(tuple(v[g[k]] for k in range(shape.n)) for g in group)
                if images not in seen:
                    seen.add(images)
                    out.append(("lit", i, frozenset(("t",) + tuple(("v", x) for x in t) for t in images)))
        return out
    raise ValueError(f"unknown node {kind!r}")


def _readings(x) -> list[list]:
    """Flat token sequences describing ``x``; one per way of ordering its unordered parts."""
    kind = x[0]
    if kind == "v":
        return [[x]]
    if kind == "t":
        out = [[("(",)]]
        for part in x[1:]:
            out = [a + b for a in out for b in _readings(part)]
        return [a + [(")",)] for a in out]
    if kind == "s":
        out = []
        for order in itertools.permutations(sorted(x[1], key=repr)):
            out.extend(_readings(("t",) + order))
        return out
    if kind == "tag":
        return [[("tag", x[1])] + r for r in _readings(x[2])]
    if kind == "lit":
        return [[("lit", x[1])] + r for t in sorted(x[2], key=repr) for r in _readings(t)]
    raise ValueError(f"bad element {x!r}")


def orbit_key(x, kind: str) -> tuple:
    best = None
    for toks in _readings(x):
        first: dict = {}
        seq = []
        for t in toks:
            if t[0] == "v":
                first.setdefault(t[1], len(first))
                seq.append(("v", first[t[1]]))
            else:
                seq.append(t)
        order = sorted(first, key=first.get)
        key = (tuple(seq), pattern(kind, order))
        if best is None or key < best:
            best = key
    return best


@dataclass(frozen=True)
class CountResult:
    count: int
    elements: int
    warning: str | None = None


def orbit_count_bruteforce(node, dom: FiniteDomain) -> CountResult:
    if isinstance(node, str):
        from .expr import parse_expr

        node = parse_expr(node)
    warning = None
    need = arity(node) + 2
    if len(dom.values) < need:
        warning = f"domain of {len(dom.values)} values may be too small; use at least {need}"
    elems = concrete_elements(node, dom)
    keys = {orbit_key(x, dom.backend.name) for x in elems}
    return CountResult(len(keys), len(elems), warning)
