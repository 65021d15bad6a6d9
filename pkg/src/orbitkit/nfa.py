"""Orbit-finite nondeterministic automata.

States and letters are orbit-finite sets; the transition relation is a union
of orbits of ``(Q * A) * Q`` (the product is associated to the left), and the
optional epsilon relation a union of orbits of ``Q * Q``.

Membership is decided by a subset simulation over configurations taken up to
automorphisms that fix every value occurring in the input word.  Values that
do not occur in the word are renamed to deterministic witnesses of the same
type, which keeps the explored set finite.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .nomset import (
    Element,
    NomSet,
    ProductResult,
    extend_valuations,
    normalize_fresh,
    pair,
    product,
    unpair,
)
from .perm import act, canonical_under
from .symmetry import Backend


class NFAError(ValueError):
    pass


class InconclusiveError(RuntimeError):
    """The simulation exceeded the configured configuration cap."""


CAP_ENV = "ORBITKIT_NFA_CAP"
DEFAULT_CAP = 200_000


@dataclass(eq=False)
class NominalNFA:
    backend: Backend
    state_names: tuple
    states: NomSet
    letter_names: tuple
    alphabet: NomSet
    initial: frozenset
    accepting: frozenset
    trans: frozenset  # orbit ids of qaq
    eps: frozenset = frozenset()  # orbit ids of qq
    _index: dict = field(default_factory=dict, repr=False)

    @cached_property
    def qa(self) -> ProductResult:
        return product(self.states, self.alphabet)

    @cached_property
    def qaq(self) -> ProductResult:
        return product(self.qa.set, self.states)

    @cached_property
    def qq(self) -> ProductResult:
        return product(self.states, self.states)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise NFAError(f"unknown state {name!r}") from None

    def letter_index(self, name: str) -> int:
        try:
            return self.letter_names.index(name)
        except ValueError:
            raise NFAError(f"unknown letter {name!r}") from None

    def has_transition(self, q: Element, a: Element, q2: Element) -> bool:
        return pair(self.qaq, pair(self.qa, q, a), q2).orbit in self.trans

    def has_eps(self, q: Element, q2: Element) -> bool:
        return bool(self.eps) and pair(self.qq, q, q2).orbit in self.eps

    def trans_from(self, left: int) -> list[int]:
        key = ("t", left)
        if key not in self._index:
            self._index[key] = sorted(z for z in self.trans if self.qaq.tags[z].left == left)
        return self._index[key]

    def eps_from(self, left: int) -> list[int]:
        key = ("e", left)
        if key not in self._index:
            self._index[key] = sorted(z for z in self.eps if self.qq.tags[z].left == left)
        return self._index[key]

    def letter(self, name: str | None, values: Sequence) -> Element:
        if name is None:
            if len(self.letter_names) != 1:
                raise NFAError("letters must be labeled: the alphabet has several orbits")
            oid = 0
        else:
            oid = self.letter_index(name)
        try:
            return self.alphabet.element(oid, tuple(values))
        except ValueError as exc:
            raise NFAError(f"bad letter {name}:{list(values)}: {exc}") from None


def from_predicate(
    backend: Backend,
    state_names: Sequence[str],
    states: NomSet,
    letter_names: Sequence[str],
    alphabet: NomSet,
    pred: Callable[[Element, Element, Element], bool],
    initial: Iterable[int],
    accepting: Iterable[int],
    eps_pred: Callable[[Element, Element], bool] | None = None,
) -> NominalNFA:
    """NFA whose transition orbits are those whose representative satisfies ``pred``."""
    nfa = NominalNFA(
        backend, tuple(state_names), states, tuple(letter_names), alphabet,
        frozenset(initial), frozenset(accepting), frozenset(),
    )
    trans = set()
    for z in range(len(nfa.qaq.set.orbits)):
        e, q2 = unpair(nfa.qaq, nfa.qaq.set.realize(z))
        q, a = unpair(nfa.qa, e)
        if pred(q, a, q2):
            trans.add(z)
    nfa.trans = frozenset(trans)
    if eps_pred is not None:
        eps = set()
        for z in range(len(nfa.qq.set.orbits)):
            q, q2 = unpair(nfa.qq, nfa.qq.set.realize(z))
            if eps_pred(q, q2):
                eps.add(z)
        nfa.eps = frozenset(eps)
    return nfa


# -- simulation ---------------------------------------------------------------


def _cap() -> int:
    try:
        return int(os.environ.get(CAP_ENV, DEFAULT_CAP))
    except ValueError:
        return DEFAULT_CAP


class _Sim:
    def __init__(self, nfa: NominalNFA, context: Sequence, cap: int | None = None):
        self.nfa = nfa
        self.backend = nfa.backend
        self.context = sorted(set(context))
        self.cap = _cap() if cap is None else cap
        self.explored = 0

    def norm(self, oid: int, vals: Sequence) -> Element:
        vals = normalize_fresh(self.backend, vals, self.context)
        return Element(oid, canonical_under(self.nfa.states.orbits[oid].sym, vals)[0])

    def _count(self, n: int):
        self.explored += n
        if self.explored > self.cap:
            raise InconclusiveError(
                f"more than {self.cap} configurations explored; raise {CAP_ENV} or pass --cap"
            )

    def _targets(self, prod: ProductResult, z: int, left: Element) -> list[Element]:
        """Right components of the elements of orbit ``z`` whose left component is ``left``."""
        o = prod.set.orbits[z]
        tag = prod.tags[z]
        left_sym = prod.left.orbits[left.orbit].sym
        ctx = list(self.context) + [v for v in left.valuation if v not in self.context]
        out = set()
        for s in left_sym:
            lv = act(left.valuation, s)
            known = {tag.left_inj[k]: lv[k] for k in range(len(lv))}
            for w in extend_valuations(self.backend, o.shape, known, ctx):
                _, right = unpair(prod, Element(z, canonical_under(o.sym, w)[0]))
                out.add(self.norm(right.orbit, right.valuation))
        return sorted(out)

    def initial(self) -> set[Element]:
        out = set()
        for oid in sorted(self.nfa.initial):
            o = self.nfa.states.orbits[oid]
            for w in extend_valuations(self.backend, o.shape, {}, self.context):
                out.add(self.norm(oid, w))
        self._count(len(out))
        return self.closure(out)

    def closure(self, configs: set[Element]) -> set[Element]:
        if not self.nfa.eps:
            return set(configs)
        seen = set(configs)
        todo = list(configs)
        while todo:
            c = todo.pop()
            for z in self.nfa.eps_from(c.orbit):
                for nxt in self._targets(self.nfa.qq, z, c):
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
                        self._count(1)
        return seen

    def step(self, configs: set[Element], letter: Element) -> set[Element]:
        nfa = self.nfa
        out = set()
        for c in configs:
            e = pair(nfa.qa, c, letter)
            for z in nfa.trans_from(e.orbit):
                out.update(self._targets(nfa.qaq, z, e))
        self._count(len(out))
        return self.closure(out)


def word_values(word: Sequence[Element]) -> list:
    vals = []
    for a in word:
        vals.extend(a.valuation)
    return vals


def nfa_member(nfa: NominalNFA, word: Sequence[Element], stats: dict | None = None,
               cap: int | None = None) -> bool:
    """Membership by simulating normalized configurations.

    Raises InconclusiveError after ``cap`` configurations (default from
    the ORBITKIT_NFA_CAP environment variable).
    """
    sim = _Sim(nfa, word_values(word), cap)
    cur = sim.initial()
    for a in word:
        cur = sim.step(cur, a)
        if not cur:
            break
    if stats is not None:
        stats["explored"] = sim.explored
        stats["cap"] = sim.cap
    return any(c.orbit in nfa.accepting for c in cur)


# -- constructions --------------------------------------------------------------


def _same_alphabet(a: NominalNFA, b: NominalNFA) -> None:
    if a.backend is not b.backend:
        raise NFAError("backend mismatch")
    if a.alphabet != b.alphabet or a.letter_names != b.letter_names:
        raise NFAError("alphabet mismatch")


def _joint_names(a: NominalNFA, b: NominalNFA) -> tuple:
    if set(a.state_names) & set(b.state_names):
        return tuple(f"l.{n}" for n in a.state_names) + tuple(f"r.{n}" for n in b.state_names)
    return a.state_names + b.state_names


def _side(k: int, x: Element) -> tuple[int, Element]:
    if x.orbit < k:
        return 0, x
    return 1, Element(x.orbit - k, x.valuation)


def _disjoint(a: NominalNFA, b: NominalNFA, extra_eps=None):
    _same_alphabet(a, b)
    k = len(a.states.orbits)
    parts = (a, b)

    def pred(q, l, q2):
        s1, x = _side(k, q)
        s2, y = _side(k, q2)
        return s1 == s2 and parts[s1].has_transition(x, l, y)

    def eps_pred(q, q2):
        s1, x = _side(k, q)
        s2, y = _side(k, q2)
        if s1 == s2:
            return parts[s1].has_eps(x, y)
        return extra_eps is not None and extra_eps(s1, x, s2, y)

    need_eps = bool(a.eps or b.eps or extra_eps)
    return k, pred, (eps_pred if need_eps else None)


def nfa_union(a: NominalNFA, b: NominalNFA) -> NominalNFA:
    k, pred, eps_pred = _disjoint(a, b)
    return from_predicate(
        a.backend, _joint_names(a, b), a.states + b.states, a.letter_names, a.alphabet, pred,
        set(a.initial) | {k + q for q in b.initial},
        set(a.accepting) | {k + q for q in b.accepting},
        eps_pred,
    )


def nfa_concat(a: NominalNFA, b: NominalNFA) -> NominalNFA:
    def bridge(s1, x, s2, y):
        return s1 == 0 and s2 == 1 and x.orbit in a.accepting and y.orbit in b.initial

    k, pred, eps_pred = _disjoint(a, b, bridge)
    return from_predicate(
        a.backend, _joint_names(a, b), a.states + b.states, a.letter_names, a.alphabet, pred,
        set(a.initial), {k + q for q in b.accepting}, eps_pred,
    )


def eps_eliminate(a: NominalNFA) -> NominalNFA:
    """Equivalent NFA without epsilon moves: transitions become eps* . delta . eps*."""
    if not a.eps:
        return a

    def pred(q, l, q2):
        sim = _Sim(a, list(q.valuation) + list(l.valuation) + list(q2.valuation))
        start = sim.closure({q})
        return q2 in sim.step(start, l)

    accepting = set()
    for oid in range(len(a.states.orbits)):
        q = a.states.realize(oid)
        sim = _Sim(a, q.valuation)
        if any(c.orbit in a.accepting for c in sim.closure({q})):
            accepting.add(oid)
    return from_predicate(
        a.backend, a.state_names, a.states, a.letter_names, a.alphabet, pred,
        a.initial, accepting,
    )
