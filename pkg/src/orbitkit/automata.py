"""Deterministic Fraisse automata over the data alphabet of a backend.

A state is an orbit ``[[A, S]]``; a configuration is a state together with a
valuation of ``A``.  When a letter ``d`` arrives, how ``d`` relates to the
registers is one of finitely many *annotations*: either ``d`` equals a
register (a distinguished register, up to ``S``) or ``d`` is new and the
registers plus ``d`` form a one-point extension of ``A`` (again up to ``S``).
Each annotation has a transition ``(target, witness)``; the witness says, for
every register of the target, which position of the annotated structure it
copies (the new letter sits at position ``n``).
"""
from __future__ import annotations

import operator
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .nomset import (
    Element,
    EqRelation,
    NomSet,
    OrbitRepr,
    apply,
    commutes,
    pair,
    product,
    quotient,
    refill,
    unpair,
)
from .perm import Perm, PermGroup, act, canonical_under
from .symmetry import Backend, FinStruct, relabel


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    key: tuple  # ("reg", r) or ("ext", sorted facts)
    structure: FinStruct
    local_sym: PermGroup

    @property
    def is_ext(self) -> bool:
        return self.key[0] == "ext"

    @property
    def register(self) -> int:
        return self.key[1]


def _hat(sigma: Perm) -> Perm:
    return Perm._trusted(tuple(sigma) + (len(sigma),))


def annotations(backend: Backend, o: OrbitRepr) -> list[Annotation]:
    """All annotations of a state, one per class under the state symmetry."""
    out = []
    seen_regs = set()
    for r in range(o.size):
        if r in seen_regs:
            continue
        orbit_r = {s[r] for s in o.sym.elements}
        seen_regs |= orbit_r
        stab = frozenset(s for s in o.sym.elements if s[r] == r)
        out.append(Annotation(("reg", r), o.shape, PermGroup(o.size, stab)))
    seen = set()
    exts = []
    for ext in backend.one_point_extensions(o.shape):
        variants = {relabel(ext, _hat(s)).sorted_facts(): relabel(ext, _hat(s)) for s in o.sym.elements}
        key = min(variants)
        if key in seen:
            continue
        seen.add(key)
        rep = variants[key]
        stab = frozenset(_hat(s) for s in o.sym.elements if relabel(rep, _hat(s)) == rep)
        exts.append(Annotation(("ext", key), rep, PermGroup(o.size + 1, stab)))
    exts.sort(key=lambda a: a.key)
    return out + exts


def classify(backend: Backend, o: OrbitRepr, u: Sequence, d) -> tuple[tuple, Perm]:
    """Annotation key of letter ``d`` at valuation ``u`` and the ``s`` aligning ``u`` with it."""
    if d in u:
        i = list(u).index(d)
        best = None
        for s in sorted(o.sym.elements):
            r = s.inverse()[i]
            if best is None or r < best[0]:
                best = (r, s)
        return ("reg", best[0]), best[1]
    best = None
    for s in sorted(o.sym.elements):
        facts = backend.induced_struct(list(act(u, s)) + [d]).sorted_facts()
        if best is None or facts < best[0]:
            best = (facts, s)
    return ("ext", best[0]), best[1]


def describe_annotation(backend: Backend, o: OrbitRepr, ann: Annotation) -> str:
    if not ann.is_ext:
        return f"reg {ann.register}"
    n = o.size
    parts = []
    for rel, (x, y) in ann.structure.sorted_facts():
        if n not in (x, y):
            continue
        name = lambda k: "*" if k == n else str(k)
        if rel == "E":
            if x < y:
                parts.append(f"E({name(x)},{name(y)})")
        else:
            parts.append(f"{name(x)}{rel}{name(y)}")
    return "ext{" + "; ".join(parts) + "}"


@dataclass(eq=False)
class FraisseDFA:
    backend: Backend
    names: tuple  # state names, positional
    orbits: tuple  # OrbitRepr per state
    initial: int
    accepting: frozenset
    trans: tuple  # per state: dict annotation key -> (target state, witness)
    _anns: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.validate()

    @property
    def states(self) -> NomSet:
        return NomSet(self.backend, self.orbits)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise AutomatonError(f"unknown state {name!r}") from None

    def annotations(self, q: int) -> list[Annotation]:
        if q not in self._anns:
            self._anns[q] = annotations(self.backend, self.orbits[q])
        return self._anns[q]

    def validate(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise AutomatonError("duplicate state names")
        if self.orbits[self.initial].size != 0:
            raise AutomatonError("the initial state must have no registers")
        for q, o in enumerate(self.orbits):
            table = self.trans[q]
            keys = set()
            for ann in self.annotations(q):
                keys.add(ann.key)
                if ann.key not in table:
                    raise AutomatonError(
                        f"state {self.names[q]}: missing transition for "
                        f"{describe_annotation(self.backend, o, ann)}"
                    )
                target, w = table[ann.key]
                to = self.orbits[target]
                if not self.backend.is_embedding(to.shape, ann.structure, w):
                    raise AutomatonError(
                        f"state {self.names[q]}, {describe_annotation(self.backend, o, ann)}: "
                        f"assignment is not an embedding of the shape of {self.names[target]}"
                    )
                if not commutes(ann.local_sym, w, to.sym):
                    raise AutomatonError(
                        f"state {self.names[q]}, {describe_annotation(self.backend, o, ann)}: "
                        f"assignment does not commute with the local symmetries"
                    )
            extra = set(table) - keys
            if extra:
                raise AutomatonError(f"state {self.names[q]}: transitions for unknown annotations")

    def describe_key(self, q: int, key) -> str:
        for ann in self.annotations(q):
            if ann.key == key:
                return describe_annotation(self.backend, self.orbits[q], ann)
        raise AutomatonError(f"no annotation {key!r} at state {self.names[q]}")


def make_dfa(backend, names, orbits, initial, accepting, trans) -> FraisseDFA:
    """Build a DFA, storing each witness in its canonical form."""
    fixed = []
    for table in trans:
        fixed.append(
            {
                key: (t, canonical_under(orbits[t].sym, w)[0])
                for key, (t, w) in table.items()
            }
        )
    return FraisseDFA(backend, tuple(names), tuple(orbits), initial, frozenset(accepting), tuple(fixed))


def initial_config(dfa: FraisseDFA) -> Element:
    return Element(dfa.initial, ())


def step(dfa: FraisseDFA, c: Element, d) -> Element:
    o = dfa.orbits[c.orbit]
    key, s = classify(dfa.backend, o, c.valuation, d)
    target, w = dfa.trans[c.orbit][key]
    eta = act(c.valuation, s)
    if key[0] == "ext":
        eta = eta + (d,)
    vals = tuple(eta[k] for k in w)
    return Element(target, canonical_under(dfa.orbits[target].sym, vals)[0])


def run_trace(dfa: FraisseDFA, word: Sequence) -> list[Element]:
    c = initial_config(dfa)
    trace = [c]
    for d in word:
        c = step(dfa, c, d)
        trace.append(c)
    return trace


def run(dfa: FraisseDFA, word: Sequence) -> bool:
    c = initial_config(dfa)
    for d in word:
        c = step(dfa, c, d)
    return c.orbit in dfa.accepting


def realize_annotation(backend: Backend, u: Sequence, ann: Annotation, forbidden=frozenset()):
    """A letter with annotation ``ann`` at valuation ``u``, and the annotated valuation."""
    if ann.is_ext:
        d = backend.witness(ann.structure, u, forbidden)
        return d, tuple(u) + (d,)
    return u[ann.register], tuple(u)


def reachable(dfa: FraisseDFA) -> set[int]:
    seen = {dfa.initial}
    todo = deque([dfa.initial])
    while todo:
        q = todo.popleft()
        for target, _ in dfa.trans[q].values():
            if target not in seen:
                seen.add(target)
                todo.append(target)
    return seen


def complement(dfa: FraisseDFA) -> FraisseDFA:
    acc = frozenset(range(len(dfa.orbits))) - dfa.accepting
    return FraisseDFA(dfa.backend, dfa.names, dfa.orbits, dfa.initial, acc, dfa.trans)


def emptiness(dfa: FraisseDFA) -> tuple[bool, list | None]:
    """``(True, None)`` if no word is accepted, else ``(False, shortest witness word)``."""
    start = initial_config(dfa)
    if start.orbit in dfa.accepting:
        return False, []
    seen = {start.orbit}
    todo = deque([(start, [])])
    while todo:
        c, word = todo.popleft()
        for ann in dfa.annotations(c.orbit):
            d, _ = realize_annotation(dfa.backend, c.valuation, ann, set(word))
            nxt = step(dfa, c, d)
            if nxt.orbit in seen:
                continue
            if nxt.orbit in dfa.accepting:
                return False, word + [d]
            seen.add(nxt.orbit)
            todo.append((nxt, word + [d]))
    return True, None


COMBINERS: dict[str, Callable[[bool, bool], bool]] = {
    "and": operator.and_,
    "or": operator.or_,
    "xor": operator.xor,
}


def _successors(dfa_a, dfa_b, p, z: int):
    """Transitions of the product orbit ``z``: list of (annotation, successor element, eta)."""
    backend = p.set.backend
    o = p.set.orbits[z]
    w = p.set.realize(z)
    out = []
    for ann in annotations(backend, o):
        d, eta = realize_annotation(backend, w.valuation, ann)
        x, y = unpair(p, w)
        nxt = pair(p, step(dfa_a, x, d), step(dfa_b, y, d))
        out.append((ann, nxt, eta))
    return out


def product_dfa(a: FraisseDFA, b: FraisseDFA, op: str | Callable = "and") -> FraisseDFA:
    if a.backend is not b.backend:
        raise AutomatonError("backend mismatch")
    combine = COMBINERS[op] if isinstance(op, str) else op
    p = product(a.states, b.states)
    start = pair(p, initial_config(a), initial_config(b)).orbit
    order = [start]
    seen = {start}
    raw = {}
    k = 0
    while k < len(order):
        z = order[k]
        k += 1
        table = {}
        for ann, nxt, eta in _successors(a, b, p, z):
            table[ann.key] = (nxt.orbit, tuple(eta.index(v) for v in nxt.valuation))
            if nxt.orbit not in seen:
                seen.add(nxt.orbit)
                order.append(nxt.orbit)
        raw[z] = table
    pos = {z: i for i, z in enumerate(order)}
    names = []
    for z in order:
        tag = p.tags[z]
        sibling = p.orbits_between(tag.left, tag.right).index(z)
        names.append(f"{a.names[tag.left]}.{b.names[tag.right]}.{sibling}")
    trans = [
        {key: (pos[t], w) for key, (t, w) in raw[z].items()}
        for z in order
    ]
    accepting = {
        pos[z]
        for z in order
        if combine(p.tags[z].left in a.accepting, p.tags[z].right in b.accepting)
    }
    orbits = [p.set.orbits[z] for z in order]
    return make_dfa(a.backend, names, orbits, 0, accepting, trans)


def equivalent(a: FraisseDFA, b: FraisseDFA) -> tuple[bool, list | None]:
    empty, word = emptiness(product_dfa(a, b, "xor"))
    return empty, word


def trim(dfa: FraisseDFA) -> FraisseDFA:
    keep = sorted(reachable(dfa))
    pos = {q: i for i, q in enumerate(keep)}
    trans = [{key: (pos[t], w) for key, (t, w) in dfa.trans[q].items()} for q in keep]
    return FraisseDFA(
        dfa.backend,
        tuple(dfa.names[q] for q in keep),
        tuple(dfa.orbits[q] for q in keep),
        pos[dfa.initial],
        frozenset(pos[q] for q in dfa.accepting if q in pos),
        tuple(trans),
    )


def bisimulation(dfa: FraisseDFA):
    """Greatest acceptance-respecting congruence on configurations, as orbits of ``X * X``."""
    x = dfa.states
    p = product(x, x)
    succ = {}
    members = set()
    for z, tag in enumerate(p.tags):
        if (tag.left in dfa.accepting) == (tag.right in dfa.accepting):
            members.add(z)
            succ[z] = [nxt.orbit for _, nxt, _ in _successors(dfa, dfa, p, z)]
    changed = True
    while changed:
        changed = False
        for z in sorted(members):
            if any(t not in members for t in succ[z]):
                members.discard(z)
                changed = True
    return EqRelation(p, frozenset(members))


def minimize(dfa: FraisseDFA) -> FraisseDFA:
    dfa = trim(dfa)
    backend = dfa.backend
    x = dfa.states
    rel = bisimulation(dfa)
    q, amap = quotient(x, rel, check=False)
    reps = {}
    for src, (k, _) in enumerate(amap.entries):
        reps.setdefault(k, src)
    names, trans, accepting = [], [], set()
    for k, o in enumerate(q.orbits):
        src = reps[k]
        names.append(dfa.names[src])
        if src in dfa.accepting:
            accepting.add(k)
        _, e = amap.entries[src]
        v = q.realize(k).valuation
        table = {}
        for ann in annotations(backend, o):
            d, eta = realize_annotation(backend, v, ann)
            known = {e[i]: v[i] for i in range(len(e))}
            full = refill(backend, x.orbits[src].shape, known, set(eta))
            c = x.element(src, full)
            img = apply(amap, step(dfa, c, d))
            table[ann.key] = (img.orbit, tuple(eta.index(val) for val in img.valuation))
        trans.append(table)
    init = apply(amap, initial_config(dfa)).orbit
    return make_dfa(backend, names, q.orbits, init, accepting, trans)


def align_transition(backend: Backend, o: OrbitRepr, written, witness: Sequence[int]):
    """Key and witness of a transition written against a non-canonical annotation.

    ``written`` is ``("reg", i)`` or an extension structure as the user wrote
    it; ``witness`` refers to positions of that written form.
    """
    if isinstance(written, tuple):
        i = written[1]
        for s in sorted(o.sym.elements):
            r = s.inverse()[i]
            if r == min(t[i] for t in o.sym.elements):
                s_inv = s.inverse()
                return ("reg", r), tuple(s_inv[k] for k in witness)
        raise AutomatonError("internal: register class without representative")
    anns = {a.key: a for a in annotations(backend, o) if a.is_ext}
    for s in sorted(o.sym.elements):
        h_inv = _hat(s).inverse()
        cand = relabel(written, h_inv)
        key = ("ext", cand.sorted_facts())
        if key in anns:
            return key, tuple(h_inv[k] for k in witness)
    raise AutomatonError("extension is not a one-point extension of the state shape")
