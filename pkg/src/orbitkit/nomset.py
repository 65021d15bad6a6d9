"""Orbit-finite nominal sets given by structure representations.

An orbit ``[[A, S]]`` is a finite structure ``A`` (the register shape) with a
group ``S`` of automorphisms of ``A``.  Its elements are embeddings of ``A``
into the limit structure, i.e. injective valuations ``u`` with
``induced_struct(u) == A``, taken modulo ``u ~ u o s`` for ``s`` in ``S``.  A
valuation is always stored as the least member of its class.

Valuations act by ``act(u, s)[i] == u[s[i]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .perm import Perm, PermGroup, act, canonical_under, compose, conjugate
from .symmetry import Backend, FinStruct, partial_isos, relabel, restrict


class NomSetError(ValueError):
    pass


@dataclass(frozen=True)
class OrbitRepr:
    shape: FinStruct
    sym: PermGroup

    @property
    def size(self) -> int:
        return self.shape.n

    def describe(self) -> str:
        return f"{self.shape} sym {{{self.sym.generators_text()}}} |S|={self.sym.order}"


def validate_orbit(backend: Backend, shape: FinStruct, sym: PermGroup) -> None:
    if not backend.member(shape):
        raise NomSetError(f"{shape} is not a {backend.name} structure")
    if sym.carrier_size != shape.n:
        raise NomSetError(f"symmetry acts on {sym.carrier_size} points but the shape has {shape.n}")
    for g in sym:
        if not backend.is_automorphism(shape, g):
            raise NomSetError(f"sym generator is not an automorphism of the state shape: {g}")
    if not sym.is_group():
        raise NomSetError("local symmetry is not closed under composition")


def orbit(backend: Backend, shape: FinStruct, sym: PermGroup | None = None) -> OrbitRepr:
    """Validated orbit keeping the given register numbering."""
    sym = sym if sym is not None else PermGroup.trivial(shape.n)
    validate_orbit(backend, shape, sym)
    return OrbitRepr(shape, sym)


def make_orbit(backend: Backend, shape: FinStruct, sym: PermGroup | None = None) -> OrbitRepr:
    """Validated orbit with the shape moved to canonical form."""
    o = orbit(backend, shape, sym)
    canon, pi = backend.canonical_form(shape)
    return OrbitRepr(canon, conjugate(o.sym, pi))


@dataclass(frozen=True)
class NomSet:
    backend: Backend
    orbits: tuple

    def __len__(self) -> int:
        return len(self.orbits)

    def __add__(self, other: NomSet) -> NomSet:
        if self.backend is not other.backend:
            raise NomSetError("backend mismatch")
        return NomSet(self.backend, self.orbits + other.orbits)

    def realize(self, oid: int, forbidden=frozenset()) -> Element:
        o = self.orbits[oid]
        vals = self.backend.realize(o.shape, forbidden)
        return Element(oid, canonical_under(o.sym, vals)[0])

    def element(self, oid: int, values: Sequence) -> Element:
        """Element of orbit ``oid`` with the given valuation (checked)."""
        o = self.orbits[oid]
        if len(values) != o.size or self.backend.induced_struct(values) != o.shape:
            raise NomSetError(f"values {list(values)} do not fit orbit {oid}")
        return Element(oid, canonical_under(o.sym, values)[0])


@dataclass(frozen=True, order=True)
class Element:
    orbit: int
    valuation: tuple


def element_of(s: NomSet, values: Sequence) -> Element | None:
    """First orbit whose shape is induced positionally by ``values``."""
    shape = s.backend.induced_struct(values)
    for oid, o in enumerate(s.orbits):
        if o.shape == shape:
            return Element(oid, canonical_under(o.sym, values)[0])
    return None


def least_support(x: Element) -> frozenset:
    return frozenset(x.valuation)


# -- equivariant functions ---------------------------------------------------


def commutes(sigma_group: PermGroup, witness: Sequence[int], target_sym: PermGroup) -> bool:
    """For each s there is t with ``s[w[k]] == w[t[k]]`` for all ``k``."""
    images = {tuple(witness[t[k]] for k in range(len(witness))) for t in target_sym.elements}
    return all(tuple(s[w] for w in witness) in images for s in sigma_group.elements)


def hom_enumerate(backend: Backend, src: OrbitRepr, tgt: OrbitRepr) -> list[tuple[int, ...]]:
    """Witnesses of all equivariant functions ``[[src]] -> [[tgt]]``."""
    found = set()
    for u in backend.embeddings(tgt.shape, src.shape):
        if commutes(src.sym, u, tgt.sym):
            found.add(canonical_under(tgt.sym, u)[0])
    return sorted(found)


@dataclass(frozen=True)
class EqMap:
    source: NomSet
    target: NomSet
    entries: tuple  # per source orbit: (target orbit, witness) or None

    def __post_init__(self):
        if len(self.entries) != len(self.source.orbits):
            raise NomSetError("one entry per source orbit is required")
        for oid, entry in enumerate(self.entries):
            if entry is None:
                continue
            t, w = entry
            so, to = self.source.orbits[oid], self.target.orbits[t]
            if not self.source.backend.is_embedding(to.shape, so.shape, w):
                raise NomSetError(f"witness {w} is not an embedding for orbit {oid}")
            if not commutes(so.sym, w, to.sym):
                raise NomSetError(f"witness {w} for orbit {oid} does not commute with the symmetries")


def apply(m: EqMap, x: Element) -> Element:
    entry = m.entries[x.orbit]
    if entry is None:
        raise NomSetError(f"map undefined on orbit {x.orbit}")
    t, w = entry
    vals = tuple(x.valuation[k] for k in w)
    return Element(t, canonical_under(m.target.orbits[t].sym, vals)[0])


# -- products -----------------------------------------------------------------


@dataclass(frozen=True)
class ProductTag:
    left: int
    right: int
    rho: tuple  # left index -> matched right index or -1
    left_inj: tuple
    right_inj: tuple


@dataclass(frozen=True)
class _OrbitRecord:
    rho: tuple
    j_std: tuple
    pi: Perm


@dataclass(frozen=True, eq=False)
class ProductResult:
    left: NomSet
    right: NomSet
    set: NomSet
    tags: tuple
    records: tuple = field(repr=False)
    index: dict = field(repr=False)

    def orbits_between(self, li: int, ri: int) -> list[int]:
        return [k for k, t in enumerate(self.tags) if t.left == li and t.right == ri]


def _j_std(rho: Sequence[int], a: int, b: int) -> tuple:
    j = [-1] * b
    for x, y in enumerate(rho):
        if y >= 0:
            j[y] = x
    nxt = a
    for y in range(b):
        if j[y] < 0:
            j[y] = nxt
            nxt += 1
    return tuple(j)


def _move(rho, j_std, facts_struct: FinStruct, a: int, b: int, sigma: Perm, tau: Perm):
    """Effect of replacing ``(u, v)`` by ``(u o sigma, v o tau)`` on an overlap description."""
    tau_inv = tau.inverse()
    rho2 = tuple(tau_inv[rho[sigma[x]]] if rho[sigma[x]] >= 0 else -1 for x in range(a))
    j2 = _j_std(rho2, a, b)
    c = facts_struct.n
    m = [0] * c
    for x in range(a):
        m[x] = sigma[x]
    for y in range(b):
        if j2[y] >= a:
            m[j2[y]] = j_std[tau[y]]
    m = Perm._trusted(m)
    moved = relabel(facts_struct, m.inverse())
    return rho2, j2, moved, m


@lru_cache(maxsize=256)
def product(x: NomSet, y: NomSet) -> ProductResult:
    """Orbit decomposition of ``x * y``.

    Orbits are ordered by (left orbit, right orbit, least overlap key).
    """
    if x.backend is not y.backend:
        raise NomSetError("backend mismatch in product")
    backend = x.backend
    orbits, tags, records = [], [], []
    index: dict = {}
    for li, lo in enumerate(x.orbits):
        for ri, ro in enumerate(y.orbits):
            a, b = lo.size, ro.size
            found = []
            for rho in partial_isos(backend, lo.shape, ro.shape):
                j_std = _j_std(rho, a, b)
                c = a + b - sum(1 for r in rho if r >= 0)
                for amalgam in backend.amalgams(lo.shape, ro.shape, j_std, c):
                    raw = (li, ri, rho, amalgam.sorted_facts())
                    if raw in index:
                        continue
                    seen = {}
                    for sigma in lo.sym:
                        for tau in ro.sym:
                            rho2, j2, moved, _ = _move(rho, j_std, amalgam, a, b, sigma, tau)
                            key = (li, ri, rho2, moved.sorted_facts())
                            if key not in seen:
                                seen[key] = (sigma, tau, rho2, j2, moved)
                    rep = min(seen)
                    s_r, t_r, rho_r, j_r, c_r = seen[rep]
                    found.append((rep, rho_r, j_r, c_r, seen, s_r, t_r))
                    for key in seen:
                        index[key] = None  # filled below once ids are known
            found.sort(key=lambda f: f[0])
            for rep, rho_r, j_r, c_r, seen, s_r, t_r in found:
                oid = len(orbits)
                for key, (s_k, t_k, *_rest) in seen.items():
                    index[key] = (oid, compose(s_r, s_k.inverse()), compose(t_r, t_k.inverse()))
                stab = []
                for sigma in lo.sym:
                    for tau in ro.sym:
                        rho2, _, moved, m = _move(rho_r, j_r, c_r, a, b, sigma, tau)
                        if rho2 == rho_r and moved == c_r:
                            stab.append(m)
                sym = PermGroup(c_r.n, frozenset(stab))
                canon, pi = backend.canonical_form(c_r)
                orbits.append(OrbitRepr(canon, conjugate(sym, pi)))
                tags.append(
                    ProductTag(
                        li,
                        ri,
                        rho_r,
                        tuple(pi[k] for k in range(a)),
                        tuple(pi[j_r[k]] for k in range(b)),
                    )
                )
                records.append(_OrbitRecord(rho_r, j_r, pi))
    return ProductResult(x, y, NomSet(backend, tuple(orbits)), tuple(tags), tuple(records), index)


def overlap_key(p: ProductResult, u: Element, v: Element):
    a = len(u.valuation)
    b = len(v.valuation)
    pos = {val: k for k, val in enumerate(u.valuation)}
    rho = [-1] * a
    for k, val in enumerate(v.valuation):
        if val in pos:
            rho[pos[val]] = k
    rho = tuple(rho)
    j_std = _j_std(rho, a, b)
    c = a + sum(1 for k in j_std if k >= a)
    w = [None] * c
    w[:a] = u.valuation
    for k in range(b):
        w[j_std[k]] = v.valuation[k]
    return rho, j_std, w


def pair(p: ProductResult, u: Element, v: Element) -> Element:
    if not (0 <= u.orbit < len(p.left.orbits) and 0 <= v.orbit < len(p.right.orbits)):
        raise NomSetError("element outside the component sets")
    backend = p.set.backend
    rho, j_std, w = overlap_key(p, u, v)
    facts = backend.induced_struct(w).sorted_facts()
    hit = p.index.get((u.orbit, v.orbit, rho, facts))
    if hit is None:
        raise NomSetError(f"no product orbit for {u} and {v}")
    oid, sigma, tau = hit
    u2 = act(u.valuation, sigma)
    v2 = act(v.valuation, tau)
    rec = p.records[oid]
    a = len(u2)
    w2 = [None] * (a + sum(1 for k in rec.j_std if k >= a))
    w2[:a] = u2
    for k, val in enumerate(v2):
        w2[rec.j_std[k]] = val
    out = [None] * len(w2)
    for k, val in enumerate(w2):
        out[rec.pi[k]] = val
    return Element(oid, canonical_under(p.set.orbits[oid].sym, out)[0])


def unpair(p: ProductResult, z: Element) -> tuple[Element, Element]:
    tag = p.tags[z.orbit]
    u = tuple(z.valuation[k] for k in tag.left_inj)
    v = tuple(z.valuation[k] for k in tag.right_inj)
    lo, ro = p.left.orbits[tag.left], p.right.orbits[tag.right]
    return (
        Element(tag.left, canonical_under(lo.sym, u)[0]),
        Element(tag.right, canonical_under(ro.sym, v)[0]),
    )


def projection(p: ProductResult, side: int) -> EqMap:
    """Equivariant projection onto the left (0) or right (1) factor."""
    entries = []
    for tag in p.tags:
        if side == 0:
            entries.append((tag.left, tag.left_inj))
        else:
            entries.append((tag.right, tag.right_inj))
    target = p.left if side == 0 else p.right
    fixed = []
    for (t, w) in entries:
        fixed.append((t, canonical_under(target.orbits[t].sym, w)[0]))
    return EqMap(p.set, target, tuple(fixed))


def swap_orbit(p: ProductResult, oid: int) -> int:
    """Orbit of ``(v, u)`` for ``(u, v)`` in orbit ``oid``; needs ``p`` to be a square."""
    u, v = unpair(p, p.set.realize(oid))
    return pair(p, v, u).orbit


# -- relations and quotients ---------------------------------------------------


@dataclass(frozen=True)
class EqRelation:
    base: ProductResult
    members: frozenset


def relation_from_predicate(base: ProductResult, pred: Callable[[Element, Element], bool]) -> EqRelation:
    members = set()
    for oid in range(len(base.set.orbits)):
        u, v = unpair(base, base.set.realize(oid))
        if pred(u, v):
            members.add(oid)
    return EqRelation(base, frozenset(members))


def diagonal(base: ProductResult) -> EqRelation:
    return relation_from_predicate(base, lambda u, v: u == v)


def full_relation(base: ProductResult) -> EqRelation:
    return EqRelation(base, frozenset(range(len(base.set.orbits))))


@dataclass
class CheckResult:
    ok: bool
    reason: str = ""
    counterexample: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def related(r: EqRelation, u: Element, v: Element) -> bool:
    return pair(r.base, u, v).orbit in r.members


def check_equivalence(r: EqRelation) -> CheckResult:
    base = r.base
    x = base.left
    if base.right != x:
        return CheckResult(False, "relation is not on a square")
    for oid in range(len(x.orbits)):
        e = x.realize(oid)
        if not related(r, e, e):
            return CheckResult(False, "not reflexive", (e,))
    for oid in sorted(r.members):
        u, v = unpair(base, base.set.realize(oid))
        if not related(r, v, u):
            return CheckResult(False, "not symmetric", (u, v))
    triple = product(base.set, x)
    for oid in range(len(triple.set.orbits)):
        z, w = unpair(triple, triple.set.realize(oid))
        if z.orbit not in r.members:
            continue
        u, v = unpair(base, z)
        if related(r, v, w) and not related(r, u, w):
            return CheckResult(False, "not transitive", (u, v, w))
    return CheckResult(True)


def refill(backend: Backend, shape: FinStruct, known: dict, forbidden) -> tuple:
    """Valuation of ``shape`` with the positions in ``known`` fixed and the rest chosen by witnesses."""
    placed = sorted(known)
    vals = dict(known)
    avoid = set(forbidden) | set(known.values())
    for k in range(shape.n):
        if k in vals:
            continue
        ext = restrict(shape, placed + [k])
        d = backend.witness(ext, [vals[i] for i in placed], avoid)
        vals[k] = d
        avoid.add(d)
        placed.append(k)
    return tuple(vals[k] for k in range(shape.n))


def quotient(x: NomSet, r: EqRelation, check: bool = True) -> tuple[NomSet, EqMap]:
    """Classes of ``r`` as an orbit-finite set, with the abstraction map."""
    if check:
        res = check_equivalence(r)
        if not res:
            raise NomSetError(f"relation is not an equivalence: {res.reason}")
    backend = x.backend
    base = r.base
    parent = list(range(len(x.orbits)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for oid in r.members:
        tag = base.tags[oid]
        a, b = find(tag.left), find(tag.right)
        if a != b:
            parent[max(a, b)] = min(a, b)
    comps: dict[int, list[int]] = {}
    for i in range(len(x.orbits)):
        comps.setdefault(find(i), []).append(i)

    new_orbits = []
    entries: list = [None] * len(x.orbits)
    for root in sorted(comps):
        p = comps[root][0]
        po = x.orbits[p]
        xe = x.realize(p)
        vals = list(xe.valuation)
        kept = []
        for k in range(po.size):
            rest = [i for i in range(po.size) if i != k]
            ext = restrict(po.shape, rest + [k])
            d = backend.witness(ext, [vals[i] for i in rest], set(vals))
            moved = vals[:k] + [d] + vals[k + 1:]
            if not related(r, xe, x.element(p, moved)):
                kept.append(k)
        reduced = restrict(po.shape, kept)
        canon, pi = backend.canonical_form(reduced)
        pi_inv = pi.inverse()

        def member_with(kept_vals: Sequence, forbidden) -> Element:
            # an element of orbit p whose kept registers carry kept_vals (canonical numbering)
            known = {kept[i]: kept_vals[pi[i]] for i in range(len(kept))}
            return x.element(p, refill(backend, po.shape, known, forbidden))

        vc = [vals[kept[pi_inv[k]]] for k in range(len(kept))]
        passing = []
        for tau in backend.automorphisms(canon):
            other = member_with(act(vc, tau), set(vals))
            if related(r, xe, other):
                passing.append(tau)
        sym = PermGroup(canon.n, frozenset(passing))
        if not sym.is_group():
            raise NomSetError("relation is not equivariant: class symmetries do not form a group")
        qid = len(new_orbits)
        new_orbits.append(OrbitRepr(canon, sym))
        for q in comps[root]:
            ye = x.realize(q)
            for e in backend.embeddings(canon, x.orbits[q].shape):
                cand = member_with([ye.valuation[k] for k in e], set(ye.valuation))
                if related(r, cand, ye):
                    entries[q] = (qid, canonical_under(sym, e)[0])
                    break
            else:
                raise NomSetError(f"no abstraction witness for orbit {q}")
    target = NomSet(backend, tuple(new_orbits))
    return target, EqMap(x, target, tuple(entries))


# -- concrete enumeration helpers ------------------------------------------------


def extend_valuations(backend: Backend, shape: FinStruct, known: dict, context: Sequence) -> list[tuple]:
    """All valuations of ``shape`` agreeing with ``known``, up to automorphisms fixing ``context``.

    Unknown positions take either a value of ``context`` or a new value, one
    per type over ``context`` and the positions placed so far.  ``context``
    must contain the known values.
    """
    out = []
    order = [k for k in range(shape.n) if k not in known]
    fixed = list(dict.fromkeys(context))

    def go(idx, vals: dict, ctx: list):
        if idx == len(order):
            out.append(tuple(vals[k] for k in range(shape.n)))
            return
        k = order[idx]
        placed = sorted(vals)
        want = restrict(shape, placed + [k])
        used = set(vals.values())
        for c in fixed:
            if c in used:
                continue
            if backend.induced_struct([vals[i] for i in placed] + [c]) == want:
                vals[k] = c
                go(idx + 1, vals, ctx)
                del vals[k]
        base = backend.induced_struct(ctx)
        cpos = {val: i for i, val in enumerate(ctx)}
        idxs = [cpos[vals[i]] for i in placed]
        for ext in backend.one_point_extensions(base):
            if restrict(ext, idxs + [len(ctx)]) != want:
                continue
            d = backend.witness(ext, ctx)
            vals[k] = d
            go(idx + 1, vals, ctx + [d])
            del vals[k]

    for val in known.values():
        if val not in fixed:
            fixed.append(val)
    go(0, dict(known), list(fixed))
    return out


def normalize_fresh(backend: Backend, values: Sequence, fixed: Sequence) -> tuple:
    """Rename values outside ``fixed`` to deterministic witnesses of the same type."""
    fixed_set = set(fixed)
    old_ctx = list(fixed)
    new_ctx = list(fixed)
    ren = {}
    for v in values:
        if v in fixed_set or v in ren:
            continue
        ext = backend.induced_struct(old_ctx + [v])
        d = backend.witness(ext, new_ctx)
        ren[v] = d
        old_ctx.append(v)
        new_ctx.append(d)
    return tuple(ren.get(v, v) for v in values)


def sum_sets(*sets: NomSet) -> NomSet:
    out = sets[0]
    for s in sets[1:]:
        out = out + s
    return out


def single(backend: Backend, shape: FinStruct, sym: PermGroup | None = None) -> NomSet:
    return NomSet(backend, (make_orbit(backend, shape, sym),))

