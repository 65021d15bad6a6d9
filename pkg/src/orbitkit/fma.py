"""Finite memory automata with equality constraints, and translations.

A constraint is a boolean combination of atoms ``x == y`` / ``x != y`` over the
names ``before.i``, ``input`` and ``after.i``.  An atom holds only when both
names carry a value (an empty register is ``None``, never a data value).
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .automata import FraisseDFA
from .nfa import NominalNFA, eps_eliminate, from_predicate
from .nomset import Element, NomSet, OrbitRepr, unpair
from .perm import PermGroup, act
from .symmetry import EQUALITY, FinStruct


class FMAError(ValueError):
    pass


# -- constraints ----------------------------------------------------------------

Name = tuple  # ("before", i) | ("input",) | ("after", i)


@dataclass(frozen=True)
class Atom:
    left: Name
    op: str  # "==" or "!="
    right: Name


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)


def conj(parts: Iterable) -> object:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(parts: Iterable) -> object:
    parts = [p for p in parts if p != FALSE]
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def defined(name: Name) -> Atom:
    return Atom(name, "==", name)


def undefined(name: Name) -> Not:
    return Not(defined(name))


def _value(name: Name, before, d, after):
    if name[0] == "input":
        return d
    regs = before if name[0] == "before" else after
    return regs[name[1]] if name[1] < len(regs) else None


def evaluate(c, before: Sequence, d, after: Sequence) -> bool:
    if isinstance(c, Atom):
        x = _value(c.left, before, d, after)
        y = _value(c.right, before, d, after)
        if x is None or y is None:
            return False
        return (x == y) if c.op == "==" else (x != y)
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Not):
        return not evaluate(c.arg, before, d, after)
    if isinstance(c, And):
        return all(evaluate(a, before, d, after) for a in c.args)
    if isinstance(c, Or):
        return any(evaluate(a, before, d, after) for a in c.args)
    raise FMAError(f"not a constraint: {c!r}")


def names_in(c) -> set:
    if isinstance(c, Atom):
        return {c.left, c.right}
    if isinstance(c, Not):
        return names_in(c.arg)
    if isinstance(c, (And, Or)):
        out = set()
        for a in c.args:
            out |= names_in(a)
        return out
    return set()


def format_name(name: Name) -> str:
    return "input" if name[0] == "input" else f"{name[0]}.{name[1]}"


def format_constraint(c, parent: int = 0) -> str:
    # precedence: || = 1, && = 2, ! and atoms = 3
    if isinstance(c, Atom):
        return f"{format_name(c.left)} {c.op} {format_name(c.right)}"
    if isinstance(c, Const):
        return "true" if c.value else "false"
    if isinstance(c, Not):
        return "!" + format_constraint(c.arg, 3) if not isinstance(c.arg, Atom) else f"!({format_constraint(c.arg)})"
    level = 2 if isinstance(c, And) else 1
    sep = " && " if level == 2 else " || "
    text = sep.join(format_constraint(a, level) for a in c.args)
    return f"({text})" if parent > level else text


_TOKEN = re.compile(r"\s*(?:(before|after)\.(\d+)|(input)|(true|false)|(==|!=|&&|\|\||!|\(|\)))")


class ConstraintSyntaxError(FMAError):
    def __init__(self, msg: str, column: int):
        super().__init__(f"{msg} at column {column + 1}")
        self.column = column


def parse_constraint(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = len(text) - len(text[pos:].lstrip())
            raise ConstraintSyntaxError(f"unexpected {text[col:col + 8]!r}", col)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        if m.group(1):
            toks.append(("name", (m.group(1), int(m.group(2))), start))
        elif m.group(3):
            toks.append(("name", ("input",), start))
        elif m.group(4):
            toks.append(("const", m.group(4) == "true", start))
        else:
            toks.append((m.group(5), None, start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    i = 0

    def peek():
        return toks[i][0]

    def take(kind):
        nonlocal i
        tok = toks[i]
        if tok[0] != kind:
            raise ConstraintSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        i += 1
        return tok

    def p_or():
        parts = [p_and()]
        while peek() == "||":
            take("||")
            parts.append(p_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def p_and():
        parts = [p_not()]
        while peek() == "&&":
            take("&&")
            parts.append(p_not())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def p_not():
        if peek() == "!":
            take("!")
            return Not(p_not())
        return p_atom()

    def p_atom():
        kind = peek()
        if kind == "(":
            take("(")
            inner = p_or()
            take(")")
            return inner
        if kind == "const":
            return Const(take("const")[1])
        if kind == "name":
            left = take("name")[1]
            op = peek()
            if op not in ("==", "!="):
                raise ConstraintSyntaxError("expected == or !=", toks[i][2])
            take(op)
            right = take("name")[1]
            return Atom(left, op, right)
        raise ConstraintSyntaxError(f"unexpected {kind!r}", toks[i][2])

    out = p_or()
    take("end")
    return out


# -- automata ---------------------------------------------------------------------


@dataclass(frozen=True)
class FMA:
    labels: tuple
    registers: int
    control: tuple
    initial: frozenset
    accepting: frozenset
    trans: tuple  # (control, label, constraint, control)

    def __post_init__(self):
        ctl = set(self.control)
        if len(ctl) != len(self.control):
            raise FMAError("duplicate control state")
        if len(set(self.labels)) != len(self.labels):
            raise FMAError("duplicate label")
        for c in self.initial | self.accepting:
            if c not in ctl:
                raise FMAError(f"unknown control state {c!r}")
        for c, label, phi, c2 in self.trans:
            if c not in ctl or c2 not in ctl:
                raise FMAError(f"transition between unknown control states {c!r}, {c2!r}")
            if label not in self.labels:
                raise FMAError(f"unknown label {label!r}")
            for name in names_in(phi):
                if name[0] != "input" and not 0 <= name[1] < self.registers:
                    raise FMAError(f"register {format_name(name)} out of range")


@dataclass(frozen=True, order=True)
class FmaConfig:
    control: str
    regs: tuple  # None marks an empty register


def initial_configs(m: FMA) -> set[FmaConfig]:
    return {FmaConfig(c, (None,) * m.registers) for c in m.initial}


def _fresh(avoid: Iterable, count: int) -> list:
    return EQUALITY.fresh_values(avoid, count)


def fma_step(m: FMA, c: FmaConfig, letter: tuple, pool: Iterable | None = None) -> set[FmaConfig]:
    """Successors of ``c`` on ``(label, d)`` with register contents drawn from ``pool``.

    The default pool is the current registers, the input and one new value per
    register.
    """
    label, d = letter
    if label not in m.labels:
        raise FMAError(f"unknown label {label!r}")
    if pool is None:
        known = {v for v in c.regs if v is not None} | {d}
        pool = sorted(known) + _fresh(known, m.registers)
    options = [None] + list(dict.fromkeys(pool))
    out = set()
    for src, lab, phi, dst in m.trans:
        if src != c.control or lab != label:
            continue
        for after in itertools.product(options, repeat=m.registers):
            if evaluate(phi, c.regs, d, after):
                out.add(FmaConfig(dst, after))
    return out


def _normalize(regs: Sequence, word_vals: set, slots: Sequence) -> tuple:
    ren = {}
    out = []
    for v in regs:
        if v is None or v in word_vals:
            out.append(v)
            continue
        if v not in ren:
            ren[v] = slots[len(ren)]
        out.append(ren[v])
    return tuple(out)


def fma_accepts(m: FMA, word: Sequence[tuple]) -> bool:
    """Exact acceptance: values outside the word are interchangeable, so they are
    kept in ``n`` canonical slots plus ``n`` spare fresh values per step."""
    vals = sorted({d for _, d in word})
    fresh = _fresh(vals, 2 * m.registers)
    slots = fresh[: m.registers]
    pool = vals + fresh
    cur = initial_configs(m)
    for letter in word:
        nxt = set()
        for c in cur:
            for c2 in fma_step(m, c, letter, pool):
                nxt.add(FmaConfig(c2.control, _normalize(c2.regs, set(vals), slots)))
        cur = nxt
        if not cur:
            return False
    return any(c.control in m.accepting for c in cur)


def is_deterministic_on(m: FMA, c: FmaConfig, letter: tuple) -> bool:
    return len(fma_step(m, c, letter)) == 1


# -- translations ------------------------------------------------------------------


def register_patterns(n: int) -> list[tuple]:
    """Definedness-and-equality patterns: restricted growth strings with -1 for empty."""
    out = []

    def go(prefix, top):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        go(prefix + [-1], top)
        for k in range(top + 1):
            go(prefix + [k], max(top, k + 1) if k == top else top)

    go([], 0)
    return out


def _pattern_name(p: tuple) -> str:
    return "".join("_" if k < 0 else chr(ord("a") + k) for k in p)


def fma_to_nfa(m: FMA) -> NominalNFA:
    """Configuration-space NFA: one state orbit per (control, register pattern)."""
    pats = register_patterns(m.registers)
    names, orbits, decode = [], [], []
    for c in m.control:
        for p in pats:
            k = max(p, default=-1) + 1
            names.append(f"{c}.{_pattern_name(p)}" if m.registers else c)
            orbits.append(OrbitRepr(FinStruct(k), PermGroup.trivial(k)))
            decode.append((c, p))
    states = NomSet(EQUALITY, tuple(orbits))
    one = OrbitRepr(FinStruct(1), PermGroup.trivial(1))
    alphabet = NomSet(EQUALITY, tuple(one for _ in m.labels))
    by_key: dict = {}
    for c, label, phi, c2 in m.trans:
        by_key.setdefault((c, label, c2), []).append(phi)

    def regs(x: Element) -> tuple:
        _, p = decode[x.orbit]
        return tuple(None if k < 0 else x.valuation[k] for k in p)

    def pred(q, a, q2):
        phis = by_key.get((decode[q.orbit][0], m.labels[a.orbit], decode[q2.orbit][0]), ())
        before, after, d = regs(q), regs(q2), a.valuation[0]
        return any(evaluate(phi, before, d, after) for phi in phis)

    empty = tuple([-1] * m.registers)
    initial = [i for i, (c, p) in enumerate(decode) if c in m.initial and p == empty]
    accepting = [i for i, (c, p) in enumerate(decode) if c in m.accepting]
    return from_predicate(EQUALITY, names, states, m.labels, alphabet, pred, initial, accepting)


def _pattern_constraint(names: Sequence[Name], values: Sequence) -> object:
    atoms = []
    for (x, vx), (y, vy) in itertools.combinations(list(zip(names, values)), 2):
        atoms.append(Atom(x, "==" if vx == vy else "!=", y))
    return conj(atoms)


def nfa_to_fma(a: NominalNFA) -> FMA:
    """Finite memory automaton with one control state per state orbit.

    Local symmetries are flattened: a configuration stores some valuation of
    its class, and every constraint is closed under the symmetries.
    """
    if a.backend is not EQUALITY:
        raise FMAError("only the equality symmetry has a finite memory automaton counterpart")
    for o in a.alphabet.orbits:
        if o.size != 1:
            raise FMAError("letters must carry exactly one data value")
    if a.eps:
        a = eps_eliminate(a)
    n = max((o.size for o in a.states.orbits), default=0)
    names = list(a.state_names)
    init_name = "init"
    while init_name in names:
        init_name += "_"
    single = len(a.initial) == 1 and a.states.orbits[next(iter(a.initial))].size == 0
    groups: dict = {}
    init_groups: dict = {}
    for z in sorted(a.trans):
        e, q2 = unpair(a.qaq, a.qaq.set.realize(z))
        q, letter = unpair(a.qa, e)
        label = a.letter_names[letter.orbit]
        so, to = a.states.orbits[q.orbit], a.states.orbits[q2.orbit]
        d = letter.valuation[0]
        before_names = [("before", i) for i in range(so.size)]
        after_names = [("after", i) for i in range(to.size)]
        tail = [undefined(("after", i)) for i in range(to.size, n)]
        for s in so.sym:
            for t in to.sym:
                v, v2 = act(q.valuation, s), act(q2.valuation, t)
                phi = _pattern_constraint(before_names + [("input",)] + after_names, list(v) + [d] + list(v2))
                groups.setdefault((names[q.orbit], label, names[q2.orbit]), set()).add(conj([phi] + tail))
                if not single and q.orbit in a.initial:
                    psi = _pattern_constraint([("input",)] + after_names, [d] + list(v2))
                    init_groups.setdefault((init_name, label, names[q2.orbit]), set()).add(conj([psi] + tail))
    trans = []
    for key in sorted(groups):
        c, label, c2 = key
        trans.append((c, label, disj(sorted(groups[key], key=format_constraint)), c2))
    for key in sorted(init_groups):
        c, label, c2 = key
        trans.append((c, label, disj(sorted(init_groups[key], key=format_constraint)), c2))
    accepting = {names[q] for q in a.accepting}
    if single:
        initial = {names[next(iter(a.initial))]}
        control = tuple(names)
    else:
        initial = {init_name}
        control = tuple(names) + (init_name,)
        if a.initial & a.accepting:
            accepting.add(init_name)
    return FMA(tuple(a.letter_names), n, control, frozenset(initial), frozenset(accepting), tuple(trans))


def dfa_to_det_fma(d: FraisseDFA, label: str = "a") -> FMA:
    """Deterministic finite memory automaton for a DFA over the equality symmetry.

    A state with ``k`` registers keeps its valuation in registers ``0..k-1``;
    configurations outside that pattern go to a rejecting sink.
    """
    if d.backend is not EQUALITY:
        raise FMAError("only the equality symmetry has a finite memory automaton counterpart")
    n = max((o.size for o in d.orbits), default=0)
    sink = "sink"
    while sink in d.names:
        sink += "_"
    B = lambda i: ("before", i)
    A = lambda i: ("after", i)
    IN = ("input",)
    trans = []
    for q, o in enumerate(d.orbits):
        k = o.size
        guard = conj(
            [defined(B(i)) for i in range(k)]
            + [Atom(B(i), "!=", B(j)) for i in range(k) for j in range(i + 1, k)]
            + [undefined(B(i)) for i in range(k, n)]
        )
        for i in range(k):
            r = min(s[i] for s in o.sym.elements)
            s = next(s for s in sorted(o.sym.elements) if s[r] == i)
            target, w = d.trans[q][("reg", r)]
            k2 = d.orbits[target].size
            assign = [Atom(A(t), "==", B(s[w[t]])) for t in range(k2)]
            tail = [undefined(A(t)) for t in range(k2, n)]
            phi = conj([guard, Atom(IN, "==", B(i))] + assign + tail)
            trans.append((d.names[q], label, phi, d.names[target]))
        ext = [key for key in d.trans[q] if key[0] == "ext"]
        (key,) = ext
        target, w = d.trans[q][key]
        k2 = d.orbits[target].size
        assign = [Atom(A(t), "==", IN if w[t] == k else B(w[t])) for t in range(k2)]
        tail = [undefined(A(t)) for t in range(k2, n)]
        fresh = [Atom(IN, "!=", B(i)) for i in range(k)]
        trans.append((d.names[q], label, conj([guard] + fresh + assign + tail), d.names[target]))
        clear = conj([undefined(A(t)) for t in range(n)])
        trans.append((d.names[q], label, conj([Not(guard), clear]), sink))
    trans.append((sink, label, conj([undefined(A(t)) for t in range(n)]), sink))
    return FMA(
        (label,),
        n,
        tuple(d.names) + (sink,),
        frozenset({d.names[d.initial]}),
        frozenset(d.names[q] for q in d.accepting),
        tuple(trans),
    )


def reachable_configs(m: FMA, word_values: Sequence, depth: int) -> set[FmaConfig]:
    """Configurations reachable within ``depth`` steps using letters over ``word_values``."""
    seen = set(initial_configs(m))
    frontier = deque((c, 0) for c in seen)
    while frontier:
        c, k = frontier.popleft()
        if k == depth:
            continue
        for label in m.labels:
            for v in word_values:
                for c2 in fma_step(m, c, (label, v), word_values):
                    if c2 not in seen:
                        seen.add(c2)
                        frontier.append((c2, k + 1))
    return seen
