"""Text formats: structure literals, automaton files and words.

Automaton files are line oriented; ``#`` starts a comment.  The first
statements pick the symmetry (``symmetry equality|order|graph``, default
equality) and the kind (``dfa``, ``nfa`` or ``fma``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .automata import AutomatonError, FraisseDFA, align_transition, describe_annotation, make_dfa
from .fma import FMA, FMAError, format_constraint, parse_constraint
from .nfa import NominalNFA, from_predicate
from .nomset import NomSet, NomSetError, OrbitRepr, orbit, unpair
from .perm import PermError, PermGroup, closure, parse_cycles
from .symmetry import EQUALITY, ORDER, Backend, FinStruct, get_backend


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + msg)
        self.line = line
        self.column = column


# -- structures ---------------------------------------------------------------

_FACT_LT = re.compile(r"^(\d+|\*)\s*<\s*(\d+|\*)$")
_FACT_E = re.compile(r"^E\(\s*(\d+|\*)\s*,\s*(\d+|\*)\s*\)$")


def parse_facts(backend: Backend, text: str, star: int | None = None) -> list:
    facts = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        pos = lambda tok: star if tok == "*" else int(tok)
        m = _FACT_LT.match(item)
        if m and "<" in backend.relations:
            if star is None and "*" in item:
                raise ValueError(f"'*' is only allowed in extensions: {item!r}")
            facts.append(("<", (pos(m.group(1)), pos(m.group(2)))))
            continue
        m = _FACT_E.match(item)
        if m and "E" in backend.relations:
            if star is None and "*" in item:
                raise ValueError(f"'*' is only allowed in extensions: {item!r}")
            facts.append(("E", (pos(m.group(1)), pos(m.group(2)))))
            continue
        raise ValueError(f"not a {backend.name} fact: {item!r}")
    return facts


def default_shape(backend: Backend, n: int) -> FinStruct:
    return ORDER.chain(n) if backend is ORDER else FinStruct(n)


def build_shape(backend: Backend, n: int, rel: str | None) -> FinStruct:
    if rel is None:
        return default_shape(backend, n)
    facts = parse_facts(backend, rel)
    for _, args in facts:
        if any(not 0 <= x < n for x in args):
            raise ValueError(f"fact refers to a register outside 0..{n - 1}")
    s = backend.close(n, facts)
    if not backend.member(s):
        raise ValueError(f"relations {rel!r} do not form a {backend.name} structure")
    return s


def build_sym(n: int, text: str | None) -> PermGroup:
    if text is None or not text.strip():
        return PermGroup.trivial(n)
    gens = [parse_cycles(part, n) for part in text.split(";") if part.strip()]
    return closure(gens, n)


def parse_struct(backend: Backend, text: str) -> FinStruct:
    m = re.fullmatch(r"\s*struct\{\s*n\s*=\s*(\d+)\s*(?:;(.*))?\}\s*", text)
    if not m:
        raise ValueError(f"bad structure literal {text!r}")
    n = int(m.group(1))
    facts = parse_facts(backend, m.group(2) or "")
    for _, args in facts:
        if any(not 0 <= x < n for x in args):
            raise ValueError(f"fact refers outside carrier in {text!r}")
    s = backend.close(n, facts)
    if not backend.member(s):
        raise ValueError(f"{text!r} is not a {backend.name} structure")
    return s


def format_rel(backend: Backend, s: FinStruct) -> str:
    if backend is ORDER:
        ranks = ORDER.ranks(s)
        by_rank = sorted(range(s.n), key=lambda x: ranks[x])
        return "; ".join(f"{x}<{y}" for x, y in zip(by_rank, by_rank[1:]))
    return "; ".join(f"E({x},{y})" for rel, (x, y) in s.sorted_facts() if rel == "E" and x < y)


# -- values and words ---------------------------------------------------------------


def parse_word(backend: Backend, text: str) -> list:
    return [backend.parse_value(tok) for tok in text.split()]


def parse_letters(backend: Backend, text: str) -> list[tuple]:
    """Tokens ``v``, ``label:v`` or ``label:v1,v2``; returns ``(label or None, values)``."""
    out = []
    for tok in text.split():
        if ":" in tok:
            label, _, rest = tok.partition(":")
            vals = tuple(backend.parse_value(v) for v in rest.split(",") if v)
            out.append((label, vals))
        else:
            out.append((None, (backend.parse_value(tok),)))
    return out


def format_word(backend: Backend, word: Sequence) -> str:
    return " ".join(backend.format_value(v) for v in word)


# -- statement scanning ---------------------------------------------------------------


@dataclass
class Statement:
    line: int
    text: str
    head: str


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def scan(text: str) -> tuple[Backend, str, list[Statement]]:
    backend = EQUALITY
    kind = None
    stmts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        head = line.split()[0]
        if head == "symmetry":
            parts = line.split()
            if len(parts) != 2:
                raise FormatError("expected 'symmetry NAME'", lineno)
            try:
                backend = get_backend(parts[1])
            except ValueError as exc:
                raise FormatError(str(exc), lineno, raw.index(parts[1]) + 1) from None
            continue
        if head in ("dfa", "nfa", "fma") and line == head:
            if kind is not None:
                raise FormatError("automaton kind given twice", lineno)
            kind = head
            continue
        if kind is None:
            raise FormatError("expected 'dfa', 'nfa' or 'fma' before other statements", lineno)
        stmts.append(Statement(lineno, line, head))
    if kind is None:
        raise FormatError("missing automaton kind ('dfa', 'nfa' or 'fma')")
    return backend, kind, stmts


def _col(stmt_text: str, raw_line: str, needle: str) -> int:
    k = stmt_text.find(needle)
    return k + 1 if k >= 0 else 1


_STATE = re.compile(
    r'^(state|letter)\s+([A-Za-z0-9_.\-]+)\s+registers\s+(\d+)'
    r'(?:\s+rel\s+"([^"]*)")?(?:\s+sym\s+"([^"]*)")?\s*$'
)


def _parse_orbit_stmt(backend: Backend, st: Statement) -> tuple[str, str, OrbitRepr]:
    m = _STATE.match(st.text)
    if not m:
        raise FormatError(f"expected '{st.head} NAME registers K [rel \"...\"] [sym \"...\"]'", st.line, 1)
    kind, name, k, rel, sym = m.group(1), m.group(2), int(m.group(3)), m.group(4), m.group(5)
    try:
        shape = build_shape(backend, k, rel)
    except ValueError as exc:
        raise FormatError(str(exc), st.line, _col(st.text, st.text, "rel")) from None
    try:
        group = build_sym(k, sym)
    except PermError as exc:
        raise FormatError(str(exc), st.line, _col(st.text, st.text, "sym")) from None
    try:
        o = orbit(backend, shape, group)
    except NomSetError as exc:
        raise FormatError(str(exc), st.line, _col(st.text, st.text, "sym")) from None
    return kind, name, o


def _names(st: Statement, known: Sequence[str]) -> list[str]:
    names = st.text.split()[1:]
    if not names:
        raise FormatError(f"'{st.head}' needs at least one name", st.line)
    for n in names:
        if n not in known:
            raise FormatError(f"unknown name {n!r}", st.line, st.text.find(n) + 1)
    return names


# -- DFA ------------------------------------------------------------------------------

_ON = re.compile(
    r"^on\s+(?P<src>[A-Za-z0-9_.\-]+)\s+(?:reg\s+(?P<reg>\d+)|ext\{(?P<ext>[^}]*)\})"
    r"\s*->\s*(?P<dst>[A-Za-z0-9_.\-]+)\s*\[(?P<assign>[^\]]*)\]\s*$"
)


def _parse_assign(text: str, k_target: int, star: int, line: int, col: int) -> tuple:
    w = [None] * k_target
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        m = re.fullmatch(r"(\d+)\s*:=\s*(\d+|\*)", item)
        if not m:
            raise FormatError(f"bad assignment {item!r}; expected 'i:=j' or 'i:=*'", line, col)
        t = int(m.group(1))
        if t >= k_target:
            raise FormatError(f"target register {t} out of range", line, col)
        if w[t] is not None:
            raise FormatError(f"target register {t} assigned twice", line, col)
        w[t] = star if m.group(2) == "*" else int(m.group(2))
    if any(x is None for x in w):
        missing = [t for t, x in enumerate(w) if x is None]
        raise FormatError(f"target registers {missing} are not assigned", line, col)
    return tuple(w)


def parse_dfa(text: str) -> FraisseDFA:
    backend, kind, stmts = scan(text)
    if kind != "dfa":
        raise FormatError(f"expected a dfa file, found {kind}")
    return _build_dfa(backend, stmts)


def _build_dfa(backend: Backend, stmts: list[Statement]) -> FraisseDFA:
    names, orbits = [], []
    initial = None
    accepting = set()
    ons = []
    for st in stmts:
        if st.head == "state":
            _, name, o = _parse_orbit_stmt(backend, st)
            if name in names:
                raise FormatError(f"duplicate state {name!r}", st.line)
            names.append(name)
            orbits.append(o)
        elif st.head == "initial":
            ns = _names(st, names)
            if len(ns) != 1 or initial is not None:
                raise FormatError("a dfa has exactly one initial state", st.line)
            initial = names.index(ns[0])
        elif st.head == "accept":
            accepting |= {names.index(n) for n in _names(st, names)}
        elif st.head == "on":
            ons.append(st)
        else:
            raise FormatError(f"unknown statement {st.head!r}", st.line, 1)
    if initial is None:
        raise FormatError("missing 'initial' statement")
    trans = [dict() for _ in names]
    for st in ons:
        m = _ON.match(st.text)
        if not m:
            raise FormatError("expected 'on STATE (reg K | ext{...}) -> STATE [assignments]'", st.line, 1)
        for g in ("src", "dst"):
            if m.group(g) not in names:
                raise FormatError(f"unknown state {m.group(g)!r}", st.line, m.start(g) + 1)
        q, t = names.index(m.group("src")), names.index(m.group("dst"))
        o = orbits[q]
        n = o.size
        if m.group("reg") is not None:
            r = int(m.group("reg"))
            if r >= n:
                raise FormatError(f"register {r} out of range for state {names[q]}", st.line, m.start("reg") + 1)
            written = ("reg", r)
            star = r
        else:
            try:
                extra = parse_facts(backend, m.group("ext"), star=n)
            except ValueError as exc:
                raise FormatError(str(exc), st.line, m.start("ext") + 1) from None
            if any(n not in args for _, args in extra):
                raise FormatError("extension facts must mention '*'", st.line, m.start("ext") + 1)
            written = backend.close(n + 1, list(o.shape.facts) + extra)
            if not backend.member(written):
                raise FormatError(
                    f"ext{{{m.group('ext')}}} does not determine a one-point extension of the state shape",
                    st.line, m.start("ext") + 1,
                )
            star = n
        w = _parse_assign(m.group("assign"), orbits[t].size, star, st.line, m.start("assign") + 1)
        try:
            key, w = align_transition(backend, o, written, w)
        except AutomatonError as exc:
            raise FormatError(str(exc), st.line, 1) from None
        if key in trans[q]:
            raise FormatError(f"duplicate transition for this annotation of state {names[q]}", st.line, 1)
        trans[q][key] = (t, w)
    try:
        return make_dfa(backend, names, orbits, initial, accepting, trans)
    except AutomatonError as exc:
        raise FormatError(str(exc)) from None


def write_dfa(dfa: FraisseDFA) -> str:
    b = dfa.backend
    lines = [f"symmetry {b.name}", "dfa"]
    for name, o in zip(dfa.names, dfa.orbits):
        line = f"state {name} registers {o.size}"
        rel = format_rel(b, o.shape)
        if rel or (b is ORDER and o.size > 1):
            line += f' rel "{rel}"'
        if o.sym.order > 1:
            line += f' sym "{o.sym.generators_text()}"'
        lines.append(line)
    lines.append(f"initial {dfa.names[dfa.initial]}")
    if dfa.accepting:
        lines.append("accept " + " ".join(dfa.names[q] for q in sorted(dfa.accepting)))
    for q, name in enumerate(dfa.names):
        o = dfa.orbits[q]
        for ann in dfa.annotations(q):
            t, w = dfa.trans[q][ann.key]
            star = o.size if ann.is_ext else None
            assign = ", ".join(f"{k}:={'*' if x == star else x}" for k, x in enumerate(w))
            lines.append(f"on {name} {describe_annotation(b, o, ann)} -> {dfa.names[t]} [{assign}]")
    return "\n".join(lines) + "\n"


# -- NFA ----------------------------------------------------------------------------

_TRANS = re.compile(
    r"^trans\s*\(\s*([A-Za-z0-9_.\-]+)\s*,\s*([A-Za-z0-9_.\-]+)\s*,\s*([A-Za-z0-9_.\-]+)\s*\)\s*"
    r"(all|overlap\{([^}]*)\})\s*$"
)
_EPS = re.compile(
    r"^eps\s*\(\s*([A-Za-z0-9_.\-]+)\s*,\s*([A-Za-z0-9_.\-]+)\s*\)\s*(all|overlap\{([^}]*)\})\s*$"
)
_REF = r"(src|in|dst)\.(\d+)"
_ATOM = re.compile(
    rf"^(?:{_REF}\s*(=|!=|<)\s*{_REF}|(!?)E\(\s*{_REF}\s*,\s*{_REF}\s*\))$"
)


def _parse_overlap(backend: Backend, text: str | None, sizes: dict, line: int, col: int) -> list:
    atoms = []
    if text is None:
        return atoms
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        m = _ATOM.match(item)
        if not m:
            raise FormatError(f"bad overlap atom {item!r}", line, col)
        if m.group(1):
            refs = [(m.group(1), int(m.group(2))), (m.group(4), int(m.group(5)))]
            op = m.group(3)
        else:
            refs = [(m.group(7), int(m.group(8))), (m.group(9), int(m.group(10)))]
            op = "!E" if m.group(6) else "E"
        if op == "<" and backend.name != "order":
            raise FormatError("'<' needs the order symmetry", line, col)
        if op in ("E", "!E") and backend.name != "graph":
            raise FormatError("'E' needs the graph symmetry", line, col)
        for part, k in refs:
            if part not in sizes:
                raise FormatError(f"{part!r} is not available here", line, col)
            if k >= sizes[part]:
                raise FormatError(f"{part}.{k} out of range", line, col)
        atoms.append((op, refs[0], refs[1]))
    return atoms


def _holds(backend: Backend, atoms, env: dict) -> bool:
    for op, (p1, k1), (p2, k2) in atoms:
        x, y = env[p1][k1], env[p2][k2]
        if op == "=":
            ok = x == y
        elif op == "!=":
            ok = x != y
        elif op == "<":
            ok = x < y
        else:
            edge = x != y and backend.induced_struct([x, y]).facts != frozenset()
            ok = edge if op == "E" else not edge
        if not ok:
            return False
    return True


def parse_nfa(text: str) -> NominalNFA:
    backend, kind, stmts = scan(text)
    if kind != "nfa":
        raise FormatError(f"expected an nfa file, found {kind}")
    s_names, s_orbits, l_names, l_orbits = [], [], [], []
    initial, accepting = set(), set()
    rules, eps_rules = [], []
    for st in stmts:
        if st.head in ("state", "letter"):
            kind_, name, o = _parse_orbit_stmt(backend, st)
            names_, orbits_ = (s_names, s_orbits) if kind_ == "state" else (l_names, l_orbits)
            if name in names_:
                raise FormatError(f"duplicate {kind_} {name!r}", st.line)
            names_.append(name)
            orbits_.append(o)
        elif st.head == "initial":
            initial |= {s_names.index(n) for n in _names(st, s_names)}
        elif st.head == "accept":
            accepting |= {s_names.index(n) for n in _names(st, s_names)}
        elif st.head == "trans":
            m = _TRANS.match(st.text)
            if not m:
                raise FormatError("expected 'trans (STATE, LETTER, STATE) all|overlap{...}'", st.line, 1)
            p, a, q = m.group(1), m.group(2), m.group(3)
            for nm, pool in ((p, s_names), (a, l_names), (q, s_names)):
                if nm not in pool:
                    raise FormatError(f"unknown name {nm!r}", st.line, st.text.find(nm) + 1)
            pi, ai, qi = s_names.index(p), l_names.index(a), s_names.index(q)
            sizes = {"src": s_orbits[pi].size, "in": l_orbits[ai].size, "dst": s_orbits[qi].size}
            atoms = _parse_overlap(backend, m.group(5), sizes, st.line, m.start(4) + 1)
            rules.append((pi, ai, qi, atoms))
        elif st.head == "eps":
            m = _EPS.match(st.text)
            if not m:
                raise FormatError("expected 'eps (STATE, STATE) all|overlap{...}'", st.line, 1)
            p, q = m.group(1), m.group(2)
            for nm in (p, q):
                if nm not in s_names:
                    raise FormatError(f"unknown state {nm!r}", st.line, st.text.find(nm) + 1)
            pi, qi = s_names.index(p), s_names.index(q)
            sizes = {"src": s_orbits[pi].size, "dst": s_orbits[qi].size}
            atoms = _parse_overlap(backend, m.group(4), sizes, st.line, m.start(3) + 1)
            eps_rules.append((pi, qi, atoms))
        else:
            raise FormatError(f"unknown statement {st.head!r}", st.line, 1)
    if not s_names:
        raise FormatError("an nfa needs at least one state")
    if not l_names:
        raise FormatError("an nfa needs at least one letter")

    def pred(q, a, q2):
        env = {"src": q.valuation, "in": a.valuation, "dst": q2.valuation}
        return any(
            (pi, ai, qi) == (q.orbit, a.orbit, q2.orbit) and _holds(backend, atoms, env)
            for pi, ai, qi, atoms in rules
        )

    def eps_pred(q, q2):
        env = {"src": q.valuation, "dst": q2.valuation}
        return any(
            (pi, qi) == (q.orbit, q2.orbit) and _holds(backend, atoms, env)
            for pi, qi, atoms in eps_rules
        )

    return from_predicate(
        backend, s_names, NomSet(backend, tuple(s_orbits)), l_names, NomSet(backend, tuple(l_orbits)),
        pred, initial, accepting, eps_pred if eps_rules else None,
    )


def _exact_atoms(backend: Backend, parts: list[tuple[str, tuple]]) -> list[str]:
    out = []
    for i, (p1, v1) in enumerate(parts):
        for p2, v2 in parts[i + 1:]:
            for k1, x in enumerate(v1):
                for k2, y in enumerate(v2):
                    a, b = f"{p1}.{k1}", f"{p2}.{k2}"
                    if x == y:
                        out.append(f"{a}={b}")
                        continue
                    out.append(f"{a}!={b}")
                    if backend.name == "order":
                        out.append(f"{a}<{b}" if x < y else f"{b}<{a}")
                    elif backend.name == "graph":
                        edge = backend.induced_struct([x, y]).facts != frozenset()
                        out.append(f"{'' if edge else '!'}E({a},{b})")
    return out


def write_nfa(nfa: NominalNFA) -> str:
    b = nfa.backend
    lines = [f"symmetry {b.name}", "nfa"]
    for kind, names, orbits in (("state", nfa.state_names, nfa.states.orbits),
                                ("letter", nfa.letter_names, nfa.alphabet.orbits)):
        for name, o in zip(names, orbits):
            line = f"{kind} {name} registers {o.size}"
            rel = format_rel(b, o.shape)
            if rel or (b is ORDER and o.size > 1):
                line += f' rel "{rel}"'
            if o.sym.order > 1:
                line += f' sym "{o.sym.generators_text()}"'
            lines.append(line)
    if nfa.initial:
        lines.append("initial " + " ".join(nfa.state_names[q] for q in sorted(nfa.initial)))
    if nfa.accepting:
        lines.append("accept " + " ".join(nfa.state_names[q] for q in sorted(nfa.accepting)))
    for z in sorted(nfa.trans):
        e, q2 = unpair(nfa.qaq, nfa.qaq.set.realize(z))
        q, a = unpair(nfa.qa, e)
        atoms = _exact_atoms(b, [("src", q.valuation), ("in", a.valuation), ("dst", q2.valuation)])
        lines.append(
            f"trans ({nfa.state_names[q.orbit]}, {nfa.letter_names[a.orbit]}, "
            f"{nfa.state_names[q2.orbit]}) overlap{{{'; '.join(atoms)}}}"
        )
    for z in sorted(nfa.eps):
        q, q2 = unpair(nfa.qq, nfa.qq.set.realize(z))
        atoms = _exact_atoms(b, [("src", q.valuation), ("dst", q2.valuation)])
        lines.append(
            f"eps ({nfa.state_names[q.orbit]}, {nfa.state_names[q2.orbit]}) overlap{{{'; '.join(atoms)}}}"
        )
    return "\n".join(lines) + "\n"


# -- FMA ------------------------------------------------------------------------------

_FTRANS = re.compile(r'^trans\s+(\S+)\s+(\S+)\s+"([^"]*)"\s+(\S+)\s*$')


def parse_fma(text: str) -> FMA:
    backend, kind, stmts = scan(text)
    if kind != "fma":
        raise FormatError(f"expected an fma file, found {kind}")
    if backend is not EQUALITY:
        raise FormatError("finite memory automata use the equality symmetry only")
    labels, control = None, None
    registers = None
    initial, accepting, trans = set(), set(), []
    for st in stmts:
        parts = st.text.split()
        if st.head == "labels":
            labels = tuple(parts[1:])
        elif st.head == "registers":
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormatError("expected 'registers N'", st.line)
            registers = int(parts[1])
        elif st.head == "control":
            control = tuple(parts[1:])
        elif st.head in ("initial", "accept"):
            if control is None:
                raise FormatError("'control' must come first", st.line)
            (initial if st.head == "initial" else accepting).update(_names(st, control))
        elif st.head == "trans":
            m = _FTRANS.match(st.text)
            if not m:
                raise FormatError('expected \'trans STATE LABEL "constraint" STATE\'', st.line, 1)
            try:
                phi = parse_constraint(m.group(3))
            except FMAError as exc:
                col = m.start(3) + 1 + getattr(exc, "column", 0)
                raise FormatError(str(exc), st.line, col) from None
            trans.append((m.group(1), m.group(2), phi, m.group(4)))
        else:
            raise FormatError(f"unknown statement {st.head!r}", st.line, 1)
    if labels is None or control is None or registers is None:
        raise FormatError("an fma needs 'labels', 'registers' and 'control'")
    try:
        return FMA(labels, registers, control, frozenset(initial), frozenset(accepting), tuple(trans))
    except FMAError as exc:
        raise FormatError(str(exc)) from None


def write_fma(m: FMA) -> str:
    lines = ["fma", "labels " + " ".join(m.labels), f"registers {m.registers}",
             "control " + " ".join(m.control)]
    if m.initial:
        lines.append("initial " + " ".join(c for c in m.control if c in m.initial))
    if m.accepting:
        lines.append("accept " + " ".join(c for c in m.control if c in m.accepting))
    for c, label, phi, c2 in m.trans:
        lines.append(f'trans {c} {label} "{format_constraint(phi)}" {c2}')
    return "\n".join(lines) + "\n"


# -- dispatch -------------------------------------------------------------------------


def read_kind(text: str) -> str:
    return scan(text)[1]


def load(path: str | Path):
    text = Path(path).read_text()
    kind = read_kind(text)
    return {"dfa": parse_dfa, "nfa": parse_nfa, "fma": parse_fma}[kind](text)


def dump(obj) -> str:
    if isinstance(obj, FraisseDFA):
        return write_dfa(obj)
    if isinstance(obj, NominalNFA):
        return write_nfa(obj)
    if isinstance(obj, FMA):
        return write_fma(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
