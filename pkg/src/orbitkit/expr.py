"""Small expression language for orbit-finite sets.

    atom                 the data values themselves
    tuple(k)             all k-tuples
    dtuple(k)            k-tuples of distinct values
    set2                 two-element sets
    otuple(k)            strictly increasing k-tuples (order symmetry)
    prod(e1, e2)         cartesian product
    sum(e1, e2)          disjoint union
    [struct{n=2} sym (0 1), struct{n=1}]   explicit orbit list
"""
from __future__ import annotations

import re

from .nomset import NomSet, make_orbit, product
from .perm import PermGroup, closure, parse_cycles
from .symmetry import ORDER, Backend, FinStruct


class ExprError(ValueError):
    pass


_IDENT = re.compile(r"[a-z][a-z0-9]*")
_INT = re.compile(r"\d+")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ExprError(f"{msg} at column {self.pos + 1} in {self.text!r}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return int(m.group())

    def expr(self):
        if self.peek() == "[":
            return self.literal()
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error("expected an expression")
        name = m.group()
        self.pos = m.end()
        if name in ("atom", "set2"):
            return (name,)
        if name in ("tuple", "dtuple", "otuple"):
            self.expect("(")
            k = self.integer()
            self.expect(")")
            return (name, k)
        if name in ("prod", "sum"):
            self.expect("(")
            args = [self.expr()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.expr())
            self.expect(")")
            if len(args) < 2:
                self.error(f"{name} needs at least two arguments")
            node = args[0]
            for a in args[1:]:
                node = (name, node, a)
            return node
        self.error(f"unknown operator {name!r}")

    def literal(self):
        self.expect("[")
        items = []
        while True:
            self.skip()
            if not self.text.startswith("struct{", self.pos):
                self.error("expected 'struct{...}'")
            end = self.text.find("}", self.pos)
            if end < 0:
                self.error("unterminated structure")
            struct = self.text[self.pos:end + 1]
            self.pos = end + 1
            sym = None
            self.skip()
            if self.text.startswith("sym", self.pos):
                self.pos += 3
                stop = len(self.text)
                for ch in ",]":
                    k = self.text.find(ch, self.pos)
                    if k >= 0:
                        stop = min(stop, k)
                sym = self.text[self.pos:stop].strip()
                self.pos = stop
            items.append((struct, sym))
            if self.peek() == ",":
                self.pos += 1
                continue
            self.expect("]")
            return ("lit", tuple(items))


def parse_expr(text: str):
    p = _Parser(text)
    node = p.expr()
    if p.peek():
        p.error("trailing input")
    return node


def _all_structures(backend: Backend, k: int) -> list[FinStruct]:
    layer = [FinStruct(0)]
    for _ in range(k):
        layer = [e for s in layer for e in backend.one_point_extensions(s)]
    return sorted(set(layer), key=lambda s: s.sorted_facts())


def build(backend: Backend, node) -> NomSet:
    from .formats import build_sym, parse_struct

    kind = node[0]
    if kind == "atom":
        return NomSet(backend, (make_orbit(backend, FinStruct(1)),))
    if kind == "tuple":
        out = NomSet(backend, (make_orbit(backend, FinStruct(0)),))
        for _ in range(node[1]):
            out = product(out, build(backend, ("atom",))).set
        return out
    if kind == "dtuple":
        return NomSet(backend, tuple(make_orbit(backend, s) for s in _all_structures(backend, node[1])))
    if kind == "otuple":
        if backend is not ORDER:
            raise ExprError("otuple needs the order symmetry")
        return NomSet(backend, (make_orbit(backend, ORDER.chain(node[1])),))
    if kind == "set2":
        swap = closure([parse_cycles("(0 1)", 2)], 2)
        orbits = []
        for s in _all_structures(backend, 2):
            sym = swap if backend.is_automorphism(s, (1, 0)) else PermGroup.trivial(2)
            o = make_orbit(backend, s, sym)
            if o not in orbits:
                orbits.append(o)
        return NomSet(backend, tuple(orbits))
    if kind in ("prod", "sum"):
        x, y = build(backend, node[1]), build(backend, node[2])
        return product(x, y).set if kind == "prod" else x + y
    if kind == "lit":
        orbits = []
        for struct, sym in node[1]:
            try:
                s = parse_struct(backend, struct)
                orbits.append(make_orbit(backend, s, build_sym(s.n, sym)))
            except ValueError as exc:
                raise ExprError(str(exc)) from None
        return NomSet(backend, tuple(orbits))
    raise ExprError(f"unknown node {kind!r}")


def evaluate(backend: Backend, text: str) -> NomSet:
    return build(backend, parse_expr(text))
