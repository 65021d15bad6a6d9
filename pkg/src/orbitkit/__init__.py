"""Automata over data words, with orbit-finite state spaces described by
finite structures and local symmetries."""
from __future__ import annotations

from .automata import (
    FraisseDFA,
    annotations,
    complement,
    emptiness,
    equivalent,
    minimize,
    product_dfa,
    reachable,
    run,
    step,
)
from .expr import evaluate as orbits_of
from .fma import FMA, dfa_to_det_fma, fma_accepts, fma_to_nfa, nfa_to_fma
from .formats import dump, load
from .nfa import InconclusiveError, NominalNFA, eps_eliminate, nfa_concat, nfa_member, nfa_union
from .nomset import Element, NomSet, OrbitRepr, hom_enumerate, pair, product, quotient, unpair
from .perm import Perm, PermGroup
from .symmetry import EQUALITY, GRAPH, ORDER, FinStruct, get_backend

__version__ = "0.1.0"

__all__ = [
    "FraisseDFA", "annotations", "complement", "emptiness", "equivalent", "minimize",
    "product_dfa", "reachable", "run", "step",
    "orbits_of",
    "FMA", "dfa_to_det_fma", "fma_accepts", "fma_to_nfa", "nfa_to_fma",
    "dump", "load",
    "InconclusiveError", "NominalNFA", "eps_eliminate", "nfa_concat", "nfa_member", "nfa_union",
    "Element", "NomSet", "OrbitRepr", "hom_enumerate", "pair", "product", "quotient", "unpair",
    "Perm", "PermGroup",
    "EQUALITY", "GRAPH", "ORDER", "FinStruct", "get_backend",
]
