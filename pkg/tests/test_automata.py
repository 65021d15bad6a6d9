import itertools
from fractions import Fraction

import pytest
from reference import DFA_LANGUAGES, FIXTURES

from orbitkit import formats
from orbitkit.automata import (
    annotations,
    complement,
    emptiness,
    equivalent,
    initial_config,
    minimize,
    product_dfa,
    reachable,
    run,
    step,
)
from orbitkit.formats import FormatError, parse_dfa, write_dfa
from orbitkit.nomset import Element, make_orbit
from orbitkit.perm import closure, parse_cycles
from orbitkit.symmetry import EQUALITY, GRAPH, ORDER, FinStruct

SWAP = closure([parse_cycles("(0 1)", 2)], 2)


def load(name):
    return formats.load(FIXTURES / name)


@pytest.fixture(scope="module")
def def_in_de():
    return load("def_in_de.dfa")


def test_annotation_counts():
    assert len(annotations(ORDER, make_orbit(ORDER, ORDER.chain(2)))) == 5
    assert len(annotations(EQUALITY, make_orbit(EQUALITY, FinStruct(2), SWAP))) == 2
    assert len(annotations(EQUALITY, make_orbit(EQUALITY, FinStruct(3)))) == 4
    for b in (EQUALITY, ORDER, GRAPH):
        assert len(annotations(b, make_orbit(b, FinStruct(0)))) == 1
    # graph: 2 distinguished classes + 4 extensions, or 1 + 3 under the swap
    assert len(annotations(GRAPH, make_orbit(GRAPH, FinStruct(2)))) == 6
    assert len(annotations(GRAPH, make_orbit(GRAPH, FinStruct(2), SWAP))) == 4


def test_annotation_local_syms():
    anns = annotations(EQUALITY, make_orbit(EQUALITY, FinStruct(2), SWAP))
    ext = [a for a in anns if a.is_ext][0]
    reg = [a for a in anns if not a.is_ext][0]
    assert ext.local_sym.order == 2
    assert reg.local_sym.order == 1


def test_step_examples(def_in_de):
    d = def_in_de
    c = step(d, initial_config(d), 1)
    assert d.names[c.orbit] == "d" and c.valuation == (1,)
    c2 = step(d, Element(d.index("de"), (1, 2)), 2)
    assert d.names[c2.orbit] == "top"
    assert d.names[step(d, Element(d.index("top"), ()), 9).orbit] == "bot"


def test_run_examples(def_in_de):
    assert run(def_in_de, [1, 2, 1])
    assert not run(def_in_de, [1, 2, 3])
    assert run(def_in_de, [1, 1, 1])
    assert not run(def_in_de, [])


def test_reachable(def_in_de):
    assert len(reachable(def_in_de)) == 6
    text = (FIXTURES / "monotone.dfa").read_text() + "state lost registers 0\non lost ext{} -> lost []\n"
    d = parse_dfa(text)
    assert d.index("lost") not in reachable(d)
    only = parse_dfa("dfa\nstate q registers 0\ninitial q\non q ext{} -> q []\n")
    assert reachable(only) == {0}


def test_complement(def_in_de):
    c = complement(def_in_de)
    assert not run(c, [1, 2, 1])
    assert complement(c).accepting == def_in_de.accepting
    empty = parse_dfa("dfa\nstate q registers 0\ninitial q\non q ext{} -> q []\n")
    assert run(complement(empty), [])


def test_boolean_products(def_in_de):
    c = complement(def_in_de)
    assert emptiness(product_dfa(def_in_de, c, "and"))[0]
    both = product_dfa(def_in_de, c, "or")
    assert all(run(both, list(w)) for w in itertools.product(range(3), repeat=3))


def test_order_product_matches_reference():
    mono, between = load("monotone.dfa"), load("third_between.dfa")
    p = product_dfa(mono, between, "and")
    q = product_dfa(mono, between, "xor")
    ref_m, ref_b = DFA_LANGUAGES["monotone.dfa"], DFA_LANGUAGES["third_between.dfa"]
    for n in range(5):
        for w in itertools.product(range(4), repeat=n):
            w = list(w)
            assert run(p, w) == (ref_m(w) and ref_b(w))
            assert run(q, w) == (ref_m(w) != ref_b(w))


def test_emptiness(def_in_de):
    empty, word = emptiness(def_in_de)
    assert not empty and len(word) == 3 and run(def_in_de, word)
    universal = parse_dfa("dfa\nstate q registers 0\ninitial q\naccept q\non q ext{} -> q []\n")
    assert emptiness(complement(universal)) == (True, None)
    hidden = parse_dfa(
        "dfa\nstate q registers 0\nstate r registers 0\ninitial q\naccept r\n"
        "on q ext{} -> q []\non r ext{} -> r []\n"
    )
    assert emptiness(hidden)[0]


def test_minimize_def_in_de(def_in_de):
    m = minimize(def_in_de)
    assert len(m.orbits) == 6
    two = [o for o in m.orbits if o.size == 2]
    assert len(two) == 1 and two[0].sym.order == 2
    assert equivalent(def_in_de, m)[0]


def test_minimize_idempotent():
    mono = load("monotone.dfa")
    m = minimize(mono)
    assert [(o.shape, o.sym) for o in m.orbits] == [(o.shape, o.sym) for o in mono.orbits]
    assert equivalent(mono, m)[0]


def test_minimize_merges_bisimilar_states():
    d = load("monotone_alt.dfa")
    m = minimize(d)
    assert len(m.orbits) == 3
    assert equivalent(d, m)[0]


def test_equivalent_counterexample(def_in_de):
    same, word = equivalent(def_in_de, complement(def_in_de))
    assert not same
    assert run(def_in_de, word) != run(complement(def_in_de), word)
    assert equivalent(load("monotone.dfa"), load("monotone_alt.dfa"))[0]


@pytest.mark.parametrize("name", sorted(DFA_LANGUAGES))
def test_fixture_round_trip(name):
    d = load(name)
    again = parse_dfa(write_dfa(d))
    assert again.names == d.names
    assert equivalent(d, again)[0]
    m = minimize(d)
    assert equivalent(d, parse_dfa(write_dfa(m)))[0]


def test_order_runs_on_rationals():
    d = load("third_between.dfa")
    assert run(d, [Fraction(1), Fraction(2), Fraction(3, 2)])
    assert not run(d, [Fraction(1), Fraction(2), Fraction(5, 2)])


def test_missing_transition_is_reported():
    text = "dfa\nstate e registers 0\nstate q registers 1\ninitial e\non e ext{} -> q [0:=*]\n"
    with pytest.raises(FormatError, match="missing transition for reg 0"):
        parse_dfa(text)


def test_non_commuting_witness_is_rejected():
    text = (
        "dfa\nstate e registers 0\nstate one registers 1\nstate two registers 2 sym \"(0 1)\"\n"
        "state ord registers 2\ninitial e\n"
        "on e ext{} -> one [0:=*]\non one reg 0 -> one [0:=0]\non one ext{} -> two [0:=0, 1:=*]\n"
        "on two reg 0 -> e []\non two ext{} -> ord [0:=0, 1:=*]\n"
        "on ord reg 0 -> e []\non ord reg 1 -> e []\non ord ext{} -> e []\n"
    )
    with pytest.raises(FormatError, match="commute"):
        parse_dfa(text)


def test_bad_extension_is_rejected():
    text = "symmetry order\ndfa\nstate e registers 0\nstate q registers 1\ninitial e\non e ext{} -> q [0:=*]\n" \
           "on q ext{*<0; 0<*} -> q [0:=*]\n"
    with pytest.raises(FormatError):
        parse_dfa(text)
