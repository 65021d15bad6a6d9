import itertools

import pytest
from reference import FIXTURES, FMA_LANGUAGES

from orbitkit import formats
from orbitkit.automata import run
from orbitkit.fma import (
    FMA,
    FMAError,
    FmaConfig,
    dfa_to_det_fma,
    evaluate,
    fma_accepts,
    fma_step,
    fma_to_nfa,
    format_constraint,
    is_deterministic_on,
    nfa_to_fma,
    parse_constraint,
    register_patterns,
)
from orbitkit.nfa import nfa_member
from orbitkit.oracle import FiniteDomain, restrict_fma, words


def load(name):
    return formats.load(FIXTURES / name)


def as_letters(word, label="a"):
    return [(label, v) for v in word]


def test_constraint_round_trip():
    for text in [
        "true",
        "false",
        "input != before.0 && after.0 == input",
        "input == before.0 || input == before.1",
        "!(before.1 == before.1) && (input == after.0 || after.0 == before.0)",
    ]:
        c = parse_constraint(text)
        assert parse_constraint(format_constraint(c)) == c


def test_constraint_syntax_error_has_column():
    with pytest.raises(FMAError) as exc:
        parse_constraint("input == ")
    assert exc.value.column >= 1


def test_evaluate_undefined_registers():
    c = parse_constraint("before.0 != input")
    assert not evaluate(c, (None,), 5, (None,))
    assert evaluate(c, (3,), 5, (None,))


def test_constraint_invariant_under_renaming():
    c = parse_constraint("input != before.0 && after.0 == input || before.1 == after.1")
    vals = [None, 0, 1, 2]
    for before in itertools.product(vals, repeat=2):
        for after in itertools.product(vals, repeat=2):
            for d in range(3):
                for perm in itertools.permutations(range(3)):
                    f = lambda x: None if x is None else perm[x]
                    assert evaluate(c, before, d, after) == evaluate(
                        c, tuple(map(f, before)), f(d), tuple(map(f, after))
                    )


def test_step_examples():
    m = load("store_match.fma")
    succ = fma_step(m, FmaConfig("store", (None,)), ("a", 5))
    assert FmaConfig("check", (5,)) in succ
    succ = fma_step(m, FmaConfig("check", (5,)), ("a", 5))
    assert any(c.control == "done" for c in succ)
    dead = FMA(("a",), 1, ("c",), frozenset({"c"}), frozenset(), (("c", "a", parse_constraint("false"), "c"),))
    assert fma_step(dead, FmaConfig("c", (None,)), ("a", 1)) == set()
    with pytest.raises(FMAError):
        fma_step(m, FmaConfig("store", (None,)), ("zz", 1))


def test_accepts_examples():
    m = load("repeated.fma")
    assert fma_accepts(m, as_letters([1, 2, 1]))
    assert not fma_accepts(m, as_letters([1, 2, 3]))
    assert not fma_accepts(m, [])


@pytest.mark.parametrize("name", sorted(FMA_LANGUAGES))
def test_fixture_languages(name):
    m = load(name)
    ref = FMA_LANGUAGES[name]
    letters = [(lab, v) for lab in m.labels for v in range(3)]
    for w in words(letters, 4):
        assert fma_accepts(m, list(w)) == ref(list(w)), w


def test_register_patterns():
    assert register_patterns(1) == [(-1,), (0,)]
    assert len(register_patterns(2)) == 5
    assert len(register_patterns(3)) == 15


def test_fma_to_nfa_one_register():
    m = FMA(("a",), 1, ("c",), frozenset({"c"}), frozenset({"c"}),
            (("c", "a", parse_constraint("after.0 == input"), "c"),))
    n = fma_to_nfa(m)
    assert len(n.states.orbits) <= 2


def test_fma_to_nfa_excludes_overlap_orbit():
    m = FMA(("a",), 1, ("c",), frozenset({"c"}), frozenset({"c"}),
            (("c", "a", parse_constraint("before.0 != input && after.0 == before.0"), "c"),))
    n = fma_to_nfa(m)
    for z in n.trans:
        tag = n.qaq.tags[z]
        qa_tag = n.qa.tags[tag.left]
        assert qa_tag.rho != (0,)


@pytest.mark.parametrize("name", sorted(FMA_LANGUAGES))
def test_translations_preserve_language(name):
    m = load(name)
    n = fma_to_nfa(m)
    back = nfa_to_fma(n)
    letters = [(lab, v) for lab in m.labels for v in range(3)]
    for w in words(letters, 3):
        w = list(w)
        expected = fma_accepts(m, w)
        assert nfa_member(n, [n.letter(lab, (v,)) for lab, v in w]) == expected
        assert fma_accepts(back, w) == expected


def test_nfa_to_fma_zero_registers():
    nfa = formats.parse_nfa(
        "nfa\nstate p registers 0\nstate q registers 0\nletter a registers 1\n"
        "initial p\naccept q\ntrans (p, a, q) all\n"
    )
    m = nfa_to_fma(nfa)
    assert m.registers == 0
    assert fma_accepts(m, [("a", 4)])
    assert not fma_accepts(m, [("a", 4), ("a", 4)])


def test_nfa_to_fma_flattens_symmetry():
    nfa = formats.parse_nfa(
        'nfa\nstate s registers 0\nstate p registers 2 sym "(0 1)"\nstate f registers 0\n'
        "letter a registers 1\ninitial s\naccept f\n"
        "trans (s, a, s) all\ntrans (s, a, p) overlap{dst.0=in.0}\n"
        "trans (p, a, f) overlap{in.0=src.0}\n"
    )
    m = nfa_to_fma(nfa)
    letters = [("a", v) for v in range(3)]
    for w in words(letters, 4):
        w = list(w)
        assert fma_accepts(m, w) == nfa_member(nfa, [nfa.letter("a", (v,)) for _, v in w])


@pytest.mark.parametrize("name", ["def_in_de.dfa", "def_in_de_min.dfa", "first_equals_last.dfa", "alternating.dfa"])
def test_dfa_to_det_fma(name):
    d = load(name)
    m = dfa_to_det_fma(d)
    dom = FiniteDomain.default("equality", 3)
    classical = restrict_fma(m, dom)
    for w in words(range(3), 4):
        letters = as_letters(w)
        assert fma_accepts(m, letters) == run(d, list(w))
        # determinism audit along the run
        cur = classical.initial
        for letter in letters:
            for cfg in cur:
                assert is_deterministic_on(m, FmaConfig(*cfg), letter)
            cur = classical.step(cur, letter)
            assert len(cur) <= 1


def test_dfa_to_det_fma_classical():
    d = formats.parse_dfa("dfa\nstate q registers 0\nstate r registers 0\ninitial q\naccept r\n"
                          "on q ext{} -> r []\non r ext{} -> q []\n")
    m = dfa_to_det_fma(d)
    assert m.registers == 0
    assert fma_accepts(m, [("a", 1)]) and not fma_accepts(m, [("a", 1), ("a", 2)])
