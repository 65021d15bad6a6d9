import random

import pytest
from reference import FIXTURES, NFA_LANGUAGES

from orbitkit import formats
from orbitkit.nfa import (
    CAP_ENV,
    InconclusiveError,
    eps_eliminate,
    nfa_concat,
    nfa_member,
    nfa_union,
)
from orbitkit.oracle import FiniteDomain, restrict_nfa, words


def load(name):
    return formats.load(FIXTURES / name)


def member(nfa, text):
    return nfa_member(nfa, [nfa.letter(l, v) for l, v in formats.parse_letters(nfa.backend, text)])


def plain(nfa, word):
    return [(nfa.letter_names[a.orbit], a.valuation[0]) for a in word]


def test_repeated_letter():
    r = load("repeated_letter.nfa")
    assert member(r, "1 2 1")
    assert not member(r, "1 2 3")
    assert not member(r, "")


def test_labeled_letters():
    t = load("tagged_match.nfa")
    assert member(t, "a:1 b:1")
    assert not member(t, "b:1 a:1")
    with pytest.raises(ValueError):
        member(t, "1")


def test_guessing_nfa_matches_oracle():
    g = load("guess_last.nfa")
    dom = FiniteDomain.default(g.backend, 5)
    c = restrict_nfa(g, dom)
    lang = c.language_upto(3)
    for w in words(c.alphabet, 3):
        assert nfa_member(g, list(w)) == (w in lang)


@pytest.mark.parametrize("name", sorted(NFA_LANGUAGES))
def test_fixture_languages(name):
    nfa = load(name)
    ref = NFA_LANGUAGES[name]
    dom = FiniteDomain.default(nfa.backend, 4 if nfa.backend.name == "order" else 3)
    c = restrict_nfa(nfa, dom)
    for w in words(c.alphabet, 3):
        assert nfa_member(nfa, list(w)) == ref(plain(nfa, w)), w


def test_union_with_itself():
    r = load("repeated_letter.nfa")
    u = nfa_union(r, r)
    for w in words([r.letter(None, (v,)) for v in range(3)], 4):
        assert nfa_member(u, list(w)) == nfa_member(r, list(w))


def test_concat_with_empty_word_language():
    r = load("repeated_letter.nfa")
    eps_only = formats.parse_nfa("nfa\nstate s registers 0\nletter a registers 1\ninitial s\naccept s\n")
    c = nfa_concat(eps_only, r)
    for w in words([r.letter(None, (v,)) for v in range(3)], 4):
        assert nfa_member(c, list(w)) == nfa_member(r, list(w))


def test_concat_of_two_repeats():
    r = load("repeated_letter.nfa")
    c = nfa_concat(r, r)
    assert member(c, "1 1 2 2")
    assert not member(c, "1 2 1")


def test_eps_eliminate_preserves_membership():
    g = load("guess_last.nfa")
    e = eps_eliminate(g)
    assert not e.eps
    rng = random.Random(3)
    for _ in range(500):
        w = [g.letter(None, (rng.randrange(4),)) for _ in range(rng.randrange(6))]
        assert nfa_member(e, w) == nfa_member(g, w)


def test_cap_gives_inconclusive(monkeypatch):
    monkeypatch.setenv(CAP_ENV, "2")
    r = load("repeated_letter.nfa")
    with pytest.raises(InconclusiveError):
        member(r, "1 2 3 4")


def test_alphabet_mismatch():
    r, t = load("repeated_letter.nfa"), load("tagged_match.nfa")
    with pytest.raises(ValueError):
        nfa_union(r, t)
