import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdpn.abstraction import ONE, PREFIX, SUFFIX, ZERO, KDomain, format_word
from sdpn.model import SILENT, TAU, Action

from laws import law_violations

A, AB, B = Action.parse("a!"), Action.parse("a?"), Action.parse("b!")


def test_alphabet_adds_tau_and_co_actions_but_not_eps():
    d = KDomain(PREFIX, 2, [A, B, SILENT])
    assert d.alphabet == {TAU, A, AB, B, Action.parse("b?")}


def test_bad_domains_are_rejected():
    with pytest.raises(ValueError):
        KDomain("infix", 2)
    with pytest.raises(ValueError):
        KDomain(PREFIX, 0)


def test_truncation_keeps_the_right_end():
    w = (A, B, TAU, AB)
    assert KDomain(PREFIX, 2).canonical(w) == (A, B)
    assert KDomain(SUFFIX, 2).canonical(w) == (TAU, AB)
    assert KDomain(SUFFIX, 2).canonical((A, SILENT)) == (A,)


def test_generators_and_silent_steps():
    d = KDomain(PREFIX, 2, [A])
    assert d.gen(A) == frozenset({(A,)})
    assert d.gen(SILENT) == ONE
    assert d.prepend(SILENT, frozenset({(A,)})) == frozenset({(A,)})


def test_tau_star():
    assert KDomain(PREFIX, 2).tau_star() == frozenset({(), (TAU,), (TAU, TAU)})
    assert KDomain(SUFFIX, 3).tau_star() == frozenset({(), (TAU,), (TAU,) * 2, (TAU,) * 3})


def test_shuffle_of_co_actions_has_a_tau_branch():
    d = KDomain(PREFIX, 2, [A])
    assert d.shuffle_words((A,), (AB,)) == frozenset({(A, AB), (AB, A), (TAU,)})
    assert (TAU,) not in d.shuffle_words((A,), (A,))


def test_suffix_shuffle_works_from_the_end():
    d = KDomain(SUFFIX, 1, [A, B])
    assert d.shuffle(frozenset({(A,)}), frozenset({(B,)})) == frozenset({(A,), (B,)})
    d2 = KDomain(SUFFIX, 2, [A, B])
    assert (TAU,) in d2.shuffle(frozenset({(A,)}), frozenset({(AB,)}))


def test_word_enumeration():
    d = KDomain(PREFIX, 2, [A])
    assert len(d.words()) == 1 + 3 + 9
    assert format_word(()) == "eps"
    assert d.format(frozenset({(A, TAU), (A,)})) == ["a!", "a! tau"]


@pytest.mark.parametrize("kind", [PREFIX, SUFFIX])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_laws_hold(kind, order):
    bad = law_violations(kind, order, 150, seed=1)
    assert not +bad, dict(bad)


words = st.lists(st.sampled_from([A, AB, B, TAU]), max_size=5).map(tuple)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([PREFIX, SUFFIX]), st.integers(1, 4), st.lists(words, max_size=4), st.lists(words, max_size=4))
def test_alpha_is_a_join_homomorphism(kind, order, xs, ys):
    d = KDomain(kind, order, [A, B])
    assert d.alpha(xs + ys) == d.join(d.alpha(xs), d.alpha(ys))
    assert d.is_valid(d.alpha(xs))
    assert d.leq(d.meet(d.alpha(xs), d.alpha(ys)), d.alpha(xs))
    assert d.alpha([]) == ZERO
