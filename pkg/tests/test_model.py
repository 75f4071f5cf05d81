import random
from collections import Counter

import pytest

from sdpn.model import (SDPN, SILENT, TAU, Action, Rule, SearchBudgetExceeded, Thread, bounded_search,
                        bounded_search_strict, co_action, format_configuration, make_sdpn, normalize,
                        reachable, recv, replay_strict, send, step_dpn, step_relaxed, step_strict)

from conftest import model
from oracles import random_configuration, random_sdpn, relaxed_successors


def test_action_text_round_trip():
    for text in ["tau", "eps", "a!", "a?", "val!1", "val?0"]:
        assert str(Action.parse(text)) == text
    assert Action.parse("a!").co() == Action.parse("a?")
    assert co_action(send("c", "v")) == recv("c", "v")


def test_co_action_of_tau_is_an_error():
    with pytest.raises(ValueError):
        co_action(TAU)


@pytest.mark.parametrize("text", ["", "a", "a!?", "!x", "a b!"])
def test_malformed_actions_are_rejected(text):
    with pytest.raises(ValueError):
        Action.parse(text)


def test_rule_shapes():
    pop = Rule("p", "g", TAU, Thread("q", ()))
    push = Rule("p", "g", TAU, Thread("q", ("a", "b")))
    spawn = Rule("p", "g", TAU, Thread("q", ("a",)), Thread("r", ("b",)))
    long = Rule("p", "g", TAU, Thread("q", ("a", "b", "c")))
    assert [r.shape for r in (pop, push, spawn)] == ["pop", "push", "spawn"]
    assert not long.is_normal


def test_sdpn_rejects_undeclared_names():
    with pytest.raises(ValueError, match="undeclared"):
        SDPN((TAU,), ("p",), ("g",), (Rule("p", "h", TAU, Thread("p", ())),))
    with pytest.raises(ValueError, match="co-action"):
        SDPN((TAU, send("a")), ("p",), ("g",), ())


def test_make_sdpn_infers_declarations():
    m = make_sdpn([Rule("p", "g", send("a"), Thread("q", ("h",)))])
    assert set(m.states) == {"p", "q"} and set(m.stack) == {"g", "h"}
    assert recv("a") in m.actions


def test_spawned_thread_goes_left_of_its_parent():
    m = model("fig7.sdpn")
    c = (Thread("pM", ("m1",)),)
    (st,) = step_strict(m, c)
    assert st.target == (Thread("pN", ("n0",)), Thread("pM", ("m2",)))


def _as_pairs(steps):
    return Counter((s.action, s.target) for s in steps)


def test_relaxed_steps_match_the_reference_stepper():
    rng = random.Random(7)
    for _ in range(200):
        m = random_sdpn(rng)
        c = random_configuration(rng, m)
        assert _as_pairs(step_relaxed(m, c)) == Counter(relaxed_successors(m, c))


def test_strict_steps_are_the_relaxed_steps_without_lone_signals():
    rng = random.Random(8)
    for _ in range(200):
        m = random_sdpn(rng)
        c = random_configuration(rng, m)
        expected = Counter((a, d) for a, d in relaxed_successors(m, c) if a.kind != "signal")
        assert _as_pairs(step_strict(m, c)) == expected


def test_dpn_steps_never_synchronize():
    m = model("fig8.sdpn")
    c = (Thread("pN", ("f0",)), Thread("pM", ("f0", "m1")))
    assert all(len(s.rules) == 1 for s in step_dpn(m, c))
    assert any(s.synchronized for s in step_relaxed(m, c))


def test_normalize_splits_long_rules_with_silent_helpers():
    m = make_sdpn([
        Rule("p", "g", send("a"), Thread("p", ("g", "g", "h")), None, "long"),
        Rule("p", "g", TAU, Thread("q", ("g", "h")), Thread("q", ()), "sp"),
    ])
    n = normalize(m)
    assert n.is_normalized
    assert all(r.action == SILENT for r in n.rules if r.name not in ("long", "sp"))
    assert normalize(n) is n


def test_normalization_preserves_strict_reachability():
    # every original rule becomes at most three normalized steps
    rng = random.Random(11)
    for _ in range(60):
        m = random_sdpn(rng)
        n = normalize(m)
        c = random_configuration(rng, m, max_threads=2, max_stack=2)
        orig = reachable(step_strict, m, [c], 2)
        norm = reachable(step_strict, n, [c], 6)
        assert set(orig) <= set(norm)
        original_symbols = set(m.stack)
        for d, dist in norm.items():
            if dist <= 2 and all(set(t.stack) <= original_symbols for t in d):
                assert d in orig


def test_replay_reports_the_failing_step():
    m = model("fig7.sdpn")
    start = (Thread("pM", ("m0",)),)
    with pytest.raises(ValueError, match="step 1"):
        replay_strict(m, start, [("m_b",)])
    trace = replay_strict(m, (Thread("pM", ("m1",)),), [("m_spawn",), ("n_call",)])
    assert len(trace) == 2
    assert format_configuration(trace.end) == "pN f0 n1 . pM m2"
    assert trace.word() == ()


def test_bounded_search_finds_a_shortest_trace():
    m = model("fig7.sdpn")
    start = (Thread("pM", ("m1",)),)
    trace = bounded_search(step_relaxed, m, [start], lambda c: any(t.stack[:1] == ("f1",) for t in c), 5)
    assert trace is not None and len(trace) == 3
    assert bounded_search(step_relaxed, m, [start], lambda c: False, 3) is None


def test_bounded_search_honours_the_node_cap():
    m = model("fig7.sdpn")
    with pytest.raises(SearchBudgetExceeded):
        bounded_search_strict(m, [(Thread("pM", ("m1",)),)], lambda c: False, 30, max_nodes=20)


def test_fig7_target_is_strictly_unreachable_within_six_steps():
    m = model("fig7.sdpn")
    assert bounded_search_strict(m, [(Thread("pM", ("m0",)),)],
                                 lambda c: any(t == Thread("pM", ("m2",)) for t in c), 6) is None
