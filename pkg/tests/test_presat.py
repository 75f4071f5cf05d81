import random

import pytest

from sdpn.automata import from_pattern, validate
from sdpn.ingest import parse_config_pattern, parse_sdpn
from sdpn.model import Thread, normalize
from sdpn.presat import saturate

from conftest import model
from oracles import matches, pattern_regex, random_configuration, random_sdpn, random_target_text, relaxed_within

COUNTER = """\
channels: a
states: p q
stack: g h
rules:
  p g -tau-> p g g
  p g -a!-> p
  p h -tau-> q
"""


def presat_violations(n_models: int, samples: int, seed: int) -> tuple[int, int]:
    """Count (violations, positive samples) of bounded relaxed reachability vs saturation."""
    rng = random.Random(seed)
    bad = positives = 0
    for _ in range(n_models):
        m = random_sdpn(rng)
        target = parse_config_pattern(random_target_text(rng, m), m)
        apre = saturate(normalize(m), from_pattern(target, m))
        rx = pattern_regex(target, m)
        for _ in range(samples):
            c = random_configuration(rng, m, 3, 3)
            if any(matches(rx, d) for d in relaxed_within(m, c, 5)):
                positives += 1
                if not apre.accepts(c):
                    bad += 1
    return bad, positives


def test_saturation_contains_bounded_predecessors():
    bad, positives = presat_violations(40, 15, seed=21)
    assert bad == 0
    assert positives > 50


def test_counter_predecessors_are_exact():
    m = parse_sdpn(COUNTER)
    apre = saturate(m, from_pattern(parse_config_pattern("q", m), m))
    for n in range(6):
        assert apre.accepts((Thread("p", ("g",) * n + ("h",)),))
    assert not apre.accepts((Thread("p", ("h",) * 2),))
    assert not apre.accepts((Thread("q", ("g",)),))
    assert apre.accepts((Thread("q", ()),))


def test_fig7_initial_configuration_is_a_relaxed_predecessor():
    m = model("fig7.sdpn")
    apre = saturate(normalize(m), from_pattern(parse_config_pattern("ANY* pM m2 ANY*", m), m))
    assert apre.accepts((Thread("pM", ("m0",)),))
    assert not apre.accepts((Thread("pN", ("n0",)),))
    assert validate(apre, saturated=True) is None


def test_result_does_not_depend_on_worklist_order():
    m = normalize(model("driver.sdpn"))
    a = from_pattern(parse_config_pattern("ANY* p3 R ANY* p4 A .* ANY*", m), m)
    reference = saturate(m, a)
    for seed in range(5):
        assert saturate(m, a, seed=seed) == reference


def test_requires_a_normalized_model():
    m = parse_sdpn("states: p\nstack: g\nrules:\n  p g -tau-> p g g g\n")
    with pytest.raises(ValueError, match="normalized"):
        saturate(m, from_pattern(parse_config_pattern("p", m), m))
