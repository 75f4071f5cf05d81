import random

import pytest

from sdpn.ingest import (ParseError, cfg_to_sdpn, format_pattern, format_sdpn, load_model, parse_config_pattern,
                         parse_configuration, parse_program, parse_sdpn)
from sdpn.ingest.program import StateSpaceTooLarge
from sdpn.model import SILENT, Thread, recv, send

from conftest import EXAMPLES, model
from oracles import random_sdpn

SMALL = """\
# a comment
channels: a val=0,1
states: p q
stack: g h g#1
rules:
  r1: p g -a!-> q h h   # push
  r2: q h -a?-> q
  r3: p g -tau-> q h | p g
  p h -send val 1-> p h
  q g#1 -eps-> q
"""


def test_parse_small_model():
    m = parse_sdpn(SMALL)
    assert m.states == ("p", "q")
    assert "g#1" in m.stack
    assert [r.name for r in m.rules] == ["r1", "r2", "r3", "", ""]
    assert m.rules[3].action == send("val", "1")
    assert m.rules[4].action == SILENT
    assert m.rule("r3").spawned == Thread("q", ("h",))
    assert recv("val", "0") in m.actions


def test_format_round_trip_small():
    m = parse_sdpn(SMALL)
    assert parse_sdpn(format_sdpn(m)) == m


def test_format_round_trip_random_models():
    rng = random.Random(3)
    for _ in range(100):
        m = random_sdpn(rng)
        assert parse_sdpn(format_sdpn(m)) == m


@pytest.mark.parametrize("name", ["fig7.sdpn", "fig8.sdpn", "driver.sdpn", "driver-fixed.sdpn"])
def test_bundled_models_round_trip(name):
    m = model(name)
    assert parse_sdpn(format_sdpn(m)) == m


@pytest.mark.parametrize("text, line, col, fragment", [
    ("states: p\nstack: g\nrules:\n  p h -tau-> p\n", 4, 5, "undeclared"),
    ("states: p\nstack: g\nrules:\n  r: p g -tau-> p\n  r: p g -tau-> p\n", 5, 3, "duplicate rule"),
    ("states: p\nstack: g\nrules:\n  p g tau p\n", 4, None, "expected"),
    ("states: p\nstack: g\nrules:\n  p g -b!-> p\n", 4, 8, "undeclared channel"),
    ("states: p p\n", 1, 11, "duplicate"),
    ("states: p\nstack: p\n", 2, 8, "duplicate"),
    ("p g -tau-> p\n", 1, 1, "section header"),
    ("channels: v=0\nstates: p\nstack: g\nrules:\n  p g -v!2-> p\n", 5, 8, "not declared"),
    ("states: p\nstack: g\nrules:\n  p g -tau-> p g | p g | p g\n", 4, None, "at most one"),
])
def test_parse_errors_carry_positions(text, line, col, fragment):
    with pytest.raises(ParseError) as err:
        parse_sdpn(text)
    assert fragment in str(err.value)
    assert err.value.line == line
    if col is not None:
        assert err.value.column == col


def test_configuration_text():
    m = model("driver.sdpn")
    c = parse_configuration("p0 1 0 . p1 FSF p2 FSE", m)
    assert c == (Thread("p0", ("1", "0")), Thread("p1", ("FSF",)), Thread("p2", ("FSE",)))
    assert parse_configuration("EPS", m) == ()
    with pytest.raises(ParseError):
        parse_configuration("1 0", m)


@pytest.mark.parametrize("text", [
    "EPS", "pM m0", "ANY* pM m2 ANY*", "{pM, pN} (f0|f1)* n1", "_ [^m0 m1] .* ANY*", "pM m0? m1+",
])
def test_patterns_reformat_to_equivalent_text(text):
    m = model("fig7.sdpn")
    p = parse_config_pattern(text, m)
    assert parse_config_pattern(format_pattern(p), m) == p


@pytest.mark.parametrize("text, col", [
    ("pM zz", 4), ("m0 pM", 1), ("pM (m0", 7), ("{pM, qq} m0", 6), ("EPS pM", 5), ("pM m0 $", 7), ("", 1),
])
def test_pattern_errors_carry_columns(text, col):
    m = model("fig7.sdpn")
    with pytest.raises(ParseError) as err:
        parse_config_pattern(text, m)
    assert err.value.column == col


def test_pattern_finiteness():
    m = model("fig7.sdpn")
    assert parse_config_pattern("pM m0 (m1|m2)? . pN n0", m).is_finite()
    assert not parse_config_pattern("pM m0*", m).is_finite()
    assert not parse_config_pattern("ANY* pM m0", m).is_finite()
    assert parse_config_pattern("pM m0 (m1|m2 m2)? . pN n0", m).longest_stack() == 4


PROGRAM = """\
threadlocal flag : {0, 1}
channel go
channel data : {a, b}
start Main

thread Main:
  local x : {a, b} = b
  entry s
  s -> t : spawn Helper
  t -> u : call Set
  u -> v : send data *
  v -> w : x := a
  w -> z : assume flag == 1

proc Set returns {0, 1}:
  entry e
  e -> f : flag := 1
  f -> g : return 1

thread Helper:
  local y : {a, b}
  h0 -> h1 : recv data y
  h1 -> h2 : assume y != a
  h2 -> h3 : send go
"""


def test_program_translation():
    m, start = cfg_to_sdpn(parse_program(PROGRAM))
    assert len(start) == 1 and start[0].stack == ("Main_s_xb",)
    assert start[0].state.startswith("g_flag0")
    # send data * offers every value
    sends = {r.action for r in m.rules if r.action.is_signal and r.action.channel == "data"}
    assert {send("data", "a"), send("data", "b"), recv("data", "a"), recv("data", "b")} <= sends
    # the call pushes the callee frame on top of the return point
    calls = [r for r in m.rules if r.name.startswith("Main.2")]
    assert calls and all(r.target.stack[1].startswith("Main_u") for r in calls)


@pytest.mark.parametrize("body, fragment", [
    ("thread T:\n  a -> b : x := 1\n", "undeclared variable"),
    ("thread T:\n  a -> b : call F\n", "undeclared procedure"),
    ("thread T:\n  a -> b : send c\n", "undeclared channel"),
    ("thread T:\n  a -> b : frobnicate\n", "unknown statement"),
    ("proc F:\n  a -> b : return 1\nthread T:\n  a -> b : call F\n", "declares no result"),
    ("threadlocal x : {}\nthread T:\n  a -> b : skip\n", "nonempty"),
    ("start Q\nthread T:\n  a -> b : skip\n", "start thread"),
    ("  a -> b : skip\n", "outside a thread"),
])
def test_program_errors(body, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_program(body)


def test_program_state_space_cap():
    prog = parse_program("threadlocal x : {0,1,2,3}\nthreadlocal y : {0,1,2,3}\nthread T:\n  local z : {0,1,2,3}\n"
                         "  a -> b : x := *\n")
    with pytest.raises(StateSpaceTooLarge):
        cfg_to_sdpn(prog, max_size=10)


def test_bundled_program_loads_with_its_start_configuration():
    m, start = load_model(EXAMPLES / "handoff.cfgp")
    assert start == (Thread("g_mode0", ("Main_m0",)),)
    assert m.rules and all(r.name for r in m.rules)
