"""SDPN data model, operational semantics, normalization and bounded search.

A configuration is a tuple of threads, each thread a (control state, stack)
pair with the stack top first.  Rules either rewrite the top of one stack
(``Rule.spawned is None``) or additionally spawn a new thread which is placed
immediately to the left of the thread that fired the rule.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, NamedTuple, Optional, Sequence


class Action(NamedTuple):
    """A rule label.

    ``kind`` is ``"tau"`` (internal), ``"eps"`` (silent: contributes no letter
    to path words) or ``"signal"``.  Signals carry a channel, a polarity
    (``"!"`` send, ``"?"`` receive) and an optional value.
    """

    kind: str
    channel: str = ""
    polarity: str = ""
    value: str = ""

    @classmethod
    def parse(cls, text: str) -> Action:
        text = text.strip()
        if text == "tau":
            return TAU
        if text == "eps":
            return SILENT
        for pol in "!?":
            if pol in text:
                chan, _, value = text.partition(pol)
                if chan and _is_ident(chan) and (not value or _is_ident(value)):
                    return cls("signal", chan, pol, value)
        raise ValueError(f"malformed action {text!r}")

    @property
    def is_signal(self) -> bool:
        return self.kind == "signal"

    @property
    def is_silent(self) -> bool:
        return self.kind == "eps"

    def co(self) -> Action:
        return co_action(self)

    def __str__(self) -> str:
        if self.kind == "signal":
            return f"{self.channel}{self.polarity}{self.value}"
        return self.kind

    def __repr__(self) -> str:
        return f"Action({str(self)!r})"


TAU = Action("tau")
SILENT = Action("eps")


def send(channel: str, value: str = "") -> Action:
    return Action("signal", channel, "!", value)


def recv(channel: str, value: str = "") -> Action:
    return Action("signal", channel, "?", value)


def co_action(a: Action) -> Action:
    if a.kind != "signal":
        raise ValueError(f"{a} has no co-action")
    return a._replace(polarity="?" if a.polarity == "!" else "!")


def _is_ident(text: str) -> bool:
    return bool(text) and all(ch.isalnum() or ch in "_-'." for ch in text)


class Thread(NamedTuple):
    state: str
    stack: tuple[str, ...] = ()

    def __str__(self) -> str:
        return " ".join((self.state,) + self.stack)


Configuration = tuple[Thread, ...]


def format_configuration(c: Configuration) -> str:
    if not c:
        return "EPS"
    return " . ".join(str(t) for t in c)


@dataclass(frozen=True)
class Rule:
    """``state symbol -action-> target`` optionally spawning ``spawned``.

    For a spawn rule the resulting threads are ``spawned`` followed by
    ``target`` (the continuing thread).
    """

    state: str
    symbol: str
    action: Action
    target: Thread
    spawned: Optional[Thread] = None
    name: str = ""

    @property
    def is_spawn(self) -> bool:
        return self.spawned is not None

    @property
    def shape(self) -> str:
        if self.spawned is not None:
            return "spawn"
        return {0: "pop", 1: "switch", 2: "push"}.get(len(self.target.stack), "long")

    @property
    def is_normal(self) -> bool:
        if self.spawned is not None:
            return len(self.spawned.stack) == 1 and len(self.target.stack) == 1
        return len(self.target.stack) <= 2

    def rhs_threads(self) -> tuple[Thread, ...]:
        if self.spawned is None:
            return (self.target,)
        return (self.spawned, self.target)

    def label(self) -> str:
        return self.name or self.describe()

    def describe(self) -> str:
        rhs = str(self.target)
        if self.spawned is not None:
            rhs = f"{self.spawned} | {rhs}"
        return f"{self.state} {self.symbol} -{self.action}-> {rhs}"


@dataclass(frozen=True)
class SDPN:
    """A synchronized dynamic pushdown network.

    ``actions`` lists the observable alphabet (``tau`` plus every declared
    signal and its co-action).  Rules may also carry the silent ``eps`` label.
    """

    actions: tuple[Action, ...]
    states: tuple[str, ...]
    stack: tuple[str, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        states, stack = set(self.states), set(self.stack)
        if states & stack:
            raise ValueError(f"names used as both state and stack symbol: {sorted(states & stack)}")
        acts = set(self.actions)
        for a in self.actions:
            if a.is_signal and a.co() not in acts:
                raise ValueError(f"action alphabet lacks the co-action of {a}")
        for r in self.rules:
            threads = r.rhs_threads()
            bad = [s for s in (r.state, *(t.state for t in threads)) if s not in states]
            bad += [g for g in (r.symbol, *(g for t in threads for g in t.stack)) if g not in stack]
            if bad:
                raise ValueError(f"rule {r.label()} uses undeclared names {bad}")
            if r.action.is_signal and r.action not in acts:
                raise ValueError(f"rule {r.label()} uses undeclared action {r.action}")

    @cached_property
    def _index(self) -> dict[tuple[str, str], tuple[Rule, ...]]:
        index: dict[tuple[str, str], list[Rule]] = {}
        for r in self.rules:
            index.setdefault((r.state, r.symbol), []).append(r)
        return {k: tuple(v) for k, v in index.items()}

    def rules_for(self, state: str, symbol: str) -> tuple[Rule, ...]:
        return self._index.get((state, symbol), ())

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def is_normalized(self) -> bool:
        return all(r.is_normal for r in self.rules)

    @property
    def signals(self) -> tuple[Action, ...]:
        return tuple(a for a in self.actions if a.is_signal)


def make_sdpn(rules: Iterable[Rule], channels: Iterable[str] = (),
              states: Iterable[str] = (), stack: Iterable[str] = ()) -> SDPN:
    """Build an SDPN, inferring undeclared names and actions from the rules."""
    rules = tuple(rules)
    st, gam, acts = list(states), list(stack), [TAU]

    def add(seq, x):
        if x not in seq:
            seq.append(x)

    for c in channels:
        add(acts, send(c))
        add(acts, recv(c))
    for r in rules:
        add(st, r.state)
        add(gam, r.symbol)
        for t in r.rhs_threads():
            add(st, t.state)
            for g in t.stack:
                add(gam, g)
        if r.action.is_signal:
            add(acts, r.action)
            add(acts, r.action.co())
    return SDPN(tuple(acts), tuple(st), tuple(gam), rules)


# --- normalization --------------------------------------------------------

def normalize(m: SDPN) -> SDPN:
    """Split rules so every right-hand side has one of the four basic shapes.

    Long pushes and spawns of non-singleton words are broken up with fresh
    stack symbols and auxiliary rules labelled ``eps``, so the observable
    word of every run is unchanged.
    """
    if m.is_normalized:
        return m
    taken = set(m.states) | set(m.stack)
    fresh_syms: list[str] = []
    counter = 0

    def fresh(hint: str) -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"{hint}#{counter}"
            if name not in taken:
                taken.add(name)
                fresh_syms.append(name)
                return name

    out: list[Rule] = []

    def emit(r: Rule, depth: int = 0):
        if r.is_normal:
            out.append(r)
            return
        base = r.name or "aux"
        if r.spawned is None:
            # p g -a-> p' g1..gn  ==>  p g -a-> p' X gn ;  p' X -eps-> p' g1..gn-1
            word = r.target.stack
            x = fresh(r.symbol)
            out.append(Rule(r.state, r.symbol, r.action, Thread(r.target.state, (x, word[-1])), None, r.name))
            emit(Rule(r.target.state, x, SILENT, Thread(r.target.state, word[:-1]), None, f"{base}.{depth + 1}"), depth + 1)
            return
        spawned, target = r.spawned, r.target
        extra: list[Rule] = []
        if len(spawned.stack) != 1:
            y = fresh(r.symbol)
            extra.append(Rule(spawned.state, y, SILENT, spawned, None, f"{base}.s"))
            spawned = Thread(spawned.state, (y,))
        if len(target.stack) != 1:
            y = fresh(r.symbol)
            extra.append(Rule(target.state, y, SILENT, target, None, f"{base}.c"))
            target = Thread(target.state, (y,))
        out.append(Rule(r.state, r.symbol, r.action, target, spawned, r.name))
        for e in extra:
            emit(e, depth + 1)

    for r in m.rules:
        emit(r)
    return SDPN(m.actions, m.states, m.stack + tuple(fresh_syms), tuple(out))


# --- semantics ------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    """One transition: the fired rules with their thread positions."""

    action: Action
    rules: tuple[Rule, ...]
    positions: tuple[int, ...]
    target: Configuration

    @property
    def synchronized(self) -> bool:
        return len(self.rules) == 2

    def describe(self) -> str:
        names = " <-> ".join(r.label() for r in self.rules)
        return f"{names} [{self.action}]"


def _fire(c: Configuration, pos: int, rule: Rule) -> tuple[Thread, ...]:
    rest = c[pos].stack[1:]
    cont = Thread(rule.target.state, rule.target.stack + rest)
    if rule.spawned is None:
        return (cont,)
    return (rule.spawned, cont)


def _applicable(m: SDPN, c: Configuration) -> list[tuple[int, Rule]]:
    found = []
    for i, t in enumerate(c):
        if t.stack:
            for r in m.rules_for(t.state, t.stack[0]):
                found.append((i, r))
    return found


def _replace(c: Configuration, edits: dict[int, tuple[Thread, ...]]) -> Configuration:
    out: list[Thread] = []
    for i, t in enumerate(c):
        out.extend(edits.get(i, (t,)))
    return tuple(out)


def _sync_steps(c: Configuration, moves: list[tuple[int, Rule]]) -> Iterator[Step]:
    for i, r in moves:
        if not r.action.is_signal or r.action.polarity != "!":
            continue
        partner = r.action.co()
        for j, r2 in moves:
            if j != i and r2.action == partner:
                target = _replace(c, {i: _fire(c, i, r), j: _fire(c, j, r2)})
                yield Step(TAU, (r, r2), (i, j), target)


def step_relaxed(m: SDPN, c: Configuration) -> list[Step]:
    """All immediate successors under the relaxed semantics.

    Unsynchronized steps come first (in thread then rule order), followed by
    synchronized pairs, which are reported with action ``tau``.
    """
    moves = _applicable(m, c)
    steps = [Step(r.action, (r,), (i,), _replace(c, {i: _fire(c, i, r)})) for i, r in moves]
    steps.extend(_sync_steps(c, moves))
    return steps


def step_strict(m: SDPN, c: Configuration) -> list[Step]:
    """Successors using only internal or silent rules and synchronized pairs."""
    moves = _applicable(m, c)
    steps = [Step(r.action, (r,), (i,), _replace(c, {i: _fire(c, i, r)}))
             for i, r in moves if not r.action.is_signal]
    steps.extend(_sync_steps(c, moves))
    return steps


def step_dpn(m: SDPN, c: Configuration) -> list[Step]:
    """Single-thread moves only (signals fire without a partner)."""
    return [Step(r.action, (r,), (i,), _replace(c, {i: _fire(c, i, r)}))
            for i, r in _applicable(m, c)]


@dataclass(frozen=True)
class Trace:
    start: Configuration
    steps: tuple[Step, ...] = ()

    @property
    def end(self) -> Configuration:
        return self.steps[-1].target if self.steps else self.start

    def __len__(self) -> int:
        return len(self.steps)

    def word(self) -> tuple[Action, ...]:
        return tuple(s.action for s in self.steps if not s.action.is_silent)

    def configurations(self) -> list[Configuration]:
        return [self.start] + [s.target for s in self.steps]

    def rule_names(self) -> list[str]:
        return [" <-> ".join(r.label() for r in s.rules) for s in self.steps]


def replay_strict(m: SDPN, start: Configuration, steps: Sequence[Sequence[str]]) -> Trace:
    """Replay a trace given as rule names per step (one or two per step).

    Each step must match exactly one strict successor; raises ValueError with
    the failing step index otherwise.
    """
    c = start
    done: list[Step] = []
    for k, names in enumerate(steps, 1):
        want = sorted(names)
        cands = [s for s in step_strict(m, c) if sorted(r.name for r in s.rules) == want]
        targets = {s.target for s in cands}
        if not cands:
            raise ValueError(f"step {k}: {' <-> '.join(names)} cannot fire in {format_configuration(c)}")
        if len(targets) > 1:
            raise ValueError(f"step {k}: {' <-> '.join(names)} is ambiguous in {format_configuration(c)}")
        done.append(cands[0])
        c = cands[0].target
    return Trace(start, tuple(done))


class SearchBudgetExceeded(RuntimeError):
    """The bounded search visited more configurations than allowed."""

    def __init__(self, visited: int, depth: int):
        super().__init__(f"node cap exceeded after {visited} configurations (depth {depth})")
        self.visited = visited
        self.depth = depth


def bounded_search(step: Callable[[SDPN, Configuration], list[Step]], m: SDPN,
                   init: Iterable[Configuration], accept: Callable[[Configuration], bool],
                   depth: int, max_nodes: int = 2_000_000) -> Optional[Trace]:
    """Breadth-first search for a shortest trace into ``accept``.

    Deterministic: initial configurations and successors are explored in
    order, so the returned trace is the first shortest one in that order.
    """
    starts = list(dict.fromkeys(init))
    parent: dict[Configuration, tuple[Optional[Configuration], Optional[Step]]] = {}
    frontier: deque[tuple[Configuration, int]] = deque()
    for c in starts:
        if c not in parent:
            parent[c] = (None, None)
            frontier.append((c, 0))

    def rebuild(c: Configuration) -> Trace:
        steps = []
        while True:
            prev, st = parent[c]
            if prev is None:
                return Trace(c, tuple(reversed(steps)))
            steps.append(st)
            c = prev

    while frontier:
        c, d = frontier.popleft()
        if accept(c):
            return rebuild(c)
        if d == depth:
            continue
        for st in step(m, c):
            if st.target not in parent:
                if len(parent) >= max_nodes:
                    raise SearchBudgetExceeded(len(parent), d + 1)
                parent[st.target] = (c, st)
                frontier.append((st.target, d + 1))
    return None


def bounded_search_strict(m: SDPN, init: Iterable[Configuration], target, depth: int,
                          max_nodes: int = 2_000_000) -> Optional[Trace]:
    """Strict-semantics BFS of at most ``depth`` steps into ``target``.

    ``target`` is an M-automaton (anything with ``accepts``) or a predicate.
    """
    accept = target.accepts if hasattr(target, "accepts") else target
    return bounded_search(step_strict, m, init, accept, depth, max_nodes)


def reachable(step: Callable[[SDPN, Configuration], list[Step]], m: SDPN,
              init: Iterable[Configuration], depth: int) -> dict[Configuration, int]:
    """All configurations within ``depth`` steps, mapped to their distance."""
    dist = {c: 0 for c in init}
    frontier = list(dist)
    for d in range(1, depth + 1):
        nxt = []
        for c in frontier:
            for st in step(m, c):
                if st.target not in dist:
                    dist[st.target] = d
                    nxt.append(st.target)
        frontier = nxt
    return dist
