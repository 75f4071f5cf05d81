"""M-automata over configurations and their labelled (K) variant.

An M-automaton has control states (``S_C``) and stack states (``S_S``).  A
thread ``p w`` is read from a control state ``s`` by the unique edge
``s -p-> s_p``, then ``w`` through stack states, then an epsilon edge back to
a control state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping, Optional

from .ingest.patterns import Alt, AnySym, AnyThreads, ConfigPattern, Repeat, Seq, Sym, SymClass
from .model import Configuration, Thread

State = Hashable
Transition = tuple  # (source, stack symbol, target)


@dataclass(frozen=True)
class MAutomaton:
    control: frozenset
    stack_states: frozenset
    initial: State
    finals: frozenset
    state_edges: frozenset  # (s, p, s_p)
    gamma_edges: frozenset  # (x, g, y)
    eps_edges: frozenset    # (x, s)

    @staticmethod
    def build(control: Iterable, stack_states: Iterable, initial, finals: Iterable,
              state_edges: Iterable = (), gamma_edges: Iterable = (), eps_edges: Iterable = ()) -> MAutomaton:
        return MAutomaton(frozenset(control), frozenset(stack_states), initial, frozenset(finals),
                          frozenset(state_edges), frozenset(gamma_edges), frozenset(eps_edges))

    @cached_property
    def sp(self) -> dict[tuple[State, str], State]:
        return {(s, p): x for s, p, x in self.state_edges}

    @cached_property
    def sp_owner(self) -> dict[State, tuple[State, str]]:
        return {x: (s, p) for s, p, x in self.state_edges}

    @cached_property
    def succ(self) -> dict[tuple[State, str], tuple]:
        out: dict = {}
        for x, g, y in self.gamma_edges:
            out.setdefault((x, g), []).append(y)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def gamma_out(self) -> dict[State, tuple]:
        out: dict = {}
        for t in self.gamma_edges:
            out.setdefault(t[0], []).append(t)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def eps_out(self) -> dict[State, tuple]:
        out: dict = {}
        for x, s in self.eps_edges:
            out.setdefault(x, []).append(s)
        return {k: tuple(v) for k, v in out.items()}

    @property
    def states(self) -> frozenset:
        return self.control | self.stack_states

    def read_thread(self, sources: Iterable[State], t: Thread) -> set:
        """Control states reachable after reading thread ``t`` from ``sources``."""
        out = set()
        for s in sources:
            x = self.sp.get((s, t.state))
            if x is None:
                continue
            xs = {x}
            for g in t.stack:
                xs = {y for z in xs for y in self.succ.get((z, g), ())}
                if not xs:
                    break
            for z in xs:
                out.update(self.eps_out.get(z, ()))
        return out

    def accepts(self, c: Configuration) -> bool:
        cur = {self.initial}
        for t in c:
            cur = self.read_thread(cur, t)
            if not cur:
                return False
        return not cur.isdisjoint(self.finals)

    def trim(self) -> MAutomaton:
        """Drop states that are unreachable or cannot reach a final state."""
        fwd: dict[State, list] = {}
        for s, _, x in self.state_edges:
            fwd.setdefault(s, []).append(x)
        for x, _, y in self.gamma_edges:
            fwd.setdefault(x, []).append(y)
        for x, s in self.eps_edges:
            fwd.setdefault(x, []).append(s)
        bwd: dict[State, list] = {}
        for a, bs in fwd.items():
            for b in bs:
                bwd.setdefault(b, []).append(a)
        reach = _closure([self.initial], fwd)
        coreach = _closure(self.finals, bwd)
        keep = (reach & coreach) | {self.initial}
        return MAutomaton.build(
            self.control & keep, self.stack_states & keep, self.initial, self.finals & keep,
            (e for e in self.state_edges if e[0] in keep and e[2] in keep),
            (e for e in self.gamma_edges if e[0] in keep and e[2] in keep),
            (e for e in self.eps_edges if e[0] in keep and e[1] in keep))

    def is_empty(self) -> bool:
        return self.trim().finals == frozenset()


def _closure(start: Iterable, edges: Mapping) -> set:
    seen = set(start)
    todo = list(seen)
    while todo:
        for y in edges.get(todo.pop(), ()):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


@dataclass(frozen=True)
class Violation:
    clause: str
    witnesses: tuple

    def __str__(self) -> str:
        return f"{self.clause}: {', '.join(map(repr, self.witnesses))}"


def validate(a: MAutomaton, model=None, saturated: bool = False) -> Optional[Violation]:
    """Check the structural conditions of an M-automaton.

    Returns None when all hold, else the first violated clause.  With
    ``saturated`` the sole-predecessor condition on ``s_p`` only forbids
    other state-symbol edges, since saturation adds stack edges into ``s_p``.
    """
    both = a.control & a.stack_states
    if both:
        return Violation("control and stack states overlap", tuple(both))
    if a.initial not in a.control:
        return Violation("initial state is not a control state", (a.initial,))
    if not a.finals <= a.control:
        return Violation("final state is not a control state", tuple(a.finals - a.control))
    seen: dict = {}
    for s, p, x in sorted(a.state_edges, key=repr):
        if s not in a.control or x not in a.stack_states:
            return Violation("state-symbol edge must go from S_C to S_S", ((s, p, x),))
        if model is not None and p not in model.states:
            return Violation("state-symbol edge labelled by an unknown control state", ((s, p, x),))
        if (s, p) in seen:
            return Violation("two state-symbol successors for one control state", (seen[(s, p)], (s, p, x)))
        seen[(s, p)] = (s, p, x)
    targets: dict = {}
    for s, p, x in a.state_edges:
        targets.setdefault(x, []).append((s, p, x))
    for x, es in targets.items():
        if len(es) > 1:
            return Violation("s_p has more than one predecessor", tuple(es))
    for x, g, y in a.gamma_edges:
        if x not in a.stack_states or y not in a.stack_states:
            return Violation("stack-symbol edge must stay within S_S", ((x, g, y),))
        if model is not None and g not in model.stack:
            return Violation("stack-symbol edge labelled by an unknown symbol", ((x, g, y),))
        if not saturated and y in targets:
            return Violation("s_p has more than one predecessor", (targets[y][0], (x, g, y)))
    for x, s in a.eps_edges:
        if x not in a.stack_states or s not in a.control:
            return Violation("epsilon edge must go from S_S to S_C", ((x, s),))
    return None


# --- pattern compilation ----------------------------------------------------

def _glushkov(r, alphabet: frozenset):
    """Positions (symbol sets), nullable, first, last and follow of a regex."""
    syms: list[frozenset] = []

    def go(node):
        if isinstance(node, (Sym, AnySym, SymClass)):
            if isinstance(node, Sym):
                s = frozenset({node.name})
            elif isinstance(node, AnySym):
                s = alphabet
            else:
                s = alphabet - node.names if node.negated else node.names & alphabet
            syms.append(s)
            k = len(syms) - 1
            return False, {k}, {k}, {}
        if isinstance(node, Seq):
            nullable, first, last, follow = True, set(), set(), {}
            for part in node.parts:
                n2, f2, l2, fo2 = go(part)
                for k, v in fo2.items():
                    follow.setdefault(k, set()).update(v)
                for k in last:
                    follow.setdefault(k, set()).update(f2)
                if nullable:
                    first |= f2
                last = (last | l2) if n2 else set(l2)
                nullable = nullable and n2
            return nullable, first, last, follow
        if isinstance(node, Alt):
            nullable, first, last, follow = False, set(), set(), {}
            for opt in node.options:
                n2, f2, l2, fo2 = go(opt)
                nullable |= n2
                first |= f2
                last |= l2
                for k, v in fo2.items():
                    follow.setdefault(k, set()).update(v)
            return nullable, first, last, follow
        if isinstance(node, Repeat):
            n2, f2, l2, fo2 = go(node.body)
            follow = {k: set(v) for k, v in fo2.items()}
            if node.kind in "*+":
                for k in l2:
                    follow.setdefault(k, set()).update(f2)
            return (n2 or node.kind in "*?"), f2, l2, follow
        raise TypeError(node)

    nullable, first, last, follow = go(r)
    return syms, nullable, first, last, follow


def from_pattern(pattern: ConfigPattern, model) -> MAutomaton:
    """Compile a configuration pattern into an equivalent M-automaton.

    Stack regexes range over the model's declared stack alphabet.  The
    initial state of each thread's position automaton is merged into the
    shared ``s_p`` state of the control state it starts from.
    """
    gamma = frozenset(model.stack)
    all_states = tuple(model.states)
    control = ["c0"]
    stack_states: set = set()
    state_edges: set = set()
    gamma_edges: set = set()
    eps_edges: set = set()

    def sp(c: str, p: str) -> str:
        x = f"{c}.{p}"
        if x not in stack_states:
            stack_states.add(x)
            state_edges.add((c, p, x))
        return x

    cur = "c0"
    for i, item in enumerate(pattern.items):
        if isinstance(item, AnyThreads):
            loop = f"{cur}.any"
            stack_states.add(loop)
            eps_edges.add((loop, cur))
            for p in all_states:
                x = sp(cur, p)
                eps_edges.add((x, cur))
                for g in gamma:
                    gamma_edges.add((x, g, loop))
                    gamma_edges.add((loop, g, loop))
            continue
        nxt = f"c{len(control)}"
        control.append(nxt)
        syms, nullable, first, last, follow = _glushkov(item.stack, gamma)
        pos = [f"{cur}>{nxt}#{k}" for k in range(len(syms))]
        stack_states.update(pos)
        states = all_states if item.states is None else sorted(item.states)
        for p in states:
            x = sp(cur, p)
            for k in first:
                gamma_edges.update((x, g, pos[k]) for g in syms[k])
            if nullable:
                eps_edges.add((x, nxt))
        for k, ks in follow.items():
            for k2 in ks:
                gamma_edges.update((pos[k], g, pos[k2]) for g in syms[k2])
        for k in last:
            eps_edges.add((pos[k], nxt))
        cur = nxt
    return MAutomaton.build(control, stack_states, "c0", {cur}, state_edges, gamma_edges, eps_edges)


def universal(model) -> MAutomaton:
    return from_pattern(ConfigPattern((AnyThreads(),)), model)


def complete(a: MAutomaton, states: Iterable[str]) -> MAutomaton:
    """Add a fresh ``s_p`` for every control state lacking one for ``p``."""
    new_stack, new_edges = set(), set()
    for s in a.control:
        for p in states:
            if (s, p) not in a.sp:
                x = ("sp", s, p)
                new_stack.add(x)
                new_edges.add((s, p, x))
    if not new_edges:
        return a
    return MAutomaton(a.control, a.stack_states | new_stack, a.initial, a.finals,
                      a.state_edges | new_edges, a.gamma_edges, a.eps_edges)


# --- labelled automata and products ----------------------------------------

@dataclass(frozen=True, eq=False)
class KAutomaton:
    """An M-automaton whose stack edges carry label-variable identifiers."""

    automaton: MAutomaton
    label: Mapping = field(default_factory=dict)

    @staticmethod
    def identity(a: MAutomaton) -> KAutomaton:
        return KAutomaton(a, {t: t for t in a.gamma_edges})


def intersect(apre: KAutomaton, a1: MAutomaton) -> KAutomaton:
    """Product of a labelled automaton with a plain one (reachable part only).

    Product stack edges inherit the label of their first component; epsilon
    edges pair only with epsilon edges.
    """
    a = apre.automaton
    init = (a.initial, a1.initial)
    control, stack_states = {init}, set()
    state_edges, gamma_edges, eps_edges = set(), set(), set()
    label = {}
    todo = deque([init])
    seen = {init}

    def visit(q):
        if q not in seen:
            seen.add(q)
            todo.append(q)

    state_syms_1: dict = {}
    for s1, p, x1 in a1.state_edges:
        state_syms_1.setdefault(s1, []).append((p, x1))
    while todo:
        q = todo.popleft()
        x, x1 = q
        if x in a.control:
            control.add(q)
            for p, y1 in state_syms_1.get(x1, ()):
                y = a.sp.get((x, p))
                if y is not None:
                    state_edges.add((q, p, (y, y1)))
                    visit((y, y1))
            continue
        stack_states.add(q)
        for t in a.gamma_out.get(x, ()):
            for y1 in a1.succ.get((x1, t[1]), ()):
                e = (q, t[1], (t[2], y1))
                gamma_edges.add(e)
                label[e] = apre.label[t]
                visit((t[2], y1))
        for s in a.eps_out.get(x, ()):
            for s1 in a1.eps_out.get(x1, ()):
                eps_edges.add((q, (s, s1)))
                visit((s, s1))
    finals = {q for q in control if q[0] in a.finals and q[1] in a1.finals}
    m = MAutomaton.build(control, stack_states, init, finals, state_edges, gamma_edges, eps_edges)
    return KAutomaton(m, label)


# --- enumeration and dumps ----------------------------------------------------

def enumerate_configurations(a: MAutomaton, max_threads: int = 3, max_stack: int = 3,
                             limit: int = 10_000) -> Iterator[Configuration]:
    """Members of L(a) with bounded thread count and stack heights, shortest first."""
    emitted = 0
    threads_from: dict = {}

    def segments(s):
        # (thread, control state after it) pairs readable from control state s
        if s not in threads_from:
            out = []
            for (s0, p), x in sorted(a.sp.items(), key=repr):
                if s0 != s:
                    continue
                layer = [((), x)]
                for depth in range(max_stack + 1):
                    nxt = []
                    for word, z in layer:
                        for s2 in a.eps_out.get(z, ()):
                            out.append((Thread(p, word), s2))
                        if depth < max_stack:
                            for t in a.gamma_out.get(z, ()):
                                nxt.append((word + (t[1],), t[2]))
                    layer = list(dict.fromkeys(nxt))
            threads_from[s] = list(dict.fromkeys(out))
        return threads_from[s]

    seen = set()
    layer = [((), a.initial)]
    for n in range(max_threads + 1):
        nxt = []
        for conf, s in layer:
            if s in a.finals and conf not in seen:
                seen.add(conf)
                yield conf
                emitted += 1
                if emitted >= limit:
                    return
            if n < max_threads:
                for t, s2 in segments(s):
                    nxt.append((conf + (t,), s2))
        layer = list(dict.fromkeys(nxt))


def state_name(q) -> str:
    if isinstance(q, tuple):
        return "<" + ",".join(state_name(x) for x in q) + ">"
    return str(q)


def dump(a, title: str = "") -> str:
    """Stable text form: header lines then one sorted transition per line."""
    label = {}
    if isinstance(a, KAutomaton):
        label = a.label
        a = a.automaton
    lines = [f"# {title}"] if title else []
    lines.append(f"initial {state_name(a.initial)}")
    lines += sorted(f"final {state_name(q)}" for q in a.finals)
    lines += sorted(f"control {state_name(q)}" for q in a.control)
    lines += sorted(f"stack {state_name(q)}" for q in a.stack_states)
    body = [f"{state_name(s)} -{p}-> {state_name(x)}" for s, p, x in a.state_edges]
    for t in a.gamma_edges:
        line = f"{state_name(t[0])} -{t[1]}-> {state_name(t[2])}"
        if t in label:
            lab = label[t]
            line += f"  [{state_name(lab[0])} -{lab[1]}-> {state_name(lab[2])}]"
        body.append(line)
    body += [f"{state_name(x)} -eps-> {state_name(s)}" for x, s in a.eps_edges]
    return "\n".join(lines + sorted(body)) + "\n"
