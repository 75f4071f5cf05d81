"""Abstract labels on saturated automata: constraint generation, solving, evaluation.

Every stack edge ``t`` of the saturated automaton carries an unknown label
function ``lab(t): K -> K``.  All constraint shapes build join-preserving
functions, so a label is determined by its values on single words; the
solver tabulates ``(t, w)`` pairs on demand only.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .abstraction import ONE, ZERO, KDomain, KElement
from .automata import KAutomaton, MAutomaton
from .model import Action

Y1, Y2, Y3, Y4, Y5 = "Y1", "Y2", "Y3", "Y4", "Y5"


@dataclass(frozen=True)
class Constraint:
    """``target`` label must dominate the right-hand side of the given shape.

    ``sources`` depends on ``kind``: empty for Y1/Y3, ``((t,),)`` for Y2,
    ``(top, below)`` pairs for Y4 and ``(left, right)`` pairs for Y5, where
    ``left`` reads the spawned thread and ``right`` the continuing one.
    """

    kind: str
    target: tuple
    action: Optional[Action] = None
    sources: tuple = ()
    rule: object = None


def generate_constraints(m, base: MAutomaton, apre: MAutomaton) -> list[Constraint]:
    """Constraints for the saturated ``apre`` of the original automaton ``base``."""
    succ = apre.succ
    sp = apre.sp
    out = [Constraint(Y1, t) for t in sorted(base.gamma_edges, key=repr)]
    for r in m.rules:
        if not r.is_normal:
            raise ValueError(f"rule {r.label()} is not normalized")
        a = r.action
        for s in sorted(apre.control, key=repr):
            try:
                src = sp[(s, r.state)]
            except KeyError:
                raise ValueError(f"no s_p state for control state {s!r} and {r.state!r}") from None
            if r.spawned is not None:
                left_start = sp[(s, r.spawned.state)]
                pairs: dict = {}
                for mid in succ.get((left_start, r.spawned.stack[0]), ()):
                    for s2 in apre.eps_out.get(mid, ()):
                        right_start = sp[(s2, r.target.state)]
                        for q in succ.get((right_start, r.target.stack[0]), ()):
                            pairs.setdefault(q, []).append(
                                ((left_start, r.spawned.stack[0], mid), (right_start, r.target.stack[0], q)))
                for q, ps in pairs.items():
                    out.append(Constraint(Y5, (src, r.symbol, q), a, tuple(ps), r))
                continue
            word = r.target.stack
            start = sp[(s, r.target.state)]
            if not word:
                out.append(Constraint(Y3, (src, r.symbol, start), a, (), r))
            elif len(word) == 1:
                for q in succ.get((start, word[0]), ()):
                    out.append(Constraint(Y2, (src, r.symbol, q), a, (((start, word[0], q),),), r))
            else:
                pairs = {}
                for mid in succ.get((start, word[0]), ()):
                    for q in succ.get((mid, word[1]), ()):
                        pairs.setdefault(q, []).append(((start, word[0], mid), (mid, word[1], q)))
                for q, ps in pairs.items():
                    out.append(Constraint(Y4, (src, r.symbol, q), a, tuple(ps), r))
    return out


class DemandExplosion(RuntimeError):
    def __init__(self, stats: dict):
        super().__init__(f"demanded label variables exceed the cap: {stats}")
        self.stats = stats


class Solver:
    """Demand-driven least solution of a constraint system.

    Variables are ``(transition, word)`` pairs; ``apply(t, K)`` returns the
    least value of ``lab(t)(K)``, solving whatever it needs first.
    """

    def __init__(self, constraints: Iterable[Constraint], domain: KDomain, *,
                 max_vars: int = 2_000_000, trace: Optional[Callable[[str], None]] = None,
                 seed: Optional[int] = None):
        self.domain = domain
        self.by_target: dict = {}
        for c in constraints:
            self.by_target.setdefault(c.target, []).append(c)
        self.table: dict = {}
        self.deps: dict = {}
        self.max_vars = max_vars
        self.trace = trace
        self.rng = random.Random(seed) if seed is not None else None
        self.updates = 0
        self._work: deque = deque()
        self._queued: set = set()

    # public API
    def apply(self, t, x: KElement) -> KElement:
        for w in x:
            self._demand((t, w))
        self._run()
        return self._lookup(t, x)

    def solve(self, demands: Iterable) -> Solution:
        for t, x in demands:
            for w in x:
                self._demand((t, w))
        self._run()
        return Solution(self.table, self.domain)

    @property
    def solution(self) -> Solution:
        return Solution(self.table, self.domain)

    def stats(self) -> dict:
        return {"variables": len(self.table), "updates": self.updates,
                "constraints": sum(len(v) for v in self.by_target.values())}

    # internals
    def _lookup(self, t, x: KElement) -> KElement:
        table = self.table
        if len(x) == 1:
            return table[(t, next(iter(x)))]
        return frozenset().union(*(table[(t, w)] for w in x))

    def _demand(self, var):
        if var not in self.table:
            if len(self.table) >= self.max_vars:
                raise DemandExplosion(self.stats())
            self.table[var] = ZERO
            self._push(var)

    def _push(self, var):
        if var not in self._queued:
            self._queued.add(var)
            if self.rng and self._work and self.rng.random() < 0.5:
                self._work.appendleft(var)
            else:
                self._work.append(var)

    def _read(self, t, x: KElement, reader) -> KElement:
        out = set()
        for w in x:
            var = (t, w)
            self._demand(var)
            self.deps.setdefault(var, set()).add(reader)
            out |= self.table[var]
        return frozenset(out)

    def _rhs(self, var) -> KElement:
        t, w = var
        d = self.domain
        arg = frozenset({w})
        acc: set = set()
        for c in self.by_target.get(t, ()):
            kind = c.kind
            if kind == Y1:
                acc.add(w)
            elif kind == Y3:
                acc |= d.prepend(c.action, arg)
            elif kind == Y2:
                acc |= d.prepend(c.action, self._read(c.sources[0][0], arg, var))
            elif kind == Y4:
                for top, below in c.sources:
                    inner = self._read(below, arg, var)
                    if inner:
                        acc |= d.prepend(c.action, self._read(top, inner, var))
            else:
                for left, right in c.sources:
                    spawned = self._read(left, ONE, var)
                    if spawned:
                        cont = self._read(right, arg, var)
                        if cont:
                            acc |= d.prepend(c.action, d.shuffle(spawned, cont))
        return frozenset(acc)

    def _run(self):
        work, table = self._work, self.table
        while work:
            var = work.popleft()
            self._queued.discard(var)
            old = table[var]
            new = old | self._rhs(var)
            if new != old:
                table[var] = new
                self.updates += 1
                if self.trace:
                    self.trace(f"{_fmt_var(var)} : {_fmt(old)} -> {_fmt(new)}")
                for reader in self.deps.get(var, ()):
                    self._push(reader)


def _fmt(x: KElement) -> str:
    return "{" + ", ".join(sorted(" ".join(map(str, w)) or "eps" for w in x)) + "}"


def _fmt_var(var) -> str:
    (x, g, y), w = var
    return f"({x!r} -{g}-> {y!r}) @ {' '.join(map(str, w)) or 'eps'}"


class Solution:
    """Read-only view of a solver table keyed by ``(transition, word)``."""

    def __init__(self, table: dict, domain: KDomain):
        self.table = table
        self.domain = domain

    def __call__(self, t, x: KElement) -> KElement:
        return frozenset().union(*(self.table[(t, w)] for w in x)) if x else ZERO

    def __contains__(self, var) -> bool:
        return var in self.table

    def __len__(self) -> int:
        return len(self.table)


def check_prefixpoint(constraints: Iterable[Constraint], sol: Solution, d: KDomain) -> list:
    """Constraint instances violated at demanded arguments (empty if none)."""
    bad = []
    table = sol.table
    demanded: dict = {}
    for t, w in table:
        demanded.setdefault(t, []).append(w)

    def lab(t, x):
        return frozenset().union(*(table.get((t, w), ZERO) for w in x)) if x else ZERO

    for c in constraints:
        for w in demanded.get(c.target, ()):
            arg = frozenset({w})
            if c.kind == Y1:
                rhs = arg
            elif c.kind == Y3:
                rhs = d.prepend(c.action, arg)
            elif c.kind == Y2:
                rhs = d.prepend(c.action, lab(c.sources[0][0], arg))
            elif c.kind == Y4:
                rhs = frozenset().union(*(d.prepend(c.action, lab(top, lab(below, arg)))
                                          for top, below in c.sources))
            else:
                rhs = frozenset().union(*(d.prepend(c.action, d.shuffle(lab(l, ONE), lab(r, arg)))
                                          for l, r in c.sources))
            if not rhs <= table[(c.target, w)]:
                bad.append((c, w))
    return bad


def evaluate(ka: KAutomaton, solver: Solver, d: KDomain) -> KElement:
    """Join, over accepted labelled configurations, of their abstract path value.

    A thread segment ``s_p =w=> q -eps-> s'`` contributes its labels composed
    top-of-stack outermost and applied to ``ONE``; the segments of one
    configuration are combined by shuffle.
    """
    a = ka.automaton.trim()
    if not a.finals:
        return ZERO
    label = ka.label

    # per target control state s': value of reading a stack from each stack state up to s'
    preds: dict = {}
    for t in a.gamma_edges:
        preds.setdefault(t[2], []).append(t)
    exits: dict = {}
    for x, s in a.eps_edges:
        exits.setdefault(s, []).append(x)
    segment: dict = {}
    for s2, xs in exits.items():
        val: dict = {x: ONE for x in xs}
        work = deque((x, ONE) for x in xs)
        while work:
            y, delta = work.popleft()
            for t in preds.get(y, ()):
                gain = solver.apply(label[t], delta) - val.get(t[0], ZERO)
                if gain:
                    val[t[0]] = val.get(t[0], ZERO) | gain
                    work.append((t[0], gain))
        segment[s2] = val

    # forward over control states, shuffling in each thread's segment value
    out_edges: dict = {}
    for s, p, x in a.state_edges:
        for s2, val in segment.items():
            if x in val:
                out_edges.setdefault(s, []).append((s2, val[x]))
    reach: dict = {a.initial: ONE}
    work = deque([(a.initial, ONE)])
    while work:
        s, delta = work.popleft()
        for s2, seg in out_edges.get(s, ()):
            gain = d.shuffle(delta, seg) - reach.get(s2, ZERO)
            if gain:
                reach[s2] = reach.get(s2, ZERO) | gain
                work.append((s2, gain))
    return frozenset().union(*(reach.get(f, ZERO) for f in a.finals))
