"""Backward saturation: an M-automaton for all predecessors of a regular set.

Works under the relaxed semantics (every rule may fire alone), whose
reachability relation coincides with that of the underlying DPN.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Optional

from .automata import MAutomaton, complete


def saturate(m, a: MAutomaton, seed: Optional[int] = None) -> MAutomaton:
    """Return ``a`` completed with every ``s_p`` and saturated under ``m``'s rules.

    ``m`` must be normalized.  ``seed`` shuffles the worklist order (used to
    test that the result does not depend on it).
    """
    if not m.is_normalized:
        raise ValueError("saturation requires a normalized SDPN")
    a = complete(a, m.states)
    rng = random.Random(seed) if seed is not None else None
    sp = a.sp
    owner = a.sp_owner

    trans: set = set(a.gamma_edges)
    succ: dict = {}
    for x, g, y in trans:
        succ.setdefault((x, g), set()).add(y)
    # watchers[(x, g)]: (src, sym) pairs that gain an edge to y whenever x -g-> y appears
    watchers: dict = {}

    pushes: dict = {}
    spawns: dict = {}
    pops = []
    for r in m.rules:
        if r.spawned is not None:
            spawns.setdefault((r.spawned.state, r.spawned.stack[0]), []).append(r)
        elif not r.target.stack:
            pops.append(r)
        elif len(r.target.stack) == 1:
            for s in a.control:
                key = (sp[(s, r.target.state)], r.target.stack[0])
                watchers.setdefault(key, set()).add((sp[(s, r.state)], r.symbol))
        else:
            pushes.setdefault((r.target.state, r.target.stack[0]), []).append(r)

    work = deque(sorted(trans, key=repr))
    if rng:
        rng.shuffle(work)

    def add(t):
        if t not in trans:
            trans.add(t)
            succ.setdefault((t[0], t[1]), set()).add(t[2])
            if rng and work and rng.random() < 0.5:
                work.appendleft(t)
            else:
                work.append(t)

    def watch(x, g, src, sym):
        ws = watchers.setdefault((x, g), set())
        if (src, sym) not in ws:
            ws.add((src, sym))
            for y in list(succ.get((x, g), ())):
                add((src, sym, y))

    for r in pops:
        for s in a.control:
            add((sp[(s, r.state)], r.symbol, sp[(s, r.target.state)]))

    while work:
        x, g, y = work.popleft()
        for src, sym in list(watchers.get((x, g), ())):
            add((src, sym, y))
        if x not in owner:
            continue
        s, p = owner[x]
        for r in pushes.get((p, g), ()):
            watch(y, r.target.stack[1], sp[(s, r.state)], r.symbol)
        for r in spawns.get((p, g), ()):
            for s2 in a.eps_out.get(y, ()):
                watch(sp[(s2, r.target.state)], r.target.stack[0], sp[(s, r.state)], r.symbol)

    return MAutomaton(a.control, a.stack_states, a.initial, a.finals,
                      a.state_edges, frozenset(trans), a.eps_edges)
