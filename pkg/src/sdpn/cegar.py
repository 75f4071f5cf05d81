"""Abstraction refinement: prove unreachability or find a real witness.

For each order n the path language between the initial and target sets is
abstracted with both the prefix and the suffix domain.  If an abstraction
contains no perfectly synchronized word (``tau^k``), the target is
unreachable.  Otherwise the shortest such word suggests a counterexample,
which bounded strict search either confirms or refutes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .abstraction import PREFIX, SUFFIX, KDomain, KElement, format_word
from .automata import KAutomaton, enumerate_configurations, from_pattern, intersect
from .ingest.patterns import ConfigPattern
from .labelling import Solver, evaluate, generate_constraints
from .model import (SDPN, SearchBudgetExceeded, Trace, bounded_search_strict, format_configuration,
                    normalize)
from .presat import saturate

log = logging.getLogger(__name__)


class Pipeline:
    """Order-independent parts of the analysis, shared across domains."""

    def __init__(self, m: SDPN, init: ConfigPattern, target: ConfigPattern, *,
                 max_vars: int = 2_000_000, trace=None):
        self.model = m
        self.normal = normalize(m)
        self.init_automaton = from_pattern(init, m)
        self.target_automaton = from_pattern(target, m)
        self.saturated = saturate(self.normal, self.target_automaton)
        self.constraints = generate_constraints(self.normal, self.target_automaton, self.saturated)
        self.product = intersect(KAutomaton.identity(self.saturated), self.init_automaton)
        self.max_vars = max_vars
        self.trace = trace

    def alphabet(self):
        return self.normal.actions

    def domain(self, kind: str, order: int) -> KDomain:
        return KDomain(kind, order, self.alphabet())

    def abstract_paths(self, d: KDomain) -> tuple[KElement, dict]:
        solver = Solver(self.constraints, d, max_vars=self.max_vars, trace=self.trace)
        paths = evaluate(self.product, solver, d)
        return paths, solver.stats()

    def stats(self) -> dict:
        return {
            "rules": len(self.normal.rules),
            "saturated_transitions": len(self.saturated.gamma_edges),
            "constraints": len(self.constraints),
            "product_transitions": len(self.product.automaton.gamma_edges),
        }


@dataclass(frozen=True)
class Proven:
    domain: KDomain
    paths: KElement
    stats: dict = field(default_factory=dict, compare=False)
    meet: KElement = frozenset()


@dataclass(frozen=True)
class AbstractCex:
    domain: KDomain
    paths: KElement
    length: int
    meet: KElement = frozenset()
    stats: dict = field(default_factory=dict, compare=False)


def check_order(m: SDPN, init: ConfigPattern, target: ConfigPattern, d: KDomain,
                pipeline: Optional[Pipeline] = None) -> Union[Proven, AbstractCex]:
    """Abstract the paths from ``init`` to ``target`` in ``d`` and meet with ``tau*``."""
    pipe = pipeline or Pipeline(m, init, target)
    if not set(pipe.alphabet()) <= d.alphabet:
        d = pipe.domain(d.kind, d.order)
    t0 = time.perf_counter()
    paths, stats = pipe.abstract_paths(d)
    stats = dict(stats, seconds=round(time.perf_counter() - t0, 6))
    meet = paths & d.tau_star()
    if not meet:
        return Proven(d, paths, stats)
    return AbstractCex(d, paths, min(len(w) for w in meet), meet, stats)


@dataclass(frozen=True)
class Real:
    trace: Trace


@dataclass(frozen=True)
class Spurious:
    warning: str = ""


def instantiate(pattern: ConfigPattern, m: SDPN, max_threads: int = 3, max_stack: int = 3,
                max_configs: int = 1000) -> tuple[list, str]:
    """Concrete configurations of a pattern, with a warning if the set was cut off.

    Finite patterns are enumerated completely whatever the caps say.
    """
    warning = ""
    if pattern.is_finite():
        max_threads, max_stack = len(pattern.items), pattern.longest_stack()
    else:
        warning = f"initial set instantiated up to {max_threads} threads and stack height {max_stack}"
    starts = list(enumerate_configurations(from_pattern(pattern, m), max_threads, max_stack, max_configs))
    return starts, warning


def validate(m: SDPN, init: ConfigPattern, target: ConfigPattern, j: int, budget: int, *,
             max_nodes: int = 2_000_000, max_threads: int = 3, max_stack: int = 3,
             max_configs: int = 1000) -> Union[Real, Spurious]:
    """Look for a strict trace of at most ``budget`` steps from ``init`` to ``target``."""
    if j > budget:
        raise ValueError("counterexample length exceeds the validation budget")
    starts, warning = instantiate(init, m, max_threads, max_stack, max_configs)
    a_target = from_pattern(target, m)
    try:
        trace = bounded_search_strict(m, starts, a_target, budget, max_nodes)
    except SearchBudgetExceeded as e:
        return Spurious(f"{e}; treated as spurious")
    if trace is None:
        return Spurious(warning)
    return Real(trace)


@dataclass(frozen=True)
class Unreachable:
    order: int
    kind: str
    paths: KElement = frozenset()
    history: tuple = ()

    outcome = "unreachable"


@dataclass(frozen=True)
class Reachable:
    trace: Trace
    order: int = 0
    kind: str = ""
    history: tuple = ()

    outcome = "reachable"


@dataclass(frozen=True)
class Unknown:
    max_order: int
    stats: dict = field(default_factory=dict)
    history: tuple = ()

    outcome = "unknown"


Verdict = Union[Unreachable, Reachable, Unknown]


def run_cegar(m: SDPN, init: ConfigPattern, target: ConfigPattern, max_order: int, *,
              budget: Optional[int] = None, kinds: tuple = (PREFIX, SUFFIX),
              max_nodes: int = 2_000_000, max_vars: int = 2_000_000, trace=None) -> Verdict:
    """Refine the abstraction order from 1 to ``max_order``.

    The validation budget defaults to the current order.  Resource failures
    end the loop with ``Unknown``.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    history: list[dict] = []
    try:
        pipe = Pipeline(m, init, target, max_vars=max_vars, trace=trace)
    except RuntimeError as e:
        return Unknown(0, {"error": str(e)}, ())
    for n in range(1, max_order + 1):
        results = {}
        try:
            for kind in kinds:
                res = check_order(m, init, target, pipe.domain(kind, n), pipe)
                results[kind] = res
                history.append(_step_record(n, kind, res))
                if isinstance(res, Proven):
                    return Unreachable(n, kind, res.paths, tuple(history))
        except RuntimeError as e:
            return Unknown(n, {"error": str(e)}, tuple(history))
        kind, cex = min(((k, r) for k, r in results.items()),
                        key=lambda kr: (kr[1].length, kinds.index(kr[0])))
        depth = max(budget if budget is not None else n, cex.length)
        outcome = validate(m, init, target, cex.length, depth, max_nodes=max_nodes)
        record = next(r for r in history if r["order"] == n and r["kind"] == kind)
        record["validation"] = {"budget": depth, "result": "real" if isinstance(outcome, Real) else "spurious"}
        if isinstance(outcome, Spurious) and outcome.warning:
            record["validation"]["warning"] = outcome.warning
        log.info("order %d: %s counterexample of length %d is %s", n, kind, cex.length,
                 type(outcome).__name__.lower())
        if isinstance(outcome, Real):
            return Reachable(outcome.trace, n, kind, tuple(history))
    return Unknown(max_order, pipe.stats(), tuple(history))


def _step_record(n: int, kind: str, res) -> dict:
    rec = {"order": n, "kind": kind, "proven": isinstance(res, Proven),
           "abstract_paths": len(res.paths)}
    if isinstance(res, AbstractCex):
        rec["counterexample_length"] = res.length
    return rec


# --- serialization -------------------------------------------------------------

def trace_to_json(trace: Trace) -> dict:
    return {
        "length": len(trace),
        "start": format_configuration(trace.start),
        "steps": [
            {"rules": [r.label() for r in st.rules], "action": str(st.action),
             "threads": list(st.positions), "result": format_configuration(st.target)}
            for st in trace.steps
        ],
    }


def verdict_to_json(v: Verdict) -> dict:
    out: dict = {"outcome": v.outcome}
    if isinstance(v, Unreachable):
        out.update(order=v.order, abstraction=v.kind)
    elif isinstance(v, Reachable):
        out.update(order=v.order, abstraction=v.kind, trace=trace_to_json(v.trace))
    else:
        out.update(max_order=v.max_order, statistics=v.stats)
    out["history"] = list(v.history)
    return out


def words_to_json(d: KDomain, x: KElement) -> list[str]:
    return sorted((format_word(w) for w in x), key=lambda s: (len(s.split()), s))
