"""Command-line interface: ``sdpn check`` and ``sdpn simulate``.

Exit status of ``check``: 0 unreachable, 1 reachable, 2 unknown or
inconclusive, 64 usage or parse error, 65 resource exhaustion.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .abstraction import PREFIX, SUFFIX
from .automata import dump, from_pattern
from .cegar import (AbstractCex, Pipeline, Proven, check_order, instantiate, run_cegar,
                    verdict_to_json, words_to_json)
from .ingest import ParseError, load_model, parse_config_pattern
from .ingest.program import StateSpaceTooLarge
from .labelling import DemandExplosion
from .model import SearchBudgetExceeded, bounded_search_strict, format_configuration

EXIT_UNREACHABLE = 0
EXIT_REACHABLE = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_RESOURCE = 65

log = logging.getLogger("sdpn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdpn", description="Reachability analysis for synchronized dynamic pushdown networks.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--model", required=True, metavar="FILE",
                        help=".sdpn model or .cfgp program; bundled examples may be named directly")
        sp.add_argument("--init", metavar="PATTERN",
                        help="initial configurations (defaults to the program start for .cfgp)")
        sp.add_argument("--target", required=True, metavar="PATTERN")

    chk = sub.add_parser("check", help="abstract analysis at one order or the full refinement loop")
    common(chk)
    chk.add_argument("--mode", choices=("order", "cegar"), default="cegar")
    chk.add_argument("--abstraction", choices=(PREFIX, SUFFIX, "both"), default="both")
    chk.add_argument("--order", type=_positive, default=2, help="abstraction order for --mode order")
    chk.add_argument("--max-order", type=_positive, default=3)
    chk.add_argument("--budget", type=_positive, help="validation depth (default: the current order)")
    chk.add_argument("--max-nodes", type=_positive, default=2_000_000)
    chk.add_argument("--max-vars", type=_positive, default=2_000_000)
    chk.add_argument("--report", metavar="FILE", help="write a JSON report here ('-' for stdout)")
    chk.add_argument("--emit-automata", metavar="DIR", help="dump the intermediate automata")
    chk.add_argument("--trace-solver", action="store_true", help="log every label update to stderr")

    sim = sub.add_parser("simulate", help="bounded strict-semantics search for a witness trace")
    common(sim)
    sim.add_argument("--depth", type=_positive, required=True)
    sim.add_argument("--max-nodes", type=_positive, default=2_000_000)
    sim.add_argument("--max-threads", type=_positive, default=3)
    sim.add_argument("--max-stack", type=_positive, default=3)
    return p


def resolve_model(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("sdpn") / "examples"
    for candidate in (path.name, path.name + ".sdpn"):
        res = bundled / candidate
        if res.is_file():
            return Path(str(res))
    raise UsageError(f"model file not found: {name}")


def _load(args):
    path = resolve_model(args.model)
    m, start = load_model(path)
    if args.init is None:
        if start is None:
            raise UsageError("--init is required for .sdpn models")
        init_text = " ".join(str(t) for t in start) if start else "EPS"
    else:
        init_text = args.init
    init = parse_config_pattern(init_text, m)
    target = parse_config_pattern(args.target, m)
    return path, m, init_text, init, target


def _write_report(dest: Optional[str], report: dict):
    if not dest:
        return
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _emit_automata(directory: str, pipe: Pipeline):
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, a in (("init", pipe.init_automaton), ("target", pipe.target_automaton),
                    ("saturated", pipe.saturated), ("product", pipe.product)):
        (out / f"{name}.txt").write_text(dump(a, name), encoding="utf-8")


def _order_result(res) -> dict:
    rec = {"proven": isinstance(res, Proven), "order": res.domain.order,
           "abstraction": res.domain.kind,
           "abstract_paths": words_to_json(res.domain, res.paths),
           "tau_words": words_to_json(res.domain, res.meet)}
    if isinstance(res, AbstractCex):
        rec["counterexample_length"] = res.length
    return rec


def cmd_check(args) -> int:
    path, m, init_text, init, target = _load(args)
    kinds = (PREFIX, SUFFIX) if args.abstraction == "both" else (args.abstraction,)
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace_solver else None
    config = {"model": path.name, "init": init_text, "target": args.target, "mode": args.mode,
              "abstractions": list(kinds), "max_nodes": args.max_nodes, "max_vars": args.max_vars}
    t0 = time.perf_counter()
    if args.mode == "order":
        if args.order < 1:
            raise UsageError("--order must be at least 1")
        config["order"] = args.order
        pipe = Pipeline(m, init, target, max_vars=args.max_vars, trace=trace)
        if args.emit_automata:
            _emit_automata(args.emit_automata, pipe)
        results = [check_order(m, init, target, pipe.domain(k, args.order), pipe) for k in kinds]
        proven = next((r for r in results if isinstance(r, Proven)), None)
        outcome = "unreachable" if proven else "inconclusive"
        result = {"outcome": outcome, "checks": [_order_result(r) for r in results],
                  "statistics": pipe.stats()}
        timing = {"total_seconds": 0.0, "checks": [r.stats.get("seconds") for r in results]}
        for r in results:
            status = "proven" if isinstance(r, Proven) else f"counterexample of length {r.length}"
            print(f"{r.domain.kind} order {r.domain.order}: {status}")
            print("  paths: {" + ", ".join(words_to_json(r.domain, r.paths)) + "}")
        code = EXIT_UNREACHABLE if proven else EXIT_UNKNOWN
    else:
        if args.max_order < 1:
            raise UsageError("--max-order must be at least 1")
        config.update(max_order=args.max_order, budget=args.budget)
        if args.emit_automata:
            _emit_automata(args.emit_automata, Pipeline(m, init, target, max_vars=args.max_vars))
        verdict = run_cegar(m, init, target, args.max_order, budget=args.budget, kinds=kinds,
                            max_nodes=args.max_nodes, max_vars=args.max_vars, trace=trace)
        result = verdict_to_json(verdict)
        timing = {"total_seconds": 0.0}
        outcome = verdict.outcome
        if outcome == "unreachable":
            print(f"unreachable (proven by {verdict.kind} abstraction of order {verdict.order})")
            code = EXIT_UNREACHABLE
        elif outcome == "reachable":
            print(f"reachable: {len(verdict.trace)}-step trace found at order {verdict.order} ({verdict.kind})")
            _print_trace(verdict.trace)
            code = EXIT_REACHABLE
        else:
            print(f"unknown after order {verdict.max_order}")
            code = EXIT_UNKNOWN
    timing["total_seconds"] = round(time.perf_counter() - t0, 6)
    _write_report(args.report, {"command": "check", "configuration": config, "result": result,
                                "timing": timing})
    return code


def _print_trace(trace):
    print(f"  start: {format_configuration(trace.start)}")
    for k, st in enumerate(trace.steps, 1):
        print(f"  {k:>2}. {st.describe():<28} {format_configuration(st.target)}")


def cmd_simulate(args) -> int:
    _, m, _, init, target = _load(args)
    starts, warning = instantiate(init, m, args.max_threads, args.max_stack)
    if warning:
        log.warning(warning)
    found = bounded_search_strict(m, starts, from_pattern(target, m), args.depth, args.max_nodes)
    if found is None:
        print("none")
        return EXIT_UNKNOWN
    print(f"trace of length {len(found)}")
    _print_trace(found)
    return EXIT_REACHABLE


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handler = cmd_check if args.command == "check" else cmd_simulate
    try:
        return handler(args)
    except (ParseError, UsageError) as e:
        print(f"sdpn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DemandExplosion, StateSpaceTooLarge, SearchBudgetExceeded, MemoryError, RecursionError) as e:
        print(f"sdpn: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
