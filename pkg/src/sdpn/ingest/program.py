"""Control-flow-graph programs (``.cfgp``) and their translation to SDPNs.

Control states are valuations of the thread-local variables; stack symbols
pair a node with a valuation of the current procedure's locals.  See
``docs/cfgp.md`` for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Union

from ..model import SDPN, SILENT, TAU, Action, Configuration, Rule, Thread, recv, send
from .errors import ParseError


@dataclass(frozen=True)
class Var:
    name: str
    domain: tuple
    init: str


@dataclass(frozen=True)
class Channel:
    name: str
    values: tuple = ()  # empty: a pure signal


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: str  # constant, variable name, or "*"


@dataclass(frozen=True)
class Assume:
    var: str
    op: str  # "==" or "!="
    expr: str


@dataclass(frozen=True)
class Call:
    proc: str


@dataclass(frozen=True)
class Return:
    expr: Optional[str] = None


@dataclass(frozen=True)
class Spawn:
    thread: str


@dataclass(frozen=True)
class Send:
    channel: str
    expr: Optional[str] = None


@dataclass(frozen=True)
class Recv:
    channel: str
    var: Optional[str] = None


Statement = Union[Skip, Assign, Assume, Call, Return, Spawn, Send, Recv]


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    stmt: Statement
    line: int = 0


@dataclass
class Cfg:
    name: str
    kind: str  # "thread" or "proc"
    entry: str = ""
    locals: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    returns: tuple = ()
    line: int = 0

    def nodes(self) -> list[str]:
        out = [self.entry]
        for e in self.edges:
            out += [e.src, e.dst]
        return list(dict.fromkeys(out))


@dataclass
class ProgramAst:
    threadlocals: list = field(default_factory=list)
    channels: dict = field(default_factory=dict)
    threads: dict = field(default_factory=dict)
    procedures: dict = field(default_factory=dict)
    start: str = ""

    def cfg(self, name: str) -> Cfg:
        return self.threads.get(name) or self.procedures[name]


_NAME = r"[A-Za-z_][\w']*"
_VALUE = r"[\w']+"


def _domain(text: str, line: int, col: int, source: str) -> tuple:
    m = re.fullmatch(r"\{\s*(.*?)\s*\}", text.strip())
    if not m:
        raise ParseError("expected a value domain such as {0, 1}", line, col, source)
    vals = tuple(v.strip() for v in m.group(1).split(",")) if m.group(1) else ()
    if not vals or not all(re.fullmatch(_VALUE, v) for v in vals):
        raise ParseError("value domains must be nonempty lists of plain values", line, col, source)
    if len(set(vals)) != len(vals):
        raise ParseError("duplicate value in domain", line, col, source)
    return vals


def _var(text: str, line: int, col: int, source: str) -> Var:
    m = re.fullmatch(rf"({_NAME})\s*:\s*(\{{[^}}]*\}})\s*(?:=\s*({_VALUE}))?\s*", text)
    if not m:
        raise ParseError("expected 'NAME : {values} [= value]'", line, col, source)
    dom = _domain(m.group(2), line, col + m.start(2), source)
    init = m.group(3) or dom[0]
    if init not in dom:
        raise ParseError(f"initial value {init!r} outside the domain", line, col + m.start(3), source)
    return Var(m.group(1), dom, init)


def _statement(text: str, line: int, col: int, source: str) -> Statement:
    t = text.strip()
    pats = [
        (r"skip", lambda m: Skip()),
        (rf"({_NAME})\s*:=\s*({_VALUE}|\*)", lambda m: Assign(m.group(1), m.group(2))),
        (rf"assume\s+({_NAME})\s*(==|!=)\s*({_VALUE})", lambda m: Assume(m.group(1), m.group(2), m.group(3))),
        (rf"call\s+({_NAME})", lambda m: Call(m.group(1))),
        (rf"return(?:\s+({_VALUE}))?", lambda m: Return(m.group(1))),
        (rf"spawn\s+({_NAME})", lambda m: Spawn(m.group(1))),
        (rf"send\s+({_NAME})(?:\s+({_VALUE}|\*))?", lambda m: Send(m.group(1), m.group(2))),
        (rf"recv\s+({_NAME})(?:\s+({_NAME}))?", lambda m: Recv(m.group(1), m.group(2))),
    ]
    for pat, build in pats:
        m = re.fullmatch(pat, t)
        if m:
            return build(m)
    raise ParseError(f"unknown statement {t!r}", line, col, source)


def parse_program(text: str, source: str = "") -> ProgramAst:
    prog = ProgramAst()
    cur: Optional[Cfg] = None
    declared: set = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        col = indent + 1
        kw, _, rest = body.partition(" ")
        rest_col = col + len(kw) + 1 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if kw == "threadlocal":
            v = _var(rest, lineno, rest_col, source)
            if v.name in declared:
                raise ParseError(f"duplicate variable {v.name!r}", lineno, rest_col, source)
            declared.add(v.name)
            prog.threadlocals.append(v)
            cur = None
        elif kw == "channel":
            m = re.fullmatch(rf"({_NAME})\s*(?::\s*(\{{[^}}]*\}}))?", rest)
            if not m:
                raise ParseError("expected 'channel NAME [: {values}]'", lineno, rest_col, source)
            if m.group(1) in prog.channels:
                raise ParseError(f"duplicate channel {m.group(1)!r}", lineno, rest_col, source)
            vals = _domain(m.group(2), lineno, rest_col + m.start(2), source) if m.group(2) else ()
            prog.channels[m.group(1)] = Channel(m.group(1), vals)
            cur = None
        elif kw == "start":
            if not re.fullmatch(_NAME, rest):
                raise ParseError("expected 'start THREAD'", lineno, rest_col, source)
            prog.start = rest
            cur = None
        elif kw in ("thread", "proc"):
            m = re.fullmatch(rf"({_NAME})(?:\s+returns\s+(\{{[^}}]*\}}))?\s*:", rest)
            if not m or (kw == "thread" and m.group(2)):
                raise ParseError(f"expected '{kw} NAME{' [returns {values}]' if kw == 'proc' else ''}:'",
                                 lineno, rest_col, source)
            name = m.group(1)
            if name in prog.threads or name in prog.procedures:
                raise ParseError(f"duplicate thread or procedure {name!r}", lineno, rest_col, source)
            rets = _domain(m.group(2), lineno, rest_col + m.start(2), source) if m.group(2) else ()
            cur = Cfg(name, kw, returns=rets, line=lineno)
            (prog.threads if kw == "thread" else prog.procedures)[name] = cur
        elif cur is None:
            raise ParseError(f"unexpected {kw!r} outside a thread or procedure", lineno, col, source)
        elif kw == "local":
            v = _var(rest, lineno, rest_col, source)
            if any(x.name == v.name for x in cur.locals):
                raise ParseError(f"duplicate variable {v.name!r}", lineno, rest_col, source)
            cur.locals.append(v)
        elif kw == "entry":
            if not re.fullmatch(_VALUE, rest):
                raise ParseError("expected 'entry NODE'", lineno, rest_col, source)
            cur.entry = rest
        else:
            m = re.fullmatch(rf"({_VALUE})\s*->\s*({_VALUE})\s*:\s*(.+)", body)
            if not m:
                raise ParseError("expected 'NODE -> NODE : statement'", lineno, col, source)
            stmt = _statement(m.group(3), lineno, col + m.start(3), source)
            cur.edges.append(Edge(m.group(1), m.group(2), stmt, lineno))
    _check(prog, source)
    return prog


def _check(prog: ProgramAst, source: str):
    if not prog.threads:
        raise ParseError("a program needs at least one thread", source=source)
    if not prog.start:
        prog.start = next(iter(prog.threads))
    if prog.start not in prog.threads:
        raise ParseError(f"start thread {prog.start!r} is not declared", source=source)
    tl = {v.name: v for v in prog.threadlocals}
    for cfg in list(prog.threads.values()) + list(prog.procedures.values()):
        if not cfg.entry:
            cfg.entry = cfg.edges[0].src if cfg.edges else "n0"
        names = dict(tl)
        for v in cfg.locals:
            if v.name in tl:
                raise ParseError(f"local {v.name!r} shadows a thread-local variable", cfg.line, 1, source)
            names[v.name] = v
        for e in cfg.edges:
            s = e.stmt

            def need_var(name):
                ret = prog.procedures.get(name[4:]) if name.startswith("ret_") else None
                if name not in names and not (ret and ret.returns):
                    raise ParseError(f"undeclared variable {name!r}", e.line, 1, source)

            if isinstance(s, Call) and s.proc not in prog.procedures:
                raise ParseError(f"call to undeclared procedure {s.proc!r}", e.line, 1, source)
            if isinstance(s, Spawn) and s.thread not in prog.threads:
                raise ParseError(f"spawn of undeclared thread {s.thread!r}", e.line, 1, source)
            if isinstance(s, (Send, Recv)) and s.channel not in prog.channels:
                raise ParseError(f"undeclared channel {s.channel!r}", e.line, 1, source)
            if isinstance(s, (Assign, Assume)):
                need_var(s.var)
            if isinstance(s, Recv) and s.var:
                need_var(s.var)
                if not prog.channels[s.channel].values:
                    raise ParseError(f"channel {s.channel!r} carries no values", e.line, 1, source)
            if isinstance(s, Return) and s.expr is not None and not cfg.returns:
                raise ParseError(f"{cfg.name} returns a value but declares no result domain", e.line, 1, source)
            if isinstance(s, Send) and prog.channels[s.channel].values and s.expr is None:
                raise ParseError(f"channel {s.channel!r} carries values; send one", e.line, 1, source)


class StateSpaceTooLarge(RuntimeError):
    pass


def _valuations(vars_: list[Var]) -> list[tuple]:
    return list(product(*(v.domain for v in vars_)))


def _suffix(vars_: list[Var], vals: tuple) -> str:
    return "".join(f"_{v.name}{x}" for v, x in zip(vars_, vals))


def cfg_to_sdpn(prog: ProgramAst, max_size: int = 200_000) -> tuple[SDPN, Configuration]:
    """Translate a program; returns the SDPN and its initial configuration."""
    tvars = list(prog.threadlocals)
    for p in prog.procedures.values():
        if p.returns:
            tvars.append(Var(f"ret_{p.name}", p.returns, p.returns[0]))
    size = 1
    for v in tvars:
        size *= len(v.domain)
    if size > max_size:
        raise StateSpaceTooLarge(f"{size} thread-local valuations exceed the cap of {max_size}")
    gvals = _valuations(tvars)
    tindex = {v.name: i for i, v in enumerate(tvars)}
    state_name = {g: "g" + _suffix(tvars, g) for g in gvals}
    g_init = tuple(v.init for v in tvars)

    actions: list[Action] = [TAU]
    for c in prog.channels.values():
        for x in c.values or ("",):
            actions += [send(c.name, x), recv(c.name, x)]

    cfgs = list(prog.threads.values()) + list(prog.procedures.values())
    stack: list[str] = []
    sym: dict = {}
    for cfg in cfgs:
        lvals = _valuations(cfg.locals)
        if len(lvals) * len(cfg.nodes()) * len(gvals) > max_size:
            raise StateSpaceTooLarge(f"{cfg.name}: too many node/valuation combinations")
        for n in cfg.nodes():
            for l in lvals:
                name = f"{cfg.name}_{n}{_suffix(cfg.locals, l)}"
                sym[(cfg.name, n, l)] = name
                stack.append(name)
    if len(set(stack)) != len(stack) or set(stack) & set(state_name.values()):
        raise ParseError("generated names collide; rename nodes or variables")

    def initial_frame(cfg: Cfg) -> str:
        return sym[(cfg.name, cfg.entry, tuple(v.init for v in cfg.locals))]

    rules: list[Rule] = []
    for cfg in cfgs:
        lnames = [v.name for v in cfg.locals]
        lindex = {n: i for i, n in enumerate(lnames)}
        doms = {v.name: v.domain for v in tvars + cfg.locals}
        for k, e in enumerate(cfg.edges):
            s = e.stmt
            rname = f"{cfg.name}.{k + 1}"
            for g in gvals:
                for l in _valuations(cfg.locals):
                    def value(expr):
                        if expr in lindex:
                            return [l[lindex[expr]]]
                        if expr in tindex:
                            return [g[tindex[expr]]]
                        return [expr]

                    def assign(var, x):
                        if var in lindex:
                            l2 = list(l)
                            l2[lindex[var]] = x
                            return g, tuple(l2)
                        g2 = list(g)
                        g2[tindex[var]] = x
                        return tuple(g2), l

                    def emit(act, g2, l2, spawned=None):
                        target = Thread(state_name[g2], (sym[(cfg.name, e.dst, l2)],))
                        rules.append(Rule(state_name[g], sym[(cfg.name, e.src, l)], act, target, spawned,
                                          f"{rname}[{len(rules)}]"))

                    if isinstance(s, Skip):
                        emit(SILENT, g, l)
                    elif isinstance(s, Assign):
                        xs = doms[s.var] if s.expr == "*" else value(s.expr)
                        for x in xs:
                            if x in doms[s.var]:
                                emit(SILENT, *assign(s.var, x))
                    elif isinstance(s, Assume):
                        cur = value(s.var)[0]
                        rhs = value(s.expr)[0]
                        if (cur == rhs) == (s.op == "=="):
                            emit(SILENT, g, l)
                    elif isinstance(s, Call):
                        callee = prog.procedures[s.proc]
                        target = Thread(state_name[g], (initial_frame(callee), sym[(cfg.name, e.dst, l)]))
                        rules.append(Rule(state_name[g], sym[(cfg.name, e.src, l)], SILENT, target, None,
                                          f"{rname}[{len(rules)}]"))
                    elif isinstance(s, Return):
                        outs = [g]
                        if s.expr is not None:
                            outs = []
                            for x in value(s.expr):
                                if x in cfg.returns:
                                    g2 = list(g)
                                    g2[tindex[f"ret_{cfg.name}"]] = x
                                    outs.append(tuple(g2))
                        for g2 in outs:
                            rules.append(Rule(state_name[g], sym[(cfg.name, e.src, l)], SILENT,
                                              Thread(state_name[g2], ()), None, f"{rname}[{len(rules)}]"))
                    elif isinstance(s, Spawn):
                        child = prog.threads[s.thread]
                        emit(SILENT, g, l, Thread(state_name[g_init], (initial_frame(child),)))
                    elif isinstance(s, Send):
                        chan = prog.channels[s.channel]
                        if not chan.values:
                            emit(send(chan.name), g, l)
                            continue
                        xs = chan.values if s.expr == "*" else value(s.expr)
                        for x in xs:
                            if x in chan.values:
                                emit(send(chan.name, x), g, l)
                    elif isinstance(s, Recv):
                        chan = prog.channels[s.channel]
                        for x in chan.values or ("",):
                            if s.var is None:
                                emit(recv(chan.name, x), g, l)
                            elif x in doms[s.var]:
                                emit(recv(chan.name, x), *assign(s.var, x))
                    if len(rules) > max_size:
                        raise StateSpaceTooLarge(f"more than {max_size} rules")
    m = SDPN(tuple(actions), tuple(state_name[g] for g in gvals), tuple(stack), tuple(rules))
    start = prog.threads[prog.start]
    return m, (Thread(state_name[g_init], (initial_frame(start),)),)
