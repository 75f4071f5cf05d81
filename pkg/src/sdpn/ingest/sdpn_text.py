"""The line-oriented ``.sdpn`` model format.

Example::

    # comments run to end of line
    channels: a b val=0,1
    states: p q
    stack: g h
    rules:
      r1: p g -a!-> q h h        # push
      r2: q h -a?-> q            # pop
      r3: p g -tau-> q h | p g   # spawn: the left thread is the new one
      r4: p h -val!1-> p h

Sections may list their entries on the header line or on following lines.
Actions are ``tau``, ``eps`` (silent), ``c!``/``c?`` or ``c!v``/``c?v``; the
long forms ``send c [v]`` and ``recv c [v]`` are accepted too.
"""

from __future__ import annotations

import re
from typing import Optional

from ..model import SDPN, TAU, Action, Configuration, Rule, Thread, recv, send
from .errors import ParseError

_IDENT = re.compile(r"[\w'#-]+")
_ARROW = re.compile(r"(?:^|\s)-(?P<act>[^>]*?)->(?=\s|$)")


def _cut_comment(line: str) -> str:
    # '#' starts a comment unless it sits inside an identifier (fresh symbols like g#1)
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1].isspace()):
            return line[:i]
    return line


class _Builder:
    def __init__(self, source: str):
        self.source = source
        self.actions: list[Action] = [TAU]
        self.channels: dict[str, tuple[str, ...]] = {}
        self.states: list[str] = []
        self.stack: list[str] = []
        self.rules: list[Rule] = []
        self.rule_names: set[str] = set()
        self.declared: dict[str, str] = {}

    def err(self, msg: str, line: int, col: int) -> ParseError:
        return ParseError(msg, line, col, self.source)

    def declare(self, kind: str, name: str, line: int, col: int):
        if not _IDENT.fullmatch(name):
            raise self.err(f"malformed {kind} name {name!r}", line, col)
        if name in self.declared:
            raise self.err(f"duplicate declaration of {name!r} (already a {self.declared[name]})", line, col)
        self.declared[name] = kind

    def entry(self, section: str, text: str, line: int, col0: int):
        for m in re.finditer(r"\S+", text):
            tok, col = m.group(), col0 + m.start()
            if section == "channels":
                name, eq, vals = tok.partition("=")
                if name in self.channels:
                    raise self.err(f"duplicate declaration of channel {name!r}", line, col)
                if not _IDENT.fullmatch(name):
                    raise self.err(f"malformed channel name {name!r}", line, col)
                values = tuple(vals.split(",")) if eq else ("",)
                if eq and (not vals or not all(_IDENT.fullmatch(v) for v in values)):
                    raise self.err(f"malformed value list in {tok!r}", line, col)
                if len(set(values)) != len(values):
                    raise self.err(f"duplicate value in {tok!r}", line, col)
                self.channels[name] = values
                for v in values:
                    self.actions += [send(name, v), recv(name, v)]
            elif section == "states":
                self.declare("state", tok, line, col)
                self.states.append(tok)
            else:
                self.declare("stack symbol", tok, line, col)
                self.stack.append(tok)

    def action(self, text: str, line: int, col: int) -> Action:
        words = text.split()
        if len(words) in (2, 3) and words[0] in ("send", "recv"):
            pol = "!" if words[0] == "send" else "?"
            text = words[1] + pol + (words[2] if len(words) == 3 else "")
        try:
            a = Action.parse(text)
        except ValueError:
            raise self.err(f"malformed action {text!r}", line, col) from None
        if a.is_signal:
            vals = self.channels.get(a.channel)
            if vals is None:
                raise self.err(f"undeclared channel {a.channel!r}", line, col)
            if a.value not in vals:
                raise self.err(f"value {a.value!r} not declared for channel {a.channel!r}", line, col)
        return a

    def thread(self, text: str, line: int, col: int) -> Thread:
        toks = [(m.group(), col + m.start()) for m in re.finditer(r"\S+", text)]
        if not toks:
            raise self.err("missing thread on right-hand side", line, col)
        (state, scol), rest = toks[0], toks[1:]
        self.check(state, "state", line, scol)
        for g, gcol in rest:
            self.check(g, "stack symbol", line, gcol)
        return Thread(state, tuple(g for g, _ in rest))

    def check(self, name: str, kind: str, line: int, col: int):
        got = self.declared.get(name)
        if got != kind:
            what = f"is a {got}" if got else "is undeclared"
            raise self.err(f"{kind} expected, but {name!r} {what}", line, col)

    def rule(self, text: str, line: int, col0: int):
        name = ""
        m = re.match(r"\s*([\w'#.-]+):(?=\s)", text)
        if m:
            name = m.group(1)
            if name in self.rule_names:
                raise self.err(f"duplicate rule name {name!r}", line, col0 + m.start(1))
            self.rule_names.add(name)
            off = m.end()
        else:
            off = 0
        arrow = _ARROW.search(text, off)
        if not arrow:
            raise self.err("expected 'STATE SYMBOL -ACTION-> RHS'", line, col0 + off + 1)
        lhs = [(t.group(), col0 + off + t.start()) for t in re.finditer(r"\S+", text[off:arrow.start()])]
        if len(lhs) != 2:
            raise self.err("left-hand side must be a control state and one stack symbol",
                           line, lhs[0][1] if lhs else col0 + off + 1)
        self.check(lhs[0][0], "state", line, lhs[0][1])
        self.check(lhs[1][0], "stack symbol", line, lhs[1][1])
        act = self.action(arrow.group("act"), line, col0 + arrow.start("act"))
        rhs_text, rhs_col = text[arrow.end():], col0 + arrow.end()
        parts = rhs_text.split("|")
        if len(parts) > 2:
            raise self.err("a rule spawns at most one thread", line, rhs_col + len(parts[0]) + len(parts[1]) + 1)
        threads = []
        col = rhs_col
        for part in parts:
            threads.append(self.thread(part, line, col))
            col += len(part) + 1
        spawned = threads[0] if len(threads) == 2 else None
        self.rules.append(Rule(lhs[0][0], lhs[1][0], act, threads[-1], spawned, name))


def parse_sdpn(text: str, source: str = "") -> SDPN:
    b = _Builder(source)
    section: Optional[str] = None
    seen: set = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _cut_comment(raw).rstrip()
        if not line.strip():
            continue
        m = re.match(r"\s*(channels|states|stack|rules)\s*:(?=\s|$)", line)
        if m and not (section == "rules" and _ARROW.search(line)):
            section = m.group(1)
            if section in seen:
                raise b.err(f"duplicate section {section!r}", lineno, m.start(1) + 1)
            if section == "rules" and "states" not in seen:
                raise b.err("the states and stack sections must precede rules", lineno, m.start(1) + 1)
            seen.add(section)
            rest = line[m.end():]
            if rest.strip():
                if section == "rules":
                    b.rule(rest, lineno, m.end() + 1)
                else:
                    b.entry(section, rest, lineno, m.end() + 1)
            continue
        if section is None:
            raise b.err("expected a section header (channels:, states:, stack:, rules:)", lineno,
                        len(line) - len(line.lstrip()) + 1)
        if section == "rules":
            b.rule(line, lineno, 1)
        else:
            b.entry(section, line, lineno, 1)
    try:
        return SDPN(tuple(b.actions), tuple(b.states), tuple(b.stack), tuple(b.rules))
    except ValueError as e:
        raise ParseError(str(e), source=source) from None


def format_action(a: Action) -> str:
    return str(a)


def format_rule(r: Rule) -> str:
    rhs = str(r.target)
    if r.spawned is not None:
        rhs = f"{r.spawned} | {rhs}"
    head = f"{r.name}: " if r.name else ""
    return f"{head}{r.state} {r.symbol} -{r.action}-> {rhs}"


def format_sdpn(m: SDPN) -> str:
    """Canonical text; ``parse_sdpn(format_sdpn(m)) == m`` for declared channels."""
    chans: dict[str, list[str]] = {}
    for a in m.actions:
        if a.is_signal and a.polarity == "!":
            chans.setdefault(a.channel, []).append(a.value)
    decl = []
    for c, vals in chans.items():
        decl.append(c if vals == [""] else f"{c}={','.join(vals)}")
    lines = [f"channels: {' '.join(decl)}".rstrip(),
             f"states: {' '.join(m.states)}",
             f"stack: {' '.join(m.stack)}",
             "rules:"]
    lines += [f"  {format_rule(r)}" for r in m.rules]
    return "\n".join(lines) + "\n"


def parse_configuration(text: str, m: SDPN) -> Configuration:
    """``p0 1 0 . p1 FSF`` (dots optional) or ``EPS``."""
    toks = [t for t in text.replace(".", " . ").split() if t != "."]
    if toks == ["EPS"]:
        return ()
    states, stack = set(m.states), set(m.stack)
    threads: list[list[str]] = []
    for i, tok in enumerate(toks):
        if tok in states:
            threads.append([tok])
        elif tok in stack and threads:
            threads[-1].append(tok)
        else:
            raise ParseError(f"unexpected {tok!r} in configuration (token {i + 1})")
    if not threads:
        raise ParseError("empty configuration (write EPS)")
    return tuple(Thread(t[0], tuple(t[1:])) for t in threads)
