"""Configuration patterns: regular sets of configurations.

Syntax (whitespace separated)::

    pattern := "EPS" | item+
    item    := "ANY*"                      any sequence of threads
             | states regex                one thread
    states  := NAME | "{" NAME ("," NAME)* "}" | "_"
    regex   := seq ("|" seq)*
    seq     := (atom ("*" | "+" | "?")*)*
    atom    := SYMBOL | "." | "[" SYMBOL* "]" | "[^" SYMBOL* "]" | "(" regex ")"

State names and stack symbols are disjoint, so a state name always starts a
new thread item.  ``.`` matches any declared stack symbol.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ParseError


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class AnySym:
    pass


@dataclass(frozen=True)
class SymClass:
    names: frozenset
    negated: bool = False


@dataclass(frozen=True)
class Seq:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Repeat:
    """``kind`` is ``*``, ``+`` or ``?``."""

    body: object
    kind: str


Regex = Union[Sym, AnySym, SymClass, Seq, Alt, Repeat]


@dataclass(frozen=True)
class ThreadPattern:
    states: Optional[frozenset]  # None: any control state
    stack: Regex


@dataclass(frozen=True)
class AnyThreads:
    pass


@dataclass(frozen=True)
class ConfigPattern:
    items: tuple

    def is_finite(self) -> bool:
        def finite(r) -> bool:
            if isinstance(r, Repeat):
                return r.kind == "?" and finite(r.body)
            if isinstance(r, Seq):
                return all(finite(p) for p in r.parts)
            if isinstance(r, Alt):
                return all(finite(o) for o in r.options)
            return True

        return all(isinstance(i, ThreadPattern) and finite(i.stack) for i in self.items)

    def longest_stack(self) -> int:
        """Longest stack any thread item can match; only meaningful when finite."""
        def longest(r) -> int:
            if isinstance(r, Repeat):
                return longest(r.body)
            if isinstance(r, Seq):
                return sum(longest(p) for p in r.parts)
            if isinstance(r, Alt):
                return max((longest(o) for o in r.options), default=0)
            return 1

        return max((longest(i.stack) for i in self.items if isinstance(i, ThreadPattern)), default=0)


_TOKEN = re.compile(r"\s*(?:(\[\^|[\[\](){}|*+?,.]|_(?![\w'#-])|[\w'#-]+))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", 1, col)
        out.append((m.group(1), m.start(1) + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, states, stack):
        self.toks = _tokenize(text)
        self.i = 0
        self.states = set(states)
        self.stack = set(stack)

    def peek(self) -> Optional[str]:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def col(self) -> int:
        if self.i < len(self.toks):
            return self.toks[self.i][1]
        return self.toks[-1][1] + len(self.toks[-1][0]) if self.toks else 1

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of pattern", 1, self.col())
        self.i += 1
        return tok

    def expect(self, tok: str):
        col = self.col()
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got!r}", 1, col)

    def error(self, msg: str):
        raise ParseError(msg, 1, self.col())

    def starts_item(self) -> bool:
        tok = self.peek()
        if tok in ("{", "_") or tok in self.states:
            return True
        return tok == "ANY" and self._any_star()

    def _any_star(self) -> bool:
        return self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "*" and "ANY" not in self.stack

    def pattern(self) -> ConfigPattern:
        if not self.toks:
            raise ParseError("empty pattern (write EPS for the empty configuration)", 1, 1)
        if self.peek() == "EPS" and "EPS" not in self.states:
            self.next()
            if self.peek() is not None:
                self.error("EPS must stand alone")
            return ConfigPattern(())
        items = []
        while self.peek() is not None:
            if not self.starts_item():
                tok = self.peek()
                if tok in self.stack:
                    self.error(f"stack symbol {tok!r} outside a thread item")
                self.error(f"undeclared control state {tok!r}")
            if self.peek() == "ANY":
                self.next()
                self.next()
                items.append(AnyThreads())
                continue
            states = self.stateset()
            items.append(ThreadPattern(states, self.alt()))
        return ConfigPattern(tuple(items))

    def stateset(self) -> Optional[frozenset]:
        tok = self.next()
        if tok == "_":
            return None
        if tok != "{":
            return frozenset({tok})
        names = []
        while True:
            col = self.col()
            name = self.next()
            if name not in self.states:
                raise ParseError(f"undeclared control state {name!r}", 1, col)
            names.append(name)
            sep = self.next()
            if sep == "}":
                return frozenset(names)
            if sep != ",":
                raise ParseError(f"expected ',' or '}}', found {sep!r}", 1, col)

    def alt(self):
        options = [self.seq()]
        while self.peek() == "|":
            self.next()
            options.append(self.seq())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def seq(self):
        parts = []
        while True:
            tok = self.peek()
            if tok is None or tok in ("|", ")") or self.starts_item():
                break
            parts.append(self.postfix())
        return parts[0] if len(parts) == 1 else Seq(tuple(parts))

    def postfix(self):
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            node = Repeat(node, self.next())
        return node

    def atom(self):
        col = self.col()
        tok = self.next()
        if tok == ".":
            return AnySym()
        if tok == "(":
            node = self.alt()
            self.expect(")")
            return node
        if tok in ("[", "[^"):
            names = []
            while self.peek() != "]":
                c = self.col()
                name = self.next()
                if name not in self.stack:
                    raise ParseError(f"undeclared stack symbol {name!r}", 1, c)
                names.append(name)
            self.next()
            return SymClass(frozenset(names), tok == "[^")
        if tok in self.stack:
            return Sym(tok)
        if re.fullmatch(r"[\w'#-]+", tok):
            raise ParseError(f"undeclared stack symbol {tok!r}", 1, col)
        raise ParseError(f"unexpected {tok!r}", 1, col)


def parse_config_pattern(text: str, model) -> ConfigPattern:
    """Parse ``text`` against the states and stack alphabet of ``model``."""
    return _Parser(text, model.states, model.stack).pattern()


def format_regex(r) -> str:
    if isinstance(r, Sym):
        return r.name
    if isinstance(r, AnySym):
        return "."
    if isinstance(r, SymClass):
        return ("[^ " if r.negated else "[ ") + " ".join(sorted(r.names)) + " ]"
    if isinstance(r, Seq):
        return " ".join(_wrap(p, Alt) for p in r.parts)
    if isinstance(r, Alt):
        return " | ".join(format_regex(o) for o in r.options)
    if isinstance(r, Repeat):
        return _wrap(r.body, (Seq, Alt, Repeat)) + r.kind
    raise TypeError(r)


def _wrap(r, kinds) -> str:
    text = format_regex(r)
    if isinstance(r, kinds) and not (isinstance(r, Seq) and not r.parts):
        return f"( {text} )"
    return text


def format_pattern(p: ConfigPattern) -> str:
    if not p.items:
        return "EPS"
    out = []
    for item in p.items:
        if isinstance(item, AnyThreads):
            out.append("ANY*")
            continue
        if item.states is None:
            head = "_"
        elif len(item.states) == 1:
            head = next(iter(item.states))
        else:
            head = "{" + ",".join(sorted(item.states)) + "}"
        body = format_regex(item.stack)
        if isinstance(item.stack, Alt):
            body = f"( {body} )"
        out.append(f"{head} {body}".rstrip())
    return " ".join(out)
