"""Finite prefix and suffix abstractions of action languages.

An abstract value (``KElement``) is a frozenset of action words of length at
most the domain order.  Join is union, product is concatenation followed by
truncation to the first (prefix kind) or last (suffix kind) ``order`` letters.
Silent ``eps`` actions never appear in words.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable

from .model import TAU, Action

KWord = tuple[Action, ...]
KElement = frozenset  # frozenset[KWord]

PREFIX = "prefix"
SUFFIX = "suffix"

ZERO: KElement = frozenset()
ONE: KElement = frozenset({()})


class KDomain:
    def __init__(self, kind: str, order: int, alphabet: Iterable[Action] = ()):
        if kind not in (PREFIX, SUFFIX):
            raise ValueError(f"unknown abstraction kind {kind!r}")
        if order < 1:
            raise ValueError("order must be at least 1")
        alphabet = {a for a in alphabet if not a.is_silent} | {TAU}
        for a in list(alphabet):
            if a.is_signal:
                alphabet.add(a.co())
        self.kind = kind
        self.order = order
        self.alphabet = frozenset(alphabet)
        self._co = {a: a.co() for a in self.alphabet if a.is_signal}
        self._shuffle_cache: dict[tuple[KWord, KWord], KElement] = {}
        self._nodes: list = []
        self._node_ids: dict = {}
        self._twords_memo: dict = {}
        self._tshuffle_memo: dict = {}

    def __repr__(self) -> str:
        return f"KDomain({self.kind!r}, {self.order})"

    def __eq__(self, other) -> bool:
        return isinstance(other, KDomain) and (self.kind, self.order, self.alphabet) == (
            other.kind, other.order, other.alphabet)

    def __hash__(self) -> int:
        return hash((self.kind, self.order, self.alphabet))

    # constants and generators
    zero = ZERO
    one = ONE

    def gen(self, a: Action) -> KElement:
        if a.is_silent:
            return ONE
        return frozenset({(a,)})

    def canonical(self, w: Iterable[Action]) -> KWord:
        w = tuple(a for a in w if not a.is_silent)
        if len(w) <= self.order:
            return w
        return w[:self.order] if self.kind == PREFIX else w[-self.order:]

    def is_valid(self, x: KElement) -> bool:
        return all(len(w) <= self.order and set(w) <= self.alphabet for w in x)

    # semiring operations
    def join(self, *xs: KElement) -> KElement:
        return frozenset().union(*xs)

    def meet(self, x: KElement, y: KElement) -> KElement:
        return x & y

    def leq(self, x: KElement, y: KElement) -> bool:
        return x <= y

    def concat(self, x: KElement, y: KElement) -> KElement:
        if not x or not y:
            return ZERO
        if x == ONE:
            return y
        if y == ONE:
            return x
        n = self.order
        if self.kind == PREFIX:
            out = set()
            for u in x:
                if len(u) >= n:
                    out.add(u)
                else:
                    k = n - len(u)
                    out.update(u + v[:k] for v in y)
            return frozenset(out)
        out = set()
        for v in y:
            if len(v) >= n:
                out.add(v)
            else:
                k = n - len(v)
                out.update(u[-k:] + v if len(u) > k else u + v for u in x)
        return frozenset(out)

    def prepend(self, a: Action, x: KElement) -> KElement:
        """``v_a`` followed by ``x``."""
        if a.is_silent:
            return x
        return self.concat(frozenset({(a,)}), x)

    def alpha(self, language: Iterable[Iterable[Action]]) -> KElement:
        return frozenset(self.canonical(w) for w in language)

    def kleene_star(self, x: KElement) -> KElement:
        y = ONE
        while True:
            nxt = ONE | self.concat(x, y)
            if nxt == y:
                return y
            y = nxt

    def tau_star(self) -> KElement:
        return self.kleene_star(frozenset({(TAU,)}))

    def words(self) -> list[KWord]:
        """Every word of W(order); only sensible for tiny alphabets."""
        letters = sorted(self.alphabet, key=str)
        return [w for n in range(self.order + 1) for w in product(letters, repeat=n)]

    # shuffle
    def shuffle_words(self, u: KWord, v: KWord) -> KElement:
        """Canonical interleavings of two words, with co-action pairs merging to tau."""
        if not v:
            return frozenset({u})
        if not u:
            return frozenset({v})
        key = (u, v)
        hit = self._shuffle_cache.get(key)
        if hit is not None:
            return hit
        if self.kind == PREFIX:
            res = frozenset(self._pshuffle(u, v, self.order, {}))
        else:
            res = frozenset(w[::-1] for w in self._pshuffle(u[::-1], v[::-1], self.order, {}))
        self._shuffle_cache[key] = res
        return res

    def _pshuffle(self, u: KWord, v: KWord, budget: int, memo: dict) -> set[KWord]:
        # prefixes of length <= budget of all synchronizing interleavings of u and v
        if budget == 0:
            return {()}
        if not u:
            return {v[:budget]}
        if not v:
            return {u[:budget]}
        key = (len(u), len(v), budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
        a, b = u[0], v[0]
        out = {(a,) + w for w in self._pshuffle(u[1:], v, budget - 1, memo)}
        out.update((b,) + w for w in self._pshuffle(u, v[1:], budget - 1, memo))
        if self._co.get(a) == b:
            out.update((TAU,) + w for w in self._pshuffle(u[1:], v[1:], budget - 1, memo))
        memo[key] = out
        return out

    def shuffle(self, x: KElement, y: KElement) -> KElement:
        if not x or not y:
            return ZERO
        if x == ONE:
            return y
        if y == ONE:
            return x
        if len(x) == 1 and len(y) == 1:
            return self.shuffle_words(next(iter(x)), next(iter(y)))
        if self.kind == PREFIX:
            return self._tshuffle(self._trie(x), self._trie(y), self.order)
        rx = self._trie(w[::-1] for w in x)
        ry = self._trie(w[::-1] for w in y)
        return frozenset(w[::-1] for w in self._tshuffle(rx, ry, self.order))

    # Sets of words are shuffled as hash-consed tries so that common prefixes
    # share work; node ids index self._nodes as (accepts_empty, {letter: child}).

    def _trie(self, words: Iterable[KWord]) -> int:
        root: dict = {}
        for w in words:
            node = root
            for a in w:
                node = node.setdefault(a, {})
            node[None] = True
        return self._intern(root)

    def _intern(self, node: dict) -> int:
        end = None in node
        kids = tuple(sorted(((a, self._intern(c)) for a, c in node.items() if a is not None),
                            key=lambda kv: kv[1]))
        key = (end, kids)
        nid = self._node_ids.get(key)
        if nid is None:
            nid = len(self._nodes)
            self._node_ids[key] = nid
            self._nodes.append((end, dict(kids)))
        return nid

    def _twords(self, i: int, budget: int) -> frozenset:
        key = (i, budget)
        hit = self._twords_memo.get(key)
        if hit is not None:
            return hit
        end, kids = self._nodes[i]
        out = {()} if end or budget == 0 else set()
        if budget:
            for a, c in kids.items():
                out.update((a,) + w for w in self._twords(c, budget - 1))
        res = frozenset(out)
        self._twords_memo[key] = res
        return res

    def _tshuffle(self, i: int, j: int, budget: int) -> frozenset:
        if budget == 0:
            return ONE
        key = (i, j, budget) if i <= j else (j, i, budget)
        hit = self._tshuffle_memo.get(key)
        if hit is not None:
            return hit
        end_i, kids_i = self._nodes[i]
        end_j, kids_j = self._nodes[j]
        out: set = set()
        if end_i:
            out |= self._twords(j, budget)
        if end_j:
            out |= self._twords(i, budget)
        for a, c in kids_i.items():
            out.update((a,) + w for w in self._tshuffle(c, j, budget - 1))
            partner = kids_j.get(self._co.get(a))
            if partner is not None:
                out.update((TAU,) + w for w in self._tshuffle(c, partner, budget - 1))
        for b, c in kids_j.items():
            out.update((b,) + w for w in self._tshuffle(i, c, budget - 1))
        res = frozenset(out)
        self._tshuffle_memo[key] = res
        return res

    def format(self, x: KElement) -> list[str]:
        return sorted((" ".join(map(str, w)) if w else "eps" for w in x), key=lambda s: (len(s.split()), s))


def format_word(w: KWord) -> str:
    return " ".join(map(str, w)) if w else "eps"
