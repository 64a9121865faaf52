"""Set descriptions as finite automata over the cover alphabet.

A set ``A`` is the set of points every prefix of whose representation is
accepted by a deterministic automaton: a Pi^0_1 set, the complement of a
union of cylinders.  Forbidden substrings become an Aho-Corasick automaton,
forbidden cylinders a prefix trie, and the two are intersected.

Automata are trimmed so that every state has an infinite future; a level-n
address then meets ``A`` exactly when the automaton can read it.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cover import NiceCover, check_address


class Automaton:
    """Deterministic partial automaton; missing transitions are rejections."""

    def __init__(self, alphabet: str, delta: Sequence[Mapping[str, int]], start: int | None = 0):
        self.alphabet = alphabet
        self.delta = [dict(row) for row in delta]
        self.start = start
        for row in self.delta:
            for ch, nxt in row.items():
                if ch not in alphabet or not 0 <= nxt < len(self.delta):
                    raise ValueError(f"bad transition {ch!r} -> {nxt}")

    @property
    def size(self) -> int:
        return len(self.delta)

    @property
    def empty(self) -> bool:
        return self.start is None

    def step(self, state: int | None, ch: str) -> int | None:
        if state is None:
            return None
        return self.delta[state].get(ch)

    def run(self, word: str) -> int | None:
        state = self.start
        for ch in word:
            state = self.step(state, ch)
            if state is None:
                return None
        return state

    def accepts_prefix(self, word: str) -> bool:
        return self.run(word) is not None

    def trim(self) -> "Automaton":
        """Keep states reachable from start that have an infinite future."""
        if self.start is None:
            return self
        reach = {self.start}
        todo = [self.start]
        while todo:
            q = todo.pop()
            for nxt in self.delta[q].values():
                if nxt not in reach:
                    reach.add(nxt)
                    todo.append(nxt)
        alive = set(reach)
        changed = True
        while changed:
            changed = False
            for q in list(alive):
                if not any(n in alive for n in self.delta[q].values()):
                    alive.discard(q)
                    changed = True
        if self.start not in alive:
            return Automaton(self.alphabet, [], None)
        order = sorted(alive)
        index = {q: i for i, q in enumerate(order)}
        delta = [{ch: index[n] for ch, n in self.delta[q].items() if n in alive} for q in order]
        return Automaton(self.alphabet, delta, index[self.start])

    def counts(self, n_max: int) -> list[int]:
        """``N_n`` for n = 0..n_max on the trimmed automaton (exact integers)."""
        trimmed = self.trim()
        if trimmed.empty:
            return [0] * (n_max + 1)
        vec = [0] * trimmed.size
        vec[trimmed.start] = 1
        out = [1]
        for _ in range(n_max):
            new = [0] * trimmed.size
            for q, c in enumerate(vec):
                if c:
                    for nxt in trimmed.delta[q].values():
                        new[nxt] += c
            vec = new
            out.append(sum(vec))
        return out

    def continuation_counts(self, n_max: int) -> list[list[int]]:
        """``table[j][q]`` = number of live length-j words read from state q."""
        table = [[1] * self.size]
        for _ in range(n_max):
            prev = table[-1]
            table.append([sum(prev[n] for n in row.values()) for row in self.delta])
        return table

    def transfer_matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size))
        for q, row in enumerate(self.delta):
            for nxt in row.values():
                m[q, nxt] += 1
        return m

    def spectral_radius(self) -> float:
        trimmed = self.trim()
        if trimmed.empty:
            return 0.0
        eig = np.linalg.eigvals(trimmed.transfer_matrix())
        return float(max(abs(eig)))

    def random_word(self, rng: random.Random, depth: int) -> str:
        """Uniform choice among live successors at each step."""
        trimmed = self.trim()
        if trimmed.empty:
            raise ValueError("cannot sample from an empty set")
        q = trimmed.start
        out = []
        for _ in range(depth):
            row = trimmed.delta[q]
            ch = rng.choice(sorted(row))
            out.append(ch)
            q = row[ch]
        return "".join(out)

    def product(self, other: "Automaton", mode: str) -> "Automaton":
        """Intersection (``and``) or union (``or``) of prefix languages."""
        if self.alphabet != other.alphabet:
            raise ValueError("alphabets differ")
        start = (self.start, other.start)
        if (mode == "and" and None in start) or start == (None, None):
            return Automaton(self.alphabet, [], None)
        index = {start: 0}
        delta: list[dict[str, int]] = [{}]
        todo = deque([start])
        while todo:
            pair = todo.popleft()
            row = delta[index[pair]]
            for ch in self.alphabet:
                nxt = (self.step(pair[0], ch), other.step(pair[1], ch))
                if (mode == "and" and None in nxt) or nxt == (None, None):
                    continue
                if nxt not in index:
                    index[nxt] = len(delta)
                    delta.append({})
                    todo.append(nxt)
                row[ch] = index[nxt]
        return Automaton(self.alphabet, delta, 0)

    def __and__(self, other):
        return self.trim().product(other.trim(), "and")

    def __or__(self, other):
        return self.trim().product(other.trim(), "or")

    def included_in(self, other: "Automaton") -> bool:
        """Prefix-language containment of the trimmed automata."""
        a, b = self.trim(), other.trim()
        if a.empty:
            return True
        if b.empty:
            return False
        seen = {(a.start, b.start)}
        todo = [(a.start, b.start)]
        while todo:
            p, q = todo.pop()
            for ch, pn in a.delta[p].items():
                qn = b.delta[q].get(ch)
                if qn is None:
                    return False
                if (pn, qn) not in seen:
                    seen.add((pn, qn))
                    todo.append((pn, qn))
        return True


def full_automaton(alphabet: str) -> Automaton:
    return Automaton(alphabet, [{ch: 0 for ch in alphabet}])


def allowed_automaton(alphabet: str, allowed: Iterable[str]) -> Automaton:
    allowed = sorted(set(allowed))
    for ch in allowed:
        if ch not in alphabet:
            raise ValueError(f"symbol {ch!r} not in alphabet")
    return Automaton(alphabet, [{ch: 0 for ch in allowed}])


def forbidden_substrings_automaton(alphabet: str, patterns: Iterable[str]) -> Automaton:
    """Aho-Corasick automaton rejecting any word that contains a pattern."""
    patterns = [p for p in patterns]
    if any(not p for p in patterns):
        return Automaton(alphabet, [], None)
    goto: list[dict[str, int]] = [{}]
    terminal = [False]
    for pat in patterns:
        q = 0
        for ch in pat:
            if ch not in alphabet:
                raise ValueError(f"symbol {ch!r} not in alphabet")
            if ch not in goto[q]:
                goto.append({})
                terminal.append(False)
                goto[q][ch] = len(goto) - 1
            q = goto[q][ch]
        terminal[q] = True
    fail = [0] * len(goto)
    delta: list[dict[str, int]] = [dict() for _ in goto]
    order = deque()
    for ch in alphabet:
        if ch in goto[0]:
            nxt = goto[0][ch]
            fail[nxt] = 0
            delta[0][ch] = nxt
            order.append(nxt)
        else:
            delta[0][ch] = 0
    while order:
        q = order.popleft()
        terminal[q] = terminal[q] or terminal[fail[q]]
        for ch in alphabet:
            if ch in goto[q]:
                nxt = goto[q][ch]
                fail[nxt] = delta[fail[q]][ch]
                delta[q][ch] = nxt
                order.append(nxt)
            else:
                delta[q][ch] = delta[fail[q]][ch]
    if terminal[0]:
        return Automaton(alphabet, [], None)
    rows = [{ch: n for ch, n in row.items() if not terminal[n]} for row in delta]
    # Terminal states are unreachable once their in-edges are dropped.
    return _drop_states(alphabet, rows, terminal)


def _drop_states(alphabet: str, rows, dead) -> Automaton:
    keep = [q for q in range(len(rows)) if not dead[q]]
    index = {q: i for i, q in enumerate(keep)}
    return Automaton(alphabet, [{ch: index[n] for ch, n in rows[q].items()} for q in keep], index.get(0))


def forbidden_cylinders_automaton(alphabet: str, cylinders: Iterable[str]) -> Automaton:
    """Reject words having one of ``cylinders`` as a prefix."""
    cylinders = set(cylinders)
    if "" in cylinders:
        return Automaton(alphabet, [], None)
    prefixes = sorted({c[:m] for c in cylinders for m in range(len(c))}, key=lambda a: (len(a), a))
    index = {p: i for i, p in enumerate(prefixes)}
    escaped = len(prefixes)
    delta: list[dict[str, int]] = []
    for p in prefixes:
        row = {}
        for ch in alphabet:
            nxt = p + ch
            if nxt in cylinders:
                continue
            row[ch] = index.get(nxt, escaped)
        delta.append(row)
    delta.append({ch: escaped for ch in alphabet})
    return Automaton(alphabet, delta, 0)


@dataclass
class SetDescription:
    """A finitely described subset of the space.

    ``mode`` is ``allowed`` (one-state automaton), ``forbidden`` (forbidden
    substrings plus forbidden prefix cylinders), ``automaton`` (explicit
    transitions), ``union`` (finite union of member descriptions) or
    ``point`` (an eventually periodic singleton).
    """

    mode: str
    allowed: tuple[str, ...] = ()
    patterns: tuple[str, ...] = ()
    cylinders: tuple[str, ...] = ()
    transitions: tuple[tuple[tuple[str, int], ...], ...] = ()
    start: int = 0
    members: tuple["SetDescription", ...] = ()
    word: tuple[str, str] = ("", "0")
    label: str = ""

    @classmethod
    def full(cls) -> "SetDescription":
        return cls("forbidden")

    @classmethod
    def allowing(cls, symbols: Iterable[str]) -> "SetDescription":
        return cls("allowed", allowed=tuple(symbols))

    @classmethod
    def forbidding(cls, patterns: Iterable[str] = (), cylinders: Iterable[str] = ()) -> "SetDescription":
        return cls("forbidden", patterns=tuple(patterns), cylinders=tuple(cylinders))

    @classmethod
    def from_transitions(cls, transitions: Sequence[Mapping[str, int]], start: int = 0) -> "SetDescription":
        return cls("automaton", transitions=tuple(tuple(sorted(row.items())) for row in transitions), start=start)

    @classmethod
    def singleton(cls, prefix: str = "", period: str = "0") -> "SetDescription":
        return cls("point", word=(prefix, period))

    def union(self, *others: "SetDescription") -> "SetDescription":
        return SetDescription("union", members=(self, *others))

    def automaton(self, cover: NiceCover) -> Automaton:
        alphabet = cover.alphabet
        if self.mode == "allowed":
            return allowed_automaton(alphabet, self.allowed)
        if self.mode == "forbidden":
            for p in (*self.patterns, *self.cylinders):
                check_address(cover, p)
            a = forbidden_substrings_automaton(alphabet, self.patterns)
            if self.cylinders:
                a = a & forbidden_cylinders_automaton(alphabet, self.cylinders)
            return a
        if self.mode == "automaton":
            return Automaton(alphabet, [dict(row) for row in self.transitions], self.start)
        if self.mode == "point":
            prefix, period = self.word
            check_address(cover, prefix + period)
            word = prefix + period
            delta = [{word[i]: i + 1} for i in range(len(word) - 1)]
            delta.append({word[-1]: len(prefix)})
            return Automaton(alphabet, delta, 0)
        if self.mode == "union":
            if not self.members:
                return Automaton(alphabet, [], None)
            acc = self.members[0].automaton(cover)
            for m in self.members[1:]:
                acc = acc | m.automaton(cover)
            return acc
        raise ValueError(f"unknown set mode {self.mode!r}")

    def to_dict(self) -> dict:
        if self.mode == "allowed":
            return {"mode": "allowed", "allowed": list(self.allowed)}
        if self.mode == "forbidden":
            d = {"mode": "forbidden", "patterns": list(self.patterns)}
            if self.cylinders:
                d["cylinders"] = list(self.cylinders)
            return d
        if self.mode == "automaton":
            return {"mode": "automaton", "start": self.start, "transitions": [dict(row) for row in self.transitions]}
        if self.mode == "point":
            return {"mode": "point", "prefix": self.word[0], "period": self.word[1]}
        return {"mode": "union", "members": [m.to_dict() for m in self.members]}

    @classmethod
    def from_dict(cls, d: Mapping, cover: NiceCover | None = None) -> "SetDescription":
        if cover is not None and "base" in d and int(d["base"]) not in (cover.base, cover.alphabet_size):
            raise ValueError(f"set description base {d['base']} does not match cover {cover}")
        mode = d.get("mode")
        if mode == "allowed":
            return cls.allowing(d["allowed"])
        if mode == "forbidden":
            return cls.forbidding(d.get("patterns", ()), d.get("cylinders", ()))
        if mode == "automaton":
            return cls.from_transitions([{str(k): int(v) for k, v in row.items()} for row in d["transitions"]], int(d.get("start", 0)))
        if mode == "point":
            return cls.singleton(d.get("prefix", ""), d.get("period", "0"))
        if mode == "union":
            return cls("union", members=tuple(cls.from_dict(m, cover) for m in d["members"]))
        raise ValueError(f"unknown set description mode {mode!r}")
