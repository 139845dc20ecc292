"""Automaton over residual formulas, generated by progression."""

from __future__ import annotations

import threading
from collections import deque
from typing import AbstractSet, Iterable, Sequence

from ..errors import StateBudgetExceeded
from .formula import Formula, canonical, from_dnf, propositions, to_dnf
from .progression import empty_sat, progress_dnf

PropSet = frozenset  # frozenset[str]

DEFAULT_STATE_CAP = 100_000


def letter_key(letter: AbstractSet[str]) -> tuple[str, ...]:
    return tuple(sorted(letter))


class Nfa:
    """States are canonical residual formulas interned to integer ids.

    The transition function is computed on demand and memoized per
    ``(state, letter)``. Letters are projected onto the propositions of the
    root formula before lookup, since other names cannot change a residual.
    ``delta`` keeps the set-valued signature of a nondeterministic automaton
    even though progression produces a single successor.
    """

    def __init__(self, formula: Formula, state_cap: int = DEFAULT_STATE_CAP):
        self.formula = formula
        self.root = canonical(formula)
        self.props: frozenset[str] = propositions(self.root)
        self.state_cap = state_cap
        self.states: list[Formula] = []
        self._ids: dict[Formula, int] = {}
        self._accepting: list[bool] = []
        self._memo: dict[tuple[int, frozenset], int] = {}
        self._lock = threading.Lock()
        self.letters: set[frozenset] = set()
        self.initial = self.intern(self.root)

    # -- state table -------------------------------------------------------

    def intern(self, f: Formula) -> int:
        sid = self._ids.get(f)
        if sid is not None:
            return sid
        with self._lock:
            sid = self._ids.get(f)
            if sid is None:
                if len(self.states) >= self.state_cap:
                    raise StateBudgetExceeded(
                        f"automaton exceeds {self.state_cap} states"
                    )
                sid = len(self.states)
                self.states.append(f)
                self._accepting.append(empty_sat(f))
                self._ids[f] = sid
        return sid

    def state_id(self, f: Formula) -> int:
        return self._ids[canonical(f)]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def initial_states(self) -> frozenset[int]:
        return frozenset({self.initial})

    def is_accepting(self, q: int) -> bool:
        return self._accepting[q]

    @property
    def accepting(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self._accepting) if a)

    # -- transitions -------------------------------------------------------

    def project(self, letter: AbstractSet[str]) -> frozenset:
        return frozenset(letter) & self.props

    def step(self, q: int, letter: AbstractSet[str]) -> int:
        """Deterministic successor of ``q`` on ``letter``."""
        key = (q, frozenset(letter) & self.props)
        nxt = self._memo.get(key)
        if nxt is None:
            nxt = self.intern(from_dnf(progress_dnf(to_dnf(self.states[q]), key[1])))
            self._memo[key] = nxt  # idempotent under concurrent writers
        return nxt

    def delta(self, q: int, letter: AbstractSet[str]) -> frozenset[int]:
        return frozenset({self.step(q, letter)})

    def run(self, word: Iterable[AbstractSet[str]], start: int | None = None) -> int:
        q = self.initial if start is None else start
        for a in word:
            q = self.step(q, a)
        return q

    def successors(self, q: int) -> set[int]:
        """Successors over the registered letter set."""
        return {self.step(q, a) for a in self.letters}

    def edges(self) -> list[tuple[int, tuple[str, ...], int]]:
        """Memoized transitions as ``(src, projected letter, dst)`` triples."""
        return sorted((q, letter_key(a), d) for (q, a), d in self._memo.items())

    def describe(self, q: int) -> str:
        return str(self.states[q])


def _sorted_letters(letters: Iterable[AbstractSet[str]]) -> list[frozenset]:
    uniq = {frozenset(a) for a in letters}
    return sorted(uniq, key=lambda a: (len(a), letter_key(a)))


def build_nfa(
    f: Formula,
    letters: Iterable[AbstractSet[str]],
    state_cap: int = DEFAULT_STATE_CAP,
) -> Nfa:
    """Materialize the progression closure of ``f`` under ``letters``.

    The letter set should contain every label value that occurs in any
    agent transition system, plus the empty set.
    """
    letters = _sorted_letters(letters)
    if not letters:
        raise ValueError("letter set must not be empty")
    nfa = Nfa(f, state_cap=state_cap)
    projected = _sorted_letters(nfa.project(a) for a in letters)
    nfa.letters = set(projected)
    seen = {nfa.initial}
    queue = deque([nfa.initial])
    while queue:
        q = queue.popleft()
        for a in projected:
            d = nfa.step(q, a)
            if d not in seen:
                seen.add(d)
                queue.append(d)
    return nfa


def register_letters(nfa: Nfa, letters: Iterable[AbstractSet[str]]) -> None:
    """Extend the letter set and close the state table under it."""
    new = {nfa.project(a) for a in letters} - nfa.letters
    if not new:
        return
    nfa.letters |= new
    ordered = _sorted_letters(nfa.letters)
    seen = set(range(len(nfa)))
    queue = deque(sorted(seen))
    while queue:
        q = queue.popleft()
        for a in ordered:
            d = nfa.step(q, a)
            if d not in seen:
                seen.add(d)
                queue.append(d)


def nfa_accepts(nfa: Nfa, word: Sequence[AbstractSet[str]]) -> bool:
    return nfa.is_accepting(nfa.run(word))
