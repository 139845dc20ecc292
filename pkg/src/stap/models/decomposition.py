"""Decomposition states of the mission automaton and a brute-force validator.

A state ``q`` qualifies when the task may be cut at ``q`` into two pieces
that can be executed in either order. Concretely, with ``L(x->y)`` the set of
words leading from ``x`` to ``y``, we require

    L(q -> F) . L(q0 -> q)  subset of  L(q0 -> F)

Every piece of work in a team plan is executed by an agent that starts at
its own initial transition-system state, so each non-empty segment word
begins with the label of some agent's initial state. When such start
letters are supplied the check is restricted to segment words that begin
with one of them (the empty segment is always allowed). Without them every
letter may begin a segment, which is the pure language criterion.

The automaton produced by progression is deterministic, so the inclusion
check reduces to exploring pairs of states driven by a common word; this is
the subset construction specialised to singleton subsets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import AbstractSet, Iterable, Iterator

from ..ltl.nfa import Nfa

PROVED = "proved-by-inclusion"
ASSUMED = "assumed"
REFUTED = "refuted"

DEFAULT_PAIR_BUDGET = 1 << 16
FALLBACK_DEPTH = 6


@dataclass(frozen=True)
class DecompositionSet:
    members: frozenset[int]
    tags: dict[int, str] = field(default_factory=dict, compare=False, hash=False)
    start_letters: frozenset[frozenset[str]] | None = None

    def __contains__(self, q: object) -> bool:
        return q in self.members

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def with_extra(self, extra: Iterable[int]) -> DecompositionSet:
        extra = frozenset(extra)
        tags = dict(self.tags)
        tags.update({q: ASSUMED for q in extra - self.members})
        return DecompositionSet(self.members | extra, tags, self.start_letters)


class _Table:
    """Dense transition table of a materialized automaton."""

    def __init__(self, nfa: Nfa, start_letters: Iterable[AbstractSet[str]] | None):
        self.nfa = nfa
        letters = sorted(nfa.letters, key=lambda a: (len(a), sorted(a)))
        if not letters:
            raise ValueError("automaton has no registered letters; build it with build_nfa")
        if start_letters is None:
            first = list(range(len(letters)))
        else:
            wanted = {nfa.project(a) for a in start_letters}
            missing = wanted - set(letters)
            letters.extend(sorted(missing, key=lambda a: (len(a), sorted(a))))
            first = sorted(i for i, a in enumerate(letters) if a in wanted)
        self.letters = letters
        self.first = first
        # close the state space under all letters before reading len(nfa)
        queue = deque(range(len(nfa)))
        seen = set(queue)
        rows: dict[int, list[int]] = {}
        while queue:
            q = queue.popleft()
            row = [nfa.step(q, a) for a in letters]
            rows[q] = row
            for d in row:
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        self.n = len(nfa)
        self.delta = [rows[q] for q in range(self.n)]
        self.final = [nfa.is_accepting(q) for q in range(self.n)]
        self.q0 = nfa.initial

    def reachable(self) -> set[int]:
        seen = {self.q0}
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for d in self.delta[q]:
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        return seen

    def coreachable(self) -> set[int]:
        rev: dict[int, set[int]] = {}
        for q, row in enumerate(self.delta):
            for d in row:
                rev.setdefault(d, set()).add(q)
        seen = {q for q in range(self.n) if self.final[q]}
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for p in rev.get(x, ()):
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        return seen

    def pairs_from(self, x: int, y: int, budget: int | None, depth: int | None) -> set[tuple[int, int]] | None:
        """Pairs reached from ``(x, y)`` by words that are empty or start with a start letter.

        Returns None when the pair budget runs out.
        """
        seen = {(x, y)}
        frontier = []
        for k in self.first:
            p = (self.delta[x][k], self.delta[y][k])
            if p not in seen:
                seen.add(p)
                frontier.append(p)
        if budget is not None and len(seen) > budget:
            return None
        level = 1
        nletters = len(self.letters)
        while frontier and (depth is None or level < depth):
            nxt = []
            for a, b in frontier:
                ra, rb = self.delta[a], self.delta[b]
                for k in range(nletters):
                    p = (ra[k], rb[k])
                    if p not in seen:
                        seen.add(p)
                        nxt.append(p)
                        if budget is not None and len(seen) > budget:
                            return None
            frontier = nxt
            level += 1
        return seen


def _check_state(tab: _Table, q: int, budget: int | None, depth: int | None, cache: dict) -> bool | None:
    """True if the two-segment swap is safe at ``q``; None if the budget ran out."""
    outer = tab.pairs_from(q, tab.q0, budget, depth)
    if outer is None:
        return None
    for x, y in sorted(outer):
        if not tab.final[x]:
            continue
        inner = cache.get(y)
        if inner is None:
            inner = tab.pairs_from(tab.q0, y, budget, depth)
            if inner is None:
                return None
            cache[y] = inner
        for x2, y2 in inner:
            if x2 == q and not tab.final[y2]:
                return False
    return True


def decomposition_set(
    nfa: Nfa,
    start_letters: Iterable[AbstractSet[str]] | None = None,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> DecompositionSet:
    """States at which the mission may be split between consecutive agents."""
    starts = None if start_letters is None else frozenset(frozenset(a) for a in start_letters)
    tab = _Table(nfa, starts)
    live = tab.reachable() & tab.coreachable()
    tags: dict[int, str] = {}
    members = set()
    cache: dict = {}
    fallback_cache: dict = {}
    for q in sorted(live):
        verdict = _check_state(tab, q, budget, None, cache)
        if verdict is None:
            verdict = _check_state(tab, q, None, FALLBACK_DEPTH, fallback_cache)
            tags[q] = ASSUMED if verdict else REFUTED
        else:
            tags[q] = PROVED if verdict else REFUTED
        if verdict:
            members.add(q)
    return DecompositionSet(frozenset(members), tags, starts)


# -- brute-force validator --------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "unreachable", "dead" or "permutation"
    states: tuple[int, ...]
    order: tuple[int, ...] = ()
    segments: tuple[tuple[tuple[str, ...], ...], ...] = ()

    def describe(self) -> str:
        if self.kind != "permutation":
            return f"{self.kind} state(s) {self.states}"
        return f"cut at {self.states}: order {self.order} rejects segments {self.segments}"


def _segment_maps(tab: _Table, max_len: int, cap: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Distinct state maps induced by segment words, each with one witness word."""
    ident = tuple(range(tab.n))
    found: dict[tuple[int, ...], tuple[int, ...]] = {ident: ()}
    frontier = []
    for k in tab.first:
        m = tuple(tab.delta[s][k] for s in range(tab.n))
        if m not in found:
            found[m] = (k,)
            frontier.append(m)
    for _ in range(1, max_len):
        nxt = []
        for m in frontier:
            w = found[m]
            for k in range(len(tab.letters)):
                m2 = tuple(tab.delta[s][k] for s in m)
                if m2 not in found:
                    found[m2] = w + (k,)
                    nxt.append(m2)
                    if len(found) >= cap:
                        return list(found.items())
        frontier = nxt
        if not frontier:
            break
    return list(found.items())


def validate_decomposition(
    nfa: Nfa,
    D: DecompositionSet | Iterable[int],
    max_len: int,
    start_letters: Iterable[AbstractSet[str]] | None = None,
    map_cap: int = 200_000,
) -> list[Violation]:
    """Enumerate two- and three-segment splits cut at members of ``D``.

    Segment words of length up to ``max_len`` are grouped by the state map
    they induce, which loses nothing: whether a concatenation is accepted
    depends only on the maps of its pieces. Because the choices for the
    pieces are independent once the cut states are fixed, each permutation
    is checked by propagating state sets instead of enumerating tuples.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if isinstance(D, DecompositionSet):
        members = sorted(D.members)
        if start_letters is None and D.start_letters is not None:
            start_letters = D.start_letters
    else:
        members = sorted(set(D))
    tab = _Table(nfa, start_letters)
    out: list[Violation] = []
    reach, coreach = tab.reachable(), tab.coreachable()
    for d in members:
        if d not in reach:
            out.append(Violation("unreachable", (d,)))
        elif d not in coreach:
            out.append(Violation("dead", (d,)))
    members = [d for d in members if d in reach and d in coreach]
    maps = _segment_maps(tab, max_len, map_cap)
    by_q0: dict[int, list[int]] = {}
    by_src: dict[int, dict[int, list[int]]] = {}
    for i, (m, _) in enumerate(maps):
        by_q0.setdefault(m[tab.q0], []).append(i)
    for d in members:
        row: dict[int, list[int]] = {}
        for i, (m, _) in enumerate(maps):
            row.setdefault(m[d], []).append(i)
        by_src[d] = row

    def word(i: int) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(sorted(tab.letters[k])) for k in maps[i][1])

    def propagate(groups: list[list[int]]) -> tuple[int, tuple[int, ...]] | None:
        """Return (state, witness indices) for some non-accepting end state."""
        current = {tab.q0: ()}
        for g in groups:
            nxt: dict[int, tuple[int, ...]] = {}
            for s, wit in current.items():
                for i in g:
                    t = maps[i][0][s]
                    if t not in nxt:
                        nxt[t] = wit + (i,)
            current = nxt
        for s in sorted(current):
            if not tab.final[s]:
                return s, current[s]
        return None

    for d1 in members:
        first = by_q0.get(d1, [])
        if not first:
            continue
        finishing1 = [i for s, idx in by_src[d1].items() if tab.final[s] for i in idx]
        bad = propagate([finishing1, first])
        if bad is not None:
            _, wit = bad
            out.append(Violation("permutation", (d1,), (1, 0), (word(wit[1]), word(wit[0]))))
            continue
        for d2 in members:
            middle = by_src[d1].get(d2, [])
            if not middle:
                continue
            last = [i for s, idx in by_src[d2].items() if tab.final[s] for i in idx]
            if not last:
                continue
            pieces = (first, middle, last)
            for order in permutations(range(3)):
                if order == (0, 1, 2):
                    continue
                bad = propagate([pieces[k] for k in order])
                if bad is not None:
                    _, wit = bad
                    segs = [()] * 3
                    for pos, k in enumerate(order):
                        segs[k] = word(wit[pos])
                    out.append(Violation("permutation", (d1, d2), order, tuple(segs)))
                    break
    return out
