"""Product of the mission automaton with one agent's transition system."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable

from ..errors import MismatchedSpecification, UnknownState
from ..ltl.nfa import Nfa
from .ts import TransitionSystem

PState = tuple[int, int]  # (nfa state id, ts state id)
PEdge = tuple[PState, PState]


@dataclass
class UpdateInfo:
    """Environment change reported by an agent: TS edges to add or delete and states to relabel."""

    add: set[tuple[int, int]] = field(default_factory=set)
    delete: set[tuple[int, int]] = field(default_factory=set)
    relabel: dict[int, frozenset[str]] = field(default_factory=dict)
    time: int = 0
    # attributes for added edges: (s, t) -> (action, cost, duration)
    add_attrs: dict[tuple[int, int], tuple[str, float, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.add = {tuple(e) for e in self.add}
        self.delete = {tuple(e) for e in self.delete}
        self.relabel = {s: frozenset(b) for s, b in self.relabel.items()}
        if self.add & self.delete:
            raise ValueError("an edge cannot be both added and deleted")

    def is_empty(self) -> bool:
        return not (self.add or self.delete or self.relabel)

    def to_json(self, ts: TransitionSystem | None = None) -> dict:
        name = (lambda s: ts.names[s]) if ts is not None else (lambda s: s)
        return {
            "add": sorted([name(a), name(b)] for a, b in self.add),
            "delete": sorted([name(a), name(b)] for a, b in self.delete),
            "relabel": sorted([name(s), sorted(b)] for s, b in self.relabel.items()),
            "time": self.time,
        }


class ProductAutomaton:
    """Reachable part of ``nfa`` x ``ts`` from a set of root states.

    The edge ``(q, s) -> (q', s')`` exists iff ``(s, s')`` is a TS transition
    and ``q' = delta(q, L(s))``: the label of the source TS state is consumed.
    The closure starts from the initial state plus any extra roots that the
    team construction needs (switch entries, synchronized states). Edges
    carry the cost, duration and action of the underlying TS transition.
    """

    def __init__(self, nfa: Nfa, ts: TransitionSystem, r: int = 0, roots: Iterable[PState] = ()):
        self.nfa = nfa
        self.ts = ts
        self.r = r
        self.revision = 0
        self.initial: PState = (nfa.initial, ts.initial)
        self.roots: set[PState] = {self.initial}
        self.states: set[PState] = set()
        self.succ: dict[PState, set[PState]] = {}
        self.extend(roots)

    # -- construction ----------------------------------------------------

    def _expand(self, u: PState) -> set[PState]:
        q, s = u
        q2 = self.nfa.step(q, self.ts.labels[s])
        return {(q2, t) for t in self.ts.succ(s)}

    def _close(self, seeds: Iterable[PState]) -> None:
        queue = deque()
        for u in seeds:
            if u not in self.states:
                self.states.add(u)
                queue.append(u)
        while queue:
            u = queue.popleft()
            out = self._expand(u)
            self.succ[u] = out
            for v in out:
                if v not in self.states:
                    self.states.add(v)
                    queue.append(v)

    def extend(self, roots: Iterable[PState]) -> None:
        new = []
        for q, s in roots:
            self.ts.check(s)
            if not 0 <= q < len(self.nfa):
                raise UnknownState(f"NFA state id {q} out of range")
            if (q, s) not in self.roots:
                self.roots.add((q, s))
                new.append((q, s))
        self._close([self.initial] + new)

    def reset_initial(self, s: int) -> None:
        """Move the agent's initial TS state, as done at synchronization."""
        self.ts.initial = self.ts.check(s)
        self.initial = (self.nfa.initial, s)
        self.extend([self.initial])

    # -- queries ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, u: object) -> bool:
        return u in self.states

    def is_accepting(self, u: PState) -> bool:
        return self.nfa.is_accepting(u[0])

    def successors(self, u: PState) -> set[PState]:
        return self.succ.get(u, set())

    def has_edge(self, u: PState, v: PState) -> bool:
        return v in self.succ.get(u, ())

    def edges(self) -> set[PEdge]:
        return {(u, v) for u, out in self.succ.items() for v in out}

    def cost(self, u: PState, v: PState) -> float:
        return self.ts.edge(u[1], v[1]).cost

    def duration(self, u: PState, v: PState) -> int:
        return self.ts.edge(u[1], v[1]).duration

    def action(self, u: PState, v: PState) -> str:
        return self.ts.edge(u[1], v[1]).action

    def edge_valid(self, u: PState, v: PState) -> bool:
        """The defining membership condition of a product edge."""
        (q, s), (q2, t) = u, v
        return self.ts.has_edge(s, t) and q2 in self.nfa.delta(q, self.ts.labels[s])

    def signature(self) -> tuple[frozenset, frozenset]:
        return frozenset(self.states), frozenset(self.edges())

    def describe(self, u: PState) -> str:
        return f"({self.nfa.describe(u[0])}, {self.ts.names[u[1]]})"

    # -- updates ---------------------------------------------------------

    def apply(self, info: UpdateInfo) -> set[PEdge]:
        """Apply an environment update in place and return the removed edges R(t).

        Deleting a TS edge removes every product edge projecting onto it.
        Adding one creates product edges wherever the source label allows.
        Relabeling a TS state recomputes the edges leaving it, because the
        source label drives the automaton step. States no longer reachable
        from the roots are dropped afterwards; their edges are not reported
        in R(t), which only lists edges invalidated by the rules themselves.
        """
        ts = self.ts
        for s, t in info.add | info.delete:
            ts.check(s)
            ts.check(t)
        for s in info.relabel:
            ts.check(s)
        by_ts: dict[int, list[PState]] = {}
        for u in self.states:
            by_ts.setdefault(u[1], []).append(u)
        removed: set[PEdge] = set()
        touched: list[PState] = []

        for s, t in sorted(info.delete):
            if ts.remove_edge(s, t):
                for u in by_ts.get(s, ()):
                    out = self.succ.get(u, set())
                    for v in [v for v in out if v[1] == t]:
                        out.discard(v)
                        removed.add((u, v))
        for s, t in sorted(info.add):
            action, cost, dur = info.add_attrs.get((s, t), ("move", 1.0, 1))
            ts.add_edge(s, t, action, cost, dur)
        for s, label in sorted(info.relabel.items()):
            ts.relabel(s, label)
            for u in by_ts.get(s, ()):
                new = self._expand(u)
                old = self.succ.get(u, set())
                removed |= {(u, v) for v in old - new}
        for s in sorted({a for a, _ in info.add} | set(info.relabel)):
            touched.extend(by_ts.get(s, ()))

        # refresh adjacency of touched sources and close over new targets
        frontier = []
        for u in touched:
            self.succ[u] = self._expand(u)
            frontier.extend(v for v in self.succ[u] if v not in self.states)
        self._close(frontier)
        if removed:
            self._prune()
        self.revision += 1
        return removed

    def _prune(self) -> None:
        keep = set()
        queue = deque(r for r in self.roots if r in self.states)
        keep.update(queue)
        while queue:
            u = queue.popleft()
            for v in self.succ.get(u, ()):
                if v not in keep:
                    keep.add(v)
                    queue.append(v)
        for u in self.states - keep:
            self.succ.pop(u, None)
        self.states = keep


def product(
    nfa: Nfa,
    ts: TransitionSystem,
    r: int = 0,
    roots: Iterable[PState] = (),
) -> ProductAutomaton:
    """Build the reachable product, revision 0.

    Label names outside the formula's propositions are ignored by the
    automaton step, so any labeling is accepted.
    """
    return ProductAutomaton(nfa, ts, r, roots)


def check_same_nfa(pas: Iterable[ProductAutomaton]) -> Nfa:
    pas = list(pas)
    if not pas:
        raise ValueError("no product automata")
    nfa = pas[0].nfa
    for pa in pas[1:]:
        if pa.nfa is not nfa:
            raise MismatchedSpecification("product automata reference different specifications")
    return nfa


def letters_of(tss: Iterable[TransitionSystem]) -> set[frozenset[str]]:
    """All label values occurring in the given systems, plus the empty letter."""
    out: set[frozenset[str]] = {frozenset()}
    for ts in tss:
        out.update(ts.labels)
    return out


def start_letters_of(tss: Iterable[TransitionSystem]) -> set[frozenset[str]]:
    return {ts.labels[ts.initial] for ts in tss}


def label_word(ts: TransitionSystem, states: Iterable[int]) -> list[AbstractSet[str]]:
    return [ts.labels[s] for s in states]
