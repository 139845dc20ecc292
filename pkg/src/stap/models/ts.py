"""Agent transition systems built from a topological map and an operating-state machine."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..errors import UnknownLocation, UnknownOpState, UnknownState

STAY = "stay"
SEP = "|"  # joins location and operating state in TS state names


@dataclass(frozen=True)
class TsEdge:
    action: str
    cost: float = 1.0
    duration: int = 1


@dataclass
class MapEdge:
    src: str
    dst: str
    cost: float = 1.0
    duration: int = 1
    capability: str | None = None  # e.g. "legged_only"


@dataclass
class TopoMap:
    """Undirected location graph."""

    locations: list[str]
    edges: list[MapEdge] = field(default_factory=list)

    def neighbors(self, loc: str) -> list[str]:
        out = []
        for e in self.edges:
            if e.src == loc:
                out.append(e.dst)
            elif e.dst == loc:
                out.append(e.src)
        return sorted(set(out))

    def edge(self, a: str, b: str) -> MapEdge | None:
        for e in self.edges:
            if (e.src, e.dst) in ((a, b), (b, a)):
                return e
        return None


@dataclass
class OpTransition:
    src: str
    action: str
    dst: str
    cost: float = 1.0
    duration: int = 1


@dataclass
class OperatingStateMachine:
    name: str
    states: list[str]
    initial: str
    transitions: list[OpTransition] = field(default_factory=list)
    # action -> locations where it may be performed; absent means anywhere
    bindings: dict[str, list[str]] = field(default_factory=dict)


class TransitionSystem:
    """World model of one agent.

    States are integer ids with display names. Each state carries a label
    (a frozenset of proposition names) and every ordered pair of states has
    at most one transition. Every state keeps a ``stay`` self-loop so that
    the label of the last visited state can be consumed by the product.
    """

    def __init__(self, names: Sequence[str], initial: int, labels: Sequence[Iterable[str]]):
        self.names: list[str] = list(names)
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        self.initial = initial
        self.labels: list[frozenset[str]] = [frozenset(l) for l in labels]
        self.edges: dict[tuple[int, int], TsEdge] = {}
        self._succ: dict[int, set[int]] = {i: set() for i in range(len(self.names))}
        self._pred: dict[int, set[int]] = {i: set() for i in range(len(self.names))}

    def __len__(self) -> int:
        return len(self.names)

    @property
    def props(self) -> frozenset[str]:
        out: set[str] = set()
        for l in self.labels:
            out |= l
        return frozenset(out)

    def state(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownState(f"no TS state named {name!r}") from None

    def check(self, s: int) -> int:
        if not 0 <= s < len(self.names):
            raise UnknownState(f"TS state id {s} out of range")
        return s

    def add_edge(self, s: int, t: int, action: str = "move", cost: float = 1.0, duration: int = 1) -> None:
        self.check(s)
        self.check(t)
        self.edges[(s, t)] = TsEdge(action, cost, duration)
        self._succ[s].add(t)
        self._pred[t].add(s)

    def remove_edge(self, s: int, t: int) -> bool:
        if (s, t) not in self.edges:
            return False
        del self.edges[(s, t)]
        self._succ[s].discard(t)
        self._pred[t].discard(s)
        return True

    def relabel(self, s: int, label: Iterable[str]) -> None:
        self.labels[self.check(s)] = frozenset(label)

    def succ(self, s: int) -> list[int]:
        return sorted(self._succ[s])

    def pred(self, s: int) -> list[int]:
        return sorted(self._pred[s])

    def has_edge(self, s: int, t: int) -> bool:
        return (s, t) in self.edges

    def edge(self, s: int, t: int) -> TsEdge:
        return self.edges[(s, t)]

    def copy(self) -> TransitionSystem:
        return copy.deepcopy(self)

    def location(self, s: int) -> str:
        return self.names[s].split(SEP)[0]

    def opstate(self, s: int) -> str:
        parts = self.names[s].split(SEP)
        return parts[1] if len(parts) > 1 else ""

    def signature(self) -> tuple:
        """Hashable summary used for equality checks in tests."""
        return (
            tuple(self.names),
            self.initial,
            tuple(self.labels),
            tuple(sorted(self.edges.items())),
        )


def ts_state_name(location: str, opstate: str) -> str:
    return f"{location}{SEP}{opstate}"


def compose_ts(
    topo: TopoMap,
    opsm: OperatingStateMachine,
    start: str,
    kind: str = "wheeled",
    bindings: Mapping[str, Sequence[str]] | None = None,
) -> TransitionSystem:
    """Product of map locations and operating states.

    Movement edges connect adjacent locations and keep the operating state.
    Operating-state edges stay at one location and are restricted to the
    locations named in the binding rules. Map edges tagged ``legged_only``
    are skipped for non-legged agents.
    """
    locs = list(topo.locations)
    loc_set = set(locs)
    if start not in loc_set:
        raise UnknownLocation(f"start location {start!r} not on the map")
    rules = dict(opsm.bindings)
    if bindings:
        rules.update(bindings)
    op_set = set(opsm.states)
    if opsm.initial not in op_set:
        raise UnknownOpState(f"initial operating state {opsm.initial!r} undefined")
    actions = {t.action for t in opsm.transitions}
    for action, places in rules.items():
        if action not in actions:
            raise UnknownOpState(f"binding for unknown action {action!r}")
        for p in places:
            if p not in loc_set:
                raise UnknownLocation(f"binding for {action!r} names unknown location {p!r}")
    for t in opsm.transitions:
        if t.src not in op_set or t.dst not in op_set:
            raise UnknownOpState(f"transition {t.action!r} uses an undefined operating state")
    for e in topo.edges:
        if e.src not in loc_set or e.dst not in loc_set:
            raise UnknownLocation(f"map edge {e.src}-{e.dst} uses an unknown location")

    names = [ts_state_name(l, o) for l in locs for o in opsm.states]
    labels = [{l, o} for l in locs for o in opsm.states]
    ts = TransitionSystem(names, names.index(ts_state_name(start, opsm.initial)), labels)
    for e in topo.edges:
        if e.capability == "legged_only" and kind != "legged":
            continue
        for o in opsm.states:
            a = ts.index[ts_state_name(e.src, o)]
            b = ts.index[ts_state_name(e.dst, o)]
            ts.add_edge(a, b, f"goto_{e.dst}", e.cost, e.duration)
            ts.add_edge(b, a, f"goto_{e.src}", e.cost, e.duration)
    for t in opsm.transitions:
        places = rules.get(t.action, locs)
        for l in places:
            a = ts.index[ts_state_name(l, t.src)]
            b = ts.index[ts_state_name(l, t.dst)]
            ts.add_edge(a, b, t.action, t.cost, t.duration)
    for s in range(len(ts)):
        ts.add_edge(s, s, STAY, 1.0, 1)
    return ts
