"""Team automaton, offline allocation and projection onto agents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from ..errors import MissionInfeasible
from ..models.decomposition import DecompositionSet
from ..models.product import PState, ProductAutomaton, check_same_nfa
from .search import dijkstra

TState = tuple[int, int, int]  # (agent, nfa state, ts state)

INTRA = "intra"
SWITCH = "switch"
SYNC = "sync"


class TeamAutomaton:
    """Chain of agent product automata joined by switch transitions.

    A switch goes from ``(r, q, s)`` to ``(r + 1, q, entry[r + 1])`` whenever
    ``q`` is a decomposition state; it costs nothing. After synchronization
    the entry TS states are the agents' current states and each agent that
    has already executed something carries its executed label word.

    The search runs over team states extended with a flag telling whether
    the agent has just been entered. From a fresh state ``(r, q, s)`` of an
    agent with an executed word ``w`` the only move is the synchronized
    transition to ``(r, q·w, s)``, where ``q·w`` is the automaton run of
    ``w`` from ``q``. When ``q`` is the state the agent was last entered at,
    this is the transition from ``init`` to the reached state; other entry
    states get the same replay so that already executed letters are never
    dropped from the global word. A path may only end once every agent
    with an executed word has been replayed.
    """

    def __init__(
        self,
        pas: Sequence[ProductAutomaton],
        D: DecompositionSet,
        entries: Sequence[int] | None = None,
        words: dict[int, Sequence[frozenset[str]]] | None = None,
        progress: dict[int, tuple[int, int]] | None = None,
    ):
        self.nfa = check_same_nfa(pas)
        self.pas = list(pas)
        self.D = D
        self.entries = list(entries) if entries is not None else [pa.ts.initial for pa in pas]
        self.words = {r: tuple(w) for r, w in (words or {}).items() if w}
        # (init, reached) per agent, the structural synchronized transitions
        self.xi = {r: v for r, v in (progress or {}).items() if v[0] != v[1]}
        self._replayed: dict[tuple[int, int], int] = {}
        self._last_worded = max(self.words, default=-1)
        for r, pa in enumerate(self.pas):
            if r > 0:
                pa.extend((q, self.entries[r]) for q in sorted(D.members))
        q0 = self.nfa.initial
        self.initial: TState = (0, q0, self.entries[0])
        if (q0, self.entries[0]) not in self.pas[0]:
            self.pas[0].extend([(q0, self.entries[0])])

    def replay(self, r: int, q: int) -> int:
        """Automaton state after agent ``r``'s executed word, started at ``q``."""
        key = (r, q)
        out = self._replayed.get(key)
        if out is None:
            out = self.nfa.run(self.words.get(r, ()), q)
            self._replayed[key] = out
        return out

    @property
    def n_agents(self) -> int:
        return len(self.pas)

    def __len__(self) -> int:
        """Number of team states: the sum of the agent product sizes."""
        return sum(len(pa) for pa in self.pas)

    def states(self) -> Iterator[TState]:
        for r, pa in enumerate(self.pas):
            for q, s in pa.states:
                yield (r, q, s)

    def is_accepting(self, u: TState) -> bool:
        return self.nfa.is_accepting(u[1])

    def switch_edges(self) -> list[tuple[TState, TState]]:
        out = []
        for r in range(self.n_agents - 1):
            target_s = self.entries[r + 1]
            for q, s in sorted(self.pas[r].states):
                if q in self.D:
                    out.append(((r, q, s), (r + 1, q, target_s)))
        return out

    def xi_edges(self) -> list[tuple[TState, TState]]:
        """Synchronized transitions from each agent's last entry state, at every TS state."""
        out = []
        for r, (init, final) in sorted(self.xi.items()):
            for s in range(len(self.pas[r].ts)):
                out.append(((r, init, s), (r, final, s)))
        return out

    def intra_edges(self) -> list[tuple[TState, TState]]:
        return sorted(((r, *u), (r, *v)) for r, pa in enumerate(self.pas) for u, v in pa.edges())

    # -- search --------------------------------------------------------

    def _neighbors(self, x: tuple[int, int, int, int]):
        r, q, s, fresh = x
        pa = self.pas[r]
        if fresh and r in self.words:
            q2 = self.replay(r, q)
            pa.extend([(q2, s)])
            yield (r, q2, s, 0), 0.0, SYNC
            return
        u = (q, s)
        for v in pa.successors(u):
            yield (r, v[0], v[1], 0), pa.cost(u, v), INTRA
        if r + 1 < self.n_agents and q in self.D:
            yield (r + 1, q, self.entries[r + 1], 1), 0.0, SWITCH

    def _is_goal(self, x: tuple[int, int, int, int]) -> bool:
        r, q, _, fresh = x
        if fresh and r in self.words:
            return False
        return r >= self._last_worded and self.nfa.is_accepting(q)

    def plan(self) -> GlobalPath:
        r0, q0, s0 = self.initial
        found = dijkstra([(r0, q0, s0, 1)], self._neighbors, self._is_goal)
        if found is None:
            raise MissionInfeasible("no accepting team state is reachable")
        cost, states, tags = found
        return GlobalPath([x[:3] for x in states], list(tags), cost, self)


def build_team(
    pas: Sequence[ProductAutomaton],
    D: DecompositionSet,
    entries: Sequence[int] | None = None,
    words: dict[int, Sequence[frozenset[str]]] | None = None,
    progress: dict[int, tuple[int, int]] | None = None,
) -> TeamAutomaton:
    return TeamAutomaton(pas, D, entries, words, progress)


@dataclass
class GlobalPath:
    states: list[TState]
    kinds: list[str]
    cost: float
    team: TeamAutomaton | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.kinds) != max(len(self.states) - 1, 0):
            raise ValueError("edge kinds must match path length")

    def __len__(self) -> int:
        return len(self.states)

    def to_json(self) -> dict:
        return {"states": [list(x) for x in self.states], "kinds": list(self.kinds), "cost": self.cost}


@dataclass
class AgentPlan:
    """One agent's share of a global path.

    ``states`` is a path in the agent's product automaton; its last element
    is the goal the agent must reach (the accepting state for the last
    active agent, a decomposition state otherwise). ``entry_q`` is the
    automaton state at which the agent was entered and ``credited`` is the
    state reached through a synchronized transition, if one was taken.
    """

    r: int
    states: list[PState] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    durations: list[int] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    entry_q: int | None = None
    credited: int | None = None

    @property
    def steps(self) -> int:
        return max(len(self.states) - 1, 0)

    def is_empty(self) -> bool:
        return self.steps == 0

    @property
    def acc(self) -> PState | None:
        return self.states[-1] if self.states else None

    @property
    def cost(self) -> float:
        return float(sum(self.costs))

    @property
    def ts_states(self) -> list[int]:
        return [s for _, s in self.states]

    def suffix(self, i: int) -> AgentPlan:
        return AgentPlan(
            self.r,
            self.states[i:],
            self.costs[i:],
            self.durations[i:],
            self.actions[i:],
            self.entry_q,
            self.credited,
        )

    def to_json(self, pa: ProductAutomaton | None = None) -> dict:
        out = {
            "agent": self.r,
            "states": [list(u) for u in self.states],
            "actions": list(self.actions),
            "cost": self.cost,
        }
        if pa is not None:
            out["ts"] = [pa.ts.names[s] for _, s in self.states]
        return out


def plan_from_states(pa: ProductAutomaton, states: Sequence[PState], entry_q=None, credited=None) -> AgentPlan:
    states = list(states)
    pairs = list(zip(states, states[1:]))
    return AgentPlan(
        pa.r,
        states,
        [pa.cost(u, v) for u, v in pairs],
        [pa.duration(u, v) for u, v in pairs],
        [pa.action(u, v) for u, v in pairs],
        entry_q,
        credited,
    )


def plan(team: TeamAutomaton) -> GlobalPath:
    return team.plan()


def project(beta: GlobalPath, pas: Sequence[ProductAutomaton] | None = None) -> list[AgentPlan]:
    """Split a global path at its switch edges, one plan per agent.

    Agents the path never reaches get an empty plan without an entry state.
    """
    if pas is None:
        if beta.team is None:
            raise ValueError("project needs the product automata")
        pas = beta.team.pas
    segments: dict[int, list[PState]] = {}
    entry: dict[int, int] = {}
    credit: dict[int, int] = {}
    for i, (r, q, s) in enumerate(beta.states):
        kind = beta.kinds[i - 1] if i > 0 else None
        if r not in segments:
            segments[r] = [(q, s)]
            entry[r] = q
        elif kind == SYNC:
            credit[r] = q
            segments[r] = [(q, s)]  # the credited state replaces the entry state
        else:
            segments[r].append((q, s))
    plans = []
    for r, pa in enumerate(pas):
        if r in segments:
            plans.append(plan_from_states(pa, segments[r], entry[r], credit.get(r)))
        else:
            plans.append(AgentPlan(r))
    return plans


def path_cost(plans: Sequence[AgentPlan]) -> float:
    return float(sum(p.cost for p in plans))
