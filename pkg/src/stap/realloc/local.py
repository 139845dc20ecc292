"""Local reallocation for a single agent: state jumps and environment changes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..errors import EmptyCandidates, NoLocalPlan, NoMatch
from ..models.product import PEdge, ProductAutomaton, PState, UpdateInfo
from ..planning.search import dijkstra
from ..planning.team import AgentPlan, plan_from_states


@dataclass
class AgentHistory:
    """Execution record of one agent.

    ``path`` holds the product states traversed since the current plan was
    dispatched, with their ticks. ``init_q`` is the automaton state at which
    the agent's current share of the mission began; ``path[-1][0]`` is the
    state reached so far. ``word`` is the full label word the agent has
    consumed since the start of the mission.
    """

    r: int
    path: list[PState] = field(default_factory=list)
    ticks: list[int] = field(default_factory=list)
    init_q: int | None = None
    word: list[frozenset[str]] = field(default_factory=list)
    ts_trail: list[int] = field(default_factory=list)

    @property
    def final_q(self) -> int | None:
        return self.path[-1][0] if self.path else None

    @property
    def current(self) -> PState | None:
        return self.path[-1] if self.path else None

    def restart(self, start: PState, tick: int, init_q: int | None) -> None:
        self.path = [start]
        self.ticks = [tick]
        self.init_q = init_q

    def append(self, u: PState, tick: int) -> None:
        self.path.append(u)
        self.ticks.append(tick)


def last_matched(plan: AgentPlan, hist: AgentHistory | Sequence[PState]) -> int:
    """Largest ``m`` such that the plan and the history agree on indices ``0..m``."""
    path = hist.path if isinstance(hist, AgentHistory) else list(hist)
    if not plan.states:
        raise NoMatch("plan is empty")
    if not path or path[0] != plan.states[0]:
        raise NoMatch("history does not start at the plan's start state")
    m = 0
    for i in range(1, min(len(path), len(plan.states))):
        if path[i] != plan.states[i]:
            break
        m = i
    return m


def candidate_initials(
    pa: ProductAutomaton,
    plan: AgentPlan,
    m: int,
    s_jump: int,
    letter: frozenset[str] | None = None,
) -> list[PState]:
    """States the agent may be in after jumping to ``s_jump`` from ``Path(m)``.

    ``letter`` is what the agent consumed when it left ``Path(m)``; by
    default the modelled label of that state.
    """
    pa.ts.check(s_jump)
    q, s = plan.states[m]
    succ = sorted(pa.nfa.delta(q, pa.ts.labels[s] if letter is None else letter))
    if not succ:
        raise EmptyCandidates("no automaton successor for the disturbed state")
    return [(q2, s_jump) for q2 in succ]


def _search(pa: ProductAutomaton, start: PState, goal: PState) -> list[PState] | None:
    pa.extend([start])

    def nbrs(u):
        for v in sorted(pa.successors(u)):
            yield v, pa.cost(u, v), None

    found = dijkstra([start], nbrs, lambda u: u == goal)
    return None if found is None else found[1]


def local_realloc_state_change(
    pa: ProductAutomaton,
    plan: AgentPlan,
    hist: AgentHistory | Sequence[PState],
    s_jump: int,
) -> AgentPlan:
    """Replan after the agent unexpectedly landed in TS state ``s_jump``.

    Each candidate state either lies on the remaining plan, in which case
    the plan's suffix is reused, or is connected to the plan's goal by a
    fresh search. The cheapest candidate wins, ties going to the smaller
    state.

    ``hist`` must already end with the state the jump produced; the last
    matched state is looked up in the history before the jump.
    """
    path = hist.path if isinstance(hist, AgentHistory) else list(hist)
    m = last_matched(plan, path[:-1])
    goal = plan.acc
    options: list[tuple[float, PState, AgentPlan]] = []
    index = {u: i for i, u in enumerate(plan.states)}  # last occurrence wins
    letter = hist.word[-1] if isinstance(hist, AgentHistory) and hist.word else None
    for c in candidate_initials(pa, plan, m, s_jump, letter):
        i = index.get(c)
        if i is not None:
            cand = plan.suffix(i)
        else:
            path = _search(pa, c, goal)
            if path is None:
                continue
            cand = plan_from_states(pa, path, plan.entry_q, plan.credited)
        options.append((cand.cost, c, cand))
    if not options:
        raise NoLocalPlan("no candidate state reaches the plan's goal")
    options.sort(key=lambda o: (o[0], o[1]))
    return options[0][2]


def update_pa(pa: ProductAutomaton, info: UpdateInfo) -> tuple[ProductAutomaton, set[PEdge]]:
    """Apply ``info`` to the agent's TS and product; returns the product and R(t)."""
    removed = pa.apply(info)
    return pa, removed


def plan_edges(plan: AgentPlan) -> set[PEdge]:
    return set(zip(plan.states, plan.states[1:]))


def local_realloc_env_change(
    pa: ProductAutomaton,
    plan: AgentPlan,
    hist: AgentHistory | Sequence[PState],
    info: UpdateInfo,
) -> tuple[AgentPlan, set[PEdge]]:
    """Apply an environment update, then keep or repair the remaining plan.

    Returns the plan and the removed edge set R(t).
    """
    m = last_matched(plan, hist)
    here = plan.states[m]
    pa.extend([here])  # the current state must survive pruning
    _, removed = update_pa(pa, info)
    rest = plan.suffix(m)
    if not (removed & plan_edges(rest)):
        return rest, removed
    path = _search(pa, here, plan.acc)
    if path is None:
        raise NoLocalPlan("the goal is unreachable after the environment change")
    return plan_from_states(pa, path, plan.entry_q, plan.credited), removed
