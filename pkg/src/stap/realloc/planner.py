"""Single planning authority: owns the models, serves reallocation requests."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import EmptyCandidates, MissionInfeasible, NoLocalPlan
from ..ltl.nfa import Nfa
from ..models.decomposition import DecompositionSet
from ..models.product import ProductAutomaton, PState, UpdateInfo
from ..planning.team import AgentPlan, GlobalPath, build_team, project
from .local import AgentHistory, local_realloc_env_change, local_realloc_state_change
from .sync import global_realloc, mark_agent_failed, synchronize


@dataclass
class LocalReallocRequest:
    agent: int
    kind: str  # "state_change" or "env_change"
    payload: dict

    def to_json(self) -> dict:
        return {"type": "LocalReallocRequest", "agent": self.agent, "kind": self.kind, "payload": self.payload}


@dataclass
class GlobalReallocRequest:
    agent: int

    def to_json(self) -> dict:
        return {"type": "GlobalReallocRequest", "agent": self.agent}


@dataclass
class PlanDispatch:
    agent: int
    plan: list[str]
    revision: int

    def to_json(self) -> dict:
        return {"type": "PlanDispatch", "agent": self.agent, "plan": self.plan, "revision": self.revision}


@dataclass
class Timings:
    offline: float = 0.0
    local: list[float] = field(default_factory=list)
    global_: list[float] = field(default_factory=list)


class Planner:
    """Serialized entry point for all planning.

    Executors never touch the models directly: they report transitions,
    and they send requests which return new plans. Every request and every
    dispatch is appended to ``messages`` for the trace. Wall-clock timings
    are kept apart so that the message log stays deterministic.
    """

    def __init__(
        self,
        nfa: Nfa,
        D: DecompositionSet,
        pas: Sequence[ProductAutomaton],
        clock: Callable[[], float] = time.perf_counter,
    ):
        self.nfa = nfa
        self.D = D
        self.pas = list(pas)
        self.clock = clock
        self.plans: list[AgentPlan] = [AgentPlan(r) for r in range(len(pas))]
        self.histories = [AgentHistory(r) for r in range(len(pas))]
        for pa, h in zip(self.pas, self.histories):
            h.path = [(nfa.initial, pa.ts.initial)]
            h.ticks = [0]
            h.ts_trail = [pa.ts.initial]
        self.failed: set[int] = set()
        self.messages: list[dict] = []
        self.timings = Timings()
        self.calls = {"local": 0, "global": 0}
        self.beta: GlobalPath | None = None

    @property
    def n(self) -> int:
        return len(self.pas)

    # -- execution reports ---------------------------------------------

    def record_step(self, r: int, s_to: int, tick: int, label: frozenset[str] | None = None) -> PState:
        """Agent ``r`` completed a TS transition into ``s_to``; returns its new product state.

        ``label`` is the label the agent observed at the source state. It
        defaults to the modelled one and differs from it only while a
        relabelling has not yet reached the planner.
        """
        h = self.histories[r]
        q, s = h.current
        if label is None:
            label = self.pas[r].ts.labels[s]
        h.word.append(label)
        h.ts_trail.append(s_to)
        u = (self.nfa.step(q, label), s_to)
        h.append(u, tick)
        return u

    # -- offline -------------------------------------------------------

    def offline(self, tick: int = 0) -> list[AgentPlan]:
        t0 = self.clock()
        team = build_team(self.pas, self.D)
        beta = team.plan()
        plans = project(beta)
        self.timings.offline = self.clock() - t0
        self.beta = beta
        self._dispatch_all(plans, tick)
        return plans

    def _dispatch(self, r: int, plan: AgentPlan, tick: int, init_q: int | None) -> None:
        self.plans[r] = plan
        h = self.histories[r]
        start = plan.states[0] if plan.states else (h.current if h.current is not None else None)
        if plan.states:
            self.pas[r].extend([plan.states[0]])
        h.restart(start, tick, init_q)
        names = self.pas[r].ts.names
        self.messages.append(
            PlanDispatch(r, [names[s] for _, s in plan.states], self.pas[r].revision).to_json()
        )

    def _dispatch_all(self, plans: list[AgentPlan], tick: int) -> None:
        for r, p in enumerate(plans):
            self._dispatch(r, p, tick, p.entry_q)

    # -- requests ------------------------------------------------------

    def request_state_change(self, r: int, s_jump: int, tick: int) -> AgentPlan:
        """Local repair after a state jump. The jump itself must already be recorded in the history."""
        pa = self.pas[r]
        self.messages.append(
            LocalReallocRequest(r, "state_change", {"state": pa.ts.names[s_jump]}).to_json()
        )
        self.calls["local"] += 1
        t0 = self.clock()
        try:
            plan = local_realloc_state_change(pa, self.plans[r], self.histories[r], s_jump)
        finally:
            self.timings.local.append(self.clock() - t0)
        self._dispatch(r, plan, tick, self.histories[r].init_q)
        return plan

    def request_env_change(self, r: int, info: UpdateInfo, tick: int) -> AgentPlan:
        """Local repair after a map change, on agent ``r``'s own product."""
        pa = self.pas[r]
        self.messages.append(LocalReallocRequest(r, "env_change", info.to_json(pa.ts)).to_json())
        self.calls["local"] += 1
        t0 = self.clock()
        try:
            plan, _ = local_realloc_env_change(pa, self.plans[r], self.histories[r], info)
        finally:
            self.timings.local.append(self.clock() - t0)
        if plan is not self.plans[r]:
            self._dispatch(r, plan, tick, self.histories[r].init_q)
        return plan

    def apply_env_change(self, r: int, info: UpdateInfo) -> None:
        """Update an agent's model without replanning (the change is off its route)."""
        h = self.histories[r]
        if h.current is not None:
            self.pas[r].extend([h.current])
        self.pas[r].apply(info)

    def request_global(self, r: int, tick: int) -> list[AgentPlan]:
        self.messages.append(GlobalReallocRequest(r).to_json())
        self.calls["global"] += 1
        t0 = self.clock()
        try:
            team = synchronize(self.pas, self.D, self.histories)
            beta, plans = global_realloc(team)
        finally:
            self.timings.global_.append(self.clock() - t0)
        self.beta = beta
        # a credited agent was entered at its old entry state, so in every
        # case the new entry state is where its share of the mission begins
        self._dispatch_all(plans, tick)
        return plans

    def fail_agent(self, r: int) -> None:
        self.failed.add(r)
        mark_agent_failed(self.pas[r])


__all__ = [
    "EmptyCandidates",
    "GlobalReallocRequest",
    "LocalReallocRequest",
    "MissionInfeasible",
    "NoLocalPlan",
    "PlanDispatch",
    "Planner",
    "Timings",
]
