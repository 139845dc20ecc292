"""Tick-driven multi-agent simulation with disturbance injection."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from ..bt.agent_tree import LEGGED, Blackboard, ExecutionEnv, build_agent_tree
from ..bt.nodes import Node
from ..errors import MissionInfeasible, TickBudgetExceeded
from ..ltl.nfa import build_nfa
from ..ltl.parser import parse
from ..models.decomposition import decomposition_set
from ..models.product import UpdateInfo, letters_of, product, start_letters_of
from ..models.ts import TransitionSystem, compose_ts, ts_state_name
from ..planning.team import AgentPlan
from ..realloc.planner import Planner
from .scenario import DisturbanceEvent, Scenario
from .trace import Trace, check_words, completion_order, agent_words

STRATEGIES = ("R1", "R2", "R3", "R4")


@dataclass
class Metrics:
    counts: dict[str, int] = field(default_factory=lambda: {k: 0 for k in STRATEGIES})
    local_times: list[float] = field(default_factory=list)
    global_times: list[float] = field(default_factory=list)
    offline_time: float = 0.0
    pa_time: float = 0.0
    success: bool = False
    verdict: str = ""
    makespan: int = 0
    local_calls: int = 0
    global_calls: int = 0
    outcomes: list[dict] = field(default_factory=list)

    def strategy_times(self, strategy: str) -> list[float]:
        """Planner wall time spent per trigger of ``strategy`` (local plus any escalation)."""
        return [o.get("local_time", 0.0) + o.get("global_time", 0.0) for o in self.outcomes if o["strategy"] == strategy]

    @property
    def mean_local(self) -> float | None:
        return sum(self.local_times) / len(self.local_times) if self.local_times else None

    @property
    def mean_global(self) -> float | None:
        return sum(self.global_times) / len(self.global_times) if self.global_times else None

    def to_json(self) -> dict:
        return {
            "counts": dict(self.counts),
            "local_times": list(self.local_times),
            "global_times": list(self.global_times),
            "mean_local": self.mean_local,
            "mean_global": self.mean_global,
            "offline_time": self.offline_time,
            "pa_time": self.pa_time,
            "success": self.success,
            "verdict": self.verdict,
            "makespan": self.makespan,
            "local_calls": self.local_calls,
            "global_calls": self.global_calls,
            "outcomes": [dict(o) for o in self.outcomes],
        }

    @classmethod
    def from_json(cls, d: dict) -> Metrics:
        m = cls()
        m.counts = {k: int(d.get("counts", {}).get(k, 0)) for k in STRATEGIES}
        m.local_times = list(d.get("local_times", []))
        m.global_times = list(d.get("global_times", []))
        m.offline_time = float(d.get("offline_time", 0.0))
        m.pa_time = float(d.get("pa_time", 0.0))
        m.success = bool(d.get("success", False))
        m.verdict = d.get("verdict", "")
        m.makespan = int(d.get("makespan", 0))
        m.local_calls = int(d.get("local_calls", 0))
        m.global_calls = int(d.get("global_calls", 0))
        m.outcomes = [dict(o) for o in d.get("outcomes", [])]
        return m


def _names(ts: TransitionSystem, states) -> list[str]:
    return [ts.names[s] for s in states]


class Simulation(ExecutionEnv):
    """One run of a scenario.

    Every agent keeps two transition systems: the true world, which
    disturbances change immediately, and the planner's belief, which only
    changes when the agent reports. Each tick first fires due disturbances,
    then ticks the agents' trees in index order.
    """

    def __init__(
        self,
        scenario: Scenario,
        log_ticks: str = "changes",
        clock: Callable[[], float] = time.perf_counter,
    ):
        if log_ticks not in ("changes", "all", "none"):
            raise ValueError("log_ticks must be 'changes', 'all' or 'none'")
        self.sc = scenario
        self.log_ticks = log_ticks
        self.clock = clock
        self.trace = Trace()
        self.metrics = Metrics()
        self.tick = 0
        self.finished = False
        self._acting: int | None = None

        t0 = clock()
        self.world: list[TransitionSystem] = [
            compose_ts(scenario.topo, scenario.opsms[a.opsm], a.start, a.kind) for a in scenario.agents
        ]
        belief = [ts.copy() for ts in self.world]
        self.phi = parse(scenario.formula)
        letters = letters_of(self.world) | self._event_letters()
        self.nfa = build_nfa(self.phi, letters)
        self.D = decomposition_set(self.nfa, start_letters_of(self.world))
        t1 = clock()
        pas = [product(self.nfa, ts, r) for r, ts in enumerate(belief)]
        self.planner = Planner(self.nfa, self.D, pas, clock)
        self._prep_time = t1 - t0
        self._pa_time = clock() - t1

        self.pos = [ts.initial for ts in self.world]
        self.bbs = [
            Blackboard(
                r,
                a.kind,
                self.planner,
                self,
                r1_ticks=max(1, int(round(scenario.recovery_seconds * scenario.tick_rate))),
            )
            for r, a in enumerate(scenario.agents)
        ]
        self.trees: list[Node] = [build_agent_tree(a.kind) for a in scenario.agents]
        self.pending: list[UpdateInfo] = [UpdateInfo() for _ in scenario.agents]
        self.fired: set[int] = set()
        self.queued: list[int] = []
        self._bt_last: list[tuple | None] = [None] * len(scenario.agents)
        self._msg_cursor = 0

    # -- setup helpers ---------------------------------------------------

    def _event_letters(self) -> set[frozenset[str]]:
        out: set[frozenset[str]] = set()
        for ev in self.sc.disturbances:
            for rl in ev.update.get("relabel", []):
                out.add(frozenset(rl["label"]))
            for info in (ev.infos or {}).values():
                out.update(info.relabel.values())
        return out

    def agent_name(self, r: int) -> str:
        return self.sc.agents[r].name

    # -- run ---------------------------------------------------------------

    def run(self) -> tuple[Trace, Metrics]:
        sc = self.sc
        self.trace.append(
            0,
            "start",
            {
                "scenario": sc.name,
                "formula": sc.formula,
                "seed": sc.seed,
                "agents": [a.name for a in sc.agents],
                "nfa_states": len(self.nfa),
                "decomposition": len(self.D),
            },
        )
        t0 = self.clock()
        try:
            plans = self.planner.offline(0)
        except MissionInfeasible as exc:
            self.metrics.offline_time = self._prep_time + self._pa_time + (self.clock() - t0)
            self._finish(0, False, "MissionInfeasible", str(exc))
            return self.trace, self.metrics
        self.metrics.offline_time = self._prep_time + self._pa_time + (self.clock() - t0)
        self.metrics.pa_time = self._pa_time
        self.trace.append(0, "offline_plan", {"cost": self.planner.beta.cost})
        for r, p in enumerate(plans):
            self.bbs[r].load(p)
        self._flush_messages(0)

        for tick in range(sc.tick_budget):
            self.tick = tick
            self._fire_events(tick)
            for r in range(len(self.bbs)):
                bb = self.bbs[r]
                if bb.terminated:
                    continue
                bb.tick = tick
                log: list | None = [] if self.log_ticks != "none" else None
                self._acting = r
                status = self.trees[r].tick(bb, log)
                self._acting = None
                self._flush_messages(tick)
                self._log_bt(r, tick, status, log)
                if self.finished:
                    return self.trace, self.metrics
            if self._all_done():
                self._complete(tick)
                return self.trace, self.metrics
        self._finish(sc.tick_budget, False, "TickBudgetExceeded", "tick budget exhausted")
        raise TickBudgetExceeded(f"mission not finished within {sc.tick_budget} ticks")

    def _all_done(self) -> bool:
        for bb in self.bbs:
            if bb.terminated:
                continue
            if not bb.queue_empty() or bb.recovery_left > 0:
                return False
            if bb.loss_of_balance or bb.critical_failure or bb.state_change is not None or bb.env_change is not None:
                return False
        return True

    def _complete(self, tick: int) -> None:
        words = agent_words(self.trace)
        ok = check_words(self.phi, words, completion_order(self.trace))
        self._finish(tick + 1, ok, "success" if ok else "verification_failed", "")

    def _finish(self, tick: int, success: bool, verdict: str, detail: str) -> None:
        self._flush_messages(tick)
        m = self.metrics
        m.success = success
        m.verdict = verdict
        m.makespan = tick
        for bb in self.bbs:
            for k, v in bb.counts.items():
                m.counts[k] += v
        m.outcomes = sorted((o for bb in self.bbs for o in bb.outcomes), key=lambda o: (o["tick"], o["agent"]))
        m.local_times = list(self.planner.timings.local)
        m.global_times = list(self.planner.timings.global_)
        m.local_calls = self.planner.calls["local"]
        m.global_calls = self.planner.calls["global"]
        self.trace.append(
            tick,
            "verdict",
            {"success": success, "verdict": verdict, "detail": detail, "counts": dict(m.counts), "makespan": tick},
        )
        self.finished = True

    # -- logging -------------------------------------------------------

    def _flush_messages(self, tick: int) -> None:
        msgs = self.planner.messages
        while self._msg_cursor < len(msgs):
            msg = msgs[self._msg_cursor]
            self.trace.append(tick, "planner", msg, msg.get("agent"))
            self._msg_cursor += 1

    def _log_bt(self, r: int, tick: int, status, log) -> None:
        if log is None:
            return
        summary = tuple(log)
        if self.log_ticks == "changes" and summary == self._bt_last[r]:
            return
        self._bt_last[r] = summary
        self.trace.append(tick, "bt", {"status": status.value, "nodes": [list(x) for x in log]}, r)

    # -- disturbances ----------------------------------------------------

    def _fire_events(self, tick: int) -> None:
        due = [i for i in self.queued]
        self.queued = []
        for i, ev in enumerate(self.sc.disturbances):
            if i not in self.fired and ev.tick is not None and ev.tick == tick:
                due.append(i)
        for i in sorted(set(due)):
            if i in self.fired:
                continue
            self.fired.add(i)
            self._inject(self.sc.disturbances[i], tick)

    def _inject(self, ev: DisturbanceEvent, tick: int) -> None:
        r = self.sc.agent_index(ev.agent) if ev.agent is not None else None
        if r is not None and self.bbs[r].terminated:
            self.trace.append(tick, "disturbance", {**ev.to_json(), "applied": False}, r)
            return
        applied = True
        if ev.kind == "fall":
            if self.sc.agents[r].kind == LEGGED:
                self.bbs[r].loss_of_balance = True
            else:
                applied = False
        elif ev.kind == "critical_failure":
            self.bbs[r].critical_failure = True
        elif ev.kind == "state_jump":
            ts = self.world[r]
            cur = self.pos[r]
            loc = ev.to.get("location", ts.location(cur))
            op = ev.to.get("opstate", ts.opstate(cur))
            target = ts.state(ts_state_name(loc, op))
            self._jump(r, target, tick)
        elif ev.kind == "env_change":
            self._env_change(ev, tick)
        self.trace.append(tick, "disturbance", {**ev.to_json(), "applied": applied}, r)

    def _jump(self, r: int, target: int, tick: int) -> None:
        ts = self.world[r]
        src = self.pos[r]
        self.trees[r].halt()
        self.trace.append(
            tick, "step", {"from": ts.names[src], "to": ts.names[target], "label": sorted(ts.labels[src]), "jump": True}, r
        )
        self.planner.record_step(r, target, tick, ts.labels[src])
        self.pos[r] = target
        self.bbs[r].state_change = target

    def _infos_for(self, ev: DisturbanceEvent) -> dict[int, UpdateInfo]:
        if ev.infos is not None:
            return {self.sc.agent_index(a): info for a, info in ev.infos.items()}
        upd = ev.update
        kinds = set(upd.get("kinds", ["legged", "wheeled"]))
        out = {}
        for r, a in enumerate(self.sc.agents):
            if a.kind not in kinds:
                continue
            if ev.agent is not None and a.name != ev.agent:
                continue
            ts = self.world[r]
            at: dict[str, list[int]] = {}
            for s in range(len(ts)):
                at.setdefault(ts.location(s), []).append(s)
            delete, add, relabel = set(), set(), {}
            for x, y in upd.get("delete_edges", []):
                for s in at.get(x, []):
                    for t in at.get(y, []):
                        if ts.has_edge(s, t):
                            delete.add((s, t))
                        if ts.has_edge(t, s):
                            delete.add((t, s))
            for x, y in upd.get("add_edges", []):
                for s in at.get(x, []):
                    t = ts.index.get(ts_state_name(y, ts.opstate(s)))
                    if t is not None and not ts.has_edge(s, t):
                        add.add((s, t))
                    if t is not None and not ts.has_edge(t, s):
                        add.add((t, s))
            for rl in upd.get("relabel", []):
                for s in at.get(rl["location"], []):
                    if "opstate" in rl and ts.opstate(s) != rl["opstate"]:
                        continue
                    relabel[s] = frozenset(rl["label"])
            if delete or add or relabel:
                out[r] = UpdateInfo(add=add, delete=delete, relabel=relabel, time=self.tick)
        return out

    def _env_change(self, ev: DisturbanceEvent, tick: int) -> None:
        for r, info in sorted(self._infos_for(ev).items()):
            w = self.world[r]
            for s, t in info.delete:
                w.remove_edge(s, t)
            for s, t in info.add:
                action, cost, dur = info.add_attrs.get((s, t), ("move", 1.0, 1))
                w.add_edge(s, t, action, cost, dur)
            for s, label in info.relabel.items():
                w.relabel(s, label)
            if self.bbs[r].terminated:
                continue
            if ev.delivery == "immediate":
                self._deliver(r, info)
            else:
                # deletions are discovered when the agent tries the edge;
                # additions and relabels cannot be stumbled upon, so they are reported now
                self.pending[r] = _merge(self.pending[r], UpdateInfo(delete=info.delete))
                rest = UpdateInfo(add=info.add, relabel=info.relabel, time=info.time, add_attrs=info.add_attrs)
                if not rest.is_empty():
                    self._deliver(r, rest)

    def _deliver(self, r: int, info: UpdateInfo) -> None:
        bb = self.bbs[r]
        bb.env_change = info if bb.env_change is None else _merge(bb.env_change, info)

    # -- ExecutionEnv hooks ----------------------------------------------

    def edge_available(self, r: int, s: int, t: int) -> bool:
        return self.world[r].has_edge(s, t)

    def encounter(self, r: int, s: int, t: int) -> UpdateInfo:
        info = self.pending[r]
        self.pending[r] = UpdateInfo()
        if (s, t) not in info.delete:
            info = _merge(info, UpdateInfo(delete={(s, t)}))
        info.time = self.tick
        self.trace.append(self.tick, "encounter", {"from": self.world[r].names[s], "to": self.world[r].names[t]}, r)
        return info

    def complete_step(self, r: int, t: int, tick: int) -> None:
        ts = self.world[r]
        s = self.pos[r]
        self.trace.append(tick, "step", {"from": ts.names[s], "to": ts.names[t], "label": sorted(ts.labels[s])}, r)
        self.planner.record_step(r, t, tick, ts.labels[s])
        self.pos[r] = t
        loc = ts.location(t)
        if loc != ts.location(s):
            for i, ev in enumerate(self.sc.disturbances):
                if i in self.fired or ev.enter != loc or ev.agent != self.agent_name(r):
                    continue
                self.queued.append(i)

    def on_global_plans(self, plans: list[AgentPlan], tick: int) -> None:
        for r, p in enumerate(plans):
            if r != self._acting:
                self.trees[r].halt()
            self.bbs[r].load(p)
            self.trace.append(tick, "dispatch", {"kind": "global", "plan": _names(self.world[r], p.ts_states)}, r)

    def on_local_plan(self, r: int, plan: AgentPlan, tick: int) -> None:
        self.trace.append(tick, "dispatch", {"kind": "local", "plan": _names(self.world[r], plan.ts_states)}, r)

    def mission_failed(self, r: int, reason: str, tick: int) -> None:
        self._finish(tick, False, "MissionInfeasible", reason)


def _merge(a: UpdateInfo, b: UpdateInfo) -> UpdateInfo:
    add = (a.add | b.add) - b.delete
    delete = (a.delete | b.delete) - b.add
    relabel = {**a.relabel, **b.relabel}
    return UpdateInfo(add=add, delete=delete, relabel=relabel, time=max(a.time, b.time), add_attrs={**a.add_attrs, **b.add_attrs})


def run(scenario: Scenario, **kwargs) -> tuple[Trace, Metrics]:
    return Simulation(scenario, **kwargs).run()
