"""Randomized disturbance trials."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..errors import TickBudgetExceeded
from .engine import Metrics, Simulation
from .scenario import DisturbanceEvent, Scenario
from .trace import Trace

KINDS = ("fall", "critical_failure", "state_jump", "env_change")
ENV_OPS = ("delete", "add", "relabel")


def _pick_env_change(sc: Scenario, rng: random.Random, ops: tuple[str, ...]) -> dict:
    op = rng.choice(ops)
    kinds = rng.choice([["wheeled"], ["legged"], ["legged", "wheeled"]])
    if op == "delete":
        e = rng.choice(sc.topo.edges)
        return {"delete_edges": [[e.src, e.dst]], "kinds": kinds}
    if op == "add":
        x, y = rng.sample(sc.topo.locations, 2) if len(sc.topo.locations) > 1 else (sc.topo.locations[0],) * 2
        return {"add_edges": [[x, y]], "kinds": kinds}
    loc = rng.choice(sc.topo.locations)
    ops_here = sorted({s for a in sc.agents for s in sc.opsms[a.opsm].states})
    op_state = rng.choice(ops_here)
    # a relabel either hides the location name or shows a different operating state
    label = [op_state] if rng.random() < 0.5 else sorted({loc, rng.choice(ops_here)})
    return {"relabel": [{"location": loc, "opstate": op_state, "label": label}], "kinds": kinds}


def random_disturbances(
    sc: Scenario,
    rng: random.Random,
    count: int,
    horizon: int,
    kinds: tuple[str, ...] = KINDS,
    env_ops: tuple[str, ...] = ENV_OPS,
    jump_location: bool = True,
) -> list[DisturbanceEvent]:
    """Draw ``count`` events uniformly over eligible (kind, agent, tick) triples."""
    triples = []
    for kind in kinds:
        for a in sc.agents:
            if kind == "fall" and a.kind != "legged":
                continue
            triples.append((kind, a.name))
    if not triples:
        return []
    events = []
    for _ in range(count):
        kind, agent = rng.choice(triples)
        tick = rng.randrange(max(1, horizon))
        if kind == "state_jump":
            spec = sc.agents[sc.agent_index(agent)]
            to = {"opstate": rng.choice(sc.opsms[spec.opsm].states)}
            if jump_location:
                to["location"] = rng.choice(sc.topo.locations)
            events.append(DisturbanceEvent(kind, agent, tick=tick, to=to))
        elif kind == "env_change":
            upd = _pick_env_change(sc, rng, env_ops)
            events.append(DisturbanceEvent(kind, None, tick=tick, update=upd, delivery=rng.choice(["on_encounter", "immediate"])))
        else:
            events.append(DisturbanceEvent(kind, agent, tick=tick))
    events.sort(key=lambda e: e.tick)
    return events


@dataclass
class TrialResult:
    index: int
    events: list[DisturbanceEvent]
    metrics: Metrics
    trace: Trace
    budget_exceeded: bool = False

    @property
    def verdict(self) -> str:
        return "TickBudgetExceeded" if self.budget_exceeded else self.metrics.verdict


def calm_horizon(sc: Scenario) -> int:
    """Makespan of the undisturbed run, used to place random events."""
    _, m = Simulation(replace(sc, disturbances=[]), log_ticks="none").run()
    return max(1, m.makespan)


def run_trials(
    sc: Scenario,
    trials: int,
    seed: int | None = None,
    per_trial: int = 1,
    kinds: tuple[str, ...] = KINDS,
    env_ops: tuple[str, ...] = ENV_OPS,
    horizon: int | None = None,
    jump_location: bool = True,
    tick_budget: int | None = None,
) -> list[TrialResult]:
    """Run ``trials`` copies of ``sc`` with freshly drawn disturbances."""
    rng = random.Random(sc.seed if seed is None else seed)
    horizon = calm_horizon(sc) if horizon is None else horizon
    budget = tick_budget if tick_budget is not None else max(50 * horizon, 10_000)
    out = []
    for i in range(trials):
        events = random_disturbances(sc, rng, per_trial, horizon, kinds, env_ops, jump_location)
        trial = replace(sc, disturbances=events, tick_budget=budget, name=f"{sc.name}#{i}")
        sim = Simulation(trial, log_ticks="none")
        try:
            trace, metrics = sim.run()
            out.append(TrialResult(i, events, metrics, trace))
        except TickBudgetExceeded:
            out.append(TrialResult(i, events, sim.metrics, sim.trace, budget_exceeded=True))
    return out

