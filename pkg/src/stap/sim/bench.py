"""Planning-time scaling with team size."""

from __future__ import annotations

import gc
import time
from dataclasses import replace
from statistics import linear_regression, median
from typing import Callable, Sequence

from ..errors import NoLocalPlan
from ..ltl.nfa import build_nfa
from ..ltl.parser import parse
from ..models.decomposition import decomposition_set
from ..models.product import letters_of, product, start_letters_of
from ..models.ts import compose_ts, ts_state_name
from ..planning.team import build_team, project
from ..realloc.local import local_realloc_state_change
from ..realloc.planner import Planner
from ..realloc.sync import global_realloc, synchronize
from .scenario import AgentSpec, Scenario

DEFAULT_SIZES = (3, 9, 15, 30)


def replicate(sc: Scenario, n: int) -> Scenario:
    """Team of ``n`` agents cycling through the scenario's agents; no disturbances."""
    base = sc.agents
    agents = [
        AgentSpec(f"{base[i % len(base)].name}_{i // len(base)}", base[i % len(base)].kind, base[i % len(base)].start,
                  base[i % len(base)].opsm, list(base[i % len(base)].capabilities))
        for i in range(n)
    ]
    return replace(sc, agents=agents, disturbances=[], name=f"{sc.name}x{n}")


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> dict:
    slope, intercept = linear_regression(xs, ys)
    mean = sum(ys) / len(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"slope": slope, "intercept": intercept, "r2": r2}


def _local_probe(planner: Planner, reps: int, clock) -> float | None:
    """Time the local repair of an operating-state jump one step into some agent's plan."""
    for r, plan in enumerate(planner.plans):
        if plan.steps < 2:
            continue
        ts = planner.pas[r].ts
        planner.record_step(r, plan.states[1][1], 0)
        s = plan.states[1][1]
        for op in sorted({ts.opstate(x) for x in range(len(ts))}):
            if op == ts.opstate(s):
                continue
            s_jump = ts.index[ts_state_name(ts.location(s), op)]
            planner.record_step(r, s_jump, 0)
            hist = planner.histories[r]
            try:
                t, _ = _timed(lambda: local_realloc_state_change(planner.pas[r], plan, hist, s_jump), reps, clock, best=True)
            except NoLocalPlan:
                hist.path.pop()
                hist.word.pop()
                continue
            return t
        return None
    return None


def _global_probe(planner: Planner, reps: int, clock) -> float | None:
    busy = [r for r, p in enumerate(planner.plans) if p.steps]
    if not busy:
        return None
    planner.fail_agent(busy[-1])
    t, _ = _timed(lambda: global_realloc(synchronize(planner.pas, planner.D, planner.histories)), reps, clock)
    return t


def _timed(fn, reps: int, clock, best: bool = False) -> tuple[float, object]:
    """Median (or, for microsecond-scale calls, minimum) time over ``reps`` calls."""
    times, out = [], None
    gc_was_on = gc.isenabled()
    gc.disable()
    try:
        for _ in range(reps):
            t0 = clock()
            out = fn()
            times.append(clock() - t0)
    finally:
        if gc_was_on:
            gc.enable()
    return (min(times) if best else median(times)), out


def bench_one(sc: Scenario, n: int, reps: int = 5, clock: Callable[[], float] = time.perf_counter) -> dict:
    """Planning times for ``n`` replicated agents.

    ``translation_s`` (automaton and decomposition set) does not depend on
    the team and is reported apart; ``offline_s`` covers product
    construction and the team search. Each figure is a median over
    ``reps`` repetitions.
    """
    team_sc = replicate(sc, n)
    tss = [compose_ts(team_sc.topo, team_sc.opsms[a.opsm], a.start, a.kind) for a in team_sc.agents]
    t0 = clock()
    nfa = build_nfa(parse(team_sc.formula), letters_of(tss))
    D = decomposition_set(nfa, start_letters_of(tss))
    translation = clock() - t0

    def allocate():
        pas = [product(nfa, ts.copy(), r) for r, ts in enumerate(tss)]
        team = build_team(pas, D)
        return pas, team, project(team.plan())

    offline, (pas, team, plans) = _timed(allocate, reps, clock)
    planner = Planner(nfa, D, pas, clock)
    planner.offline(0)
    return {
        "n": n,
        "team_states": len(team),
        "translation_s": translation,
        "offline_s": offline,
        "local_s": _local_probe(planner, 10 * reps, clock),
        "global_s": _global_probe(planner, max(1, reps // 2), clock),
    }


def run_bench(sc: Scenario, sizes: Sequence[int] = DEFAULT_SIZES, reps: int = 5) -> tuple[list[dict], dict]:
    rows = [bench_one(sc, n, reps) for n in sizes]
    fit = linear_fit([r["n"] for r in rows], [r["offline_s"] for r in rows])
    return rows, fit
