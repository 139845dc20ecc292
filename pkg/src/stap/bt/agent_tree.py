"""Per-agent behavior tree: plan execution, disturbance monitoring, recovery."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from ..errors import EmptyCandidates, MissionInfeasible, NoLocalPlan, NoMatch
from ..models.product import UpdateInfo
from ..planning.team import AgentPlan
from .nodes import (
    FAILURE,
    RUNNING,
    SUCCESS,
    Action,
    Condition,
    Fallback,
    ForceFailure,
    Node,
    ReactiveSequence,
    Repeat,
    Sequence,
    Status,
)

LEGGED = "legged"
WHEELED = "wheeled"

# flag name -> strategy, in the order flags are consumed when several are set
SEVERITY = ("critical_failure", "loss_of_balance", "state_change", "env_change")
STRATEGY = {
    "critical_failure": "R2",
    "loss_of_balance": "R1",
    "state_change": "R3",
    "env_change": "R4",
}
DEFAULT_R1_TICKS = 30  # three seconds at ten ticks per second


class ExecutionEnv:
    """Hooks the tree uses to act on the world. The simulator overrides them."""

    def edge_available(self, r: int, s: int, t: int) -> bool:
        return True

    def encounter(self, r: int, s: int, t: int) -> UpdateInfo:
        return UpdateInfo(delete={(s, t)})

    def complete_step(self, r: int, t: int, tick: int) -> None:
        pass

    def on_global_plans(self, plans: list[AgentPlan], tick: int) -> None:
        pass

    def on_local_plan(self, r: int, plan: AgentPlan, tick: int) -> None:
        pass

    def mission_failed(self, r: int, reason: str, tick: int) -> None:
        pass


@dataclass
class Blackboard:
    r: int
    kind: str = WHEELED
    planner: Any = None
    env: ExecutionEnv = field(default_factory=ExecutionEnv)
    plan: AgentPlan | None = None
    cursor: int = 0
    tick: int = 0
    loss_of_balance: bool = False
    critical_failure: bool = False
    state_change: int | None = None
    env_change: UpdateInfo | None = None
    elapsed: int = 0
    recovery_left: int = 0
    r1_ticks: int = DEFAULT_R1_TICKS
    counts: Counter = field(default_factory=Counter)
    outcomes: list[dict] = field(default_factory=list)
    terminated: bool = False
    infeasible: bool = False
    precondition_checks: int = 0

    def load(self, plan: AgentPlan) -> None:
        self.plan = plan
        self.cursor = 0
        self.elapsed = 0

    def queue_empty(self) -> bool:
        return self.plan is None or self.cursor >= self.plan.steps

    def flag(self, name: str) -> bool:
        value = getattr(self, name)
        return value is not None and value is not False

    def clear(self, name: str) -> None:
        setattr(self, name, False if name in ("critical_failure", "loss_of_balance") else None)

    def current_step(self) -> tuple[int, int]:
        p = self.plan
        return p.states[self.cursor][1], p.states[self.cursor + 1][1]


# -- leaves ------------------------------------------------------------


def _precondition(bb: Blackboard) -> bool:
    """Checked once per fetched action: is the next transition still possible?"""
    bb.precondition_checks += 1
    if bb.queue_empty():
        return False
    s, t = bb.current_step()
    if not bb.env.edge_available(bb.r, s, t):
        bb.env_change = bb.env.encounter(bb.r, s, t)
        return False
    return True


def _execute(bb: Blackboard) -> Status:
    if bb.queue_empty():
        return FAILURE
    bb.elapsed += 1
    duration = bb.plan.durations[bb.cursor]
    if bb.elapsed < duration:
        return RUNNING
    bb.elapsed = 0
    _, t = bb.current_step()
    bb.env.complete_step(bb.r, t, bb.tick)
    return SUCCESS


def _halt_execute(bb: Blackboard) -> None:
    bb.elapsed = 0  # an interrupted move restarts from its source state


def _advance(bb: Blackboard) -> Status:
    bb.cursor += 1
    return SUCCESS


# -- strategies --------------------------------------------------------


def _global(bb: Blackboard, outcome: dict) -> None:
    try:
        plans = bb.planner.request_global(bb.r, bb.tick)
    except MissionInfeasible as exc:
        bb.infeasible = True
        outcome["result"] = "infeasible"
        bb.env.mission_failed(bb.r, str(exc), bb.tick)
        return
    outcome["result"] = "global" if outcome.get("result") is None else outcome["result"] + "+global"
    bb.env.on_global_plans(plans, bb.tick)


def dispatch_strategy(bb: Blackboard) -> dict:
    """Run the recovery strategy for the most severe pending disturbance.

    Returns a record ``{"strategy", "result", ...}``; ``strategy`` is None if
    no applicable flag is set. The consumed flag is cleared here. A
    terminated agent drops whatever flags remain.
    """
    if bb.terminated:
        for name in SEVERITY:
            bb.clear(name)
        return {"strategy": None, "agent": bb.r, "tick": bb.tick, "result": None}
    for name in SEVERITY:
        if not bb.flag(name):
            continue
        if name == "loss_of_balance" and bb.kind != LEGGED:
            bb.clear(name)  # wheeled robots have no locomotion monitor
            continue
        strategy = STRATEGY[name]
        bb.counts[strategy] += 1
        outcome: dict = {"strategy": strategy, "agent": bb.r, "tick": bb.tick, "result": None}
        timings = getattr(bb.planner, "timings", None)
        marks = (len(timings.local), len(timings.global_)) if timings is not None else None
        if strategy == "R1":
            bb.recovery_left = bb.r1_ticks
            outcome["result"] = "recovery_stand"
        elif strategy == "R2":
            bb.planner.fail_agent(bb.r)
            bb.terminated = True
            bb.clear(name)
            _global(bb, outcome)
        elif strategy == "R3":
            s_jump = bb.state_change
            bb.clear(name)
            # even an idle agent must replan: the jump consumed a letter
            try:
                plan = bb.planner.request_state_change(bb.r, s_jump, bb.tick)
                bb.load(plan)
                bb.env.on_local_plan(bb.r, plan, bb.tick)
                outcome["result"] = "local"
            except (NoLocalPlan, EmptyCandidates, NoMatch):
                outcome["result"] = "local_failed"
                _global(bb, outcome)
        else:
            info = bb.env_change
            bb.clear(name)
            if bb.queue_empty():
                bb.planner.apply_env_change(bb.r, info)
                outcome["result"] = "idle"
            else:
                try:
                    plan = bb.planner.request_env_change(bb.r, info, bb.tick)
                    bb.load(plan)
                    bb.env.on_local_plan(bb.r, plan, bb.tick)
                    outcome["result"] = "local"
                except (NoLocalPlan, NoMatch):
                    outcome["result"] = "local_failed"
                    _global(bb, outcome)
        if marks is not None:
            outcome["local_time"] = sum(timings.local[marks[0] :])
            outcome["global_time"] = sum(timings.global_[marks[1] :])
        bb.outcomes.append(outcome)
        return outcome
    return {"strategy": None, "agent": bb.r, "tick": bb.tick, "result": None}


def _strategy_leaf(bb: Blackboard) -> Status:
    outcome = dispatch_strategy(bb)
    if outcome["strategy"] is None or bb.infeasible:
        return FAILURE
    return SUCCESS


def _recovery_stand(bb: Blackboard) -> Status:
    if bb.recovery_left == 0:
        dispatch_strategy(bb)
    bb.recovery_left -= 1
    if bb.recovery_left > 0:
        return RUNNING
    bb.clear("loss_of_balance")
    return SUCCESS


# -- tree --------------------------------------------------------------


def build_agent_tree(kind: str = WHEELED) -> Node:
    if kind not in (LEGGED, WHEELED):
        raise ValueError(f"unknown agent kind {kind!r}")
    legged = kind == LEGGED
    monitors: list[Node] = [Condition("NoCriticalFailure", lambda bb: not bb.critical_failure)]
    if legged:
        monitors.append(Condition("NoLocomotionFailure", lambda bb: not bb.loss_of_balance))
    monitors += [
        Condition("NoStateChange", lambda bb: bb.state_change is None),
        Condition("NoEnvChange", lambda bb: bb.env_change is None),
    ]
    execute = Sequence(
        "ExecuteAction",
        [
            Condition("LTLPreconditionMet", _precondition),
            Action("ExecuteCurrentAction", _execute, on_halt=_halt_execute),
            Action("AdvanceQueue", _advance),
        ],
    )
    main = ReactiveSequence("Main", monitors + [Repeat("RepeatUntilQueueEmpty", execute, Blackboard.queue_empty)])

    branches: list[Node] = [
        ForceFailure(
            "R2",
            Sequence(
                "CriticalFailureReallocation",
                [Condition("IsCriticalFailure", lambda bb: bb.critical_failure), Action("GlobalReallocation", _strategy_leaf)],
            ),
        )
    ]
    if legged:
        branches.append(
            Sequence(
                "R1",
                [Condition("IsLossOfBalance", lambda bb: bb.loss_of_balance), Action("RecoveryStand", _recovery_stand)],
            )
        )
    branches += [
        Sequence(
            "R3",
            [Condition("IsStateChange", lambda bb: bb.state_change is not None), Action("StateChangeReallocation", _strategy_leaf)],
        ),
        Sequence(
            "R4",
            [Condition("IsEnvChange", lambda bb: bb.env_change is not None), Action("EnvChangeReallocation", _strategy_leaf)],
        ),
    ]
    return Fallback("Root", [main, Fallback("Recovery", branches)])


def recovery_branches(tree: Node) -> list[str]:
    return [c.name for c in tree.find("Recovery").children]
