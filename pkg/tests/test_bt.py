import pytest

from stap.bt import (
    FAILURE,
    LEGGED,
    RUNNING,
    SEVERITY,
    STRATEGY,
    SUCCESS,
    WHEELED,
    Action,
    Blackboard,
    Condition,
    ExecutionEnv,
    Fallback,
    ForceFailure,
    ReactiveSequence,
    Repeat,
    Sequence,
    build_agent_tree,
    dispatch_strategy,
    recovery_branches,
    tick,
)
from stap.errors import MissionInfeasible, NoLocalPlan
from stap.models import UpdateInfo
from stap.planning import AgentPlan


def const(status, name="leaf"):
    return Action(name, lambda bb: status)


def script(*statuses, name="scripted"):
    it = iter(statuses)
    return Action(name, lambda bb: next(it))


class TestNodes:
    def test_reactive_sequence_stops_before_action(self):
        act = const(SUCCESS, "act")
        node = ReactiveSequence("rs", [Condition("c", lambda bb: False), act])
        assert tick(node, None) is FAILURE
        assert act.ticks == 0

    def test_reactive_sequence_rechecks_from_start(self):
        cond = Condition("c", lambda bb: True)
        node = ReactiveSequence("rs", [cond, const(RUNNING)])
        for _ in range(3):
            assert tick(node, None) is RUNNING
        assert cond.ticks == 3

    def test_sequence_resumes_running_child(self):
        first = const(SUCCESS, "first")
        node = Sequence("seq", [first, script(RUNNING, SUCCESS), const(SUCCESS, "third")])
        assert tick(node, None) is RUNNING
        assert tick(node, None) is SUCCESS
        assert first.ticks == 1

    def test_sequence_failure_resets(self):
        first = const(SUCCESS, "first")
        node = Sequence("seq", [first, script(FAILURE, SUCCESS)])
        assert tick(node, None) is FAILURE
        assert tick(node, None) is SUCCESS
        assert first.ticks == 2

    def test_force_failure(self):
        assert tick(ForceFailure("ff", const(SUCCESS)), None) is FAILURE
        assert tick(ForceFailure("ff", const(FAILURE)), None) is FAILURE
        assert tick(ForceFailure("ff", const(RUNNING)), None) is RUNNING

    def test_fallback(self):
        later = const(SUCCESS, "later")
        assert tick(Fallback("fb", [const(SUCCESS), later]), None) is SUCCESS
        assert later.ticks == 0
        assert tick(Fallback("fb", [const(FAILURE), const(FAILURE)]), None) is FAILURE
        node = Fallback("fb", [const(FAILURE, "x"), script(RUNNING, SUCCESS)])
        assert tick(node, None) is RUNNING
        assert tick(node, None) is SUCCESS
        assert node.children[0].ticks == 1

    def test_repeat_until_stop(self):
        state = {"n": 0}

        def work(bb):
            state["n"] += 1
            return SUCCESS

        node = Repeat("rep", Action("work", work), lambda bb: state["n"] >= 3)
        results = [tick(node, None) for _ in range(4)]
        assert results == [RUNNING, RUNNING, SUCCESS, SUCCESS]
        assert state["n"] == 3

    def test_halt_calls_on_halt_of_running_action(self):
        halted = []
        act = Action("a", lambda bb: RUNNING, on_halt=lambda bb: halted.append(1))
        flag = {"ok": True}
        node = ReactiveSequence("rs", [Condition("c", lambda bb: flag["ok"]), act])
        tick(node, None)
        flag["ok"] = False
        tick(node, None)
        assert halted == [1]


class TestTreeShape:
    def test_legged_has_four_branches(self):
        assert recovery_branches(build_agent_tree(LEGGED)) == ["R2", "R1", "R3", "R4"]

    def test_wheeled_omits_r1(self):
        tree = build_agent_tree(WHEELED)
        assert recovery_branches(tree) == ["R2", "R3", "R4"]
        with pytest.raises(KeyError):
            tree.find("NoLocomotionFailure")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_agent_tree("flying")


class FakePlanner:
    def __init__(self, local_ok=True, global_ok=True):
        self.local_ok, self.global_ok = local_ok, global_ok
        self.calls = []

    def _plan(self):
        return AgentPlan(0, [(0, 0), (0, 1)], [1.0], [1], ["move"])

    def fail_agent(self, r):
        self.calls.append("fail")

    def request_global(self, r, tick):
        self.calls.append("global")
        if not self.global_ok:
            raise MissionInfeasible("no")
        return [self._plan()]

    def request_state_change(self, r, s, tick):
        self.calls.append("local")
        if not self.local_ok:
            raise NoLocalPlan("no")
        return self._plan()

    def request_env_change(self, r, info, tick):
        return self.request_state_change(r, None, tick)

    def apply_env_change(self, r, info):
        self.calls.append("apply")


def busy_board(kind, planner):
    bb = Blackboard(0, kind, planner)
    bb.load(AgentPlan(0, [(0, 0), (0, 1), (0, 2)], [1.0, 1.0], [3, 2], ["m", "m"]))
    return bb


FLAG_VALUES = {"critical_failure": True, "loss_of_balance": True, "state_change": 1, "env_change": UpdateInfo()}


class TestStrategyTable:
    @pytest.mark.parametrize("kind", [LEGGED, WHEELED])
    @pytest.mark.parametrize("flag", SEVERITY)
    def test_mapping(self, kind, flag):
        planner = FakePlanner()
        bb = busy_board(kind, planner)
        setattr(bb, flag, FLAG_VALUES[flag])
        out = dispatch_strategy(bb)
        if flag == "loss_of_balance" and kind == WHEELED:
            assert out["strategy"] is None
            assert not bb.loss_of_balance
            return
        assert out["strategy"] == STRATEGY[flag]
        expected = {"R1": [], "R2": ["fail", "global"], "R3": ["local"], "R4": ["local"]}[out["strategy"]]
        assert planner.calls == expected
        if flag != "loss_of_balance":
            assert not bb.flag(flag)

    def test_local_failure_escalates(self):
        for flag in ("state_change", "env_change"):
            planner = FakePlanner(local_ok=False)
            bb = busy_board(WHEELED, planner)
            setattr(bb, flag, FLAG_VALUES[flag])
            out = dispatch_strategy(bb)
            assert planner.calls == ["local", "global"]
            assert out["result"] == "local_failed+global"

    def test_idle_agent_env_change_only_updates_model(self):
        planner = FakePlanner()
        bb = Blackboard(0, WHEELED, planner)
        bb.env_change = UpdateInfo()
        assert dispatch_strategy(bb)["result"] == "idle"
        assert planner.calls == ["apply"]

    def test_infeasible_marks_board(self):
        bb = busy_board(WHEELED, FakePlanner(global_ok=False))
        bb.critical_failure = True
        assert dispatch_strategy(bb)["result"] == "infeasible"
        assert bb.infeasible and bb.terminated

    def test_severity_order(self):
        planner = FakePlanner()
        bb = busy_board(LEGGED, planner)
        for flag in SEVERITY:
            setattr(bb, flag, FLAG_VALUES[flag])
        assert dispatch_strategy(bb)["strategy"] == "R2"
        # a terminated agent drops what is left
        assert dispatch_strategy(bb)["strategy"] is None
        assert not any(bb.flag(f) for f in SEVERITY)


class Recorder(ExecutionEnv):
    def __init__(self):
        self.steps = []

    def complete_step(self, r, t, tick):
        self.steps.append((t, tick))


def run_tree(kind, n_ticks, before_tick=None):
    bb = busy_board(kind, FakePlanner())
    bb.env = Recorder()
    tree = build_agent_tree(kind)
    log = []
    for k in range(n_ticks):
        bb.tick = k
        if before_tick:
            before_tick(k, bb)
        tick(tree, bb, log)
    return bb, tree, log


class TestExecution:
    def test_precondition_only_on_fetch(self):
        bb, tree, _ = run_tree(WHEELED, 5)
        assert bb.queue_empty()
        assert bb.precondition_checks == 2
        assert tree.find("NoStateChange").ticks == 5
        assert [t for t, _ in bb.env.steps] == [1, 2]
        assert [k for _, k in bb.env.steps] == [2, 4]

    def test_flag_reacted_to_in_same_tick(self):
        def inject(k, bb):
            if k == 1:
                bb.state_change = 2

        bb, _, log = run_tree(WHEELED, 2, inject)
        assert bb.outcomes and bb.outcomes[0]["tick"] == 1
        assert ("Root/Recovery/R3/StateChangeReallocation", "SUCCESS") in log

    def test_recovery_stand_takes_r1_ticks(self):
        def inject(k, bb):
            if k == 0:
                bb.loss_of_balance = True
                bb.r1_ticks = 4

        bb, _, log = run_tree(LEGGED, 6, inject)
        stand = [p for p, s in log if p.endswith("RecoveryStand")]
        assert len(stand) == 4
        assert bb.counts["R1"] == 1

    def test_deterministic_logs(self):
        def inject(k, bb):
            if k == 2:
                bb.env_change = UpdateInfo()

        logs = [run_tree(LEGGED, 8, inject)[2] for _ in range(2)]
        assert logs[0] == logs[1]
