import json
from dataclasses import replace

import pytest

from stap.errors import SchemaError, TickBudgetExceeded
from stap.ltl import parse
from stap.sim import (
    Metrics,
    Trace,
    agent_words,
    bundled,
    check_words,
    load_scenario,
    run,
    scenario_from_dict,
    verify_trace,
)
from stap.sim.batch import run_trials
from stap.sim.bench import linear_fit, replicate, run_bench
from stap.sim.report import REFERENCE_COUNTS, bench_csv, bench_report, strategy_rows, table_report


def raw(name):
    return json.loads(bundled(name).read_text())


def steps_of(trace, r):
    return [(e["t"], e["payload"]["from"], e["payload"]["to"]) for e in trace.of("step") if e.get("agent") == r]


class TestScenario:
    @pytest.mark.parametrize("name", ["toy", "hospital", "hospital_mini", "hospital_calm", "infeasible"])
    def test_bundled_load(self, name):
        sc = load_scenario(bundled(name))
        assert sc.agents and sc.formula

    def test_hospital_map(self, hospital_scenario):
        assert {"p3", "p4", "p6", "c1", "c4", "c6", "c7", "s1"} <= set(hospital_scenario.topo.locations)
        assert [a.name for a in hospital_scenario.agents] == ["A1", "DR", "Wassi"]

    def test_missing_formula(self):
        data = raw("toy")
        del data["formula"]
        with pytest.raises(SchemaError) as info:
            scenario_from_dict(data)
        assert info.value.path == "formula"

    def test_unknown_edge_location(self):
        data = raw("toy")
        data["map"]["edges"][0]["to"] = "nowhere"
        with pytest.raises(SchemaError) as info:
            scenario_from_dict(data)
        assert info.value.path == "map/edges/0/to"

    def test_wrong_type_reports_path(self):
        data = raw("toy")
        data["agents"][1]["kind"] = "flying"
        with pytest.raises(SchemaError) as info:
            scenario_from_dict(data)
        assert info.value.path.startswith("agents/1")

    def test_unknown_agent_in_disturbance(self):
        data = raw("toy")
        data["disturbances"] = [{"trigger": {"tick": 1}, "kind": "fall", "agent": "ghost"}]
        with pytest.raises(SchemaError):
            scenario_from_dict(data)

    def test_bad_formula(self):
        data = raw("toy")
        data["formula"] = "<> && a"
        with pytest.raises(SchemaError) as info:
            scenario_from_dict(data)
        assert info.value.path == "formula"


class TestTrace:
    def test_toy_run(self, toy_scenario):
        trace, metrics = run(toy_scenario)
        assert metrics.success and metrics.verdict == "success"
        assert metrics.makespan == 2
        assert sum(metrics.counts.values()) == 0
        assert verify_trace(trace, parse(toy_scenario.formula))

    def test_truncated_before_b(self, toy_scenario):
        trace, _ = run(toy_scenario)
        events = list(trace)
        cut = next(i for i, e in enumerate(events) if e["event"] == "step" and "b" in e["payload"]["label"])
        assert not verify_trace(trace.truncated(cut), toy_scenario.formula)

    def test_roundtrip_file(self, toy_scenario, tmp_path):
        trace, _ = run(toy_scenario)
        path = tmp_path / "t.jsonl"
        trace.write(path)
        assert Trace.read(path).to_jsonl() == trace.to_jsonl()
        assert verify_trace(path, toy_scenario.formula)

    def test_times_non_decreasing(self, toy_scenario):
        trace, _ = run(toy_scenario)
        ts = [e["t"] for e in trace]
        assert ts == sorted(ts)
        with pytest.raises(ValueError):
            trace.append(ts[-1] - 1, "late")

    def test_check_words_permutations(self):
        phi = parse("<>a && <>b")
        a, b = frozenset("a"), frozenset("b")
        assert check_words(phi, [[a], [b]])
        # order matters for this one, so a permutation fails
        assert not check_words(parse("!b U a"), [[a], [b]])
        assert check_words(parse("!b U a"), [[a, b], []])

    def test_determinism(self, mini_scenario):
        sc = replace(mini_scenario, disturbances=[])
        assert run(sc)[0].to_jsonl() == run(sc)[0].to_jsonl()

    def test_infeasible(self):
        trace, metrics = run(load_scenario(bundled("infeasible")))
        assert not metrics.success and metrics.verdict == "MissionInfeasible"
        assert trace.of("verdict")

    def test_tick_budget(self, toy_scenario):
        with pytest.raises(TickBudgetExceeded):
            run(replace(toy_scenario, tick_budget=1))

    def test_metrics_json_roundtrip(self, toy_scenario):
        _, m = run(toy_scenario)
        assert Metrics.from_json(m.to_json()).to_json() == m.to_json()


class TestHospitalCalm:
    def test_offline_plan_runs_verbatim(self):
        sc = load_scenario(bundled("hospital_calm"))
        trace, metrics = run(sc)
        assert metrics.success
        assert metrics.local_calls == metrics.global_calls == 0
        dispatched = {e["agent"]: e["payload"]["plan"] for e in trace.of("planner") if e["payload"]["type"] == "PlanDispatch"}
        for r, plan in dispatched.items():
            walked = [to for _, _, to in steps_of(trace, r)]
            assert walked == plan[1:]


@pytest.fixture(scope="module")
def hospital_run():
    sc = load_scenario(bundled("hospital"))
    trace, metrics = run(sc)
    return sc, trace, metrics


class TestHospital:
    def test_success_and_counts(self, hospital_run):
        sc, trace, metrics = hospital_run
        assert metrics.success
        assert metrics.counts == {"R1": 1, "R2": 1, "R3": 1, "R4": 1}
        assert verify_trace(trace, sc.formula)

    def test_counts_match_outcomes(self, hospital_run):
        _, _, metrics = hospital_run
        for k, n in metrics.counts.items():
            assert sum(o["strategy"] == k for o in metrics.outcomes) == n

    def test_dr_repicks_after_jump(self, hospital_run):
        _, trace, _ = hospital_run
        jump = next(e for e in trace.of("disturbance") if e["payload"]["kind"] == "state_jump")
        later = [(f, t) for tick, f, t in steps_of(trace, 1) if tick > jump["t"]]
        assert ("s1|Standby", "s1|Loaded") in later

    def test_a1_takes_over_training(self, hospital_run):
        _, trace, _ = hospital_run
        fail = next(e for e in trace.of("disturbance") if e["payload"]["kind"] == "critical_failure")
        later = [t for tick, _, t in steps_of(trace, 0) if tick > fail["t"]]
        tour = [t.split("|")[0] for t in later if t.endswith("|Training")]
        assert tour[:5] == ["c1", "c7", "c6", "c7", "c1"]

    def test_a1_takes_over_p3_via_s1(self, hospital_run):
        _, trace, _ = hospital_run
        enc = trace.of("encounter")[0]
        assert enc["agent"] == 1
        later = [(f, t) for tick, f, t in steps_of(trace, 0) if tick > enc["t"]]
        pick = later.index(("s1|Standby", "s1|Loaded"))
        assert ("p3|Loaded", "p3|Standby") in later[pick:]
        dr_after = [t for tick, _, t in steps_of(trace, 1) if tick > enc["t"]]
        assert not any(t.startswith("p3") for t in dr_after)

    def test_local_cheaper_than_global(self, hospital_run):
        _, _, metrics = hospital_run
        assert metrics.mean_local < metrics.mean_global


class TestReports:
    def test_table(self, hospital_run):
        _, _, metrics = hospital_run
        text = table_report([metrics])
        lines = text.splitlines()
        assert lines[0].split()[:2] == ["Strategy", "Triggered"]
        for k in REFERENCE_COUNTS:
            assert any(line.startswith(k) for line in lines)
        r1 = next(line for line in lines if line.startswith("R1")).split()
        assert r1[2] == "-" and r1[3] == "-"

    def test_rows(self, hospital_run):
        _, _, metrics = hospital_run
        rows = {r["strategy"]: r for r in strategy_rows([metrics])}
        assert rows["R1"]["mean_local_s"] is None
        assert rows["R2"]["mean_global_s"] is not None
        assert rows["R3"]["mean_local_s"] is not None

    def test_empty_table(self):
        with pytest.raises(ValueError):
            table_report([])

    def test_bench_small(self, toy_scenario):
        rows, fit = run_bench(toy_scenario, [2, 4], reps=1)
        assert [r["n"] for r in rows] == [2, 4]
        assert rows[1]["team_states"] > rows[0]["team_states"]
        assert "R^2" in bench_report(rows, fit)
        assert bench_csv(rows).splitlines()[0] == "n,team_states,translation_s,offline_s,local_s,global_s"

    def test_replicate_names(self, toy_scenario):
        sc = replicate(toy_scenario, 5)
        assert [a.name for a in sc.agents] == ["R1_0", "R2_0", "R1_1", "R2_1", "R1_2"]
        assert sc.disturbances == []

    def test_linear_fit(self):
        fit = linear_fit([1, 2, 3], [2, 4, 6])
        assert fit["slope"] == pytest.approx(2)
        assert fit["r2"] == pytest.approx(1)


class TestBatch:
    def test_seeded_trials_repeat(self, toy_scenario):
        a = run_trials(toy_scenario, 5, seed=3, per_trial=2)
        b = run_trials(toy_scenario, 5, seed=3, per_trial=2)
        assert [r.trace.to_jsonl() for r in a] == [r.trace.to_jsonl() for r in b]

    def test_outcomes_sound(self, toy_scenario):
        for res in run_trials(toy_scenario, 30, seed=1, per_trial=2):
            assert res.verdict in ("success", "MissionInfeasible")
            if res.verdict == "success":
                assert verify_trace(res.trace, toy_scenario.formula)
            assert agent_words(res.trace) is not None
