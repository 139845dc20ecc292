import random

import pytest

from stap.errors import UnknownLocation, UnknownOpState, UnknownState
from stap.ltl import build_nfa, eval_word, parse
from stap.models import (
    PROVED,
    REFUTED,
    STAY,
    MapEdge,
    OperatingStateMachine,
    OpTransition,
    TopoMap,
    UpdateInfo,
    compose_ts,
    decomposition_set,
    letters_of,
    product,
    start_letters_of,
    validate_decomposition,
)
from stap.sim import bundled, load_scenario

from oracles import reference_product, walk_word, walks

E, A, B, AB = frozenset(), frozenset("a"), frozenset("b"), frozenset("ab")


def line_map():
    return TopoMap(["s1", "a", "b"], [MapEdge("s1", "a"), MapEdge("a", "b")])


IDLE = OperatingStateMachine("idle", ["idle"], "idle")


class TestComposeTs:
    def test_toy_counts(self):
        ts = compose_ts(line_map(), IDLE, "s1")
        assert len(ts) == 3
        stays = [e for (s, t), e in ts.edges.items() if s == t]
        moves = [(s, t) for (s, t) in ts.edges if s != t]
        assert len(stays) == 3 and all(e.action == STAY for e in stays)
        assert len(moves) == 4

    def test_single_location(self):
        ts = compose_ts(TopoMap(["x"], []), IDLE, "x")
        assert len(ts) == 1
        assert list(ts.edges) == [(0, 0)]

    def test_labels_are_location_and_opstate(self):
        ts = compose_ts(line_map(), IDLE, "a")
        assert ts.labels[ts.initial] == {"a", "idle"}

    def test_hospital_delivery_robot(self, hospital_scenario):
        sc = hospital_scenario
        dr = next(a for a in sc.agents if a.name == "DR")
        ts = compose_ts(sc.topo, sc.opsms[dr.opsm], dr.start, dr.kind)
        assert len(ts) == 2 * len(sc.topo.locations)
        assert set(sc.opsms[dr.opsm].states) == {"Standby", "Loaded"}

    def test_bindings_restrict_opstate_edges(self):
        opsm = OperatingStateMachine(
            "delivery", ["Standby", "Loaded"], "Standby",
            [OpTransition("Standby", "pick", "Loaded"), OpTransition("Loaded", "drop", "Standby")],
            {"pick": ["s1"]},
        )
        ts = compose_ts(line_map(), opsm, "s1")
        picks = [(s, t) for (s, t), e in ts.edges.items() if e.action == "pick"]
        assert [ts.location(s) for s, _ in picks] == ["s1"]
        drops = [s for (s, t), e in ts.edges.items() if e.action == "drop"]
        assert len(drops) == 3

    def test_legged_only_edges(self):
        topo = TopoMap(["x", "y"], [MapEdge("x", "y", capability="legged_only")])
        assert len(compose_ts(topo, IDLE, "x", "wheeled").edges) == 2
        assert len(compose_ts(topo, IDLE, "x", "legged").edges) == 4

    def test_reachability_by_search(self):
        ts = compose_ts(line_map(), IDLE, "s1")
        seen, todo = {ts.initial}, [ts.initial]
        while todo:
            s = todo.pop()
            for t in ts.succ(s):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        assert seen == set(range(len(ts)))
        for s in range(len(ts)):
            assert all(s in ts.pred(t) for t in ts.succ(s))

    def test_errors(self):
        with pytest.raises(UnknownLocation):
            compose_ts(line_map(), IDLE, "nowhere")
        bad = OperatingStateMachine("x", ["idle"], "idle", [OpTransition("idle", "go", "busy")])
        with pytest.raises(UnknownOpState):
            compose_ts(line_map(), bad, "s1")
        with pytest.raises(UnknownLocation):
            compose_ts(line_map(), OperatingStateMachine("x", ["idle"], "idle", [OpTransition("idle", "go", "idle")], {"go": ["zz"]}), "s1")


class TestProduct:
    def test_toy_first_move(self, toy):
        pa = toy.pas()[0]
        q0 = toy.nfa.initial
        assert (q0, toy.s(0, "a")) in pa.successors((q0, toy.s(0, "s1")))

    def test_size_bound_and_edge_validity(self, toy):
        for pa in toy.pas():
            assert len(pa) <= len(toy.nfa) * len(pa.ts)
            assert all(pa.edge_valid(u, v) for u, v in pa.edges())
            assert pa.revision == 0

    def test_matches_reference(self, mini_scenario):
        sc = mini_scenario
        tss = [compose_ts(sc.topo, sc.opsms[a.opsm], a.start, a.kind) for a in sc.agents]
        nfa = build_nfa(parse(sc.formula), letters_of(tss))
        for r, ts in enumerate(tss):
            pa = product(nfa, ts, r)
            assert pa.signature() == reference_product(nfa, ts, [pa.initial])

    @pytest.mark.parametrize("formula", ["<>a && <>b", "a U b", "[]!b && <>a", "<>(a && X b)", "X X X a"])
    def test_acceptance_reachable_iff_word_exists(self, formula):
        ts = compose_ts(line_map(), IDLE, "s1")
        nfa = build_nfa(parse(formula), letters_of([ts]))
        pa = product(nfa, ts)
        reachable = any(pa.is_accepting(u) for u in pa.states)
        f = parse(formula)
        witnessed = any(eval_word(f, walk_word(ts, p)) for p, _ in walks(ts, ts.initial, 6))
        assert reachable == witnessed

    def test_delete_removes_projected_edges(self, toy):
        pa = toy.pas()[0]
        s1, a = toy.s(0, "s1"), toy.s(0, "a")
        before = {(u, v) for u, v in pa.edges() if (u[1], v[1]) == (s1, a)}
        removed = pa.apply(UpdateInfo(delete={(s1, a)}))
        assert before and before <= removed
        assert not any((u[1], v[1]) == (s1, a) for u, v in pa.edges())
        assert pa.revision == 1

    def test_add_creates_gated_edges(self, toy):
        pa = toy.pas()[0]
        s1, b = toy.s(0, "s1"), toy.s(0, "b")
        pa.apply(UpdateInfo(add={(s1, b)}))
        for u, v in pa.edges():
            if (u[1], v[1]) == (s1, b):
                assert v[0] == toy.nfa.step(u[0], pa.ts.labels[s1])
        assert ((toy.nfa.initial, s1), (toy.nfa.initial, b)) in pa.edges()

    def test_relabel_gates_outgoing_edges(self, toy):
        pa = toy.pas()[0]
        s1, a = toy.s(0, "s1"), toy.s(0, "a")
        q0 = toy.nfa.initial
        pa.apply(UpdateInfo(relabel={s1: {"b"}}))
        assert ((q0, s1), (toy.q("<>a"), a)) in pa.edges()
        assert ((q0, s1), (q0, a)) not in pa.edges()

    def test_unknown_state(self, toy):
        pa = toy.pas()[0]
        with pytest.raises(UnknownState):
            pa.apply(UpdateInfo(delete={(0, 99)}))

    def test_add_and_delete_disjoint(self):
        with pytest.raises(ValueError):
            UpdateInfo(add={(0, 1)}, delete={(0, 1)})

    def test_update_scripts_match_rebuild(self, toy):
        rng = random.Random(4)
        labels = ["a", "b", "s1", "idle"]
        for script in range(60):
            ts = toy.tss[0].copy()
            roots = [(q, ts.initial) for q in range(len(toy.nfa))] if script % 2 else []
            pa = product(toy.nfa, ts, 0, roots)
            for _ in range(5):
                info = _random_info(rng, ts, labels)
                before = pa.edges()
                removed = pa.apply(info)
                assert removed <= before
                assert pa.signature() == reference_product(toy.nfa, ts, sorted(pa.roots))


def _random_info(rng, ts, labels):
    n = len(ts)
    pairs = [(x, y) for x in range(n) for y in range(n)]
    k = rng.randrange(3)
    if k == 0:
        free = [p for p in pairs if p not in ts.edges]
        return UpdateInfo(add={rng.choice(free)}) if free else UpdateInfo()
    if k == 1 and ts.edges:
        return UpdateInfo(delete=set(rng.sample(sorted(ts.edges), min(2, len(ts.edges)))))
    return UpdateInfo(relabel={rng.randrange(n): frozenset(rng.sample(labels, rng.randrange(3)))})


class TestDecomposition:
    def test_eventually_pair_all_states(self):
        nfa = build_nfa(parse("<>a && <>b"), [E, A, B, AB])
        D = decomposition_set(nfa)
        assert set(D) == set(range(len(nfa)))
        assert all(D.tags[q] == PROVED for q in D)
        assert validate_decomposition(nfa, D, 4) == []

    def test_until_with_start_letters(self):
        nfa = build_nfa(parse("a U b"), [E, A, B, AB])
        D = decomposition_set(nfa, [A, B])
        assert {nfa.describe(q) for q in D} == {"(a U b)", "true"}
        assert validate_decomposition(nfa, D, 5) == []

    def test_until_over_all_letters(self):
        # an empty-label start letter can break the order after "true"
        nfa = build_nfa(parse("a U b"), [E, A, B, AB])
        D = decomposition_set(nfa)
        assert {nfa.describe(q) for q in D} == {"(a U b)"}
        true = nfa.state_id(parse("true"))
        assert D.tags[true] == REFUTED
        assert any(v.kind == "permutation" for v in validate_decomposition(nfa, D.members | {true}, 3))

    def test_dead_state_reported(self):
        nfa = build_nfa(parse("a U b"), [E, A, B, AB])
        dead = nfa.state_id(parse("false"))
        assert dead not in decomposition_set(nfa)
        out = validate_decomposition(nfa, [dead], 4)
        assert [v.kind for v in out] == ["dead"]

    def test_unreachable_state_reported(self):
        nfa = build_nfa(parse("<>a && <>b"), [E, A, B, AB])
        ghost = nfa.intern(parse("[]c"))
        assert [v.kind for v in validate_decomposition(nfa, [ghost], 2)] in (["unreachable"], ["dead"])

    def test_validator_rejects_bad_max_len(self):
        nfa = build_nfa(parse("<>a"), [E, A])
        with pytest.raises(ValueError):
            validate_decomposition(nfa, [], 0)

    def test_mini_mission(self, mini_scenario):
        sc = mini_scenario
        tss = [compose_ts(sc.topo, sc.opsms[a.opsm], a.start, a.kind) for a in sc.agents]
        nfa = build_nfa(parse(sc.formula), letters_of(tss))
        D = decomposition_set(nfa, start_letters_of(tss))
        assert len(D) > 0
        assert validate_decomposition(nfa, D, 5) == []

    def test_budget_fallback_tags_assumed_or_refuted(self):
        nfa = build_nfa(parse("<>a && <>b"), [E, A, B, AB])
        D = decomposition_set(nfa, budget=1)
        assert set(D.tags.values()) == {"assumed"}
        assert validate_decomposition(nfa, D, 4) == []
