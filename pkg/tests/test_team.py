import itertools

import pytest

from stap.errors import MismatchedSpecification, MissionInfeasible
from stap.ltl import build_nfa, eval_word, parse
from stap.models import compose_ts, decomposition_set, letters_of, product, start_letters_of
from stap.planning import INTRA, SWITCH, build_team, path_cost, plan, project

from conftest import ToyWorld
from oracles import walk_word, walks


def brute_force_optimum(world: ToyWorld, max_edges: int = 10):
    """Cheapest pair of walks whose joined word satisfies the formula.

    The cut between the two walks must land on a decomposition state.
    """
    f = parse(world.formula_text)
    ts1, ts2 = world.tss
    w1 = sorted(walks(ts1, ts1.initial, max_edges), key=lambda x: x[1])
    w2 = sorted(walks(ts2, ts2.initial, max_edges), key=lambda x: x[1])
    best = None
    for p1, c1 in w1:
        if best is not None and c1 >= best:
            break
        word1 = walk_word(ts1, p1)
        if world.nfa.run(word1) not in world.D and not eval_word(f, word1):
            continue
        for p2, c2 in w2:
            if best is not None and c1 + c2 >= best:
                break
            if len(p1) + len(p2) - 2 > max_edges:
                continue
            word2 = walk_word(ts2, p2)
            if word2 and world.nfa.run(word1) not in world.D:
                continue
            if eval_word(f, word1 + word2):
                best = c1 + c2
    return best


def agent_words(plans, pas):
    return [[pas[p.r].ts.labels[s] for _, s in p.states[:-1]] for p in plans]


class World(ToyWorld):
    def __init__(self, formula):
        super().__init__(formula)
        self.formula_text = formula


class TestTeam:
    def test_switch_edges_toy(self, toy):
        pas = toy.pas()
        assert len(toy.D) == 4
        expected = sum(1 for q, _ in pas[0].states if q in toy.D)
        team = build_team(pas, toy.D)
        sw = team.switch_edges()
        assert len(sw) == expected
        entry = pas[1].ts.initial
        for (r, q, s), (r2, q2, s2) in sw:
            assert (r, r2) == (0, 1)
            assert q == q2 and q in toy.D
            assert s2 == entry

    def test_single_agent_has_no_switches(self, toy):
        team = build_team(toy.pas()[:1], toy.D)
        assert team.switch_edges() == []

    def test_size_is_sum_of_products(self, toy):
        pas = toy.pas()
        team = build_team(pas, toy.D)
        assert len(team) == sum(len(pa) for pa in pas)

    def test_mismatched_nfas(self, toy):
        other = ToyWorld()
        with pytest.raises(MismatchedSpecification):
            build_team([toy.pas()[0], other.pas()[1]], toy.D)

    def test_true_is_already_done(self):
        world = World("true")
        beta = plan(build_team(world.pas(), world.D))
        assert beta.cost == 0
        assert len(beta) == 1
        assert all(p.is_empty() for p in project(beta))

    def test_infeasible(self):
        world = World("<>a && []!a")
        with pytest.raises(MissionInfeasible):
            plan(build_team(world.pas(), world.D))

    @pytest.mark.parametrize("formula", ["<>a && <>b", "<>b && X <>a", "<>(a && X b)", "a U b", "[]!b && <>a", "<>s1 && <>b"])
    def test_matches_brute_force(self, formula):
        world = World(formula)
        best = brute_force_optimum(world, 10)
        team = build_team(world.pas(), world.D)
        if best is None:
            with pytest.raises(MissionInfeasible):
                team.plan()
            return
        assert team.plan().cost == best

    def test_toy_cost_is_three(self, toy):
        assert plan(build_team(toy.pas(), toy.D)).cost == 3


class TestProject:
    def test_toy_split(self, toy):
        pas = toy.pas()
        beta = plan(build_team(pas, toy.D))
        plans = project(beta)
        assert len(plans) == 2
        r1, r2 = plans
        assert toy.s(0, "a") in r1.ts_states
        assert r2.ts_states == [toy.s(1, "b"), toy.s(1, "b")]
        assert r2.actions == ["stay"]

    def test_costs_add_up(self, toy):
        beta = plan(build_team(toy.pas(), toy.D))
        assert path_cost(project(beta)) == beta.cost

    def test_reassembles_beta(self, toy):
        beta = plan(build_team(toy.pas(), toy.D))
        plans = project(beta)
        rebuilt = [(p.r, q, s) for p in plans for q, s in p.states]
        assert rebuilt == beta.states
        idx = [r for r, _, _ in beta.states]
        assert idx == sorted(idx)
        for i, kind in enumerate(beta.kinds):
            if kind == SWITCH:
                assert beta.states[i + 1][0] == beta.states[i][0] + 1
                assert beta.states[i][1] in toy.D
            else:
                assert kind == INTRA
                assert beta.states[i + 1][0] == beta.states[i][0]

    def test_single_agent_path(self, toy):
        beta = plan(build_team(toy.pas()[:1], toy.D))
        plans = project(beta)
        assert len(plans) == 1 and not plans[0].is_empty()
        assert SWITCH not in beta.kinds

    def test_plans_are_product_paths(self, toy):
        pas = toy.pas()
        plans = project(plan(build_team(pas, toy.D)))
        for p in plans:
            for u, v in zip(p.states, p.states[1:]):
                assert pas[p.r].has_edge(u, v)
        last = [p for p in plans if not p.is_empty()][-1]
        assert toy.nfa.is_accepting(last.acc[0])


@pytest.mark.parametrize("name", ["toy", "hospital_mini"])
def test_every_permutation_satisfies(name, request):
    sc = request.getfixturevalue("toy_scenario" if name == "toy" else "mini_scenario")
    tss = [compose_ts(sc.topo, sc.opsms[a.opsm], a.start, a.kind) for a in sc.agents]
    nfa = build_nfa(parse(sc.formula), letters_of(tss))
    D = decomposition_set(nfa, start_letters_of(tss))
    pas = [product(nfa, ts, r) for r, ts in enumerate(tss)]
    plans = project(plan(build_team(pas, D)))
    words = [w for w in agent_words(plans, pas) if w]
    f = parse(sc.formula)
    assert words
    for perm in itertools.permutations(words):
        assert eval_word(f, [x for w in perm for x in w])
