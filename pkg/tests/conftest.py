from __future__ import annotations

import pytest

from stap.ltl import build_nfa, parse
from stap.models import (
    MapEdge,
    OperatingStateMachine,
    TopoMap,
    compose_ts,
    decomposition_set,
    letters_of,
    product,
    start_letters_of,
    ts_state_name,
)
from stap.sim import bundled, load_scenario


class ToyWorld:
    """Two agents on the s1 - a - b line; R1 starts at s1, R2 at b."""

    def __init__(self, formula: str = "<>a && <>b"):
        self.topo = TopoMap(["s1", "a", "b"], [MapEdge("s1", "a"), MapEdge("a", "b", cost=3)])
        self.opsm = OperatingStateMachine("idle", ["idle"], "idle")
        self.tss = [compose_ts(self.topo, self.opsm, "s1"), compose_ts(self.topo, self.opsm, "b")]
        self.nfa = build_nfa(parse(formula), letters_of(self.tss))
        self.D = decomposition_set(self.nfa, start_letters_of(self.tss))

    def pas(self):
        return [product(self.nfa, ts.copy(), r) for r, ts in enumerate(self.tss)]

    def q(self, text: str) -> int:
        return self.nfa.state_id(parse(text))

    def s(self, r: int, loc: str) -> int:
        return self.tss[r].state(ts_state_name(loc, "idle"))


@pytest.fixture
def toy():
    return ToyWorld()


@pytest.fixture(scope="session")
def toy_scenario():
    return load_scenario(bundled("toy"))


@pytest.fixture(scope="session")
def mini_scenario():
    return load_scenario(bundled("hospital_mini"))


@pytest.fixture(scope="session")
def hospital_scenario():
    return load_scenario(bundled("hospital"))
