from .search import dijkstra
from .team import (
    INTRA,
    SWITCH,
    SYNC,
    AgentPlan,
    GlobalPath,
    TeamAutomaton,
    TState,
    build_team,
    path_cost,
    plan,
    plan_from_states,
    project,
)
