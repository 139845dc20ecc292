from .engine import Metrics, Simulation, run
from .scenario import SCHEMA, AgentSpec, DisturbanceEvent, Scenario, bundled, load_scenario, scenario_from_dict
from .trace import Trace, agent_words, check_words, completion_order, verify_trace

__all__ = [
    "SCHEMA",
    "AgentSpec",
    "DisturbanceEvent",
    "Metrics",
    "Scenario",
    "Simulation",
    "Trace",
    "agent_words",
    "bundled",
    "check_words",
    "completion_order",
    "load_scenario",
    "run",
    "scenario_from_dict",
    "verify_trace",
]
