from .local import (
    AgentHistory,
    candidate_initials,
    last_matched,
    local_realloc_env_change,
    local_realloc_state_change,
    plan_edges,
    update_pa,
)
from .planner import GlobalReallocRequest, LocalReallocRequest, PlanDispatch, Planner, Timings
from .sync import SynchronizedTeam, global_realloc, mark_agent_failed, synchronize
