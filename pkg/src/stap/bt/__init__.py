from .agent_tree import (
    LEGGED,
    SEVERITY,
    STRATEGY,
    WHEELED,
    Blackboard,
    ExecutionEnv,
    build_agent_tree,
    dispatch_strategy,
    recovery_branches,
)
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
    tick,
)
