from .decomposition import (
    ASSUMED,
    PROVED,
    REFUTED,
    DecompositionSet,
    Violation,
    decomposition_set,
    validate_decomposition,
)
from .product import (
    PEdge,
    ProductAutomaton,
    PState,
    UpdateInfo,
    check_same_nfa,
    letters_of,
    product,
    start_letters_of,
)
from .ts import (
    STAY,
    MapEdge,
    OperatingStateMachine,
    OpTransition,
    TopoMap,
    TransitionSystem,
    compose_ts,
    ts_state_name,
)
