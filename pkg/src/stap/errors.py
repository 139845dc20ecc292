"""Exception hierarchy shared by all subpackages."""


class StapError(Exception):
    """Base class for planner, model and simulator errors."""


class NotInNNF(StapError):
    pass


class StateBudgetExceeded(StapError):
    pass


class InclusionCheckBudgetExceeded(StapError):
    pass


class UnknownLocation(StapError):
    pass


class UnknownOpState(StapError):
    pass


class UnknownState(StapError):
    pass


class MismatchedSpecification(StapError):
    pass


class MissionInfeasible(StapError):
    """No accepting state of the team automaton is reachable."""


class NoMatch(StapError):
    pass


class EmptyCandidates(StapError):
    """The disturbed state admits no NFA successor; escalate to global."""


class NoLocalPlan(StapError):
    """Local reallocation found no path; escalate to global."""


class SchemaError(StapError):
    """Scenario file failed validation. ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class TickBudgetExceeded(StapError):
    pass
