"""Agent failure, synchronization and global reallocation."""

from __future__ import annotations

from typing import Sequence

from ..models.decomposition import DecompositionSet
from ..models.product import PEdge, ProductAutomaton, UpdateInfo
from ..planning.team import AgentPlan, GlobalPath, TeamAutomaton, project
from .local import AgentHistory, update_pa


def mark_agent_failed(pa: ProductAutomaton) -> set[PEdge]:
    """Remove every transition of the agent's TS, stay loops included.

    A failed agent cannot even wait in place and consume its own label
    again, so the stay loops go too. Its product keeps only its states;
    a team path can still pass through it at decomposition states.
    """
    info = UpdateInfo(delete=set(pa.ts.edges))
    _, removed = update_pa(pa, info)
    return removed


class SynchronizedTeam(TeamAutomaton):
    """Team automaton rebuilt from a consistent snapshot of all agents."""

    def __init__(
        self,
        pas: Sequence[ProductAutomaton],
        D: DecompositionSet,
        current: Sequence[int],
        words: dict[int, Sequence[frozenset[str]]],
        progress: dict[int, tuple[int, int]] | None = None,
    ):
        for pa, s in zip(pas, current):
            pa.reset_initial(s)
        super().__init__(pas, D, list(current), words, progress)


def synchronize(
    pas: Sequence[ProductAutomaton],
    D: DecompositionSet,
    histories: Sequence[AgentHistory],
) -> SynchronizedTeam:
    """Snapshot every agent's TS state and executed word.

    ``progress`` records, for agents whose automaton state advanced since
    their share began, the pair (entry state, reached state).
    """
    current = []
    words: dict[int, list[frozenset[str]]] = {}
    progress: dict[int, tuple[int, int]] = {}
    for pa, h in zip(pas, histories):
        cur = h.current
        current.append(cur[1] if cur is not None else pa.ts.initial)
        if h.word:
            words[h.r] = list(h.word)
        if h.init_q is not None and cur is not None and h.init_q != cur[0]:
            progress[h.r] = (h.init_q, cur[0])
    return SynchronizedTeam(pas, D, current, words, progress)


def global_realloc(team: SynchronizedTeam) -> tuple[GlobalPath, list[AgentPlan]]:
    beta = team.plan()
    return beta, project(beta)
