"""Event log of a simulation run and the global-word satisfaction check."""

from __future__ import annotations

import json
from itertools import permutations
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..ltl.formula import Formula
from ..ltl.parser import parse
from ..ltl.semantics import eval_word

MAX_PERMUTATION_AGENTS = 4


class Trace:
    """Append-only list of ``{t, agent?, event, payload}`` records."""

    def __init__(self, events: Iterable[dict] | None = None):
        self.events: list[dict] = list(events or [])

    def append(self, t: int, event: str, payload: Any = None, agent: int | None = None) -> None:
        if self.events and t < self.events[-1]["t"]:
            raise ValueError("trace timestamps must not decrease")
        rec: dict[str, Any] = {"t": t, "event": event, "payload": payload if payload is not None else {}}
        if agent is not None:
            rec["agent"] = agent
        self.events.append(rec)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> Trace:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(json.loads(line) for line in lines if line.strip())

    def truncated(self, n: int) -> Trace:
        return Trace(self.events[:n])

    def n_agents(self) -> int:
        start = self.of("start")
        if start:
            return len(start[0]["payload"]["agents"])
        return 1 + max((e["agent"] for e in self.events if "agent" in e), default=-1)


def agent_words(trace: Trace | Sequence[dict]) -> list[list[frozenset[str]]]:
    """Each agent's consumed label word, in execution order."""
    trace = trace if isinstance(trace, Trace) else Trace(trace)
    words: list[list[frozenset[str]]] = [[] for _ in range(trace.n_agents())]
    for e in trace.of("step"):
        words[e["agent"]].append(frozenset(e["payload"]["label"]))
    return words


def completion_order(trace: Trace) -> list[int]:
    last: dict[int, int] = {}
    for e in trace.of("step"):
        last[e["agent"]] = e["t"]
    n = trace.n_agents()
    return sorted(range(n), key=lambda r: (last.get(r, -1), r))


def check_words(phi: Formula, words: Sequence[Sequence[frozenset[str]]], order: Sequence[int] | None = None) -> bool:
    """The concatenation in ``order`` and, for small teams, every reordering of the non-empty words."""
    order = list(order) if order is not None else list(range(len(words)))
    if not eval_word(phi, [a for r in order for a in words[r]]):
        return False
    busy = [r for r in range(len(words)) if words[r]]
    if len(busy) > MAX_PERMUTATION_AGENTS:
        return True
    seen = set()
    for perm in permutations(busy):
        if perm in seen:
            continue
        seen.add(perm)
        if not eval_word(phi, [a for r in perm for a in words[r]]):
            return False
    return True


def verify_trace(trace: Trace | Sequence[dict] | str | Path, phi: Formula | str) -> bool:
    """Global-word satisfaction of an executed trace."""
    if isinstance(trace, (str, Path)):
        trace = Trace.read(trace)
    elif not isinstance(trace, Trace):
        trace = Trace(trace)
    if isinstance(phi, str):
        phi = parse(phi)
    return check_words(phi, agent_words(trace), completion_order(trace))
