"""Minimal behavior-tree runtime."""

from __future__ import annotations

from enum import Enum
from typing import Any, Callable


class Status(str, Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    RUNNING = "RUNNING"


SUCCESS, FAILURE, RUNNING = Status.SUCCESS, Status.FAILURE, Status.RUNNING


class Node:
    kind = "Node"

    def __init__(self, name: str, children: list[Node] | None = None):
        self.name = name
        self.children = list(children or [])
        self.ticks = 0  # how often this node was ticked, for audits

    def tick(self, bb: Any, log: list | None = None, prefix: str = "") -> Status:
        path = f"{prefix}/{self.name}" if prefix else self.name
        self.ticks += 1
        status = self._tick(bb, log, path)
        if log is not None:
            log.append((path, status.value))
        return status

    def _tick(self, bb: Any, log: list | None, path: str) -> Status:
        raise NotImplementedError

    def halt(self) -> None:
        for c in self.children:
            c.halt()

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def find(self, name: str) -> Node:
        for n in self.walk():
            if n.name == name:
                return n
        raise KeyError(name)

    def __repr__(self) -> str:
        if not self.children:
            return f"{self.kind}({self.name})"
        return f"{self.kind}({self.name}: {', '.join(map(repr, self.children))})"


class Condition(Node):
    kind = "Condition"

    def __init__(self, name: str, fn: Callable[[Any], bool]):
        super().__init__(name)
        self.fn = fn

    def _tick(self, bb, log, path):
        return SUCCESS if self.fn(bb) else FAILURE


class Action(Node):
    """Leaf running a callback that returns a Status.

    ``on_halt`` is invoked when a running action is interrupted.
    """

    kind = "Action"

    def __init__(self, name: str, fn: Callable[[Any], Status], on_halt: Callable[[Any], None] | None = None):
        super().__init__(name)
        self.fn = fn
        self.on_halt = on_halt
        self.running = False
        self._bb = None

    def _tick(self, bb, log, path):
        self._bb = bb
        status = self.fn(bb)
        self.running = status is RUNNING
        return status

    def halt(self) -> None:
        if self.running and self.on_halt is not None:
            self.on_halt(self._bb)
        self.running = False


class Sequence(Node):
    """Sequence with memory: a running child is resumed on the next tick."""

    kind = "Sequence"

    def __init__(self, name, children):
        super().__init__(name, children)
        self.index = 0

    def _tick(self, bb, log, path):
        while self.index < len(self.children):
            status = self.children[self.index].tick(bb, log, path)
            if status is RUNNING:
                return RUNNING
            if status is FAILURE:
                self.index = 0
                return FAILURE
            self.index += 1
        self.index = 0
        return SUCCESS

    def halt(self) -> None:
        super().halt()
        self.index = 0


class ReactiveSequence(Node):
    """Ticks every child from the first one on each tick."""

    kind = "ReactiveSequence"

    def _tick(self, bb, log, path):
        for i, child in enumerate(self.children):
            status = child.tick(bb, log, path)
            if status is SUCCESS:
                continue
            # children after the one that stopped us must not keep running
            for later in self.children[i + 1 :]:
                later.halt()
            return status
        return SUCCESS


class Fallback(Node):
    """Tries children in order; a running child is resumed on the next tick."""

    kind = "Fallback"

    def __init__(self, name, children):
        super().__init__(name, children)
        self.index = 0

    def _tick(self, bb, log, path):
        while self.index < len(self.children):
            status = self.children[self.index].tick(bb, log, path)
            if status is RUNNING:
                return RUNNING
            if status is SUCCESS:
                self.index = 0
                return SUCCESS
            self.index += 1
        self.index = 0
        return FAILURE

    def halt(self) -> None:
        super().halt()
        self.index = 0


class Repeat(Node):
    """Re-ticks its child until ``stop(bb)`` holds.

    One successful child cycle per tick: after a success the node reports
    Running unless the stop predicate is now true.
    """

    kind = "Repeat"

    def __init__(self, name, child: Node, stop: Callable[[Any], bool]):
        super().__init__(name, [child])
        self.stop = stop
        self.count = 0

    def _tick(self, bb, log, path):
        if self.stop(bb):
            return SUCCESS
        status = self.children[0].tick(bb, log, path)
        if status is FAILURE:
            return FAILURE
        if status is SUCCESS:
            self.count += 1
            return SUCCESS if self.stop(bb) else RUNNING
        return RUNNING


class ForceFailure(Node):
    kind = "ForceFailure"

    def __init__(self, name, child: Node):
        super().__init__(name, [child])

    def _tick(self, bb, log, path):
        status = self.children[0].tick(bb, log, path)
        return RUNNING if status is RUNNING else FAILURE


def tick(tree: Node, bb: Any, log: list | None = None) -> Status:
    """One depth-first traversal of ``tree``."""
    return tree.tick(bb, log)
