"""Shortest-path search over implicit graphs with deterministic tie-breaking."""

from __future__ import annotations

import heapq
from typing import Callable, Hashable, Iterable, TypeVar

S = TypeVar("S", bound=Hashable)


def dijkstra(
    sources: Iterable[S],
    neighbors: Callable[[S], Iterable[tuple[S, float, object]]],
    is_goal: Callable[[S], bool],
) -> tuple[float, list[S], list[object]] | None:
    """Cheapest path from any source to any goal state.

    ``neighbors(u)`` yields ``(v, cost, tag)`` triples. Heap entries are
    ordered by ``(cost, state)``, so among equally cheap options the
    lexicographically smaller state is settled first; states must therefore
    be mutually comparable (tuples of ints in practice). Returns
    ``(cost, states, tags)`` or None if no goal is reachable.
    """
    dist: dict[S, float] = {}
    parent: dict[S, tuple[S, object] | None] = {}
    heap: list[tuple[float, S]] = []
    for s in sorted(set(sources)):
        dist[s] = 0.0
        parent[s] = None
        heap.append((0.0, s))
    heapq.heapify(heap)
    done: set[S] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if is_goal(u):
            states, tags = [u], []
            while parent[states[-1]] is not None:
                prev, tag = parent[states[-1]]
                states.append(prev)
                tags.append(tag)
            states.reverse()
            tags.reverse()
            return d, states, tags
        for v, c, tag in neighbors(u):
            if c < 0:
                raise ValueError("negative edge cost")
            nd = d + c
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                parent[v] = (u, tag)
                heapq.heappush(heap, (nd, v))
            elif nd == old and v not in done and parent[v] is not None and u < parent[v][0]:
                # equal cost: keep the lexicographically smaller predecessor
                parent[v] = (u, tag)
    return None
