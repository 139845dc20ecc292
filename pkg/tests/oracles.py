"""Independent reference implementations used by the tests.

Nothing here calls into the planner's own semantics or product code, so a
bug shared between the two would have to be written twice.
"""

from __future__ import annotations

import itertools
import random
from collections import deque

from stap.ltl import (
    FALSE,
    TRUE,
    Always,
    And,
    Eventually,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Release,
    Until,
    WeakNext,
)


def empty(f, positive=True) -> bool:
    """Verdict on the empty word, read through negation normal form.

    Literals are false on the empty word whatever their polarity, so
    negation is not simply complement here.
    """
    op, pos = f.op, positive
    if op == "true":
        return pos
    if op == "false":
        return not pos
    if op == "prop":
        return False
    if op == "not":
        return empty(f.args[0], not pos)
    if op in ("and", "or"):
        conj = (op == "and") == pos
        vals = [empty(g, pos) for g in f.args]
        return all(vals) if conj else any(vals)
    if op == "implies":
        x, y = f.args
        return (empty(x, False) or empty(y, True)) if pos else (empty(x, True) and empty(y, False))
    if op == "iff":
        x, y = f.args
        if pos:
            return (empty(x, True) and empty(y, True)) or (empty(x, False) and empty(y, False))
        return (empty(x, True) and empty(y, False)) or (empty(x, False) and empty(y, True))
    # X, U, <> are false on the empty word; their duals are true
    return pos == (op in ("wnext", "release", "always"))


def holds(f, w, i=0) -> bool:
    """Finite-trace satisfaction of ``f`` at position ``i`` of ``w`` (strong next)."""
    op, n = f.op, len(w)
    if n == 0:
        return empty(f)
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "prop":
        return i < n and f.name in w[i]
    if op == "not":
        return not holds(f.args[0], w, i)
    if op == "and":
        return all(holds(g, w, i) for g in f.args)
    if op == "or":
        return any(holds(g, w, i) for g in f.args)
    if op == "implies":
        return (not holds(f.args[0], w, i)) or holds(f.args[1], w, i)
    if op == "iff":
        return holds(f.args[0], w, i) == holds(f.args[1], w, i)
    if op == "next":
        return i + 1 < n and holds(f.args[0], w, i + 1)
    if op == "wnext":
        return i + 1 >= n or holds(f.args[0], w, i + 1)
    if op == "eventually":
        return any(holds(f.args[0], w, j) for j in range(i, n))
    if op == "always":
        return all(holds(f.args[0], w, j) for j in range(i, n))
    a, b = f.args
    if op == "until":
        return any(holds(b, w, j) and all(holds(a, w, k) for k in range(i, j)) for j in range(i, n))
    if op == "release":
        # dual of until; vacuously true past the end of the word
        return all(holds(b, w, j) or any(holds(a, w, k) for k in range(i, j)) for j in range(i, n))
    raise ValueError(op)


PROPS = ("a", "b", "c")


def random_formula(rng: random.Random, depth: int, props=PROPS, weak_next: bool = True):
    if depth == 0 or rng.random() < 0.25:
        c = rng.random()
        if c < 0.08:
            return TRUE
        if c < 0.14:
            return FALSE
        p = Prop(rng.choice(props))
        return Not(p) if rng.random() < 0.3 else p
    sub = lambda: random_formula(rng, depth - 1, props, weak_next)  # noqa: E731
    kinds = ["and", "or", "X", "U", "R", "F", "G", "not", "imp", "iff"] + (["WX"] if weak_next else [])
    kind = rng.choice(kinds)
    if kind == "and":
        return And(sub(), sub())
    if kind == "or":
        return Or(sub(), sub())
    if kind == "X":
        return Next(sub())
    if kind == "WX":
        return WeakNext(sub())
    if kind == "U":
        return Until(sub(), sub())
    if kind == "R":
        return Release(sub(), sub())
    if kind == "F":
        return Eventually(sub())
    if kind == "G":
        return Always(sub())
    if kind == "not":
        return Not(sub())
    if kind == "imp":
        return Implies(sub(), sub())
    return Iff(sub(), sub())


def all_letters(props=PROPS):
    return [frozenset(c) for k in range(len(props) + 1) for c in itertools.combinations(props, k)]


def all_words(letters, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


def reference_product(nfa, ts, roots):
    """Breadth-first product closure straight from the edge condition."""
    states, edges = set(roots), set()
    todo = deque(roots)
    while todo:
        q, s = todo.popleft()
        q2 = nfa.step(q, ts.labels[s])
        for (a, b) in ts.edges:
            if a != s:
                continue
            v = (q2, b)
            edges.add(((q, s), v))
            if v not in states:
                states.add(v)
                todo.append(v)
    return frozenset(states), frozenset(edges)


def walks(ts, start, max_edges):
    """Every TS walk from ``start`` with at most ``max_edges`` edges, as (states, cost)."""
    out = [((start,), 0.0)]
    frontier = [((start,), 0.0)]
    for _ in range(max_edges):
        nxt = []
        for path, cost in frontier:
            s = path[-1]
            for (a, b), e in ts.edges.items():
                if a == s:
                    nxt.append((path + (b,), cost + e.cost))
        out.extend(nxt)
        frontier = nxt
    return out


def walk_word(ts, path):
    """Source-state labels consumed along a walk."""
    return [ts.labels[s] for s in path[:-1]]
