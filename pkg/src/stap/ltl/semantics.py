"""Direct finite-trace semantics, used as the ground truth for the automaton."""

from __future__ import annotations

from typing import AbstractSet, Sequence

from .formula import (
    ALWAYS,
    AND,
    EVENTUALLY,
    FALSE_OP,
    IFF,
    IMPLIES,
    NEXT,
    NOT,
    OR,
    PROP,
    RELEASE,
    TRUE_OP,
    UNTIL,
    WNEXT,
    Formula,
    to_nnf,
)
from .progression import empty_sat

Word = Sequence[AbstractSet[str]]


def eval_word(f: Formula, w: Word) -> bool:
    """True iff the finite word ``w`` satisfies ``f``.

    Next is strong (false at the last position); its dual, weak next, is
    true there. For the empty word the value is :func:`empty_sat` of the
    negation normal form.
    """
    if len(w) == 0:
        return empty_sat(to_nnf(f))
    memo: dict[tuple[Formula, int], bool] = {}
    return _holds(f, w, 0, memo)


def _holds(f: Formula, w: Word, i: int, memo: dict) -> bool:
    key = (f, i)
    hit = memo.get(key)
    if hit is not None:
        return hit
    n = len(w)
    op = f.op
    if op == TRUE_OP:
        val = True
    elif op == FALSE_OP:
        val = False
    elif op == PROP:
        val = f.name in w[i]
    elif op == NOT:
        val = not _holds(f.args[0], w, i, memo)
    elif op == AND:
        val = all(_holds(a, w, i, memo) for a in f.args)
    elif op == OR:
        val = any(_holds(a, w, i, memo) for a in f.args)
    elif op == IMPLIES:
        val = (not _holds(f.args[0], w, i, memo)) or _holds(f.args[1], w, i, memo)
    elif op == IFF:
        val = _holds(f.args[0], w, i, memo) == _holds(f.args[1], w, i, memo)
    elif op == NEXT:
        val = i + 1 < n and _holds(f.args[0], w, i + 1, memo)
    elif op == WNEXT:
        val = i + 1 >= n or _holds(f.args[0], w, i + 1, memo)
    elif op == UNTIL:
        g, h = f.args
        val = any(
            _holds(h, w, k, memo) and all(_holds(g, w, j, memo) for j in range(i, k))
            for k in range(i, n)
        )
    elif op == RELEASE:
        g, h = f.args
        val = all(
            _holds(h, w, k, memo) or any(_holds(g, w, j, memo) for j in range(i, k))
            for k in range(i, n)
        )
    elif op == EVENTUALLY:
        val = any(_holds(f.args[0], w, k, memo) for k in range(i, n))
    elif op == ALWAYS:
        val = all(_holds(f.args[0], w, k, memo) for k in range(i, n))
    else:
        raise ValueError(f"unknown operator {op!r}")
    memo[key] = val
    return val
