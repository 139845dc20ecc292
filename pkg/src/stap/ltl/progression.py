"""Formula progression: one-letter residuals and end-of-trace acceptance."""

from __future__ import annotations

from functools import lru_cache
from typing import AbstractSet

from ..errors import NotInNNF
from .formula import (
    ALWAYS,
    DNF_FALSE,
    DNF_TRUE,
    EMPTY,
    EVENTUALLY,
    NEXT,
    NONEMPTY,
    NOT,
    PROP,
    RELEASE,
    UNTIL,
    WNEXT,
    Dnf,
    Formula,
    atom,
    dnf_and,
    dnf_or,
    empty_sat,
    from_dnf,
    is_nnf,
    to_dnf,
)

__all__ = ["empty_sat", "progress", "progress_dnf"]


def progress(f: Formula, letter: AbstractSet[str]) -> Formula:
    """Canonical residual of ``f`` after reading one letter.

    For every word ``w``: ``eval_word(f, [letter] + w) == eval_word(progress(f, letter), w)``.
    """
    if not is_nnf(f):
        raise NotInNNF(f"{f} is not in negation normal form")
    return from_dnf(progress_dnf(to_dnf(f), frozenset(letter)))


def progress_dnf(clauses: Dnf, letter: frozenset) -> Dnf:
    return dnf_or(*(dnf_and(*(_progress_atom(a, letter) for a in c)) for c in clauses))


def _progress_formula(f: Formula, letter: frozenset) -> Dnf:
    return progress_dnf(to_dnf(f), letter)


@lru_cache(maxsize=1 << 18)
def _progress_atom(f: Formula, letter: frozenset) -> Dnf:
    op = f.op
    if op == PROP:
        return DNF_TRUE if f.name in letter else DNF_FALSE
    if op == NOT:
        return DNF_FALSE if f.args[0].name in letter else DNF_TRUE
    if op == NEXT:
        g = f.args[0]
        # strong next: the remainder must not be empty
        if empty_sat(g):
            return dnf_and(to_dnf(g), atom(NONEMPTY))
        return to_dnf(g)
    if op == WNEXT:
        g = f.args[0]
        if empty_sat(g):
            return to_dnf(g)
        return dnf_or(to_dnf(g), atom(EMPTY))
    if op == UNTIL:
        g, h = f.args
        return dnf_or(_progress_formula(h, letter), dnf_and(_progress_formula(g, letter), atom(f)))
    if op == RELEASE:
        g, h = f.args
        return dnf_and(_progress_formula(h, letter), dnf_or(_progress_formula(g, letter), atom(f)))
    if op == EVENTUALLY:
        return dnf_or(_progress_formula(f.args[0], letter), atom(f))
    if op == ALWAYS:
        return dnf_and(_progress_formula(f.args[0], letter), atom(f))
    raise NotInNNF(f"unexpected atom {f}")
