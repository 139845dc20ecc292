"""Finite-LTL abstract syntax, negation normal form and canonical form."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

from ..errors import NotInNNF

# operator tags
TRUE_OP = "true"
FALSE_OP = "false"
PROP = "prop"
NOT = "not"
AND = "and"
OR = "or"
IMPLIES = "implies"
IFF = "iff"
NEXT = "next"
WNEXT = "wnext"
UNTIL = "until"
RELEASE = "release"
EVENTUALLY = "eventually"
ALWAYS = "always"

UNARY = frozenset({NOT, NEXT, WNEXT, EVENTUALLY, ALWAYS})
BINARY = frozenset({IMPLIES, IFF, UNTIL, RELEASE})
NARY = frozenset({AND, OR})


class Formula:
    """Immutable formula node.

    ``op`` is one of the tag constants of this module, ``args`` holds the
    child formulas and ``name`` the proposition name for ``prop`` nodes.
    And/Or nodes may carry more than two children.
    """

    __slots__ = ("op", "args", "name", "_hash", "_key")

    def __init__(self, op: str, args: tuple[Formula, ...] = (), name: str = ""):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash((op, name, self.args)))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, key, value):
        raise AttributeError("Formula is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Formula) or self._hash != other._hash:
            return False
        return self.op == other.op and self.name == other.name and self.args == other.args

    def __reduce__(self):
        return (Formula, (self.op, self.args, self.name))

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    @property
    def sort_key(self) -> str:
        """Total order used when sorting And/Or children."""
        if self._key is None:
            object.__setattr__(self, "_key", _render(self))
        return self._key

    def is_literal(self) -> bool:
        return self.op == PROP or (self.op == NOT and self.args[0].op == PROP)


TRUE = Formula(TRUE_OP)
FALSE = Formula(FALSE_OP)


def Prop(name: str) -> Formula:
    return Formula(PROP, (), name)


def Not(f: Formula) -> Formula:
    return Formula(NOT, (f,))


def And(*fs: Formula) -> Formula:
    if len(fs) == 1:
        return fs[0]
    return Formula(AND, fs)


def Or(*fs: Formula) -> Formula:
    if len(fs) == 1:
        return fs[0]
    return Formula(OR, fs)


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula(IMPLIES, (a, b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Formula(IFF, (a, b))


def Next(f: Formula) -> Formula:
    return Formula(NEXT, (f,))


def WeakNext(f: Formula) -> Formula:
    """Next that also holds at the last position of a trace."""
    return Formula(WNEXT, (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula(UNTIL, (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula(RELEASE, (a, b))


def Eventually(f: Formula) -> Formula:
    return Formula(EVENTUALLY, (f,))


def Always(f: Formula) -> Formula:
    return Formula(ALWAYS, (f,))


# residuals for "at least one more letter follows" / "the trace ends here"
NONEMPTY = Eventually(TRUE)
EMPTY = Always(FALSE)


def propositions(f: Formula) -> frozenset[str]:
    """All proposition names mentioned in ``f``."""
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.op == PROP:
            out.add(g.name)
        stack.extend(g.args)
    return frozenset(out)


def depth(f: Formula) -> int:
    if not f.args:
        return 0
    return 1 + max(depth(a) for a in f.args)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_UNARY_TOKEN = {NOT: "!", NEXT: "X", EVENTUALLY: "<>", ALWAYS: "[]"}
_BINARY_TOKEN = {
    AND: "&&",
    OR: "||",
    IMPLIES: "->",
    IFF: "<->",
    UNTIL: "U",
    RELEASE: "R",
}


def to_text(f: Formula) -> str:
    """Render ``f`` in the concrete syntax accepted by :func:`stap.ltl.parse`.

    Binary nodes are always parenthesized, so the output re-parses to the
    same tree. A weak next has no token of its own and prints as ``!X!``.
    """
    return f.sort_key


def _render(f: Formula) -> str:
    op = f.op
    if op == TRUE_OP:
        return "true"
    if op == FALSE_OP:
        return "false"
    if op == PROP:
        return f.name
    if op == WNEXT:
        return "!X!" + f.args[0].sort_key
    if op in _UNARY_TOKEN:
        sep = " " if op == NEXT else ""
        return _UNARY_TOKEN[op] + sep + f.args[0].sort_key
    tok = _BINARY_TOKEN[op]
    return "(" + f" {tok} ".join(a.sort_key for a in f.args) + ")"


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def to_nnf(f: Formula) -> Formula:
    """Push negations down to propositions and expand ->, <->.

    Eventually/Always are kept as operators; they are already in NNF.
    """
    return _nnf(f, False)


@lru_cache(maxsize=None)
def _nnf(f: Formula, neg: bool) -> Formula:
    op = f.op
    if op == TRUE_OP:
        return FALSE if neg else TRUE
    if op == FALSE_OP:
        return TRUE if neg else FALSE
    if op == PROP:
        return Not(f) if neg else f
    if op == NOT:
        return _nnf(f.args[0], not neg)
    if op == AND:
        kids = tuple(_nnf(a, neg) for a in f.args)
        return Formula(OR if neg else AND, kids)
    if op == OR:
        kids = tuple(_nnf(a, neg) for a in f.args)
        return Formula(AND if neg else OR, kids)
    if op == IMPLIES:
        a, b = f.args
        if neg:
            return And(_nnf(a, False), _nnf(b, True))
        return Or(_nnf(a, True), _nnf(b, False))
    if op == IFF:
        a, b = f.args
        if neg:
            return Or(And(_nnf(a, False), _nnf(b, True)), And(_nnf(a, True), _nnf(b, False)))
        return Or(And(_nnf(a, False), _nnf(b, False)), And(_nnf(a, True), _nnf(b, True)))
    if op == NEXT:
        inner = _nnf(f.args[0], neg)
        return WeakNext(inner) if neg else Next(inner)
    if op == WNEXT:
        inner = _nnf(f.args[0], neg)
        return Next(inner) if neg else WeakNext(inner)
    if op == UNTIL:
        a, b = f.args
        if neg:
            return Release(_nnf(a, True), _nnf(b, True))
        return Until(_nnf(a, False), _nnf(b, False))
    if op == RELEASE:
        a, b = f.args
        if neg:
            return Until(_nnf(a, True), _nnf(b, True))
        return Release(_nnf(a, False), _nnf(b, False))
    if op == EVENTUALLY:
        inner = _nnf(f.args[0], neg)
        return Always(inner) if neg else Eventually(inner)
    if op == ALWAYS:
        inner = _nnf(f.args[0], neg)
        return Eventually(inner) if neg else Always(inner)
    raise ValueError(f"unknown operator {op!r}")


@lru_cache(maxsize=None)
def empty_sat(f: Formula) -> bool:
    """Whether ``f`` (in NNF) is satisfied by the empty remainder of a trace."""
    op = f.op
    if op == TRUE_OP:
        return True
    if op in (FALSE_OP, PROP, NOT, NEXT, UNTIL, EVENTUALLY):
        return False
    if op in (RELEASE, ALWAYS, WNEXT):
        return True
    if op == AND:
        return all(empty_sat(a) for a in f.args)
    if op == OR:
        return any(empty_sat(a) for a in f.args)
    raise NotInNNF(f"operator {op!r} is not allowed in negation normal form")


def is_nnf(f: Formula) -> bool:
    if f.op == NOT:
        return f.args[0].op == PROP
    if f.op in (IMPLIES, IFF):
        return False
    return all(is_nnf(a) for a in f.args)


# A residual in disjunctive normal form is a set of clauses; each clause is
# a frozenset of atoms (literals or temporal nodes). No clauses means false,
# one empty clause means true.
Dnf = frozenset  # frozenset[frozenset[Formula]]

DNF_TRUE: Dnf = frozenset({frozenset()})
DNF_FALSE: Dnf = frozenset()


def _absorb(clauses: set[frozenset]) -> Dnf:
    ordered = sorted(clauses, key=len)
    kept: list[frozenset] = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _consistent(clause: frozenset) -> bool:
    ends = EMPTY in clause
    for a in clause:
        if a.op == NOT and a.args[0] in clause:
            return False
        # "trace ends here" contradicts every atom that needs another letter
        if ends and not empty_sat(a):
            return False
    return True


def dnf_or(*parts: Dnf) -> Dnf:
    out: set[frozenset] = set()
    for p in parts:
        if DNF_TRUE == p:
            return DNF_TRUE
        out |= p
    return _absorb(out)


def dnf_and(*parts: Dnf) -> Dnf:
    acc: set[frozenset] = {frozenset()}
    for p in parts:
        if not p:
            return DNF_FALSE
        acc = {c | d for c in acc for d in p}
        acc = {c for c in acc if _consistent(c)}
        if not acc:
            return DNF_FALSE
    return _absorb(acc)


def atom(f: Formula) -> Dnf:
    return frozenset({frozenset({f})})


def from_dnf(clauses: Dnf) -> Formula:
    """Build the canonical formula of a clause set: a sorted Or of sorted Ands."""
    if not clauses:
        return FALSE
    terms = []
    for c in clauses:
        if not c:
            return TRUE
        kids = sorted(c, key=lambda g: g.sort_key)
        terms.append(kids[0] if len(kids) == 1 else Formula(AND, tuple(kids)))
    if len(terms) == 1:
        return terms[0]
    return Formula(OR, tuple(sorted(terms, key=lambda g: g.sort_key)))


@lru_cache(maxsize=None)
def to_dnf(f: Formula) -> Dnf:
    """Clause set of an NNF formula; arguments of temporal atoms are canonical."""
    op = f.op
    if op == TRUE_OP:
        return DNF_TRUE
    if op == FALSE_OP:
        return DNF_FALSE
    if op in (PROP, NOT):
        return atom(f)
    if op == AND:
        return dnf_and(*(to_dnf(a) for a in f.args))
    if op == OR:
        return dnf_or(*(to_dnf(a) for a in f.args))
    kids = tuple(from_dnf(to_dnf(a)) for a in f.args)
    # only rewrites that keep both the non-empty semantics and empty_sat
    if op == UNTIL and kids[1].op == FALSE_OP:
        return DNF_FALSE
    if op == RELEASE and kids[1].op == TRUE_OP:
        return DNF_TRUE
    if op == EVENTUALLY and kids[0].op == FALSE_OP:
        return DNF_FALSE
    if op == ALWAYS and kids[0].op == TRUE_OP:
        return DNF_TRUE
    if op in (IMPLIES, IFF):
        raise ValueError("to_dnf expects negation normal form")
    return atom(Formula(op, kids))


def canonical(f: Formula) -> Formula:
    """Canonical form: NNF, then a DNF over temporal atoms with sorted,
    deduplicated, absorbed clauses and boolean identities applied."""
    return from_dnf(to_dnf(to_nnf(f)))
