"""Recursive-descent parser for the text syntax of finite-LTL formulas.

Precedence, tightest first: unary ``! X <> []``; ``U``/``R`` (right
associative); ``&&``; ``||``; ``->`` (right associative); ``<->``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    FALSE,
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Release,
    Until,
)

KEYWORDS = {"X", "U", "R", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|->|&&|\|\||<>|\[\]|!|\(|\))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


class LTLSyntaxError(SyntaxError):
    """Raised on malformed formula text.

    ``position`` is the byte offset of the offending token in the UTF-8
    encoded input and ``expected`` lists the tokens that would have been
    accepted there.
    """

    def __init__(self, message: str, text: str, position: int, expected: list[str]):
        self.position = position
        self.expected = list(expected)
        self.source_text = text
        super().__init__(f"{message} at byte {position}; expected one of: {', '.join(expected)}")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "op", "ident", "end"
    value: str
    pos: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise LTLSyntaxError(
                f"unexpected character {text[i]!r}",
                text,
                len(text[:i].encode()),
                ["atom", "operator", "("],
            )
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), len(text[:i].encode())))
        i = m.end()
    toks.append(_Tok("end", "", len(text.encode())))
    return toks


_PRIMARY_START = ["atom", "true", "false", "(", "!", "X", "<>", "[]"]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, value: str) -> bool:
        t = self.tok
        return t.kind != "end" and t.value == value

    def fail(self, expected: list[str]):
        t = self.tok
        where = "end of input" if t.kind == "end" else repr(t.value)
        raise LTLSyntaxError(f"unexpected {where}", self.text, t.pos, expected)

    def parse(self) -> Formula:
        f = self.iff()
        if self.tok.kind != "end":
            self.fail(["&&", "||", "->", "<->", "U", "R", "end of input"])
        return f

    def iff(self) -> Formula:
        left = self.implies()
        while self.at("<->"):
            self.i += 1
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disj()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.implies())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.at("||"):
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.binary_temporal()
        while self.at("&&"):
            self.i += 1
            left = And(left, self.binary_temporal())
        return left

    def binary_temporal(self) -> Formula:
        left = self.unary()
        if self.at("U"):
            self.i += 1
            return Until(left, self.binary_temporal())
        if self.at("R"):
            self.i += 1
            return Release(left, self.binary_temporal())
        return left

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "end":
            self.fail(_PRIMARY_START)
        v = t.value
        if v == "!":
            self.i += 1
            return Not(self.unary())
        if v == "X":
            self.i += 1
            return Next(self.unary())
        if v == "<>":
            self.i += 1
            return Eventually(self.unary())
        if v == "[]":
            self.i += 1
            return Always(self.unary())
        if v == "(":
            self.i += 1
            inner = self.iff()
            if not self.at(")"):
                self.fail([")", "&&", "||", "->", "<->", "U", "R"])
            self.i += 1
            return inner
        if t.kind == "ident" and v not in KEYWORDS:
            self.i += 1
            return Prop(v)
        if v == "true":
            self.i += 1
            return TRUE
        if v == "false":
            self.i += 1
            return FALSE
        self.fail(_PRIMARY_START)


def parse(text: str) -> Formula:
    """Parse formula text into a :class:`Formula` tree (binary And/Or)."""
    if not text or not text.strip():
        raise LTLSyntaxError("empty formula", text or "", 0, _PRIMARY_START)
    return _Parser(text).parse()
