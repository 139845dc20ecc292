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
    WeakNext,
    canonical,
    is_nnf,
    propositions,
    to_nnf,
    to_text,
)
from .nfa import Nfa, build_nfa, nfa_accepts, register_letters
from .parser import LTLSyntaxError, parse
from .progression import empty_sat, progress
from .semantics import eval_word

__all__ = [
    "FALSE",
    "TRUE",
    "Always",
    "And",
    "Eventually",
    "Formula",
    "Iff",
    "Implies",
    "LTLSyntaxError",
    "Next",
    "Nfa",
    "Not",
    "Or",
    "Prop",
    "Release",
    "Until",
    "WeakNext",
    "build_nfa",
    "canonical",
    "empty_sat",
    "eval_word",
    "is_nnf",
    "nfa_accepts",
    "parse",
    "progress",
    "propositions",
    "register_letters",
    "to_nnf",
    "to_text",
]
