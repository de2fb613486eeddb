"""Linear-time regex engine for per-keystroke rule evaluation.

Patterns are parsed into an NFA and run either through a table-driven
DFA (the fast path) or a Pike-VM thread simulation (the reference and
fallback).  Both are immune to catastrophic backtracking by
construction: matching cost is linear in the text length for every
accepted pattern.

Only boolean search is exposed: compose-time rules need "does this
pattern match anywhere", never capture groups.
"""

from __future__ import annotations

from functools import lru_cache

from . import dfa as _dfa
from . import pikevm as _pikevm
from .parser import MAX_REPEAT, RegexSyntaxError, UnsupportedFeatureError, parse
from .program import Program, compile_ast

__all__ = [
    "CompiledPattern",
    "MAX_REPEAT",
    "RegexSyntaxError",
    "UnsupportedFeatureError",
    "compile",
    "warm_up",
]


class CompiledPattern:
    """A compiled pattern; immutable and safe to share across threads."""

    __slots__ = ("pattern", "_program", "_dfa")

    def __init__(self, pattern: str):
        self.pattern = pattern
        self._program = compile_ast(pattern, parse(pattern))
        try:
            self._dfa = _dfa.build(self._program)
        except _dfa.DfaUnsupported:
            self._dfa = None

    def search(self, text: str) -> bool:
        """True iff the pattern matches anywhere in ``text``."""
        if self._dfa is not None:
            return _dfa.search(self._dfa, text)
        return _pikevm.search(self._program, text)

    def search_reference(self, text: str) -> bool:
        """NFA-simulation answer, for cross-checking the fast path."""
        return _pikevm.search(self._program, text)

    def __repr__(self) -> str:
        backend = "dfa" if self._dfa is not None else "nfa"
        return f"CompiledPattern({self.pattern!r}, backend={backend})"


@lru_cache(maxsize=512)
def compile(pattern: str) -> CompiledPattern:
    return CompiledPattern(pattern)


def warm_up() -> None:
    """Pre-compile the jitted DFA walker; optional, saves first-call latency."""
    _dfa.warm_up()
