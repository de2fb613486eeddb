"""Compile the parsed AST into a flat NFA instruction list.

Instructions (absolute jump targets):

* ``("char", matcher_index)``  consume one scalar the matcher accepts
* ``("split", a, b)``          continue at both a and b
* ``("jmp", a)``               continue at a
* ``("assert", kind)``         zero-width position test, fall through
* ``("match",)``               accept

Instruction 0 is an implicit unanchored-search loop (try the pattern at
the current position, or consume any scalar and retry), so a single
pass over the text answers "does the pattern match anywhere".
"""

from __future__ import annotations

from dataclasses import dataclass

from . import parser
from .parser import (
    ANY,
    Alt,
    Assert,
    Cat,
    CharSet,
    Node,
    Ranges,
    RegexSyntaxError,
    Rep,
)

MAX_PROGRAM = 50_000


@dataclass(frozen=True)
class Program:
    pattern: str
    instructions: tuple[tuple, ...]
    matchers: tuple[Ranges, ...]        # per matcher: sorted inclusive ranges
    flat_bounds: tuple[tuple[int, ...], ...]  # per matcher: [lo0, hi0+1, lo1, ...]
    has_word_boundary: bool

    def matcher_accepts(self, matcher_index: int, code: int) -> bool:
        import bisect

        return bool(bisect.bisect_right(self.flat_bounds[matcher_index], code) & 1)


class _Builder:
    def __init__(self, pattern: str):
        self.pattern = pattern
        self.instructions: list[list] = []
        self.matcher_index: dict[Ranges, int] = {}
        self.matchers: list[Ranges] = []
        self.has_word_boundary = False

    def emit(self, *op) -> int:
        if len(self.instructions) >= MAX_PROGRAM:
            raise RegexSyntaxError("pattern compiles to too many states", self.pattern, 0)
        self.instructions.append(list(op))
        return len(self.instructions) - 1

    def matcher(self, ranges: Ranges) -> int:
        idx = self.matcher_index.get(ranges)
        if idx is None:
            idx = len(self.matchers)
            self.matcher_index[ranges] = idx
            self.matchers.append(ranges)
        return idx

    def build(self, ast: Node) -> Program:
        # Unanchored prefix: 0 tries the pattern, 1..2 consume-and-retry.
        self.emit("split", 3, 1)
        self.emit("char", self.matcher(ANY))
        self.emit("jmp", 0)
        self.node(ast)
        self.emit("match")
        flat = tuple(
            tuple(b for lo, hi in ranges for b in (lo, hi + 1)) for ranges in self.matchers
        )
        return Program(
            pattern=self.pattern,
            instructions=tuple(tuple(op) for op in self.instructions),
            matchers=tuple(self.matchers),
            flat_bounds=flat,
            has_word_boundary=self.has_word_boundary,
        )

    def node(self, n: Node) -> None:
        if isinstance(n, CharSet):
            self.emit("char", self.matcher(n.ranges))
        elif isinstance(n, Assert):
            if n.kind in (parser.WORD_BOUNDARY, parser.NON_WORD_BOUNDARY):
                self.has_word_boundary = True
            self.emit("assert", n.kind)
        elif isinstance(n, Cat):
            for part in n.parts:
                self.node(part)
        elif isinstance(n, Alt):
            self.alternation(n.branches)
        elif isinstance(n, Rep):
            self.repeat(n)
        else:  # pragma: no cover - parser produces no other nodes
            raise AssertionError(f"unknown node {n!r}")

    def alternation(self, branches: tuple[Node, ...]) -> None:
        jumps: list[int] = []
        for i, branch in enumerate(branches):
            last = i == len(branches) - 1
            if not last:
                split = self.emit("split", 0, 0)
                self.instructions[split][1] = len(self.instructions)
            self.node(branch)
            if not last:
                jumps.append(self.emit("jmp", 0))
                self.instructions[split][2] = len(self.instructions)
        end = len(self.instructions)
        for j in jumps:
            self.instructions[j][1] = end

    def repeat(self, n: Rep) -> None:
        # lo required copies, then either a star (unbounded) or
        # (hi - lo) nested optional copies.  Lazy order does not change
        # the matched language, so both compile identically.
        for _ in range(n.lo):
            self.node(n.node)
        if n.hi is None:
            start = self.emit("split", 0, 0)
            self.instructions[start][1] = len(self.instructions)
            self.node(n.node)
            self.emit("jmp", start)
            self.instructions[start][2] = len(self.instructions)
        else:
            splits = []
            for _ in range(n.hi - n.lo):
                split = self.emit("split", 0, 0)
                self.instructions[split][1] = len(self.instructions)
                splits.append(split)
                self.node(n.node)
            end = len(self.instructions)
            for split in splits:
                self.instructions[split][2] = end


def compile_ast(pattern: str, ast: Node) -> Program:
    return _Builder(pattern).build(ast)
