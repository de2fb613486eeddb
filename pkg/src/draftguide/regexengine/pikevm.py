"""Reference NFA simulation (Pike VM).

Thread-set simulation of the compiled program: worst case
O(len(text) * len(program)) with no backtracking, for any pattern the
dialect admits.  This is the semantic reference; the DFA backend must
agree with it everywhere.
"""

from __future__ import annotations

from . import parser
from .program import Program

_WORD_FLAT = tuple(b for lo, hi in parser.WORD for b in (lo, hi + 1))


def _is_word(text: str, index: int) -> bool:
    if index < 0 or index >= len(text):
        return False
    import bisect

    return bool(bisect.bisect_right(_WORD_FLAT, ord(text[index])) & 1)


def _assert_holds(kind: str, text: str, pos: int) -> bool:
    if kind == parser.TEXT_START:
        return pos == 0
    if kind == parser.TEXT_END:
        return pos == len(text)
    if kind == parser.LINE_END:
        return pos == len(text) or (pos == len(text) - 1 and text[pos] == "\n")
    at_boundary = _is_word(text, pos - 1) != _is_word(text, pos)
    if kind == parser.WORD_BOUNDARY:
        return at_boundary
    return not at_boundary


def search(program: Program, text: str) -> bool:
    """True iff the pattern matches anywhere in ``text``."""
    instructions = program.instructions
    n = len(instructions)
    seen = [0] * n
    generation = 0

    def add(pc: int, pos: int, threads: list[int]) -> bool:
        # Follow epsilon edges; True means a match completed at pos.
        stack = [pc]
        while stack:
            p = stack.pop()
            if seen[p] == generation:
                continue
            seen[p] = generation
            op = instructions[p]
            tag = op[0]
            if tag == "char":
                threads.append(p)
            elif tag == "split":
                stack.append(op[2])
                stack.append(op[1])
            elif tag == "jmp":
                stack.append(op[1])
            elif tag == "assert":
                if _assert_holds(op[1], text, pos):
                    stack.append(p + 1)
            else:  # match
                return True
        return False

    generation += 1
    current: list[int] = []
    if add(0, 0, current):
        return True
    for pos, ch in enumerate(text):
        code = ord(ch)
        generation += 1
        following: list[int] = []
        for pc in current:
            if program.matcher_accepts(instructions[pc][1], code):
                if add(pc + 1, pos + 1, following):
                    return True
        current = following
    return False
