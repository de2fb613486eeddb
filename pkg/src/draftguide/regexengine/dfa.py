"""Table-driven DFA backend.

Subset construction over the NFA program, with the alphabet compressed
to the equivalence classes induced by the pattern's character sets.
End-of-text behaviour is captured per state:

* ``accept_now``  a match completed with no pending end assertion
* ``accept_end``  a match completes if the text ends here
* ``accept_eol``  a match completes just before a trailing newline

Word-boundary patterns are not eligible (the Pike VM handles those);
construction also aborts past a state cap, falling back likewise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import parser
from .program import Program

MAX_DFA_STATES = 4096

_MID, _AT_END, _BEFORE_FINAL_NEWLINE = 0, 1, 2


class DfaUnsupported(Exception):
    """Program cannot take the DFA fast path."""


@dataclass
class Dfa:
    table: np.ndarray        # int32 [n_states, n_classes]
    accept_now: np.ndarray   # uint8 [n_states]
    accept_end: np.ndarray   # uint8 [n_states]
    accept_eol: np.ndarray   # uint8 [n_states]
    class_bounds: np.ndarray  # uint32 boundaries; class = searchsorted(...) - 1
    start: int


def _class_boundaries(program: Program) -> np.ndarray:
    bounds = {0}
    for ranges in program.matchers:
        for lo, hi in ranges:
            bounds.add(lo)
            if hi + 1 <= parser.MAX_CODEPOINT:
                bounds.add(hi + 1)
    return np.array(sorted(bounds), dtype=np.uint32)


def _closure(program: Program, pcs, at_start: bool, end_kind: int):
    """Epsilon closure.  Returns (char_pcs, matched, pending_end_pcs).

    ``pending_end_pcs`` are the positions of end assertions that were
    blocked because ``end_kind`` did not satisfy them; re-running the
    closure from those under an end context decides final acceptance.
    """
    instructions = program.instructions
    seen = set()
    stack = list(pcs)
    chars = set()
    pending = set()
    matched = False
    while stack:
        pc = stack.pop()
        if pc in seen:
            continue
        seen.add(pc)
        op = instructions[pc]
        tag = op[0]
        if tag == "char":
            chars.add(pc)
        elif tag == "split":
            stack.append(op[1])
            stack.append(op[2])
        elif tag == "jmp":
            stack.append(op[1])
        elif tag == "assert":
            kind = op[1]
            if kind == parser.TEXT_START:
                if at_start:
                    stack.append(pc + 1)
            elif kind == parser.TEXT_END:
                if end_kind == _AT_END:
                    stack.append(pc + 1)
                else:
                    pending.add(pc)
            elif kind == parser.LINE_END:
                if end_kind in (_AT_END, _BEFORE_FINAL_NEWLINE):
                    stack.append(pc + 1)
                else:
                    pending.add(pc)
            else:  # pragma: no cover - guarded by eligibility check
                raise DfaUnsupported("word boundary")
        else:  # match
            matched = True
    return frozenset(chars), matched, frozenset(pending)


def build(program: Program) -> Dfa:
    if program.has_word_boundary:
        raise DfaUnsupported("word boundary assertions need the NFA path")

    class_bounds = _class_boundaries(program)
    n_classes = len(class_bounds)
    representatives = class_bounds  # first code of each class
    instructions = program.instructions

    matcher_by_class = {}

    def accepts(matcher_index: int, class_id: int) -> bool:
        key = (matcher_index, class_id)
        hit = matcher_by_class.get(key)
        if hit is None:
            hit = program.matcher_accepts(matcher_index, int(representatives[class_id]))
            matcher_by_class[key] = hit
        return hit

    newline = ord("\n")

    def end_flags(chars, matched: bool, pending, at_start: bool) -> tuple[bool, bool, bool]:
        # A pending end assertion may be followed by ^, which still
        # holds at position 0 (empty text), so at_start is part of the
        # state identity.
        now = matched
        _, at_end, _ = _closure(program, pending, at_start, _AT_END)
        eol_chars, at_eol, _ = _closure(program, pending, at_start, _BEFORE_FINAL_NEWLINE)
        if not (now or at_eol):
            # "$" can pass just before a trailing newline and the rest
            # of the pattern then consume that newline.
            for pc in eol_chars:
                if program.matcher_accepts(instructions[pc][1], newline):
                    _, done, _ = _closure(program, [pc + 1], False, _AT_END)
                    if done:
                        at_eol = True
                        break
        return now, now or at_end, now or at_eol

    start_key = (*_closure(program, [0], True, _MID), True)
    states: dict[tuple, int] = {start_key: 0}
    order = [start_key]
    rows: list[list[int]] = []
    flags: list[tuple[bool, bool, bool]] = [end_flags(*start_key)]

    i = 0
    while i < len(order):
        chars = order[i][0]
        row = []
        for class_id in range(n_classes):
            moved = [pc + 1 for pc in chars if accepts(instructions[pc][1], class_id)]
            key = (*_closure(program, moved, False, _MID), False)
            target = states.get(key)
            if target is None:
                if len(states) >= MAX_DFA_STATES:
                    raise DfaUnsupported("state cap exceeded")
                target = len(states)
                states[key] = target
                order.append(key)
                flags.append(end_flags(*key))
            row.append(target)
        rows.append(row)
        i += 1

    return Dfa(
        table=np.array(rows, dtype=np.int32),
        accept_now=np.array([f[0] for f in flags], dtype=np.uint8),
        accept_end=np.array([f[1] for f in flags], dtype=np.uint8),
        accept_eol=np.array([f[2] for f in flags], dtype=np.uint8),
        class_bounds=class_bounds,
        start=0,
    )


def _walk_python(table, accept_now, accept_end, accept_eol, classes, start, eol_pos):
    state = start
    if accept_now[state]:
        return True
    for i in range(classes.shape[0]):
        if i == eol_pos and accept_eol[state]:
            return True
        state = table[state, classes[i]]
        if accept_now[state]:
            return True
    return bool(accept_end[state])


_walk = None


def _walker():
    global _walk
    if _walk is None:
        try:
            from numba import njit

            _walk = njit(cache=True, nogil=True)(_walk_python)
        except ImportError:  # pragma: no cover - numba is a declared dependency
            _walk = _walk_python
    return _walk


def warm_up() -> None:
    """Force the jitted walker to compile (first call is slow otherwise)."""
    walk = _walker()
    table = np.zeros((1, 1), dtype=np.int32)
    flag = np.zeros(1, dtype=np.uint8)
    walk(table, flag, flag, flag, np.zeros(1, dtype=np.int32), 0, -1)


def search(dfa: Dfa, text: str) -> bool:
    if not text:
        return bool(dfa.accept_end[dfa.start])
    codes = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)
    classes = (np.searchsorted(dfa.class_bounds, codes, side="right") - 1).astype(np.int32)
    eol_pos = len(text) - 1 if text[-1] == "\n" else -1
    walk = _walker()
    return bool(
        walk(dfa.table, dfa.accept_now, dfa.accept_end, dfa.accept_eol, classes, dfa.start, eol_pos)
    )
