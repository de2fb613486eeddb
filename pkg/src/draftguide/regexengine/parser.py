"""Parser for the guarded regex dialect.

The dialect is a strict subset of Python's ``re`` syntax chosen so that
every pattern can be evaluated in time linear in the text length:
literals, ``.``, character classes, alternation, grouping, greedy and
lazy quantifiers (``* + ? {m} {m,} {m,n}``), and the zero-width
assertions ``^ $ \\A \\Z \\b \\B``.  Backreferences, lookaround, inline
flags, and named groups are rejected at parse time.

Semantics pinned here (and relied on by the matcher):

* ``^`` matches only at the start of the text; ``$`` matches at the end
  of the text and just before a trailing newline.
* ``.`` never matches a newline; ``\\s`` is Unicode whitespace and does
  include the newline.
* ``\\d`` and ``\\w`` are ASCII (``[0-9]`` and ``[0-9A-Za-z_]``).
* Quantifier counts apply to Unicode scalar values, never bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

MAX_CODEPOINT = 0x10FFFF

# Upper bound for {m,n} counts: keeps compiled programs small while
# comfortably covering real character-limit rules.
MAX_REPEAT = 4096


class RegexSyntaxError(ValueError):
    """Pattern text does not parse under the dialect grammar."""

    def __init__(self, message: str, pattern: str, pos: int):
        super().__init__(f"{message} at position {pos}: {pattern!r}")
        self.pattern = pattern
        self.pos = pos


class UnsupportedFeatureError(RegexSyntaxError):
    """Pattern uses a feature the linear-time dialect excludes."""


Ranges = tuple[tuple[int, int], ...]  # inclusive, sorted, non-overlapping


def _merge(ranges: list[tuple[int, int]]) -> Ranges:
    out: list[tuple[int, int]] = []
    for lo, hi in sorted(ranges):
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def complement(ranges: Ranges) -> Ranges:
    out: list[tuple[int, int]] = []
    prev = 0
    for lo, hi in ranges:
        if lo > prev:
            out.append((prev, lo - 1))
        prev = hi + 1
    if prev <= MAX_CODEPOINT:
        out.append((prev, MAX_CODEPOINT))
    return tuple(out)


def _whitespace_ranges() -> Ranges:
    # U+3000 is the highest Unicode whitespace scalar.
    codes = [c for c in range(0x3001) if chr(c).isspace()]
    return _merge([(c, c) for c in codes])

WHITESPACE: Ranges = _whitespace_ranges()
NON_WHITESPACE: Ranges = complement(WHITESPACE)
DIGIT: Ranges = ((0x30, 0x39),)
NON_DIGIT: Ranges = complement(DIGIT)
WORD: Ranges = _merge([(0x30, 0x39), (0x41, 0x5A), (0x5F, 0x5F), (0x61, 0x7A)])
NON_WORD: Ranges = complement(WORD)
ANY_NO_NEWLINE: Ranges = complement(((0x0A, 0x0A),))
ANY: Ranges = ((0, MAX_CODEPOINT),)

_CLASS_ESCAPES = {
    "s": WHITESPACE, "S": NON_WHITESPACE,
    "d": DIGIT, "D": NON_DIGIT,
    "w": WORD, "W": NON_WORD,
}
_CHAR_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "f": "\f", "v": "\v", "a": "\a"}

# Assertion kinds.
TEXT_START = "text_start"    # ^ and \A
LINE_END = "line_end"        # $ (end of text, or before a final newline)
TEXT_END = "text_end"        # \Z
WORD_BOUNDARY = "word_boundary"
NON_WORD_BOUNDARY = "non_word_boundary"


@dataclass(frozen=True)
class CharSet:
    ranges: Ranges


@dataclass(frozen=True)
class Assert:
    kind: str


@dataclass(frozen=True)
class Cat:
    parts: tuple["Node", ...]


@dataclass(frozen=True)
class Alt:
    branches: tuple["Node", ...]


@dataclass(frozen=True)
class Rep:
    node: "Node"
    lo: int
    hi: int | None  # None = unbounded
    lazy: bool


Node = Union[CharSet, Assert, Cat, Alt, Rep]


class _Parser:
    def __init__(self, pattern: str):
        self.pattern = pattern
        self.pos = 0

    def error(self, message: str, cls=RegexSyntaxError) -> RegexSyntaxError:
        return cls(message, self.pattern, self.pos)

    def peek(self) -> str | None:
        return self.pattern[self.pos] if self.pos < len(self.pattern) else None

    def take(self) -> str:
        ch = self.pattern[self.pos]
        self.pos += 1
        return ch

    def parse(self) -> Node:
        node = self.alternation()
        if self.pos != len(self.pattern):
            raise self.error(f"unbalanced {self.pattern[self.pos]!r}")
        return node

    def alternation(self) -> Node:
        branches = [self.concat()]
        while self.peek() == "|":
            self.take()
            branches.append(self.concat())
        return branches[0] if len(branches) == 1 else Alt(tuple(branches))

    def concat(self) -> Node:
        parts: list[Node] = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)":
                break
            parts.append(self.repeatable())
        if len(parts) == 1:
            return parts[0]
        return Cat(tuple(parts))

    def repeatable(self) -> Node:
        node = self.atom()
        quant = self.quantifier()
        if quant is None:
            return node
        lo, hi, lazy = quant
        if self.quantifier() is not None:
            raise self.error("multiple repeat")
        return Rep(node, lo, hi, lazy)

    def quantifier(self) -> tuple[int, int | None, bool] | None:
        ch = self.peek()
        if ch == "*":
            self.take()
            return 0, None, self._lazy()
        if ch == "+":
            self.take()
            return 1, None, self._lazy()
        if ch == "?":
            self.take()
            return 0, 1, self._lazy()
        if ch == "{":
            counted = self._counted()
            if counted is None:
                return None  # literal brace, handled by atom on next call
            lo, hi = counted
            return lo, hi, self._lazy()
        return None

    def _lazy(self) -> bool:
        if self.peek() == "?":
            self.take()
            return True
        return False

    def _counted(self) -> tuple[int, int | None] | None:
        # "{m,n}" with either bound optional; anything malformed is a
        # literal "{", matching re's behaviour.
        start = self.pos
        self.take()  # "{"
        body = []
        while self.peek() is not None and self.peek() != "}":
            body.append(self.take())
        if self.peek() != "}":
            self.pos = start
            return None
        text = "".join(body)
        lo_s, sep, hi_s = text.partition(",")
        if not (lo_s or sep):
            self.pos = start
            return None
        if (lo_s and not lo_s.isdigit()) or (hi_s and not hi_s.isdigit()):
            self.pos = start
            return None
        self.take()  # "}"
        lo = int(lo_s) if lo_s else 0
        hi = (int(hi_s) if hi_s else None) if sep else lo
        if hi is not None and hi < lo:
            raise self.error("min repeat greater than max repeat")
        if lo > MAX_REPEAT or (hi is not None and hi > MAX_REPEAT):
            raise self.error(f"repeat count above {MAX_REPEAT}")
        return lo, hi

    def atom(self) -> Node:
        ch = self.take()
        if ch == "(":
            return self._group()
        if ch == "[":
            return self._char_class()
        if ch == ".":
            return CharSet(ANY_NO_NEWLINE)
        if ch == "^":
            return Assert(TEXT_START)
        if ch == "$":
            return Assert(LINE_END)
        if ch == "\\":
            return self._escape(in_class=False)
        if ch in "*+?":
            self.pos -= 1
            raise self.error("nothing to repeat")
        return CharSet(((ord(ch), ord(ch)),))

    def _group(self) -> Node:
        if self.peek() == "?":
            self.take()
            nxt = self.peek()
            if nxt == ":":
                self.take()
            else:
                self.pos -= 1
                raise self.error(
                    "only plain and (?:...) groups are supported "
                    "(no lookaround, flags, or named groups)",
                    UnsupportedFeatureError,
                )
        node = self.alternation()
        if self.peek() != ")":
            raise self.error("missing ), unterminated group")
        self.take()
        return node

    def _escape(self, in_class: bool) -> Node:
        ch = self.peek()
        if ch is None:
            raise self.error("bad escape (end of pattern)")
        self.take()
        if ch in _CLASS_ESCAPES:
            return CharSet(_CLASS_ESCAPES[ch])
        if ch in _CHAR_ESCAPES:
            return self._literal(_CHAR_ESCAPES[ch])
        if ch == "b":
            if in_class:
                return self._literal("\x08")
            return Assert(WORD_BOUNDARY)
        if not in_class:
            if ch == "B":
                return Assert(NON_WORD_BOUNDARY)
            if ch == "A":
                return Assert(TEXT_START)
            if ch == "Z":
                return Assert(TEXT_END)
        if ch == "x":
            return self._literal(chr(self._hex(2)))
        if ch == "u":
            return self._literal(chr(self._hex(4)))
        if ch == "U":
            code = self._hex(8)
            if code > MAX_CODEPOINT:
                raise self.error("\\U escape outside Unicode range")
            return self._literal(chr(code))
        if ch == "0":
            return self._literal(chr(self._octal()))
        if ch.isdigit():
            raise self.error("backreferences are not supported", UnsupportedFeatureError)
        if ch.isalpha():
            raise self.error(f"bad escape \\{ch}")
        return self._literal(ch)

    @staticmethod
    def _literal(ch: str) -> CharSet:
        return CharSet(((ord(ch), ord(ch)),))

    def _hex(self, width: int) -> int:
        digits = self.pattern[self.pos : self.pos + width]
        if len(digits) != width or any(c not in "0123456789abcdefABCDEF" for c in digits):
            raise self.error(f"expected {width} hex digits")
        self.pos += width
        return int(digits, 16)

    def _octal(self) -> int:
        digits = ""
        while len(digits) < 2 and self.peek() in tuple("01234567"):
            digits += self.take()
        return int(digits, 8) if digits else 0

    def _char_class(self) -> Node:
        negated = False
        if self.peek() == "^":
            self.take()
            negated = True
        items: list[Ranges] = []
        first = True
        while True:
            ch = self.peek()
            if ch is None:
                raise self.error("unterminated character set")
            if ch == "]" and not first:
                self.take()
                break
            first = False
            item = self._class_item()
            if (
                isinstance(item, int)
                and self.peek() == "-"
                and self.pos + 1 < len(self.pattern)
                and self.pattern[self.pos + 1] != "]"
            ):
                self.take()  # "-"
                upper = self._class_item()
                if not isinstance(upper, int):
                    raise self.error("bad character range (class escape as endpoint)")
                if upper < item:
                    raise self.error("bad character range")
                items.append(((item, upper),))
            elif isinstance(item, int):
                items.append(((item, item),))
            else:
                items.append(item)
        flat = _merge([r for ranges in items for r in ranges])
        return CharSet(complement(flat) if negated else flat)

    def _class_item(self) -> int | Ranges:
        ch = self.take()
        if ch == "\\":
            node = self._escape(in_class=True)
            ranges = node.ranges
            if len(ranges) == 1 and ranges[0][0] == ranges[0][1]:
                return ranges[0][0]
            return ranges
        return ord(ch)


def parse(pattern: str) -> Node:
    """Parse ``pattern`` into the dialect AST, or raise RegexSyntaxError."""
    if not isinstance(pattern, str):
        raise TypeError("pattern must be str")
    return _Parser(pattern).parse()
