"""Source positions."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass


@dataclass(frozen=True, order=True, slots=True)
class SourceSpan:
    """A 1-based region of a source file.

    ``end_line``/``end_col`` point just past the last character, so an
    empty span has ``start == end``.
    """

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    @property
    def start(self) -> tuple[int, int]:
        return (self.start_line, self.start_col)

    @property
    def end(self) -> tuple[int, int]:
        return (self.end_line, self.end_col)

    def contains(self, other: SourceSpan) -> bool:
        return self.start <= other.start and other.end <= self.end

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


class LineIndex:
    """Maps character offsets of one source text to (line, column)."""

    def __init__(self, source: str, file: str = "<string>") -> None:
        self.file = file
        self._starts = [0] + [m.end() for m in re.finditer("\n", source)]

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self._starts, offset) - 1
        return line + 1, offset - self._starts[line] + 1

    def span(self, start: int, end: int) -> SourceSpan:
        sl, sc = self.position(start)
        el, ec = self.position(end)
        return SourceSpan(self.file, sl, sc, el, ec)

    @property
    def line_count(self) -> int:
        return len(self._starts)
