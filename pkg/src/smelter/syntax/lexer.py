"""Lossless Elixir tokenizer.

Every character of the input belongs either to exactly one token or to a
run of skipped horizontal whitespace (including ``\\``-newline line
continuations), so joining token texts with the gaps between them
reproduces the source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from smelter.syntax.spans import LineIndex, SourceSpan


class TokenKind(str, Enum):
    IDENTIFIER = "identifier"
    ALIAS = "alias"
    INTEGER = "integer"
    FLOAT = "float"
    STRING = "string"
    HEREDOC = "heredoc"
    CHARLIST = "charlist"
    SIGIL = "sigil"
    ATOM = "atom"
    KW_KEY = "keyword_key"
    OPERATOR = "operator"
    PUNCT = "punctuation"
    COMMENT = "comment"
    NEWLINE = "newline"
    OPAQUE = "opaque"


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    start: int
    end: int
    # absolute (start, end) offsets of each ``#{...}`` body
    interpolations: tuple[tuple[int, int], ...] = ()

    def is_(self, kind: TokenKind, text: str | None = None) -> bool:
        return self.kind is kind and (text is None or self.text == text)


class LexError(ValueError):
    def __init__(self, message: str, span: SourceSpan) -> None:
        super().__init__(f"{span.file}:{span.start_line}:{span.start_col}: {message}")
        self.message = message
        self.span = span


class IllegalCharacter(LexError):
    pass


@dataclass(frozen=True, slots=True)
class LexDiagnostic:
    message: str
    span: SourceSpan


_IDENT = re.compile(r"(?:[a-z_]|[^\W\dA-Z])\w*")
_ALIAS = re.compile(r"[A-Z]\w*")
_NUMBER = re.compile(
    r"0x[0-9a-fA-F_]+|0b[01_]+|0o[0-7_]+|\d[\d_]*(?:\.\d[\d_]*(?:[eE][+-]?\d+)?)?"
)
_HSPACE = re.compile(r"(?:[ \t\f\v]|\r(?!\n)|\\\r?\n)+")
_SIGIL_NAME = re.compile(r"[a-z]|[A-Z][A-Z0-9]*")
_SIGIL_MODS = re.compile(r"[a-zA-Z0-9]*")

OPERATORS = sorted(
    [
        "===", "!==", "==", "!=", "<=", ">=", "=~",
        "&&&", "&&", "|||", "||", "|>", "<<<", ">>>", "<<~", "~>>",
        "<~>", "<|>", "<~", "~>", "+++", "---", "++", "--", "...", "..",
        "//", "<>", "->", "<-", "=>", "\\\\", "::", "**", "^^^", "~~~",
        "+", "-", "*", "/", "=", "<", ">", "!", "^", "&", "|", "@", ".", "%",
    ],
    key=len,
    reverse=True,
)
_ATOM_OPERATORS = sorted(OPERATORS + ["%{}", "{}", "<<>>", "[]"], key=len, reverse=True)
_PUNCT = set("()[]{},;")
_CLOSERS = {"(": ")", "[": "]", "{": "}", "<": ">", "/": "/", "|": "|", '"': '"', "'": "'"}
_ILLEGAL_RUN = re.compile(r"[^\w\s()\[\]{},;:\"'#~?<>=!&|+\-*/\\^@.%]+")


class _Lexer:
    def __init__(
        self,
        source: str,
        index: LineIndex,
        strict: bool,
        errors: list[LexDiagnostic] | None,
    ) -> None:
        self.src = source
        self.n = len(source)
        self.index = index
        self.strict = strict
        self.errors = errors if errors is not None else []

    def _error(self, message: str, start: int, end: int, cls=LexError) -> None:
        span = self.index.span(start, end)
        if self.strict:
            raise cls(message, span)
        self.errors.append(LexDiagnostic(message, span))

    def run(self, start: int, stop: int) -> list[Token]:
        out: list[Token] = []
        pos = start
        src = self.src
        while pos < stop:
            m = _HSPACE.match(src, pos, stop)
            if m:
                pos = m.end()
                continue
            kind, end, interps = self.scan(pos, stop)
            out.append(Token(kind, src[pos:end], self.index.span(pos, end), pos, end, interps))
            pos = end
        return out

    def scan(self, pos: int, stop: int) -> tuple[TokenKind, int, tuple]:
        """Scan one token starting at ``pos`` (which is not whitespace)."""
        src = self.src
        ch = src[pos]
        nxt = src[pos + 1] if pos + 1 < stop else ""

        if ch == "\n":
            return TokenKind.NEWLINE, pos + 1, ()
        if ch == "\r":  # only reached for "\r\n"
            return TokenKind.NEWLINE, pos + 2, ()
        if ch == "#":
            end = src.find("\n", pos, stop)
            end = stop if end < 0 else end
            if end > pos and src[end - 1] == "\r" and end < stop:
                end -= 1
            return TokenKind.COMMENT, end, ()

        if ch == '"':
            if src.startswith('"""', pos):
                end, interps, ok = self._quoted(pos + 3, stop, '"""', True)
                return self._finish(TokenKind.HEREDOC, pos, end, interps, ok)
            end, interps, ok = self._quoted(pos + 1, stop, '"', True)
            return self._maybe_key(TokenKind.STRING, pos, end, interps, ok, stop)
        if ch == "'":
            if src.startswith("'''", pos):
                end, interps, ok = self._quoted(pos + 3, stop, "'''", True)
                return self._finish(TokenKind.HEREDOC, pos, end, interps, ok)
            end, interps, ok = self._quoted(pos + 1, stop, "'", True)
            return self._maybe_key(TokenKind.CHARLIST, pos, end, interps, ok, stop)

        if ch == "~":
            m = _SIGIL_NAME.match(src, pos + 1, stop)
            if m:
                sigil = self._sigil(pos, m, stop)
                if sigil is not None:
                    return sigil

        if ch in "0123456789":
            m = _NUMBER.match(src, pos, stop)
            text = m.group()
            if "." in text and not text.startswith("0x"):
                return TokenKind.FLOAT, m.end(), ()
            return TokenKind.INTEGER, m.end(), ()

        if ch == "?" and nxt:
            if nxt == "\\" and pos + 2 < stop:
                return TokenKind.INTEGER, min(pos + 3, stop), ()
            return TokenKind.INTEGER, pos + 2, ()

        if ch == ":":
            if nxt == ":":
                return TokenKind.OPERATOR, pos + 2, ()
            if nxt == '"':
                end, interps, ok = self._quoted(pos + 2, stop, '"', True)
                return self._finish(TokenKind.ATOM, pos, end, interps, ok)
            m = _IDENT.match(src, pos + 1, stop) or _ALIAS.match(src, pos + 1, stop)
            if m:
                end = m.end()
                if end < stop and src[end] in "?!":
                    end += 1
                return TokenKind.ATOM, end, ()
            for op in _ATOM_OPERATORS:
                if src.startswith(op, pos + 1) and pos + 1 + len(op) <= stop:
                    return TokenKind.ATOM, pos + 1 + len(op), ()
            return TokenKind.PUNCT, pos + 1, ()

        m = _IDENT.match(src, pos, stop)
        if m:
            end = m.end()
            if end < stop and src[end] in "?!" and not src.startswith("=", end + 1):
                end += 1
            return self._word(TokenKind.IDENTIFIER, end, stop)
        m = _ALIAS.match(src, pos, stop)
        if m:
            return self._word(TokenKind.ALIAS, m.end(), stop)

        if ch == "<" and src.startswith("<<", pos) and not (
            src.startswith("<<<", pos) or src.startswith("<<~", pos)
        ):
            return TokenKind.PUNCT, pos + 2, ()
        if ch == ">" and src.startswith(">>", pos) and not src.startswith(">>>", pos):
            return TokenKind.PUNCT, pos + 2, ()
        if ch in _PUNCT:
            return TokenKind.PUNCT, pos + 1, ()
        if ch == "\\" and not src.startswith("\\\\", pos):
            return self._illegal(pos, stop)
        for op in OPERATORS:
            if src.startswith(op, pos) and pos + len(op) <= stop:
                return TokenKind.OPERATOR, pos + len(op), ()
        return self._illegal(pos, stop)

    def _illegal(self, pos: int, stop: int) -> tuple[TokenKind, int, tuple]:
        m = _ILLEGAL_RUN.match(self.src, pos, stop)
        end = m.end() if m else pos + 1
        self._error(f"illegal character {self.src[pos:end]!r}", pos, end, IllegalCharacter)
        return TokenKind.OPAQUE, end, ()

    def _word(self, kind: TokenKind, end: int, stop: int) -> tuple[TokenKind, int, tuple]:
        src = self.src
        if (
            end < stop
            and src[end] == ":"
            and (end + 1 == stop or src[end + 1] in " \t\r\n")
        ):
            return TokenKind.KW_KEY, end + 1, ()
        return kind, end, ()

    def _finish(self, kind, pos, end, interps, ok):
        if not ok:
            self._error("unterminated literal", pos, end)
            return TokenKind.OPAQUE, end, ()
        return kind, end, tuple(interps)

    def _maybe_key(self, kind, pos, end, interps, ok, stop):
        if ok and end < stop and self.src[end] == ":" and (
            end + 1 == stop or self.src[end + 1] in " \t\r\n"
        ):
            return TokenKind.KW_KEY, end + 1, tuple(interps)
        return self._finish(kind, pos, end, interps, ok)

    def _sigil(self, pos: int, name: re.Match, stop: int):
        src = self.src
        dpos = name.end()
        if dpos >= stop:
            return None
        interpolate = name.group().islower()
        if src.startswith('"""', dpos) or src.startswith("'''", dpos):
            close = src[dpos : dpos + 3]
            end, interps, ok = self._quoted(dpos + 3, stop, close, interpolate)
        elif src[dpos] in _CLOSERS:
            end, interps, ok = self._quoted(dpos + 1, stop, _CLOSERS[src[dpos]], interpolate)
        else:
            return None
        if ok:
            end = _SIGIL_MODS.match(src, end, stop).end()
        return self._finish(TokenKind.SIGIL, pos, end, interps, ok)

    def _quoted(self, pos: int, stop: int, close: str, interpolate: bool):
        """Scan a quoted body; returns (end, interpolations, terminated)."""
        src = self.src
        interps: list[tuple[int, int]] = []
        while pos < stop:
            ch = src[pos]
            if ch == "\\":
                pos += 2
                continue
            if src.startswith(close, pos):
                return pos + len(close), interps, True
            if interpolate and ch == "#" and src.startswith("#{", pos):
                body = pos + 2
                end = self._interpolation_end(body, stop)
                if end is None:
                    return stop, interps, False
                interps.append((body, end))
                pos = end + 1
                continue
            pos += 1
        return min(pos, stop), interps, False

    def _interpolation_end(self, pos: int, stop: int) -> int | None:
        """Offset of the ``}`` closing an interpolation whose body starts at ``pos``."""
        depth = 0
        src = self.src
        while pos < stop:
            m = _HSPACE.match(src, pos, stop)
            if m:
                pos = m.end()
                continue
            kind, end, _ = self.scan(pos, stop)
            if kind is TokenKind.PUNCT:
                if src[pos] == "{":
                    depth += 1
                elif src[pos] == "}":
                    if depth == 0:
                        return pos
                    depth -= 1
            pos = end
        return None


def tokenize(
    source: str,
    *,
    file: str = "<string>",
    strict: bool = False,
    errors: list[LexDiagnostic] | None = None,
    index: LineIndex | None = None,
    start: int = 0,
    stop: int | None = None,
) -> list[Token]:
    """Split ``source`` into tokens, comments and newlines included.

    In strict mode illegal input raises :class:`LexError`; otherwise the
    offending run becomes an ``OPAQUE`` token and a diagnostic is appended
    to ``errors``. ``start``/``stop`` lex a sub-range (used to re-lex
    interpolations) while keeping absolute positions.
    """
    if index is None:
        index = LineIndex(source, file)
    lexer = _Lexer(source, index, strict, errors)
    return lexer.run(start, len(source) if stop is None else stop)


def gaps_are_whitespace(source: str, tokens: list[Token]) -> bool:
    """True when the text between consecutive tokens is skippable whitespace."""
    pos = 0
    for tok in tokens:
        if tok.start < pos:
            return False
        gap = source[pos : tok.start]
        if gap and not _HSPACE.fullmatch(gap):
            return False
        pos = tok.end
    tail = source[pos:]
    return not tail or bool(_HSPACE.fullmatch(tail))
