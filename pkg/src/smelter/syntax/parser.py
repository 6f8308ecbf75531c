"""Tolerant recursive-descent / Pratt parser for Elixir.

The parser first builds generic calls (``def``, ``case``, ``defmodule`` are
ordinary calls with a do-block, exactly as in the language's quoted form)
and then lowers the recognised ones to dedicated node kinds in
:mod:`smelter.syntax.lower`.

In tolerant mode a statement that fails to parse is replaced by an
``opaque`` node covering the tokens skipped during recovery, and a
diagnostic is recorded.  Strict mode raises :class:`ParseError` instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from smelter.syntax import lower
from smelter.syntax.lexer import LexDiagnostic, LexError, Token, TokenKind, tokenize
from smelter.syntax.nodes import (
    BLOCK,
    CALL,
    CAPTURE,
    CLAUSE,
    FN,
    KEYWORD_LIST,
    LIST,
    LITERAL,
    MAP,
    MATCH,
    OPAQUE,
    PIPE,
    QUALIFIED_CALL,
    STRUCT,
    TUPLE,
    VARIABLE,
    ALIAS,
    ATTRIBUTE,
    Node,
    SyntaxTree,
)
from smelter.syntax.spans import LineIndex, SourceSpan

K = TokenKind

# (binding power, right associative)
BINARY_OPS: dict[str, tuple[int, bool]] = {
    "<-": (10, False), "\\\\": (10, False),
    "when": (20, True),
    "::": (30, True),
    "|": (40, True),
    "=>": (50, True),
    "=": (70, True),
    "||": (80, False), "|||": (80, False), "or": (80, False),
    "&&": (90, False), "&&&": (90, False), "and": (90, False),
    "==": (100, False), "!=": (100, False), "=~": (100, False),
    "===": (100, False), "!==": (100, False),
    "<": (110, False), ">": (110, False), "<=": (110, False), ">=": (110, False),
    "|>": (120, False), "<<<": (120, False), ">>>": (120, False),
    "<<~": (120, False), "~>>": (120, False), "<~": (120, False),
    "~>": (120, False), "<~>": (120, False), "<|>": (120, False),
    "in": (130, False), "not in": (130, False),
    "++": (140, True), "--": (140, True), "+++": (140, True), "---": (140, True),
    "..": (140, True), "<>": (140, True), "//": (140, True),
    "+": (150, False), "-": (150, False),
    "*": (160, False), "/": (160, False),
    "**": (170, False),
    "^^^": (160, False),
}
UNARY_BP = 180
CAPTURE_BP = 61
WORD_OPS = {"and", "or", "in", "when"}
# binary operators that may open a continuation line; `+`/`-` may not
# because a line starting with them is a unary expression
CONTINUATION_OPS = (set(BINARY_OPS) - {"+", "-", "not in"}) | {"."}
RESERVED = {"do", "end", "else", "after", "rescue", "catch", "when", "and", "or", "in"}
BLOCK_ENDERS = frozenset({"end", "else", "after", "rescue", "catch"})
UNARY_OPS = {"!", "^", "-", "+", "~~~"}
MAX_DEPTH = 150

# context flags
ALLOW_DO = 1
MULTI_ARG = 2
STMT = ALLOW_DO | MULTI_ARG
CONTAINER = ALLOW_DO
NOPAREN_ARG = 0


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: str = "", found: str = "") -> None:
        super().__init__(f"{span.file}:{span.start_line}:{span.start_col}: {message}")
        self.message = message
        self.span = span
        self.expected = expected
        self.found = found


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    message: str
    span: SourceSpan
    expected: str = ""
    found: str = ""


class Parser:
    def __init__(
        self,
        source: str,
        tokens: list[Token],
        index: LineIndex,
        strict: bool,
        diagnostics: list[ParseDiagnostic],
    ) -> None:
        self.src = source
        self.index = index
        self.toks = [t for t in tokens if t.kind is not K.COMMENT]
        self.n = len(self.toks)
        self.i = 0
        self.strict = strict
        self.diags = diagnostics
        self.depth = 0
        self.cascade_eof = False

    # --- token helpers ----------------------------------------------------

    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.toks[j] if j < self.n else None

    def prev(self) -> Token:
        return self.toks[self.i - 1]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: TokenKind, text: str | None = None) -> bool:
        t = self.peek()
        return t is not None and t.kind is kind and (text is None or t.text == text)

    def at_punct(self, text: str) -> bool:
        return self.at(K.PUNCT, text)

    def at_word(self, text: str) -> bool:
        return self.at(K.IDENTIFIER, text)

    def skip_newlines(self) -> None:
        while self.i < self.n and self.toks[self.i].kind is K.NEWLINE:
            self.i += 1

    def skip_separators(self) -> None:
        while self.i < self.n and (
            self.toks[self.i].kind is K.NEWLINE or self.toks[self.i].is_(K.PUNCT, ";")
        ):
            self.i += 1

    def error(self, message: str, expected: str = "", tok: Token | None = None) -> ParseError:
        tok = tok if tok is not None else self.peek()
        if tok is None:
            end = len(self.src)
            span = self.index.span(end, end)
            found = "end of file"
        else:
            span = tok.span
            found = tok.text if tok.kind is not K.NEWLINE else "newline"
        return ParseError(message, span, expected, found)

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            raise self.error(f"expected {text!r}", text)
        return self.advance()

    def node(self, kind: str, form: str, children, start: int, end: int, **meta) -> Node:
        return Node(kind, form, tuple(children), self.index.span(start, end), start, end, meta)

    # --- blocks -----------------------------------------------------------

    def is_term(self, t: Token, terms: frozenset[str]) -> bool:
        if t.kind is K.IDENTIFIER:
            return t.text in terms
        return t.kind is K.PUNCT and t.text in terms

    def parse_block(self, terms: frozenset[str]) -> tuple[list[Node], bool]:
        """Statements up to a terminator; switches to clause mode on ``->``."""
        items: list[Node] = []
        clauses: list[Node] = []
        clause_mode = False
        head: tuple[list[Node], Token, Token] | None = None
        body: list[Node] = []
        while True:
            self.skip_separators()
            t = self.peek()
            if t is None or self.is_term(t, terms):
                break
            start_i = self.i
            try:
                if t.is_(K.OPERATOR, "->"):
                    pats: list[Node] = []
                else:
                    e = self.parse_expr(0, STMT)
                    nt = self.peek()
                    if nt is not None and (nt.is_(K.PUNCT, ",") or nt.is_(K.OPERATOR, "->")):
                        pats = [e]
                        while self.at_punct(","):
                            self.advance()
                            self.skip_newlines()
                            pats.append(self.parse_expr(0, CONTAINER))
                        if not self.at(K.OPERATOR, "->"):
                            raise self.error("expected '->'", "->")
                    else:
                        self.expect_statement_end(terms)
                        (body if clause_mode else items).append(e)
                        continue
                if not clause_mode and items:
                    raise self.error("unexpected clause after expressions", tok=self.peek())
                arrow = self.advance()
                if clause_mode:
                    clauses.append(self.make_clause(head, body))
                clause_mode = True
                head = (pats, t, arrow)
                body = []
            except ParseError as err:
                if self.strict:
                    raise
                self.record(err)
                opaque = self.recover(start_i, terms)
                (body if clause_mode else items).append(opaque)
        if clause_mode:
            clauses.append(self.make_clause(head, body))
            return clauses, True
        return items, False

    def expect_statement_end(self, terms: frozenset[str]) -> None:
        t = self.peek()
        if t is None or t.kind is K.NEWLINE or t.is_(K.PUNCT, ";") or self.is_term(t, terms):
            return
        raise self.error("expected end of expression", "newline")

    def make_clause(self, head, body: list[Node]) -> Node:
        pats, first, arrow = head
        pats = list(pats)
        guard = None
        if pats and pats[-1].kind == CALL and pats[-1].form == "when" and pats[-1].meta.get("op"):
            w = pats.pop()
            pats.append(w.children[0])
            guard = w.children[1]
        if body:
            blk = self.node(BLOCK, "->", body, body[0].start, body[-1].end)
        else:
            blk = self.node(BLOCK, "->", (), arrow.end, arrow.end)
        start = pats[0].start if pats else arrow.start
        kids = pats + ([guard] if guard is not None else []) + [blk]
        return self.node(
            CLAUSE, "->", kids, min(start, first.start), blk.end,
            npatterns=len(pats), guard=guard is not None,
        )

    def record(self, err: ParseError) -> None:
        self.diags.append(ParseDiagnostic(err.message, err.span, err.expected, err.found))

    def recover(self, start: int, terms: frozenset[str]) -> Node:
        """Skip the broken statement and return an opaque node covering it."""
        i = start
        depth = 0
        toks = self.toks
        while i < self.n:
            t = toks[i]
            if t.kind is K.NEWLINE or t.is_(K.PUNCT, ";"):
                if depth == 0 and i > start:
                    break
                nxt = toks[i + 1] if i + 1 < self.n else None
                if (
                    depth > 0
                    and nxt is not None
                    and nxt.kind is K.IDENTIFIER
                    and nxt.text in ("def", "defp", "defmacro", "defmacrop", "defmodule")
                ):
                    break
            elif t.kind is K.PUNCT and t.text in ("(", "[", "{", "<<"):
                depth += 1
            elif t.kind is K.PUNCT and t.text in (")", "]", "}", ">>"):
                if depth == 0:
                    if i > start or t.text in terms:
                        break
                else:
                    depth -= 1
            elif t.kind is K.IDENTIFIER and t.text in ("do", "fn"):
                depth += 1
            elif t.kind is K.IDENTIFIER and t.text == "end":
                if depth == 0:
                    if i > start or "end" in terms:
                        break
                else:
                    depth -= 1
            elif t.kind is K.IDENTIFIER and t.text in BLOCK_ENDERS and depth == 0 and i > start:
                break
            i += 1
        if i == start:
            i += 1  # always make progress
        # drop trailing newlines from the opaque run
        j = i
        while j > start + 1 and toks[j - 1].kind is K.NEWLINE:
            j -= 1
        self.i = i
        if i >= self.n:
            self.cascade_eof = True
        first, last = toks[start], toks[j - 1]
        return self.node(OPAQUE, "", (), first.start, last.end)

    # --- expressions ------------------------------------------------------

    def parse_expr(self, min_bp: int, ctx: int) -> Node:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.depth = 0
            raise self.error("expression nested too deeply")
        try:
            left = self.parse_unary(ctx)
            while True:
                op = self.peek_infix()
                if op is None:
                    break
                text, width, skip = op
                lbp, right = BINARY_OPS[text]
                if lbp < min_bp:
                    break
                self.i += skip
                op_tok = self.advance()
                if width == 2:
                    self.advance()
                self.skip_newlines()
                rhs = self.parse_expr(lbp if right else lbp + 1, ctx)
                left = self.binary(text, left, rhs, op_tok)
            return left
        finally:
            self.depth = max(self.depth - 1, 0)

    def peek_infix(self) -> tuple[str, int, int] | None:
        """(operator, token width, newlines to skip) for a pending infix operator."""
        j = self.i
        skip = 0
        while j < self.n and self.toks[j].kind is K.NEWLINE:
            j += 1
        if j >= self.n:
            return None
        skip = j - self.i
        t = self.toks[j]
        text = None
        width = 1
        if t.kind is K.OPERATOR and t.text in BINARY_OPS:
            text = t.text
        elif t.kind is K.IDENTIFIER:
            if t.text in WORD_OPS:
                text = t.text
            elif t.text == "not" and j + 1 < self.n and self.toks[j + 1].is_(K.IDENTIFIER, "in"):
                text, width = "not in", 2
        if text is None:
            return None
        if skip and text not in CONTINUATION_OPS:
            return None
        return text, width, skip

    def binary(self, op: str, left: Node, right: Node, tok: Token) -> Node:
        start, end = min(left.start, tok.start), max(right.end, tok.end)
        if op == "|>":
            return self.node(PIPE, "|>", (left, right), start, end)
        if op == "=":
            return self.node(MATCH, "=", (left, right), start, end)
        return self.node(CALL, op, (left, right), start, end, op=True)

    def parse_unary(self, ctx: int) -> Node:
        t = self.peek()
        if t is None:
            raise self.error("expected expression", "expression")
        if t.kind is K.OPERATOR:
            if t.text in UNARY_OPS:
                self.advance()
                self.skip_newlines()
                operand = self.parse_expr(UNARY_BP, ctx)
                return self.node(CALL, t.text, (operand,), t.start, operand.end, op=True, unary=True)
            if t.text == "&":
                self.advance()
                nt = self.peek()
                if nt is not None and nt.kind is K.INTEGER and nt.start == t.end:
                    self.advance()
                    arg = self.literal(nt)
                    node = self.node(CAPTURE, "&", (arg,), t.start, nt.end, arg=arg.meta["value"])
                    return self.parse_postfix(node, ctx)  # &1.field, &1[:k]
                self.skip_newlines()
                operand = self.parse_expr(CAPTURE_BP, ctx)
                return self.capture(t, operand)
            if t.text == "@":
                return self.parse_postfix(self.parse_attribute(ctx), ctx)
            if t.text == "...":
                self.advance()
                return self.node(VARIABLE, "...", (), t.start, t.end)
        if t.is_(K.IDENTIFIER, "not") and not self.peek_is(1, K.IDENTIFIER, "in"):
            self.advance()
            operand = self.parse_expr(UNARY_BP, ctx)
            return self.node(CALL, "not", (operand,), t.start, operand.end, op=True, unary=True)
        return self.parse_postfix(self.parse_primary(ctx), ctx)

    def peek_is(self, k: int, kind: TokenKind, text: str | None = None) -> bool:
        t = self.peek(k)
        return t is not None and t.kind is kind and (text is None or t.text == text)

    def capture(self, amp: Token, operand: Node) -> Node:
        if operand.kind == LITERAL and operand.meta.get("type") == "integer":
            return self.node(CAPTURE, "&", (operand,), amp.start, operand.end, arg=operand.meta["value"])
        if operand.kind == CALL and operand.form == "/" and operand.meta.get("op") and len(operand.children) == 2:
            fun, arity = operand.children
            if arity.kind == LITERAL and arity.meta.get("type") == "integer":
                n = arity.meta["value"]
                if fun.kind == VARIABLE:
                    inner = self.node(CALL, fun.form, (), fun.start, arity.end, capture_arity=n)
                    return self.node(CAPTURE, "&", (inner,), amp.start, arity.end, name=fun.form, arity=n)
                if fun.kind == QUALIFIED_CALL and len(fun.children) == 1 and fun.meta.get("no_parens"):
                    inner = self.node(
                        QUALIFIED_CALL, fun.form, fun.children, fun.start, arity.end, capture_arity=n
                    )
                    return self.node(CAPTURE, "&", (inner,), amp.start, arity.end, name=fun.form, arity=n)
        return self.node(CAPTURE, "&", (operand,), amp.start, operand.end)

    def parse_attribute(self, ctx: int) -> Node:
        at = self.advance()
        name_tok = self.peek()
        if name_tok is None or name_tok.kind not in (K.IDENTIFIER, K.ALIAS) or name_tok.start != at.end:
            raise self.error("expected attribute name", "identifier")
        self.advance()
        name = name_tok.text
        if self.can_start_arg(name_tok):
            value = self.parse_expr(0, NOPAREN_ARG)
            return lower.attribute(self, name, value, at.start)
        if self.at_punct("(") and self.peek().start == name_tok.end:
            self.advance()
            self.skip_newlines()
            value = self.parse_expr(0, CONTAINER)
            self.skip_newlines()
            close = self.expect_punct(")")
            node = lower.attribute(self, name, value, at.start)
            return self.node(ATTRIBUTE, node.form, node.children, at.start, close.end, **node.meta)
        return self.node(ATTRIBUTE, name, (), at.start, name_tok.end, read=True)

    def can_start_arg(self, prev: Token) -> bool:
        """Whether the next token opens an argument of a no-parens call."""
        t = self.peek()
        if t is None or t.start == prev.end:
            return False
        kind = t.kind
        if kind is K.IDENTIFIER:
            if t.text in RESERVED:
                return False
            if t.text == "not" and self.peek_is(1, K.IDENTIFIER, "in"):
                return False
            return True
        if kind in (K.ALIAS, K.INTEGER, K.FLOAT, K.STRING, K.HEREDOC, K.CHARLIST,
                    K.SIGIL, K.ATOM, K.KW_KEY):
            return True
        if kind is K.PUNCT:
            return t.text in ("[", "{", "<<", "(")
        if kind is K.OPERATOR:
            nxt = self.peek(1)
            adjacent = nxt is not None and nxt.start == t.end and nxt.kind is not K.NEWLINE
            if t.text in ("%", "@", "&", "!", "^", "-", "+", "~~~"):
                return adjacent
            return t.text == "..."
        return False

    def parse_primary(self, ctx: int) -> Node:
        t = self.peek()
        if t is None:
            raise self.error("expected expression", "expression")
        kind = t.kind
        if kind in (K.INTEGER, K.FLOAT, K.STRING, K.HEREDOC, K.CHARLIST, K.SIGIL, K.ATOM):
            self.advance()
            return self.literal(t)
        if kind is K.KW_KEY:
            return self.parse_keywords(NOPAREN_ARG if not ctx & MULTI_ARG else ctx, in_container=False)
        if kind is K.ALIAS:
            self.advance()
            return self.alias_chain(t.text, t.start, t.end)
        if kind is K.IDENTIFIER:
            return self.parse_identifier(ctx)
        if kind is K.PUNCT:
            if t.text == "(":
                return self.parse_parens()
            if t.text == "[":
                return self.parse_list()
            if t.text == "{":
                return self.parse_tuple()
            if t.text == "<<":
                return self.parse_binary()
        if kind is K.OPERATOR and t.text == "%":
            return self.parse_map()
        raise self.error(f"unexpected {t.text!r}", "expression")

    def literal(self, t: Token) -> Node:
        kind = t.kind
        text = t.text
        meta: dict = {}
        if kind is K.INTEGER:
            meta = {"type": "integer", "value": _int_value(text)}
        elif kind is K.FLOAT:
            meta = {"type": "float", "value": float(text.replace("_", ""))}
        elif kind is K.ATOM:
            val = text[1:]
            if val.startswith('"'):
                val = val[1:-1]
            meta = {"type": "atom", "value": val}
        elif kind is K.STRING:
            meta = {"type": "string", "value": text[1:-1]}
        elif kind is K.HEREDOC:
            meta = {"type": "heredoc" if text.startswith('"') else "charlist", "value": text[3:-3]}
        elif kind is K.CHARLIST:
            meta = {"type": "charlist", "value": text[1:-1]}
        elif kind is K.SIGIL:
            meta = {"type": "sigil", "value": text}
        children = self.interpolations(t)
        return self.node(LITERAL, text, children, t.start, t.end, **meta)

    def interpolations(self, t: Token) -> list[Node]:
        out = []
        for a, b in t.interpolations:
            sub_tokens = tokenize(self.src, index=self.index, start=a, stop=b, strict=self.strict)
            sub = Parser(self.src, sub_tokens, self.index, self.strict, self.diags)
            sub.depth = self.depth
            items, _ = sub.parse_block(frozenset())
            if sub.peek() is not None:
                err = sub.error("unexpected token in interpolation")
                if self.strict:
                    raise err
                sub.record(err)
            if len(items) == 1:
                out.append(items[0])
            elif items:
                out.append(self.node(BLOCK, "__block__", items, items[0].start, items[-1].end))
        return out

    def alias_chain(self, name: str, start: int, end: int) -> Node:
        while self.at(K.OPERATOR, ".") and self.peek_is(1, K.ALIAS):
            self.advance()
            part = self.advance()
            name = f"{name}.{part.text}"
            end = part.end
        return self.node(ALIAS, name, (), start, end)

    def parse_identifier(self, ctx: int) -> Node:
        t = self.advance()
        name = t.text
        if name in ("true", "false", "nil"):
            return self.node(LITERAL, name, (), t.start, t.end, type="atom", value=name)
        if name == "fn":
            return self.parse_fn(t)
        if name in RESERVED or name == "not":
            self.i -= 1
            raise self.error(f"unexpected {name!r}", "expression")
        if name == "__MODULE__":
            return self.alias_chain(name, t.start, t.end)
        nt = self.peek()
        if nt is not None and nt.is_(K.PUNCT, "(") and nt.start == t.end:
            args, close = self.parse_call_args()
            node = self.node(CALL, name, args, t.start, close.end)
            return self.maybe_do(node, ctx)
        if nt is not None and nt.is_(K.IDENTIFIER, "do") and ctx & ALLOW_DO:
            node = self.node(CALL, name, (), t.start, t.end, no_parens=True)
            return self.maybe_do(node, ctx)
        if self.can_start_arg(t):
            args = self.parse_noparens_args(ctx)
            node = self.node(CALL, name, args, t.start, args[-1].end, no_parens=True)
            return self.maybe_do(node, ctx)
        return self.node(VARIABLE, name, (), t.start, t.end)

    def parse_noparens_args(self, ctx: int) -> list[Node]:
        if self.at(K.KW_KEY):
            return [self.parse_keywords(NOPAREN_ARG, in_container=False)]
        args = [self.parse_expr(0, NOPAREN_ARG)]
        if ctx & MULTI_ARG:
            while self.at_punct(","):
                self.advance()
                self.skip_newlines()
                if self.at(K.KW_KEY):
                    args.append(self.parse_keywords(NOPAREN_ARG, in_container=False))
                    break
                args.append(self.parse_expr(0, NOPAREN_ARG))
        return args

    def parse_keywords(self, ctx: int, in_container: bool) -> Node:
        kids: list[Node] = []
        first = self.peek()
        while True:
            kt = self.advance()
            key_text = kt.text[:-1]
            if key_text.startswith('"') or key_text.startswith("'"):
                key_text = key_text[1:-1]
            kids.append(self.node(LITERAL, ":" + key_text, (), kt.start, kt.end, type="atom", value=key_text, key=True))
            self.skip_newlines()
            kids.append(self.parse_expr(0, ctx))
            save = self.i
            if in_container:
                self.skip_newlines()
            if self.at_punct(",") and (self.peek_past_newlines(1) or K.NEWLINE) is K.KW_KEY:
                self.advance()
                self.skip_newlines()
                continue
            self.i = save
            break
        return self.node(KEYWORD_LIST, "[]", kids, first.start, kids[-1].end)

    def peek_past_newlines(self, k: int) -> TokenKind | None:
        j = self.i + k
        while j < self.n and self.toks[j].kind is K.NEWLINE:
            j += 1
        return self.toks[j].kind if j < self.n else None

    def parse_call_args(self) -> tuple[list[Node], Token]:
        self.expect_punct("(")
        args = self.parse_elements(")")
        close = self.expect_punct(")")
        return args, close

    def parse_elements(self, closer: str) -> list[Node]:
        """Comma separated expressions with an optional trailing keyword list."""
        out: list[Node] = []
        self.skip_newlines()
        while not self.at_punct(closer):
            if self.at(K.KW_KEY):
                out.append(self.parse_keywords(CONTAINER, in_container=True))
                self.skip_newlines()
                if self.at_punct(","):
                    self.advance()
                    self.skip_newlines()
                break
            out.append(self.parse_expr(0, CONTAINER))
            self.skip_newlines()
            if not self.at_punct(","):
                break
            self.advance()
            self.skip_newlines()
        return out

    def maybe_do(self, node: Node, ctx: int) -> Node:
        if ctx & ALLOW_DO and self.at_word("do"):
            sections, end = self.parse_do_block()
            node = self.node(
                node.kind, node.form, node.children + tuple(sections),
                node.start, end, **{**node.meta, "do_block": True},
            )
        if node.kind == CALL:
            return lower.call(self, node)
        return node

    def parse_do_block(self) -> tuple[list[Node], int]:
        kw = self.advance()
        sections: list[Node] = []
        name, sec_start, sec_end = "do", kw.start, kw.end
        while True:
            items, is_clauses = self.parse_block(BLOCK_ENDERS)
            end = items[-1].end if items else sec_end
            sections.append(
                self.node(BLOCK, name, items, sec_start, end, section=True, clauses=is_clauses)
            )
            t = self.peek()
            if t is None:
                err = self.error("missing 'end'", "end")
                if self.strict:
                    raise err
                if not self.cascade_eof:
                    self.record(err)
                self.cascade_eof = True
                return sections, end
            self.advance()
            if t.text == "end":
                return sections, t.end
            name, sec_start, sec_end = t.text, t.start, t.end

    def parse_fn(self, fn_tok: Token) -> Node:
        items, is_clauses = self.parse_block(frozenset({"end"}))
        if not self.at_word("end"):
            raise self.error("missing 'end' for fn", "end")
        end = self.advance()
        if not is_clauses:
            raise self.error("expected '->' in fn", "->", fn_tok)
        return self.node(FN, "fn", items, fn_tok.start, end.end)

    def parse_parens(self) -> Node:
        open_ = self.advance()
        items, _ = self.parse_block(frozenset({")"}))
        close = self.expect_punct(")")
        if len(items) == 1:
            n = items[0]
            return Node(n.kind, n.form, n.children, self.index.span(open_.start, close.end),
                        open_.start, close.end, {**n.meta, "parens": True})
        return self.node(BLOCK, "__block__", items, open_.start, close.end)

    def parse_list(self) -> Node:
        open_ = self.advance()
        elems = self.parse_elements("]")
        close = self.expect_punct("]")
        if len(elems) == 1 and elems[0].kind == KEYWORD_LIST and not elems[0].meta.get("parens"):
            kw = elems[0]
            return self.node(KEYWORD_LIST, "[]", kw.children, open_.start, close.end)
        meta = {}
        if elems and elems[-1].kind == CALL and elems[-1].form == "|" and elems[-1].meta.get("op"):
            tail = elems.pop()
            elems.extend(tail.children)
            meta["tail"] = True
        return self.node(LIST, "[]", elems, open_.start, close.end, **meta)

    def parse_tuple(self) -> Node:
        open_ = self.advance()
        elems = self.parse_elements("}")
        close = self.expect_punct("}")
        return self.node(TUPLE, "{}", elems, open_.start, close.end)

    def parse_binary(self) -> Node:
        open_ = self.advance()
        elems = self.parse_elements(">>")
        close = self.expect_punct(">>")
        return self.node(CALL, "<<>>", elems, open_.start, close.end, binary=True)

    def parse_map(self) -> Node:
        pct = self.advance()
        name_node = None
        t = self.peek()
        if t is not None and not t.is_(K.PUNCT, "{"):
            if t.kind is K.ALIAS:
                self.advance()
                name_node = self.alias_chain(t.text, t.start, t.end)
            elif t.is_(K.IDENTIFIER, "__MODULE__"):
                self.advance()
                name_node = self.alias_chain(t.text, t.start, t.end)
            elif t.kind is K.IDENTIFIER and t.text not in RESERVED:
                self.advance()
                name_node = self.node(VARIABLE, t.text, (), t.start, t.end)
            elif t.is_(K.OPERATOR, "@"):
                name_node = self.parse_attribute(CONTAINER)
            else:
                raise self.error("expected '{' or struct name", "{")
        self.expect_punct("{")
        elems = self.parse_elements("}")
        close = self.expect_punct("}")
        kids: list[Node] = []
        update = False
        if elems and elems[0].kind == CALL and elems[0].form == "|" and elems[0].meta.get("op"):
            base, first = elems[0].children
            kids.append(base)
            elems = [first] + elems[1:]
            update = True
        for e in elems:
            if e.kind == CALL and e.form == "=>" and e.meta.get("op"):
                kids.extend(e.children)
            elif e.kind == KEYWORD_LIST:
                kids.extend(e.children)
            else:
                kids.append(e)
        meta = {"update": True} if update else {}
        if name_node is not None:
            return self.node(STRUCT, name_node.form, [name_node] + kids, pct.start, close.end, **meta)
        return self.node(MAP, "%{}", kids, pct.start, close.end, **meta)

    # --- postfix ----------------------------------------------------------

    def parse_postfix(self, node: Node, ctx: int) -> Node:
        while True:
            t = self.peek()
            if t is None:
                return node
            if t.kind is K.NEWLINE:
                j = self.i
                while j < self.n and self.toks[j].kind is K.NEWLINE:
                    j += 1
                if j < self.n and self.toks[j].is_(K.OPERATOR, ".") and j + 1 < self.n and \
                        self.toks[j + 1].kind is K.IDENTIFIER:
                    self.i = j
                    continue
                return node
            if t.is_(K.OPERATOR, "."):
                node = self.parse_dot(node, ctx)
                continue
            if t.is_(K.PUNCT, "[") and t.start == self.prev().end:
                self.advance()
                self.skip_newlines()
                key = self.parse_expr(0, CONTAINER)
                self.skip_newlines()
                close = self.expect_punct("]")
                access = self.node(ALIAS, "Access", (), t.start, t.end, synthetic=True)
                node = self.node(QUALIFIED_CALL, "get", (access, node, key), node.start, close.end, access=True)
                continue
            if t.is_(K.PUNCT, "(") and t.start == self.prev().end and node.kind in (CALL, QUALIFIED_CALL):
                args, close = self.parse_call_args()
                node = self.node(CALL, ".()", (node, *args), node.start, close.end)
                continue
            return node

    def parse_dot(self, recv: Node, ctx: int) -> Node:
        dot = self.advance()
        self.skip_newlines()
        t = self.peek()
        if t is None:
            raise self.error("expected name after '.'", "identifier")
        if t.kind is K.IDENTIFIER and t.text not in RESERVED or t.kind in (K.STRING,):
            self.advance()
            name = t.text if t.kind is K.IDENTIFIER else t.text[1:-1]
            nt = self.peek()
            if nt is not None and nt.is_(K.PUNCT, "(") and nt.start == t.end:
                args, close = self.parse_call_args()
                node = self.node(QUALIFIED_CALL, name, (recv, *args), recv.start, close.end)
                return self.maybe_do(node, ctx)
            if nt is not None and nt.is_(K.IDENTIFIER, "do") and ctx & ALLOW_DO:
                node = self.node(QUALIFIED_CALL, name, (recv,), recv.start, t.end, no_parens=True)
                return self.maybe_do(node, ctx)
            if self.can_start_arg(t):
                args = self.parse_noparens_args(ctx)
                node = self.node(QUALIFIED_CALL, name, (recv, *args), recv.start, args[-1].end, no_parens=True)
                return self.maybe_do(node, ctx)
            return self.node(QUALIFIED_CALL, name, (recv,), recv.start, t.end, no_parens=True)
        if t.kind is K.ALIAS and recv.kind == ALIAS:
            self.advance()
            return self.node(ALIAS, f"{recv.form}.{t.text}", (), recv.start, t.end)
        if t.is_(K.PUNCT, "("):
            args, close = self.parse_call_args()
            return self.node(CALL, ".()", (recv, *args), recv.start, close.end)
        if t.is_(K.PUNCT, "{") and recv.kind == ALIAS:
            self.advance()
            elems = self.parse_elements("}")
            close = self.expect_punct("}")
            return self.node(ALIAS, recv.form + ".{}", elems, recv.start, close.end, multi=True)
        raise self.error("expected name after '.'", "identifier", t if t else dot)


def _int_value(text: str) -> int:
    if text.startswith("?"):
        body = text[1:]
        if body.startswith("\\") and len(body) > 1:
            return {"n": 10, "t": 9, "s": 32, "r": 13, "0": 0, "e": 27}.get(body[1], ord(body[1]))
        return ord(body[0]) if body else 0
    t = text.replace("_", "")
    try:
        if t.startswith(("0x", "0b", "0o")):
            return int(t, 0)
        return int(t)
    except ValueError:
        return 0


def parse_tokens(
    source: str,
    tokens: list[Token],
    index: LineIndex,
    strict: bool,
    diagnostics: list[ParseDiagnostic],
) -> list[Node]:
    parser = Parser(source, tokens, index, strict, diagnostics)
    try:
        items, is_clauses = parser.parse_block(frozenset())
        while parser.peek() is not None:
            # a stray terminator at top level
            err = parser.error(f"unexpected {parser.peek().text!r}")
            if strict:
                raise err
            parser.record(err)
            items.append(parser.recover(parser.i, frozenset()))
            more, _ = parser.parse_block(frozenset())
            items.extend(more)
    except RecursionError:
        end = len(source)
        err = ParseError("input nested too deeply", index.span(0, end), "", "")
        if strict:
            raise err from None
        parser.record(err)
        return [Node(OPAQUE, "", (), index.span(0, end), 0, end, {})]
    if is_clauses and strict:
        raise ParseError("clause outside of a block", items[0].span, "expression", "->")
    return items


def parse_source(
    source: str, mode: str = "tolerant", file: str = "<string>"
) -> tuple[SyntaxTree, list[ParseDiagnostic]]:
    """Parse one source text into a :class:`SyntaxTree`.

    ``mode`` is ``"strict"`` or ``"tolerant"``.  Strict mode raises
    :class:`ParseError` on the first problem; tolerant mode always returns a
    tree and lists every recovery point in the diagnostics.
    """
    if mode not in ("strict", "tolerant"):
        raise ValueError(f"unknown parse mode {mode!r}")
    strict = mode == "strict"
    index = LineIndex(source, file)
    diagnostics: list[ParseDiagnostic] = []
    lex_errors: list[LexDiagnostic] = []
    try:
        tokens = tokenize(source, file=file, strict=strict, errors=lex_errors, index=index)
    except LexError as err:
        raise ParseError(err.message, err.span, "token", "") from None
    diagnostics.extend(ParseDiagnostic(e.message, e.span, "token", "") for e in lex_errors)
    root = parse_tokens(source, tokens, index, strict, diagnostics)
    comments = lower.attach_comments(root, tokens, index)
    tree = SyntaxTree(file, source, tuple(root), tuple(tokens), comments)
    return tree, diagnostics
