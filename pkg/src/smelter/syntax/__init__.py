"""Lexing and tolerant parsing of Elixir source."""

from smelter.syntax.lexer import IllegalCharacter, LexError, Token, TokenKind, tokenize
from smelter.syntax.nodes import Comment, Node, SyntaxTree
from smelter.syntax.parser import ParseDiagnostic, ParseError, parse_source
from smelter.syntax.pipes import MalformedPipeRhs, desugar_pipes
from smelter.syntax.spans import SourceSpan

__all__ = [
    "Comment",
    "IllegalCharacter",
    "LexError",
    "MalformedPipeRhs",
    "Node",
    "ParseDiagnostic",
    "ParseError",
    "SourceSpan",
    "SyntaxTree",
    "Token",
    "TokenKind",
    "desugar_pipes",
    "parse_source",
    "tokenize",
]
