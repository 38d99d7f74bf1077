"""Tokenizer for ``.seni`` sources."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from seni.errors import LexError, Span


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "integer"
    STRING = "string"
    KEYWORD = "keyword"
    TYPE = "type"
    AT = "@"
    DOT = "."
    COLON = ":"
    DOUBLE_COLON = "::"
    SEMI = ";"
    COMMA = ","
    LBRACE = "{"
    RBRACE = "}"
    LPAREN = "("
    RPAREN = ")"
    LBRACKET = "["
    RBRACKET = "]"
    ARROW = "->"
    IMPLIES = "=>"
    EQ = "="
    NEQ = "/="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    SLASH = "/"
    AMP = "&"
    BAR = "|"
    PAR = "||"
    BANG = "!"
    EOF = "end of input"


KEYWORDS = frozenset({
    "system", "record", "state", "action", "init", "spec", "prop", "func",
    "import", "refines", "static", "property", "always", "null", "true", "false",
    # expression extensions
    "mod", "if", "then", "else",
})

TYPE_NAMES = frozenset({"int", "bool", "string"})

# longest match first
_PUNCT = [
    ("::", TokenKind.DOUBLE_COLON), ("->", TokenKind.ARROW), ("=>", TokenKind.IMPLIES),
    ("/=", TokenKind.NEQ), ("<=", TokenKind.LE), (">=", TokenKind.GE), ("||", TokenKind.PAR),
    ("@", TokenKind.AT), (".", TokenKind.DOT), (":", TokenKind.COLON), (";", TokenKind.SEMI),
    (",", TokenKind.COMMA), ("{", TokenKind.LBRACE), ("}", TokenKind.RBRACE),
    ("(", TokenKind.LPAREN), (")", TokenKind.RPAREN), ("[", TokenKind.LBRACKET),
    ("]", TokenKind.RBRACKET), ("=", TokenKind.EQ), ("<", TokenKind.LT), (">", TokenKind.GT),
    ("+", TokenKind.PLUS), ("-", TokenKind.MINUS), ("*", TokenKind.STAR), ("/", TokenKind.SLASH),
    ("&", TokenKind.AMP), ("|", TokenKind.BAR), ("!", TokenKind.BANG),
]


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    col: int
    offset: int = 0

    @property
    def span(self) -> Span:
        return Span(self.offset, self.offset + len(self.lexeme), self.line, self.col)

    def __repr__(self) -> str:
        return f"{self.kind.name}({self.lexeme!r})@{self.line}:{self.col}"


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ch.isdigit()


def tokenize(source: str, file: str | None = None) -> list[Token]:
    """Split ``source`` into tokens. Whitespace and ``//`` comments are dropped."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def fail(msg: str):
        raise LexError(msg, Span(i, i + 1, line, col, file))

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue

        start, scol = i, col
        if _is_ident_start(ch):
            while i < n and _is_ident_char(source[i]):
                i += 1
            word = source[start:i]
            if word in TYPE_NAMES:
                kind = TokenKind.TYPE
            elif word in KEYWORDS:
                kind = TokenKind.KEYWORD
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, line, scol, start))
        elif ch.isdigit():
            while i < n and source[i].isdigit():
                i += 1
            if i < n and _is_ident_start(source[i]):
                col += i - start
                fail(f"unexpected character {source[i]!r} after number")
            tokens.append(Token(TokenKind.INT, source[start:i], line, scol, start))
        elif ch == '"':
            i += 1
            while i < n and source[i] != '"':
                if source[i] == "\n":
                    i, col = start, scol
                    fail("unterminated string literal")
                i += 2 if source[i] == "\\" else 1
            if i >= n:
                i, col = start, scol
                fail("unterminated string literal")
            i += 1
            tokens.append(Token(TokenKind.STRING, source[start:i], line, scol, start))
        else:
            for text, kind in _PUNCT:
                if source.startswith(text, i):
                    i += len(text)
                    tokens.append(Token(kind, text, line, scol, start))
                    break
            else:
                fail(f"unexpected character {ch!r}")
        col = scol + (i - start)
    return tokens


def string_value(lexeme: str) -> str:
    """Decode a STRING token's lexeme (quotes included) to its value."""
    body = lexeme[1:-1]
    out = []
    k = 0
    while k < len(body):
        c = body[k]
        if c == "\\" and k + 1 < len(body):
            nxt = body[k + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            k += 2
        else:
            out.append(c)
            k += 1
    return "".join(out)
