"""Tokenizer for the usda subset."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..errors import InvalidCharacter, MalformedPath, UnterminatedString

KEYWORDS = frozenset({"def", "over", "class", "uniform", "rel", "prepend"})

# attribute type names; "[]" directly after one of these forms the array type
TYPE_NAMES = frozenset(
    {"token", "string", "float", "double", "bool", "float3", "float4", "point3f",
     "color3f", "quatf", "matrix4d"}
)


class TokenKind(enum.Enum):
    KW = "kw"
    IDENT = "ident"
    NSIDENT = "nsident"
    STRING = "string"
    NUM = "num"
    PATH = "path"
    ASSET = "asset"
    EQ = "eq"
    COMMA = "comma"
    SEMI = "semi"
    LPAREN = "lparen"
    RPAREN = "rparen"
    LBRACKET = "lbracket"
    RBRACKET = "rbracket"
    LBRACE = "lbrace"
    RBRACE = "rbrace"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    line: int
    column: int

    def __repr__(self) -> str:
        if self.kind in _PUNCT_KINDS:
            return self.kind.value
        return f"{self.kind.value}:{self.value}"


_PUNCT = {
    "=": TokenKind.EQ,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMI,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
}
_PUNCT_KINDS = frozenset(_PUNCT.values())

_NUM_RE = re.compile(r"[-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)")
# identifiers may carry ':' namespaces; '.' is lexed so that constructs such
# as "attr.timeSamples" reach the parser and get a specific error
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:[:.][A-Za-z_][A-Za-z0-9_]*)*")
_ESCAPES = {'"': '"', "'": "'", "\\": "\\", "n": "\n", "t": "\t", "r": "\r", "0": "\0"}


def tokenize(text: str, source: str = "<string>") -> list[Token]:
    """Split usda text into tokens; comments and whitespace are dropped."""
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        col = pos - line_start + 1
        if ch == "\n":
            pos += 1
            line += 1
            line_start = pos
        elif ch in " \t\r﻿":
            pos += 1
        elif ch == "#":
            end = text.find("\n", pos)
            pos = n if end < 0 else end
        elif ch in "\"'":
            value, pos = _scan_string(text, pos, line, col, source)
            tokens.append(Token(TokenKind.STRING, value, line, col))
        elif ch == "<":
            end = text.find(">", pos + 1)
            nl = text.find("\n", pos + 1)
            if end < 0 or (0 <= nl < end):
                raise MalformedPath(text[pos: nl if nl >= 0 else n], line, col, source)
            tokens.append(Token(TokenKind.PATH, text[pos + 1:end], line, col))
            pos = end + 1
        elif ch == "@":
            end = text.find("@", pos + 1)
            nl = text.find("\n", pos + 1)
            if end < 0 or (0 <= nl < end):
                raise UnterminatedString("unterminated asset path", line, col, source)
            tokens.append(Token(TokenKind.ASSET, text[pos + 1:end], line, col))
            pos = end + 1
        elif ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            pos += 1
        elif ch.isdigit() or ch in "+-.":
            m = _NUM_RE.match(text, pos)
            if m is None:
                raise InvalidCharacter(f"invalid character {ch!r}", line, col, source)
            tokens.append(Token(TokenKind.NUM, m.group(), line, col))
            pos = m.end()
        elif ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(text, pos)
            if m is None:  # non-ASCII letter
                raise InvalidCharacter(f"invalid character {ch!r}", line, col, source)
            word = m.group()
            pos = m.end()
            if word in TYPE_NAMES and text.startswith("[]", pos):
                tokens.append(Token(TokenKind.KW, word + "[]", line, col))
                pos += 2
            elif word in KEYWORDS or word in TYPE_NAMES:
                tokens.append(Token(TokenKind.KW, word, line, col))
            elif ":" in word or "." in word:
                tokens.append(Token(TokenKind.NSIDENT, word, line, col))
            else:
                tokens.append(Token(TokenKind.IDENT, word, line, col))
        else:
            raise InvalidCharacter(f"invalid character {ch!r}", line, col, source)
    return tokens


def _scan_string(text: str, pos: int, line: int, col: int, source: str) -> tuple[str, int]:
    quote = text[pos]
    i = pos + 1
    out: list[str] = []
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == quote:
            return "".join(out), i + 1
        if ch == "\n":
            break
        if ch == "\\":
            if i + 1 >= n:
                break
            esc = text[i + 1]
            if esc == "u":
                digits = text[i + 2:i + 6]
                if len(digits) != 4 or not all(c in "0123456789abcdefABCDEF" for c in digits):
                    raise InvalidCharacter("bad \\u escape", line, col + (i - pos), source)
                out.append(chr(int(digits, 16)))
                i += 6
                continue
            if esc not in _ESCAPES:
                raise InvalidCharacter(f"unknown escape \\{esc}", line, col + (i - pos), source)
            out.append(_ESCAPES[esc])
            i += 2
            continue
        out.append(ch)
        i += 1
    raise UnterminatedString("unterminated string literal", line, col, source)
