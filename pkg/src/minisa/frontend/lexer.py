from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import SourceLoc


class FrontendError(Exception):
    """A diagnostic tied to a source location."""

    kind = "error"

    def __init__(self, loc: SourceLoc, message: str):
        super().__init__(f"{loc}: {self.kind}: {message}")
        self.loc = loc
        self.message = message


class MiniCSyntaxError(FrontendError):
    kind = "syntax error"


class MiniCTypeError(FrontendError):
    kind = "type error"


KEYWORDS = {"int", "void", "struct", "if", "else", "while", "return"}

PUNCT = [
    "->", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&",
    "(", ")", "{", "}", "[", "]", ";", ",", ".",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<line_comment>//[^\n]*)"
    r"|(?P<block_comment>/\*.*?\*/)"
    r"|(?P<number>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in PUNCT) + ")",
    re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | punct | eof
    text: str
    loc: SourceLoc


def tokenize(source: str, file_name: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        loc = SourceLoc(file_name, line, pos - line_start + 1)
        if m is None:
            if source.startswith("/*", pos):
                raise MiniCSyntaxError(loc, "unterminated comment")
            raise MiniCSyntaxError(loc, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block_comment":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rindex("\n") + 1
        elif kind == "number":
            tokens.append(Token("number", text, loc))
        elif kind == "ident":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, loc))
        elif kind == "punct":
            tokens.append(Token("punct", text, loc))
        pos = m.end()
    tokens.append(Token("eof", "", SourceLoc(file_name, line, pos - line_start + 1)))
    return tokens


_LOOSE_TOKEN_RE = re.compile(
    r"[A-Za-z_][A-Za-z0-9_]*|\d+|" + "|".join(re.escape(p) for p in PUNCT) + r"|\S"
)


def line_token_spans(text: str) -> list[tuple[int, int]]:
    """Token spans (0-based, end-exclusive) of one source line; never fails."""
    code = text.split("//", 1)[0]
    return [m.span() for m in _LOOSE_TOKEN_RE.finditer(code)]
