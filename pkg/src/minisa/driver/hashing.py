"""Location-content issue hashes.

The digest covers the checker, the enclosing function's USR, the warning
line with whitespace collapsed, and which token of that line the warning
column falls in. Line numbers and file names are deliberately left out, so a
hash survives edits elsewhere in the file and renames.
"""
from __future__ import annotations

import hashlib

from ..frontend.lexer import line_token_spans


def normalize_line(text: str) -> str:
    return " ".join(text.split())


def token_index(text: str, col: int) -> int:
    """Index of the token containing (or first following) 1-based column ``col``."""
    c = col - 1
    spans = line_token_spans(text)
    for i, (_start, end) in enumerate(spans):
        if c < end:
            return i
    return len(spans)


def issue_hash(checker: str, fn_usr: str, line_text: str, col: int) -> str:
    payload = checker + fn_usr + normalize_line(line_text) + str(token_index(line_text, col))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
