"""Source-comment and hash-list suppressions."""
from __future__ import annotations

import re
from typing import Callable, Iterable

_MARK = re.compile(r"//\s*minisa-suppress\s+([\w.]+)")


def load_suppression_file(path: str) -> set[str]:
    """One issue hash per line; ``#`` starts a comment."""
    out: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.add(line)
    return out


def _comment_suppresses(line: str, checker: str) -> bool:
    return any(m.group(1) in ("all", checker) for m in _MARK.finditer(line))


def apply_suppressions(reports: Iterable, source_line: Callable[[str, int], str],
                       hashes: frozenset | set = frozenset()) -> tuple[list, list]:
    """Split ``reports`` into (kept, suppressed).

    ``source_line(file, n)`` returns line ``n`` (1-based) or "" when absent.
    """
    kept, dropped = [], []
    for r in reports:
        f, n = r["file"], r["line"]
        hit = r["issue_hash"] in hashes or any(
            _comment_suppresses(source_line(f, k), r["checker"]) for k in (n, n - 1) if k >= 1
        )
        (dropped if hit else kept).append(r)
    return kept, dropped
