"""gcov-like per-line coverage files."""
from __future__ import annotations

from typing import Mapping

from ..frontend.ast import Ast, Compound, If, Stmt, While, walk


def executable_lines(ast: Ast) -> set[int]:
    """Lines of function headers, statements and branch conditions in ``ast``'s own file."""
    lines: set[int] = set()
    for fn in ast.definitions():
        lines.add(fn.loc.line)
        for n in walk(fn.body):
            if isinstance(n, Stmt) and not isinstance(n, Compound):
                lines.add(n.loc.line)
            if isinstance(n, (If, While)):
                lines.add(n.cond.loc.line)
    return lines


def render_coverage(source: str, counts: Mapping[int, int], executable: set[int]) -> str:
    out = []
    for i, text in enumerate(source.splitlines(), start=1):
        if i in executable or counts.get(i, 0) > 0:
            mark = str(counts.get(i, 0))
        else:
            mark = "-"
        out.append(f"{mark}:{i}:{text}")
    return "\n".join(out) + "\n"


def write_coverage(source: str, counts: Mapping[int, int], executable: set[int], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_coverage(source, counts, executable))
