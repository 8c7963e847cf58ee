"""Differential comparison of two result directories by issue hash."""
from __future__ import annotations

import glob
import os
import plistlib
from dataclasses import dataclass, field

from .plist import read_plist_hashes


class DiffError(Exception):
    pass


@dataclass
class DiffResult:
    new: set[str] = field(default_factory=set)
    resolved: set[str] = field(default_factory=set)
    common: set[str] = field(default_factory=set)
    info: dict[str, dict] = field(default_factory=dict)

    def summary(self) -> str:
        lines = []
        for title, hashes in (("NEW", self.new), ("RESOLVED", self.resolved)):
            for h in sorted(hashes, key=lambda h: (self.info[h]["file"], self.info[h]["line"], h)):
                i = self.info[h]
                lines.append(f"{title} {i['file']}:{i['line']}: [{i['checker']}] {i['message']} ({h[:16]})")
        lines.append(f"new: {len(self.new)}, resolved: {len(self.resolved)}, common: {len(self.common)}")
        return "\n".join(lines)


def _collect(directory: str) -> dict[str, dict]:
    if not os.path.isdir(directory):
        raise DiffError(f"not a directory: {directory}")
    out: dict[str, dict] = {}
    for path in sorted(glob.glob(os.path.join(directory, "*.plist"))):
        try:
            out.update(read_plist_hashes(path))
        except (OSError, plistlib.InvalidFileException, KeyError, ValueError) as exc:
            raise DiffError(f"unreadable plist '{path}': {exc}") from exc
    return out


def diff_runs(dir_a: str, dir_b: str) -> DiffResult:
    a, b = _collect(dir_a), _collect(dir_b)
    info = {**a, **b}
    return DiffResult(set(b) - set(a), set(a) - set(b), set(a) & set(b), info)
