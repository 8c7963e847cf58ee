"""Compilation database (``compile_commands.json``) ingestion."""
from __future__ import annotations

import json
import os
import shlex
from dataclasses import dataclass


class CompdbError(Exception):
    pass


@dataclass(frozen=True)
class CompileEntry:
    directory: str
    file: str
    arguments: tuple[str, ...] = ()

    @property
    def path(self) -> str:
        """Absolute, normalized path of the translation unit."""
        return os.path.normpath(os.path.join(self.directory, self.file))


def load_compdb(path: str) -> list[CompileEntry]:
    """Entries of a compilation database; only ``file`` and ``directory`` matter to MiniC."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CompdbError(f"cannot read compilation database '{path}': {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CompdbError(f"malformed compilation database '{path}': {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(raw, list):
        raise CompdbError(f"malformed compilation database '{path}': expected a JSON array")
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "file" not in item:
            raise CompdbError(f"entry {i} of '{path}' has no 'file' field")
        directory = item.get("directory", base)
        if not os.path.isabs(directory):
            directory = os.path.join(base, directory)
        if "arguments" in item:
            args = item["arguments"]
            if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
                raise CompdbError(f"entry {i} of '{path}': 'arguments' must be a list of strings")
        else:
            args = shlex.split(item.get("command", ""))
        entry = CompileEntry(directory, item["file"], tuple(args))
        if not os.path.isfile(entry.path):
            raise CompdbError(f"entry {i} of '{path}': no such file '{entry.path}'")
        out.append(entry)
    return out
