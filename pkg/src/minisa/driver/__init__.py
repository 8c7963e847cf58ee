"""Command-line driver: inputs, orchestration and report/coverage writers."""
from .compdb import CompdbError, CompileEntry, load_compdb
from .coverage import executable_lines, write_coverage
from .diff import DiffResult, diff_runs
from .hashing import issue_hash
from .plist import read_plist_hashes, write_plist
from .suppress import apply_suppressions, load_suppression_file

__all__ = [
    "CompdbError", "CompileEntry", "DiffResult", "apply_suppressions", "diff_runs", "executable_lines",
    "issue_hash", "load_compdb", "load_suppression_file", "read_plist_hashes", "write_coverage",
    "write_plist",
]
