"""``minisa`` command line: ``analyze`` and ``diff`` subcommands.

Exit codes: 0 when the run finished without reports, 1 when reports (or,
for ``diff``, new reports) were found, 2 for input errors.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .cfg import build_cfg
from .engine import STRATEGIES, AnalysisOptions
from .driver.diff import DiffError, diff_runs
from .driver.pipeline import InputError, RunConfig, run_analysis
from .driver.suppress import load_suppression_file


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 already; keep the message on stderr
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minisa", description="Path-sensitive static analyzer for MiniC.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analyze a compilation database or .mc files")
    a.add_argument("inputs", nargs="+", help="compile_commands.json or one or more .mc files")
    a.add_argument("--ctu", action="store_true", help="enable cross translation unit inlining")
    a.add_argument("--ctu-dir", help="where pass 1 stores serialized ASTs and the index")
    a.add_argument("--strategy", choices=STRATEGIES, default="unexplored-first")
    a.add_argument("--max-nodes", type=_positive, default=100_000)
    a.add_argument("--max-inline-depth", type=_positive, default=5)
    a.add_argument("--max-block-visits", type=_positive, default=4)
    a.add_argument("--max-inline-size", type=_positive, default=50)
    a.add_argument("--unroll-limit", type=_positive, default=3)
    a.add_argument("--widen-loops", action="store_true")
    a.add_argument("--refute", action="store_true", help="drop reports with infeasible path conditions")
    a.add_argument("--refute-width", type=int, choices=(4, 8, 16), default=8, help="bit width for exhaustive refutation")
    a.add_argument("--emit-smt", metavar="DIR", help="write an SMT-LIB query per report")
    a.add_argument("--coverage", action="store_true", help="write gcov-like coverage files")
    a.add_argument("--output-dir", default="minisa-results")
    a.add_argument("--format", choices=("plist", "html", "both"), default="plist")
    a.add_argument("--suppress-file", help="file listing issue hashes to suppress")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--dump-cfg", action="store_true", help="print every function's CFG")
    a.add_argument("--stats", action="store_true", help="print STAT lines on stderr")

    d = sub.add_parser("diff", help="compare two result directories by issue hash")
    d.add_argument("dir_a")
    d.add_argument("dir_b")
    return p


def _dump_cfgs(asts) -> None:
    for ast in asts:
        for fn in ast.definitions():
            print(f"== {ast.file}: {fn.name}")
            print(build_cfg(fn).dump())


def _analyze(ns: argparse.Namespace) -> int:
    hashes: frozenset = frozenset()
    if ns.suppress_file:
        try:
            hashes = frozenset(load_suppression_file(ns.suppress_file))
        except OSError as exc:
            print(f"minisa: error: cannot read suppression file: {exc}", file=sys.stderr)
            return 2
    options = AnalysisOptions(
        strategy=ns.strategy, max_nodes=ns.max_nodes, max_inline_depth=ns.max_inline_depth,
        max_inline_size=ns.max_inline_size, max_block_visits=ns.max_block_visits,
        unroll_limit=ns.unroll_limit, widen_loops=ns.widen_loops,
    )
    cfg = RunConfig(
        inputs=ns.inputs, output_dir=ns.output_dir, options=options, ctu=ns.ctu, ctu_dir=ns.ctu_dir,
        refute=ns.refute, refute_width=ns.refute_width, emit_smt=ns.emit_smt, coverage=ns.coverage,
        format=ns.format, suppress_hashes=hashes, jobs=ns.jobs,
    )
    try:
        result = run_analysis(cfg, _dump_cfgs if ns.dump_cfg else None)
    except InputError as exc:
        print(f"minisa: error: {exc}", file=sys.stderr)
        return 2
    for r in result.reports:
        print(f"{r['file']}:{r['line']}:{r['col']}: warning: {r['message']} [{r['checker']}]")
    if ns.stats:
        for k in sorted(result.stats):
            print(f"STAT: {k} = {result.stats[k]}", file=sys.stderr)
    return 1 if result.reports else 0


def _diff(ns: argparse.Namespace) -> int:
    try:
        res = diff_runs(ns.dir_a, ns.dir_b)
    except DiffError as exc:
        print(f"minisa: error: {exc}", file=sys.stderr)
        return 2
    print(res.summary())
    return 1 if res.new else 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return _analyze(ns) if ns.command == "analyze" else _diff(ns)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
