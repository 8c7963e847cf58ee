"""Orchestration of one analysis run over a set of translation units.

Per-TU work (analysis, refutation, hashing, comment suppression) happens in
:func:`analyze_job`, which only exchanges plain data so it can run in a
process pool. Everything after that is a single-threaded reduction sorted
by stable keys, so the output does not depend on TU order or job count.
"""
from __future__ import annotations

import os
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..ctu import CtuDir, CtuLoader, ctu_pass1
from ..engine import AnalysisOptions, analyze_tu
from ..frontend.ast import Ast
from ..frontend.parser import parse_translation_unit
from ..refutation import UnsupportedFragment, collect_path_conditions, emit_smtlib, refute_exact
from .coverage import executable_lines, write_coverage
from .hashing import issue_hash
from .html import write_html
from .plist import report_sort_key, write_plist
from .suppress import apply_suppressions


class InputError(Exception):
    """Bad input files or option combinations (exit code 2)."""


@dataclass
class RunConfig:
    inputs: list[str]
    output_dir: str = "minisa-results"
    options: AnalysisOptions = field(default_factory=AnalysisOptions)
    ctu: bool = False
    ctu_dir: Optional[str] = None
    refute: bool = False
    refute_width: int = 8
    emit_smt: Optional[str] = None
    coverage: bool = False
    format: str = "plist"
    suppress_hashes: frozenset = frozenset()
    jobs: int = 1


@dataclass
class Unit:
    """One translation unit: display name (relative, '/'-separated) and on-disk path."""

    name: str
    path: str


@dataclass
class Job:
    unit: Unit
    sources: dict[str, str]  # display name -> path, for every TU
    options: AnalysisOptions
    ctu_root: Optional[str]
    refute: bool
    refute_width: int
    emit_smt: Optional[str]


@dataclass
class TuOutput:
    name: str
    reports: list[dict]
    coverage: dict[str, dict[int, int]]
    stats: dict[str, int]


@dataclass
class RunResult:
    reports: list[dict]
    stats: Counter
    outputs: list[TuOutput]


def _display(path: str, base: str) -> str:
    path = os.path.abspath(path)
    rel = os.path.relpath(path, base)
    if rel.startswith(".."):
        rel = path
    return rel.replace(os.sep, "/")


def resolve_inputs(inputs: list[str]) -> list[Unit]:
    """Turn a database path or a list of ``.mc`` files into units sorted by name."""
    from .compdb import CompdbError, load_compdb

    if not inputs:
        raise InputError("no input files")
    if len(inputs) == 1 and inputs[0].endswith(".json"):
        try:
            entries = load_compdb(inputs[0])
        except CompdbError as exc:
            raise InputError(str(exc)) from exc
        base = os.path.dirname(os.path.abspath(inputs[0]))
        paths = [e.path for e in entries]
    else:
        base = os.getcwd()
        paths = []
        for p in inputs:
            if not os.path.isfile(p):
                raise InputError(f"no such file '{p}'")
            paths.append(os.path.abspath(p))
    units: dict[str, Unit] = {}
    for p in paths:
        name = _display(p, base)
        units.setdefault(name, Unit(name, p))
    return [units[k] for k in sorted(units)]


def read_source(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse_unit(unit: Unit) -> Ast:
    return parse_translation_unit(read_source(unit.path), unit.name)


class _Lines:
    def __init__(self, sources: dict[str, str]):
        self.sources = sources
        self.cache: dict[str, list[str]] = {}

    def __call__(self, file: str, n: int) -> str:
        if file not in self.cache:
            path = self.sources.get(file)
            self.cache[file] = read_source(path).splitlines() if path else []
        lines = self.cache[file]
        return lines[n - 1] if 1 <= n <= len(lines) else ""


def _event(e) -> dict:
    return {"kind": e.kind, "file": e.loc.file, "line": e.loc.line, "col": e.loc.col, "message": e.message}


def analyze_job(job: Job) -> TuOutput:
    """Analyze one TU and return picklable results."""
    ast = parse_unit(job.unit)
    loader = None
    if job.ctu_root is not None:
        loader = CtuLoader(CtuDir.open(job.ctu_root), exclude_file=job.unit.name)
    res = analyze_tu(ast, job.options, loader)
    stats = Counter(res.stats)
    lines = _Lines(job.sources)

    plain = []
    for r in res.reports:
        if r.suppressed:
            continue
        h = issue_hash(r.checker, r.fn_usr, lines(r.loc.file, r.loc.line), r.loc.col)
        if job.emit_smt or job.refute:
            pc = collect_path_conditions(r)
        if job.emit_smt:
            try:
                Path(job.emit_smt, f"{h}.smt2").write_text(emit_smtlib(pc), encoding="utf-8")
            except UnsupportedFragment:
                stats["smt_unsupported_reports"] += 1
        if job.refute and refute_exact(pc, width=job.refute_width).infeasible:
            stats["refuted_reports"] += 1
            continue
        plain.append({
            "checker": r.checker, "message": r.message, "file": r.loc.file, "line": r.loc.line,
            "col": r.loc.col, "fn_usr": r.fn_usr, "issue_hash": h, "events": [_event(e) for e in r.events],
        })
    kept, dropped = apply_suppressions(plain, lines)
    stats["comment_suppressed_reports"] += len(dropped)
    coverage = {f: dict(c) for f, c in res.coverage.items()}
    return TuOutput(job.unit.name, kept, coverage, dict(stats))


def unique_names(names: list[str], ext: str) -> list[str]:
    out, used = [], set()
    for n in names:
        stem = Path(n).stem or "tu"
        cand, k = f"{stem}{ext}", 1
        while cand in used:
            cand, k = f"{stem}_{k}{ext}", k + 1
        used.add(cand)
        out.append(cand)
    return out


def run_analysis(cfg: RunConfig, dump_cfg=None) -> RunResult:
    """Full pipeline; raises :class:`InputError` for unusable input."""
    from ..frontend.lexer import FrontendError
    from ..ctu import CtuError

    if cfg.ctu_dir and not cfg.ctu:
        raise InputError("--ctu-dir requires --ctu")
    if cfg.jobs < 1:
        raise InputError("--jobs must be at least 1")
    units = resolve_inputs(cfg.inputs)
    try:
        asts = [parse_unit(u) for u in units]
    except FrontendError as exc:
        raise InputError(str(exc)) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read input: {exc}") from exc
    if dump_cfg is not None:
        dump_cfg(asts)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.emit_smt:
        Path(cfg.emit_smt).mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory(prefix="minisa-ctu-") as tmp:
        ctu_root = None
        if cfg.ctu:
            ctu_root = cfg.ctu_dir or tmp
            try:
                ctu_pass1(asts, ctu_root)
            except CtuError as exc:
                raise InputError(str(exc)) from exc
        sources = {u.name: u.path for u in units}
        jobs = [Job(u, sources, cfg.options, ctu_root, cfg.refute, cfg.refute_width, cfg.emit_smt) for u in units]
        if cfg.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(jobs))) as pool:
                outputs = list(pool.map(analyze_job, jobs))
        else:
            outputs = [analyze_job(j) for j in jobs]
    outputs.sort(key=lambda o: o.name)

    hashes = cfg.suppress_hashes
    stats: Counter = Counter()
    all_reports: list[dict] = []
    for o in outputs:
        stats.update(o.stats)
        kept = [r for r in o.reports if r["issue_hash"] not in hashes]
        stats["hash_suppressed_reports"] += len(o.reports) - len(kept)
        o.reports = sorted(kept, key=report_sort_key)
        all_reports.extend(o.reports)
    all_reports.sort(key=report_sort_key)
    stats["reports"] = len(all_reports)
    stats["translation_units"] = len(units)

    if cfg.format in ("plist", "both"):
        for o, name in zip(outputs, unique_names([o.name for o in outputs], ".plist")):
            write_plist(o.reports, str(out_dir / name))
    if cfg.format in ("html", "both"):
        write_html(all_reports, str(out_dir / "index.html"))
    if cfg.coverage:
        merged: dict[str, Counter] = {}
        for o in outputs:
            for f, counts in o.coverage.items():
                merged.setdefault(f, Counter()).update(counts)
        cov_dir = out_dir / "coverage"
        cov_dir.mkdir(exist_ok=True)
        for u, ast, name in zip(units, asts, unique_names([u.name for u in units], ".mc.gcov")):
            write_coverage(read_source(u.path), merged.get(u.name, {}), executable_lines(ast), str(cov_dir / name))
    with open(out_dir / "stats.txt", "w", encoding="utf-8", newline="\n") as fh:
        for k in sorted(stats):
            fh.write(f"{k} = {stats[k]}\n")
    return RunResult(all_reports, stats, outputs)
