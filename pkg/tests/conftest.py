import os
import shutil
from pathlib import Path

import pytest

from minisa.engine import AnalysisOptions, analyze_tu
from minisa.frontend.parser import parse_translation_unit

CORPUS = Path(__file__).parent / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


def analyze(src: str, name: str = "t.mc", **opts):
    return analyze_tu(parse_translation_unit(src, name), AnalysisOptions(**opts))


def analyze_corpus(name: str, **opts):
    return analyze(corpus_text(name), name, **opts)


def visible(result):
    return [r for r in result.reports if not r.suppressed]


@pytest.fixture
def project(tmp_path, monkeypatch):
    """Copy corpus entries into a scratch directory and chdir there."""

    def make(*names: str) -> Path:
        for n in names:
            src = CORPUS / n
            dst = tmp_path / n
            if src.is_dir():
                shutil.copytree(src, dst)
            else:
                dst.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy(src, dst)
        return tmp_path

    monkeypatch.chdir(tmp_path)
    return make


def plist_bytes(directory: os.PathLike) -> bytes:
    d = Path(directory)
    return b"".join(p.read_bytes() for p in sorted(d.glob("*.plist")))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
