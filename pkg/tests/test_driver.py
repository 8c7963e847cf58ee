import hashlib
import json
import plistlib
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from minisa.cli import run
from minisa.driver import (
    CompdbError, apply_suppressions, diff_runs, issue_hash, load_compdb, load_suppression_file, write_plist,
)
from minisa.driver.coverage import render_coverage
from minisa.driver.hashing import normalize_line, token_index
from minisa.driver.plist import plist_document

from conftest import CORPUS, plist_bytes

LEAK = (CORPUS / "dedup_leak.mc").read_text()


def diags(out):
    return [d for p in sorted(Path(out).glob("*.plist")) for d in plistlib.loads(p.read_bytes())["diagnostics"]]


def report(**kw):
    base = {"checker": "core.DivideZero", "message": "Division by zero", "file": "a.mc", "line": 3, "col": 10,
            "fn_usr": "F:f#", "issue_hash": "h" * 64, "events": []}
    base.update(kw)
    return base


# -- compilation database ---------------------------------------------------------


def test_compdb_arguments_and_command(tmp_path):
    (tmp_path / "src").mkdir()
    (tmp_path / "src" / "a.mc").write_text("int f() { return 0; }")
    (tmp_path / "b.mc").write_text("int g() { return 0; }")
    db = tmp_path / "compile_commands.json"
    db.write_text(json.dumps([
        {"directory": str(tmp_path / "src"), "file": "a.mc", "arguments": ["cc", "-c", "a.mc"]},
        {"directory": ".", "file": "b.mc", "command": "cc -c 'b.mc'"},
    ]))
    a, b = load_compdb(str(db))
    assert a.path == str(tmp_path / "src" / "a.mc") and a.arguments == ("cc", "-c", "a.mc")
    assert b.path == str(tmp_path / "b.mc") and b.arguments == ("cc", "-c", "b.mc")


@pytest.mark.parametrize("content", ["{", "{}", "[{\"directory\": \".\"}]", "[{\"file\": \"missing.mc\"}]",
                                     "[{\"file\": \"x.mc\", \"arguments\": \"cc\"}]"])
def test_compdb_errors(tmp_path, content):
    (tmp_path / "x.mc").write_text("")
    db = tmp_path / "cc.json"
    db.write_text(content)
    with pytest.raises(CompdbError):
        load_compdb(str(db))


# -- issue hash ---------------------------------------------------------------------


def test_issue_hash_recipe():
    line = "    return   9 / c;  // why"
    expected = hashlib.sha256(("core.DivideZero" + "F:f#i" + "return 9 / c; // why" + "2").encode()).hexdigest()
    assert issue_hash("core.DivideZero", "F:f#i", line, 16) == expected


def test_token_index():
    assert token_index("  a = b / c;", 3) == 0
    assert token_index("  a = b / c;", 9) == 3
    assert token_index("  a = b / c;", 8) == 3
    assert token_index("x", 40) == 1


@given(st.text(alphabet=" \tab=;", max_size=30))
def test_normalize_line_is_idempotent(s):
    assert normalize_line(normalize_line(s)) == normalize_line(s)
    assert normalize_line("  " + s + "\t") == normalize_line(s)


def _hashes(tmp_path, name, text):
    src = tmp_path / name
    src.write_text(text)
    out = tmp_path / ("out_" + name)
    run(["analyze", str(src), "--output-dir", str(out)])
    return {d["issue_hash"] for d in diags(out)}


def test_hash_stable_when_function_moves(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    before = _hashes(tmp_path, "a.mc", LEAK)
    (tmp_path / "sub").mkdir()
    after = _hashes(tmp_path, "sub/renamed.mc", "// header\n" * 10 + LEAK)
    assert before and before == after


def test_moved_function_is_common_in_diff(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for d, text in (("A", LEAK), ("B", "\n" * 10 + LEAK)):
        (tmp_path / d).mkdir()
        (tmp_path / d / "x.mc").write_text(text)
        run(["analyze", f"{d}/x.mc", "--output-dir", f"out{d}"])
    res = diff_runs("outA", "outB")
    assert len(res.common) == 1 and not res.new and not res.resolved


# -- suppression --------------------------------------------------------------------


@pytest.mark.parametrize("lines,kept", [
    (["  return 9/c; // minisa-suppress core.DivideZero"], 0),
    (["  // minisa-suppress all", "  return 9/c;"], 0),
    (["  return 9/c; // minisa-suppress unix.Malloc"], 1),
    (["  return 9/c;"], 1),
])
def test_comment_suppression(lines, kept):
    text = ["int f() {"] * (3 - len(lines)) + lines
    r = report(line=3)
    got, dropped = apply_suppressions([r], lambda f, n: text[n - 1] if n <= len(text) else "")
    assert len(got) == kept and len(dropped) == 1 - kept


def test_hash_file_suppression(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("# comment\n" + "a" * 64 + "  # trailing\n\n")
    hashes = load_suppression_file(str(f))
    assert hashes == {"a" * 64}
    kept, dropped = apply_suppressions([report(issue_hash="a" * 64), report()], lambda f, n: "", hashes)
    assert len(kept) == 1 and len(dropped) == 1


# -- plist --------------------------------------------------------------------------


def test_plist_schema_and_order(tmp_path):
    reports = [
        report(file="b.mc", line=1),
        report(file="a.mc", line=9, checker="unix.Malloc",
               events=[{"kind": "alloc", "file": "a.mc", "line": 2, "col": 3, "message": "Memory is allocated"}]),
        report(file="a.mc", line=2),
    ]
    path = tmp_path / "r.plist"
    write_plist(reports, str(path))
    raw = path.read_bytes()
    assert b'<plist version="1.0">' in raw
    doc = plistlib.loads(raw)
    assert doc["files"] == ["a.mc", "b.mc"]
    locs = [(doc["files"][d["location"]["file"]], d["location"]["line"]) for d in doc["diagnostics"]]
    assert locs == [("a.mc", 2), ("a.mc", 9), ("b.mc", 1)]
    d = doc["diagnostics"][1]
    assert set(d) == {"check_name", "description", "issue_hash", "location", "path"}
    assert d["path"][0] == {"kind": "alloc", "location": {"file": 0, "line": 2, "col": 3}, "message": "Memory is allocated"}


def test_empty_plist_is_valid(tmp_path):
    write_plist([], str(tmp_path / "e.plist"))
    assert plistlib.loads((tmp_path / "e.plist").read_bytes()) == {"diagnostics": [], "files": []}


def test_plist_document_is_order_independent():
    rs = [report(line=i, issue_hash=str(i) * 64) for i in range(5)]
    assert plist_document(rs) == plist_document(rs[::-1])


# -- coverage -------------------------------------------------------------------------


def test_render_coverage():
    out = render_coverage("int f() {\n  return 0;\n}\n", {1: 1, 2: 3}, {1, 2}).splitlines()
    assert out == ["1:1:int f() {", "3:2:  return 0;", "-:3:}"]
    assert render_coverage("a\nb\n", {}, {2}).splitlines() == ["-:1:a", "0:2:b"]


# -- diff -----------------------------------------------------------------------------


def test_diff_partitions(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    write_plist([report(issue_hash="1" * 64), report(issue_hash="2" * 64, line=4)], str(a / "x.plist"))
    write_plist([report(issue_hash="2" * 64, line=4), report(issue_hash="3" * 64, line=5)], str(b / "x.plist"))
    res = diff_runs(str(a), str(b))
    assert res.new == {"3" * 64} and res.resolved == {"1" * 64} and res.common == {"2" * 64}
    text = res.summary()
    assert "NEW a.mc:5" in text and "RESOLVED a.mc:3" in text
    same = diff_runs(str(a), str(a))
    assert not same.new and not same.resolved and len(same.common) == 2


# -- command line --------------------------------------------------------------------------


@pytest.fixture
def leak_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "leak.mc").write_text(LEAK)
    (tmp_path / "ctx.mc").write_text((CORPUS / "context.mc").read_text())
    return tmp_path


def test_exit_codes(leak_dir, capsys):
    assert run(["analyze", "ctx.mc", "--output-dir", "o1"]) == 0
    assert run(["analyze", "leak.mc", "--output-dir", "o2"]) == 1
    assert "leak.mc:4:5: warning: Potential memory leak [unix.Malloc]" in capsys.readouterr().out
    assert run(["analyze", "nope.json"]) == 2
    assert run(["analyze", "missing.mc"]) == 2
    assert run(["analyze", "leak.mc", "--ctu-dir", "x"]) == 2
    assert run(["analyze", "leak.mc", "--jobs", "0"]) == 2
    assert run(["analyze", "leak.mc", "--strategy", "random"]) == 2
    assert run(["analyze", "leak.mc", "--refute-width", "12"]) == 2
    assert run(["bogus"]) == 2


def test_parse_error_is_input_error(leak_dir, capsys):
    Path("bad.mc").write_text("int f( {")
    assert run(["analyze", "bad.mc"]) == 2
    assert "bad.mc:1" in capsys.readouterr().err


def test_leak_plist_has_alloc_note(leak_dir):
    run(["analyze", "leak.mc", "--output-dir", "o"])
    (d,) = diags("o")
    assert d["check_name"] == "unix.Malloc"
    assert any(e["kind"] == "alloc" and e["location"]["line"] == 2 for e in d["path"])


def test_stats_lines(leak_dir, capsys):
    run(["analyze", "leak.mc", "--stats", "--output-dir", "o"])
    err = capsys.readouterr().err.splitlines()
    assert "STAT: reports = 1" in err
    assert all(line.startswith("STAT: ") for line in err)
    names = [line.split()[1] for line in err]
    assert names == sorted(names)


def test_suppress_file_flag(leak_dir):
    run(["analyze", "leak.mc", "--output-dir", "o"])
    (d,) = diags("o")
    Path("supp.txt").write_text(d["issue_hash"] + "\n")
    assert run(["analyze", "leak.mc", "--output-dir", "o2", "--suppress-file", "supp.txt"]) == 0
    assert diags("o2") == []
    assert "hash_suppressed_reports = 1" in Path("o2/stats.txt").read_text()


def test_comment_suppression_end_to_end(leak_dir):
    Path("s.mc").write_text(LEAK.replace("return 1;", "return 1; // minisa-suppress unix.Malloc"))
    assert run(["analyze", "s.mc", "--output-dir", "o"]) == 0
    assert "comment_suppressed_reports = 1" in Path("o/stats.txt").read_text()


def test_html_and_dump_cfg(leak_dir, capsys):
    run(["analyze", "leak.mc", "--format", "html", "--dump-cfg", "--output-dir", "o"])
    out = capsys.readouterr().out
    assert "== leak.mc: f" in out and "B0 (ENTRY)" in out
    html = Path("o/index.html").read_text()
    assert html.startswith("<!DOCTYPE html>") and "Potential memory leak" in html and "<details>" in html
    assert not list(Path("o").glob("*.plist"))


def test_jobs_match_serial(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("dedup_leak.mc", "refutation.mc", "context.mc", "inline_defensive_not.mc"):
        (tmp_path / name).write_text((CORPUS / name).read_text())
    files = sorted(str(p.name) for p in tmp_path.glob("*.mc"))
    run(["analyze", *files, "--output-dir", "serial"])
    run(["analyze", *files, "--output-dir", "pool", "--jobs", "3"])
    assert plist_bytes("serial") == plist_bytes("pool")
    assert Path("serial/stats.txt").read_text() == Path("pool/stats.txt").read_text()


def test_coverage_files(leak_dir):
    run(["analyze", "leak.mc", "--coverage", "--output-dir", "o"])
    lines = Path("o/coverage/leak.mc.gcov").read_text().splitlines()
    assert len(lines) == len(LEAK.splitlines())
    assert lines[1].startswith("2:2:") or int(lines[1].split(":")[0]) >= 1
    assert lines[-1] == "-:7:}"


def test_diff_command(leak_dir, capsys):
    Path("fixed.mc").write_text(LEAK.replace("    return 1;", "  { free(p); return 1; }").replace("  return 0;", "  free(p); return 0;"))
    run(["analyze", "leak.mc", "--output-dir", "A"])
    run(["analyze", "fixed.mc", "--output-dir", "B"])
    capsys.readouterr()
    assert run(["diff", "A", "B"]) == 0
    assert "RESOLVED leak.mc:4" in capsys.readouterr().out
    assert run(["diff", "B", "A"]) == 1
    assert run(["diff", "A", "missing"]) == 2
