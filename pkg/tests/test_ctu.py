import pytest

from minisa.ctu import CtuDir, CtuLoader, IndexConflict, OdrViolation, ctu_pass1, definition_digest
from minisa.engine import analyze_tu
from minisa.frontend.parser import parse_translation_unit

from conftest import CORPUS


def parse(name):
    return parse_translation_unit((CORPUS / name).read_text(), name)


def test_pass1_writes_sorted_index(tmp_path):
    asts = [parse("ctu3/scale.mc"), parse("ctu3/offset.mc"), parse("ctu3/main.mc")]
    d = ctu_pass1(asts, tmp_path)
    lines = (tmp_path / "index.txt").read_text().splitlines()
    assert lines == sorted(lines)
    assert "F:offset#i asts/offset.ast" in lines
    assert sorted((tmp_path / "asts").iterdir()) == sorted(tmp_path / "asts" / n for n in ("main.ast", "offset.ast", "scale.ast"))
    assert CtuDir.open(tmp_path).index == d.index


def test_pass1_output_independent_of_order(tmp_path):
    a = [parse("ctu3/scale.mc"), parse("ctu3/offset.mc"), parse("ctu3/main.mc")]
    ctu_pass1(a, tmp_path / "x")
    ctu_pass1(a[::-1], tmp_path / "y")
    for rel in ("index.txt", "records.txt", "asts/main.ast"):
        assert (tmp_path / "x" / rel).read_bytes() == (tmp_path / "y" / rel).read_bytes()


def test_stem_collisions_get_suffixes(tmp_path):
    a = parse_translation_unit("int f(int x) { return x; }", "one/u.mc")
    b = parse_translation_unit("int g(int x) { return x; }", "two/u.mc")
    ctu_pass1([a, b], tmp_path)
    assert sorted(p.name for p in (tmp_path / "asts").iterdir()) == ["u.ast", "u_1.ast"]


def test_conflicting_definitions(tmp_path):
    a = parse_translation_unit("int f(int x) { return x; }", "a.mc")
    b = parse_translation_unit("int f(int x) { return x + 1; }", "b.mc")
    with pytest.raises(IndexConflict):
        ctu_pass1([a, b], tmp_path)


def test_identical_definitions_are_not_conflicts(tmp_path):
    a = parse_translation_unit("int f(int x) { return x; }", "a.mc")
    b = parse_translation_unit("\n\nint f(int x) {\n  return x;\n}", "b.mc")
    assert definition_digest(next(a.definitions())) == definition_digest(next(b.definitions()))
    ctu_pass1([a, b], tmp_path)


def test_odr_violation_on_record_layout(tmp_path):
    a = parse_translation_unit("struct S { int a; };", "a.mc")
    b = parse_translation_unit("struct S { int a; int b; };", "b.mc")
    with pytest.raises(OdrViolation):
        ctu_pass1([a, b], tmp_path)


def test_loader_caches_and_excludes_own_tu(tmp_path):
    main, scale, offset = parse("ctu3/main.mc"), parse("ctu3/scale.mc"), parse("ctu3/offset.mc")
    d = ctu_pass1([main, scale, offset], tmp_path)
    loader = CtuLoader(d, exclude_file="ctu3/main.mc")
    f1 = loader.load("F:offset#i")
    f2 = loader.load("F:offset#i")
    assert f1 is f2 and f1.name == "offset"
    assert loader.loads == 1
    assert loader.ast_of(f1).file == "ctu3/offset.mc"
    assert loader.load("F:run#i") is None
    assert loader.load("F:missing#") is None


def test_loader_counts_broken_files(tmp_path):
    d = ctu_pass1([parse("ctu3/offset.mc")], tmp_path)
    (tmp_path / "asts" / "offset.ast").write_bytes(b"garbage")
    loader = CtuLoader(d)
    assert loader.load("F:offset#i") is None
    assert loader.load_errors == 1


def test_ctu_analysis_finds_cross_tu_bug(tmp_path):
    a, b = parse("ctu_fn/a.mc"), parse("ctu_fn/b.mc")
    d = ctu_pass1([a, b], tmp_path)
    res = analyze_tu(a, ctu=CtuLoader(d, exclude_file=a.file))
    assert [(r.checker, r.loc.file, r.loc.line) for r in res.reports] == [("core.DivideZero", "ctu_fn/b.mc", 3)]
    assert res.stats["ctu_ast_loads"] == 1
    assert analyze_tu(a).reports == []
