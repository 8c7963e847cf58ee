from minisa.frontend.ast import INT, PointerType, RecordType, SourceLoc, VarDecl
from minisa.memmodel import GLOBALS, HEAP, FieldRegion, RegionManager, StackSpace, base_region
from minisa.symstate import (
    UNDEFINED, UNKNOWN, ConcreteInt, DerivedSym, LocVal, NullLoc, State, SymbolManager, SymIntExpr, SymVal,
    UndefinedVal, eval_binop, invalidate, reachable_regions, remove_dead_bindings,
)

LOC = SourceLoc("t.mc", 1, 1)
REC = RecordType("X")


def var(i, name="v", ty=INT, storage="local"):
    return VarDecl(node_id=i, loc=LOC, name=name, type=ty, storage=storage)


def setup():
    regions = RegionManager()
    mgr = SymbolManager(regions)
    frame = regions.frame(None, "F:g#", 0)
    return regions, mgr, frame


def test_region_hierarchy_and_interning():
    regions, _mgr, frame = setup()
    x = regions.var(var(1, "x", REC), frame)
    a = regions.field("a", x, INT)
    assert a is regions.field("a", x, INT)
    assert isinstance(a, FieldRegion) and a.parent is x
    assert isinstance(x.parent, StackSpace)
    assert base_region(a) is x
    assert a.is_within(x) and not x.is_within(a)
    g = regions.var(var(2, "g", storage="global"), None)
    assert g.space() is GLOBALS


def test_bind_and_lookup():
    regions, mgr, frame = setup()
    x = regions.var(var(1, "x"), frame)
    s = State()
    assert s.lookup_loc(x, INT, mgr) == UNDEFINED
    s2 = s.bind_loc(x, ConcreteInt(4))
    assert s2.lookup_loc(x, INT, mgr) == ConcreteInt(4)
    assert s.lookup_loc(x, INT, mgr) == UNDEFINED


def test_params_and_globals_read_symbolically():
    regions, mgr, frame = setup()
    p = regions.var(var(1, "p", storage="param"), frame)
    g = regions.var(var(2, "g", storage="global"), None)
    for r in (p, g):
        v = State().lookup_loc(r, INT, mgr)
        assert isinstance(v, SymVal)


def test_invalidate_field_keeps_sibling():
    regions, mgr, frame = setup()
    x = regions.var(var(1, "x", REC), frame)
    a, b = regions.field("a", x, INT), regions.field("b", x, INT)
    s = State().bind_loc(a, ConcreteInt(0)).bind_loc(b, ConcreteInt(2))
    s = invalidate(s, [a], 7, frame, 1, mgr)
    assert isinstance(s.lookup_loc(a, INT, mgr), SymVal)
    assert s.lookup_loc(b, INT, mgr) == ConcreteInt(2)


def test_invalidate_record_uses_default_binding():
    regions, mgr, frame = setup()
    x = regions.var(var(1, "x", REC), frame)
    a, b = regions.field("a", x, INT), regions.field("b", x, INT)
    s = State().bind_loc(a, ConcreteInt(0)).bind_loc(b, ConcreteInt(2))
    s = invalidate(s, [x], 7, frame, 1, mgr)
    va, vb = s.lookup_loc(a, INT, mgr), s.lookup_loc(b, INT, mgr)
    assert isinstance(va.sym, DerivedSym) and isinstance(vb.sym, DerivedSym)
    assert va != vb


def test_reachable_regions_follow_pointers():
    regions, mgr, frame = setup()
    p = regions.var(var(1, "p", PointerType(INT)), frame)
    x = regions.var(var(2, "x"), frame)
    s = State().bind_loc(p, LocVal(x))
    assert x in reachable_regions(s, [p], mgr)


def test_dead_frame_bindings_removed():
    regions, mgr, frame = setup()
    callee = regions.frame(frame, "F:f#", 3)
    x = regions.var(var(1, "x"), callee)
    y = regions.var(var(2, "y"), frame)
    s = State().bind_loc(x, ConcreteInt(1)).bind_loc(y, ConcreteInt(2))
    s2, _ = remove_dead_bindings(s, [frame])
    assert s2.direct_binding(x) is None
    assert s2.direct_binding(y) == ConcreteInt(2)


def test_eval_binop_folds_and_builds_symbols():
    _regions, mgr, _frame = setup()
    assert eval_binop("+", ConcreteInt(2), ConcreteInt(3), mgr) == ConcreteInt(5)
    assert eval_binop("/", ConcreteInt(-7), ConcreteInt(2), mgr) == ConcreteInt(-3)
    assert eval_binop("%", ConcreteInt(-7), ConcreteInt(2), mgr) == ConcreteInt(-1)
    assert eval_binop("+", ConcreteInt(2**31 - 1), ConcreteInt(1), mgr) == ConcreteInt(-(2**31))
    assert isinstance(eval_binop("/", ConcreteInt(1), ConcreteInt(0), mgr), UndefinedVal)
    s = SymVal(mgr.conjured(1, (), 0, INT))
    v = eval_binop("+", s, ConcreteInt(4), mgr)
    assert isinstance(v.sym, SymIntExpr) and v.sym.rhs == 4
    assert eval_binop("-", s, s, mgr) == ConcreteInt(0)
    assert eval_binop("+", UNKNOWN, ConcreteInt(1), mgr) == UNKNOWN


def test_pointer_comparisons():
    regions, mgr, frame = setup()
    x = regions.var(var(1, "x"), frame)
    assert eval_binop("==", LocVal(x), NullLoc(), mgr) == ConcreteInt(0)
    assert eval_binop("==", LocVal(x), LocVal(x), mgr) == ConcreteInt(1)
    assert HEAP is not GLOBALS
