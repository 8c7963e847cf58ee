from minisa.cfg import Branch, ReturnTerm, build_call_graph, build_cfg, top_level_order, violated_edges
from minisa.frontend.parser import parse_translation_unit


def fn_of(src, name=None):
    ast = parse_translation_unit(src, "t.mc")
    fns = list(ast.definitions())
    return fns[0] if name is None else next(f for f in fns if f.name == name)


def test_straight_line():
    cfg = build_cfg(fn_of("int f(int x) { int y = x; y = y + 1; return y; }"))
    entry = cfg.block(cfg.entry)
    assert cfg.block(cfg.exit).succs == []
    reach, todo = set(), [cfg.entry]
    while todo:
        b = todo.pop()
        if b not in reach:
            reach.add(b)
            todo.extend(cfg.block(b).succs)
    assert cfg.exit in reach
    assert entry.succs


def test_if_creates_branch():
    cfg = build_cfg(fn_of("int f(int x) { int y = 0; if (x > 1) y = 1; return y; }"))
    branches = [b for b in cfg.blocks if isinstance(b.terminator, Branch)]
    assert len(branches) == 1
    t = branches[0].terminator
    assert t.true_succ != t.false_succ


def test_loop_info():
    cfg = build_cfg(fn_of("int f(int n) { int i = 0; while (i < n) i = i + 1; return i; }"))
    assert len(cfg.loops) == 1
    (loop,) = cfg.loops.values()
    head = cfg.block(loop.head)
    assert isinstance(head.terminator, Branch)
    assert {head.terminator.true_succ, head.terminator.false_succ} == {loop.body_entry, loop.exit}
    assert loop.head in cfg.preds(loop.body_entry) or loop.body_entry == loop.head


def test_short_circuit_lowered_to_branches():
    cfg = build_cfg(fn_of("int f(int a, int b) { if (a && b) return 1; return 0; }"))
    assert sum(isinstance(b.terminator, Branch) for b in cfg.blocks) == 2


def test_returns_reach_exit():
    cfg = build_cfg(fn_of("int f(int a) { if (a) return 1; return 2; }"))
    rets = [b for b in cfg.blocks if isinstance(b.terminator, ReturnTerm)]
    assert rets and all(b.terminator.succ == cfg.exit for b in rets)


def test_dump_lists_blocks():
    out = build_cfg(fn_of("int f(int a) { while (a > 0) a = a - 1; return a; }")).dump()
    assert "ENTRY" in out and "EXIT" in out and "branch a > 0" in out


def test_call_graph_order_puts_callers_first():
    src = """int leaf(int x) { return x; }
int mid(int x) { return leaf(x); }
int top() { return mid(1) + leaf(2); }"""
    ast = parse_translation_unit(src, "t.mc")
    cg = build_call_graph(ast.definitions())
    order = top_level_order(cg)
    assert order.index("F:top#") < order.index("F:mid#i") < order.index("F:leaf#i")
    assert violated_edges(order, cg) == 0


def test_call_graph_cycle_terminates():
    src = """int a(int x) { return b(x); }
int b(int x) { if (x) return a(x - 1); return 0; }"""
    ast = parse_translation_unit("int b(int x);\n" + src, "t.mc")
    cg = build_call_graph(ast.functions())
    order = top_level_order(cg)
    assert sorted(order) == ["F:a#i", "F:b#i"]
    assert violated_edges(order, cg) == 1
