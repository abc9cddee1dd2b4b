import itertools
from importlib.resources import files

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tphen.lang import (
    ArityMismatch,
    ClassMismatch,
    CyclicDefinition,
    LexError,
    ParseError,
    UnguardedNegation,
    UnknownPredicate,
    UnsafeHeadVariable,
    VariableMismatch,
    build_levels,
    compile_program,
    parse_program,
    pretty,
    tokenize,
    typecheck,
)
from tphen.lang import printer
from tphen.lang.ast import (
    Atom,
    BinOp,
    Comparison,
    Const,
    FormulaClass,
    Not,
    Relation,
    StartEnd,
    Var,
    walk,
)
from tphen.lang.parser import parse_formula

I, S, D = FormulaClass.INSTANT, FormulaClass.STATE, FormulaClass.DYNAMIC

MARITIME = files("tphen").joinpath("data/maritime.tpd").read_text()


def types(text):
    return [repr(t) for t in tokenize(text)[:-1]]


# -- lexing -------------------------------------------------------------------


def test_tokenize_state_head():
    assert types("state stopped(V):") == ["KW_STATE", "IDENT stopped", "LPAREN", "VAR V", "RPAREN", "COLON"]


def test_tokenize_comparison():
    assert types("Speed <= 0.5") == ["VAR Speed", "LE", "NUM 0.5"]


def test_tokenize_illegal_character_position():
    with pytest.raises(LexError) as info:
        tokenize("@")
    assert (info.value.line, info.value.col) == (1, 1)


def test_ascii_and_unicode_spellings_agree():
    uni = "¬a ∧ b ∨ c ↣ d ⊔ e ⊓ f ∖ g ≤ ≥ ≠"
    asc = "~a & b | c ~> d union e intersection f complement g <= >= !="
    assert [t.type for t in tokenize(uni)] == [t.type for t in tokenize(asc)]
    assert tokenize("\\")[0].type == "COMPL"


def test_positions_skip_comments():
    toks = tokenize("% heading\n  event x:")
    assert toks[0].type == "KW_EVENT" and (toks[0].line, toks[0].col) == (2, 3)


@pytest.mark.parametrize(
    "text, value",
    [("42", 42), ("-3", -3), ("2.5", 2.5), ("1e3", 1000.0), ("'Port A'", "Port A"), ('"x\\"y"', 'x"y')],
)
def test_literals(text, value):
    tok = tokenize(text)[0]
    assert tok.value == value and type(tok.value) is type(value)


def test_unterminated_string():
    with pytest.raises(LexError, match="unterminated"):
        tokenize("'abc")


# -- parsing ------------------------------------------------------------------


def test_empty_input_is_empty_program():
    prog = parse_program("")
    assert prog.declarations == () and prog.definitions == ()
    assert parse_program("% nothing here\n").definitions == ()


def test_stopped_structure():
    prog = parse_program(MARITIME)
    d = prog.definition("stopped")
    assert d.kind == "state" and d.head == Atom("stopped", (Var("Vessel"),))
    assert d.body == BinOp("range", Atom("stop_start", (Var("Vessel"),)), Atom("stop_end", (Var("Vessel"),)))
    aux = prog.definition("stop_start").body
    assert aux.op == "and" and isinstance(aux.right, Comparison)
    assert (aux.right.op, aux.right.right) == ("<=", Const(0.5))


def test_moored_structure():
    body = parse_program(MARITIME).definition("moored").body
    assert body == BinOp(
        "intersection",
        Atom("stopped", (Var("Vessel"),)),
        Atom("in_port", (Var("Vessel"), Var("Port"))),
    )


def test_fishing_trip_structure():
    body = parse_program(MARITIME).definition("fishing_trip").body
    assert isinstance(body, Relation) and body.relation == "before"
    assert body.right == StartEnd("start", Atom("moored", (Var("Vessel"), Var("PortB"))))
    inner = body.left
    assert inner.relation == "before" and inner.left.op == "end"
    assert inner.right.relation == "contains"


@pytest.mark.parametrize(
    "text, tree",
    [
        ("a & b | c", BinOp("or", BinOp("and", Atom("a", ()), Atom("b", ())), Atom("c", ()))),
        ("a ~> b union c", BinOp("union", BinOp("range", Atom("a", ()), Atom("b", ())), Atom("c", ()))),
        ("a complement b intersection c", BinOp("intersection", BinOp("complement", Atom("a", ()), Atom("b", ())), Atom("c", ()))),
        ("a before b meets c", Relation("meets", Relation("before", Atom("a", ()), Atom("b", ())), Atom("c", ()))),
        ("~a & b", BinOp("and", Not(Atom("a", ())), Atom("b", ()))),
        ("a & (b | c)", BinOp("and", Atom("a", ()), BinOp("or", Atom("b", ()), Atom("c", ())))),
    ],
)
def test_precedence(text, tree):
    assert parse_formula(text) == tree


def test_anonymous_variables_are_distinct():
    d = parse_program("input event p/3. event q(X): p(X, _, _).").definitions[0]
    a, b = d.body.args[1:]
    assert a != b and a.anonymous and b.anonymous


def test_arity_mismatch():
    with pytest.raises(ArityMismatch) as info:
        parse_program("input event p/2. event q(X): p(X).")
    assert info.value.line == 1


@pytest.mark.parametrize("text", ["event q(X) p(X).", "event q(X): p(X)", "event q(X): p(X) & .", "state : a."])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_program(text)


def test_parse_error_names_expected_token():
    with pytest.raises(ParseError, match="':'"):
        parse_program("event q(X) p(X).")


# -- classes and safety -------------------------------------------------------


def compile_with(decls, body, kind="event", head="h(V)"):
    return compile_program(f"{decls}\n{kind} {head}: {body}.")


def test_start_of_state_is_instant():
    prog = compile_with("input state s/1. input event e/1.", "start(s(V)) & e(V)")
    body = prog.definition("h").body
    assert body.cls is I and body.left.cls is I and body.left.child.cls is S


def test_union_in_event_body_is_class_mismatch():
    with pytest.raises(ClassMismatch):
        compile_with("input state a/1. input state b/1.", "a(V) union b(V)")


def test_union_of_events_is_class_mismatch():
    with pytest.raises(ClassMismatch):
        compile_with("input event a/1. input event b/1.", "a(V) union b(V)", kind="state")


def test_fishing_trip_classes():
    body = compile_program(MARITIME).definition("fishing_trip").body
    first, last = body.left, body.right
    assert body.cls is D and first.cls is D
    assert first.left.cls is I and last.cls is I
    contains = first.right
    assert contains.cls is D and contains.left.cls is S and contains.right.cls is S


@pytest.mark.parametrize(
    "body, error",
    [
        ("~a(V)", UnguardedNegation),
        ("a(V) | ~b(V)", UnguardedNegation),
        ("a(V) & ~b(W) & W > 1", UnguardedNegation),
        ("a(V) & W > 3", UnguardedNegation),
        ("a(V) | b(W)", VariableMismatch),
        ("b(W)", UnsafeHeadVariable),
        ("undefined(V)", UnknownPredicate),
    ],
)
def test_safety_errors(body, error):
    with pytest.raises(error):
        compile_with("input event a/1. input event b/1.", body)


def test_range_right_operand_must_not_add_variables():
    with pytest.raises(VariableMismatch):
        compile_with(
            "input event a/1. input event b/2. input state c/1.",
            "(a(V) ~> b(V, W)) intersection c(W)",
            kind="state",
        )


def test_local_variables_are_projected_away():
    prog = compile_with("input event a/1. input event b/2.", "a(V) ~> b(V, _)", kind="state")
    assert prog.warnings == ()


def test_guarded_negation_accepted():
    prog = compile_with("input event a/1. input event b/1.", "a(V) & ~b(V)")
    assert prog.warnings == ()


def test_repeated_head_variable():
    with pytest.raises(UnsafeHeadVariable):
        compile_with("input event a/2.", "a(V, W)", head="h(V, V)")


def test_head_class_must_match_body():
    with pytest.raises(ClassMismatch):
        compile_with("input state a/1.", "a(V)", kind="event")


def test_warnings():
    prog = compile_program("input event a/2. input event unused/1. event h(V): a(V, W).")
    codes = sorted(w.code for w in prog.warnings)
    assert codes == ["singleton-variable", "unused-input"]


def test_compile_error_reports_position():
    with pytest.raises(ClassMismatch) as info:
        compile_program("input state a/1.\n\nevent h(V):\n   a(V).")
    assert info.value.line == 4 and str(info.value).startswith("4:")


# -- levels -------------------------------------------------------------------


def test_maritime_levels():
    levels = compile_program(MARITIME).graph.levels
    assert levels == {
        "ais": 0,
        "in_port": 0,
        "in_fishing_area": 0,
        "stop_start": 1,
        "stop_end": 1,
        "stopped": 2,
        "underway": 2,
        "moored": 3,
        "fishing_trip": 4,
    }


def test_self_reference_is_cyclic():
    with pytest.raises(CyclicDefinition) as info:
        compile_program("input state b/1. state a(X): a(X) union b(X).")
    assert "a" in info.value.cycle


def test_longer_cycle():
    text = "input state s/1. state a(X): b(X) union s(X). state b(X): a(X) union s(X)."
    with pytest.raises(CyclicDefinition) as info:
        build_levels(typecheck(parse_program(text)))
    assert set(info.value.cycle) >= {"a", "b"}


def test_independent_events_share_level_one():
    levels = compile_program("input event a/1. event p(X): a(X). event q(X): a(X).").graph.levels
    assert levels["p"] == levels["q"] == 1


# -- independent validator ----------------------------------------------------

_DURATIVE = {S, D}
_ANY = {I, S, D}
_OPERANDS = {
    "before": (_ANY, _ANY),
    "meets": (_DURATIVE, _DURATIVE),
    "overlaps": (_DURATIVE, _DURATIVE),
    "equals": (_DURATIVE, _DURATIVE),
    "finishes": (_ANY, _DURATIVE),
    "starts": (_ANY, _DURATIVE),
    "contains": (_DURATIVE, _ANY),
}


def expected_class(node, kinds):
    """Class from the membership rules alone; None when no rule applies."""
    if isinstance(node, Atom):
        return {"event": I, "state": S, "dynamic": D}[kinds[node.name]]
    if isinstance(node, Comparison):
        return I
    if isinstance(node, Not):
        return I if expected_class(node.child, kinds) is I else None
    if isinstance(node, StartEnd):
        return I if expected_class(node.child, kinds) is S else None
    l, r = expected_class(node.left, kinds), expected_class(node.right, kinds)
    if isinstance(node, Relation):
        ok_l, ok_r = _OPERANDS[node.relation]
        return D if l in ok_l and r in ok_r else None
    if node.op in ("and", "or"):
        return I if l is I and r is I else None
    if node.op == "range":
        return S if l is I and r is I else None
    return S if l is S and r is S else None


def assert_labels_valid(compiled):
    kinds = {n: r.base_kind for n, r in compiled.predicates.items()}
    for d in compiled.program.definitions:
        for node in walk(d.body):
            want = expected_class(node, kinds)
            assert want is not None and node.cls is want, node


def test_corpus_labels_satisfy_membership_rules():
    assert_labels_valid(compile_program(MARITIME))


def assert_levels_respect_edges(graph):
    for a, b in graph.edges:
        assert graph.levels[a] > graph.levels[b]
    for a, b in itertools.product(graph.levels, repeat=2):
        if graph.levels[a] < graph.levels[b]:
            assert (a, b) not in graph.edges
    inputs = {n for n, r in graph.nodes.items() if r.is_input}
    assert {n for n, l in graph.levels.items() if l == 0} == inputs


def test_corpus_levels_respect_dependencies():
    assert_levels_respect_edges(compile_program(MARITIME).graph)


# -- generated programs -------------------------------------------------------

NAMES = ("p", "q", "r", "s")
VARS = ("X", "Y", "Speed")


@st.composite
def terms(draw):
    kind = draw(st.sampled_from(["var", "int", "float", "word", "text"]))
    if kind == "var":
        return Var(draw(st.sampled_from(VARS)))
    if kind == "int":
        return Const(draw(st.integers(-1000, 1000)))
    if kind == "float":
        return Const(draw(st.floats(allow_nan=False, allow_infinity=False, width=32)))
    if kind == "word":
        return Const(draw(st.sampled_from(["a", "port_b", "fishing", "inf"])))
    return Const(draw(st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"), max_size=6)))


def formulas():
    atom = st.builds(lambda n, a: Atom(n, tuple(a)), st.sampled_from(NAMES), st.lists(terms(), max_size=3))
    cmp = st.builds(Comparison, st.sampled_from(["<", "<=", ">", ">=", "=", "!="]), terms(), terms())
    leaves = st.one_of(atom, cmp)
    ops = ["and", "or", "range", "union", "intersection", "complement"]
    rels = list(_OPERANDS)

    def extend(inner):
        return st.one_of(
            st.builds(Not, inner),
            st.builds(StartEnd, st.sampled_from(["start", "end"]), inner),
            st.builds(BinOp, st.sampled_from(ops), inner, inner),
            st.builds(Relation, st.sampled_from(rels), inner, inner),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(formulas(), st.booleans())
def test_printed_formulas_reparse_identically(f, ascii):
    assert parse_formula(printer.formula(f, ascii=ascii)) == f


@pytest.mark.parametrize("ascii", [False, True])
def test_corpus_round_trip(ascii):
    prog = parse_program(MARITIME)
    again = parse_program(pretty(prog, ascii=ascii))
    assert again == prog
    assert pretty(again, ascii=ascii) == pretty(prog, ascii=ascii)


@st.composite
def layered_programs(draw):
    """Random acyclic programs: each definition uses inputs or earlier definitions."""
    n_inputs = draw(st.integers(1, 3))
    lines = [f"input event i{k}/1." for k in range(n_inputs)]
    names = [f"i{k}" for k in range(n_inputs)]
    for k in range(draw(st.integers(1, 6))):
        used = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3))
        lines.append(f"event d{k}(X): {' & '.join(f'{u}(X)' for u in used)}.")
        names.append(f"d{k}")
    return "\n".join(lines)


@settings(max_examples=100, deadline=None)
@given(layered_programs())
def test_generated_levels_respect_dependencies(text):
    compiled = compile_program(text)
    assert_levels_respect_edges(compiled.graph)
    assert_labels_valid(compiled)
    for name, level in compiled.graph.levels.items():
        if level > 1:
            deps = [b for a, b in compiled.graph.edges if a == name]
            assert any(compiled.graph.levels[b] == level - 1 for b in deps)
