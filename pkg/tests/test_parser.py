import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecalc.epistemics import (
    TOP, ActionBox, Atom, Box, Not, evaluate, interact_model, random_model, receive_model,
)
from ecalc.epistemics.logic import show_formula
from ecalc.frontend import (
    ParseError, declarations_for, parse_esystem, parse_esystem_with_spans, parse_formula,
    parse_formula_with_spans, parse_process, parse_process_with_spans,
)
from ecalc.terms import (
    Act, AgentProc, EPar, ERes, InFact, InName, Nil, OutFact, OutName, Par, Repl, Res, Sum, Tau,
    free_facts, pretty,
)

from strategies import ATOMS, FACT_BINDERS, esystems, formulas, processes

DECL = declarations_for(atoms=ATOMS, agents=["A", "B", "C"], fact_vars=FACT_BINDERS)


# -- processes and e-systems ---------------------------------------------------------------

def test_tau_prefix():
    assert parse_process("tau.0") == Act(Tau(), Nil())


def test_restriction():
    assert parse_process("new z (a!z.0)") == Res("z", Act(OutName("a", "z"), Nil()))


def test_agents_with_fact_output():
    g = parse_esystem("[a?(x).0]@A || [a!p.0]@B", declarations_for(atoms=["p"]))
    assert g == EPar(AgentProc("A", Act(InName("a", "x"), Nil())),
                     AgentProc("B", Act(OutFact("a", "p"), Nil())))


def test_fact_variables_bind_fact_inputs():
    d = declarations_for(atoms=["p"], fact_vars=["x"])
    assert parse_process("a?(x).b!x.0", d) == Act(InFact("a", "x"), Act(OutFact("b", "x"), Nil()))


def test_comma_restriction_is_nested():
    assert parse_process("new x, y (0)") == Res("x", Res("y", Nil()))
    g = parse_esystem("new b, c ([0]@A)")
    assert g == ERes("b", ERes("c", AgentProc("A", Nil())))


def test_precedence():
    assert parse_process("!a!b.0 | tau") == Par(Repl(Act(OutName("a", "b"), Nil())), Act(Tau(), Nil()))
    assert parse_process("tau + a?(x) + 0") == Sum(Sum(Act(Tau(), Nil()), Act(InName("a", "x"), Nil())), Nil())
    assert parse_process("(a!b.0 | 0)") == Par(Act(OutName("a", "b"), Nil()), Nil())


def test_trailing_prefix_means_nil():
    assert parse_process("a!b") == Act(OutName("a", "b"), Nil())


@pytest.mark.parametrize("text, fragment", [
    ("a!b.0 | 0 + tau", "operands of '+'"),
    ("a!", "expected"),
    ("new z a!z", "expected '('"),
    ("a!b.0 )", "unexpected"),
    ("a!b.1", "only '0'"),
    ("a!n0.0", "reserved"),
    ("a $ b", "unexpected character"),
])
def test_process_syntax_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_process(text)
    assert fragment in str(info.value)


def test_declaration_errors():
    with pytest.raises(ParseError, match="more than once"):
        parse_esystem("[0]@A || [0]@A")
    with pytest.raises(ParseError, match="agent"):
        parse_esystem("[0]@Z", declarations_for(agents=["A"]))
    with pytest.raises(ParseError):
        parse_process("a!zz.0", declarations_for(names=["a"]))


def _fact_closed(t):
    return free_facts(t) <= set(ATOMS)


@settings(max_examples=300)
@given(processes(with_facts=True).filter(_fact_closed))
def test_process_round_trip(p):
    assert parse_process(pretty(p), DECL) == p


@settings(max_examples=100)
@given(esystems().filter(_fact_closed))
def test_esystem_round_trip(g):
    assert parse_esystem(pretty(g), DECL) == g


# -- formulas ------------------------------------------------------------------------------------

def test_knowledge_formula():
    assert parse_formula("K[A] p", DECL) == Box("A", Atom("p"))


def test_pass_modality():
    f = parse_formula("[pass q A B] K[B] q", DECL)
    assert f == ActionBox(interact_model("q", "A", "B", ["A", "B", "C"]), Box("B", Atom("q")))


def test_recv_modality():
    f = parse_formula("[recv q B] K[B] q", DECL)
    assert f == ActionBox(receive_model("q", "B", ["A", "B", "C"]), Box("B", Atom("q")))


@pytest.mark.parametrize("seed", range(5))
def test_contradiction_negated_is_valid(seed):
    f = parse_formula("~(p & ~p)", DECL)
    pm = random_model(4, ["A", "B", "C"], list(ATOMS), seed)
    assert all(evaluate(pm.model, s, f) for s in pm.model.states)


def test_connectives():
    p, q = Atom("p"), Atom("q")
    assert parse_formula("p -> q -> p", DECL) == parse_formula("p -> (q -> p)", DECL)
    assert parse_formula("true", DECL) == TOP
    assert parse_formula("false", DECL) == Not(TOP)
    assert parse_formula("~K[A] p & q", DECL) == parse_formula("(~(K[A] p)) & q", DECL)
    assert parse_formula("M[A] p", DECL) == Not(Box("A", Not(p)))
    assert parse_formula("<recv p A> true", DECL) == Not(ActionBox(receive_model("p", "A", ["A", "B", "C"]), Not(TOP)))
    assert parse_formula("p | q", DECL) == parse_formula("~(~p & ~q)", DECL)


@pytest.mark.parametrize("text", ["K[A]", "K[Z] p", "r", "[recv p A A] p", "[pass p A A] p",
                                  "[am \"x.json\" s] p", "p &"])
def test_formula_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text, DECL)


def test_action_modality_needs_agents():
    with pytest.raises(ParseError, match="agent universe"):
        parse_formula("[recv p A] p", declarations_for(atoms=["p"]))


@given(formulas(("A", "B"), ATOMS))
def test_formula_round_trip(f):
    d = declarations_for(atoms=ATOMS, agents=["A", "B"])
    assert parse_formula(show_formula(f), d) == f


# -- spans ------------------------------------------------------------------------------------

def _inside(span, text):
    lines = text.split("\n")
    if not (1 <= span.line <= len(lines) and 1 <= span.end_line <= len(lines)):
        return False
    return (1 <= span.column <= len(lines[span.line - 1]) + 1
            and 1 <= span.end_column <= len(lines[span.end_line - 1]) + 1)


def test_spans_nest_with_the_tree():
    text = "new b (\n  [b!p.0]@A ||\n  [b?(x).tau.0]@B)"
    g, spans = parse_esystem_with_spans(text, declarations_for(atoms=["p"]), file="s.ecs")
    root = spans[()]
    assert root.file == "s.ecs" and (root.line, root.column) == (1, 1) and root.end_line == 3
    for path, span in spans.items():
        assert _inside(span, text)
        if path:
            parent = spans.get(path[:-1])
            if parent is not None:
                assert parent.contains(span)


def test_process_and_formula_spans():
    _, spans = parse_process_with_spans("a!b.0 | tau")
    assert spans[()].column == 1 and spans[()].end_column == 12
    assert spans[(1,)].column == 9
    _, fspans = parse_formula_with_spans("K[A] p & q", DECL)
    assert fspans[(0,)].end_column == 7


def test_error_location_is_reported():
    with pytest.raises(ParseError) as info:
        parse_process("a!b.0 |\n  a?(x).1", file="f.pi")
    assert (info.value.span.line, info.value.span.column) == (2, 9)
    assert str(info.value).startswith("f.pi:2:9:")


_SAMPLES = ["new b (a!b.0 | b?(x).x!x.0)", "!tau.a?(y).0 + b!c", "[a?(u).b!u.0]@A || [a!p.0]@B",
            "K[A] (p & ~q) -> [pass p A B] K[B] p"]


@settings(max_examples=300)
@given(st.sampled_from(_SAMPLES), st.data())
def test_every_error_span_lies_inside_the_input(sample, data):
    pos = data.draw(st.integers(0, len(sample)))
    junk = data.draw(st.sampled_from(list("()[].!?|+&~@,\"$") + ["", "\n", " x ", "new", "K["]))
    cut = data.draw(st.integers(0, 3))
    text = sample[:pos] + junk + sample[pos + cut:]
    for parse in (parse_process, parse_esystem, parse_formula):
        try:
            parse(text, DECL)
        except ParseError as exc:
            assert _inside(exc.span, text), (text, exc.span)
