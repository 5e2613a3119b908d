import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecalc.epistemics import (
    BOT, TOP, ActionBox, ActionDiamond, ActionModel, And, Atom, Box, Diamond,
    EpistemicInputError, Evaluator, Iff, Implies, KripkeModel, Not, Or, PointedActionModel,
    PointedModel, UniverseError, conj, evaluate, extension, formula_vocabulary, holds,
    interact_model, is_executable, is_propositional, product_model, product_update,
    random_formula, random_model, receive_model,
)
from ecalc.epistemics.logic import S, S_Q, S_TOP

from oracles import eval_oracle, product_oracle, product_states_oracle
from strategies import constructors, formulas, kripke_models

p, q = Atom("p"), Atom("q")


def two_states(agents=("B",)):
    """States s, t with q true only at s and every agent's relation total."""
    total = {(u, v) for u in "st" for v in "st"}
    return KripkeModel({"s", "t"}, {a: total for a in agents}, {"q": {"s"}})


# -- evaluation ---------------------------------------------------------------------

def test_box_on_reflexive_singleton():
    m = KripkeModel({"s"}, {"A": {("s", "s")}}, {"p": {"s"}})
    assert evaluate(m, "s", Box("A", p))


def test_box_refuted_by_other_state():
    assert not evaluate(two_states(), "s", Box("B", q))


def test_action_box_is_vacuous_when_precondition_fails():
    m = two_states()
    pam = receive_model("q", "B", ["B"]).at(S_Q)
    assert not evaluate(m, "t", pam.precondition)
    assert evaluate(m, "t", ActionBox(pam, BOT))


def test_vacuous_box_on_empty_relation():
    pm = random_model(1, ["A"], ["p"], 3)
    m = KripkeModel(pm.model.states, {"A": set()}, pm.model.val)
    assert evaluate(m, 0, Box("A", BOT))


def test_derived_connectives():
    m = KripkeModel({0, 1}, {"A": {(0, 1)}}, {"p": {0}, "q": {1}})
    assert evaluate(m, 0, Or(BOT, p))
    assert evaluate(m, 0, Implies(q, BOT))
    assert evaluate(m, 0, Iff(p, Not(q)))
    assert evaluate(m, 0, Diamond("A", q))
    assert not evaluate(m, 1, Diamond("A", TOP))
    assert conj() == TOP
    assert evaluate(m, 0, conj(p, Box("A", q)))
    pam = receive_model("q", "A", ["A"])
    assert evaluate(m, 0, ActionDiamond(pam, Box("A", q)))


@pytest.mark.parametrize("bad", [Atom("r"), Box("Z", p)])
def test_unknown_vocabulary_is_rejected(bad):
    m = KripkeModel({0}, {"A": set()}, {"p": set()})
    with pytest.raises(EpistemicInputError):
        evaluate(m, 0, bad)


def test_unknown_state_is_rejected():
    with pytest.raises(EpistemicInputError):
        evaluate(two_states(), "u", q)


def test_model_invariants():
    with pytest.raises(EpistemicInputError):
        KripkeModel(set(), {}, {})
    with pytest.raises(EpistemicInputError):
        KripkeModel({0}, {"A": {(0, 1)}}, {})
    with pytest.raises(EpistemicInputError):
        KripkeModel({0}, {}, {"p": {1}})
    with pytest.raises(EpistemicInputError):
        PointedModel(KripkeModel({0}, {}, {}), 7)
    with pytest.raises(EpistemicInputError):
        ActionModel({0, 1}, {}, {0: TOP})


def test_formula_helpers():
    f = And(Box("A", p), ActionBox(receive_model("q", "B", ["A", "B"]), q))
    agents, atoms = formula_vocabulary(f)
    assert {"A", "B"} <= agents and atoms == {"p", "q"}
    assert is_propositional(And(p, Not(q)))
    assert not is_propositional(Box("A", p))


@settings(max_examples=200)
@given(kripke_models(), formulas())
def test_evaluation_matches_reference(pm, f):
    m = pm.model
    ext = extension(m, f)
    assert ext == {s for s in m.states if eval_oracle(m, s, f)}


# -- product update --------------------------------------------------------------------

def test_failed_precondition_leaves_model_unchanged():
    pm = PointedModel(two_states(), "s")
    am = ActionModel({0}, {"B": {(0, 0)}}, {0: BOT})
    assert product_update(pm, PointedActionModel(am, 0)) is pm


def test_receive_product_has_five_states():
    m = two_states()
    pam = receive_model("q", "B", ["B"])
    prod = product_model(m, pam.model)
    want = {("s", S), ("t", S), ("s", S_Q), ("s", S_TOP), ("t", S_TOP)}
    assert prod.states == want
    assert prod.states == product_states_oracle(m, pam.model)


@given(kripke_models(), constructors())
def test_product_matches_reference(pm, pam):
    prod = product_model(pm.model, pam.model)
    ref = product_oracle(pm.model, pam.model)
    if prod is None:
        assert not ref.states
        return
    assert prod.states == ref.states
    assert {a: set(r) for a, r in prod.rel.items()} == ref.rel
    assert {x: set(v) for x, v in prod.val.items()} == ref.val
    assert len(prod.states) <= len(pm.model.states) * len(pam.model.points)


@given(kripke_models(), constructors())
def test_product_states_are_provenance_pairs(pm, pam):
    after = product_update(pm, pam)
    if is_executable(pm, pam):
        assert after.point == (pm.point, pam.point)
        assert all(isinstance(s, tuple) and s[0] in pm.model.states for s in after.model.states)
    else:
        assert after == pm


@given(kripke_models(), st.sampled_from("pq"), st.sampled_from("AB"))
def test_receiver_knows_the_fact(pm, fact, agent):
    after = product_update(pm, receive_model(fact, agent, ["A", "B"]))
    assert holds(after, Box(agent, Atom(fact)))


@given(kripke_models(), st.sampled_from("pq"))
def test_interaction_transfers_knowledge(pm, fact):
    if not holds(pm, Box("A", Atom(fact))):
        return
    after = product_update(pm, interact_model(fact, "A", "B", ["A", "B"]))
    assert holds(after, Box("B", Atom(fact)))
    assert holds(after, Box("B", Box("A", Atom(fact))))


def test_interaction_on_two_state_model():
    # A knows q at s (A's arrows stay at s); B cannot tell s from t
    m = KripkeModel({"s", "t"},
                    {"A": {("s", "s"), ("t", "t")}, "B": {(u, v) for u in "st" for v in "st"}},
                    {"q": {"s"}})
    pm = PointedModel(m, "s")
    pam = interact_model("q", "A", "B", ["A", "B"])
    after = product_update(pm, pam)
    assert after.point == ("s", S)
    # B's arrows from the point lead only to (s, s_q), where A's arrows loop
    assert after.model.succ("B", after.point) == {("s", S_Q)}
    assert after.model.succ("A", ("s", S_Q)) == {("s", S_Q)}
    assert holds(after, Box("B", Box("A", q)))
    assert not holds(pm, Box("B", q))


def test_receive_model_structure():
    pam = receive_model("q", "B", ["A", "B"])
    am = pam.model
    assert pam.point == S
    assert am.points == {S, S_Q, S_TOP}
    assert am.pre == {S: TOP, S_Q: q, S_TOP: TOP}
    assert am.rel["B"] == {(S, S_Q), (S_Q, S_TOP), (S_TOP, S_TOP)}
    assert am.rel["A"] == {(S, S_TOP), (S_Q, S_TOP), (S_TOP, S_TOP)}
    assert (S, S_Q) not in am.rel["A"]


def test_interact_model_structure():
    pam = interact_model("q", "A", "B", ["A", "B", "C"])
    am = pam.model
    assert am.pre[S] == Box("A", q)
    assert am.pre[S_Q] == q and am.pre[S_TOP] == TOP
    for c in "AB":
        assert am.rel[c] == {(S, S_Q), (S_Q, S_Q), (S_TOP, S_TOP)}
    assert am.rel["C"] == {(S, S_TOP), (S_Q, S_TOP), (S_TOP, S_TOP)}


def test_constructor_errors():
    with pytest.raises(EpistemicInputError):
        interact_model("q", "A", "A", ["A"])
    with pytest.raises(UniverseError):
        receive_model("q", "Z", ["A"])
    with pytest.raises(UniverseError):
        product_update(PointedModel(two_states(("B",)), "s"), receive_model("q", "A", ["A", "B"]))


def test_evaluator_is_reusable():
    ev = Evaluator()
    pm = PointedModel(two_states(("A", "B")), "s")
    pam = receive_model("q", "A", ["A", "B"])
    once = product_update(pm, pam, ev)
    assert product_update(pm, pam, ev) == once
    assert holds(once, Box("A", q), ev)


# -- random generation --------------------------------------------------------------------

def test_random_model_is_deterministic():
    assert random_model(4, ["A", "B"], ["p"], 11) == random_model(4, ["A", "B"], ["p"], 11)
    assert random_model(4, ["A", "B"], ["p"], random.Random(11)) == random_model(4, ["A", "B"], ["p"], 11)


def test_random_model_shape():
    pm = random_model(3, ["A"], ["p", "q"], 5)
    assert pm.model.states == {0, 1, 2}
    assert pm.model.agents == {"A"} and pm.model.atoms == {"p", "q"}
    with pytest.raises(ValueError):
        random_model(0, ["A"], ["p"], 0)


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_random_formulas_evaluate_like_reference(seed):
    rng = random.Random(seed)
    pm = random_model(rng.randint(1, 4), ["A", "B"], ["p", "q"], rng)
    f = random_formula(rng, ["A", "B"], ["p", "q"], 4)
    assert holds(pm, f) == eval_oracle(pm.model, pm.point, f)
