import json

import pytest
from hypothesis import given, settings

from ecalc import scenario_path
from ecalc.epistemics import (
    Atom, Box, KripkeModel, PointedActionModel, PointedModel, bisimilar, holds, interact_model,
    product_update, receive_model,
)
from ecalc.frontend import (
    DOT, STRUCTURED, ModelFileError, declarations_for, dump_model, export_lts, load_model,
    load_scenario, lts_to_dict, model_from_dict, model_to_dict, parse_formula, save_model,
)
from ecalc.frontend.models import action_loader
from ecalc.semantics import Configuration, Universe, explore
from ecalc.terms import AgentProc, Nil

from strategies import constructors, kripke_models

TWO = {"kind": "kripke", "agents": ["A"], "atoms": ["p"], "states": ["s", "t"], "point": "s",
       "rel": {"A": [["s", "t"], ["t", "t"]]}, "val": {"p": ["t"]}}


def test_two_state_round_trip(tmp_path):
    pm = model_from_dict(TWO)
    path = tmp_path / "m.json"
    save_model(pm, path)
    back = load_model(path)
    assert back.model.size() == 2
    assert bisimilar(pm, back)
    ren = {"s": 0, "t": 1}
    assert back.model.rel["A"] == {(ren[u], ren[v]) for u, v in pm.model.rel["A"]}
    save_model(pm, path, renumber=False)
    assert load_model(path) == pm


@given(kripke_models(), constructors())
def test_product_models_round_trip_without_renumbering(pm, pam):
    after = product_update(pm, pam)
    assert model_from_dict(json.loads(dump_model(after, renumber=False))) == after
    back = model_from_dict(json.loads(dump_model(after)))
    assert back.model.size() == after.model.size() and bisimilar(back, after)


@given(constructors(("A", "B", "C")))
def test_action_models_round_trip(pam):
    back = model_from_dict(model_to_dict(pam, renumber=False))
    assert isinstance(back, PointedActionModel)
    assert back.model == pam.model and back.point == pam.point


def test_relation_with_undeclared_state():
    bad = dict(TWO, rel={"A": [["s", "u"]]})
    with pytest.raises(ModelFileError) as info:
        model_from_dict(bad)
    assert "rel.A" in str(info.value) and "'u'" in str(info.value)


@pytest.mark.parametrize("change, where", [
    ({"val": {"r": ["s"]}}, "val.r"),
    ({"val": {"p": ["z"]}}, "val.p"),
    ({"point": "z"}, "point"),
    ({"states": "s"}, "states"),
    ({"kind": "banana"}, "kind"),
    ({"rel": {"Z": []}}, "rel"),
])
def test_malformed_models_name_the_key(change, where):
    with pytest.raises(ModelFileError) as info:
        model_from_dict(dict(TWO, **change))
    assert where in str(info.value)


def test_action_model_errors():
    base = {"kind": "action", "agents": ["A"], "atoms": ["p"], "points": ["e", "f"], "point": "e",
            "rel": {"A": [["e", "f"]]}, "pre": {"e": "p", "f": "true"}}
    assert model_from_dict(base).precondition == Atom("p")
    with pytest.raises(ModelFileError, match="pre.e"):
        model_from_dict(dict(base, pre={"e": "p &", "f": "true"}))
    with pytest.raises(ModelFileError, match="no precondition"):
        model_from_dict(dict(base, pre={"e": "p"}))


def test_invalid_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"kind": "kripke",\n "states": [}')
    with pytest.raises(ModelFileError) as info:
        load_model(path)
    assert f"{path}:2:" in str(info.value)


def test_all_valuations_model():
    data = {"kind": "kripke", "agents": ["A", "B"], "atoms": ["p", "q"], "worlds": "all-valuations",
            "point": {"p": True}, "knows_whether": {"A": ["p"]}}
    pm = model_from_dict(data)
    assert pm.model.size() == 4
    assert holds(pm, Box("A", Atom("p"))) and not holds(pm, Box("B", Atom("p")))
    assert not holds(pm, Box("A", Atom("q")))
    with pytest.raises(ModelFileError, match="knows_whether"):
        model_from_dict(dict(data, knows_whether={"Z": ["p"]}))


def test_general_action_model_in_formula(tmp_path):
    pam = interact_model("p", "A", "B", ["A", "B"])
    save_model(pam, tmp_path / "pass.json", renumber=False)
    decl = declarations_for(atoms=["p"], agents=["A", "B"])
    loader = action_loader(tmp_path, ["A", "B"], ["p"])
    f = parse_formula('[am "pass.json" s] K[B] p', decl, load_action=loader)
    assert f.action.model == pam.model
    with pytest.raises(Exception):
        parse_formula('[am "pass.json" nowhere] p', decl, load_action=loader)


# -- LTS export -------------------------------------------------------------------------------

def _lts(name):
    spec = load_scenario(scenario_path(name))
    return explore(Configuration(spec.model, spec.system), spec.universe, spec.bounds, spec.mode,
                   spec.feeds)


@pytest.mark.parametrize("fmt", [STRUCTURED, DOT])
def test_export_is_byte_stable(fmt):
    assert export_lts(_lts("robots_v1"), fmt) == export_lts(_lts("robots_v1"), fmt)


def test_single_node_dot_export():
    pm = PointedModel(KripkeModel({0}, {"A": set()}, {}), 0)
    lts = explore(Configuration(pm, AgentProc("A", Nil())), Universe(agents={"A"}))
    text = export_lts(lts, DOT).decode()
    assert text.count(" [label=") == 1
    assert "->" not in text


def test_structured_export_contents():
    lts = _lts("e_chain")
    data = json.loads(export_lts(lts, STRUCTURED))
    assert data == lts_to_dict(lts)
    assert [n["id"] for n in data["nodes"]] == [0, 1, 2]
    assert [e["label"] for e in data["edges"]] == ["Interact(b,p,A,B)", "Interact(c,p,A,C)"]
    assert data["terminals"] == [2] and data["truncated"] is False
    with pytest.raises(ValueError):
        export_lts(lts, "png")
