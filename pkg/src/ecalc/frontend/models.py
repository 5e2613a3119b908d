"""JSON files for Kripke models and action models.

Kripke model::

    {"kind": "kripke", "agents": ["A", "B"], "atoms": ["p"],
     "states": ["s", "t"], "point": "s",
     "rel": {"A": [["s", "s"], ["t", "t"]], "B": [["s", "t"]]},
     "val": {"p": ["s"]}}

Action model: ``"kind": "action"``, ``points`` instead of ``states``, no
``val`` and a ``pre`` map from point to formula text.

A Kripke model may instead be generated from valuations::

    {"kind": "kripke", "agents": [...], "atoms": [...],
     "worlds": "all-valuations", "point": {"q1": true, "q2": false},
     "knows_whether": {"D1": ["q1"]}}

which has one state per valuation of the atoms and relates two states for an
agent when they agree on the atoms that agent knows the value of.
"""
from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Any, Mapping, Union

from ..epistemics import (
    ActionModel, EpistemicInputError, KripkeModel, PointedActionModel, PointedModel,
    formula_vocabulary,
)
from ..epistemics.logic import show_formula
from .parser import ParseError, declarations_for, parse_formula


class ModelFileError(ValueError):
    """Malformed model data; the message starts with the offending key path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where or '<top>'}: {message}")
        self.where = where


def _state_id(x):
    if isinstance(x, list):
        return tuple(_state_id(y) for y in x)
    return x


def _json_state(x):
    if isinstance(x, tuple):
        return [_json_state(y) for y in x]
    return x


def _require(data: Mapping, key: str, where: str, kind=None):
    if key not in data:
        raise ModelFileError(where.rstrip("."), f"missing key {key!r}")
    v = data[key]
    if kind is not None and not isinstance(v, kind):
        raise ModelFileError(f"{where}{key}", f"expected {kind.__name__}")
    return v


def _str_list(data, key, where):
    v = _require(data, key, where, list)
    for i, x in enumerate(v):
        if not isinstance(x, str):
            raise ModelFileError(f"{where}{key}[{i}]", "expected a string")
    return v


def _relations(data, agents, domain, where, key="rel"):
    raw = data.get(key, {})
    if not isinstance(raw, dict):
        raise ModelFileError(where + key, "expected a mapping from agent to pair list")
    rel = {}
    for agent, pairs in raw.items():
        path = f"{where}{key}.{agent}"
        if agent not in agents:
            raise ModelFileError(path, f"agent {agent!r} is not declared")
        if not isinstance(pairs, list):
            raise ModelFileError(path, "expected a list of pairs")
        out = set()
        for i, pair in enumerate(pairs):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ModelFileError(f"{path}[{i}]", "expected a two-element list")
            u, v = _state_id(pair[0]), _state_id(pair[1])
            for x in (u, v):
                if x not in domain:
                    raise ModelFileError(f"{path}[{i}]", f"{x!r} is not declared")
            out.add((u, v))
        rel[agent] = out
    for agent in agents:
        rel.setdefault(agent, set())
    return rel


def _valuation_model(data, agents, atoms, where):
    worlds = list(itertools.product((False, True), repeat=len(atoms)))

    def name(w):
        return "".join(("+" if b else "-") + a for a, b in zip(atoms, w))

    kw = data.get("knows_whether", {})
    if not isinstance(kw, dict):
        raise ModelFileError(where + "knows_whether", "expected a mapping from agent to atom list")
    for agent, known in kw.items():
        if agent not in agents:
            raise ModelFileError(f"{where}knows_whether.{agent}", f"agent {agent!r} is not declared")
        for q in known:
            if q not in atoms:
                raise ModelFileError(f"{where}knows_whether.{agent}", f"atom {q!r} is not declared")
    idx = {q: i for i, q in enumerate(atoms)}
    rel = {}
    for agent in agents:
        known = [idx[q] for q in kw.get(agent, [])]
        rel[agent] = {(name(u), name(v)) for u in worlds for v in worlds
                      if all(u[i] == v[i] for i in known)}
    val = {q: {name(w) for w in worlds if w[idx[q]]} for q in atoms}
    point = data.get("point", {})
    if not isinstance(point, dict):
        raise ModelFileError(where + "point", "expected a mapping from atom to truth value")
    for q in point:
        if q not in idx:
            raise ModelFileError(f"{where}point.{q}", f"atom {q!r} is not declared")
    actual = tuple(bool(point.get(q, False)) for q in atoms)
    return PointedModel(KripkeModel({name(w) for w in worlds}, rel, val), name(actual))


def model_from_dict(data: Any, where: str = "", base_dir: Union[str, Path, None] = None):
    """Build a pointed Kripke or action model from decoded JSON/YAML data."""
    if not isinstance(data, dict):
        raise ModelFileError(where, "expected a mapping")
    prefix = f"{where}." if where else ""
    kind = data.get("kind", "kripke")
    agents = _str_list(data, "agents", prefix)
    atoms = _str_list(data, "atoms", prefix)
    try:
        if kind == "kripke":
            if data.get("worlds") == "all-valuations":
                return _valuation_model(data, agents, atoms, prefix)
            states = [_state_id(s) for s in _require(data, "states", prefix, list)]
            domain = set(states)
            rel = _relations(data, agents, domain, prefix)
            raw_val = data.get("val", {})
            if not isinstance(raw_val, dict):
                raise ModelFileError(prefix + "val", "expected a mapping from atom to state list")
            val = {}
            for q, ss in raw_val.items():
                if q not in atoms:
                    raise ModelFileError(f"{prefix}val.{q}", f"atom {q!r} is not declared")
                vs = {_state_id(s) for s in ss}
                bad = [s for s in vs if s not in domain]
                if bad:
                    raise ModelFileError(f"{prefix}val.{q}", f"{bad[0]!r} is not declared")
                val[q] = vs
            for q in atoms:
                val.setdefault(q, set())
            point = _state_id(_require(data, "point", prefix))
            if point not in domain:
                raise ModelFileError(prefix + "point", f"{point!r} is not declared")
            return PointedModel(KripkeModel(states, rel, val), point)
        if kind == "action":
            points = [_state_id(s) for s in _require(data, "points", prefix, list)]
            domain = set(points)
            rel = _relations(data, agents, domain, prefix)
            raw_pre = _require(data, "pre", prefix, dict)
            by_text = {str(p): p for p in points}
            decl = declarations_for(atoms=atoms, agents=agents)
            pre = {}
            for key, text in raw_pre.items():
                if str(key) not in by_text:
                    raise ModelFileError(f"{prefix}pre.{key}", f"{key!r} is not a declared point")
                try:
                    pre[by_text[str(key)]] = parse_formula(
                        str(text), decl, file=f"{prefix}pre.{key}",
                        load_action=action_loader(base_dir, agents, atoms))
                except ParseError as exc:
                    raise ModelFileError(f"{prefix}pre.{key}", str(exc)) from None
            missing = [p for p in points if p not in pre]
            if missing:
                raise ModelFileError(prefix + "pre", f"no precondition for point {missing[0]!r}")
            point = _state_id(_require(data, "point", prefix))
            if point not in domain:
                raise ModelFileError(prefix + "point", f"{point!r} is not a declared point")
            return PointedActionModel(ActionModel(points, rel, pre), point)
    except EpistemicInputError as exc:
        raise ModelFileError(where, str(exc)) from None
    raise ModelFileError(prefix + "kind", f"unknown model kind {kind!r}")


def action_loader(base_dir, agents, atoms):
    """Loader for ``[am "file" point]`` formulas, resolving files against ``base_dir``."""
    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def load(file: str, point: str) -> PointedActionModel:
        pam = load_model(base / file)
        if not isinstance(pam, PointedActionModel):
            raise ValueError(f"{file} is not an action model")
        if set(pam.model.agents) != set(agents):
            raise ValueError(f"{file} is over agents {sorted(pam.model.agents)}, expected {sorted(agents)}")
        by_text = {str(p): p for p in pam.model.points}
        if point not in by_text:
            raise ValueError(f"{point!r} is not a point of {file}")
        return pam.at(by_text[point])

    return load


def load_model(path: Union[str, Path]):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return model_from_dict(data, base_dir=path.parent)


def _order(states):
    return sorted(states, key=repr)


def model_to_dict(obj, renumber: bool = True) -> dict:
    """Plain data for a pointed Kripke or action model, in a stable order.

    With ``renumber`` the states become ``0..n-1`` in ``repr`` order, which
    turns product states (nested pairs) into plain integers.
    """
    if isinstance(obj, PointedModel):
        m = obj.model
        order = _order(m.states)
        if renumber:
            ren = {s: i for i, s in enumerate(order)}
        else:
            ren = {s: _json_state(s) for s in order}
        return {
            "kind": "kripke",
            "agents": sorted(m.agents),
            "atoms": sorted(m.atoms),
            "states": [ren[s] for s in order],
            "point": ren[obj.point],
            "rel": {a: sorted(([ren[u], ren[v]] for u, v in m.rel[a]), key=repr)
                    for a in sorted(m.agents)},
            "val": {q: sorted((ren[s] for s in m.val[q]), key=repr) for q in sorted(m.atoms)},
        }
    if isinstance(obj, PointedActionModel):
        am = obj.model
        atoms = set()
        for f in am.pre.values():
            atoms |= formula_vocabulary(f)[1]
        order = _order(am.points)
        ren = {p: (i if renumber else _json_state(p)) for i, p in enumerate(order)}
        return {
            "kind": "action",
            "agents": sorted(am.agents),
            "atoms": sorted(atoms),
            "points": [ren[p] for p in order],
            "point": ren[obj.point],
            "rel": {a: sorted(([ren[u], ren[v]] for u, v in am.rel[a]), key=repr)
                    for a in sorted(am.agents)},
            "pre": {str(ren[p]): show_formula(am.pre[p]) for p in order},
        }
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_model(obj, renumber: bool = True) -> str:
    return json.dumps(model_to_dict(obj, renumber), indent=1, sort_keys=True) + "\n"


def save_model(obj, path: Union[str, Path], renumber: bool = True) -> None:
    Path(path).write_text(dump_model(obj, renumber))
