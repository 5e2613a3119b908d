"""YAML scenario files: universes, initial model, system, exploration settings, checks.

Example::

    name: two-hop
    agents: [A, B, C]
    atoms: [p]
    fact_vars: [x, x1]
    model: {worlds: all-valuations, point: {p: true}, knows_whether: {A: [p]}}
    system: new b, c ([b!p.c!p]@A || [b?(x)]@B || [c?(x1)]@C)
    mode: closed
    bounds: {max_depth: 10}
    assertions:
      - {scope: all-terminal, formula: "K[B] p & K[C] p"}
      - {check: terminals-bisimilar}
    traces:
      - {name: first, patterns: ["Interact(b,p,A,B)"], expect: 1}
    trace_relations:
      - {left: first, right: first, relation: bisimilar}

``model`` takes the model data described in :mod:`ecalc.frontend.models`
(``agents`` and ``atoms`` default to the scenario's); ``model_file`` names a
JSON file instead.  ``feeds`` maps free channels to the facts the environment
offers on them, in order.  ``explore: false`` skips the state-space
exploration and only runs the traces, for systems whose state space is
infinite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from ..epistemics import Formula, PointedModel
from ..semantics import MODES, Bounds, Universe, parse_pattern
from ..terms import ESystem, agents_of, free_names
from .models import ModelFileError, action_loader, load_model, model_from_dict
from .parser import ParseError, declarations_for, parse_esystem, parse_formula

SCOPES = ("root", "all-reachable", "all-terminal")
CHECKS = ("terminals-bisimilar",)
RELATIONS = ("bisimilar",)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Assertion:
    scope: str
    text: str = ""
    formula: Optional[Formula] = None
    check: Optional[str] = None

    def describe(self) -> str:
        if self.check:
            return self.check
        return f"{self.scope}: {self.text}"


@dataclass(frozen=True)
class TraceSpec:
    name: str
    patterns: tuple
    expect: Union[str, int] = "nonempty"


@dataclass(frozen=True)
class TraceRelation:
    left: str
    right: str
    relation: str = "bisimilar"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    agents: tuple
    atoms: tuple
    fact_vars: tuple
    names: tuple
    model: PointedModel
    system: ESystem
    system_text: str
    mode: str = "closed"
    feeds: dict = field(default_factory=dict)
    bounds: Bounds = Bounds()
    assertions: tuple = ()
    traces: tuple = ()
    trace_relations: tuple = ()
    description: str = ""
    explore: bool = True
    path: Optional[Path] = None

    @property
    def universe(self) -> Universe:
        return Universe(set(self.names) | free_names(self.system), self.atoms, self.agents)


def _list(data, key, where, default=()):
    v = data.get(key, list(default))
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise ScenarioError(f"{where}: {key!r} must be a list of identifiers")
    return tuple(v)


def scenario_from_dict(data: Any, base_dir: Union[str, Path, None] = None,
                       file: str = "<scenario>") -> ScenarioSpec:
    if not isinstance(data, dict):
        raise ScenarioError(f"{file}: expected a mapping at top level")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    agents = _list(data, "agents", file)
    atoms = _list(data, "atoms", file)
    fact_vars = _list(data, "fact_vars", file)
    names = _list(data, "names", file)
    if not agents:
        raise ScenarioError(f"{file}: at least one agent must be declared")
    clash = set(atoms) & set(fact_vars)
    if clash:
        raise ScenarioError(f"{file}: {sorted(clash)} declared both as atoms and fact variables")

    # initial model
    try:
        if "model_file" in data:
            model = load_model(base / str(data["model_file"]))
        elif "model" in data:
            raw = dict(data["model"]) if isinstance(data["model"], dict) else data["model"]
            if isinstance(raw, dict):
                raw.setdefault("agents", list(agents))
                raw.setdefault("atoms", list(atoms))
            model = model_from_dict(raw, "model", base)
        else:
            raise ScenarioError(f"{file}: either 'model' or 'model_file' is required")
    except (ModelFileError, OSError) as exc:
        raise ScenarioError(f"{file}: {exc}") from None
    if not isinstance(model, PointedModel):
        raise ScenarioError(f"{file}: the initial model must be a Kripke model")
    if set(model.model.agents) != set(agents) or set(model.model.atoms) != set(atoms):
        raise ScenarioError(f"{file}: the model's agents/atoms differ from the declared ones")

    # system
    text = data.get("system")
    if not isinstance(text, str):
        raise ScenarioError(f"{file}: 'system' must be e-system text")
    decl = declarations_for(atoms=atoms, agents=agents, fact_vars=fact_vars,
                            names=names if "names" in data else None)
    try:
        system = parse_esystem(text, decl, file=f"{file}:system")
    except ParseError as exc:
        raise ScenarioError(str(exc)) from None
    for a in agents_of(system):
        if a not in agents:
            raise ScenarioError(f"{file}: agent {a!r} is not declared")

    mode = data.get("mode", "closed")
    if mode not in MODES:
        raise ScenarioError(f"{file}: mode must be one of {MODES}")

    feeds_raw = data.get("feeds", {}) or {}
    if not isinstance(feeds_raw, dict):
        raise ScenarioError(f"{file}: 'feeds' must map channels to fact lists")
    fn = free_names(system)
    feeds = {}
    for ch, facts in feeds_raw.items():
        if ch not in fn:
            raise ScenarioError(f"{file}: feed channel {ch!r} is not a free name of the system")
        if not isinstance(facts, list) or any(q not in atoms for q in facts):
            raise ScenarioError(f"{file}: feed {ch!r} must list declared atoms")
        feeds[ch] = list(facts)

    do_explore = data.get("explore", True)
    if not isinstance(do_explore, bool):
        raise ScenarioError(f"{file}: 'explore' must be true or false")
    if not do_explore and data.get("assertions"):
        raise ScenarioError(f"{file}: assertions need exploration; drop 'explore: false'")

    bounds_raw = data.get("bounds", {}) or {}
    try:
        bounds = Bounds(**bounds_raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{file}: bad bounds: {exc}") from None

    fdecl = declarations_for(atoms=atoms, agents=agents)
    loader = action_loader(base, agents, atoms)
    assertions = []
    for i, a in enumerate(data.get("assertions", []) or []):
        where = f"{file}:assertions[{i}]"
        if not isinstance(a, dict):
            raise ScenarioError(f"{where}: expected a mapping")
        if "check" in a:
            if a["check"] not in CHECKS:
                raise ScenarioError(f"{where}: unknown check {a['check']!r}; known: {CHECKS}")
            assertions.append(Assertion("all-terminal", check=a["check"]))
            continue
        scope = a.get("scope", "all-terminal")
        if scope not in SCOPES:
            raise ScenarioError(f"{where}: scope must be one of {SCOPES}")
        ftext = a.get("formula")
        if not isinstance(ftext, str):
            raise ScenarioError(f"{where}: 'formula' must be formula text")
        try:
            f = parse_formula(ftext, fdecl, file=where, load_action=loader)
        except ParseError as exc:
            raise ScenarioError(str(exc)) from None
        assertions.append(Assertion(scope, " ".join(ftext.split()), f))

    traces = []
    for i, t in enumerate(data.get("traces", []) or []):
        where = f"{file}:traces[{i}]"
        if not isinstance(t, dict) or not isinstance(t.get("patterns", []), list):
            raise ScenarioError(f"{where}: expected name, patterns and expect")
        try:
            pats = tuple(parse_pattern(p) for p in t.get("patterns", []))
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
        expect = t.get("expect", "nonempty")
        if not (expect in ("nonempty", "empty") or (isinstance(expect, int) and expect >= 0)):
            raise ScenarioError(f"{where}: expect must be 'nonempty', 'empty' or a count")
        traces.append(TraceSpec(str(t.get("name", f"trace{i}")), pats, expect))
    trace_names = {t.name for t in traces}

    relations = []
    for i, r in enumerate(data.get("trace_relations", []) or []):
        where = f"{file}:trace_relations[{i}]"
        if not isinstance(r, dict) or r.get("left") not in trace_names or r.get("right") not in trace_names:
            raise ScenarioError(f"{where}: left and right must name traces")
        rel = r.get("relation", "bisimilar")
        if rel not in RELATIONS:
            raise ScenarioError(f"{where}: relation must be one of {RELATIONS}")
        relations.append(TraceRelation(r["left"], r["right"], rel))

    return ScenarioSpec(
        name=str(data.get("name", Path(file).stem)),
        description=str(data.get("description", "")).strip(),
        agents=agents, atoms=atoms, fact_vars=fact_vars, names=names,
        model=model, system=system, system_text=text.strip(), mode=mode, feeds=feeds,
        bounds=bounds, assertions=tuple(assertions), traces=tuple(traces),
        trace_relations=tuple(relations), explore=do_explore,
    )


def load_scenario(path: Union[str, Path]) -> ScenarioSpec:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    spec = scenario_from_dict(data, path.parent, str(path))
    object.__setattr__(spec, "path", path)
    return spec

