"""Kripke models, action models, formulas with action modalities, and product update."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Optional

from ..terms import Node

StateId = Hashable
PointId = Hashable


class EpistemicInputError(ValueError):
    """Raised for unknown states, agents or atoms, or malformed models."""


class UniverseError(EpistemicInputError):
    """Two objects are built over different agent or atom universes."""


# -- formulas -----------------------------------------------------------------

class Formula(Node):
    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True, eq=False)
class Top(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Box(Formula):
    agent: str
    sub: Formula


@dataclass(frozen=True, eq=False)
class ActionBox(Formula):
    action: "PointedActionModel"
    sub: Formula


TOP = Top()
BOT = Not(TOP)


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def Diamond(agent: str, a: Formula) -> Formula:
    return Not(Box(agent, Not(a)))


def ActionDiamond(action: "PointedActionModel", a: Formula) -> Formula:
    return Not(ActionBox(action, Not(a)))


def conj(*parts: Formula) -> Formula:
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def _show_action(pam) -> str:
    tag = pam.model.tag
    if tag and tag[0] == "recv" and pam.point == S:
        return f"recv {tag[1]} {tag[2]}"
    if tag and tag[0] == "pass" and pam.point == S:
        return f"pass {tag[1]} {tag[2]} {tag[3]}"
    return f"am <{len(pam.model.points)}-point model> {pam.point}"


def show_formula(f: Formula) -> str:
    """Text in the formula syntax; derived connectives appear expanded."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        if isinstance(f.sub, Top):
            return "false"
        return "~" + show_formula(f.sub)
    if isinstance(f, And):
        return f"({show_formula(f.left)} & {show_formula(f.right)})"
    if isinstance(f, Box):
        return f"K[{f.agent}] {show_formula(f.sub)}"
    if isinstance(f, ActionBox):
        return f"[{_show_action(f.action)}] {show_formula(f.sub)}"
    return repr(f)


def is_propositional(f: Formula) -> bool:
    if isinstance(f, (Top, Atom)):
        return True
    if isinstance(f, Not):
        return is_propositional(f.sub)
    if isinstance(f, And):
        return is_propositional(f.left) and is_propositional(f.right)
    return False


def formula_vocabulary(f: Formula) -> tuple[frozenset, frozenset]:
    """(agents, atoms) mentioned anywhere in ``f``, preconditions included."""
    agents, atoms = set(), set()

    def walk(g):
        if isinstance(g, Atom):
            atoms.add(g.name)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, And):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Box):
            agents.add(g.agent)
            walk(g.sub)
        elif isinstance(g, ActionBox):
            am = g.action.model
            agents.update(am.agents)
            for pre in am.pre.values():
                walk(pre)
            walk(g.sub)

    walk(f)
    return frozenset(agents), frozenset(atoms)


# -- models -------------------------------------------------------------------

def _freeze_map(m: Mapping[Any, Iterable]) -> dict:
    return {k: frozenset(v) for k, v in m.items()}


def _adjacency(rel: Mapping[str, frozenset]) -> dict:
    adj = {}
    for agent, pairs in rel.items():
        out: dict = {}
        for u, v in pairs:
            out.setdefault(u, set()).add(v)
        adj[agent] = {u: frozenset(vs) for u, vs in out.items()}
    return adj


_EMPTY = frozenset()


@dataclass(frozen=True)
class KripkeModel:
    """States, one accessibility relation per agent, and a valuation per atom.

    The agent universe is ``rel.keys()`` and the atom universe ``val.keys()``;
    an agent with no arrows or an atom true nowhere still has to be listed.
    """

    states: frozenset
    rel: Mapping[str, frozenset]
    val: Mapping[str, frozenset]

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "rel", _freeze_map(self.rel))
        object.__setattr__(self, "val", _freeze_map(self.val))
        if not self.states:
            raise EpistemicInputError("a Kripke model needs at least one state")
        for agent, pairs in self.rel.items():
            for u, v in pairs:
                if u not in self.states or v not in self.states:
                    raise EpistemicInputError(
                        f"relation of {agent} links undeclared state in ({u!r}, {v!r})")
        for atom, ext in self.val.items():
            if not ext <= self.states:
                raise EpistemicInputError(f"valuation of {atom} mentions undeclared states")

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.states, frozenset(self.rel.items()), frozenset(self.val.items())))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def agents(self) -> frozenset:
        return frozenset(self.rel)

    @property
    def atoms(self) -> frozenset:
        return frozenset(self.val)

    def succ(self, agent: str, s: StateId) -> frozenset:
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = _adjacency(self.rel)
            object.__setattr__(self, "_adj", adj)
        return adj[agent].get(s, _EMPTY)

    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class PointedModel:
    model: KripkeModel
    point: StateId

    def __post_init__(self):
        if self.point not in self.model.states:
            raise EpistemicInputError(f"point {self.point!r} is not a state of the model")


@dataclass(frozen=True)
class ActionModel:
    """Action points, one accessibility relation per agent, and preconditions.

    ``tag`` remembers how a canned model was built, e.g. ``("recv", "q", "B")``;
    it only affects printing.
    """

    points: frozenset
    rel: Mapping[str, frozenset]
    pre: Mapping[PointId, Formula]
    tag: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", frozenset(self.points))
        object.__setattr__(self, "rel", _freeze_map(self.rel))
        object.__setattr__(self, "pre", dict(self.pre))
        if not self.points:
            raise EpistemicInputError("an action model needs at least one action point")
        if set(self.pre) != set(self.points):
            raise EpistemicInputError("every action point needs exactly one precondition")
        for agent, pairs in self.rel.items():
            for u, v in pairs:
                if u not in self.points or v not in self.points:
                    raise EpistemicInputError(
                        f"relation of {agent} links undeclared action point in ({u!r}, {v!r})")

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.points, frozenset(self.rel.items()), frozenset(self.pre.items())))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def agents(self) -> frozenset:
        return frozenset(self.rel)

    def succ(self, agent: str, v: PointId) -> frozenset:
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = _adjacency(self.rel)
            object.__setattr__(self, "_adj", adj)
        return adj[agent].get(v, _EMPTY)


@dataclass(frozen=True)
class PointedActionModel:
    model: ActionModel
    point: PointId

    def __post_init__(self):
        if self.point not in self.model.points:
            raise EpistemicInputError(f"point {self.point!r} is not an action point of the model")

    @property
    def precondition(self) -> Formula:
        return self.model.pre[self.point]

    def at(self, point: PointId) -> "PointedActionModel":
        return PointedActionModel(self.model, point)


# -- the two canned action models ---------------------------------------------

S, S_Q, S_TOP = "s", "s_q", "s_T"


def receive_model(q: str, b: str, agents: Iterable[str]) -> PointedActionModel:
    """Agent ``b`` receives fact ``q``; every other agent only learns that something happened."""
    agents = frozenset(agents)
    if b not in agents:
        raise UniverseError(f"receiver {b} is not a declared agent")
    receiver = {(S, S_Q), (S_Q, S_TOP), (S_TOP, S_TOP)}
    others = {(S, S_TOP), (S_Q, S_TOP), (S_TOP, S_TOP)}
    rel = {c: receiver if c == b else others for c in agents}
    pre = {S: TOP, S_Q: Atom(q), S_TOP: TOP}
    return PointedActionModel(ActionModel({S, S_Q, S_TOP}, rel, pre, tag=("recv", q, b)), S)


def interact_model(q: str, a: str, b: str, agents: Iterable[str]) -> PointedActionModel:
    """Agent ``a`` passes fact ``q`` to ``b``; only possible when ``a`` knows ``q``."""
    agents = frozenset(agents)
    if a == b:
        raise EpistemicInputError("sender and receiver of an interaction must differ")
    for x in (a, b):
        if x not in agents:
            raise UniverseError(f"{x} is not a declared agent")
    pair = {(S, S_Q), (S_Q, S_Q), (S_TOP, S_TOP)}
    others = {(S, S_TOP), (S_Q, S_TOP), (S_TOP, S_TOP)}
    rel = {c: pair if c in (a, b) else others for c in agents}
    pre = {S: Box(a, Atom(q)), S_Q: Atom(q), S_TOP: TOP}
    return PointedActionModel(ActionModel({S, S_Q, S_TOP}, rel, pre, tag=("pass", q, a, b)), S)


# -- evaluation and product update --------------------------------------------

class Evaluator:
    """Computes truth sets, memoising formula extensions and product models.

    A single evaluator may be reused across calls on the same models; it keeps
    references to every model it has cached so ids stay valid.
    """

    def __init__(self):
        self._ext: dict = {}
        self._prod: dict = {}
        self._keep: list = []

    def extension(self, m: KripkeModel, f: Formula) -> frozenset:
        key = (id(m), f)
        hit = self._ext.get(key)
        if hit is not None:
            return hit
        self._keep.append(m)
        res = self._compute(m, f)
        self._ext[key] = res
        return res

    def _compute(self, m, f):
        if isinstance(f, Top):
            return m.states
        if isinstance(f, Atom):
            try:
                return m.val[f.name]
            except KeyError:
                raise EpistemicInputError(f"unknown atom {f.name!r}") from None
        if isinstance(f, Not):
            return m.states - self.extension(m, f.sub)
        if isinstance(f, And):
            left = self.extension(m, f.left)
            return left & self.extension(m, f.right) if left else left
        if isinstance(f, Box):
            if f.agent not in m.rel:
                raise EpistemicInputError(f"unknown agent {f.agent!r}")
            inner = self.extension(m, f.sub)
            return frozenset(s for s in m.states if m.succ(f.agent, s) <= inner)
        if isinstance(f, ActionBox):
            pam = f.action
            enabled = self.extension(m, pam.precondition)
            if not enabled:
                return m.states
            prod = self.product(m, pam.model)
            inner = self.extension(prod, f.sub)
            v = pam.point
            return frozenset(s for s in m.states if s not in enabled or (s, v) in inner)
        raise TypeError(f"not a formula: {f!r}")

    def product(self, m: KripkeModel, am: ActionModel) -> Optional[KripkeModel]:
        """``m ⊗ am`` with states ``(u, v)``; None when no pair survives."""
        key = (id(m), id(am))
        if key in self._prod:
            return self._prod[key]
        self._keep.append(m)
        self._keep.append(am)
        if m.agents != am.agents:
            raise UniverseError(
                f"agent universes differ: model {sorted(m.agents)}, action model {sorted(am.agents)}")
        by_point = {v: self.extension(m, am.pre[v]) for v in am.points}
        states = frozenset((u, v) for v, ext in by_point.items() for u in ext)
        if not states:
            self._prod[key] = None
            return None
        rel = {}
        for c in m.agents:
            pairs = set()
            for v, ext in by_point.items():
                for w in am.succ(c, v):
                    target = by_point[w]
                    if not target:
                        continue
                    for u in ext:
                        for u2 in m.succ(c, u):
                            if u2 in target:
                                pairs.add(((u, v), (u2, w)))
            rel[c] = pairs
        val = {r: frozenset(x for x in states if x[0] in ext) for r, ext in m.val.items()}
        prod = KripkeModel(states, rel, val)
        self._prod[key] = prod
        return prod


def check_vocabulary(m: KripkeModel, f: Formula) -> None:
    agents, atoms = formula_vocabulary(f)
    if not agents <= m.agents:
        raise EpistemicInputError(f"unknown agent(s): {', '.join(sorted(agents - m.agents))}")
    if not atoms <= m.atoms:
        raise EpistemicInputError(f"unknown atom(s): {', '.join(sorted(atoms - m.atoms))}")


def evaluate(m: KripkeModel, s: StateId, f: Formula, evaluator: Optional[Evaluator] = None) -> bool:
    """Truth of ``f`` at state ``s`` of ``m``."""
    if s not in m.states:
        raise EpistemicInputError(f"unknown state {s!r}")
    check_vocabulary(m, f)
    return s in (evaluator or Evaluator()).extension(m, f)


def holds(pm: PointedModel, f: Formula, evaluator: Optional[Evaluator] = None) -> bool:
    return evaluate(pm.model, pm.point, f, evaluator)


def extension(m: KripkeModel, f: Formula) -> frozenset:
    check_vocabulary(m, f)
    return Evaluator().extension(m, f)


def is_executable(pm: PointedModel, pam: PointedActionModel,
                  evaluator: Optional[Evaluator] = None) -> bool:
    return holds(pm, pam.precondition, evaluator)


def product_model(m: KripkeModel, am: ActionModel,
                  evaluator: Optional[Evaluator] = None) -> Optional[KripkeModel]:
    return (evaluator or Evaluator()).product(m, am)


def product_update(pm: PointedModel, pam: PointedActionModel,
                   evaluator: Optional[Evaluator] = None) -> PointedModel:
    """Execute ``pam`` at ``pm``; a non-executable action leaves ``pm`` unchanged."""
    ev = evaluator or Evaluator()
    if not holds(pm, pam.precondition, ev):
        return pm
    return PointedModel(ev.product(pm.model, pam.model), (pm.point, pam.point))
