"""Seeded property suites for product update.

Each suite draws one random instance per seed and checks one property of
the update operation.  Instances are drawn from ``random.Random(f"{suite}:{seed}")``
so a failing seed replays on its own, whatever else was run.

All suites call the update through the ``update`` argument; tests pass a
deliberately broken function there to see that the suites notice.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .epistemics import (
    And, Atom, Box, Evaluator, PointedModel, bisimilar, duplicate_states, holds,
    interact_model, is_executable, product_update, random_action_model,
    random_constructor, random_model, random_propositional, receive_model,
)
from .epistemics.logic import show_formula

AGENT_POOL = ("A", "B", "C")
ATOM_POOL = ("p", "q", "r")


@dataclass(frozen=True)
class SizeCaps:
    max_states: int = 5
    max_agents: int = 3
    max_atoms: int = 3

    def __post_init__(self):
        if not (1 <= self.max_agents <= len(AGENT_POOL) and 1 <= self.max_atoms <= len(ATOM_POOL)):
            raise ValueError(f"at most {len(AGENT_POOL)} agents and {len(ATOM_POOL)} atoms")
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


@dataclass
class Counterexample:
    """Everything needed to replay a failure: the seed plus models and a formula."""
    seed: int
    note: str
    models: dict = field(default_factory=dict)   # label -> PointedModel or PointedActionModel
    formula: Optional[str] = None


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    vacuous: int = 0
    failures: list = field(default_factory=list)   # failing seeds
    counterexample: Optional[Counterexample] = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures


class _Fail(Exception):
    def __init__(self, cx: Counterexample):
        self.cx = cx


class _Vacuous(Exception):
    pass


def _instance(rng: random.Random, caps: SizeCaps, min_agents: int = 1):
    n_agents = rng.randint(min(min_agents, caps.max_agents), caps.max_agents)
    agents = AGENT_POOL[:max(n_agents, min_agents)]
    atoms = ATOM_POOL[:rng.randint(1, caps.max_atoms)]
    pm = random_model(rng.randint(1, caps.max_states), agents, atoms, rng)
    return pm, agents, atoms


def _check(cond: bool, seed: int, note: str, formula=None, **models):
    if not cond:
        text = show_formula(formula) if formula is not None else None
        raise _Fail(Counterexample(seed, note, models, text))


def bisim_preservation(seed, caps, update):
    rng = random.Random(f"bisim-preservation:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    twin = duplicate_states(pm, rng)
    pam = random_constructor(rng, agents, atoms)
    u1, u2 = update(pm, pam), update(twin, pam)
    _check(bisimilar(u1, u2), seed, "updates of bisimilar models are not bisimilar",
           model=pm, twin=twin, action=pam, updated=u1, updated_twin=u2)


def fact_preservation(seed, caps, update):
    rng = random.Random(f"fact-preservation:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    if rng.random() < 0.5:
        pam = random_action_model(rng, agents, atoms)
    else:
        pam = random_constructor(rng, agents, atoms)
    ev = Evaluator()
    known = [Box(c, Atom(r)) for c in agents for r in atoms if holds(pm, Box(c, Atom(r)), ev)]
    if not known:
        raise _Vacuous
    after = update(pm, pam)
    for f in known:
        _check(holds(after, f), seed, "known fact forgotten by an update", f,
               model=pm, action=pam, updated=after)


def precondition_composition(seed, caps, update):
    rng = random.Random(f"precondition-composition:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    pam = random_action_model(rng, agents, atoms)
    theta = random_propositional(rng, atoms, 3)
    ev = Evaluator()
    for s in sorted(pm.model.states, key=repr):
        at = PointedModel(pm.model, s)
        for v in sorted(pam.model.points, key=repr):
            act = pam.at(v)
            pre = is_executable(at, act, ev)
            lhs = pre and holds(update(at, act), theta)
            rhs = pre and holds(at, theta, ev)
            _check(lhs == rhs, seed, f"precondition composition differs at state {s!r}, point {v!r}",
                   And(act.precondition, theta), model=at, action=act)


def succ_receive(seed, caps, update):
    rng = random.Random(f"succ-receive:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    q, b = rng.choice(atoms), rng.choice(agents)
    after = update(pm, receive_model(q, b, agents))
    f = Box(b, Atom(q))
    _check(holds(after, f), seed, "receiver does not know the fact", f,
           model=pm, action=receive_model(q, b, agents), updated=after)


def succ_interact(seed, caps, update):
    rng = random.Random(f"succ-interact:{seed}")
    pm, agents, atoms = _instance(rng, caps, min_agents=2)
    q = rng.choice(atoms)
    a, b = rng.sample(agents, 2)
    if not holds(pm, Box(a, Atom(q))):
        raise _Vacuous
    pam = interact_model(q, a, b, agents)
    after = update(pm, pam)
    for f in (Box(b, Atom(q)), Box(b, Box(a, Atom(q)))):
        _check(holds(after, f), seed, "interaction did not transfer knowledge", f,
               model=pm, action=pam, updated=after)


def executability_pairing(seed, caps, update):
    rng = random.Random(f"executability-pairing:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    m1 = random_constructor(rng, agents, atoms)
    m2 = random_constructor(rng, agents, atoms)
    if not (is_executable(pm, m1) and is_executable(pm, m2)):
        raise _Vacuous
    double = update(update(pm, m1), m2)
    want = ((pm.point, m1.point), m2.point)
    _check(want in double.model.states and double.point == want, seed,
           f"state {want!r} missing from the double product",
           model=pm, first=m1, second=m2, updated=double)


def idempotence(seed, caps, update):
    rng = random.Random(f"idempotence:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    pam = random_constructor(rng, agents, atoms)
    once = update(pm, pam)
    twice = update(once, pam)
    _check(bisimilar(once, twice), seed, "repeating the update changed the state",
           model=pm, action=pam, once=once, twice=twice)


def commutativity(seed, caps, update):
    rng = random.Random(f"commutativity:{seed}")
    pm, agents, atoms = _instance(rng, caps)
    m1 = random_constructor(rng, agents, atoms)
    m2 = random_constructor(rng, agents, atoms)
    if not (is_executable(pm, m1) and is_executable(pm, m2)):
        raise _Vacuous
    ab = update(update(pm, m1), m2)
    ba = update(update(pm, m2), m1)
    _check(bisimilar(ab, ba), seed, "the two update orders disagree",
           model=pm, first=m1, second=m2, first_then_second=ab, second_then_first=ba)


SUITES: dict[str, Callable] = {
    "bisim-preservation": bisim_preservation,
    "fact-preservation": fact_preservation,
    "precondition-composition": precondition_composition,
    "succ-receive": succ_receive,
    "succ-interact": succ_interact,
    "executability-pairing": executability_pairing,
    "idempotence": idempotence,
    "commutativity": commutativity,
}


def run_suite(name: str, seed: int = 0, count: int = 500, caps: SizeCaps = SizeCaps(),
              update: Callable = product_update) -> PropertyResult:
    """Run one suite on seeds ``seed .. seed+count-1``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    fn = SUITES[name]
    res = PropertyResult(name)
    start = time.perf_counter()
    for s in range(seed, seed + count):
        try:
            fn(s, caps, update)
            res.checked += 1
        except _Vacuous:
            res.vacuous += 1
        except _Fail as exc:
            res.checked += 1
            res.failures.append(s)
            if res.counterexample is None:
                res.counterexample = exc.cx
    res.seconds = time.perf_counter() - start
    return res


def run_all(seed: int = 0, count: int = 500, caps: SizeCaps = SizeCaps(),
            update: Callable = product_update, only=None) -> list[PropertyResult]:
    names = list(SUITES) if only is None else list(only)
    return [run_suite(n, seed, count, caps, update) for n in names]
