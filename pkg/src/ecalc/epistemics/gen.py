"""Seeded random models, action models and formulas for the property suites."""
from __future__ import annotations

import random
from typing import Sequence

from .logic import (
    TOP, ActionBox, ActionModel, And, Atom, Box, Formula, KripkeModel, Not,
    PointedActionModel, PointedModel, interact_model, receive_model,
)

EDGE_PROB = 0.5
ATOM_PROB = 0.5


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_model(n_states: int, agents: Sequence[str], atoms: Sequence[str], seed) -> PointedModel:
    """States ``0..n-1``; each arrow and each atom-at-state drawn independently."""
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    rng = _rng(seed)
    states = range(n_states)
    rel = {a: {(u, v) for u in states for v in states if rng.random() < EDGE_PROB}
           for a in agents}
    val = {p: {s for s in states if rng.random() < ATOM_PROB} for p in atoms}
    point = rng.randrange(n_states)
    return PointedModel(KripkeModel(states, rel, val), point)


def duplicate_states(pm: PointedModel, seed) -> PointedModel:
    """A bisimilar copy where every state is split into two.

    Each arrow ``u -> v`` becomes arrows from both copies of ``u`` to a
    non-empty random subset of the copies of ``v``.
    """
    rng = _rng(seed)
    m = pm.model
    states = {(s, i) for s in m.states for i in (0, 1)}
    rel = {}
    for a in sorted(m.agents):
        pairs = set()
        for u, v in sorted(m.rel[a], key=repr):
            for i in (0, 1):
                targets = [j for j in (0, 1) if rng.random() < 0.5] or [rng.randrange(2)]
                pairs.update(((u, i), (v, j)) for j in targets)
        rel[a] = pairs
    val = {p: {(s, i) for s in m.val[p] for i in (0, 1)} for p in m.atoms}
    return PointedModel(KripkeModel(states, rel, val), (pm.point, rng.randrange(2)))


def random_constructor(rng: random.Random, agents: Sequence[str], atoms: Sequence[str]) -> PointedActionModel:
    """A receive or interact model over random atoms and agents."""
    q = rng.choice(list(atoms))
    if len(agents) >= 2 and rng.random() < 0.5:
        a, b = rng.sample(list(agents), 2)
        return interact_model(q, a, b, agents)
    return receive_model(q, rng.choice(list(agents)), agents)


def random_propositional(rng: random.Random, atoms: Sequence[str], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.3:
        return Atom(rng.choice(list(atoms))) if rng.random() < 0.9 else TOP
    if rng.random() < 0.4:
        return Not(random_propositional(rng, atoms, depth - 1))
    return And(random_propositional(rng, atoms, depth - 1), random_propositional(rng, atoms, depth - 1))


def random_formula(rng: random.Random, agents: Sequence[str], atoms: Sequence[str],
                   depth: int, actions: bool = True) -> Formula:
    """Random formula of modal/connective depth at most ``depth``.

    With ``actions`` the action modality over the canned models is included.
    """
    if depth <= 0 or rng.random() < 0.15:
        return Atom(rng.choice(list(atoms))) if rng.random() < 0.9 else TOP
    kinds = ["not", "and", "box"] + (["action"] if actions else [])
    kind = rng.choice(kinds)
    if kind == "not":
        return Not(random_formula(rng, agents, atoms, depth - 1, actions))
    if kind == "and":
        return And(random_formula(rng, agents, atoms, depth - 1, actions),
                   random_formula(rng, agents, atoms, depth - 1, actions))
    if kind == "box":
        return Box(rng.choice(list(agents)), random_formula(rng, agents, atoms, depth - 1, actions))
    return ActionBox(random_constructor(rng, agents, atoms),
                     random_formula(rng, agents, atoms, depth - 1, actions))


def random_action_model(rng: random.Random, agents: Sequence[str], atoms: Sequence[str],
                        max_points: int = 3) -> PointedActionModel:
    """Arbitrary action model with propositional or one-box preconditions."""
    n = rng.randint(1, max_points)
    points = range(n)
    rel = {a: {(u, v) for u in points for v in points if rng.random() < EDGE_PROB} for a in agents}
    pre = {}
    for v in points:
        f = random_propositional(rng, atoms, 2)
        if rng.random() < 0.3:
            f = Box(rng.choice(list(agents)), f)
        pre[v] = f
    return PointedActionModel(ActionModel(points, rel, pre), rng.randrange(n))
