"""Transition rules for processes and e-systems.

Derivations are computed bottom-up over the term.  Inputs are kept symbolic
inside a derivation: an input is a continuation waiting for the received
value, plus the set of names it may not receive because a restriction it was
lifted through binds them.  Communication rules apply the continuation to the
value offered by the matching output; only at the top of the term are the
leftover inputs instantiated over the finite name pool (early semantics) or
over the declared atoms.

Two naming conventions make the side conditions hold without search:

* every derivation uses a single fresh name ``g`` (the first reserved name
  unused by the term and the pool); OPEN renames the extruded binder to ``g``,
  so CLOSE and PAR always find ``g`` outside the other component;
* a restriction whose binder is already in scope (a pool name, or the binder
  of an enclosing restriction) is alpha-renamed before its body is derived, so
  an input under it can still receive the outer name.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ..epistemics import (
    Atom as FAtom, Box, PointedModel, holds, interact_model, product_update, receive_model,
)
from ..epistemics.logic import Evaluator
from ..terms import (
    Act, AgentProc, EPar, ERes, ESystem, InFact, InName, Nil, OutFact, OutName, Par,
    Process, Repl, Res, Sum, Tau, all_names, fresh_name, free_names, subst_fact,
    subst_name,
)
from . import labels as L

_EMPTY: frozenset = frozenset()


@dataclass(frozen=True)
class Universe:
    """Finite pools used to instantiate inputs, plus the declared agents."""
    names: frozenset = frozenset()
    atoms: frozenset = frozenset()
    agents: frozenset = frozenset()

    def __post_init__(self):
        for f in ("names", "atoms", "agents"):
            object.__setattr__(self, f, frozenset(getattr(self, f)))


@dataclass(frozen=True)
class Configuration:
    state: PointedModel
    system: ESystem


class _Ctx:
    """Per-derivation naming state."""

    def __init__(self, term, names: frozenset):
        used = names | all_names(term)
        self.fresh = fresh_name(used)
        self.taken = set(used)
        self.taken.add(self.fresh)
        self.pool = names | free_names(term) | {self.fresh}

    def rename(self) -> str:
        z = fresh_name(self.taken)
        self.taken.add(z)
        return z


# Symbolic actions (tuples, tag first):
#   ("t", R)                 tau
#   ("o", a, c, R)           free name output
#   ("b", a, z, R)           bound output of z (always the context's fresh name)
#   ("i", a, k, blocked)     name input; k(c) gives the residual
#   ("of", a, q, R)          fact output (process level)
#   ("if", a, k)             fact input; k(q) gives the residual
# e-system level adds the acting agent:
#   ("of", a, q, A, R), ("if", a, A, k), ("x", a, q, A, B, R) for interactions.


def _wrap(act, f: Callable):
    """Apply ``f`` to the residual (or to the continuation's result)."""
    tag = act[0]
    if tag == "t":
        return ("t", f(act[1]))
    if tag in ("o", "b"):
        return (tag, act[1], act[2], f(act[3]))
    if tag == "i":
        k = act[2]
        return ("i", act[1], lambda c, k=k: f(k(c)), act[3])
    if tag == "of":
        return act[:-1] + (f(act[-1]),)
    if tag == "if":
        k = act[-1]
        return act[:-1] + (lambda q, k=k: f(k(q)),)
    if tag == "x":
        return act[:-1] + (f(act[-1]),)
    raise AssertionError(tag)


def _communications(left, right, build, make_close):
    """Name communications between two derivation lists.

    ``build(l_res, r_res)`` glues residuals; ``make_close(z, body)`` adds the
    restriction introduced by CLOSE.
    """
    out = []
    l_ins = [a for a in left if a[0] == "i"]
    r_ins = [a for a in right if a[0] == "i"]
    if r_ins:
        for o in left:
            if o[0] == "o" or o[0] == "b":
                for i in r_ins:
                    if i[1] != o[1] or o[2] in i[3]:
                        continue
                    body = build(o[3], i[2](o[2]))
                    out.append(("t", make_close(o[2], body) if o[0] == "b" else body))
    if l_ins:
        for o in right:
            if o[0] == "o" or o[0] == "b":
                for i in l_ins:
                    if i[1] != o[1] or o[2] in i[3]:
                        continue
                    body = build(i[2](o[2]), o[3])
                    out.append(("t", make_close(o[2], body) if o[0] == "b" else body))
    return out


def _restrict(acts, z, ctx, make_res):
    out = []
    fresh = ctx.fresh
    for act in acts:
        tag = act[0]
        if tag == "t":
            out.append(("t", make_res(z, act[1])))
        elif tag == "x":
            # interactions pass restrictions even on their own channel
            out.append(act[:-1] + (make_res(z, act[-1]),))
        elif act[1] == z:
            continue
        elif tag == "o":
            if act[2] == z:
                out.append(("b", act[1], fresh, subst_name(act[3], fresh, z)))
            else:
                out.append(("o", act[1], act[2], make_res(z, act[3])))
        elif tag == "i":
            k = act[2]
            out.append(("i", act[1], lambda c, k=k: make_res(z, k(c)), act[3] | {z}))
        else:
            out.append(_wrap(act, lambda r: make_res(z, r)))
    return out


def _proc(p: Process, scope: frozenset, ctx: _Ctx) -> list:
    if isinstance(p, Act):
        pre, body = p.prefix, p.body
        if isinstance(pre, Tau):
            return [("t", body)]
        if isinstance(pre, OutName):
            return [("o", pre.ch, pre.payload, body)]
        if isinstance(pre, InName):
            x = pre.binder
            return [("i", pre.ch, lambda c: subst_name(body, c, x), _EMPTY)]
        if isinstance(pre, OutFact):
            return [("of", pre.ch, pre.payload, body)]
        if isinstance(pre, InFact):
            chi = pre.binder
            return [("if", pre.ch, lambda q: subst_fact(body, q, chi))]
        raise TypeError(f"unknown prefix {pre!r}")
    if isinstance(p, Nil):
        return []
    if isinstance(p, Sum):
        return _proc(p.left, scope, ctx) + _proc(p.right, scope, ctx)
    if isinstance(p, Par):
        P, Q = p.left, p.right
        lp, lq = _proc(P, scope, ctx), _proc(Q, scope, ctx)
        out = [_wrap(a, lambda r: Par(r, Q)) for a in lp]
        out += [_wrap(a, lambda r: Par(P, r)) for a in lq]
        out += _communications(lp, lq, Par, Res)
        return out
    if isinstance(p, Res):
        z, body = p.binder, p.body
        if z in scope:
            z2 = ctx.rename()
            body, z = subst_name(body, z2, z), z2
        return _restrict(_proc(body, scope | {z}, ctx), z, ctx, Res)
    if isinstance(p, Repl):
        acts = _proc(p.body, scope, ctx)
        out = [_wrap(a, lambda r: Par(r, p)) for a in acts]
        out += _replicated_comms(acts, p)
        return out
    raise TypeError(f"not a process: {p!r}")


def _replicated_comms(acts, rep):
    """REP-COMM and REP-CLOSE: two copies of the body, output copy on the left."""
    out = []
    ins = [a for a in acts if a[0] == "i"]
    if not ins:
        return out
    for o in acts:
        if o[0] != "o" and o[0] != "b":
            continue
        for i in ins:
            if i[1] != o[1] or o[2] in i[3]:
                continue
            pair = Par(o[3], i[2](o[2]))
            if o[0] == "b":
                pair = Res(o[2], pair)
            out.append(("t", Par(pair, rep)))
    return out


def _sys(g: ESystem, scope: frozenset, ctx: _Ctx, knows: Callable[[str, str], bool]) -> list:
    if isinstance(g, AgentProc):
        agent = g.agent
        out = []
        for act in _proc(g.control, scope, ctx):
            tag = act[0]
            if tag == "of":
                # OUT_e: the sender must know the fact it sends
                if knows(agent, act[2]):
                    out.append(("of", act[1], act[2], agent, AgentProc(agent, act[3])))
            elif tag == "if":
                k = act[2]
                out.append(("if", act[1], agent, lambda q, k=k: AgentProc(agent, k(q))))
            else:
                out.append(_wrap(act, lambda r: AgentProc(agent, r)))
        return out
    if isinstance(g, EPar):
        G, H = g.left, g.right
        lg, lh = _sys(G, scope, ctx, knows), _sys(H, scope, ctx, knows)
        out = [_wrap(a, lambda r: EPar(r, H)) for a in lg]
        out += [_wrap(a, lambda r: EPar(G, r)) for a in lh]
        out += _communications(lg, lh, EPar, ERes)
        out += _fact_exchanges(lg, lh, False)
        out += _fact_exchanges(lh, lg, True)
        return out
    if isinstance(g, ERes):
        z, body = g.binder, g.body
        if z in scope:
            z2 = ctx.rename()
            body, z = subst_name(body, z2, z), z2
        return _restrict(_sys(body, scope | {z}, ctx, knows), z, ctx, ERes)
    raise TypeError(f"not an e-system: {g!r}")


def _fact_exchanges(senders, receivers, swapped):
    """COMM_e-fact: a gated output on one side meets a fact input on the other."""
    out = []
    ins = [a for a in receivers if a[0] == "if"]
    if not ins:
        return out
    for o in senders:
        if o[0] != "of":
            continue
        _, a, q, sender, res = o
        for i in ins:
            if i[1] != a:
                continue
            other = i[3](q)
            system = EPar(other, res) if swapped else EPar(res, other)
            out.append(("x", a, q, sender, i[2], system))
    return out


# -- public API ---------------------------------------------------------------

def proc_transitions(p: Process, u: Universe) -> set:
    """All ``(action, residual)`` pairs derivable for ``p``.

    Name inputs are instantiated over ``u.names``, the free names of ``p`` and
    one fresh name; fact inputs over ``u.atoms``.
    """
    ctx = _Ctx(p, u.names)
    out = set()
    for act in _proc(p, ctx.pool, ctx):
        tag = act[0]
        if tag == "t":
            out.add((L.TAU_LABEL, act[1]))
        elif tag == "o":
            out.add((L.OutName(act[1], act[2]), act[3]))
        elif tag == "b":
            out.add((L.BoundOut(act[1], act[2]), act[3]))
        elif tag == "i":
            for c in sorted(ctx.pool - act[3]):
                out.add((L.InName(act[1], c), act[2](c)))
        elif tag == "of":
            out.add((L.OutFact(act[1], act[2]), act[3]))
        elif tag == "if":
            for q in sorted(u.atoms):
                out.add((L.InFact(act[1], q), act[2](q)))
    return out


@dataclass(frozen=True)
class RawTransition:
    """A transition whose epistemic effect has not been applied yet.

    ``effect`` is ``None`` (state unchanged), ``("recv", q, A)`` or
    ``("pass", q, A, B)``.
    """
    label: object
    effect: Optional[tuple]
    system: ESystem


class KnowledgeGate:
    """Caches ``M,s |= K_A q`` for one pointed model."""

    def __init__(self, state: PointedModel, evaluator: Optional[Evaluator] = None):
        self.state = state
        self.evaluator = evaluator or Evaluator()
        self.cache: dict = {}

    def __call__(self, agent: str, q: str) -> bool:
        key = (agent, q)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = holds(self.state, Box(agent, FAtom(q)), self.evaluator)
        return hit


def symbolic_transitions(c: Configuration, u: Universe, gate: Optional[KnowledgeGate] = None) -> list:
    """Symbolic e-system actions of ``c`` plus the pool used to expand inputs."""
    ctx = _Ctx(c.system, u.names)
    gate = gate or KnowledgeGate(c.state)
    return _sys(c.system, ctx.pool, ctx, gate), ctx.pool


def raw_transitions(c: Configuration, u: Universe, keep: Optional[Iterable[type]] = None,
                    fact_inputs: Optional[Callable[[str], Iterable[str]]] = None,
                    gate: Optional[KnowledgeGate] = None) -> list:
    """Transitions of ``c`` with effects left as descriptors.

    ``keep`` restricts the label kinds produced; ``fact_inputs(channel)``
    overrides which atoms an agent-level fact input may receive.
    """
    acts, pool = symbolic_transitions(c, u, gate)
    keep = set(keep) if keep is not None else None

    def wanted(kind):
        return keep is None or kind in keep

    out = []
    for act in acts:
        tag = act[0]
        if tag == "t":
            if wanted(L.Tau):
                out.append(RawTransition(L.TAU_LABEL, None, act[1]))
        elif tag == "x":
            if wanted(L.Interact):
                _, a, q, sender, receiver, sys = act
                out.append(RawTransition(L.Interact(a, q, sender, receiver),
                                         ("pass", q, sender, receiver), sys))
        elif tag == "o":
            if wanted(L.OutName):
                out.append(RawTransition(L.OutName(act[1], act[2]), None, act[3]))
        elif tag == "b":
            if wanted(L.BoundOut):
                out.append(RawTransition(L.BoundOut(act[1], act[2]), None, act[3]))
        elif tag == "i":
            if wanted(L.InName):
                for name in sorted(pool - act[3]):
                    out.append(RawTransition(L.InName(act[1], name), None, act[2](name)))
        elif tag == "of":
            if wanted(L.AgentOutFact):
                _, a, q, agent, sys = act
                out.append(RawTransition(L.AgentOutFact(a, q, agent), None, sys))
        elif tag == "if":
            if wanted(L.AgentInFact):
                _, a, agent, k = act
                atoms = fact_inputs(a) if fact_inputs is not None else sorted(u.atoms)
                for q in atoms:
                    out.append(RawTransition(L.AgentInFact(a, q, agent), ("recv", q, agent), k(q)))
    return out


def apply_effect(state: PointedModel, effect: Optional[tuple]) -> PointedModel:
    if effect is None:
        return state
    agents = state.model.agents
    if effect[0] == "recv":
        return product_update(state, receive_model(effect[1], effect[2], agents))
    if effect[0] == "pass":
        return product_update(state, interact_model(effect[1], effect[2], effect[3], agents))
    raise ValueError(f"unknown effect {effect!r}")


def esys_transitions(c: Configuration, u: Universe) -> list:
    """All ``(label, successor configuration)`` pairs of ``c``, effects applied."""
    out = []
    seen = set()
    for t in raw_transitions(c, u):
        key = (t.label, t.system)
        if key in seen:
            continue
        seen.add(key)
        out.append((t.label, Configuration(apply_effect(c.state, t.effect), t.system)))
    return out
