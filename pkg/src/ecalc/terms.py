"""Abstract syntax of processes and e-systems.

Names (channels, links), atoms (basic facts, also used as fact binders) and
agents are plain strings.  Which identifiers are atoms is decided when a term
is built, usually by the parser from declarations, so the AST itself never has
to guess.

All nodes are immutable, compare structurally and cache their hash, so they
can be used freely as dictionary keys during state-space exploration.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

Name = str
Atom = str
Agent = str

NAME_FAMILY = "n"
FACT_FAMILY = "v"
RESERVED = re.compile(r"^[nv][0-9]+$")


class Node:
    """Structural equality plus a hash that is computed once."""

    __dataclass_fields__: dict

    def _key(self):
        d = self.__dict__
        return tuple(d[f] for f in self.__dataclass_fields__)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return pretty(self)


def _memo(node, slot, compute):
    d = node.__dict__
    try:
        return d[slot]
    except KeyError:
        value = compute()
        object.__setattr__(node, slot, value)
        return value


# -- prefixes -----------------------------------------------------------------

class Prefix(Node):
    pass


@dataclass(frozen=True, eq=False)
class OutName(Prefix):
    ch: Name
    payload: Name


@dataclass(frozen=True, eq=False)
class InName(Prefix):
    ch: Name
    binder: Name


@dataclass(frozen=True, eq=False)
class OutFact(Prefix):
    ch: Name
    payload: Atom


@dataclass(frozen=True, eq=False)
class InFact(Prefix):
    ch: Name
    binder: Atom


@dataclass(frozen=True, eq=False)
class Tau(Prefix):
    pass


# -- processes ----------------------------------------------------------------

class Process(Node):
    pass


@dataclass(frozen=True, eq=False)
class Nil(Process):
    pass


@dataclass(frozen=True, eq=False)
class Act(Process):
    prefix: Prefix
    body: Process


@dataclass(frozen=True, eq=False)
class Sum(Process):
    left: Process
    right: Process


@dataclass(frozen=True, eq=False)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True, eq=False)
class Res(Process):
    binder: Name
    body: Process


@dataclass(frozen=True, eq=False)
class Repl(Process):
    body: Process


NIL = Nil()
TAU = Tau()


# -- e-systems ----------------------------------------------------------------

class ESystem(Node):
    pass


@dataclass(frozen=True, eq=False)
class AgentProc(ESystem):
    agent: Agent
    control: Process


@dataclass(frozen=True, eq=False)
class EPar(ESystem):
    left: ESystem
    right: ESystem


@dataclass(frozen=True, eq=False)
class ERes(ESystem):
    binder: Name
    body: ESystem


Term = Union[Process, ESystem]


def par(*procs: Process) -> Process:
    """Left-nested parallel composition; ``par()`` is ``0``."""
    if not procs:
        return NIL
    out = procs[0]
    for p in procs[1:]:
        out = Par(out, p)
    return out


def epar(*systems: ESystem) -> ESystem:
    out = systems[0]
    for g in systems[1:]:
        out = EPar(out, g)
    return out


def new(binders: Iterable[Name], body):
    """Nested restriction ``new z1, ..., zn (body)``, outermost first."""
    wrap = ERes if isinstance(body, ESystem) else Res
    for z in reversed(list(binders)):
        body = wrap(z, body)
    return body


# -- name sets ----------------------------------------------------------------

def free_names(t: Term) -> frozenset:
    return _memo(t, "_fn", lambda: _free_names(t))


def _free_names(t):
    if isinstance(t, Act):
        p, body = t.prefix, free_names(t.body)
        if isinstance(p, OutName):
            return body | {p.ch, p.payload}
        if isinstance(p, InName):
            return (body - {p.binder}) | {p.ch}
        if isinstance(p, (OutFact, InFact)):
            return body | {p.ch}
        return body
    if isinstance(t, (Sum, Par, EPar)):
        return free_names(t.left) | free_names(t.right)
    if isinstance(t, (Res, ERes)):
        return free_names(t.body) - {t.binder}
    if isinstance(t, Repl):
        return free_names(t.body)
    if isinstance(t, AgentProc):
        return free_names(t.control)
    return frozenset()


def bound_names(t: Term) -> frozenset:
    """Names occurring in a binding position (input binders and restrictions)."""
    return _memo(t, "_bn", lambda: _bound_names(t))


def _bound_names(t):
    if isinstance(t, Act):
        inner = bound_names(t.body)
        if isinstance(t.prefix, InName):
            return inner | {t.prefix.binder}
        return inner
    if isinstance(t, (Sum, Par, EPar)):
        return bound_names(t.left) | bound_names(t.right)
    if isinstance(t, (Res, ERes)):
        return bound_names(t.body) | {t.binder}
    if isinstance(t, Repl):
        return bound_names(t.body)
    if isinstance(t, AgentProc):
        return bound_names(t.control)
    return frozenset()


def all_names(t: Term) -> frozenset:
    return free_names(t) | bound_names(t)


def free_facts(t: Term) -> frozenset:
    """Atoms sent or received without an enclosing fact binder."""
    return _memo(t, "_ff", lambda: _free_facts(t))


def _free_facts(t):
    if isinstance(t, Act):
        p, body = t.prefix, free_facts(t.body)
        if isinstance(p, OutFact):
            return body | {p.payload}
        if isinstance(p, InFact):
            return body - {p.binder}
        return body
    if isinstance(t, (Sum, Par, EPar)):
        return free_facts(t.left) | free_facts(t.right)
    if isinstance(t, (Res, Repl, ERes)):
        return free_facts(t.body)
    if isinstance(t, AgentProc):
        return free_facts(t.control)
    return frozenset()


def bound_facts(t: Term) -> frozenset:
    return _memo(t, "_bf", lambda: _bound_facts(t))


def _bound_facts(t):
    if isinstance(t, Act):
        inner = bound_facts(t.body)
        if isinstance(t.prefix, InFact):
            return inner | {t.prefix.binder}
        return inner
    if isinstance(t, (Sum, Par, EPar)):
        return bound_facts(t.left) | bound_facts(t.right)
    if isinstance(t, (Res, Repl, ERes)):
        return bound_facts(t.body)
    if isinstance(t, AgentProc):
        return bound_facts(t.control)
    return frozenset()


# -- fresh identifiers --------------------------------------------------------

def fresh_name(avoid: Iterable[Name]) -> Name:
    """First name of the reserved ``n0, n1, ...`` family not in ``avoid``."""
    return _fresh(NAME_FAMILY, avoid)


def fresh_fact(avoid: Iterable[Atom]) -> Atom:
    """First fact variable of the reserved ``v0, v1, ...`` family not in ``avoid``."""
    return _fresh(FACT_FAMILY, avoid)


def _fresh(prefix, avoid):
    avoid = avoid if isinstance(avoid, (set, frozenset)) else set(avoid)
    i = 0
    while f"{prefix}{i}" in avoid:
        i += 1
    return f"{prefix}{i}"


def is_reserved(ident: str) -> bool:
    return RESERVED.match(ident) is not None


# -- substitution -------------------------------------------------------------

def subst_name(t: Term, new: Name, old: Name) -> Term:
    """Capture-avoiding ``t{new/old}`` on processes and e-systems."""
    if new == old or old not in free_names(t):
        return t
    return _subst_name(t, new, old)


def _rn(x, new, old):
    return new if x == old else x


def _under_binder(z, body, new, old, rebuild):
    # old is free in the whole term, so z != old unless old only occurs outside
    if z == old or old not in free_names(body):
        return rebuild(z, body)
    if z == new:
        z2 = fresh_name(free_names(body) | {new, old})
        body = _subst_name(body, z2, z) if z in free_names(body) else body
        z = z2
    return rebuild(z, _subst_name(body, new, old))


def _subst_name(t, new, old):
    if isinstance(t, Act):
        p = t.prefix
        if isinstance(p, OutName):
            return Act(OutName(_rn(p.ch, new, old), _rn(p.payload, new, old)),
                       subst_name(t.body, new, old))
        if isinstance(p, InName):
            ch = _rn(p.ch, new, old)
            return _under_binder(p.binder, t.body, new, old,
                                 lambda z, b: Act(InName(ch, z), b))
        if isinstance(p, OutFact):
            return Act(OutFact(_rn(p.ch, new, old), p.payload), subst_name(t.body, new, old))
        if isinstance(p, InFact):
            return Act(InFact(_rn(p.ch, new, old), p.binder), subst_name(t.body, new, old))
        return Act(p, subst_name(t.body, new, old))
    if isinstance(t, (Sum, Par, EPar)):
        return type(t)(subst_name(t.left, new, old), subst_name(t.right, new, old))
    if isinstance(t, (Res, ERes)):
        return _under_binder(t.binder, t.body, new, old, type(t))
    if isinstance(t, Repl):
        return Repl(subst_name(t.body, new, old))
    if isinstance(t, AgentProc):
        return AgentProc(t.agent, subst_name(t.control, new, old))
    return t


def subst_fact(t: Term, new: Atom, old: Atom) -> Term:
    """Capture-avoiding ``t{new/old}`` over fact binders."""
    if new == old or old not in free_facts(t):
        return t
    if isinstance(t, Act):
        p = t.prefix
        if isinstance(p, OutFact):
            return Act(OutFact(p.ch, _rn(p.payload, new, old)), subst_fact(t.body, new, old))
        if isinstance(p, InFact):
            chi, body = p.binder, t.body
            if chi == new:
                chi2 = fresh_fact(free_facts(body) | {new, old})
                body = subst_fact(body, chi2, chi)
                chi = chi2
            return Act(InFact(p.ch, chi), subst_fact(body, new, old))
        return Act(p, subst_fact(t.body, new, old))
    if isinstance(t, (Sum, Par, EPar)):
        return type(t)(subst_fact(t.left, new, old), subst_fact(t.right, new, old))
    if isinstance(t, (Res, ERes)):
        return type(t)(t.binder, subst_fact(t.body, new, old))
    if isinstance(t, Repl):
        return Repl(subst_fact(t.body, new, old))
    if isinstance(t, AgentProc):
        return AgentProc(t.agent, subst_fact(t.control, new, old))
    return t


# -- alpha canonical form -----------------------------------------------------

def _binder_counts(t) -> tuple[int, int]:
    return _memo(t, "_nb", lambda: _count_binders(t))


def _count_binders(t):
    if isinstance(t, Act):
        n, f = _binder_counts(t.body)
        if isinstance(t.prefix, InName):
            return n + 1, f
        if isinstance(t.prefix, InFact):
            return n, f + 1
        return n, f
    if isinstance(t, (Sum, Par, EPar)):
        n1, f1 = _binder_counts(t.left)
        n2, f2 = _binder_counts(t.right)
        return n1 + n2, f1 + f2
    if isinstance(t, (Res, ERes)):
        n, f = _binder_counts(t.body)
        return n + 1, f
    if isinstance(t, Repl):
        return _binder_counts(t.body)
    if isinstance(t, AgentProc):
        return _binder_counts(t.control)
    return 0, 0


class _Family:
    def __init__(self, prefix, avoid):
        self.prefix, self.avoid, self.items, self.next = prefix, avoid, [], 0

    def __getitem__(self, i):
        while len(self.items) <= i:
            cand = f"{self.prefix}{self.next}"
            self.next += 1
            if cand not in self.avoid:
                self.items.append(cand)
        return self.items[i]


def alpha_canonical(t: Term) -> Term:
    """Rename every binder to a canonical, term-unique identifier.

    Binders are numbered in post-order (leftmost-innermost first), separately
    for name binders and fact binders, skipping identifiers that occur free.
    """
    names = _Family(NAME_FAMILY, free_names(t))
    facts = _Family(FACT_FAMILY, free_facts(t))
    return _canon(t, {}, {}, 0, 0, names, facts)


def _canon(t, nenv, fenv, nb, fb, names, facts):
    if isinstance(t, Act):
        p = t.prefix
        if isinstance(p, OutName):
            pre = OutName(nenv.get(p.ch, p.ch), nenv.get(p.payload, p.payload))
        elif isinstance(p, OutFact):
            pre = OutFact(nenv.get(p.ch, p.ch), fenv.get(p.payload, p.payload))
        elif isinstance(p, InName):
            n, _ = _binder_counts(t.body)
            z = names[nb + n]
            body = _canon(t.body, {**nenv, p.binder: z}, fenv, nb, fb, names, facts)
            return Act(InName(nenv.get(p.ch, p.ch), z), body)
        elif isinstance(p, InFact):
            _, f = _binder_counts(t.body)
            chi = facts[fb + f]
            body = _canon(t.body, nenv, {**fenv, p.binder: chi}, nb, fb, names, facts)
            return Act(InFact(nenv.get(p.ch, p.ch), chi), body)
        else:
            pre = p
        return Act(pre, _canon(t.body, nenv, fenv, nb, fb, names, facts))
    if isinstance(t, (Sum, Par, EPar)):
        n, f = _binder_counts(t.left)
        return type(t)(_canon(t.left, nenv, fenv, nb, fb, names, facts),
                       _canon(t.right, nenv, fenv, nb + n, fb + f, names, facts))
    if isinstance(t, (Res, ERes)):
        n, _ = _binder_counts(t.body)
        z = names[nb + n]
        return type(t)(z, _canon(t.body, {**nenv, t.binder: z}, fenv, nb, fb, names, facts))
    if isinstance(t, Repl):
        return Repl(_canon(t.body, nenv, fenv, nb, fb, names, facts))
    if isinstance(t, AgentProc):
        return AgentProc(t.agent, _canon(t.control, nenv, fenv, nb, fb, names, facts))
    return t


def alpha_equivalent(t1: Term, t2: Term) -> bool:
    return alpha_canonical(t1) == alpha_canonical(t2)


# -- well-formedness ----------------------------------------------------------

def is_sum_form(p: Process) -> bool:
    """True for terms of the guarded-choice sub-grammar: 0, prefixed terms, sums of those."""
    if isinstance(p, (Nil, Act)):
        return True
    if isinstance(p, Sum):
        return is_sum_form(p.left) and is_sum_form(p.right)
    return False


def unguarded_sums(t: Term) -> list[Process]:
    """Sum nodes having an operand outside the guarded-choice sub-grammar."""
    bad = []

    def walk(x):
        if isinstance(x, Sum):
            if not (is_sum_form(x.left) and is_sum_form(x.right)):
                bad.append(x)
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (Par, EPar)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (Act, Res, Repl, ERes)):
            walk(x.body)
        elif isinstance(x, AgentProc):
            walk(x.control)

    walk(t)
    return bad


def agents_of(h: ESystem) -> list[Agent]:
    """Agents in left-to-right order, duplicates kept."""
    if isinstance(h, AgentProc):
        return [h.agent]
    if isinstance(h, EPar):
        return agents_of(h.left) + agents_of(h.right)
    if isinstance(h, ERes):
        return agents_of(h.body)
    raise TypeError(f"not an e-system: {h!r}")


@dataclass(frozen=True)
class ValidationReport:
    duplicate_agents: tuple = ()
    unguarded_sums: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.duplicate_agents and not self.unguarded_sums

    def __str__(self):
        if self.ok:
            return "ok"
        parts = []
        if self.duplicate_agents:
            parts.append("agents occurring more than once: " + ", ".join(self.duplicate_agents))
        if self.unguarded_sums:
            parts.append("'+' operands outside the guarded sub-grammar: "
                         + "; ".join(self.unguarded_sums))
        return "; ".join(parts)


def validate_esystem(h: ESystem) -> ValidationReport:
    seen, dup = set(), []
    for a in agents_of(h):
        if a in seen and a not in dup:
            dup.append(a)
        seen.add(a)
    return ValidationReport(tuple(sorted(dup)), tuple(pretty(s) for s in unguarded_sums(h)))


def validate_process(p: Process) -> ValidationReport:
    return ValidationReport((), tuple(pretty(s) for s in unguarded_sums(p)))


# -- pretty printing ----------------------------------------------------------
# Output is accepted by the parser and parses back to the same tree.

def pretty_prefix(p: Prefix) -> str:
    if isinstance(p, (OutName, OutFact)):
        return f"{p.ch}!{p.payload}"
    if isinstance(p, (InName, InFact)):
        return f"{p.ch}?({p.binder})"
    return "tau"


def _restrictions(t):
    binders = []
    while isinstance(t, (Res, ERes)):
        binders.append(t.binder)
        t = t.body
    return binders, t


def _show_proc(p, level):
    if isinstance(p, Sum):
        s, own = f"{_show_proc(p.left, 0)} + {_show_proc(p.right, 1)}", 0
    elif isinstance(p, Par):
        s, own = f"{_show_proc(p.left, 1)} | {_show_proc(p.right, 2)}", 1
    elif isinstance(p, Nil):
        return "0"
    elif isinstance(p, Act):
        return f"{pretty_prefix(p.prefix)}.{_show_proc(p.body, 2)}"
    elif isinstance(p, Repl):
        return "!" + _show_proc(p.body, 2)
    elif isinstance(p, Res):
        binders, body = _restrictions(p)
        return f"new {', '.join(binders)} ({_show_proc(body, 0)})"
    else:
        raise TypeError(f"not a process: {p!r}")
    return f"({s})" if own < level else s


def _show_sys(g, level):
    if isinstance(g, EPar):
        s = f"{_show_sys(g.left, 0)} || {_show_sys(g.right, 1)}"
        return f"({s})" if level > 0 else s
    if isinstance(g, AgentProc):
        return f"[{_show_proc(g.control, 0)}]@{g.agent}"
    if isinstance(g, ERes):
        binders, body = _restrictions(g)
        return f"new {', '.join(binders)} ({_show_sys(body, 0)})"
    raise TypeError(f"not an e-system: {g!r}")


def pretty(t) -> str:
    if isinstance(t, Prefix):
        return pretty_prefix(t)
    if isinstance(t, Process):
        return _show_proc(t, 0)
    if isinstance(t, ESystem):
        return _show_sys(t, 0)
    return repr(t)
