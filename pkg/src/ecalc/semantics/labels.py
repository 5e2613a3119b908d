"""Transition labels for processes and e-systems, and label patterns for traces."""
from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Optional, Union


@dataclass(frozen=True)
class OutName:
    a: str
    c: str


@dataclass(frozen=True)
class InName:
    a: str
    c: str


@dataclass(frozen=True)
class BoundOut:
    """Output of a restricted name ``z`` on ``a``; ``z`` is a binding occurrence."""
    a: str
    z: str


@dataclass(frozen=True)
class Tau:
    pass


@dataclass(frozen=True)
class OutFact:
    a: str
    q: str


@dataclass(frozen=True)
class InFact:
    a: str
    q: str


@dataclass(frozen=True)
class AgentOutFact:
    a: str
    q: str
    agent: str


@dataclass(frozen=True)
class AgentInFact:
    a: str
    q: str
    agent: str


@dataclass(frozen=True)
class Interact:
    """Agent ``sender`` passes fact ``q`` to ``receiver`` over channel ``a``."""
    a: str
    q: str
    sender: str
    receiver: str

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError("an interaction needs two distinct agents")


TAU_LABEL = Tau()

ProcAction = Union[OutName, InName, BoundOut, OutFact, InFact, Tau]
Label = Union[OutName, InName, BoundOut, Tau, AgentOutFact, AgentInFact, Interact]

LABEL_KINDS = {cls.__name__: cls for cls in
               (OutName, InName, BoundOut, Tau, OutFact, InFact,
                AgentOutFact, AgentInFact, Interact)}

EPISTEMIC = (AgentOutFact, AgentInFact, Interact)


def label_fields(label) -> tuple:
    return tuple(getattr(label, f.name) for f in fields(label))


def show_label(label) -> str:
    """``Kind(f1,f2,...)``; the same text is accepted as a trace pattern."""
    args = label_fields(label)
    return type(label).__name__ + ("(" + ",".join(args) + ")" if args else "")


def label_names(label) -> tuple[frozenset, frozenset]:
    """(free names, bound names) of a label.

    Fact labels mention only their channel as a name.
    """
    if isinstance(label, BoundOut):
        return frozenset({label.a}), frozenset({label.z})
    if isinstance(label, (OutName, InName)):
        return frozenset({label.a, label.c}), frozenset()
    if isinstance(label, (OutFact, InFact, AgentOutFact, AgentInFact, Interact)):
        return frozenset({label.a}), frozenset()
    return frozenset(), frozenset()


def restriction_blocks(binder: str, label) -> bool:
    """Whether a restriction on ``binder`` stops ``label`` from passing through it."""
    if isinstance(label, Interact):
        return False
    free, bound = label_names(label)
    return binder in free or binder in bound


# -- patterns -----------------------------------------------------------------

_PATTERN = re.compile(r"^\s*([A-Za-z]+)\s*(?:\((.*)\))?\s*$")


@dataclass(frozen=True)
class LabelPattern:
    """A label kind with one optional value per field; ``None`` matches anything."""
    kind: str
    args: tuple = ()

    def matches(self, label) -> bool:
        if type(label).__name__ != self.kind:
            return False
        return all(p is None or p == v for p, v in zip(self.args, label_fields(label)))

    def __str__(self):
        if not self.args:
            return self.kind
        return f"{self.kind}({','.join('*' if a is None else a for a in self.args)})"


def parse_pattern(text: str) -> LabelPattern:
    """Parse ``Interact(b,p,A,*)``, ``Tau`` and the like."""
    m = _PATTERN.match(text)
    if not m or m.group(1) not in LABEL_KINDS:
        raise ValueError(f"not a label pattern: {text!r}; kinds are {', '.join(LABEL_KINDS)}")
    kind = m.group(1)
    arity = len(fields(LABEL_KINDS[kind]))
    raw = m.group(2)
    args: tuple[Optional[str], ...]
    if raw is None or not raw.strip():
        args = (None,) * arity
    else:
        parts = [s.strip() for s in raw.split(",")]
        if len(parts) != arity:
            raise ValueError(f"{kind} takes {arity} fields, got {len(parts)} in {text!r}")
        args = tuple(None if s == "*" else s for s in parts)
    return LabelPattern(kind, args)
