"""Bounded breadth-first exploration of the configuration graph, and trace search."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ..epistemics import PointedModel, canonical_form
from ..epistemics.logic import Evaluator
from ..terms import alpha_canonical, validate_esystem
from . import labels as L
from .engine import Configuration, KnowledgeGate, Universe, apply_effect, raw_transitions

CLOSED, OPEN = "closed", "open"
MODES = (CLOSED, OPEN)
_KEEP = {
    CLOSED: (L.Tau, L.Interact),
    OPEN: (L.Tau, L.Interact, L.AgentInFact),
}


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 64
    max_nodes: int = 100_000
    max_kripke_states: int = 10_000

    def __post_init__(self):
        for f in ("max_depth", "max_nodes", "max_kripke_states"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be positive")


@dataclass
class LtsNode:
    index: int
    config: Configuration
    depth: int
    cursor: tuple = ()
    key: tuple = ()


@dataclass
class Lts:
    nodes: list
    edges: list            # (src, label, dst), in discovery order
    root: int = 0
    truncated: bool = False
    reasons: set = field(default_factory=set)
    frontier: set = field(default_factory=set)   # nodes whose successors were not all kept

    def successors(self, i: int) -> list:
        return self._out().get(i, [])

    def _out(self):
        cache = self.__dict__.get("_out_cache")
        if cache is None or cache[0] != len(self.edges):
            out: dict = {}
            for s, l, d in self.edges:
                out.setdefault(s, []).append((l, d))
            cache = (len(self.edges), out)
            self.__dict__["_out_cache"] = cache
        return cache[1]

    def terminals(self) -> list[int]:
        """Fully expanded nodes without successors."""
        out = self._out()
        return [n.index for n in self.nodes if n.index not in out and n.index not in self.frontier]

    def maximal_paths(self, limit: int = 100_000) -> list[list]:
        """Edge lists from the root to each terminal node (acyclic paths only)."""
        out = self._out()
        paths, stack = [], [(self.root, [], frozenset({self.root}))]
        terminals = set(self.terminals())
        while stack:
            node, path, seen = stack.pop()
            if node in terminals:
                paths.append(path)
                if len(paths) >= limit:
                    raise RuntimeError("too many maximal paths")
                continue
            for label, dst in out.get(node, []):
                if dst not in seen:
                    stack.append((dst, path + [(node, label, dst)], seen | {dst}))
        return paths

    def has_cycle(self) -> bool:
        out = self._out()
        colour = {}
        for start in range(len(self.nodes)):
            if start in colour:
                continue
            stack = [(start, iter(out.get(start, [])))]
            colour[start] = 1
            while stack:
                node, it = stack[-1]
                step = next(it, None)
                if step is None:
                    colour[node] = 2
                    stack.pop()
                    continue
                dst = step[1]
                c = colour.get(dst)
                if c == 1:
                    return True
                if c is None:
                    colour[dst] = 1
                    stack.append((dst, iter(out.get(dst, []))))
        return False


class _StateTable:
    """Canonical forms and updates of epistemic states, shared across nodes."""

    def __init__(self, quotient: bool):
        self.quotient = quotient
        self.evaluator = Evaluator()
        self.canon: dict = {}      # id(state) -> (state, key); states kept alive here
        self.updates: dict = {}    # (key, effect) -> state
        self.gates: dict = {}

    def key(self, state: PointedModel) -> tuple:
        hit = self.canon.get(id(state))
        if hit is None:
            hit = self.canon[id(state)] = (state, canonical_form(state).key)
        return hit[1]

    def normalise(self, state: PointedModel) -> PointedModel:
        if not self.quotient:
            return state
        cf = canonical_form(state)
        self.canon[id(cf.pointed)] = (cf.pointed, cf.key)
        return cf.pointed

    def successor(self, state: PointedModel, effect) -> PointedModel:
        if effect is None:
            return state
        k = (self.key(state), effect)
        hit = self.updates.get(k)
        if hit is None:
            hit = self.updates[k] = self.normalise(apply_effect(state, effect))
        return hit

    def gate(self, state: PointedModel) -> KnowledgeGate:
        k = self.key(state)
        g = self.gates.get(k)
        if g is None:
            g = self.gates[k] = KnowledgeGate(state, self.evaluator)
        return g


def explore(c0: Configuration, u: Universe, bounds: Bounds = Bounds(), mode: str = CLOSED,
            feed: Optional[Mapping[str, Sequence[str]]] = None, quotient: bool = True) -> Lts:
    """Breadth-first closure of the transition relation from ``c0``.

    Nodes are identified by the canonical minimal form of the epistemic state,
    the alpha-canonical system and the position in each feed script.  ``closed``
    mode keeps tau and interaction edges; ``open`` mode also lets agents
    receive facts from the environment, taking the next script entry on feed
    channels and any declared atom elsewhere.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    report = validate_esystem(c0.system)
    if not report.ok:
        raise ValueError(f"invalid e-system: {report}")
    feed = {ch: list(qs) for ch, qs in (feed or {}).items()}
    channels = sorted(feed)
    slot = {ch: i for i, ch in enumerate(channels)}
    table = _StateTable(quotient)
    keep = _KEEP[mode]

    root_state = table.normalise(c0.state)
    root_cfg = Configuration(root_state, c0.system)
    cursor0 = tuple(0 for _ in channels)

    def node_key(cfg, cursor):
        return (table.key(cfg.state), alpha_canonical(cfg.system), cursor)

    lts = Lts(nodes=[], edges=[])
    index: dict = {}

    def add(cfg, depth, cursor):
        k = node_key(cfg, cursor)
        i = index.get(k)
        if i is not None:
            return i, False
        if len(lts.nodes) >= bounds.max_nodes:
            return None, False
        i = len(lts.nodes)
        index[k] = i
        lts.nodes.append(LtsNode(i, cfg, depth, cursor, k))
        return i, True

    add(root_cfg, 0, cursor0)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        node = lts.nodes[i]
        cfg, cursor = node.config, node.cursor

        def fact_inputs(ch, cursor=cursor):
            if ch in slot:
                pos = cursor[slot[ch]]
                script = feed[ch]
                return [script[pos]] if pos < len(script) else []
            return sorted(u.atoms)

        trans = raw_transitions(cfg, u, keep=keep, fact_inputs=fact_inputs,
                                gate=table.gate(cfg.state))
        if not trans:
            continue
        if node.depth >= bounds.max_depth:
            lts.truncated = True
            lts.reasons.add("max_depth")
            lts.frontier.add(i)
            continue
        seen_edges = set()
        for t in trans:
            state = table.successor(cfg.state, t.effect)
            if state.model.size() > bounds.max_kripke_states:
                lts.truncated = True
                lts.reasons.add("max_kripke_states")
                lts.frontier.add(i)
                continue
            nxt = cursor
            if isinstance(t.label, L.AgentInFact) and t.label.a in slot:
                j = slot[t.label.a]
                nxt = cursor[:j] + (cursor[j] + 1,) + cursor[j + 1:]
            d, fresh = add(Configuration(state, t.system), node.depth + 1, nxt)
            if d is None:
                lts.truncated = True
                lts.reasons.add("max_nodes")
                lts.frontier.add(i)
                continue
            if (t.label, d) not in seen_edges:
                seen_edges.add((t.label, d))
                lts.edges.append((i, t.label, d))
            if fresh:
                queue.append(d)
    return lts


def trace_check(c0: Configuration, u: Universe, patterns: Iterable, max_configs: int = 100_000) -> list:
    """Configurations reachable from ``c0`` along transitions matching ``patterns`` in order.

    Patterns are :class:`~ecalc.semantics.labels.LabelPattern` values or their
    text form.  Configurations are merged up to bisimilar states and
    alpha-equivalent systems.
    """
    pats = [L.parse_pattern(p) if isinstance(p, str) else p for p in patterns]
    table = _StateTable(quotient=False)
    layer = {(): c0}
    for pat in pats:
        kinds = [L.LABEL_KINDS[pat.kind]]
        nxt: dict = {}
        for cfg in layer.values():
            for t in raw_transitions(cfg, u, keep=kinds, gate=table.gate(cfg.state)):
                if not pat.matches(t.label):
                    continue
                state = table.successor(cfg.state, t.effect)
                succ = Configuration(state, t.system)
                k = (table.key(state), alpha_canonical(t.system))
                if k not in nxt:
                    nxt[k] = succ
                    if len(nxt) > max_configs:
                        raise RuntimeError("trace search exceeded max_configs")
        layer = nxt
        if not layer:
            break
    return list(layer.values())
