"""Bisimilarity, bisimulation quotients and canonical minimal forms.

``coarsest_partition`` is Paige-Tarjan relational coarsest partition refinement
(one relation per agent, initial blocks by valuation), which runs in
O(|R| log |W|).  ``canonical_form`` uses plain signature refinement with
isomorphism-invariant colour numbering instead: it is slower but yields block
names that depend only on the bisimulation class of the pointed model, which
is what exploration needs for node identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .logic import KripkeModel, PointedModel, UniverseError


def _order(s):
    return repr(s)


# -- Paige-Tarjan ---------------------------------------------------------------

class _Block:
    __slots__ = ("states", "compound")

    def __init__(self, states, compound):
        self.states = states
        self.compound = compound


class _Compound:
    __slots__ = ("blocks", "queued")

    def __init__(self):
        self.blocks = set()
        self.queued = False


class _Refiner:
    def __init__(self, n, labels, edges, initial):
        # edges: list of (src, label, dst) over states 0..n-1
        self.n = n
        self.labels = labels
        self.incoming = {a: [[] for _ in range(n)] for a in labels}
        self.edges = edges
        for i, (x, a, y) in enumerate(edges):
            self.incoming[a][y].append(i)
        self.pending: list = []
        self.block_of = [None] * n
        universe = _Compound()
        for group in initial:
            b = _Block(set(group), universe)
            universe.blocks.add(b)
            for x in group:
                self.block_of[x] = b
        # one count cell per (state, label, compound); edges point at their cell
        cells = {}
        self.edge_cell = []
        for x, a, _ in edges:
            cell = cells.get((x, a))
            if cell is None:
                cell = cells[(x, a)] = [0]
            cell[0] += 1
            self.edge_cell.append(cell)
        # make the initial partition stable w.r.t. the universe
        for a in labels:
            self._split({x for (x, b) in cells if b == a})
        self._enqueue(universe)

    def _enqueue(self, compound):
        if len(compound.blocks) > 1 and not compound.queued:
            compound.queued = True
            self.pending.append(compound)

    def _split(self, marked):
        touched: dict = {}
        for x in marked:
            touched.setdefault(self.block_of[x], []).append(x)
        for block, xs in touched.items():
            if len(xs) == len(block.states):
                continue
            twin = _Block(set(xs), block.compound)
            block.states.difference_update(xs)
            for x in xs:
                self.block_of[x] = twin
            block.compound.blocks.add(twin)
            self._enqueue(block.compound)

    def run(self):
        while self.pending:
            whole = self.pending.pop()
            whole.queued = False
            if len(whole.blocks) < 2:
                continue
            it = iter(whole.blocks)
            b1, b2 = next(it), next(it)
            small = b1 if len(b1.states) <= len(b2.states) else b2
            whole.blocks.discard(small)
            alone = _Compound()
            alone.blocks.add(small)
            small.compound = alone
            self._enqueue(whole)
            splitter = list(small.states)
            for a in self.labels:
                into_small: dict = {}
                edge_ids = []
                for y in splitter:
                    for e in self.incoming[a][y]:
                        x = self.edges[e][0]
                        into_small[x] = into_small.get(x, 0) + 1
                        edge_ids.append(e)
                if not into_small:
                    continue
                # every a-arrow from x into the old compound shares one count cell
                cell_of = {self.edges[e][0]: self.edge_cell[e] for e in edge_ids}
                # states with no a-arrow into the rest of the old compound block
                only_small = {x for x, k in into_small.items() if cell_of[x][0] == k}
                self._split(set(into_small))
                self._split(only_small)
                new_cells = {}
                for e in edge_ids:
                    x = self.edges[e][0]
                    self.edge_cell[e][0] -= 1
                    cell = new_cells.get(x)
                    if cell is None:
                        cell = new_cells[x] = [into_small[x]]
                    self.edge_cell[e] = cell
        blocks = {id(b): b for b in self.block_of}
        return [frozenset(b.states) for b in blocks.values()]


def coarsest_partition(model: KripkeModel) -> list[frozenset]:
    """Blocks of the largest bisimulation on ``model`` (the bisimilarity classes)."""
    states = sorted(model.states, key=_order)
    index = {s: i for i, s in enumerate(states)}
    labels = sorted(model.agents)
    edges = [(index[u], a, index[v]) for a in labels for (u, v) in model.rel[a]]
    initial: dict = {}
    atoms = sorted(model.atoms)
    for s in states:
        sig = tuple(s in model.val[p] for p in atoms)
        initial.setdefault(sig, []).append(index[s])
    blocks = _Refiner(len(states), labels, edges, initial.values()).run()
    out = [frozenset(states[i] for i in b) for b in blocks]
    out.sort(key=lambda b: min(_order(s) for s in b))
    return out


# -- bisimilarity between two pointed models ------------------------------------

def disjoint_union(m1: KripkeModel, m2: KripkeModel) -> KripkeModel:
    if m1.agents != m2.agents or m1.atoms != m2.atoms:
        raise UniverseError("bisimilarity needs models over the same agents and atoms")
    states = {(0, s) for s in m1.states} | {(1, s) for s in m2.states}
    rel = {a: {((0, u), (0, v)) for u, v in m1.rel[a]} | {((1, u), (1, v)) for u, v in m2.rel[a]}
           for a in m1.agents}
    val = {p: {(0, s) for s in m1.val[p]} | {(1, s) for s in m2.val[p]} for p in m1.atoms}
    return KripkeModel(states, rel, val)


@dataclass
class BisimResult:
    bisimilar: bool
    relation: Optional[frozenset] = None
    point_blocks: tuple = ()

    def __bool__(self):
        return self.bisimilar


def bisimilar(p1: PointedModel, p2: PointedModel, witness: bool = False):
    """Whether some bisimulation links the two points.

    With ``witness=True`` a :class:`BisimResult` is returned carrying the
    largest bisimulation between the two models and the blocks that contain
    each point (in the disjoint union).
    """
    union = disjoint_union(p1.model, p2.model)
    blocks = coarsest_partition(union)
    where = {s: i for i, b in enumerate(blocks) for s in b}
    same = where[(0, p1.point)] == where[(1, p2.point)]
    if not witness:
        return same
    rel = frozenset((u, v) for b in blocks for (i, u) in b if i == 0 for (j, v) in b if j == 1)
    pb = (blocks[where[(0, p1.point)]], blocks[where[(1, p2.point)]])
    return BisimResult(same, rel, pb)


def quotient(pm: PointedModel) -> PointedModel:
    """Bisimulation-minimal model of ``pm``; states are block numbers."""
    m = pm.model
    blocks = coarsest_partition(m)
    where = {s: i for i, b in enumerate(blocks) for s in b}
    rel = {a: {(where[u], where[v]) for u, v in m.rel[a]} for a in m.agents}
    val = {p: {where[s] for s in m.val[p]} for p in m.atoms}
    return PointedModel(KripkeModel(range(len(blocks)), rel, val), where[pm.point])


# -- canonical minimal form -----------------------------------------------------

def generated_submodel(pm: PointedModel) -> PointedModel:
    """Restriction to the states reachable from the point along any agent's arrows."""
    m = pm.model
    seen = {pm.point}
    stack = [pm.point]
    agents = list(m.agents)
    while stack:
        s = stack.pop()
        for a in agents:
            for t in m.succ(a, s):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    if len(seen) == len(m.states):
        return pm
    rel = {a: {(u, v) for u, v in m.rel[a] if u in seen} for a in agents}
    val = {p: m.val[p] & seen for p in m.atoms}
    return PointedModel(KripkeModel(seen, rel, val), pm.point)


@dataclass(frozen=True)
class CanonicalModel:
    key: tuple
    pointed: PointedModel


def canonical_form(pm: PointedModel) -> CanonicalModel:
    """A key equal for two pointed models exactly when they are bisimilar.

    The model is cut down to the part reachable from the point, then refined
    by signatures whose colours are ranked by sorting, so the final colouring
    (and therefore the quotient built from it) is invariant under isomorphism
    and, since the quotient is bisimulation-minimal, under bisimulation.
    """
    pm = generated_submodel(pm)
    m = pm.model
    agents = sorted(m.agents)
    atoms = sorted(m.atoms)
    states = list(m.states)
    sig0 = {s: tuple(p for p in atoms if s in m.val[p]) for s in states}
    ranks = {v: i for i, v in enumerate(sorted(set(sig0.values())))}
    colour = {s: ranks[sig0[s]] for s in states}
    count = len(ranks)
    while True:
        sig = {s: (colour[s],) + tuple(tuple(sorted({colour[t] for t in m.succ(a, s)}))
                                       for a in agents)
               for s in states}
        ranks = {v: i for i, v in enumerate(sorted(set(sig.values())))}
        colour = {s: ranks[sig[s]] for s in states}
        if len(ranks) == count:
            break
        count = len(ranks)
    rel = {a: frozenset((colour[u], colour[v]) for u, v in m.rel[a]) for a in agents}
    val = {p: frozenset(colour[s] for s in m.val[p]) for p in atoms}
    point = colour[pm.point]
    key = (tuple(agents), tuple(atoms), count, point,
           tuple(tuple(sorted(rel[a])) for a in agents),
           tuple(tuple(sorted(val[p])) for p in atoms))
    return CanonicalModel(key, PointedModel(KripkeModel(range(count), rel, val), point))
