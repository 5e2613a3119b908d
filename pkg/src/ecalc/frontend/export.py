"""Byte-stable LTS export as structured JSON or as a Graphviz dot graph."""
from __future__ import annotations

import json

from ..semantics import Lts, show_label
from ..terms import pretty
from .models import model_to_dict

STRUCTURED, DOT = "structured", "dot-graph"
FORMATS = (STRUCTURED, DOT)


def _sorted_edges(lts: Lts):
    return sorted({(s, show_label(l), d) for s, l, d in lts.edges})


def lts_to_dict(lts: Lts) -> dict:
    return {
        "root": lts.root,
        "truncated": lts.truncated,
        "truncation_reasons": sorted(lts.reasons),
        "terminals": sorted(lts.terminals()),
        "frontier": sorted(lts.frontier),
        "nodes": [
            {
                "id": n.index,
                "depth": n.depth,
                "feed_cursor": list(n.cursor),
                "system": pretty(n.config.system),
                "state": model_to_dict(n.config.state),
            }
            for n in lts.nodes
        ],
        "edges": [{"src": s, "label": l, "dst": d} for s, l, d in _sorted_edges(lts)],
    }


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_lts(lts: Lts, fmt: str = STRUCTURED) -> bytes:
    """Nodes in breadth-first discovery order, edges sorted lexicographically."""
    if fmt == STRUCTURED:
        return (json.dumps(lts_to_dict(lts), indent=1, sort_keys=True) + "\n").encode()
    if fmt == DOT:
        lines = ["digraph lts {", "  node [shape=box, fontname=monospace];"]
        terminals = set(lts.terminals())
        for n in lts.nodes:
            attrs = [f'label="{n.index}: {_dot_escape(pretty(n.config.system))}"']
            if n.index == lts.root:
                attrs.append("penwidth=2")
            if n.index in terminals:
                attrs.append("peripheries=2")
            if n.index in lts.frontier:
                attrs.append("style=dashed")
            lines.append(f"  n{n.index} [{', '.join(attrs)}];")
        for s, l, d in _sorted_edges(lts):
            lines.append(f'  n{s} -> n{d} [label="{_dot_escape(l)}"];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
