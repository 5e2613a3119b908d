"""Transition rules for processes and e-systems, and state-space exploration."""
from . import labels
from .engine import (
    Configuration, KnowledgeGate, RawTransition, Universe, apply_effect,
    esys_transitions, proc_transitions, raw_transitions,
)
from .explore import CLOSED, MODES, OPEN, Bounds, Lts, LtsNode, explore, trace_check
from .labels import (
    AgentInFact, AgentOutFact, BoundOut, InFact, InName, Interact, LabelPattern,
    OutFact, OutName, Tau, label_names, parse_pattern, show_label,
)

__all__ = [
    "AgentInFact", "AgentOutFact", "BoundOut", "Bounds", "CLOSED", "Configuration",
    "InFact", "InName", "Interact", "KnowledgeGate", "LabelPattern", "Lts", "LtsNode",
    "MODES", "OPEN", "OutFact", "OutName", "RawTransition", "Tau", "Universe",
    "apply_effect", "esys_transitions", "explore", "label_names", "labels",
    "parse_pattern", "proc_transitions", "raw_transitions", "show_label", "trace_check",
]
