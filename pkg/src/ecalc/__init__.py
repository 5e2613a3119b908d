"""Interpreter, model checker and state-space explorer for the e-calculus.

The e-calculus is a pi-calculus whose agents carry a shared epistemic state
(a pointed Kripke model) that changes by product update with canned action
models whenever a basic fact is received or passed between agents.

Subpackages: :mod:`ecalc.terms` (syntax), :mod:`ecalc.epistemics` (models,
formulas, update, bisimulation), :mod:`ecalc.semantics` (transition rules and
exploration), :mod:`ecalc.frontend` (parsing and files), :mod:`ecalc.cli`.
"""
from pathlib import Path

__version__ = "0.1.0"

SCENARIO_DIR = Path(__file__).parent / "scenarios"


def scenario_path(name: str) -> Path:
    """Path of a bundled scenario, e.g. ``scenario_path("robots_v1")``."""
    return SCENARIO_DIR / f"{name}.yaml"
