"""Epistemic states: Kripke models, action models, formulas, product update, bisimulation."""
from .bisim import (
    BisimResult, CanonicalModel, bisimilar, canonical_form, coarsest_partition,
    disjoint_union, generated_submodel, quotient,
)
from .gen import (
    duplicate_states, random_action_model, random_constructor, random_formula,
    random_model, random_propositional,
)
from .logic import (
    BOT, TOP, ActionBox, ActionDiamond, ActionModel, And, Atom, Box, Diamond,
    EpistemicInputError, Evaluator, Formula, Iff, Implies, KripkeModel, Not, Or,
    PointedActionModel, PointedModel, Top, UniverseError, conj, evaluate, extension,
    formula_vocabulary, holds, interact_model, is_executable, is_propositional,
    product_model, product_update, receive_model,
)

__all__ = [
    "BOT", "TOP", "ActionBox", "ActionDiamond", "ActionModel", "And", "Atom",
    "BisimResult", "Box", "CanonicalModel", "Diamond", "EpistemicInputError",
    "Evaluator", "Formula", "Iff", "Implies", "KripkeModel", "Not", "Or",
    "PointedActionModel", "PointedModel", "Top", "UniverseError", "bisimilar",
    "canonical_form", "coarsest_partition", "conj", "disjoint_union",
    "duplicate_states", "evaluate", "extension", "formula_vocabulary",
    "generated_submodel", "holds", "interact_model", "is_executable",
    "is_propositional", "product_model", "product_update", "quotient",
    "random_action_model", "random_constructor", "random_formula", "random_model",
    "random_propositional", "receive_model",
]
