"""Text syntax, model files, scenario files and LTS export."""
from .export import DOT, FORMATS, STRUCTURED, export_lts, lts_to_dict
from .models import ModelFileError, action_loader, dump_model, load_model, model_from_dict, model_to_dict, save_model
from .parser import (
    Declarations, ParseError, SourceSpan, declarations_for, parse_esystem, parse_esystem_with_spans,
    parse_formula, parse_formula_with_spans, parse_process, parse_process_with_spans,
)
from .scenario import Assertion, ScenarioError, ScenarioSpec, TraceSpec, load_scenario, scenario_from_dict

__all__ = [
    "Assertion", "DOT", "Declarations", "FORMATS", "ModelFileError", "ParseError", "STRUCTURED",
    "ScenarioError", "ScenarioSpec", "SourceSpan", "TraceSpec", "action_loader", "declarations_for",
    "dump_model", "export_lts", "load_model", "load_scenario", "lts_to_dict", "model_from_dict",
    "model_to_dict", "parse_esystem", "parse_esystem_with_spans", "parse_formula",
    "parse_formula_with_spans", "parse_process", "parse_process_with_spans", "save_model",
    "scenario_from_dict",
]
