"""Toolchain for the Roboto explicit-programming-strategy language.

Strategies are plain-text procedures mixing natural-language actions and
queries (performed by a person) with machine-owned control flow: loops,
conditionals, variables, and sub-strategies.  This package parses,
validates, and formats ``.roboto`` files, executes them step by step with
reversible history, stores them in a catalog, and exposes sessions over
HTTP, a terminal runner, and a scripted replay harness.
"""

from .engine import (
    Ack,
    Answer,
    Decision,
    ExecutionState,
    next_step,
    replay_events,
    responsibility_steps,
    run_scripted,
    set_variable,
    start,
    step_back,
    visible_variables,
)
from .formatter import format_document
from .nodes import StrategyDoc
from .parser import parse_document, parse_with_diagnostics
from .serialize import deserialize_state, serialize_state
from .validator import validate
from .values import NOTHING, Text, TextList, Value

__all__ = [
    "Ack",
    "Answer",
    "Decision",
    "ExecutionState",
    "NOTHING",
    "StrategyDoc",
    "Text",
    "TextList",
    "Value",
    "deserialize_state",
    "format_document",
    "next_step",
    "parse_document",
    "parse_with_diagnostics",
    "replay_events",
    "responsibility_steps",
    "run_scripted",
    "serialize_state",
    "set_variable",
    "start",
    "step_back",
    "validate",
    "visible_variables",
]

__version__ = "0.1.0"
