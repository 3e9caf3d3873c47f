"""Python front end for the varigeo engine.

Reports come back as dicts with the same key order as the CLI output.
"""

import json

from ._varigeo import (
    BlowUpError,
    Error,
    Expr,
    ParseError,
    Scenario,
    ScenarioError,
    christoffel,
    command_names,
    energy_kinds,
    load_scenario,
    parse_expr,
    parse_scenario,
    residual_kinds,
)
from ._varigeo import run_command as _run_command

__all__ = [
    "BlowUpError",
    "Error",
    "Expr",
    "ParseError",
    "Scenario",
    "ScenarioError",
    "christoffel",
    "command_names",
    "energy_kinds",
    "load_scenario",
    "parse_expr",
    "parse_scenario",
    "report_text",
    "residual_kinds",
    "run",
]


def report_text(command, scenario, **options):
    """CLI-identical report text and the exit code (0 ok, 2 tolerance failure)."""
    if isinstance(scenario, str):
        scenario = load_scenario(scenario)
    return _run_command(command, scenario, **options)


def run(command, scenario, **options):
    """Run a command on a Scenario or a scenario path and return the report dict."""
    text, _ = report_text(command, scenario, **options)
    return json.loads(text)
