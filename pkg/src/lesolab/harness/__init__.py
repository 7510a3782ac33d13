"""Scenario files, the closed-loop runner, metrics, trace export and the CLI."""

from .metrics import Metrics, compute_metrics, metrics_for
from .runner import run_scenario
from .scenario import Scenario, load_scenario, parse_scenario
from .trace import SimTrace, export_trace, read_trace

__all__ = [
    "Metrics", "Scenario", "SimTrace", "compute_metrics", "export_trace", "load_scenario",
    "metrics_for", "parse_scenario", "read_trace", "run_scenario",
]
