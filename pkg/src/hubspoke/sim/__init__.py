"""Discrete-event validation of a route design and frequency plan."""

from .demand import Arrival, sample_arrivals
from .engine import (
    DwellRules,
    Replication,
    ServiceRoute,
    SimConfig,
    SimulationError,
    SimulationInvariantError,
    histogram_bin,
)
from .report import ALL_ROUTES, HIST_LABELS, RepMetrics, SimReport, aggregate, mean_ci
from .runner import BreakdownRun, build_config, build_router, run_breakdown, run_simulation

__all__ = [
    "ALL_ROUTES",
    "Arrival",
    "BreakdownRun",
    "DwellRules",
    "HIST_LABELS",
    "RepMetrics",
    "Replication",
    "ServiceRoute",
    "SimConfig",
    "SimReport",
    "SimulationError",
    "SimulationInvariantError",
    "aggregate",
    "build_config",
    "build_router",
    "histogram_bin",
    "mean_ci",
    "run_breakdown",
    "run_simulation",
    "sample_arrivals",
]
