"""Assemble simulation configs from a fixture + frequency plan, run seeded
replications, and run paired breakdown scenarios."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..fixtures import Fixture
from ..frequency import FrequencyPlan
from ..network import TransitError
from ..routing import PlanCache, RoutingGraph
from .engine import Replication, ServiceRoute, SimConfig, SimulationError
from .report import SimReport, aggregate, summarize_replication


def build_config(
    fixture: Fixture,
    plan: FrequencyPlan,
    *,
    period: str = "am",
    capacity: int = 40,
    demand_total: float | None = None,
    replications: int = 40,
    seed: int = 0,
    horizon: float | None = None,
    breakdown: tuple[str, int] | None = None,
) -> SimConfig:
    """A runnable SimConfig. ``capacity`` is the usable per-bus seat cap and
    applies uniformly; ``breakdown`` removes buses from one route and lets
    the placement respace the remainder evenly."""
    by_route = plan.by_route()
    bus_counts = {r.name: by_route[r.name].buses_required for r in fixture.routes}
    if breakdown is not None:
        route, removed = breakdown
        if route not in bus_counts:
            raise SimulationError(f"unknown route {route!r}")
        if removed >= bus_counts[route]:
            raise SimulationError(
                f"cannot remove {removed} of {bus_counts[route]} buses on {route!r}: "
                "the route would vanish"
            )
        bus_counts[route] -= removed

    routes = tuple(
        ServiceRoute(
            name=t.name,
            stops=t.stops,
            leg_minutes=t.leg_minutes,
            planned_dwell=t.avg_dwell_minutes,
            bus_count=bus_counts[t.name],
            capacity=capacity,
        )
        for t in fixture.routes
    )
    demand = fixture.demand[period]
    if demand_total is not None:
        demand = dataclasses.replace(demand, total_hourly_demand=float(demand_total))
    if horizon is not None:
        demand = dataclasses.replace(demand, horizon=float(horizon))
    return SimConfig(
        routes=routes,
        demand=demand,
        transfers=fixture.transfers,
        hub_stops=frozenset(s.stop_id for s in fixture.stops if s.is_hub),
        horizon=demand.horizon,
        replications=replications,
        seed=seed,
    )


def build_router(config: SimConfig, plan: FrequencyPlan,
                 tables=None) -> tuple[RoutingGraph, PlanCache]:
    """Routing graph with boarding edges at headway/2 from the plan.

    Plans are computed once and reused across replications and paired
    scenarios; a breakdown does not trigger replanning.
    """
    from ..network import RouteTable

    by_route = plan.by_route()
    weights = {r.name: by_route[r.name].headway_min / 2.0 for r in config.routes}
    tables = tables or [
        RouteTable(r.name, "", r.stops, r.leg_minutes, r.planned_dwell)
        for r in config.routes
    ]
    graph = RoutingGraph(tables, config.transfers, board_weights=weights)
    return graph, PlanCache(graph)


def run_simulation(
    config: SimConfig,
    router: tuple[RoutingGraph, PlanCache],
    meta: dict | None = None,
    collect_boardings: bool = False,
) -> SimReport:
    graph, plans = router
    reps = []
    for rep in range(config.replications):
        raw = Replication(config, graph, plans, rep,
                          collect_boardings=collect_boardings).run()
        reps.append(summarize_replication(rep, raw))
    meta = dict(meta or {})
    meta.setdefault("seed", config.seed)
    meta.setdefault("replications", config.replications)
    meta.setdefault("capacity", config.routes[0].capacity if config.routes else None)
    meta.setdefault("demand_total", config.demand.total_hourly_demand)
    meta.setdefault("horizon_min", config.horizon)
    meta.setdefault("buses", {r.name: r.bus_count for r in config.routes})
    return aggregate(meta, reps)


@dataclass(frozen=True)
class BreakdownRun:
    baseline: SimReport
    scenario: SimReport


def run_breakdown(
    fixture: Fixture,
    plan: FrequencyPlan,
    route: str,
    buses_removed: int = 1,
    **kwargs,
) -> BreakdownRun:
    """Paired comparison: same seeds, same passenger plans, one route short
    of ``buses_removed`` buses in the scenario."""
    if buses_removed < 0:
        raise SimulationError("buses_removed must be >= 0")
    base_cfg = build_config(fixture, plan, **kwargs)
    scen_cfg = build_config(fixture, plan, breakdown=(route, buses_removed), **kwargs)
    router = build_router(base_cfg, plan, tables=fixture.routes)
    period = kwargs.get("period", "am")
    base = run_simulation(base_cfg, router,
                          meta={"fixture": fixture.name, "period": period,
                                "scenario": "baseline"})
    scen = run_simulation(scen_cfg, router,
                          meta={"fixture": fixture.name, "period": period,
                                "scenario": f"breakdown:{route}:-{buses_removed}"})
    return BreakdownRun(baseline=base, scenario=scen)
