"""Bundled network fixtures.

The ``um-2020`` fixture carries the six published routes with per-leg travel
times and average dwell, both peak-period O-D tables, the transfer groups,
and synthetic legacy-coverage/fleet inputs for the frequency planner.

Two readings of route timing coexist on purpose: the whole-network
TransitInstance uses the planning view (15-minute cap, constant 1-minute
dwell), while the route tables keep the published driving legs and average
dwell column, whose sums exceed the cap (e.g. 25.1 minutes for the trunk
route). Cycle times and simulated legs come from the tables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..frequency import Fleet, LegacyCoverage, RouteService, fleet_from_json, legacy_from_json
from ..network import (
    NEARBY_WALK,
    DemandSpec,
    RouteTable,
    Stop,
    TransferGroup,
    TransitError,
    TransitInstance,
    TravelTimeMatrix,
    demand_to_json,
    instance_to_json,
    transfers_to_json,
)

FIXTURE_NAMES = ("um-2020",)
PERIODS = ("am", "noon")


class FixtureError(TransitError):
    pass


@dataclass(frozen=True)
class Fixture:
    name: str
    stops: tuple[Stop, ...]
    instance: TransitInstance
    routes: tuple[RouteTable, ...]
    demand: dict[str, DemandSpec]
    transfers: tuple[TransferGroup, ...]
    legacy: LegacyCoverage
    fleet: Fleet

    def route(self, name: str) -> RouteTable:
        for r in self.routes:
            if r.name == name:
                return r
        raise FixtureError(f"no route named {name!r}; routes: {[r.name for r in self.routes]}")

    def stop_routes(self) -> dict[str, tuple[str, ...]]:
        """Stop id -> names of routes serving it."""
        out: dict[str, list[str]] = {}
        for r in self.routes:
            for sid in r.distinct_stops():
                names = out.setdefault(sid, [])
                if r.name not in names:
                    names.append(r.name)
        return {sid: tuple(names) for sid, names in out.items()}

    def services(self) -> tuple[RouteService, ...]:
        """Frequency-planner inputs built from the route tables."""
        return tuple(
            RouteService(
                name=r.name,
                stops=r.distinct_stops(),
                cycle_min=r.cycle_minutes(),
                vehicle=r.vehicle,
                seats=self.fleet.seats(r.vehicle),
            )
            for r in self.routes
        )

    def subinstance(
        self,
        route_names: tuple[str, ...],
        hub_id: str,
        *,
        candidate_route_count: int | None = None,
        max_visits: int = 12,
        route_fixed_cost: float = 100.0,
        alpha: float = 1.0,
        stop_dwell: float = 1.0,
        time_cap: float = 15.0,
    ) -> TransitInstance:
        """A TransitInstance over the stops of the named routes, with
        ``hub_id`` as the designated hub. Travel times come from the
        whole-network closure matrix."""
        tables = [self.route(n) for n in route_names]
        ids: list[str] = []
        for t in tables:
            for sid in t.distinct_stops():
                if sid not in ids:
                    ids.append(sid)
        if hub_id not in ids:
            raise FixtureError(f"hub {hub_id!r} is not on routes {route_names}")
        by_id = {s.stop_id: s for s in self.stops}
        hub = by_id[hub_id]
        if not hub.is_hub:
            raise FixtureError(f"{hub_id!r} is not a hub stop")
        assignable = tuple(by_id[i] for i in ids if i != hub_id)
        full = self.instance.travel
        entries = {(a, b): full.get(a, b) for a in ids for b in ids if a != b}
        n_routes = candidate_route_count if candidate_route_count is not None else len(tables)
        return TransitInstance(
            stops=assignable,
            hub=hub,
            candidate_route_count=n_routes,
            max_visits=max_visits,
            route_fixed_cost=(route_fixed_cost,) * n_routes,
            alpha=alpha,
            stop_dwell=stop_dwell,
            time_cap=time_cap,
            required_stops=frozenset(s.stop_id for s in assignable),
            travel=TravelTimeMatrix(entries),
        )


def _data_text(fixture: str, filename: str) -> str:
    root = resources.files(__package__).joinpath("data", fixture)
    f = root.joinpath(filename)
    if not f.is_file():
        raise FixtureError(f"fixture file missing: {fixture}/{filename}")
    return f.read_text(encoding="utf-8")


def _closure_matrix(
    stop_ids: list[str],
    routes: tuple[RouteTable, ...],
    transfers: tuple[TransferGroup, ...],
) -> TravelTimeMatrix:
    """All-pairs shortest driving times over route legs, with 0.5-minute
    connectors inside nearby-stop groups (the leg digraph alone is
    disconnected across campuses)."""
    index = {sid: k for k, sid in enumerate(stop_ids)}
    n = len(stop_ids)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for r in routes:
        m = len(r.stops)
        for i in range(m):
            a = index[r.stops[i]]
            b = index[r.stops[(i + 1) % m]]
            dist[a, b] = min(dist[a, b], r.leg_minutes[i])
    for g in transfers:
        if g.kind != "nearby-stop":
            continue
        for a in g.members:
            for b in g.members:
                if a != b:
                    ia, ib = index[a], index[b]
                    dist[ia, ib] = min(dist[ia, ib], NEARBY_WALK)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    if not np.isfinite(dist).all():
        raise FixtureError("fixture network is not strongly connected")
    entries = {
        (stop_ids[i], stop_ids[j]): round(float(dist[i, j]), 6)
        for i in range(n)
        for j in range(n)
        if i != j
    }
    return TravelTimeMatrix(entries)


def load_fixture(name: str) -> Fixture:
    """Load a bundled fixture by name. Known names: um-2020."""
    if name not in FIXTURE_NAMES:
        raise FixtureError(f"unknown fixture {name!r}; known: {list(FIXTURE_NAMES)}")

    stops_doc = json.loads(_data_text(name, "stops.json"))
    stops = tuple(Stop(s["id"], s["name"], bool(s["is_hub"])) for s in stops_doc["stops"])
    stop_ids = [s.stop_id for s in stops]

    routes_doc = json.loads(_data_text(name, "routes.json"))
    routes = tuple(
        RouteTable(
            name=r["name"],
            vehicle=r["vehicle"],
            stops=tuple(e["id"] for e in r["stops"]),
            leg_minutes=tuple(float(e["travel_to_next_min"]) for e in r["stops"]),
            avg_dwell_minutes=tuple(float(e["avg_dwell_min"]) for e in r["stops"]),
        )
        for r in routes_doc["routes"]
    )

    transfers_doc = json.loads(_data_text(name, "transfers.json"))
    transfers = tuple(
        TransferGroup(g["kind"], tuple(g["stops"]), float(g["walk_min"]))
        for g in transfers_doc["groups"]
    )

    demand: dict[str, DemandSpec] = {}
    for period in PERIODS:
        doc = json.loads(_data_text(name, f"demand-{period}.json"))
        demand[period] = DemandSpec(
            total_hourly_demand=float(doc["total_per_hour"]),
            od_rows=tuple((r["origin"], r["dest"], float(r["pct"])) for r in doc["od"]),
            random_share=float(doc["random_share"]),
            horizon=float(doc["horizon_min"]),
        )

    legacy = legacy_from_json(_data_text(name, "legacy.json"))
    fleet = fleet_from_json(_data_text(name, "fleet.json"))

    travel = _closure_matrix(stop_ids, routes, transfers)
    hubs = [s for s in stops if s.is_hub]
    if not hubs:
        raise FixtureError("fixture has no hub stop")
    hub = hubs[0]
    assignable = tuple(s for s in stops if s.stop_id != hub.stop_id)
    instance = TransitInstance(
        stops=assignable,
        hub=hub,
        candidate_route_count=len(routes),
        max_visits=12,
        route_fixed_cost=(100.0,) * len(routes),
        alpha=1.0,
        stop_dwell=1.0,
        time_cap=15.0,
        required_stops=frozenset(s.stop_id for s in assignable),
        travel=travel,
    )

    return Fixture(
        name=name,
        stops=stops,
        instance=instance,
        routes=routes,
        demand=demand,
        transfers=transfers,
        legacy=legacy,
        fleet=fleet,
    )


def export_fixture(fixture: Fixture, out_dir: str | Path) -> list[Path]:
    """Dump the fixture as the documented JSON schemas plus a route-table CSV.
    Returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def write(filename: str, text: str) -> None:
        p = out / filename
        p.write_text(text, encoding="utf-8")
        written.append(p)

    write("instance.json", instance_to_json(fixture.instance))
    for period, spec in fixture.demand.items():
        write(f"demand-{period}.json", demand_to_json(spec))
    write("transfers.json", transfers_to_json(fixture.transfers))

    lines = ["route,position,stop,travel_to_next_min,avg_dwell_min"]
    for r in fixture.routes:
        for k, sid in enumerate(r.stops):
            lines.append(f"{r.name},{k},{sid},{r.leg_minutes[k]},{r.avg_dwell_minutes[k]}")
    write("routes.csv", "\n".join(lines) + "\n")

    write("legacy.json", _data_text(fixture.name, "legacy.json"))
    write("fleet.json", _data_text(fixture.name, "fleet.json"))
    return written
