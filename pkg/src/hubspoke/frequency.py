"""Bus frequency design: match the hourly per-stop throughput of the legacy
system under reduced usable capacity, derive per-route headways and bus
counts, and verify the fleet can sustain them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .network import TransitError


class UncoveredStopError(TransitError):
    pass


class HeadwayError(TransitError):
    pass


@dataclass(frozen=True)
class LegacyService:
    """One legacy route calling at a stop."""

    route: str
    headway_min: float
    seats: int

    def __post_init__(self) -> None:
        if self.headway_min <= 0:
            raise ValueError("legacy headway must be positive")
        if self.seats <= 0:
            raise ValueError("legacy seats must be positive")

    @property
    def hourly_capacity(self) -> float:
        return self.seats * (60.0 / self.headway_min)


@dataclass(frozen=True)
class LegacyCoverage:
    """Legacy services per stop (stops absent from the map had no service)."""

    by_stop: Mapping[str, tuple[LegacyService, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "by_stop", {s: tuple(v) for s, v in dict(self.by_stop).items()}
        )

    def services(self, stop: str) -> tuple[LegacyService, ...]:
        return self.by_stop.get(stop, ())


@dataclass(frozen=True)
class VehicleType:
    name: str
    seats: int
    count: int


@dataclass(frozen=True)
class Fleet:
    """Available vehicles by type."""

    vehicles: Mapping[str, VehicleType]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vehicles", dict(self.vehicles))

    def seats(self, vehicle: str) -> int:
        return self.vehicles[vehicle].seats

    def available(self, vehicle: str) -> int:
        return self.vehicles[vehicle].count


@dataclass(frozen=True)
class RouteService:
    """Planner input: one new route with its cycle time and vehicle type."""

    name: str
    stops: tuple[str, ...]
    cycle_min: float
    vehicle: str
    seats: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "stops", tuple(self.stops))


@dataclass(frozen=True)
class HeadwayGrid:
    """Candidate headways: min..max in fixed steps, largest preferred."""

    min_headway: float = 2.0
    max_headway: float = 15.0
    step: float = 0.5

    def values_descending(self) -> list[float]:
        n = int(round((self.max_headway - self.min_headway) / self.step))
        return [round(self.max_headway - k * self.step, 10) for k in range(n + 1)]


@dataclass(frozen=True)
class RouteFrequency:
    route: str
    headway_min: float
    buses_required: int
    usable_capacity: int
    cycle_min: float
    vehicle: str


@dataclass(frozen=True)
class FrequencyPlan:
    routes: tuple[RouteFrequency, ...]
    fleet_used: Mapping[str, int]
    fleet_available: Mapping[str, int]
    feasible: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "fleet_used", dict(self.fleet_used))
        object.__setattr__(self, "fleet_available", dict(self.fleet_available))

    def by_route(self) -> dict[str, RouteFrequency]:
        return {r.route: r for r in self.routes}


def usable_capacity(seats: int, capacity_fraction: float) -> int:
    """Seats usable under distancing rules, rounded down."""
    return math.floor(capacity_fraction * seats)


def legacy_throughput(stop: str, cov: LegacyCoverage) -> float:
    """Passengers per hour the old system could move away from ``stop``."""
    services = cov.services(stop)
    if not services:
        raise UncoveredStopError(f"stop {stop!r} has no legacy coverage")
    return sum(s.hourly_capacity for s in services)


def required_headway(
    stop: str,
    cov: LegacyCoverage,
    new_route_caps: Sequence[int],
    grid: HeadwayGrid = HeadwayGrid(),
) -> float:
    """Largest grid headway at which the new routes serving ``stop`` (all run
    at that common headway, capacities summed) still match the legacy
    throughput. Stops with no legacy coverage are unconstrained and get the
    grid maximum."""
    if not new_route_caps:
        raise HeadwayError(f"stop {stop!r} is not served by any new route")
    target = legacy_throughput(stop, cov) if cov.services(stop) else 0.0
    total_cap = sum(new_route_caps)
    for h in grid.values_descending():
        if total_cap * (60.0 / h) >= target - 1e-9:
            return h
    raise HeadwayError(
        f"stop {stop!r} needs more than {total_cap * 60.0 / grid.min_headway:.0f}/hr "
        f"(legacy {target:.0f}/hr) even at the {grid.min_headway}-min headway floor"
    )


def plan_route_frequencies(
    services: Sequence[RouteService],
    legacy: LegacyCoverage,
    fleet: Fleet,
    capacity_fraction: float = 0.5,
    grid: HeadwayGrid = HeadwayGrid(),
) -> FrequencyPlan:
    """Per route: headway = tightest required_headway over its stops;
    buses = ceil(cycle / headway). Flags infeasibility when any vehicle type
    is over-subscribed."""
    caps = {s.name: usable_capacity(s.seats, capacity_fraction) for s in services}
    serving: dict[str, list[str]] = {}
    for s in services:
        for stop in s.stops:
            routes = serving.setdefault(stop, [])
            if s.name not in routes:
                routes.append(s.name)

    plans = []
    for s in services:
        headway = grid.max_headway
        for stop in dict.fromkeys(s.stops):
            h = required_headway(stop, legacy, [caps[r] for r in serving[stop]], grid)
            headway = min(headway, h)
        buses = math.ceil(s.cycle_min / headway - 1e-9)
        plans.append(RouteFrequency(
            route=s.name,
            headway_min=headway,
            buses_required=max(buses, 1),
            usable_capacity=caps[s.name],
            cycle_min=s.cycle_min,
            vehicle=s.vehicle,
        ))

    used: dict[str, int] = {}
    for s, p in zip(services, plans):
        used[s.vehicle] = used.get(s.vehicle, 0) + p.buses_required
    available = {v: fleet.available(v) for v in used}
    feasible = all(used[v] <= available[v] for v in used)
    return FrequencyPlan(tuple(plans), used, available, feasible)


# --- JSON ---------------------------------------------------------------------

def legacy_from_json(text: str) -> LegacyCoverage:
    doc = json.loads(text)
    return LegacyCoverage({
        stop: tuple(LegacyService(e["route"], float(e["headway_min"]), int(e["seats"]))
                    for e in entries)
        for stop, entries in doc["stops"].items()
    })


def legacy_to_json(cov: LegacyCoverage) -> str:
    doc = {"stops": {
        stop: [{"route": s.route, "headway_min": s.headway_min, "seats": s.seats}
               for s in services]
        for stop, services in cov.by_stop.items()
    }}
    return json.dumps(doc, indent=2, sort_keys=True)


def fleet_from_json(text: str) -> Fleet:
    doc = json.loads(text)
    return Fleet({name: VehicleType(name, int(v["seats"]), int(v["count"]))
                  for name, v in doc["vehicles"].items()})


def plan_to_json(plan: FrequencyPlan) -> str:
    doc = {
        "routes": [
            {"route": r.route, "headway_min": r.headway_min,
             "buses_required": r.buses_required, "usable_capacity": r.usable_capacity,
             "cycle_min": r.cycle_min, "vehicle": r.vehicle}
            for r in plan.routes
        ],
        "fleet_used": plan.fleet_used,
        "fleet_available": plan.fleet_available,
        "feasible": plan.feasible,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def plan_from_json(text: str) -> FrequencyPlan:
    doc = json.loads(text)
    return FrequencyPlan(
        routes=tuple(RouteFrequency(r["route"], float(r["headway_min"]),
                                    int(r["buses_required"]), int(r["usable_capacity"]),
                                    float(r["cycle_min"]), r["vehicle"])
                     for r in doc["routes"]),
        fleet_used=doc["fleet_used"],
        fleet_available=doc["fleet_available"],
        feasible=bool(doc["feasible"]),
    )
