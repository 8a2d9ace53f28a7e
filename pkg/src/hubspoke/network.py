"""Core data model: stops, travel times, instances, route designs, demand,
and transfer groups, plus instance validation and JSON (de)serialization.

All types are immutable after construction and safe to share across
concurrent workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

SAME_STOP_WALK = 0.0
NEARBY_WALK = 0.5


class TransitError(Exception):
    """Base class for errors raised by this package."""


class UnknownStopError(TransitError):
    pass


class MissingTravelTimeError(TransitError):
    pass


@dataclass(frozen=True)
class Stop:
    """A bus stop. ``is_hub`` marks stops at a hub location."""

    stop_id: str
    name: str
    is_hub: bool = False


@dataclass(frozen=True)
class TravelTimeMatrix:
    """Directed stop-to-stop driving times in decimal minutes."""

    entries: Mapping[tuple[str, str], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))

    def get(self, origin: str, dest: str) -> float:
        if origin == dest:
            return 0.0
        try:
            return self.entries[(origin, dest)]
        except KeyError:
            raise MissingTravelTimeError(f"no travel time for {origin} -> {dest}") from None

    def has(self, origin: str, dest: str) -> bool:
        return origin == dest or (origin, dest) in self.entries


@dataclass(frozen=True)
class TransitInstance:
    """A route-design problem: assignable stops, one hub, and parameters.

    ``stops`` is the assignable set; ``hub`` is the route origin/terminus and
    is not a member of ``stops``. ``route_fixed_cost`` holds one entry per
    candidate route. ``required_stops`` drives the coverage constraints added
    on top of the assignment model (the original formulation admits the empty
    design, so some coverage rule is needed for the minimization to be
    meaningful; see ``hubspoke.optimizer``).
    """

    stops: tuple[Stop, ...]
    hub: Stop
    candidate_route_count: int
    max_visits: int
    route_fixed_cost: tuple[float, ...]
    alpha: float
    stop_dwell: float
    time_cap: float
    required_stops: frozenset[str]
    travel: TravelTimeMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "stops", tuple(self.stops))
        costs = self.route_fixed_cost
        if isinstance(costs, (int, float)):
            costs = (float(costs),) * self.candidate_route_count
        else:
            costs = tuple(float(c) for c in costs)
        object.__setattr__(self, "route_fixed_cost", costs)
        object.__setattr__(self, "required_stops", frozenset(self.required_stops))

    @property
    def stop_ids(self) -> tuple[str, ...]:
        return tuple(s.stop_id for s in self.stops)

    def all_ids(self) -> tuple[str, ...]:
        """Assignable stop ids plus the hub id."""
        return self.stop_ids + (self.hub.stop_id,)


@dataclass(frozen=True)
class RouteDesign:
    """Decoded routes: ordered stop sequences plus objective decomposition."""

    routes: tuple[tuple[int, tuple[str, ...]], ...]
    objective_total: float
    objective_fixed: float
    objective_time: float
    per_route_time: tuple[float, ...]

    def sequences(self) -> tuple[tuple[str, ...], ...]:
        return tuple(seq for _, seq in self.routes)


@dataclass(frozen=True)
class RouteTable:
    """One operated route as published: cyclic stop positions with the travel
    time to the next position and the average dwell at each position. A stop
    may appear at more than one position (out-and-back loops)."""

    name: str
    vehicle: str
    stops: tuple[str, ...]
    leg_minutes: tuple[float, ...]
    avg_dwell_minutes: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "stops", tuple(self.stops))
        object.__setattr__(self, "leg_minutes", tuple(self.leg_minutes))
        object.__setattr__(self, "avg_dwell_minutes", tuple(self.avg_dwell_minutes))
        if not (len(self.stops) == len(self.leg_minutes) == len(self.avg_dwell_minutes)):
            raise ValueError("route table columns must have equal length")

    def distinct_stops(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.stops))

    def driving_minutes(self) -> float:
        return sum(self.leg_minutes)

    def dwell_minutes(self) -> float:
        return sum(self.avg_dwell_minutes)

    def cycle_minutes(self) -> float:
        return self.driving_minutes() + self.dwell_minutes()


@dataclass(frozen=True)
class TransferGroup:
    """Stops between which passengers may change routes.

    ``same-stop`` groups name a single stop hosting several routes (walk 0);
    ``nearby-stop`` groups name two or more stops within a 0.5-minute walk.
    """

    kind: str
    members: tuple[str, ...]
    walk_time: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if self.kind not in ("same-stop", "nearby-stop"):
            raise ValueError(f"unknown transfer kind {self.kind!r}")
        if self.walk_time not in (SAME_STOP_WALK, NEARBY_WALK):
            raise ValueError("walk_time must be 0 or 0.5 minutes")
        if self.kind == "nearby-stop" and len(self.members) < 2:
            raise ValueError("nearby-stop group needs at least 2 member stops")
        if self.kind == "same-stop" and len(self.members) != 1:
            raise ValueError("same-stop group names exactly one stop")


@dataclass(frozen=True)
class DemandSpec:
    """Hourly passenger demand: O-D rows plus a uniform-random share.

    Row percentages are fractions of the total demand; together with
    ``random_share`` they must sum to 1.
    """

    total_hourly_demand: float
    od_rows: tuple[tuple[str, str, float], ...]
    random_share: float = 0.12
    horizon: float = 120.0

    def __post_init__(self) -> None:
        rows = tuple((o, d, float(p)) for o, d, p in self.od_rows)
        object.__setattr__(self, "od_rows", rows)
        if any(p < 0 for _, _, p in rows):
            raise ValueError("O-D percentages must be nonnegative")
        total = sum(p for _, _, p in rows) + self.random_share
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"O-D percentages + random share sum to {total}, expected 1.0")


def route_duration(seq: Iterable[str], inst: TransitInstance) -> float:
    """Planning duration of one route: hub legs, consecutive legs, and a
    constant per-stop dwell. Empty sequences cost nothing (bus never leaves
    the hub)."""
    seq = list(seq)
    known = set(inst.all_ids())
    for s in seq:
        if s not in known:
            raise UnknownStopError(f"stop {s!r} not in instance")
    if not seq:
        return 0.0
    hub = inst.hub.stop_id
    total = inst.travel.get(hub, seq[0])
    for a, b in zip(seq, seq[1:]):
        total += inst.travel.get(a, b)
    total += inst.travel.get(seq[-1], hub)
    total += inst.stop_dwell * len(seq)
    return total


def validate_instance(inst: TransitInstance) -> list[str]:
    """Report structural violations. Empty list iff the instance is
    well-formed. Never raises."""
    violations: list[str] = []
    ids = list(inst.stop_ids) + [inst.hub.stop_id]
    seen: set[str] = set()
    for sid in ids:
        if sid in seen:
            violations.append(f"duplicate stop id {sid!r}")
        seen.add(sid)

    if not inst.hub.is_hub and not any(s.is_hub for s in inst.stops):
        violations.append("no hub-flagged stop in instance")

    if inst.max_visits < 1:
        violations.append("max_visits must be >= 1")
    if inst.candidate_route_count < 1:
        violations.append("candidate route count must be >= 1")
    if inst.time_cap <= 0:
        violations.append("time cap must be positive")
    if inst.stop_dwell < 0:
        violations.append("negative stop dwell")
    if inst.alpha < 0:
        violations.append("negative alpha")
    if len(inst.route_fixed_cost) != inst.candidate_route_count:
        violations.append("route_fixed_cost length does not match candidate route count")
    for j, c in enumerate(inst.route_fixed_cost):
        if c < 0:
            violations.append(f"negative fixed cost for route {j}")

    for (a, b), t in inst.travel.entries.items():
        if t < 0:
            violations.append(f"negative travel time {a} -> {b}")
        if a == b and t != 0:
            violations.append(f"nonzero diagonal travel time at {a}")
    for a in inst.all_ids():
        for b in inst.all_ids():
            if a != b and not inst.travel.has(a, b):
                violations.append(f"missing travel entry {a} -> {b}")

    if not inst.required_stops:
        violations.append("empty required stop set")
    known = set(inst.stop_ids)
    for r in sorted(inst.required_stops):
        if r not in known:
            violations.append(f"unknown required stop {r!r}")

    return violations


# --- JSON schemas ----------------------------------------------------------
#
# instance: {stops:[{id,name,is_hub}], travel:[{from,to,minutes}],
#            params:{routes,max_visits,fixed_cost,alpha,stop_dwell,time_cap},
#            required:[ids]}
# demand:   {total_per_hour, horizon_min, random_share, od:[{origin,dest,pct}]}
# transfers:{groups:[{kind,stops,walk_min}]}
#
# All times in decimal minutes. The designated hub of an instance is the
# first stop with is_hub true; any further hub-flagged stops stay assignable.


def instance_to_json(inst: TransitInstance) -> str:
    stops = [{"id": inst.hub.stop_id, "name": inst.hub.name, "is_hub": True}]
    stops += [{"id": s.stop_id, "name": s.name, "is_hub": s.is_hub} for s in inst.stops]
    doc = {
        "stops": stops,
        "travel": [
            {"from": a, "to": b, "minutes": t}
            for (a, b), t in sorted(inst.travel.entries.items())
        ],
        "params": {
            "routes": inst.candidate_route_count,
            "max_visits": inst.max_visits,
            "fixed_cost": list(inst.route_fixed_cost),
            "alpha": inst.alpha,
            "stop_dwell": inst.stop_dwell,
            "time_cap": inst.time_cap,
        },
        "required": sorted(inst.required_stops),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def instance_from_json(text: str) -> TransitInstance:
    doc = json.loads(text)
    stops = [Stop(s["id"], s.get("name", s["id"]), bool(s.get("is_hub", False)))
             for s in doc["stops"]]
    hubs = [s for s in stops if s.is_hub]
    if not hubs:
        raise TransitError("instance document has no hub-flagged stop")
    hub = hubs[0]
    assignable = tuple(s for s in stops if s is not hub)
    travel = TravelTimeMatrix({(e["from"], e["to"]): float(e["minutes"])
                               for e in doc["travel"]})
    p = doc["params"]
    cost = p["fixed_cost"]
    if isinstance(cost, list):
        cost = tuple(float(c) for c in cost)
    else:
        cost = (float(cost),) * int(p["routes"])
    return TransitInstance(
        stops=assignable,
        hub=hub,
        candidate_route_count=int(p["routes"]),
        max_visits=int(p["max_visits"]),
        route_fixed_cost=cost,
        alpha=float(p["alpha"]),
        stop_dwell=float(p["stop_dwell"]),
        time_cap=float(p["time_cap"]),
        required_stops=frozenset(doc["required"]),
        travel=travel,
    )


def travel_matrix_from_csv(text: str) -> TravelTimeMatrix:
    """Parse ``from,to,minutes`` rows (header optional) into a matrix."""
    entries: dict[tuple[str, str], float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.lower().startswith("from,"):
            continue
        a, b, t = (part.strip() for part in line.split(","))
        entries[(a, b)] = float(t)
    return TravelTimeMatrix(entries)


def demand_to_json(spec: DemandSpec) -> str:
    doc = {
        "total_per_hour": spec.total_hourly_demand,
        "horizon_min": spec.horizon,
        "random_share": spec.random_share,
        "od": [{"origin": o, "dest": d, "pct": p} for o, d, p in spec.od_rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def demand_from_json(text: str) -> DemandSpec:
    doc = json.loads(text)
    return DemandSpec(
        total_hourly_demand=float(doc["total_per_hour"]),
        od_rows=tuple((r["origin"], r["dest"], float(r["pct"])) for r in doc["od"]),
        random_share=float(doc["random_share"]),
        horizon=float(doc["horizon_min"]),
    )


def transfers_to_json(groups: Iterable[TransferGroup]) -> str:
    doc = {"groups": [{"kind": g.kind, "stops": list(g.members), "walk_min": g.walk_time}
                      for g in groups]}
    return json.dumps(doc, indent=2, sort_keys=True)


def transfers_from_json(text: str) -> tuple[TransferGroup, ...]:
    doc = json.loads(text)
    return tuple(TransferGroup(g["kind"], tuple(g["stops"]), float(g["walk_min"]))
                 for g in doc["groups"])
