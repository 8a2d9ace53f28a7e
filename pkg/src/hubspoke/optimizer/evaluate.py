"""Decoded-design checks and objective evaluation."""

from __future__ import annotations

from ..network import RouteDesign, TransitInstance, route_duration

_TIME_TOL = 1e-9


def objective_value(design: RouteDesign, inst: TransitInstance) -> tuple[float, float, float]:
    """(total, fixed, time-weighted) cost of a design under an instance."""
    fixed = sum(inst.route_fixed_cost[j] for j, _ in design.routes)
    time = inst.alpha * sum(route_duration(seq, inst) for _, seq in design.routes)
    return fixed + time, fixed, time


def design_from_sequences(
    sequences: list[tuple[int, tuple[str, ...]]], inst: TransitInstance
) -> RouteDesign:
    """Build a RouteDesign (durations and objective split included) from
    (route index, sequence) pairs."""
    routes = tuple((j, tuple(seq)) for j, seq in sequences)
    per_time = tuple(route_duration(seq, inst) for _, seq in routes)
    fixed = sum(inst.route_fixed_cost[j] for j, _ in routes)
    time = inst.alpha * sum(per_time)
    return RouteDesign(
        routes=routes,
        objective_total=fixed + time,
        objective_fixed=fixed,
        objective_time=time,
        per_route_time=per_time,
    )


def check_design(design: RouteDesign, inst: TransitInstance) -> list[str]:
    """Restate the model constraints as decoded-sequence checks. Empty list
    iff the design is feasible. Never raises."""
    violations: list[str] = []
    known = set(inst.stop_ids)

    if len(design.routes) > inst.candidate_route_count:
        violations.append(
            f"{len(design.routes)} routes exceed the {inst.candidate_route_count} available"
        )
    seen_idx: set[int] = set()
    for j, seq in design.routes:
        label = f"route {j}"
        if j in seen_idx:
            violations.append(f"duplicate route index {j}")
        seen_idx.add(j)
        if not 0 <= j < inst.candidate_route_count:
            violations.append(f"{label}: index out of range")
        if not seq:
            violations.append(f"{label}: empty sequence")
            continue
        if len(seq) > inst.max_visits:
            violations.append(f"{label}: {len(seq)} visits exceed max {inst.max_visits}")
        dupes = {s for s in seq if seq.count(s) > 1}
        for s in sorted(dupes):
            violations.append(f"{label}: duplicate visit at {s!r}")
        unknown = [s for s in seq if s not in known]
        for s in unknown:
            violations.append(f"{label}: unknown stop {s!r}")
        if not unknown:
            dur = route_duration(seq, inst)
            if dur > inst.time_cap + _TIME_TOL:
                violations.append(
                    f"{label}: time cap exceeded ({dur:.2f} > {inst.time_cap:.2f} min)"
                )

    covered = {s for _, seq in design.routes for s in seq}
    for s in sorted(inst.required_stops - covered):
        violations.append(f"required stop {s!r} not covered")
    return violations
