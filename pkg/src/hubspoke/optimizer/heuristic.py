"""Greedy + local-search fallback for instances too large to solve exactly.

Construction inserts the nearest feasible stop under the time cap until the
required set is covered, then 2-opt segment reversals, cross-route
relocations, improving insertions/removals of optional stops, and empty
route drops run to a local optimum. Restarts with shuffled stop orders are
seeded, so a fixed seed always returns the same design.
"""

from __future__ import annotations

import random

from ..network import RouteDesign, TransitInstance, route_duration
from .evaluate import check_design, design_from_sequences
from .search import InfeasibleError, SolveOptions, _canonical, _precheck

_RESTARTS = 4


def solve_heuristic(inst: TransitInstance, opts: SolveOptions | None = None) -> RouteDesign:
    """Always returns a design feasible for the model constraints (raises
    InfeasibleError when coverage cannot be met)."""
    opts = opts or SolveOptions(mode="heuristic")
    _precheck(inst)
    rng = random.Random(opts.seed)

    best: RouteDesign | None = None
    for restart in range(_RESTARTS):
        order = list(inst.stop_ids)
        if restart:
            rng.shuffle(order)
        seqs = _construct(inst, order)
        if seqs is None:
            continue
        seqs = _improve(inst, seqs)
        design = design_from_sequences(_assign_indices(seqs, inst), inst)
        if best is None or design.objective_total < best.objective_total - 1e-12:
            best = design
    if best is None:
        raise InfeasibleError(
            "no feasible assignment: coverage cannot be met within the time cap"
        )
    problems = check_design(best, inst)
    if problems:
        raise InfeasibleError(f"heuristic produced an invalid design: {problems}")
    return best


def _construct(inst: TransitInstance, order: list[str]) -> list[list[str]] | None:
    hub = inst.hub.stop_id
    t = inst.travel.get
    routes: list[list[str]] = [[] for _ in range(inst.candidate_route_count)]
    uncovered = [s for s in order if s in inst.required_stops]

    for seq in routes:
        while uncovered and len(seq) < inst.max_visits:
            last = seq[-1] if seq else hub
            choice = min(uncovered, key=lambda s: (t(last, s), s))
            trial = seq + [choice]
            if route_duration(trial, inst) <= inst.time_cap + 1e-9:
                seq.append(choice)
                uncovered.remove(choice)
            else:
                break
        if not uncovered:
            break

    # leftovers: best-position insertion anywhere
    for s in list(uncovered):
        placed = False
        for seq in routes:
            if len(seq) >= inst.max_visits or s in seq:
                continue
            pos = _best_insertion(inst, seq, s)
            if pos is not None:
                seq.insert(pos, s)
                uncovered.remove(s)
                placed = True
                break
        if not placed:
            return None
    return routes


def _best_insertion(inst: TransitInstance, seq: list[str], stop: str) -> int | None:
    best_pos, best_dur = None, None
    for pos in range(len(seq) + 1):
        trial = seq[:pos] + [stop] + seq[pos:]
        dur = route_duration(trial, inst)
        if dur <= inst.time_cap + 1e-9 and (best_dur is None or dur < best_dur - 1e-12):
            best_pos, best_dur = pos, dur
    return best_pos


def _improve(inst: TransitInstance, routes: list[list[str]]) -> list[list[str]]:
    t_cap = inst.time_cap + 1e-9
    alpha = inst.alpha

    def dur(seq: list[str]) -> float:
        return route_duration(seq, inst)

    improved = True
    while improved:
        improved = False

        # 2-opt inside each route
        for seq in routes:
            n = len(seq)
            for i in range(n - 1):
                for j in range(i + 1, n):
                    trial = seq[:i] + seq[i:j + 1][::-1] + seq[j + 1:]
                    if dur(trial) < dur(seq) - 1e-9:
                        seq[:] = trial
                        improved = True

        # relocate a stop to the best position of any route
        for src in routes:
            for s in list(src):
                base = dur(src)
                without = [x for x in src if x != s]
                gain = alpha * (base - dur(without))
                best_delta, best_move = 0.0, None
                for dst in routes:
                    candidate = without if dst is src else dst
                    if dst is not src and (len(dst) >= inst.max_visits or s in dst):
                        continue
                    pos = _best_insertion(inst, list(candidate), s)
                    if pos is None:
                        continue
                    inserted = list(candidate)
                    inserted.insert(pos, s)
                    cost = alpha * (dur(inserted) - dur(list(candidate)))
                    delta = gain - cost
                    if delta > best_delta + 1e-9:
                        best_delta, best_move = delta, (dst, pos)
                if best_move is not None:
                    dst, pos = best_move
                    src.remove(s)
                    target = src if dst is src else dst
                    target.insert(pos, s)
                    improved = True

        # drop optional stops that only cost time (non-metric matrices can
        # make a detour cheaper, so this is checked, not assumed)
        for seq in routes:
            for s in list(seq):
                if s in inst.required_stops:
                    continue
                without = [x for x in seq if x != s]
                if dur(without) < dur(seq) - 1e-9:
                    seq[:] = without
                    improved = True

    return [seq for seq in routes if seq]


def _assign_indices(
    seqs: list[list[str]], inst: TransitInstance
) -> list[tuple[int, tuple[str, ...]]]:
    """Give sequences the cheapest route indices (identical when costs are
    uniform); _canonical then fixes the decode order."""
    by_cost = sorted(range(inst.candidate_route_count),
                     key=lambda j: (inst.route_fixed_cost[j], j))
    pairs = [(by_cost[n], tuple(seq)) for n, seq in enumerate(seqs)]
    return _canonical(pairs, inst)
