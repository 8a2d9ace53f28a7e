"""Passenger routing over a set of operated routes.

Builds a graph with stop-level wait nodes and (route, stop) ride nodes,
finds shortest passenger plans with Dijkstra, and exposes the per-passenger
decision functions the simulator replays: which route to board, whether to
get off, and where to wait next.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Final, Iterable, Mapping, Sequence

from .network import RouteTable, TransferGroup, TransitError

EXIT: Final = -1  # sentinel returned by next_stop at the destination

NodeKey = tuple  # ("stop", stop_id) or ("ride", route, stop_id)


class RoutingError(TransitError):
    pass


@dataclass(frozen=True)
class PlanLeg:
    """One bus ride: board ``route`` at ``board``, leave it at ``alight``."""

    route: str
    board: str
    alight: str


@dataclass(frozen=True)
class PassengerPlan:
    """Precomputed shortest path for one O-D pair.

    Consecutive legs may be joined by a nearby-stop walk (``board`` of the
    next leg differs from ``alight`` of the previous one), and the plan may
    end with a walk from the last ``alight`` to ``dest``.
    """

    origin: str
    dest: str
    legs: tuple[PlanLeg, ...]
    weight: float

    @property
    def transfer_stops(self) -> tuple[str, ...]:
        return tuple(leg.board for leg in self.legs[1:])

    @property
    def transfers(self) -> int:
        return max(len(self.legs) - 1, 0)


class RoutingGraph:
    """Immutable routing graph over operated routes and transfer groups.

    Ride edges are weighted with leg travel plus the planning dwell at the
    arrival stop; boarding edges carry the expected wait for the route
    (headway/2 under uniform arrivals, configurable; 0 gives pure-distance
    plans); walk edges inside nearby-stop groups cost the group walk time.
    """

    def __init__(
        self,
        routes: Sequence[RouteTable],
        transfers: Iterable[TransferGroup] = (),
        board_weights: Mapping[str, float] | float = 0.0,
    ) -> None:
        self.routes = tuple(routes)
        self.transfers = tuple(transfers)
        if isinstance(board_weights, (int, float)):
            board_weights = {r.name: float(board_weights) for r in self.routes}
        self.board_weights = dict(board_weights)

        self._walk: dict[tuple[str, str], float] = {}
        adj: dict[NodeKey, dict[NodeKey, float]] = {}

        def add_edge(a: NodeKey, b: NodeKey, w: float) -> None:
            if w < 0:
                raise RoutingError(f"negative edge weight {w} on {a} -> {b}")
            nbrs = adj.setdefault(a, {})
            if b not in nbrs or w < nbrs[b]:
                nbrs[b] = w
            adj.setdefault(b, {})

        routes_at: dict[str, set[str]] = {}
        for r in self.routes:
            n = len(r.stops)
            for i in range(n):
                a, b = r.stops[i], r.stops[(i + 1) % n]
                dwell_b = r.avg_dwell_minutes[(i + 1) % n]
                add_edge(("ride", r.name, a), ("ride", r.name, b),
                         r.leg_minutes[i] + dwell_b)
            for sid in r.distinct_stops():
                routes_at.setdefault(sid, set()).add(r.name)
                add_edge(("stop", sid), ("ride", r.name, sid),
                         self.board_weights.get(r.name, 0.0))
                add_edge(("ride", r.name, sid), ("stop", sid), 0.0)

        for g in self.transfers:
            if g.kind == "same-stop":
                stop = g.members[0]
                if len(routes_at.get(stop, ())) < 2:
                    raise RoutingError(
                        f"same-stop transfer group at {stop!r} needs >= 2 routes"
                    )
                continue
            for a in g.members:
                for b in g.members:
                    if a != b:
                        key = (a, b)
                        if key not in self._walk or g.walk_time < self._walk[key]:
                            self._walk[key] = g.walk_time

        # close walks transitively so chained groups stay walkable in one hop
        changed = True
        while changed:
            changed = False
            for (a, b), w1 in list(self._walk.items()):
                for (b2, c), w2 in list(self._walk.items()):
                    if b == b2 and a != c:
                        w = w1 + w2
                        if w < self._walk.get((a, c), math.inf):
                            self._walk[(a, c)] = w
                            changed = True
        for (a, b), w in self._walk.items():
            add_edge(("stop", a), ("stop", b), w)

        # freeze adjacency in sorted order for deterministic traversal
        self._adj: dict[NodeKey, tuple[tuple[NodeKey, float], ...]] = {
            node: tuple(sorted(nbrs.items())) for node, nbrs in sorted(adj.items())
        }
        self._routes_at = {s: tuple(sorted(names)) for s, names in routes_at.items()}

    @property
    def stop_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._routes_at))

    def routes_at(self, stop: str) -> tuple[str, ...]:
        return self._routes_at.get(stop, ())

    def walk_minutes(self, a: str, b: str) -> float | None:
        """Walk time between two stops of one nearby group, 0 for a == b,
        None when not walkable."""
        if a == b:
            return 0.0
        return self._walk.get((a, b))

    def neighbors(self, node: NodeKey) -> tuple[tuple[NodeKey, float], ...]:
        return self._adj.get(node, ())

    def nodes(self) -> tuple[NodeKey, ...]:
        return tuple(self._adj)

    def to_edge_csv(self) -> str:
        """Edge list dump for debugging."""
        lines = ["from,to,weight"]
        for node, nbrs in self._adj.items():
            for other, w in nbrs:
                lines.append(f"{'|'.join(node)},{'|'.join(other)},{w}")
        return "\n".join(lines) + "\n"


def _shortest_node_path(
    graph: RoutingGraph, source: NodeKey, target: NodeKey
) -> tuple[list[NodeKey], float] | None:
    """Dijkstra with deterministic smallest-node-id tie-breaking."""
    dist: dict[NodeKey, float] = {source: 0.0}
    pred: dict[NodeKey, NodeKey] = {}
    done: set[NodeKey] = set()
    heap: list[tuple[float, NodeKey]] = [(0.0, source)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == target:
            path = [node]
            while node != source:
                node = pred[node]
                path.append(node)
            path.reverse()
            return path, d
        for other, w in graph.neighbors(node):
            nd = d + w
            if other not in dist or nd < dist[other] - 1e-12:
                dist[other] = nd
                pred[other] = node
                heapq.heappush(heap, (nd, other))
    return None


def _decode(origin: str, dest: str, path: list[NodeKey], weight: float) -> PassengerPlan:
    legs: list[PlanLeg] = []
    riding: str | None = None
    board_stop: str | None = None
    for prev, node in zip(path, path[1:]):
        if node[0] == "ride" and prev[0] == "stop":
            riding, board_stop = node[1], prev[1]
        elif node[0] == "stop" and prev[0] == "ride":
            assert riding is not None and board_stop is not None
            if legs and legs[-1].route == riding and legs[-1].alight == board_stop:
                # re-boarding the route it just left: ride through instead
                legs[-1] = PlanLeg(riding, legs[-1].board, node[1])
            else:
                legs.append(PlanLeg(riding, board_stop, node[1]))
            riding = board_stop = None
    return PassengerPlan(origin, dest, tuple(legs), weight)


def dijkstra(graph: RoutingGraph, origin: str, dest: str) -> PassengerPlan | None:
    """Shortest plan from ``origin`` to ``dest``; None when unreachable.
    ``origin == dest`` yields the empty plan."""
    if origin == dest:
        return PassengerPlan(origin, dest, (), 0.0)
    found = _shortest_node_path(graph, ("stop", origin), ("stop", dest))
    if found is None:
        return None
    path, weight = found
    return _decode(origin, dest, path, weight)


class PlanCache:
    """Memoized plans per O-D pair over one graph."""

    def __init__(self, graph: RoutingGraph) -> None:
        self.graph = graph
        self._plans: dict[tuple[str, str], PassengerPlan | None] = {}

    def get(self, origin: str, dest: str) -> PassengerPlan | None:
        key = (origin, dest)
        if key not in self._plans:
            self._plans[key] = dijkstra(self.graph, origin, dest)
        return self._plans[key]


@dataclass
class PlanCursor:
    """A passenger's progress through their plan; ``leg_index`` counts
    completed boardings."""

    plan: PassengerPlan
    leg_index: int = 0

    def current_leg(self) -> PlanLeg | None:
        if self.leg_index < len(self.plan.legs):
            return self.plan.legs[self.leg_index]
        return None


def get_on(cursor: PlanCursor | None, curr_stop: str) -> str | None:
    """Route the passenger boards at ``curr_stop``, or None when the stop is
    not the next boarding point of the plan."""
    if cursor is None or cursor.plan is None:
        raise RoutingError("passenger has no plan")
    leg = cursor.current_leg()
    if leg is not None and leg.board == curr_stop:
        return leg.route
    return None


def get_off(cursor: PlanCursor, curr_stop: str) -> bool:
    """True iff an on-board passenger leaves the bus at ``curr_stop`` (their
    destination or a planned transfer point)."""
    leg = cursor.current_leg()
    return leg is not None and leg.alight == curr_stop


def next_stop(cursor: PlanCursor, curr_stop: str) -> str | int:
    """Where the passenger waits next: the boarding stop of the upcoming leg
    (same stop, or a nearby-group member reached by walking), the destination
    for a terminal walk, or EXIT at the destination."""
    if curr_stop == cursor.plan.dest:
        return EXIT
    leg = cursor.current_leg()
    if leg is not None:
        return leg.board
    return cursor.plan.dest
