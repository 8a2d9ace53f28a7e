"""Discrete-event loop: buses cycling their routes, passengers arriving,
boarding under capacity caps, dwelling, transferring, and exiting.

Stop handling per bus visit: arrive at the unload area and let everyone
whose plan says so off, move to the load area and board the FIFO queue up
to the free capacity, dwell (0 without activity, 1 minute with any
load/unload, 2 minutes at hubs or when more than 10 passengers moved), then
depart. Passengers who reach the stop while the bus dwells still board at
departure if seats remain; everyone who boarded during the visit gets the
departure instant as boarding timestamp, so dwell at the boarding stop
counts as waiting, not riding. Utilization is sampled at every departure.

Passengers decide at the unload area (walk arrivals and fresh arrivals
included): exit at the destination, queue here when the next leg boards
here, otherwise walk to the nearby-group stop where they wait next.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from ..network import DemandSpec, TransferGroup, TransitError
from ..routing import EXIT, PlanCache, PlanCursor, RoutingGraph, get_off, get_on, next_stop
from ..seeding import stream
from .demand import Arrival, sample_arrivals


class SimulationError(TransitError):
    pass


class SimulationInvariantError(TransitError):
    """An in-engine invariant (capacity, timestamps, conservation) broke."""


@dataclass(frozen=True)
class ServiceRoute:
    """One operated route: published table plus fleet assignment."""

    name: str
    stops: tuple[str, ...]
    leg_minutes: tuple[float, ...]
    planned_dwell: tuple[float, ...]   # placement and cycle estimates only
    bus_count: int
    capacity: int

    def __post_init__(self) -> None:
        if self.bus_count < 1:
            raise ValueError(f"route {self.name!r} needs at least one bus")
        if self.capacity < 1:
            raise ValueError(f"route {self.name!r} needs capacity >= 1")

    def planned_cycle(self) -> float:
        return sum(self.leg_minutes) + sum(self.planned_dwell)


@dataclass(frozen=True)
class DwellRules:
    no_activity: float = 0.0
    activity: float = 1.0
    heavy_or_hub: float = 2.0
    heavy_threshold: int = 10  # strictly more passengers than this is heavy

    def dwell(self, moved: int, at_hub: bool) -> float:
        if moved == 0:
            return self.no_activity
        if at_hub or moved > self.heavy_threshold:
            return self.heavy_or_hub
        return self.activity


@dataclass(frozen=True)
class SimConfig:
    routes: tuple[ServiceRoute, ...]
    demand: DemandSpec
    transfers: tuple[TransferGroup, ...]
    hub_stops: frozenset[str]
    horizon: float = 120.0
    replications: int = 40
    seed: int = 0
    dwell: DwellRules = field(default_factory=DwellRules)

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass
class BusState:
    route_idx: int
    bus_idx: int
    pos: int                        # current position in the route cycle
    onboard: list[int] = field(default_factory=list)
    pending_boarders: list[int] = field(default_factory=list)
    moved_this_stop: int = 0


@dataclass
class PassengerState:
    pax_id: int
    origin: str
    dest: str
    cursor: PlanCursor
    t_arrival: float
    t_exit: float | None = None
    boardings: list[tuple[float, float | None]] = field(default_factory=list)
    wa_enter: float | None = None
    status: str = "new"             # new | waiting | walking | onboard | exited

    @property
    def transfers_taken(self) -> int:
        return max(len(self.boardings) - 1, 0)


@dataclass
class ReplicationResult:
    """Raw per-replication tallies (aggregation lives in report.py)."""

    created: int = 0
    exited: int = 0
    waiting_at_end: int = 0
    walking_at_end: int = 0
    onboard_at_end: int = 0
    # pooled per (route): [samples, utilization sum, count >= 0.75]
    util_samples: dict[str, list[float]] = field(default_factory=dict)
    total_sum: float = 0.0
    wait_sum: float = 0.0
    onbus_sum: float = 0.0
    transfers_sum: int = 0
    with_transfer: int = 0
    hist_counts: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    wait_all_sum: float = 0.0
    wait_all_count: int = 0
    invariant_violations: int = 0
    boarding_log: list[tuple[str, str, float]] | None = None


_HIST_EDGES = (5.0, 10.0, 15.0)


def histogram_bin(wait: float) -> int:
    for i, edge in enumerate(_HIST_EDGES):
        if wait < edge:
            return i
    return len(_HIST_EDGES)


class Replication:
    """One seeded run of the event loop."""

    def __init__(
        self,
        config: SimConfig,
        graph: RoutingGraph,
        plans: PlanCache,
        rep_index: int,
        collect_boardings: bool = False,
    ) -> None:
        self.cfg = config
        self.graph = graph
        self.plans = plans
        self.rep_index = rep_index
        self.result = ReplicationResult(
            boarding_log=[] if collect_boardings else None
        )
        self._heap: list[tuple[float, int, tuple]] = []
        self._seq = 0
        self._pax: dict[int, PassengerState] = {}
        self._queues: dict[tuple[str, str], deque[int]] = {}
        self._buses: list[BusState] = []
        self._walking: set[int] = set()
        self.now = 0.0

    # -- event plumbing ------------------------------------------------------

    def _push(self, time: float, payload: tuple) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, payload))

    def run(self) -> ReplicationResult:
        self._place_buses()
        self._create_arrivals()
        horizon = self.cfg.horizon
        while self._heap:
            t, _, payload = heapq.heappop(self._heap)
            if t > horizon:
                break
            self.now = t
            kind = payload[0]
            if kind == "bus_arrive":
                self._bus_arrive(payload[1])
            elif kind == "bus_depart":
                self._bus_depart(payload[1])
            else:
                self._pax_decide(payload[1], payload[2])
        self._finish()
        return self.result

    # -- setup ----------------------------------------------------------------

    def _place_buses(self) -> None:
        for r_idx, route in enumerate(self.cfg.routes):
            n_pos = len(route.stops)
            arrive = [0.0]
            for k in range(n_pos):
                arrive.append(arrive[-1] + route.planned_dwell[k] + route.leg_minutes[k])
            cycle = arrive[-1]
            for b in range(route.bus_count):
                offset = cycle * b / route.bus_count
                k = next(i for i, t in enumerate(arrive) if t >= offset - 1e-9)
                bus = BusState(route_idx=r_idx, bus_idx=b, pos=k % n_pos)
                self._buses.append(bus)
                self._push(arrive[k] - offset, ("bus_arrive", len(self._buses) - 1))

    def _create_arrivals(self) -> None:
        rng = stream(self.cfg.seed, "arrivals", self.rep_index)
        stops = sorted(self.graph.stop_ids)
        reachable = lambda o, d: self.plans.get(o, d) is not None
        for arr in sample_arrivals(self.cfg.demand, self.cfg.horizon, rng, stops, reachable):
            plan = self.plans.get(arr.origin, arr.dest)
            if plan is None:
                raise SimulationError(
                    f"no plan from {arr.origin!r} to {arr.dest!r}"
                )
            pax = PassengerState(
                pax_id=self.result.created,
                origin=arr.origin,
                dest=arr.dest,
                cursor=PlanCursor(plan),
                t_arrival=arr.time,
            )
            self.result.created += 1
            self._pax[pax.pax_id] = pax
            self._push(arr.time, ("pax_decide", pax.pax_id, arr.origin))

    # -- handlers ---------------------------------------------------------------

    def _pax_decide(self, pax_id: int, stop: str) -> None:
        pax = self._pax[pax_id]
        self._walking.discard(pax_id)
        target = next_stop(pax.cursor, stop)
        if target == EXIT:
            pax.status = "exited"
            pax.t_exit = self.now
            self._account_exit(pax)
            return
        if target == stop:
            route = get_on(pax.cursor, stop)
            if route is None:
                raise SimulationError(f"passenger {pax_id} stranded at {stop!r}")
            pax.status = "waiting"
            pax.wa_enter = self.now
            self._queues.setdefault((stop, route), deque()).append(pax_id)
            return
        walk = self.graph.walk_minutes(stop, target)
        if walk is None:
            raise SimulationError(f"plan walks unlinked stops {stop!r} -> {target!r}")
        pax.status = "walking"
        self._walking.add(pax_id)
        self._push(self.now + walk, ("pax_decide", pax_id, target))

    def _bus_arrive(self, bus_id: int) -> None:
        bus = self._buses[bus_id]
        route = self.cfg.routes[bus.route_idx]
        stop = route.stops[bus.pos]

        staying: list[int] = []
        unloaded = 0
        for pax_id in bus.onboard:
            pax = self._pax[pax_id]
            if get_off(pax.cursor, stop):
                unloaded += 1
                t_board, _ = pax.boardings[-1]
                if self.now < t_board - 1e-9:
                    self.result.invariant_violations += 1
                pax.boardings[-1] = (t_board, self.now)
                pax.cursor.leg_index += 1
                self._pax_decide(pax_id, stop)
            else:
                staying.append(pax_id)
        bus.onboard = staying

        loaded = self._load(bus, stop, route)
        bus.moved_this_stop = unloaded + loaded
        dwell = self.cfg.dwell.dwell(bus.moved_this_stop, stop in self.cfg.hub_stops)
        self._push(self.now + dwell, ("bus_depart", bus_id))

    def _load(self, bus: BusState, stop: str, route: ServiceRoute) -> int:
        queue = self._queues.get((stop, route.name))
        loaded = 0
        while queue and len(bus.onboard) < route.capacity:
            pax_id = queue.popleft()
            pax = self._pax[pax_id]
            pax.status = "onboard"
            bus.onboard.append(pax_id)
            bus.pending_boarders.append(pax_id)
            loaded += 1
            if self.result.boarding_log is not None:
                self.result.boarding_log.append((stop, route.name, pax.wa_enter))
        if len(bus.onboard) > route.capacity:
            raise SimulationInvariantError(
                f"capacity exceeded on {route.name}: {len(bus.onboard)}/{route.capacity}"
            )
        return loaded

    def _bus_depart(self, bus_id: int) -> None:
        bus = self._buses[bus_id]
        route = self.cfg.routes[bus.route_idx]
        stop = route.stops[bus.pos]

        # late arrivals board at departure without re-opening the dwell
        self._load(bus, stop, route)
        for pax_id in bus.pending_boarders:
            self._pax[pax_id].boardings.append((self.now, None))
        bus.pending_boarders.clear()

        self.result.util_samples.setdefault(route.name, [0.0, 0.0, 0.0])
        cell = self.result.util_samples[route.name]
        util = len(bus.onboard) / route.capacity
        cell[0] += 1
        cell[1] += util
        if util >= 0.75:
            cell[2] += 1

        leg = route.leg_minutes[bus.pos]
        bus.pos = (bus.pos + 1) % len(route.stops)
        self._push(self.now + leg, ("bus_arrive", bus_id))

    # -- accounting ---------------------------------------------------------------

    def _account_exit(self, pax: PassengerState) -> None:
        res = self.result
        res.exited += 1
        total = pax.t_exit - pax.t_arrival
        onbus = 0.0
        for t_board, t_alight in pax.boardings:
            if t_alight is None or t_alight < t_board - 1e-9:
                res.invariant_violations += 1
                continue
            onbus += t_alight - t_board
        wait = total - onbus
        if total < -1e-9 or wait < -1e-9:
            res.invariant_violations += 1
        res.total_sum += total
        res.wait_sum += wait
        res.onbus_sum += onbus
        res.transfers_sum += pax.transfers_taken
        if pax.transfers_taken > 0:
            res.with_transfer += 1
        res.hist_counts[histogram_bin(wait)] += 1
        res.wait_all_sum += wait
        res.wait_all_count += 1

    def _finish(self) -> None:
        res = self.result
        horizon = self.cfg.horizon
        for pax in self._pax.values():
            if pax.status == "exited":
                continue
            if pax.status == "waiting":
                res.waiting_at_end += 1
                if pax.wa_enter is not None:
                    res.wait_all_sum += horizon - pax.wa_enter
                    res.wait_all_count += 1
            elif pax.status == "walking":
                res.walking_at_end += 1
            elif pax.status == "onboard":
                res.onboard_at_end += 1
        balance = res.exited + res.waiting_at_end + res.walking_at_end + res.onboard_at_end
        # passengers whose arrival event lies beyond the horizon never entered
        not_entered = sum(1 for p in self._pax.values()
                          if p.status == "new" and p.t_arrival > horizon)
        if balance + not_entered != res.created:
            raise SimulationInvariantError(
                f"conservation broke: created={res.created} accounted={balance + not_entered}"
            )
