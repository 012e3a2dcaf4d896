"""Graph-based heuristic composition of drone services.

Pipeline for one request: bearings from the source to every destination give
a covering sector; the sector induces a subgraph; per-destination earliest
routes are computed inside it; destination orders are then scored exactly and
the fastest plan wins. When the subgraph turns out too small the sector is
widened and the search repeated, up to the full network.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import permutations

from .drone import DroneSpec, OverloadError, Package
from .network import Sector, SkywayNetwork, induced_subgraph, sector_cover
from .plan import CompositionPlan, build_plan
from .search import InfeasiblePath, Label, SearchStats, SubPlan, leg_search, rcsp_query
from .stations import OccupancySchedule

MAX_DESTINATIONS = 8
TIE_TOL = 1e-9
CLOCK_QUANTUM = 1e-6


class RequestError(ValueError):
    """Delivery request inconsistent with the network or drone."""


class InfeasibleRequest(Exception):
    def __init__(self, message: str, reached: frozenset[int] = frozenset()):
        self.reached = reached
        super().__init__(message)


@dataclass(frozen=True)
class DeliveryRequest:
    src: int
    packages: tuple[Package, ...]
    depart_clock: float = 0.0
    start_battery: float = 1.0

    @property
    def destinations(self) -> tuple[int, ...]:
        return tuple(p.destination for p in self.packages)

    @property
    def total_weight(self) -> float:
        return sum(p.weight for p in self.packages)


@dataclass(frozen=True)
class Margins:
    angle: float = math.pi / 12
    radius: float = 0.1


@dataclass
class Diagnostics:
    algorithm: str
    subgraph_nodes: int = 0
    subgraph_segments: int = 0
    widening_rounds: int = 0
    labels_expanded: int = 0
    searches: int = 0
    orders_evaluated: int = 0
    wall_clock: float = 0.0
    sector: Sector | None = None
    per_destination_arrival: dict[int, float | None] = field(default_factory=dict)


def validate_request(net: SkywayNetwork, spec: DroneSpec, request: DeliveryRequest) -> None:
    if request.src not in net:
        raise RequestError(f"unknown source node {request.src}")
    dsts = request.destinations
    if not dsts:
        raise RequestError("request has no packages")
    if len(dsts) > MAX_DESTINATIONS:
        raise RequestError(f"at most {MAX_DESTINATIONS} destinations supported")
    for d in dsts:
        if d not in net:
            raise RequestError(f"unknown destination node {d}")
    if len(set(dsts)) != len(dsts):
        raise RequestError("destinations must be distinct")
    if request.src in dsts:
        raise RequestError("source cannot also be a destination")
    if request.total_weight > spec.max_payload:
        raise OverloadError(request.total_weight, spec.max_payload)
    if not 0.0 <= request.start_battery <= 1.0:
        raise RequestError("start_battery must lie in [0, 1]")


class CostMatrix:
    """Lazily filled delivery-time matrix over the key nodes (source and
    destinations).

    ``entry(i, j, clock, payload)`` is the earliest arrival at ``j`` leaving
    ``i`` at ``clock``, memoised on a quantised clock. ``frontier(prefix)``
    holds, for a prefix of a destination order, every non-dominated
    (clock, battery) state right after the last drop of that prefix; these are
    what plans are chained from.
    """

    def __init__(self, view, sched, spec, request, stats: SearchStats | None = None):
        self.view = view
        self.sched = sched
        self.spec = spec
        self.request = request
        self.stats = stats if stats is not None else SearchStats()
        self.key_nodes = (request.src,) + request.destinations
        self._entries: dict[tuple, SubPlan | None] = {}
        self._frontiers: dict[tuple[int, ...], list[Label]] = {
            (): [Label(request.src, request.depart_clock, request.start_battery)]
        }
        self._weights = {p.destination: p.weight for p in request.packages}
        self._index = {p.destination: k for k, p in enumerate(request.packages)}

    def payload_after(self, prefix: tuple[int, ...]) -> float:
        return self.request.total_weight - sum(self._weights[d] for d in prefix)

    def entry(self, i: int, j: int, start_clock: float, payload: float, start_battery: float = 1.0) -> SubPlan:
        if i == j:
            return SubPlan(i, j, start_clock, start_clock, start_battery, [])
        key = (i, j, round(start_clock / CLOCK_QUANTUM), start_battery, payload)
        if key not in self._entries:
            try:
                self._entries[key] = rcsp_query(
                    self.view, self.sched, self.spec, payload, i, j, start_clock, start_battery, self.stats
                )
            except InfeasiblePath:
                self._entries[key] = None
        sub = self._entries[key]
        if sub is None:
            raise InfeasiblePath(i, j, frozenset())
        return sub

    def frontier(self, prefix: tuple[int, ...], final: bool = False) -> list[Label]:
        if prefix in self._frontiers:
            return self._frontiers[prefix]
        seeds = self.frontier(prefix[:-1])
        dst = prefix[-1]
        out: list[Label] = []
        if seeds:
            arrived = leg_search(
                self.view,
                self.sched,
                self.spec,
                self.payload_after(prefix[:-1]),
                seeds,
                dst,
                earliest_only=final,
                stats=self.stats,
            )
            h = self.spec.drop_handling_time
            pkg = self._index[dst]
            out = [Label(dst, lab.clock + h, lab.battery, lab, "drop", pkg) for lab in arrived]
        self._frontiers[prefix] = out
        return out


def build_cost_matrix(view, sched, spec, request, stats: SearchStats | None = None) -> CostMatrix:
    missing = [k for k in (request.src,) + request.destinations if k not in view]
    if missing:
        raise RequestError(f"key nodes {missing} not in view")
    return CostMatrix(view, sched, spec, request, stats)


def best_plan(
    view: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    request: DeliveryRequest,
    matrix: CostMatrix | None = None,
    diagnostics: Diagnostics | None = None,
) -> CompositionPlan:
    """Score every destination order exactly; keep the fastest.

    Ties (within 1e-9 h) go to the lexicographically smallest order.
    """
    if len(request.destinations) > MAX_DESTINATIONS:
        raise RequestError(f"at most {MAX_DESTINATIONS} destinations supported")
    if matrix is None:
        matrix = build_cost_matrix(view, sched, spec, request)
    best: Label | None = None
    evaluated = 0
    for order in sorted(permutations(request.destinations)):
        evaluated += 1
        for k in range(1, len(order)):
            if not matrix.frontier(order[:k]):
                break
        else:
            done = matrix.frontier(order, final=True)
            if done and (best is None or done[0].clock < best.clock - TIE_TOL):
                best = done[0]
    if diagnostics is not None:
        diagnostics.orders_evaluated += evaluated
    if best is None:
        raise InfeasibleRequest("no destination order admits a feasible plan")
    return build_plan(
        request.src, request.depart_clock, request.start_battery, request.packages, best.steps()
    )


def _finish(diag: Diagnostics, stats: SearchStats, t0: float) -> None:
    diag.labels_expanded = stats.labels_expanded
    diag.searches = stats.searches
    diag.wall_clock = time.perf_counter() - t0


def compose_heuristic(
    net: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    request: DeliveryRequest,
    margins: Margins = Margins(),
) -> tuple[CompositionPlan, Diagnostics]:
    t0 = time.perf_counter()
    validate_request(net, spec, request)
    diag = Diagnostics("heuristic")
    stats = SearchStats()
    src = net.node(request.src)
    dst_nodes = [net.node(d) for d in request.destinations]
    forced = {request.src, *request.destinations}
    angle, radius = margins.angle, margins.radius
    tried: set[frozenset[int]] = set()
    full_ids = frozenset(net.node_ids)

    while True:
        sector = sector_cover(src, dst_nodes, angle, radius)
        view = induced_subgraph(net, lambda n: sector.contains(n.x, n.y), forced)
        ids = frozenset(view.node_ids)
        full = ids == full_ids
        if full:
            view = net
        if ids not in tried:
            tried.add(ids)
            diag.sector = sector
            diag.subgraph_nodes = len(view.nodes)
            diag.subgraph_segments = len(view.segments)
            matrix = build_cost_matrix(view, sched, spec, request, stats)
            # one route per destination with the full load aboard; the earliest
            # label of each first-leg frontier is that destination's fastest route
            single = len(request.destinations) == 1
            linked = view.component(request.src)
            arrivals: dict[int, float | None] = {}
            for d in request.destinations:
                if d not in linked:
                    arrivals[d] = None
                    continue
                first_leg = matrix.frontier((d,), final=single)
                arrivals[d] = first_leg[0].parent.clock if first_leg else None
                if arrivals[d] is None and not full:
                    break
            diag.per_destination_arrival = arrivals
            if full or all(arrivals.get(d) is not None for d in request.destinations):
                try:
                    plan = best_plan(view, sched, spec, request, matrix, diag)
                    _finish(diag, stats, t0)
                    return plan, diag
                except InfeasibleRequest:
                    if full:
                        _finish(diag, stats, t0)
                        raise
        elif full:
            raise InfeasibleRequest("no feasible plan on the full network")
        angle *= 2.0
        radius += 0.1
        diag.widening_rounds += 1
