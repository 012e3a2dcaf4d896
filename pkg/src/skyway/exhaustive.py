"""Exhaustive baseline composer and a brute-force oracle for tiny instances."""
from __future__ import annotations

import time
from itertools import permutations

from .composer import (
    DeliveryRequest,
    Diagnostics,
    InfeasibleRequest,
    best_plan,
    build_cost_matrix,
    validate_request,
)
from .drone import DroneSpec, can_fly, consume, travel_time
from .network import SkywayNetwork
from .plan import CompositionPlan, build_plan
from .search import SearchStats
from .stations import OccupancySchedule, ready_time

ORACLE_MAX_NODES = 7
ORACLE_MAX_DESTINATIONS = 2


def compose_exhaustive(
    net: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    request: DeliveryRequest,
) -> tuple[CompositionPlan, Diagnostics]:
    """Same engine as the heuristic, run on every node and segment."""
    t0 = time.perf_counter()
    validate_request(net, spec, request)
    diag = Diagnostics("exhaustive", subgraph_nodes=len(net.nodes), subgraph_segments=len(net.segments))
    stats = SearchStats()
    matrix = build_cost_matrix(net, sched, spec, request, stats)
    try:
        plan = best_plan(net, sched, spec, request, matrix, diag)
    finally:
        diag.labels_expanded = stats.labels_expanded
        diag.searches = stats.searches
        diag.wall_clock = time.perf_counter() - t0
    return plan, diag


class InstanceTooLarge(ValueError):
    pass


def brute_force_oracle(
    net: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    request: DeliveryRequest,
) -> CompositionPlan:
    """Enumerate every candidate plan and simulate it.

    Candidates: every destination order; within each leg, any walk that is
    simple between consecutive recharges and recharges at most once per
    station. Longer walks only revisit a node later with less battery, so
    they can never arrive sooner. Only a branch-and-bound cut on an
    admissible straight-line lower bound is applied.
    """
    if len(net.nodes) > ORACLE_MAX_NODES:
        raise InstanceTooLarge(f"oracle limited to {ORACLE_MAX_NODES} nodes")
    if len(request.packages) > ORACLE_MAX_DESTINATIONS:
        raise InstanceTooLarge(f"oracle limited to {ORACLE_MAX_DESTINATIONS} destinations")
    validate_request(net, spec, request)

    h = spec.drop_handling_time
    speed = spec.cruise_speed
    index = {p.destination: k for k, p in enumerate(request.packages)}
    best = {"t": None, "seq": None, "steps": None}

    def record(t, seq, steps):
        if (
            best["t"] is None
            or t < best["t"]
            or (t == best["t"] and tuple(seq) < best["seq"])
        ):
            best.update(t=t, seq=tuple(seq), steps=list(steps))

    for order in sorted(permutations(request.destinations)):
        K = len(order)
        payloads = []
        load = request.total_weight
        for d in order:
            payloads.append(load)
            load -= request.packages[index[d]].weight
        # straight-line distance still to fly after reaching order[k]
        tail = [0.0] * K
        for k in range(K - 2, -1, -1):
            tail[k] = tail[k + 1] + net.distance(order[k], order[k + 1])

        steps: list[tuple] = []
        seq: list[int] = [request.src]

        def dfs(node, clock, battery, leg, visited, charged):
            if best["t"] is not None:
                bound = clock + (net.distance(node, order[leg]) + tail[leg]) / speed + h * (K - leg)
                if bound - request.depart_clock > best["t"] + 1e-9:
                    return
            payload = payloads[leg]
            for nbr, seg in net.neighbors(node):
                if nbr in visited or not can_fly(spec, battery, payload, seg.length):
                    continue
                b2 = consume(spec, battery, payload, seg.length)
                t2 = clock + travel_time(spec, seg.length)
                steps.append(("fly", seg, node, nbr, clock, t2, b2))
                seq.append(nbr)
                if nbr == order[leg]:
                    t3 = t2 + h
                    steps.append(("drop", nbr, index[nbr], t2, t3))
                    if leg + 1 == K:
                        record(t3 - request.depart_clock, seq, steps)
                    else:
                        dfs(nbr, t3, b2, leg + 1, {nbr}, frozenset())
                    steps.pop()
                else:
                    dfs(nbr, t2, b2, leg, visited | {nbr}, charged)
                seq.pop()
                steps.pop()
            if net.node(node).pads > 0 and battery < 1.0 and node not in charged:
                start, depart = ready_time(sched, node, clock, spec.recharge_duration)
                steps.append(("charge", node, clock, start, depart))
                dfs(node, depart, 1.0, leg, {node}, charged | {node})
                steps.pop()

        dfs(request.src, request.depart_clock, request.start_battery, 0, {request.src}, frozenset())

    if best["t"] is None:
        raise InfeasibleRequest("oracle found no feasible plan")
    return build_plan(
        request.src, request.depart_clock, request.start_battery, request.packages, best["steps"]
    )
