"""Time-dependent, battery-constrained label-setting search.

A label is a state (node, clock, battery) reached by a concrete sequence of
flights, recharges and drops. Labels at the same node are pruned by Pareto
dominance: earlier-or-equal clock and at-least-as-much battery. This is exact
because pad waiting is FIFO (arriving later never lets a recharge finish
earlier) and a recharge always refills to 1.0.

At every pad-bearing node the search branches on landing to recharge versus
flying on, so the recharge strategy is optimised jointly with the route.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .drone import DroneSpec, can_fly, consume, travel_time
from .network import SkywayNetwork
from .stations import OccupancySchedule, ready_time

BATTERY_SLACK = 1e-9


class InfeasiblePath(Exception):
    """No battery-feasible route between two nodes."""

    def __init__(self, origin: int, target: int, reached: frozenset[int]):
        self.origin = origin
        self.target = target
        self.reached = reached
        super().__init__(f"no feasible path {origin} -> {target} (reached {len(reached)} nodes)")


@dataclass
class SearchStats:
    searches: int = 0
    labels_expanded: int = 0
    labels_created: int = 0


class Label:
    __slots__ = ("node", "clock", "battery", "parent", "op", "info", "dead")

    def __init__(self, node, clock, battery, parent=None, op="start", info=None):
        self.node = node
        self.clock = clock
        self.battery = battery
        self.parent = parent
        self.op = op
        self.info = info
        self.dead = False

    def __repr__(self):
        return f"Label(node={self.node}, clock={self.clock:.6f}, battery={self.battery:.6f}, op={self.op})"

    def steps(self) -> list[tuple]:
        """Raw timeline (see plan.build_plan) from the root label to this one."""
        chain = []
        lab = self
        while lab.parent is not None:
            chain.append(lab)
            lab = lab.parent
        out = []
        for lab in reversed(chain):
            prev = lab.parent
            if lab.op == "fly":
                seg = lab.info
                out.append(("fly", seg, prev.node, lab.node, prev.clock, lab.clock, lab.battery))
            elif lab.op == "charge":
                out.append(("charge", lab.node, prev.clock, lab.info, lab.clock))
            elif lab.op == "drop":
                out.append(("drop", lab.node, lab.info, prev.clock, lab.clock))
        return out

    def root(self) -> "Label":
        lab = self
        while lab.parent is not None:
            lab = lab.parent
        return lab


def dominates(a: Label, b: Label) -> bool:
    return a.clock <= b.clock and a.battery >= b.battery - BATTERY_SLACK


def leg_search(
    view: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    payload: float,
    seeds: list[Label],
    target: int,
    *,
    earliest_only: bool = False,
    stats: SearchStats | None = None,
    deadline: float = float("inf"),
) -> list[Label]:
    """Non-dominated labels reaching ``target`` from any of ``seeds``.

    The search stops at ``target``: labels are never extended past it. With
    ``earliest_only`` the first label popped at the target is returned alone.
    Labels whose clock exceeds ``deadline`` are discarded. Result is sorted by
    clock, then by decreasing battery.
    """
    if stats is None:
        stats = SearchStats()
    stats.searches += 1
    heap: list = []
    buckets: dict[int, list[Label]] = {}
    tie = itertools.count()
    full_at_target = float("inf")

    def push(lab: Label) -> None:
        if lab.clock > deadline:
            return
        bucket = buckets.get(lab.node)
        if bucket is None:
            buckets[lab.node] = [lab]
        else:
            for other in bucket:
                if dominates(other, lab):
                    return
            keep = []
            for other in bucket:
                if dominates(lab, other):
                    other.dead = True
                else:
                    keep.append(other)
            keep.append(lab)
            buckets[lab.node] = keep
        stats.labels_created += 1
        heapq.heappush(heap, (lab.clock, -lab.battery, next(tie), lab))

    for s in seeds:
        push(s)

    found: list[Label] = []
    recharge = spec.recharge_duration
    while heap:
        clock, _, _, lab = heapq.heappop(heap)
        if lab.dead:
            continue
        if clock >= full_at_target:
            # a full-battery arrival at the target already dominates anything later
            break
        if lab.node == target:
            found.append(lab)
            if earliest_only:
                return found
            if lab.battery >= 1.0 - BATTERY_SLACK:
                full_at_target = clock
            continue
        stats.labels_expanded += 1
        node = view.node(lab.node)
        if node.pads > 0 and lab.battery < 1.0 and lab.op != "charge":
            start, depart = ready_time(sched, node.id, clock, recharge)
            push(Label(node.id, depart, 1.0, lab, "charge", start))
        for nbr, seg in view.neighbors(lab.node):
            if can_fly(spec, lab.battery, payload, seg.length):
                push(
                    Label(
                        nbr,
                        clock + travel_time(spec, seg.length),
                        consume(spec, lab.battery, payload, seg.length),
                        lab,
                        "fly",
                        seg,
                    )
                )
    if not found:
        return []
    alive = [lab for lab in found if not lab.dead]
    alive.sort(key=lambda lab: (lab.clock, -lab.battery))
    return alive


def reached_nodes(
    view: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    payload: float,
    seeds: list[Label],
) -> frozenset[int]:
    """Nodes any label can reach from ``seeds`` (diagnostics for infeasibility)."""
    seen = {s.node for s in seeds}
    stack = [(s.node, s.battery) for s in seeds]
    best: dict[int, float] = {}
    while stack:
        u, b = stack.pop()
        if best.get(u, -1.0) >= b:
            continue
        best[u] = b
        if view.node(u).pads:
            b = 1.0
        for v, seg in view.neighbors(u):
            if can_fly(spec, b, payload, seg.length):
                seen.add(v)
                stack.append((v, consume(spec, b, payload, seg.length)))
    return frozenset(seen)


@dataclass
class SubPlan:
    origin: int
    target: int
    start_clock: float
    arrival: float
    battery: float
    steps: list[tuple] = field(default_factory=list)

    @property
    def nodes(self) -> list[int]:
        return [self.origin] + [s[3] for s in self.steps if s[0] == "fly"]

    @property
    def recharges(self) -> int:
        return sum(1 for s in self.steps if s[0] == "charge")


def rcsp_query(
    view: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
    payload: float,
    origin: int,
    target: int,
    start_clock: float = 0.0,
    start_battery: float = 1.0,
    stats: SearchStats | None = None,
) -> SubPlan:
    """Earliest-arrival battery-feasible route from ``origin`` to ``target``."""
    if origin not in view or target not in view:
        raise KeyError(f"node {origin if origin not in view else target} not in view")
    if origin == target:
        return SubPlan(origin, target, start_clock, start_clock, start_battery, [])
    seed = Label(origin, start_clock, start_battery)
    found = leg_search(view, sched, spec, payload, [seed], target, earliest_only=True, stats=stats)
    if not found:
        raise InfeasiblePath(origin, target, reached_nodes(view, sched, spec, payload, [seed]))
    best = found[0]
    return SubPlan(origin, target, start_clock, best.clock, best.battery, best.steps())
