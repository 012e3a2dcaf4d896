"""Composition plans: alternating node events and service invocations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .drone import Package
from .network import NetworkFormatError, SkywaySegment, describe_json_error

FORMAT = "skyway-plan/1"


@dataclass(frozen=True)
class ServiceInvocation:
    segment: SkywaySegment
    origin: int
    target: int
    depart: float
    arrive: float
    battery_after: float


@dataclass(frozen=True)
class NodeEvent:
    """What the drone does on the ground at one node.

    A drop completes ``drop_handling_time`` after ``clock_in``; a recharge then
    waits for a free pad from that moment and leaves at ``clock_out``.
    """

    node: int
    clock_in: float
    clock_out: float
    battery_in: float
    battery_out: float
    dropped: tuple[int, ...] = ()
    recharge_start: float | None = None
    wait: float = 0.0

    @property
    def recharged(self) -> bool:
        return self.recharge_start is not None

    @property
    def kind(self) -> str:
        if self.dropped and self.recharged:
            return "drop+recharge"
        if self.dropped:
            return "drop"
        if self.recharged:
            return "recharge"
        return "pass"


Leg = Union[NodeEvent, ServiceInvocation]


@dataclass(frozen=True)
class CompositionPlan:
    src: int
    depart_clock: float
    packages: tuple[Package, ...]
    legs: tuple[Leg, ...]
    delivery_time: float
    per_destination_arrival: dict[int, float] = field(default_factory=dict)

    @property
    def events(self) -> list[NodeEvent]:
        return [leg for leg in self.legs if isinstance(leg, NodeEvent)]

    @property
    def invocations(self) -> list[ServiceInvocation]:
        return [leg for leg in self.legs if isinstance(leg, ServiceInvocation)]

    @property
    def node_sequence(self) -> tuple[int, ...]:
        return tuple(e.node for e in self.events)

    @property
    def drop_order(self) -> tuple[int, ...]:
        return tuple(e.node for e in self.events if e.dropped)

    @property
    def recharge_count(self) -> int:
        return sum(1 for e in self.events if e.recharged)

    @property
    def total_wait(self) -> float:
        return sum(e.wait for e in self.events)

    @property
    def flight_km(self) -> float:
        return sum(inv.segment.length for inv in self.invocations)


# A raw timeline is a list of steps produced by a planner:
#   ("fly", segment, origin, target, depart, arrive, battery_after)
#   ("charge", node, clock_in, start, depart)
#   ("drop", node, package_index, clock_in, clock_out)


def build_plan(
    src: int,
    depart_clock: float,
    start_battery: float,
    packages: tuple[Package, ...],
    steps: list[tuple],
) -> CompositionPlan:
    legs: list[Leg] = []
    node, clock, battery = src, depart_clock, start_battery
    ev = dict(node=node, clock_in=clock, battery_in=battery, dropped=[], recharge_start=None, wait=0.0)

    def close(clock_out, battery_out):
        legs.append(
            NodeEvent(
                node=ev["node"],
                clock_in=ev["clock_in"],
                clock_out=clock_out,
                battery_in=ev["battery_in"],
                battery_out=battery_out,
                dropped=tuple(ev["dropped"]),
                recharge_start=ev["recharge_start"],
                wait=ev["wait"],
            )
        )

    arrivals: dict[int, float] = {}
    for step in steps:
        kind = step[0]
        if kind == "fly":
            _, seg, origin, target, dep, arr, batt = step
            close(dep, battery)
            legs.append(ServiceInvocation(seg, origin, target, dep, arr, batt))
            node, clock, battery = target, arr, batt
            ev = dict(node=node, clock_in=arr, battery_in=batt, dropped=[], recharge_start=None, wait=0.0)
        elif kind == "charge":
            _, at, ready_from, start, dep = step
            ev["recharge_start"] = start
            ev["wait"] = start - ready_from
            clock, battery = dep, 1.0
        elif kind == "drop":
            _, at, pkg, clock_in, clock_out = step
            ev["dropped"].append(pkg)
            arrivals[packages[pkg].destination] = clock_out
            clock = clock_out
        else:
            raise ValueError(f"unknown step kind {kind!r}")
    close(clock, battery)
    delivery = (max(arrivals.values()) - depart_clock) if arrivals else 0.0
    return CompositionPlan(src, depart_clock, tuple(packages), tuple(legs), delivery, arrivals)


def plan_to_dict(plan: CompositionPlan) -> dict:
    legs = []
    for leg in plan.legs:
        if isinstance(leg, NodeEvent):
            legs.append(
                {
                    "type": "event",
                    "node": leg.node,
                    "kind": leg.kind,
                    "clock_in": leg.clock_in,
                    "clock_out": leg.clock_out,
                    "battery_in": leg.battery_in,
                    "battery_out": leg.battery_out,
                    "dropped": list(leg.dropped),
                    "recharge_start": leg.recharge_start,
                    "wait": leg.wait,
                }
            )
        else:
            legs.append(
                {
                    "type": "service",
                    "from": leg.origin,
                    "to": leg.target,
                    "length_km": leg.segment.length,
                    "depart": leg.depart,
                    "arrive": leg.arrive,
                    "battery_after": leg.battery_after,
                }
            )
    return {
        "format": FORMAT,
        "src": plan.src,
        "depart_clock": plan.depart_clock,
        "packages": [{"weight": p.weight, "destination": p.destination} for p in plan.packages],
        "delivery_time": plan.delivery_time,
        "per_destination_arrival": {str(k): v for k, v in sorted(plan.per_destination_arrival.items())},
        "legs": legs,
    }


def plan_from_dict(doc: dict) -> CompositionPlan:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise NetworkFormatError(f"expected format {FORMAT!r}", "format")
    try:
        packages = tuple(Package(p["weight"], p["destination"]) for p in doc["packages"])
        legs: list[Leg] = []
        for k, raw in enumerate(doc["legs"]):
            if raw["type"] == "event":
                legs.append(
                    NodeEvent(
                        node=raw["node"],
                        clock_in=raw["clock_in"],
                        clock_out=raw["clock_out"],
                        battery_in=raw["battery_in"],
                        battery_out=raw["battery_out"],
                        dropped=tuple(raw["dropped"]),
                        recharge_start=raw["recharge_start"],
                        wait=raw["wait"],
                    )
                )
            elif raw["type"] == "service":
                a, b = raw["from"], raw["to"]
                seg = SkywaySegment(min(a, b), max(a, b), raw["length_km"])
                legs.append(
                    ServiceInvocation(seg, a, b, raw["depart"], raw["arrive"], raw["battery_after"])
                )
            else:
                raise NetworkFormatError(f"unknown leg type {raw['type']!r}", f"legs[{k}]")
        return CompositionPlan(
            src=doc["src"],
            depart_clock=doc["depart_clock"],
            packages=packages,
            legs=tuple(legs),
            delivery_time=doc["delivery_time"],
            per_destination_arrival={int(k): v for k, v in doc["per_destination_arrival"].items()},
        )
    except (KeyError, TypeError) as exc:
        raise NetworkFormatError(f"malformed plan ({exc!r})", "legs") from exc


def dump_plan(plan: CompositionPlan) -> str:
    return json.dumps(plan_to_dict(plan), indent=1) + "\n"


def save_plan(plan: CompositionPlan, path: str | Path) -> None:
    Path(path).write_text(dump_plan(plan))


def load_plan(path: str | Path) -> CompositionPlan:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise describe_json_error(text, exc, ("format", "src", "packages", "legs")) from exc
    return plan_from_dict(doc)
