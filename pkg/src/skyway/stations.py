"""Recharging-pad occupancy from background traffic.

Each station has ``pads`` pads; each pad carries a sorted list of disjoint
busy intervals (absolute hours). The planned drone never reserves pads: it
only queries for the earliest window in which one pad stays free for a whole
recharge.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .network import NetworkFormatError, SkywayNetwork, describe_json_error

FORMAT = "skyway-sched/1"


class NoPadsError(ValueError):
    def __init__(self, station: int):
        self.station = station
        super().__init__(f"node {station} has no recharging pads")


class BusyInterval(NamedTuple):
    start: float
    end: float


def _check_pad(intervals) -> tuple[BusyInterval, ...]:
    pad = tuple(BusyInterval(float(s), float(e)) for s, e in intervals)
    for k, iv in enumerate(pad):
        if not iv.start < iv.end:
            raise ValueError(f"busy interval {iv} is empty or reversed")
        if k and pad[k - 1].end > iv.start:
            raise ValueError(f"busy intervals {pad[k - 1]} and {iv} overlap or are unsorted")
    return pad


@dataclass(frozen=True)
class OccupancySchedule:
    """Busy intervals per pad, keyed by station id. Every pad-bearing station
    of the network must be listed, with one (possibly empty) entry per pad."""

    stations: dict[int, tuple[tuple[BusyInterval, ...], ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {
            int(sid): tuple(_check_pad(p) for p in pads) for sid, pads in self.stations.items()
        }
        object.__setattr__(self, "stations", clean)

    def pads(self, station: int) -> tuple[tuple[BusyInterval, ...], ...]:
        return self.stations.get(station, ())

    def validate_against(self, net: SkywayNetwork) -> None:
        for node in net.nodes:
            if node.pads and node.id not in self.stations:
                raise ValueError(f"station {node.id} missing from schedule")
        for sid, pads in self.stations.items():
            if sid not in net:
                raise ValueError(f"schedule names unknown station {sid}")
            if len(pads) != net.node(sid).pads:
                raise ValueError(
                    f"station {sid}: schedule has {len(pads)} pads, network has {net.node(sid).pads}"
                )

    def with_interval(self, station: int, pad: int, interval: tuple[float, float]) -> "OccupancySchedule":
        """Copy with one more busy interval (merged into the pad's timeline)."""
        stations = dict(self.stations)
        pads = [list(p) for p in stations[station]]
        merged = sorted(pads[pad] + [BusyInterval(*interval)])
        out: list[BusyInterval] = []
        for iv in merged:
            if out and iv.start <= out[-1].end:
                out[-1] = BusyInterval(out[-1].start, max(out[-1].end, iv.end))
            else:
                out.append(iv)
        pads[pad] = out
        stations[station] = tuple(tuple(p) for p in pads)
        return OccupancySchedule(stations)


def empty_schedule(net: SkywayNetwork) -> OccupancySchedule:
    return OccupancySchedule({n.id: tuple(() for _ in range(n.pads)) for n in net.nodes if n.pads})


def _pad_ready(pad: tuple[BusyInterval, ...], arrival: float, duration: float) -> float:
    t = arrival
    for iv in pad:
        if iv.end <= t:
            continue
        if iv.start >= t + duration:
            break
        t = iv.end
    return t


def ready_time(
    sched: OccupancySchedule,
    station: int,
    arrival: float,
    recharge_duration: float,
) -> tuple[float, float]:
    """(start, depart) of the earliest recharge at ``station`` not before ``arrival``."""
    pads = sched.pads(station)
    if not pads:
        raise NoPadsError(station)
    start = min(_pad_ready(p, arrival, recharge_duration) for p in pads)
    return start, start + recharge_duration


def generate_schedule(
    net: SkywayNetwork,
    horizon: float = 24.0,
    load_factor: float = 0.5,
    seed: int = 0,
    recharge_duration: float = 2.15,
) -> OccupancySchedule:
    """Background congestion: busy intervals of one recharge each, dropped at
    uniformly random positions on every pad so that each pad is busy for about
    ``load_factor`` of ``[0, horizon]``."""
    if not 0.0 <= load_factor <= 1.0:
        raise ValueError("load_factor must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    stations = {}
    for node in net.nodes:
        if not node.pads:
            continue
        pads = []
        for _ in range(node.pads):
            target = load_factor * horizon / recharge_duration
            k = int(math.floor(target))
            if rng.random() < target - k:
                k += 1
            k = min(k, int(horizon // recharge_duration))
            slack = horizon - k * recharge_duration
            # uniform order statistics: Poisson arrivals conditioned on k
            offsets = np.sort(rng.uniform(0.0, slack, size=k))
            pads.append(
                tuple(
                    BusyInterval(float(o + i * recharge_duration), float(o + (i + 1) * recharge_duration))
                    for i, o in enumerate(offsets)
                )
            )
        stations[node.id] = tuple(pads)
    return OccupancySchedule(stations)


def schedule_to_dict(sched: OccupancySchedule) -> dict:
    return {
        "format": FORMAT,
        "stations": {
            str(sid): [[{"start": iv.start, "end": iv.end} for iv in pad] for pad in pads]
            for sid, pads in sorted(sched.stations.items())
        },
    }


def schedule_from_dict(doc: dict) -> OccupancySchedule:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise NetworkFormatError(f"expected format {FORMAT!r}", "format")
    raw = doc.get("stations")
    if not isinstance(raw, dict):
        raise NetworkFormatError("missing or malformed", "stations")
    stations = {}
    for sid, pads in raw.items():
        where = f"stations.{sid}"
        try:
            stations[int(sid)] = tuple(
                tuple((iv["start"], iv["end"]) for iv in pad) for pad in pads
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"malformed pad list ({exc})", where) from exc
    try:
        return OccupancySchedule(stations)
    except ValueError as exc:
        raise NetworkFormatError(str(exc), "stations") from exc


def save_schedule(sched: OccupancySchedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule_to_dict(sched), indent=1) + "\n")


def load_schedule(path: str | Path) -> OccupancySchedule:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise describe_json_error(text, exc, ("format", "stations")) from exc
    return schedule_from_dict(doc)
