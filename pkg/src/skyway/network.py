"""Skyway network model: nodes, segments, planar geometry and file I/O.

Coordinates are planar kilometres. Every segment is an undirected drone
service between two nodes; its length is always the Euclidean distance
between the endpoints and is recomputed on load rather than trusted.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from networkx.utils import UnionFind

TWO_PI = 2.0 * math.pi
FORMAT = "skyway-net/1"
LENGTH_TOL = 1e-9


class NetworkError(ValueError):
    """Invalid network structure or generation parameters."""


class NetworkFormatError(NetworkError):
    """Malformed network file. ``where`` names the offending section/field."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    pads: int = 0

    @property
    def is_station(self) -> bool:
        return self.pads > 0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SkywaySegment:
    a: int
    b: int
    length: float

    def other(self, node: int) -> int:
        return self.b if node == self.a else self.a

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.a, self.b), max(self.a, self.b))


@dataclass(frozen=True)
class Bounds:
    width: float
    height: float

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class Sector:
    origin: tuple[float, float]
    angle_lo: float
    angle_hi: float
    radius: float

    @property
    def width(self) -> float:
        return self.angle_hi - self.angle_lo

    @property
    def is_disc(self) -> bool:
        return self.width >= TWO_PI

    def contains_angle(self, theta: float) -> bool:
        if self.is_disc:
            return True
        offset = (theta - self.angle_lo) % TWO_PI
        return offset <= self.width + 1e-12 or offset >= TWO_PI - 1e-12

    def contains(self, x: float, y: float) -> bool:
        ox, oy = self.origin
        d = math.hypot(x - ox, y - oy)
        if d > self.radius:
            return False
        if d == 0.0:
            return True
        return self.contains_angle(bearing(self.origin, (x, y)))


@dataclass(frozen=True, eq=False)
class SkywayNetwork:
    """Immutable skyway graph. Subgraph views are instances of the same class
    holding a subset of nodes; node ids are never renumbered."""

    nodes: tuple[Node, ...]
    segments: tuple[SkywaySegment, ...]
    bounds: Bounds
    _by_id: dict[int, Node] = field(init=False, repr=False, compare=False)
    _adj: dict[int, tuple[tuple[int, SkywaySegment], ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        by_id = {n.id: n for n in self.nodes}
        adj: dict[int, list[tuple[int, SkywaySegment]]] = {n.id: [] for n in self.nodes}
        for seg in self.segments:
            adj[seg.a].append((seg.b, seg))
            adj[seg.b].append((seg.a, seg))
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(
            self, "_adj", {k: tuple(sorted(v, key=lambda t: t[0])) for k, v in adj.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, SkywayNetwork):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.segments == other.segments
            and self.bounds == other.bounds
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._by_id

    def node(self, node_id: int) -> Node:
        return self._by_id[node_id]

    @property
    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def neighbors(self, node_id: int) -> tuple[tuple[int, SkywaySegment], ...]:
        """(neighbour id, segment) pairs sorted by neighbour id."""
        return self._adj[node_id]

    def distance(self, a: int, b: int) -> float:
        return distance(self.node(a).position, self.node(b).position)

    def segment_between(self, a: int, b: int) -> SkywaySegment | None:
        for nbr, seg in self._adj.get(a, ()):
            if nbr == b:
                return seg
        return None

    def component(self, start: int) -> set[int]:
        """Ids of all nodes reachable from ``start`` ignoring battery limits."""
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        return len(self.component(self.nodes[0].id)) == len(self.nodes)

    def validate(self) -> None:
        """Check structural invariants; raise NetworkError on the first violation."""
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate node id")
        for n in self.nodes:
            if n.id < 0:
                raise NetworkError(f"node {n.id}: negative id")
            if n.pads < 0:
                raise NetworkError(f"node {n.id}: negative pad count")
            if not (math.isfinite(n.x) and math.isfinite(n.y)):
                raise NetworkError(f"node {n.id}: non-finite position")
            if not self.bounds.contains(n.x, n.y):
                raise NetworkError(f"node {n.id}: position outside bounds")
        seen = set()
        for seg in self.segments:
            if seg.a == seg.b:
                raise NetworkError(f"segment {seg.a}-{seg.b}: self loop")
            if seg.a not in self._by_id or seg.b not in self._by_id:
                raise NetworkError(f"segment {seg.a}-{seg.b}: unknown endpoint")
            if seg.key in seen:
                raise NetworkError(f"segment {seg.a}-{seg.b}: duplicate")
            seen.add(seg.key)
            expected = self.distance(seg.a, seg.b)
            if not seg.length > 0 or abs(seg.length - expected) > LENGTH_TOL:
                raise NetworkError(f"segment {seg.a}-{seg.b}: bad length {seg.length}")


def distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def bearing(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Counter-clockwise angle of q as seen from p, from the +x axis, in [0, 2pi)."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("bearing undefined for coincident points")
    theta = math.atan2(dy, dx)
    if theta < 0.0:
        theta += TWO_PI
    # atan2 of a tiny negative angle can round up to exactly 2pi
    return 0.0 if theta >= TWO_PI else theta


def make_segment(net_nodes: dict[int, Node], a: int, b: int) -> SkywaySegment:
    a, b = min(a, b), max(a, b)
    return SkywaySegment(a, b, distance(net_nodes[a].position, net_nodes[b].position))


def generate_network(
    n_nodes: int,
    bounds: tuple[float, float] | Bounds = (50.0, 50.0),
    max_segment_len: float = 15.0,
    pads_per_station: int = 4,
    seed: int = 0,
) -> SkywayNetwork:
    """Random geometric skyway network.

    Nodes are placed uniformly in ``bounds``; every pair closer than
    ``max_segment_len`` is joined. Components left over are then bridged with
    the shortest inter-component segments (Kruskal over components), so the
    result is always connected.
    """
    if n_nodes < 2:
        raise NetworkError("n_nodes must be at least 2")
    if not isinstance(bounds, Bounds):
        bounds = Bounds(float(bounds[0]), float(bounds[1]))
    if not (bounds.width > 0 and bounds.height > 0):
        raise NetworkError("bounds must be positive")
    if not max_segment_len > 0:
        raise NetworkError("max_segment_len must be positive")
    if pads_per_station < 0:
        raise NetworkError("pads_per_station must be non-negative")

    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, 1.0, size=(n_nodes, 2)) * np.array([bounds.width, bounds.height])
    nodes = tuple(
        Node(i, float(xy[i, 0]), float(xy[i, 1]), pads_per_station) for i in range(n_nodes)
    )
    by_id = {n.id: n for n in nodes}

    pairs = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            pairs.append((distance(nodes[i].position, nodes[j].position), i, j))
    pairs.sort()

    uf = UnionFind(range(n_nodes))
    chosen: list[tuple[int, int]] = []
    for d, i, j in pairs:
        if d <= max_segment_len and d > 0:
            chosen.append((i, j))
            uf.union(i, j)
    for d, i, j in pairs:
        if d > 0 and uf[i] != uf[j]:
            chosen.append((i, j))
            uf.union(i, j)

    segments = tuple(sorted((make_segment(by_id, i, j) for i, j in chosen), key=lambda s: s.key))
    net = SkywayNetwork(nodes, segments, bounds)
    if not net.is_connected():
        raise NetworkError("could not connect network (coincident nodes?)")
    return net


def sector_cover(
    src: Node,
    dsts: Iterable[Node],
    angle_margin: float = math.pi / 12,
    radius_margin: float = 0.1,
) -> Sector:
    """Smallest sector at ``src`` whose arc holds every destination bearing,
    widened by ``angle_margin`` each side and ``radius_margin`` outward."""
    dsts = list(dsts)
    if not dsts:
        raise ValueError("sector_cover needs at least one destination")
    origin = src.position
    angles = sorted(bearing(origin, d.position) for d in dsts)
    radius = max(distance(origin, d.position) for d in dsts) * (1.0 + radius_margin)

    # the minimal enclosing arc starts just after the widest angular gap
    best_gap, start = -1.0, angles[0]
    for k, a in enumerate(angles):
        nxt = angles[(k + 1) % len(angles)]
        gap = (nxt - a) % TWO_PI
        if len(angles) == 1:
            gap = TWO_PI
        if gap > best_gap:
            best_gap, start = gap, nxt
    arc = TWO_PI - best_gap

    if arc > TWO_PI - 2.0 * angle_margin:
        return Sector(origin, 0.0, TWO_PI, radius)
    lo = (start - angle_margin) % TWO_PI
    return Sector(origin, lo, lo + arc + 2.0 * angle_margin, radius)


def induced_subgraph(
    net: SkywayNetwork,
    keep: Callable[[Node], bool],
    forced: Iterable[int] = (),
) -> SkywayNetwork:
    forced = set(forced)
    missing = forced - set(net.node_ids)
    if missing:
        raise NetworkError(f"forced nodes not in network: {sorted(missing)}")
    nodes = tuple(n for n in net.nodes if n.id in forced or keep(n))
    kept = {n.id for n in nodes}
    segments = tuple(s for s in net.segments if s.a in kept and s.b in kept)
    return SkywayNetwork(nodes, segments, net.bounds)


def network_to_dict(net: SkywayNetwork) -> dict:
    return {
        "format": FORMAT,
        "bounds": {"width_km": net.bounds.width, "height_km": net.bounds.height},
        "nodes": [{"id": n.id, "x_km": n.x, "y_km": n.y, "pads": n.pads} for n in net.nodes],
        "segments": [{"from": s.a, "to": s.b} for s in net.segments],
    }


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise NetworkFormatError("expected an object", where)
    if key not in obj:
        raise NetworkFormatError(f"missing key {key!r}", where)
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetworkFormatError(f"expected a number, got {value!r}", where)
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise NetworkFormatError(f"expected an integer, got {value!r}", where)
    return value


def network_from_dict(doc: dict) -> SkywayNetwork:
    fmt = _require(doc, "format", "format")
    if fmt != FORMAT:
        raise NetworkFormatError(f"unsupported format {fmt!r}", "format")
    b = _require(doc, "bounds", "bounds")
    bounds = Bounds(
        _number(_require(b, "width_km", "bounds"), "bounds.width_km"),
        _number(_require(b, "height_km", "bounds"), "bounds.height_km"),
    )
    raw_nodes = _require(doc, "nodes", "nodes")
    if not isinstance(raw_nodes, list):
        raise NetworkFormatError("expected an array", "nodes")
    nodes = []
    for k, rn in enumerate(raw_nodes):
        where = f"nodes[{k}]"
        nodes.append(
            Node(
                _integer(_require(rn, "id", where), f"{where}.id"),
                _number(_require(rn, "x_km", where), f"{where}.x_km"),
                _number(_require(rn, "y_km", where), f"{where}.y_km"),
                _integer(_require(rn, "pads", where), f"{where}.pads"),
            )
        )
    ids = [n.id for n in nodes]
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise NetworkFormatError(f"duplicate node id {sorted(dup)[0]}", "nodes")
    by_id = {n.id: n for n in nodes}
    raw_segments = _require(doc, "segments", "segments")
    if not isinstance(raw_segments, list):
        raise NetworkFormatError("expected an array", "segments")
    segments = []
    for k, rs in enumerate(raw_segments):
        where = f"segments[{k}]"
        a = _integer(_require(rs, "from", where), f"{where}.from")
        b = _integer(_require(rs, "to", where), f"{where}.to")
        if a not in by_id or b not in by_id:
            raise NetworkFormatError(f"unknown endpoint in {a}-{b}", where)
        if a == b:
            raise NetworkFormatError(f"self loop at {a}", where)
        segments.append(make_segment(by_id, a, b))
    net = SkywayNetwork(tuple(nodes), tuple(segments), bounds)
    try:
        net.validate()
    except NetworkError as exc:
        raise NetworkFormatError(str(exc), "network") from exc
    if ids != list(range(len(ids))):
        raise NetworkFormatError("node ids must be dense 0..n-1 in order", "nodes")
    if not net.is_connected():
        raise NetworkFormatError("network is not connected", "segments")
    return net


def save_network(net: SkywayNetwork, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")


SECTIONS = ("format", "bounds", "nodes", "segments")


def describe_json_error(text: str, exc: json.JSONDecodeError, sections=SECTIONS) -> NetworkFormatError:
    """Locate a decode failure relative to the top-level sections of the document."""
    head = text[: exc.pos]
    started = [(head.rfind(f'"{s}"'), s) for s in sections if f'"{s}"' in head]
    missing = [s for s in sections if f'"{s}"' not in head]
    inside = max(started)[1] if started else "document"
    msg = f"invalid JSON ({exc.msg}) inside section {inside!r}"
    if missing:
        msg += f"; missing section(s): {', '.join(missing)}"
    return NetworkFormatError(msg, f"line {exc.lineno} col {exc.colno}")


def load_network(path: str | Path) -> SkywayNetwork:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise describe_json_error(text, exc) from exc
    return network_from_dict(doc)
