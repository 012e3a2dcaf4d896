"""Small builders shared by the test modules."""
from __future__ import annotations

import random

from skyway.composer import DeliveryRequest
from skyway.drone import DroneSpec, Package
from skyway.network import Bounds, Node, SkywayNetwork, generate_network, make_segment
from skyway.stations import generate_schedule

# pass/fail lines from the acceptance gate, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def build_net(coords, edges, pads=0, bounds=None) -> SkywayNetwork:
    """Network from a list of (x, y) and a list of (a, b) id pairs.

    ``pads`` is either one count for every node or a list per node.
    """
    if isinstance(pads, int):
        pads = [pads] * len(coords)
    nodes = {i: Node(i, float(x), float(y), p) for i, ((x, y), p) in enumerate(zip(coords, pads))}
    segs = tuple(make_segment(nodes, a, b) for a, b in edges)
    if bounds is None:
        bounds = (max(x for x, _ in coords) + 1.0, max(y for _, y in coords) + 1.0)
    net = SkywayNetwork(tuple(nodes.values()), segs, Bounds(*bounds))
    net.validate()
    return net


def path_graph(n: int, step: float, pads=0) -> SkywayNetwork:
    return build_net([(i * step, 0.0) for i in range(n)], [(i, i + 1) for i in range(n - 1)], pads)


def oracle_instance(i: int):
    """Seeded tiny instance with varied pads, loads, payloads and start state."""
    r = random.Random(i)
    spec = DroneSpec(drop_handling_time=r.choice([0.0, 0.0, 0.1]))
    n = r.randint(2, 7)
    base = generate_network(n, (r.uniform(20, 60),) * 2, r.uniform(5, 30), 2, seed=i)
    net = SkywayNetwork(
        tuple(Node(x.id, x.x, x.y, r.choice([0, 1, 2])) for x in base.nodes), base.segments, base.bounds
    )
    sched = generate_schedule(net, 24, r.uniform(0, 0.95), seed=i)
    k = min(r.randint(1, 2), n - 1)
    ids = r.sample(range(n), k + 1)
    packages = tuple(Package(r.uniform(0.5, 7), d) for d in ids[1:])
    start_battery = r.choice([1.0, r.uniform(0.2, 1.0)])
    request = DeliveryRequest(ids[0], packages, r.uniform(0, 5), start_battery)
    return net, sched, spec, request
