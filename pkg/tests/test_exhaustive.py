import pytest

from skyway.composer import DeliveryRequest, InfeasibleRequest
from skyway.drone import DroneSpec, Package
from skyway.exhaustive import InstanceTooLarge, brute_force_oracle, compose_exhaustive
from skyway.network import generate_network
from skyway.stations import empty_schedule, generate_schedule

from _util import build_net, oracle_instance, path_graph

SPEC = DroneSpec()


def req(src, *dsts, weight=1.0, battery=1.0):
    return DeliveryRequest(src, tuple(Package(weight, d) for d in dsts), 0.0, battery)


def test_two_node_network():
    net = build_net([(0, 0), (3, 4)], [(0, 1)])
    plan = brute_force_oracle(net, empty_schedule(net), SPEC, req(0, 1))
    assert plan.node_sequence == (0, 1)
    assert plan.delivery_time == pytest.approx(5 / 82.8)


def test_triangle_golden():
    # 0.6 of a charge covers 19.8 km: the direct 25 km hop needs a recharge
    # at the source first; the two-hop way round needs one at the apex
    net = build_net([(0, 0), (25, 0), (12.5, 9)], [(0, 1), (0, 2), (2, 1)], pads=[4, 0, 4])
    plan = brute_force_oracle(net, empty_schedule(net), SPEC, req(0, 1, weight=0.1, battery=0.6))
    assert plan.node_sequence == (0, 1)
    assert plan.recharge_count == 1
    assert plan.delivery_time == pytest.approx(2.15 + 25 / 82.8, abs=1e-12)
    exhaustive, _ = compose_exhaustive(net, empty_schedule(net), SPEC, req(0, 1, weight=0.1, battery=0.6))
    assert exhaustive.delivery_time == pytest.approx(plan.delivery_time, abs=1e-9)


def test_triangle_golden_when_source_is_congested():
    net = build_net([(0, 0), (25, 0), (12.5, 9)], [(0, 1), (0, 2), (2, 1)], pads=[4, 0, 4])
    sched = empty_schedule(net)
    for pad in range(4):
        sched = sched.with_interval(0, pad, (0.0, 1.0))
    plan = brute_force_oracle(net, sched, SPEC, req(0, 1, weight=0.1, battery=0.6))
    assert plan.node_sequence == (0, 2, 1)
    side = ((12.5**2 + 9**2) ** 0.5) / 82.8
    assert plan.delivery_time == pytest.approx(2 * side + 2.15, abs=1e-12)


def test_path_graph_single_destination():
    net = path_graph(4, 7.0, pads=[0, 2, 2, 0])
    r = req(0, 3, weight=12.0)
    oracle = brute_force_oracle(net, empty_schedule(net), SPEC, r)
    plan, _ = compose_exhaustive(net, empty_schedule(net), SPEC, r)
    assert plan.delivery_time == pytest.approx(oracle.delivery_time, abs=1e-9)
    assert plan.node_sequence == oracle.node_sequence


def test_spur_detour_to_a_station():
    # the only station hangs off the source on a spur; with 0.4 of a charge the
    # drone must go there, recharge and come back through the source
    net = build_net([(5, 0), (0, 0), (25, 0)], [(0, 1), (0, 2)], pads=[0, 4, 0])
    r = req(0, 2, weight=0.1, battery=0.4)
    plan, _ = compose_exhaustive(net, empty_schedule(net), SPEC, r)
    assert plan.node_sequence == (0, 1, 0, 2)
    assert plan.delivery_time == pytest.approx(30 / 82.8 + 2.15)
    oracle = brute_force_oracle(net, empty_schedule(net), SPEC, r)
    assert oracle.node_sequence == plan.node_sequence


def test_cycles_do_not_pay_without_recharges():
    # a ring where going round would revisit nodes: plans stay simple
    coords = [(0, 0), (8, 0), (8, 8), (0, 8)]
    net = build_net(coords, [(0, 1), (1, 2), (2, 3), (3, 0)])
    plan, _ = compose_exhaustive(net, empty_schedule(net), SPEC, req(0, 1, 3, weight=0.5))
    seq = plan.node_sequence
    assert seq in {(0, 1, 0, 3), (0, 3, 0, 1)}
    assert plan.flight_km == pytest.approx(24.0)


def test_oracle_guards():
    big = generate_network(8, (30, 30), 15, 1, seed=0)
    with pytest.raises(InstanceTooLarge):
        brute_force_oracle(big, empty_schedule(big), SPEC, req(0, 1))
    small = generate_network(5, (30, 30), 15, 1, seed=0)
    with pytest.raises(InstanceTooLarge):
        brute_force_oracle(small, empty_schedule(small), SPEC, req(0, 1, 2, 3))


def test_oracle_infeasible():
    net = build_net([(0, 0), (40, 0)], [(0, 1)], pads=4)
    with pytest.raises(InfeasibleRequest):
        brute_force_oracle(net, empty_schedule(net), SPEC, req(0, 1))


@pytest.mark.parametrize("i", range(1000, 1040))
def test_matches_oracle(i):
    net, sched, spec, r = oracle_instance(i)
    try:
        e = compose_exhaustive(net, sched, spec, r)[0].delivery_time
    except InfeasibleRequest:
        e = None
    try:
        o = brute_force_oracle(net, sched, spec, r).delivery_time
    except InfeasibleRequest:
        o = None
    assert (e is None) == (o is None)
    if e is not None:
        assert abs(e - o) <= 1e-9


def test_larger_network_expands_more_labels():
    # same node density: the 10-node area is scaled down by sqrt(10/35)
    side = 50 * (10 / 35) ** 0.5
    totals = {}
    for n, bounds in ((10, side), (35, 50.0)):
        total = 0
        for seed in range(5):
            net = generate_network(n, (bounds, bounds), 15, 4, seed=seed)
            sched = generate_schedule(net, 24, 0.5, seed=seed)
            _, diag = compose_exhaustive(net, sched, SPEC, req(0, 1, 2, 3))
            total += diag.labels_expanded
        totals[n] = total
    assert totals[35] > totals[10]
