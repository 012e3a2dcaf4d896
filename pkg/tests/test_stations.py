import random

import pytest
from hypothesis import given, settings, strategies as st

from skyway.network import generate_network
from skyway.stations import (
    NoPadsError,
    OccupancySchedule,
    empty_schedule,
    generate_schedule,
    load_schedule,
    ready_time,
    save_schedule,
)

from _util import build_net


def sched_of(*pads):
    return OccupancySchedule({0: tuple(pads)})


def test_all_pads_free():
    s = sched_of((), (), (), ())
    assert ready_time(s, 0, 1.0, 2.15) == (1.0, pytest.approx(3.15))


def test_all_pads_busy_until_one():
    s = sched_of(*[((0.0, 1.0),)] * 4)
    start, depart = ready_time(s, 0, 0.5, 2.15)
    assert start == 1.0
    assert start - 0.5 == 0.5
    assert depart == pytest.approx(3.15)


def test_short_gap_is_skipped():
    s = sched_of(((0.0, 1.0), (1.5, 5.0)), ((0.0, 4.0),))
    assert ready_time(s, 0, 0.2, 2.15)[0] == 4.0


def test_window_exactly_long_enough():
    s = sched_of(((0.0, 1.0), (3.15, 5.0)))
    assert ready_time(s, 0, 0.0, 2.15)[0] == 1.0


def test_no_pads():
    with pytest.raises(NoPadsError):
        ready_time(OccupancySchedule({}), 3, 0.0, 2.15)


def test_overlapping_intervals_rejected():
    with pytest.raises(ValueError):
        sched_of(((0.0, 2.0), (1.0, 3.0)))
    with pytest.raises(ValueError):
        sched_of(((2.0, 1.0),))


def test_load_zero_is_empty():
    net = generate_network(10, (50, 50), 15, 4, seed=1)
    sched = generate_schedule(net, 24, 0.0, seed=1)
    assert sched == empty_schedule(net)
    for n in net.nodes:
        assert ready_time(sched, n.id, 5.0, 2.15)[0] == 5.0


def test_half_load_busy_time_per_pad():
    net = generate_network(35, (50, 50), 15, 4, seed=1)
    sched = generate_schedule(net, 24, 0.5, seed=2)
    busy = [sum(e - s for s, e in pad) for pads in sched.stations.values() for pad in pads]
    assert len(busy) == 140
    assert all(10.0 <= b <= 14.0 for b in busy)


def test_schedule_deterministic_and_round_trips(tmp_path):
    net = generate_network(12, (50, 50), 15, 4, seed=3)
    a = generate_schedule(net, 24, 0.5, seed=9)
    assert a == generate_schedule(net, 24, 0.5, seed=9)
    assert a != generate_schedule(net, 24, 0.5, seed=10)
    save_schedule(a, tmp_path / "s.json")
    assert load_schedule(tmp_path / "s.json") == a


def test_validate_against_network():
    net = build_net([(0, 0), (3, 4)], [(0, 1)], pads=[2, 0])
    empty_schedule(net).validate_against(net)
    with pytest.raises(ValueError):
        OccupancySchedule({}).validate_against(net)
    with pytest.raises(ValueError):
        OccupancySchedule({0: ((),)}).validate_against(net)


def test_with_interval_merges():
    s = sched_of(((0.0, 1.0),)).with_interval(0, 0, (0.5, 2.0))
    assert s.pads(0)[0] == ((0.0, 2.0),)


pad_strategy = st.lists(st.tuples(st.floats(0, 20), st.floats(0.05, 4)), max_size=5)


@settings(max_examples=300)
@given(
    pads=st.lists(pad_strategy, min_size=1, max_size=4),
    a1=st.floats(0, 24),
    da=st.floats(0, 6),
    dur=st.floats(0.1, 3),
)
def test_non_overtaking(pads, a1, da, dur):
    sched = OccupancySchedule({0: tuple(_disjoint(p) for p in pads)})
    s1, d1 = ready_time(sched, 0, a1, dur)
    s2, d2 = ready_time(sched, 0, a1 + da, dur)
    assert s1 >= a1 and d1 <= d2
    # the chosen window really is free on some pad
    assert any(all(e <= s1 or s >= d1 for s, e in pad) for pad in sched.pads(0))


def _disjoint(raw):
    out, t = [], 0.0
    for gap, length in sorted(raw):
        t += gap * 0.25
        out.append((t, t + length))
        t += length
    return tuple(out)


def test_generated_schedules_are_well_formed():
    rng = random.Random(0)
    for seed in range(20):
        net = generate_network(rng.randint(2, 20), (50, 50), 15, rng.randint(1, 4), seed=seed)
        sched = generate_schedule(net, 24, rng.uniform(0, 1), seed=seed)
        sched.validate_against(net)


@settings(max_examples=200)
@given(pads=st.lists(pad_strategy, min_size=1, max_size=4), a=st.floats(0, 30), dur=st.floats(0.1, 3))
def test_recharge_takes_exactly_its_duration(pads, a, dur):
    sched = OccupancySchedule({0: tuple(_disjoint(p) for p in pads)})
    start, depart = ready_time(sched, 0, a, dur)
    assert depart - start == pytest.approx(dur, abs=1e-12)
    assert start >= a
