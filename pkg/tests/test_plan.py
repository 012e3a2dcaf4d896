import json

import pytest

from skyway.composer import DeliveryRequest
from skyway.drone import DroneSpec, Package
from skyway.exhaustive import compose_exhaustive
from skyway.network import NetworkFormatError, generate_network
from skyway.plan import build_plan, dump_plan, load_plan, plan_from_dict, plan_to_dict, save_plan
from skyway.stations import generate_schedule


@pytest.fixture(scope="module")
def plan():
    net = generate_network(15, (50, 50), 15, 4, seed=7)
    sched = generate_schedule(net, 24, 0.7, seed=7)
    r = DeliveryRequest(0, (Package(3.0, 4), Package(2.0, 9), Package(1.0, 12)), 0.5)
    return compose_exhaustive(net, sched, DroneSpec(drop_handling_time=0.1), r)[0]


def test_legs_alternate(plan):
    kinds = [type(leg).__name__ for leg in plan.legs]
    assert kinds[0] == kinds[-1] == "NodeEvent"
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    assert len(plan.events) == len(plan.invocations) + 1


def test_summary_properties(plan):
    assert sorted(plan.drop_order) == [4, 9, 12]
    assert plan.node_sequence[0] == 0
    assert plan.delivery_time == pytest.approx(max(plan.per_destination_arrival.values()) - 0.5)
    assert plan.recharge_count == sum(e.recharged for e in plan.events)
    assert {e.kind for e in plan.events} <= {"drop", "recharge", "drop+recharge", "pass"}


def test_round_trip(plan, tmp_path):
    save_plan(plan, tmp_path / "p.json")
    again = load_plan(tmp_path / "p.json")
    assert again == plan
    assert dump_plan(again) == dump_plan(plan)
    assert json.loads(dump_plan(plan))["format"] == "skyway-plan/1"


def test_bad_documents(plan, tmp_path):
    doc = plan_to_dict(plan)
    doc["legs"][1]["type"] = "teleport"
    with pytest.raises(NetworkFormatError, match="teleport"):
        plan_from_dict(doc)
    with pytest.raises(NetworkFormatError):
        plan_from_dict({"format": "skyway-plan/0"})
    (tmp_path / "cut.json").write_text(dump_plan(plan)[:200])
    with pytest.raises(NetworkFormatError, match="legs"):
        load_plan(tmp_path / "cut.json")


def test_no_op_plan():
    p = build_plan(3, 1.0, 1.0, (), [])
    assert p.delivery_time == 0.0
    assert len(p.legs) == 1 and p.events[0].kind == "pass"
