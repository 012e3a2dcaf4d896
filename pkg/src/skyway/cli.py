"""Command-line entry point.

Exit codes: 0 success, 2 usage or validation error, 3 infeasible request,
4 I/O failure while writing outputs.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from .bench import ExperimentConfig, ReplayViolation, emit_csv, format_summary, replay, run_benchmark
from .composer import DeliveryRequest, InfeasibleRequest, Margins, RequestError, compose_heuristic
from .config import ConfigError, drone_from_config, load_config, margins_from_config
from .drone import DroneError, Package
from .exhaustive import compose_exhaustive
from .network import NetworkError, generate_network, load_network, save_network
from .plan import load_plan, save_plan
from .stations import empty_schedule, generate_schedule, load_schedule, save_schedule

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("skyway")


class UsageError(Exception):
    pass


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("SKYWAY_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SKYWAY_SEED must be an integer, got {env!r}")


def _bounds(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        return float(w), float(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must look like WxH, got {text!r}")


def _id_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _existing(path: str | None, what: str) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {p}")
    return p


def _config(path: str | None) -> dict:
    return load_config(_existing(path, "config"))


def cmd_gen_net(args) -> int:
    cfg = _config(args.config)
    net_cfg = cfg["network"]
    if args.nodes < 2:
        raise UsageError("--nodes must be at least 2")
    if args.nodes > net_cfg["max_nodes"]:
        log.warning("%d nodes exceeds the configured maximum of %d", args.nodes, net_cfg["max_nodes"])
    bounds = args.bounds or tuple(net_cfg["bounds_km"])
    max_seg = args.max_seg_km if args.max_seg_km is not None else net_cfg["max_segment_km"]
    pads = args.pads if args.pads is not None else net_cfg["pads_per_station"]
    net = generate_network(args.nodes, bounds, max_seg, pads, _seed(args.seed))
    _write(save_network, net, args.out)
    print(f"wrote {args.out}: {len(net.nodes)} nodes, {len(net.segments)} segments")
    return EXIT_OK


def cmd_gen_sched(args) -> int:
    cfg = _config(args.config)
    net = load_network(_existing(args.net, "network"))
    drone = drone_from_config(cfg)
    horizon = args.horizon if args.horizon is not None else cfg["schedule"]["horizon_h"]
    load = args.load if args.load is not None else cfg["schedule"]["load_factor"]
    sched = generate_schedule(net, horizon, load, _seed(args.seed), drone.recharge_duration)
    _write(save_schedule, sched, args.out)
    busy = sum(iv.end - iv.start for pads in sched.stations.values() for pad in pads for iv in pad)
    n_pads = sum(len(pads) for pads in sched.stations.values())
    print(f"wrote {args.out}: {n_pads} pads, mean busy {busy / max(n_pads, 1):.2f} h over {horizon} h")
    return EXIT_OK


def cmd_compose(args) -> int:
    net = load_network(_existing(args.net, "network"))
    sched = load_schedule(_existing(args.sched, "schedule")) if args.sched else empty_schedule(net)
    try:
        sched.validate_against(net)
    except ValueError as exc:
        raise UsageError(f"schedule does not match network: {exc}")
    drone_cfg = load_config(_existing(args.drone, "drone")) if args.drone else load_config()
    drone = drone_from_config(drone_cfg)
    dsts = args.dst
    weights = args.weights if args.weights else [args.weight] * len(dsts)
    if len(weights) != len(dsts):
        raise UsageError("--weights needs one value per destination")
    request = DeliveryRequest(
        args.src, tuple(Package(w, d) for w, d in zip(weights, dsts)), args.depart
    )
    if args.algo == "heuristic":
        margins = margins_from_config(load_config())
        if args.angle_deg is not None:
            margins = Margins(math.radians(args.angle_deg), margins.radius)
        if args.radius_margin is not None:
            margins = Margins(margins.angle, args.radius_margin)
        plan, diag = compose_heuristic(net, sched, drone, request, margins)
    else:
        plan, diag = compose_exhaustive(net, sched, drone, request)
    if args.out:
        _write(save_plan, plan, args.out)
    print(f"algorithm        {args.algo}")
    print(f"drop order       {' -> '.join(map(str, plan.drop_order))}")
    print(f"route            {' -> '.join(map(str, plan.node_sequence))}")
    print(f"delivery time    {plan.delivery_time:.4f} h")
    print(f"flight distance  {plan.flight_km:.2f} km")
    print(f"recharges        {plan.recharge_count}")
    print(f"waiting          {plan.total_wait:.4f} h")
    print(f"search space     {diag.subgraph_nodes}/{len(net.nodes)} nodes, {diag.labels_expanded} labels")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config(args.config)
    if args.seed is not None or "SKYWAY_SEED" in os.environ:
        cfg["experiment"]["seed"] = _seed(args.seed)
    exp = ExperimentConfig.from_config(cfg)
    if args.parallel:
        exp.parallel = True
    records, report = run_benchmark(exp)
    try:
        emit_csv(records, report, args.out)
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    print(format_summary(report))
    print(f"wrote {Path(args.out) / 'trials.csv'} and {Path(args.out) / 'summary.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    net = load_network(_existing(args.net, "network"))
    sched = load_schedule(_existing(args.sched, "schedule")) if args.sched else empty_schedule(net)
    drone = drone_from_config(load_config(_existing(args.drone, "drone")) if args.drone else load_config())
    plan = load_plan(_existing(args.plan, "plan"))
    try:
        timeline = replay(plan, net, sched, drone)
    except ReplayViolation as exc:
        print(f"INVALID: {exc}")
        return EXIT_USAGE
    print(f"OK: {len(plan.legs)} legs, delivery time {timeline.delivery_time:.4f} h")
    return EXIT_OK


def _write(saver, obj, path) -> None:
    try:
        saver(obj, path)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skyway", description="Drone multi-package delivery composition.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-net", help="generate a random skyway network")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--bounds", type=_bounds, help="area as WxH km")
    g.add_argument("--seed", type=int)
    g.add_argument("--max-seg-km", type=float)
    g.add_argument("--pads", type=int)
    g.add_argument("--config")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_net)

    s = sub.add_parser("gen-sched", help="generate background pad occupancy")
    s.add_argument("--net", required=True)
    s.add_argument("--horizon", type=float)
    s.add_argument("--load", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_sched)

    c = sub.add_parser("compose", help="plan a multi-package delivery")
    c.add_argument("--net", required=True)
    c.add_argument("--sched")
    c.add_argument("--drone", help="drone JSON (bare section or full config)")
    c.add_argument("--src", type=int, required=True)
    c.add_argument("--dst", type=_id_list, required=True, help="ID[,ID...]")
    c.add_argument("--weights", type=_float_list, help="package kg per destination")
    c.add_argument("--weight", type=float, default=1.0, help="kg per package when --weights is absent")
    c.add_argument("--algo", choices=("heuristic", "exhaustive"), default="heuristic")
    c.add_argument("--depart", type=float, default=0.0, help="departure clock, hours")
    c.add_argument("--angle-deg", type=float)
    c.add_argument("--radius-margin", type=float)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compose)

    b = sub.add_parser("bench", help="run the execution/delivery-time benchmark")
    b.add_argument("--config")
    b.add_argument("--seed", type=int)
    b.add_argument("--parallel", action="store_true", help="parallel trials; exec times not comparable")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="replay a plan file and check every invariant")
    v.add_argument("--plan", required=True)
    v.add_argument("--net", required=True)
    v.add_argument("--sched")
    v.add_argument("--drone")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InfeasibleRequest as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, RequestError, DroneError, NetworkError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
