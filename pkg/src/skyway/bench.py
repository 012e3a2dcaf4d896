"""Benchmark harness and plan replay.

``run_benchmark`` sweeps network sizes; for each size it runs
``ceil(runs_fraction * n)`` trials, each with a random source and distinct
random destinations, and feeds the identical instance to both composers.
Every returned plan is re-simulated by ``replay`` before it is recorded.
"""
from __future__ import annotations

import csv
import gc
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .composer import DeliveryRequest, InfeasibleRequest, Margins, compose_heuristic
from .config import ConfigError, drone_from_config, margins_from_config
from .drone import DroneError, DroneSpec, Package, can_fly, consume, travel_time
from .exhaustive import compose_exhaustive
from .network import SkywayNetwork, generate_network
from .plan import CompositionPlan, NodeEvent, ServiceInvocation
from .stations import OccupancySchedule, generate_schedule, ready_time

CLOCK_TOL = 1e-9
ALGORITHMS = ("heuristic", "exhaustive")
TRIAL_COLUMNS = (
    "n_nodes",
    "trial",
    "seed",
    "algo",
    "feasible",
    "delivery_time_h",
    "exec_time_s",
    "subgraph_nodes",
    "labels_expanded",
)
SUMMARY_COLUMNS = (
    "n_nodes",
    "algo",
    "runs",
    "feasible_rate",
    "mean_delivery_h",
    "mean_exec_s",
    "stddev_exec_s",
    "mean_gap_pct",
)


# --- replay -----------------------------------------------------------------


class ReplayViolation(Exception):
    def __init__(self, kind: str, index: int, message: str):
        self.kind = kind
        self.index = index
        super().__init__(f"{kind} violation at leg {index}: {message}")


@dataclass
class Timeline:
    clocks: list[float]
    batteries: list[float]
    delivery_time: float
    arrivals: dict[int, float]


def _close(a: float, b: float, tol: float = CLOCK_TOL) -> bool:
    return abs(a - b) <= tol


def replay(
    plan: CompositionPlan,
    net: SkywayNetwork,
    sched: OccupancySchedule,
    spec: DroneSpec,
) -> Timeline:
    """Re-simulate ``plan`` from the drone and station primitives alone.

    Returns the recomputed clock/battery after every leg; raises
    ReplayViolation naming the first broken leg.
    """
    legs = plan.legs
    if not legs or not isinstance(legs[0], NodeEvent) or not isinstance(legs[-1], NodeEvent):
        raise ReplayViolation("structure", 0, "plan must start and end with a node event")
    for i, leg in enumerate(legs):
        expect = NodeEvent if i % 2 == 0 else ServiceInvocation
        if not isinstance(leg, expect):
            raise ReplayViolation("structure", i, f"expected {expect.__name__}")
    first = legs[0]
    if first.node != plan.src:
        raise ReplayViolation("contiguity", 0, "plan does not start at its source")
    if not _close(first.clock_in, plan.depart_clock):
        raise ReplayViolation("contiguity", 0, "first event does not start at depart_clock")

    node, clock, battery = plan.src, plan.depart_clock, first.battery_in
    if not 0.0 <= battery <= 1.0:
        raise ReplayViolation("battery", 0, f"start battery {battery} outside [0, 1]")
    payload = sum(p.weight for p in plan.packages)
    dropped: set[int] = set()
    arrivals: dict[int, float] = {}
    clocks, batteries = [], []
    h = spec.drop_handling_time

    for i, leg in enumerate(legs):
        if isinstance(leg, NodeEvent):
            if leg.node != node:
                raise ReplayViolation("contiguity", i, f"event at {leg.node}, drone is at {node}")
            if not _close(leg.clock_in, clock):
                raise ReplayViolation("contiguity", i, f"clock_in {leg.clock_in} != {clock}")
            if not _close(leg.battery_in, battery):
                raise ReplayViolation("battery", i, f"battery_in {leg.battery_in} != {battery}")
            for k in leg.dropped:
                if not 0 <= k < len(plan.packages):
                    raise ReplayViolation("drop", i, f"unknown package {k}")
                if k in dropped:
                    raise ReplayViolation("drop", i, f"package {k} dropped twice")
                if plan.packages[k].destination != node:
                    raise ReplayViolation("drop", i, f"package {k} dropped at wrong node {node}")
                dropped.add(k)
                clock += h
                payload -= plan.packages[k].weight
                arrivals[node] = clock
            if leg.recharged:
                if net.node(node).pads <= 0:
                    raise ReplayViolation("pad", i, f"recharge at pad-less node {node}")
                start, depart = ready_time(sched, node, clock, spec.recharge_duration)
                if not _close(leg.recharge_start, start):
                    raise ReplayViolation("pad", i, f"recharge starts {leg.recharge_start}, earliest free {start}")
                if not any(_pad_free(pad, start, depart) for pad in sched.pads(node)):
                    raise ReplayViolation("pad", i, "no pad free for the whole recharge")
                if not _close(leg.wait, start - clock):
                    raise ReplayViolation("clock", i, "wait inconsistent with recharge start")
                clock, battery = depart, 1.0
            if not _close(leg.clock_out, clock):
                raise ReplayViolation("clock", i, f"clock_out {leg.clock_out} != {clock}")
            if not _close(leg.battery_out, battery):
                raise ReplayViolation("battery", i, f"battery_out {leg.battery_out} != {battery}")
        else:
            if leg.origin != node:
                raise ReplayViolation("contiguity", i, f"service departs {leg.origin}, drone is at {node}")
            seg = net.segment_between(leg.origin, leg.target)
            if seg is None:
                raise ReplayViolation("contiguity", i, f"no segment {leg.origin}-{leg.target}")
            if not _close(leg.depart, clock):
                raise ReplayViolation("contiguity", i, f"depart {leg.depart} != {clock}")
            if not can_fly(spec, battery, payload, seg.length):
                raise ReplayViolation("battery", i, f"insufficient battery for {seg.length:.3f} km")
            battery = consume(spec, battery, payload, seg.length)
            clock = clock + travel_time(spec, seg.length)
            if not 0.0 <= leg.battery_after <= 1.0 or not _close(leg.battery_after, battery):
                raise ReplayViolation("battery", i, f"battery_after {leg.battery_after} != {battery}")
            if not _close(leg.arrive, clock):
                raise ReplayViolation("clock", i, f"arrive {leg.arrive} != {clock}")
            node = leg.target
        clocks.append(clock)
        batteries.append(battery)

    missing = set(range(len(plan.packages))) - dropped
    if missing:
        raise ReplayViolation("drop", len(legs) - 1, f"packages {sorted(missing)} never dropped")
    delivery = (max(arrivals.values()) - plan.depart_clock) if arrivals else 0.0
    if not _close(plan.delivery_time, delivery):
        raise ReplayViolation("clock", len(legs) - 1, f"delivery_time {plan.delivery_time} != {delivery}")
    for dst, t in arrivals.items():
        if not _close(plan.per_destination_arrival.get(dst, math.nan), t):
            raise ReplayViolation("clock", len(legs) - 1, f"arrival at {dst} misreported")
    return Timeline(clocks, batteries, delivery, arrivals)


def _pad_free(pad, start: float, end: float) -> bool:
    return all(iv.end <= start or iv.start >= end for iv in pad)


# --- benchmark --------------------------------------------------------------


@dataclass
class ExperimentConfig:
    node_counts: tuple[int, ...] = (10, 15, 20, 25, 30, 35)
    destinations_per_request: int = 3
    runs_fraction: float = 0.5
    seed: int = 1
    load_factor: float = 0.5
    horizon: float = 24.0
    drone: DroneSpec = field(default_factory=DroneSpec)
    margins: Margins = field(default_factory=Margins)
    bounds: tuple[float, float] = (50.0, 50.0)
    max_segment_len: float = 15.0
    pads_per_station: int = 4
    package_weight: tuple[float, float] = (0.5, 2.27)
    max_nodes: int = 35
    parallel: bool = False

    def __post_init__(self):
        if not self.node_counts:
            raise ConfigError("need at least one network size", "experiment.node_counts")
        for n in self.node_counts:
            if n > self.max_nodes:
                raise ConfigError(f"{n} exceeds max_nodes={self.max_nodes}", "experiment.node_counts")
            if n < self.destinations_per_request + 1:
                raise ConfigError(f"{n} nodes cannot host the request", "experiment.node_counts")
        if not 0 < self.runs_fraction <= 1:
            raise ConfigError("must lie in (0, 1]", "experiment.runs_fraction")
        if not 1 <= self.destinations_per_request <= 8:
            raise ConfigError("must lie in 1..8", "experiment.destinations_per_request")
        lo, hi = self.package_weight
        if not 0 < lo <= hi:
            raise ConfigError("need 0 < low <= high", "experiment.package_weight_kg")
        if hi * self.destinations_per_request > self.drone.max_payload:
            raise ConfigError("requests could exceed max payload", "experiment.package_weight_kg")

    def runs_for(self, n: int) -> int:
        return math.ceil(self.runs_fraction * n)

    @classmethod
    def from_config(cls, cfg: dict) -> "ExperimentConfig":
        try:
            exp, net, sch = cfg["experiment"], cfg["network"], cfg["schedule"]
            return cls(
                node_counts=tuple(int(n) for n in exp["node_counts"]),
                destinations_per_request=int(exp["destinations_per_request"]),
                runs_fraction=float(exp["runs_fraction"]),
                seed=int(exp["seed"]),
                load_factor=float(sch["load_factor"]),
                horizon=float(sch["horizon_h"]),
                drone=drone_from_config(cfg),
                margins=margins_from_config(cfg),
                bounds=tuple(float(b) for b in net["bounds_km"]),
                max_segment_len=float(net["max_segment_km"]),
                pads_per_station=int(net["pads_per_station"]),
                package_weight=tuple(float(w) for w in exp["package_weight_kg"]),
                max_nodes=int(net["max_nodes"]),
                parallel=bool(exp.get("parallel", False)),
            )
        except KeyError as exc:
            raise ConfigError("missing key", str(exc.args[0])) from exc
        except (TypeError, ValueError, DroneError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "experiment") from exc


@dataclass
class TrialRecord:
    n_nodes: int
    trial: int
    seed: int
    algo: str
    feasible: bool
    delivery_time_h: float | None
    exec_time_s: float
    subgraph_nodes: int
    labels_expanded: int

    def row(self) -> list:
        return [
            self.n_nodes,
            self.trial,
            self.seed,
            self.algo,
            int(self.feasible),
            "" if self.delivery_time_h is None else repr(self.delivery_time_h),
            repr(self.exec_time_s),
            self.subgraph_nodes,
            self.labels_expanded,
        ]

    @classmethod
    def from_row(cls, row: dict) -> "TrialRecord":
        return cls(
            n_nodes=int(row["n_nodes"]),
            trial=int(row["trial"]),
            seed=int(row["seed"]),
            algo=row["algo"],
            feasible=bool(int(row["feasible"])),
            delivery_time_h=float(row["delivery_time_h"]) if row["delivery_time_h"] else None,
            exec_time_s=float(row["exec_time_s"]),
            subgraph_nodes=int(row["subgraph_nodes"]),
            labels_expanded=int(row["labels_expanded"]),
        )


@dataclass
class SummaryRow:
    n_nodes: int
    algo: str
    runs: int
    feasible_rate: float
    mean_delivery_h: float
    median_delivery_h: float
    stddev_delivery_h: float
    mean_exec_s: float
    median_exec_s: float
    stddev_exec_s: float
    mean_gap_pct: float


@dataclass
class BenchReport:
    rows: list[SummaryRow]
    exec_time_comparable: bool = True

    def row(self, n: int, algo: str) -> SummaryRow:
        for r in self.rows:
            if r.n_nodes == n and r.algo == algo:
                return r
        raise KeyError((n, algo))

    def gaps(self) -> dict[int, float]:
        return {r.n_nodes: r.mean_gap_pct for r in self.rows if r.algo == "heuristic"}


def _mean(xs):
    return statistics.fmean(xs) if xs else math.nan


def _median(xs):
    return statistics.median(xs) if xs else math.nan


def _stdev(xs):
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def summarize(records: list[TrialRecord], exec_time_comparable: bool = True) -> BenchReport:
    sizes = sorted({r.n_nodes for r in records})
    rows = []
    for n in sizes:
        paired: dict[int, dict[str, TrialRecord]] = {}
        for r in records:
            if r.n_nodes == n:
                paired.setdefault(r.trial, {})[r.algo] = r
        gaps = []
        for pair in paired.values():
            h, e = pair.get("heuristic"), pair.get("exhaustive")
            if h and e and h.feasible and e.feasible:
                gaps.append((h.delivery_time_h - e.delivery_time_h) / e.delivery_time_h * 100.0)
        for algo in ALGORITHMS:
            mine = [r for r in records if r.n_nodes == n and r.algo == algo]
            if not mine:
                continue
            delivery = [r.delivery_time_h for r in mine if r.feasible]
            execs = [r.exec_time_s for r in mine]
            rows.append(
                SummaryRow(
                    n_nodes=n,
                    algo=algo,
                    runs=len(mine),
                    feasible_rate=sum(r.feasible for r in mine) / len(mine),
                    mean_delivery_h=_mean(delivery),
                    median_delivery_h=_median(delivery),
                    stddev_delivery_h=_stdev(delivery),
                    mean_exec_s=_mean(execs),
                    median_exec_s=_median(execs),
                    stddev_exec_s=_stdev(execs),
                    mean_gap_pct=_mean(gaps) if algo == "heuristic" else 0.0,
                )
            )
    return BenchReport(rows, exec_time_comparable)


def trial_seed(master: int, n: int, trial: int) -> int:
    return int(np.random.SeedSequence([master, n, trial]).generate_state(1)[0])


def instance_seed(master: int, n: int) -> int:
    return int(np.random.SeedSequence([master, n]).generate_state(1)[0])


def make_instance(cfg: ExperimentConfig, n: int) -> tuple[SkywayNetwork, OccupancySchedule]:
    seed = instance_seed(cfg.seed, n)
    net = generate_network(n, cfg.bounds, cfg.max_segment_len, cfg.pads_per_station, seed)
    sched = generate_schedule(net, cfg.horizon, cfg.load_factor, seed, cfg.drone.recharge_duration)
    return net, sched


def make_request(cfg: ExperimentConfig, n: int, seed: int) -> DeliveryRequest:
    rng = np.random.default_rng(seed)
    ids = rng.choice(n, size=cfg.destinations_per_request + 1, replace=False)
    lo, hi = cfg.package_weight
    weights = rng.uniform(lo, hi, size=cfg.destinations_per_request)
    packages = tuple(Package(float(w), int(d)) for w, d in zip(weights, ids[1:]))
    return DeliveryRequest(int(ids[0]), packages, 0.0)


def run_trial(
    cfg: ExperimentConfig,
    net: SkywayNetwork,
    sched: OccupancySchedule,
    n: int,
    trial: int,
) -> list[TrialRecord]:
    seed = trial_seed(cfg.seed, n, trial)
    request = make_request(cfg, n, seed)
    out = []
    for algo in ALGORITHMS:
        # timed like timeit: collector off, monotonic clock around the call only
        gc_was_enabled = gc.isenabled()
        gc.disable()
        t0 = time.perf_counter()
        try:
            if algo == "heuristic":
                plan, diag = compose_heuristic(net, sched, cfg.drone, request, cfg.margins)
            else:
                plan, diag = compose_exhaustive(net, sched, cfg.drone, request)
            exec_time = time.perf_counter() - t0
        except InfeasibleRequest:
            exec_time = time.perf_counter() - t0
            out.append(TrialRecord(n, trial, seed, algo, False, None, exec_time, 0, 0))
            continue
        finally:
            if gc_was_enabled:
                gc.enable()
        replay(plan, net, sched, cfg.drone)
        out.append(
            TrialRecord(
                n,
                trial,
                seed,
                algo,
                True,
                plan.delivery_time,
                exec_time,
                diag.subgraph_nodes,
                diag.labels_expanded,
            )
        )
    return out


def _run_size(args):
    cfg, n, trials = args
    net, sched = make_instance(cfg, n)
    records = []
    for t in trials:
        records.extend(run_trial(cfg, net, sched, n, t))
    return records


def run_benchmark(cfg: ExperimentConfig) -> tuple[list[TrialRecord], BenchReport]:
    jobs = [(cfg, n, [t]) for n in cfg.node_counts for t in range(cfg.runs_for(n))]
    if cfg.parallel:
        with ProcessPoolExecutor() as pool:
            chunks = list(pool.map(_run_size, jobs))
    else:
        chunks = [_run_size(job) for job in jobs]
    records = [r for chunk in chunks for r in chunk]
    return records, summarize(records, exec_time_comparable=not cfg.parallel)


# --- CSV --------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_csv(records: list[TrialRecord], report: BenchReport, out_dir: str | Path) -> tuple[Path, Path]:
    if not records:
        raise ValueError("no trial records to write")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials_path = out_dir / "trials.csv"
    summary_path = out_dir / "summary.csv"
    with trials_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_COLUMNS)
        for r in records:
            w.writerow(r.row())
    with summary_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in report.rows:
            w.writerow(
                [
                    r.n_nodes,
                    r.algo,
                    r.runs,
                    _fmt(r.feasible_rate),
                    _fmt(r.mean_delivery_h),
                    _fmt(r.mean_exec_s),
                    _fmt(r.stddev_exec_s),
                    _fmt(r.mean_gap_pct),
                ]
            )
    return trials_path, summary_path


def read_trials_csv(path: str | Path) -> list[TrialRecord]:
    with Path(path).open(newline="") as fh:
        return [TrialRecord.from_row(row) for row in csv.DictReader(fh)]


def read_summary_csv(path: str | Path) -> list[dict]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                {
                    "n_nodes": int(row["n_nodes"]),
                    "algo": row["algo"],
                    "runs": int(row["runs"]),
                    **{k: float(row[k]) for k in SUMMARY_COLUMNS[3:]},
                }
            )
    return out


def format_summary(report: BenchReport) -> str:
    lines = [
        f"{'n':>4} {'algo':<11} {'runs':>4} {'feasible':>8} {'delivery_h':>10} {'exec_ms':>9} {'gap_%':>7}"
    ]
    for r in report.rows:
        lines.append(
            f"{r.n_nodes:>4} {r.algo:<11} {r.runs:>4} {r.feasible_rate:>8.2f} "
            f"{r.mean_delivery_h:>10.3f} {r.mean_exec_s * 1e3:>9.2f} {r.mean_gap_pct:>7.2f}"
        )
    if not report.exec_time_comparable:
        lines.append("(parallel run: execution times are not comparable)")
    return "\n".join(lines)
