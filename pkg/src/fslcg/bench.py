"""Benchmark sweeps and instance self-checks behind the command line."""

from __future__ import annotations

import csv
import dataclasses
import logging
import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO

from . import binpack, scenarios
from .errors import GuardError, InfeasibleError
from .ffcg import FfcgGame, FfcgInstance, build_collaboration_graph, pairwise_shapley, savings_report, solve_group
from .graph import AgentGraph, members, subsets
from .oracles import min_cost_packing
from .shapley import (
    BASELINE_MAX_N,
    BRUTEFORCE_MAX_N,
    LOCALITY_MAX_N,
    CharacteristicFunction,
    ShapleyResult,
    baseline_graph_restricted_shapley,
    check_local_collaboration,
    exact_shapley_bruteforce,
    fs_lcg_shapley,
    weight_partition_holds,
)

log = logging.getLogger(__name__)

METHODS = ("fs_lcg", "baseline", "bruteforce", "pairwise")
CSV_HEADER = ["kind", "n", "deg", "seed", "method", "elapsed_s", "eval_count", "total_cost", "avg_savings"]


def compute_shapley(
    method: str,
    graph: AgentGraph,
    game: FfcgGame,
    *,
    max_degree: int | None = None,
    max_baseline_n: int = BASELINE_MAX_N,
) -> ShapleyResult:
    if method == "fs_lcg":
        return fs_lcg_shapley(graph, game, max_degree=max_degree)
    if method == "baseline":
        return baseline_graph_restricted_shapley(graph, game, max_n=max_baseline_n)
    if method == "bruteforce":
        return exact_shapley_bruteforce(game, max_n=BRUTEFORCE_MAX_N)
    if method == "pairwise":
        return pairwise_shapley(game)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


@dataclass
class BenchRecord:
    kind: str
    n: int
    deg: int | None
    seed: int
    method: str
    elapsed_s: float | None = None
    eval_count: int | None = None
    total_cost: int | None = None
    avg_savings: float | None = None
    error: str = ""

    def row(self) -> list[str]:
        def fmt(x, spec: str = "") -> str:
            return "" if x is None else format(x, spec)

        return [
            self.kind,
            str(self.n),
            fmt(self.deg),
            str(self.seed),
            self.method,
            fmt(self.elapsed_s, ".6f"),
            fmt(self.eval_count),
            fmt(self.total_cost),
            fmt(self.avg_savings, ".12g"),
        ]


@dataclass
class SweepConfig:
    kind: str = "small_world"
    ns: list[int] = field(default_factory=lambda: [10])
    degrees: list[int] = field(default_factory=lambda: [4])
    seeds: list[int] = field(default_factory=lambda: [0])
    methods: list[str] = field(default_factory=lambda: ["fs_lcg", "baseline"])
    exact: bool = False
    max_degree: int | None = 22
    max_baseline_n: int = 20
    scenario: dict = field(default_factory=dict)  # extra ScenarioConfig fields

    def __post_init__(self) -> None:
        if self.kind not in scenarios.KINDS:
            raise ValueError(f"kind must be one of {scenarios.KINDS}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")

    @classmethod
    def from_json(cls, data: dict) -> SweepConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        aliases = {"n": "ns", "deg": "degrees"}
        kw = {aliases.get(k, k): v for k, v in data.items()}
        unknown = set(kw) - names
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
        return cls(**kw)

    def tasks(self) -> list[tuple[int, int | None, int]]:
        degs: Sequence[int | None] = self.degrees if self.kind == "small_world" else [None]
        return [(n, d, s) for n in self.ns for d in degs for s in self.seeds]


def sweep_instance(cfg: SweepConfig, n: int, deg: int | None, seed: int) -> FfcgInstance:
    extra = dict(cfg.scenario)
    if cfg.kind == "uniform":
        # one profile per seed at the largest size, shrunk by dropping forwarders
        base = scenarios.generate(scenarios.ScenarioConfig(kind="uniform", n_forwarders=max(cfg.ns), seed=seed, **extra))
        return base.subset(base.forwarders[:n])
    if deg is not None:
        extra["avg_degree"] = deg
    return scenarios.generate(scenarios.ScenarioConfig(kind=cfg.kind, n_forwarders=n, seed=seed, **extra))


def run_task(cfg: SweepConfig, n: int, deg: int | None, seed: int) -> list[BenchRecord]:
    """Every configured method on one instance, each starting from a cold cache."""
    inst = sweep_instance(cfg, n, deg, seed)
    graph = build_collaboration_graph(inst)
    game = FfcgGame(inst, exact=cfg.exact)
    out = []
    for method in cfg.methods:
        rec = BenchRecord(cfg.kind, n, deg, seed, method)
        game.cache_clear()
        try:
            res = compute_shapley(method, graph, game, max_degree=cfg.max_degree, max_baseline_n=cfg.max_baseline_n)
        except (GuardError, InfeasibleError) as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            log.warning("%s n=%d deg=%s seed=%d %s skipped: %s", cfg.kind, n, deg, seed, method, exc)
        else:
            rec.elapsed_s = res.elapsed
            rec.eval_count = res.eval_count
            rec.avg_savings = float(savings_report(game, res).average)
        out.append(rec)
    try:
        total = game.evaluate(graph.full)
    except InfeasibleError:
        total = None
    for rec in out:
        rec.total_cost = total
    return out


def _run_task_star(args) -> list[BenchRecord]:
    return run_task(*args)


def run_sweep(cfg: SweepConfig, jobs: int | None = None) -> list[BenchRecord]:
    """Rows in configuration order regardless of worker completion order."""
    tasks = [(cfg, n, d, s) for n, d, s in cfg.tasks()]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        chunks = [run_task(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task_star, tasks))
    return [rec for chunk in chunks for rec in chunk]


def write_csv(rows: Iterable[BenchRecord], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in rows:
        w.writerow(rec.row())


# -- verification -------------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def check_locality(graph: AgentGraph, game: CharacteristicFunction, labels: Sequence[str] | None = None) -> Check:
    if graph.n > LOCALITY_MAX_N:
        return Check("locality", True, f"skipped: n={graph.n} > {LOCALITY_MAX_N}")
    rep = check_local_collaboration(graph, game)
    if rep:
        return Check("locality", True, f"{rep.checked} (agent, coalition) pairs")
    name = labels[rep.agent] if labels else str(rep.agent)
    coal = [labels[i] if labels else i for i in members(rep.coalition)]
    return Check("locality", False, f"agent {name} with coalition {coal}")


def check_decomposition(inst: FfcgInstance, max_requests: int = 8, max_coalitions: int = 64) -> Check:
    """Per-pair solving matches a solve of the undecomposed problem on small coalitions."""
    game = FfcgGame(inst, exact=True)
    tried = 0
    for mask in subsets((1 << inst.n) - 1):
        if tried >= max_coalitions:
            break
        reqs, servs = inst.pooled(mask)
        if not reqs or len(reqs) > max_requests:
            continue
        tried += 1
        oracle = min_cost_packing(
            [r.volume for r in reqs],
            [(s.cost_per_box, s.box_capacity, s.box_count) for s in servs],
            [r.pair for r in reqs],
            [s.pair for s in servs],
        )
        got = game.evaluate(mask)
        if oracle != got:
            return Check("decomposition", False, f"coalition {members(mask)}: decomposed {got} vs joint {oracle}")
    return Check("decomposition", True, f"{tried} coalition(s) with <= {max_requests} requests")


def check_greedy_dominance(inst: FfcgInstance) -> Check:
    """exact <= two-step <= FFD on each pair group of the grand coalition and singletons."""
    game = FfcgGame(inst)
    masks = [(1 << inst.n) - 1] + [1 << i for i in range(inst.n)]
    n_groups = 0
    for mask in masks:
        for k in range(len(game.pairs)):
            sub = mask & game.pair_active[k]
            volumes = [w for i, w in game.pair_reqs[k] if sub >> i & 1]
            boxes = [b for i, b in game.pair_boxes[k] if sub >> i & 1]
            if not volumes:
                continue
            n_groups += 1
            try:
                ffd = binpack.ffd_greedy(volumes, boxes).cost
            except InfeasibleError:
                continue
            two = solve_group(volumes, boxes).cost
            ex = solve_group(volumes, boxes, exact=True).cost
            if not ex <= two <= ffd:
                return Check("greedy_dominance", False, f"pair {game.pairs[k]}: exact {ex}, two-step {two}, ffd {ffd}")
    return Check("greedy_dominance", True, f"{n_groups} group(s)")


def verify_instance(inst: FfcgInstance, exact: bool = False) -> list[Check]:
    graph = build_collaboration_graph(inst)
    return [
        check_locality(graph, FfcgGame(inst, exact=exact), inst.forwarders),
        check_decomposition(inst),
        check_greedy_dominance(inst),
        Check("weight_partition", weight_partition_holds(inst.n), f"n={inst.n}"),
    ]
