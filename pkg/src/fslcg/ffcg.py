"""Freight forwarder collaboration game.

Forwarders own shipment requests and pre-bought container services on port
pairs. A coalition's value is the cheapest way to ship all of its members'
requests in its members' containers. Requests only fit services on the same
port pair, so the problem splits into one bin-packing problem per pair.
"""

from __future__ import annotations

import json
import time
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from . import binpack
from .binpack import BoxType, Packing
from .errors import InfeasibleError
from .graph import AgentGraph, Coalition, members
from .shapley import CharacteristicFunction, FunctionGame, ShapleyResult, fs_lcg_shapley

DEFAULT_BOX_CAPACITY = 30


@dataclass(frozen=True, order=True)
class PortPair:
    origin: str
    destination: str

    def __post_init__(self) -> None:
        for code in (self.origin, self.destination):
            if len(code) != 5 or not code.isalnum():
                raise ValueError(f"port code must be 5 alphanumeric characters, got {code!r}")
        if self.origin == self.destination:
            raise ValueError(f"origin and destination are both {self.origin}")

    def __str__(self) -> str:
        return f"{self.origin}-{self.destination}"

    @classmethod
    def parse(cls, text: str) -> PortPair:
        origin, _, destination = text.partition("-")
        return cls(origin, destination)


@dataclass(frozen=True)
class Service:
    owner: str
    pair: PortPair
    cost_per_box: int
    box_count: int
    box_capacity: int = DEFAULT_BOX_CAPACITY
    id: str = ""

    def __post_init__(self) -> None:
        if self.cost_per_box <= 0 or self.box_count < 1 or self.box_capacity <= 0:
            raise ValueError(f"invalid service {self}")

    def box_type(self) -> BoxType:
        return BoxType(self.cost_per_box, self.box_count, self.box_capacity, self.id)


@dataclass(frozen=True)
class Request:
    owner: str
    pair: PortPair
    volume: int
    id: str = ""

    def __post_init__(self) -> None:
        if self.volume <= 0:
            raise ValueError(f"request volume must be positive, got {self.volume}")


@dataclass
class Assignment:
    # (service id, box index within that service, request ids)
    boxes: list[tuple[str, int, list[str]]] = field(default_factory=list)
    total_cost: int = 0

    def to_json(self) -> dict:
        return {
            "boxes": [{"service": s, "box": b, "requests": list(r)} for s, b, r in self.boxes],
            "total_cost": self.total_cost,
        }


@dataclass
class FfcgInstance:
    forwarders: list[str]
    requests: list[Request]
    services: list[Service]
    box_capacity: int = DEFAULT_BOX_CAPACITY
    edges: list[tuple[int, int]] | None = None  # intended topology, if generated
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.forwarders)) != len(self.forwarders):
            raise ValueError("duplicate forwarder ids")
        known = set(self.forwarders)
        for item in (*self.requests, *self.services):
            if item.owner not in known:
                raise ValueError(f"unknown owner {item.owner!r}")
        self.requests = [r if r.id else _with_id(r, f"{r.owner}.r{k}") for k, r in enumerate(self.requests)]
        self.services = [s if s.id else _with_id(s, f"{s.owner}.s{k}") for k, s in enumerate(self.services)]
        ids = [x.id for x in (*self.requests, *self.services)]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate request/service ids")

    @property
    def n(self) -> int:
        return len(self.forwarders)

    def index(self, forwarder: str) -> int:
        return self.forwarders.index(forwarder)

    def coalition(self, names: Iterable[str]) -> Coalition:
        mask = 0
        for name in names:
            mask |= 1 << self.index(name)
        return mask

    def pooled(self, mask: Coalition) -> tuple[list[Request], list[Service]]:
        owners = {self.forwarders[i] for i in members(mask)}
        return (
            [r for r in self.requests if r.owner in owners],
            [s for s in self.services if s.owner in owners],
        )

    def subset(self, keep: Sequence[str]) -> FfcgInstance:
        """Instance restricted to the given forwarders (their data only)."""
        kept = set(keep)
        order = [f for f in self.forwarders if f in kept]
        pos = {f: k for k, f in enumerate(order)}
        edges = None
        if self.edges is not None:
            edges = [
                (pos[self.forwarders[u]], pos[self.forwarders[v]])
                for u, v in self.edges
                if self.forwarders[u] in kept and self.forwarders[v] in kept
            ]
        return FfcgInstance(
            forwarders=order,
            requests=[r for r in self.requests if r.owner in kept],
            services=[s for s in self.services if s.owner in kept],
            box_capacity=self.box_capacity,
            edges=edges,
            meta=dict(self.meta),
        )

    def validate(self) -> None:
        """Check that every forwarder can ship its own requests on its own services."""
        by_pair = defaultdict(int)
        caps = defaultdict(int)
        largest = defaultdict(int)
        for s in self.services:
            caps[s.owner, s.pair] += s.box_count * s.box_capacity
            largest[s.pair] = max(largest[s.pair], s.box_capacity)
        for r in self.requests:
            by_pair[r.owner, r.pair] += r.volume
            if r.volume > largest[r.pair]:
                raise InfeasibleError(f"request {r.id} ({r.volume}) fits no service on {r.pair}")
        for (owner, pair), demand in by_pair.items():
            if caps[owner, pair] < demand:
                raise InfeasibleError(f"{owner} has {caps[owner, pair]} capacity on {pair} for demand {demand}")


def _with_id(item, new_id: str):
    return replace(item, id=new_id)


# -- JSON ---------------------------------------------------------------------


def instance_to_json(inst: FfcgInstance) -> dict:
    out = {
        "forwarders": list(inst.forwarders),
        "box_capacity": inst.box_capacity,
        "services": [
            {
                "id": s.id,
                "owner": s.owner,
                "origin": s.pair.origin,
                "destination": s.pair.destination,
                "cost_per_box": s.cost_per_box,
                "box_count": s.box_count,
                **({"box_capacity": s.box_capacity} if s.box_capacity != inst.box_capacity else {}),
            }
            for s in inst.services
        ],
        "requests": [
            {"id": r.id, "owner": r.owner, "origin": r.pair.origin, "destination": r.pair.destination, "volume": r.volume}
            for r in inst.requests
        ],
    }
    if inst.edges is not None:
        out["edges"] = [list(e) for e in inst.edges]
    if inst.meta:
        out["meta"] = inst.meta
    return out


def instance_from_json(data: dict) -> FfcgInstance:
    cap = int(data.get("box_capacity", DEFAULT_BOX_CAPACITY))
    services = [
        Service(
            owner=str(s["owner"]),
            pair=PortPair(s["origin"], s["destination"]),
            cost_per_box=int(s["cost_per_box"]),
            box_count=int(s["box_count"]),
            box_capacity=int(s.get("box_capacity", cap)),
            id=str(s.get("id", "")),
        )
        for s in data["services"]
    ]
    requests = [
        Request(str(r["owner"]), PortPair(r["origin"], r["destination"]), int(r["volume"]), str(r.get("id", "")))
        for r in data["requests"]
    ]
    edges = [tuple(e) for e in data["edges"]] if "edges" in data else None
    return FfcgInstance([str(f) for f in data["forwarders"]], requests, services, cap, edges, data.get("meta", {}))


def dumps_instance(inst: FfcgInstance) -> str:
    return json.dumps(instance_to_json(inst), indent=1) + "\n"


def load_instance(path: str | Path) -> FfcgInstance:
    return instance_from_json(json.loads(Path(path).read_text()))


# -- graph and decomposition --------------------------------------------------


def build_collaboration_graph(inst: FfcgInstance) -> AgentGraph:
    """Edge between two forwarders iff both hold a request or a service on a common pair."""
    active: dict[PortPair, int] = defaultdict(int)
    for item in (*inst.requests, *inst.services):
        active[item.pair] |= 1 << inst.index(item.owner)
    adj = [0] * inst.n
    for mask in active.values():
        for i in members(mask):
            adj[i] |= mask & ~(1 << i)
    return AgentGraph(inst.n, tuple(adj))


def decompose_by_port_pair(
    requests: Sequence[Request], services: Sequence[Service]
) -> list[tuple[PortPair, list[Request], list[Service]]]:
    """Group requests and services by port pair, sorted by pair.

    Raises :class:`InfeasibleError` when a pair has requests but no service.
    """
    groups: dict[PortPair, tuple[list[Request], list[Service]]] = {}
    for r in requests:
        groups.setdefault(r.pair, ([], []))[0].append(r)
    for s in services:
        groups.setdefault(s.pair, ([], []))[1].append(s)
    out = []
    for pair in sorted(groups):
        reqs, servs = groups[pair]
        if reqs and not servs:
            raise InfeasibleError(f"{len(reqs)} request(s) on {pair} but no service")
        out.append((pair, reqs, servs))
    return out


def _single_pair(requests: Sequence[Request], services: Sequence[Service]) -> None:
    pairs = {x.pair for x in (*requests, *services)}
    if len(pairs) > 1:
        raise ValueError(f"expected one port pair, got {sorted(map(str, pairs))}")


def _assignment(packing: Packing, requests: Sequence[Request], services: Sequence[Service]) -> Assignment:
    counter: dict[int, int] = defaultdict(int)
    out = Assignment(total_cost=packing.cost)
    for t, items in packing.bins:
        out.boxes.append((services[t].id, counter[t], [requests[i].id for i in items]))
        counter[t] += 1
    return out


def ffd_greedy(requests: Sequence[Request], services: Sequence[Service]) -> tuple[Assignment, list[int]]:
    """First fit decreasing on one port pair; also returns boxes used per service."""
    _single_pair(requests, services)
    packing = binpack.ffd_greedy([r.volume for r in requests], [s.box_type() for s in services])
    return _assignment(packing, requests, services), packing.used(len(services))


def exact_binpack(
    requests: Sequence[Request], services: Sequence[Service], box_bounds: Sequence[int] | None = None
) -> Assignment:
    """Cheapest assignment on one port pair with at most ``box_bounds[s]`` boxes per service."""
    _single_pair(requests, services)
    packing = binpack.exact_binpack([r.volume for r in requests], [s.box_type() for s in services], box_bounds)
    return _assignment(packing, requests, services)


def solve_group(volumes: Sequence[int], boxes: Sequence[BoxType], exact: bool = False) -> Packing:
    """Greedy packing then exact refinement.

    Default: the exact step may only use as many boxes per service as FFD did.
    ``exact=True`` keeps the original box counts. If FFD itself runs out of
    boxes the exact step runs on the original counts either way.
    """
    if not volumes:
        return Packing()
    try:
        greedy = binpack.ffd_greedy(volumes, boxes)
    except InfeasibleError:
        return binpack.exact_binpack(volumes, boxes)
    bounds = None if exact else greedy.used(len(boxes))
    return binpack.exact_binpack(volumes, boxes, bounds, incumbent=greedy)


def solve(requests: Sequence[Request], services: Sequence[Service], exact: bool = False) -> Assignment:
    """Optimal (or two-step) assignment of all requests, pair by pair."""
    out = Assignment()
    for _, reqs, servs in decompose_by_port_pair(requests, services):
        if not reqs:
            continue
        packing = solve_group([r.volume for r in reqs], [s.box_type() for s in servs], exact)
        part = _assignment(packing, reqs, servs)
        out.boxes.extend(part.boxes)
        out.total_cost += part.total_cost
    return out


def phi(requests: Sequence[Request], services: Sequence[Service], exact: bool = False) -> int:
    """Minimum total shipping cost of ``requests`` on ``services``."""
    return solve(requests, services, exact).total_cost


# -- the game -----------------------------------------------------------------


class FfcgGame(CharacteristicFunction):
    """Coalition cost of an :class:`FfcgInstance`.

    Per-pair costs are cached by the coalition's restriction to the forwarders
    active on that pair, so coalitions that agree on a pair share its solve.
    """

    def __init__(self, inst: FfcgInstance, exact: bool = False):
        super().__init__(inst.n)
        self.inst = inst
        self.exact = exact
        pairs = sorted({x.pair for x in (*inst.requests, *inst.services)})
        self.pairs = pairs
        pos = {p: k for k, p in enumerate(pairs)}
        owner = {f: k for k, f in enumerate(inst.forwarders)}
        self.pair_reqs: list[list[tuple[int, int]]] = [[] for _ in pairs]
        self.pair_boxes: list[list[tuple[int, BoxType]]] = [[] for _ in pairs]
        self.pair_active = [0] * len(pairs)
        self.agent_pairs = [0] * inst.n
        for r in inst.requests:
            k, i = pos[r.pair], owner[r.owner]
            self.pair_reqs[k].append((i, r.volume))
            self.pair_active[k] |= 1 << i
            self.agent_pairs[i] |= 1 << k
        for s in inst.services:
            k, i = pos[s.pair], owner[s.owner]
            self.pair_boxes[k].append((i, s.box_type()))
            self.pair_active[k] |= 1 << i
            self.agent_pairs[i] |= 1 << k
        self._group: dict[tuple[int, Coalition], int] = {}
        self.group_solves = 0

    def cache_clear(self) -> None:
        super().cache_clear()
        self._group = {}
        self.group_solves = 0

    def pair_cost(self, k: int, mask: Coalition) -> int:
        sub = mask & self.pair_active[k]
        key = (k, sub)
        try:
            return self._group[key]
        except KeyError:
            pass
        volumes = [w for i, w in self.pair_reqs[k] if sub >> i & 1]
        boxes = [b for i, b in self.pair_boxes[k] if sub >> i & 1]
        if volumes and not boxes:
            raise InfeasibleError(f"no service for {len(volumes)} request(s) on {self.pairs[k]}")
        cost = solve_group(volumes, boxes, self.exact).cost
        self.group_solves += 1
        self._group[key] = cost
        return cost

    def _value(self, mask: Coalition) -> int:
        touched = 0
        for i in members(mask):
            touched |= self.agent_pairs[i]
        return sum(self.pair_cost(k, mask) for k in members(touched))


def ffcg_characteristic(inst: FfcgInstance, exact: bool = False) -> FfcgGame:
    return FfcgGame(inst, exact)


def pairwise_shapley(game: FfcgGame) -> ShapleyResult:
    """Exact Shapley values as a sum of one small game per port pair.

    The coalition cost is a sum of per-pair costs and each pair only involves
    the forwarders active on it, so by additivity the Shapley value is the sum
    of FS-LCG results on each pair's own (complete-graph) subgame.
    """
    t0 = time.perf_counter()
    n = game.n
    totals = [Fraction(0)] * n
    evals = 0
    for k, active in enumerate(game.pair_active):
        labels = members(active)
        if not labels:
            continue

        def pair_value(sub: Coalition, k=k, labels=labels) -> int:
            return game.pair_cost(k, sum(1 << labels[j] for j in members(sub)))

        res = fs_lcg_shapley(AgentGraph.complete(len(labels)), FunctionGame(len(labels), pair_value))
        evals += res.eval_count
        for j, val in zip(labels, res.values):
            totals[j] += val
    return ShapleyResult(
        values=totals,
        v_grand=game.evaluate((1 << n) - 1),
        eval_count=evals,
        elapsed=time.perf_counter() - t0,
        method="pairwise",
    )


@dataclass
class SavingsReport:
    standalone: list[int]
    allocated: list[Fraction]
    savings: list[Fraction]

    @property
    def average(self) -> Fraction:
        return sum(self.savings, Fraction(0)) / len(self.savings) if self.savings else Fraction(0)

    def to_json(self, labels: Sequence[str]) -> dict:
        return {
            "per_forwarder": {
                lab: {"standalone": s, "allocated": float(a), "savings": float(x)}
                for lab, s, a, x in zip(labels, self.standalone, self.allocated, self.savings)
            },
            "average_savings": float(self.average),
        }


def savings_report(game: CharacteristicFunction, result: ShapleyResult) -> SavingsReport:
    """Relative saving of each agent: (standalone cost - allocation) / standalone cost."""
    standalone = [game.evaluate(1 << i) for i in range(game.n)]
    savings = [Fraction(0) if s == 0 else (s - a) / s for s, a in zip(standalone, result.values)]
    return SavingsReport(standalone, list(result.values), savings)
