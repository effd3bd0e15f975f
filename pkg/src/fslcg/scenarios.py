"""Seeded random forwarder instances.

Three designs: ``uniform`` scatters services over a fixed pool of port pairs;
``small_world`` and ``power_law`` first draw a collaboration topology and then
create one port pair per edge so the instance reproduces that topology.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass

import networkx as nx

from . import binpack
from .errors import InfeasibleError
from .ffcg import DEFAULT_BOX_CAPACITY, FfcgInstance, PortPair, Request, Service

KINDS = ("uniform", "small_world", "power_law")
POWER_LAW_RETRIES = 100


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "uniform"
    n_forwarders: int = 10
    seed: int = 0
    n_port_pairs: int = 100
    services_per_pair: tuple[int, int] = (1, 5)
    cost_range: tuple[int, int] = (700, 1300)
    boxes_range: tuple[int, int] = (20, 80)
    requests_per_service_range: tuple[int, int] = (1, 5)
    volume_range: tuple[int, int] = (1, 29)
    avg_degree: int = 4
    rewire_prob: float = 0.2
    power_exponent: float = 2.0
    box_capacity: int = DEFAULT_BOX_CAPACITY
    shared_pool: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_forwarders < 1:
            raise ValueError("n_forwarders must be positive")
        for name in ("services_per_pair", "cost_range", "boxes_range", "requests_per_service_range", "volume_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got {(lo, hi)}")
        if self.volume_range[1] > self.box_capacity:
            raise ValueError("largest volume exceeds the box capacity")
        if not 0.0 <= self.rewire_prob <= 1.0:
            raise ValueError("rewire_prob must lie in [0, 1]")
        if self.kind == "small_world":
            if self.avg_degree % 2 or not 2 <= self.avg_degree < self.n_forwarders:
                raise ValueError("small_world needs an even avg_degree with 2 <= avg_degree < n_forwarders")
        if self.kind == "power_law":
            if self.n_forwarders < 5:
                raise ValueError("power_law needs at least 5 forwarders")
            if self.power_exponent <= 0:
                raise ValueError("power_exponent must be positive")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> ScenarioConfig:
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**kw)


def forwarder_ids(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"F{i:0{width}d}" for i in range(n)]


def lane(k: int) -> PortPair:
    return PortPair(f"O{k:04d}", f"D{k:04d}")


class _Builder:
    def __init__(self, cfg: ScenarioConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.ids = forwarder_ids(cfg.n_forwarders)
        self.requests: list[Request] = []
        self.services: list[Service] = []

    def service(self, owner: int, pair: PortPair) -> None:
        cfg, rng = self.cfg, self.rng
        self.services.append(
            Service(
                owner=self.ids[owner],
                pair=pair,
                cost_per_box=rng.randint(*cfg.cost_range),
                box_count=rng.randint(*cfg.boxes_range),
                box_capacity=cfg.box_capacity,
            )
        )
        for _ in range(rng.randint(*cfg.requests_per_service_range)):
            self.requests.append(Request(self.ids[owner], pair, rng.randint(*cfg.volume_range)))

    def finish(self, edges: list[tuple[int, int]] | None) -> FfcgInstance:
        self.services = repair_self_sufficiency(self.requests, self.services)
        inst = FfcgInstance(
            forwarders=self.ids,
            requests=self.requests,
            services=self.services,
            box_capacity=self.cfg.box_capacity,
            edges=edges,
            meta={"scenario": self.cfg.to_json()},
        )
        inst.validate()
        return inst


def repair_self_sufficiency(requests: list[Request], services: list[Service]) -> list[Service]:
    """Raise box counts until each forwarder can FFD-pack its own requests on each pair.

    Extra boxes go to the owner's cheapest service on the pair.
    """
    own_reqs: dict[tuple[str, PortPair], list[int]] = {}
    for r in requests:
        own_reqs.setdefault((r.owner, r.pair), []).append(r.volume)
    services = list(services)
    for (owner, pair), volumes in own_reqs.items():
        idx = [k for k, s in enumerate(services) if s.owner == owner and s.pair == pair]
        if not idx:
            raise InfeasibleError(f"{owner} has requests on {pair} but no service there")
        cheapest = min(idx, key=lambda k: (services[k].cost_per_box, k))
        # one item per box always fits, so at most len(volumes) extra boxes are needed
        for _ in range(len(volumes) + 1):
            try:
                binpack.ffd_greedy(volumes, [services[k].box_type() for k in idx])
                break
            except InfeasibleError:
                s = services[cheapest]
                services[cheapest] = dataclasses.replace(s, box_count=s.box_count + 1)
        else:
            raise InfeasibleError(f"cannot repair {owner} on {pair}")
    return services


def generate_uniform(cfg: ScenarioConfig) -> FfcgInstance:
    if cfg.kind != "uniform":
        raise ValueError(f"expected a uniform config, got {cfg.kind!r}")
    rng = random.Random(cfg.seed)
    b = _Builder(cfg, rng)
    for k in range(cfg.n_port_pairs):
        pair = lane(k)
        for _ in range(rng.randint(*cfg.services_per_pair)):
            b.service(rng.randrange(cfg.n_forwarders), pair)
    return b.finish(None)


def _populate_edges(b: _Builder, edges: list[tuple[int, int]]) -> None:
    cfg, rng = b.cfg, b.rng
    for k, (u, v) in enumerate(edges):
        pair = lane(rng.randrange(cfg.n_port_pairs) if cfg.shared_pool else k)
        extra = max(0, rng.randint(*cfg.services_per_pair) - 2)
        for owner in [u, v] + [rng.choice((u, v)) for _ in range(extra)]:
            b.service(owner, pair)


def small_world_topology(n: int, degree: int, rewire_prob: float, seed: int) -> list[tuple[int, int]]:
    g = nx.watts_strogatz_graph(n, degree, rewire_prob, seed=seed)
    return sorted(tuple(sorted(e)) for e in g.edges())


def generate_small_world(cfg: ScenarioConfig) -> FfcgInstance:
    if cfg.kind != "small_world":
        raise ValueError(f"expected a small_world config, got {cfg.kind!r}")
    rng = random.Random(cfg.seed)
    edges = small_world_topology(cfg.n_forwarders, cfg.avg_degree, cfg.rewire_prob, rng.getrandbits(32))
    b = _Builder(cfg, rng)
    _populate_edges(b, edges)
    return b.finish(edges)


def power_law_degrees(n: int, exponent: float, rng: random.Random) -> list[int]:
    """Degrees drawn from p(d) ~ d**-exponent on [1, n-1], nudged to an even sum."""
    support = range(1, n)
    weights = [d**-exponent for d in support]
    degrees = rng.choices(support, weights, k=n)
    if sum(degrees) % 2:
        i = rng.randrange(n)
        degrees[i] += 1 if degrees[i] < n - 1 else -1
    return degrees


def power_law_topology(n: int, exponent: float, rng: random.Random) -> list[tuple[int, int]]:
    for _ in range(POWER_LAW_RETRIES):
        degrees = power_law_degrees(n, exponent, rng)
        if not nx.is_graphical(degrees, method="hh"):
            continue
        # Havel-Hakimi is deterministic, so shuffle which node gets which slot
        perm = list(range(n))
        rng.shuffle(perm)
        g = nx.havel_hakimi_graph([degrees[p] for p in perm])
        return sorted(tuple(sorted((perm[u], perm[v]))) for u, v in g.edges())
    raise InfeasibleError(f"no graphical power-law degree sequence after {POWER_LAW_RETRIES} draws")


def generate_power_law(cfg: ScenarioConfig) -> FfcgInstance:
    if cfg.kind != "power_law":
        raise ValueError(f"expected a power_law config, got {cfg.kind!r}")
    rng = random.Random(cfg.seed)
    edges = power_law_topology(cfg.n_forwarders, cfg.power_exponent, rng)
    b = _Builder(cfg, rng)
    _populate_edges(b, edges)
    return b.finish(edges)


GENERATORS = {"uniform": generate_uniform, "small_world": generate_small_world, "power_law": generate_power_law}


def generate(cfg: ScenarioConfig) -> FfcgInstance:
    return GENERATORS[cfg.kind](cfg)


def nested_family(inst: FfcgInstance, step: int = 5) -> list[FfcgInstance]:
    """The instance followed by copies with the last ``step`` forwarders repeatedly removed."""
    out = [inst]
    keep = list(inst.forwarders)
    while len(keep) > step:
        keep = keep[:-step]
        out.append(inst.subset(keep))
    return out


def worked_example() -> FfcgInstance:
    """Two forwarders A and B sharing the USLAX-CNSHA and DEHAM-SGSIN lanes."""
    sha = PortPair("USLAX", "CNSHA")
    sin = PortPair("DEHAM", "SGSIN")
    requests = [
        Request("A", sha, 14, "A.r1"),
        Request("A", sha, 12, "A.r2"),
        Request("A", sha, 10, "A.r3"),
        Request("A", sin, 15, "A.r4"),
        *(Request("B", sha, 6, f"B.r{k}") for k in range(1, 5)),
        Request("B", sin, 15, "B.r5"),
    ]
    services = [
        Service("A", sha, 900, 2, id="A.sha"),
        Service("A", sin, 1200, 1, id="A.sin"),
        Service("B", sha, 1000, 2, id="B.sha"),
        Service("B", sin, 1100, 1, id="B.sin"),
    ]
    return FfcgInstance(["A", "B"], requests, services)
