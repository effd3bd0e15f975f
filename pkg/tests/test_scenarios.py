import random
from collections import Counter

import numpy as np
import pytest

from fslcg import scenarios
from fslcg.ffcg import PortPair, Request, Service, build_collaboration_graph, dumps_instance
from fslcg.scenarios import ScenarioConfig, generate, nested_family, power_law_topology, small_world_topology


def cfg(**kw):
    return ScenarioConfig(**kw)


@pytest.mark.parametrize(
    "config",
    [
        cfg(kind="uniform", n_forwarders=12, seed=4),
        cfg(kind="small_world", n_forwarders=15, seed=4, avg_degree=6),
        cfg(kind="power_law", n_forwarders=20, seed=4),
        cfg(kind="small_world", n_forwarders=10, seed=9, shared_pool=True),
    ],
    ids=lambda c: c.kind,
)
def test_determinism(config):
    assert dumps_instance(generate(config)) == dumps_instance(generate(config))
    other = ScenarioConfig(**{**config.to_json(), "seed": config.seed + 1})
    assert dumps_instance(generate(other)) != dumps_instance(generate(config))


@pytest.mark.parametrize("seed", range(10))
def test_uniform_ranges(seed):
    inst = generate(cfg(n_forwarders=30, seed=seed))
    inst.validate()
    assert all(700 <= s.cost_per_box <= 1300 for s in inst.services)
    assert all(1 <= r.volume <= 29 for r in inst.requests)
    assert all(s.box_count >= 20 for s in inst.services)
    per_pair = Counter(s.pair for s in inst.services)
    assert len(per_pair) == 100 and all(1 <= c <= 5 for c in per_pair.values())
    # requests per service, counted per (owner, pair) block
    svc = Counter((s.owner, s.pair) for s in inst.services)
    req = Counter((r.owner, r.pair) for r in inst.requests)
    assert all(svc[k] <= req[k] <= 5 * svc[k] for k in svc)


def test_nested_family():
    fam = nested_family(generate(cfg(n_forwarders=30, seed=1)))
    assert [f.n for f in fam] == [30, 25, 20, 15, 10, 5]
    for big, small in zip(fam, fam[1:]):
        assert small.forwarders == big.forwarders[: small.n]
        assert set(r.id for r in small.requests) <= set(r.id for r in big.requests)
        small.validate()


def test_ring_lattice_without_rewiring():
    edges = small_world_topology(12, 4, 0.0, seed=3)
    want = sorted(tuple(sorted((i, (i + k) % 12))) for i in range(12) for k in (1, 2))
    assert edges == want
    inst = generate(cfg(kind="small_world", n_forwarders=12, avg_degree=4, rewire_prob=0.0, seed=3))
    assert set(build_collaboration_graph(inst).degrees()) == {4}


def test_small_world_edge_count():
    for seed in range(5):
        inst = generate(cfg(kind="small_world", n_forwarders=10, avg_degree=4, seed=seed))
        assert len(inst.edges) == 20


@pytest.mark.parametrize("kind,n,deg", [("small_world", 20, 4), ("small_world", 50, 8), ("power_law", 40, None), ("power_law", 5, None)])
def test_topology_fidelity(kind, n, deg):
    for seed in range(3):
        extra = {"avg_degree": deg} if deg else {}
        inst = generate(cfg(kind=kind, n_forwarders=n, seed=seed, **extra))
        inst.validate()
        assert build_collaboration_graph(inst).edges() == sorted(inst.edges)


def test_grids_instantiable():
    for n in (10, 20, 30, 40, 50):
        for deg in (2, 4, 6, 8):
            generate(cfg(kind="small_world", n_forwarders=n, avg_degree=deg, seed=0)).validate()
    for n in (5, 10, 20, 40):
        generate(cfg(kind="power_law", n_forwarders=n, seed=0)).validate()


def test_power_law_ccdf_slope():
    n, gamma = 40, 2.0
    degrees = []
    for seed in range(20):
        deg = Counter()
        for u, v in power_law_topology(n, gamma, random.Random(seed)):
            deg[u] += 1
            deg[v] += 1
        degrees += [deg[i] for i in range(n)]
    degrees = np.array(degrees)
    assert degrees.min() >= 1 and degrees.max() <= n - 1

    def slope(ds, ccdf):
        return np.polyfit(np.log(ds), np.log(ccdf), 1)[0]

    # fit away from the n-1 cutoff, which bends the tail down
    ds = np.arange(1, n // 4 + 1)
    emp = slope(ds, np.array([(degrees >= d).mean() for d in ds]))
    pmf = np.arange(1, n, dtype=float) ** -gamma
    pmf /= pmf.sum()
    theory = slope(ds, np.array([pmf[d - 1 :].sum() for d in ds]))
    assert -1.5 <= emp <= -0.5
    assert abs(emp - theory) < 0.2


def test_repair_raises_box_counts():
    inst = generate(cfg(n_forwarders=6, seed=2, boxes_range=(1, 1), requests_per_service_range=(3, 5)))
    inst.validate()
    assert any(s.box_count > 1 for s in inst.services)


def test_repair_picks_cheapest_service():
    pair = PortPair("AAAAA", "BBBBB")
    reqs = [Request("A", pair, 20, "r1"), Request("A", pair, 20, "r2")]
    elsewhere = PortPair("AAAAA", "CCCCC")
    servs = [Service("A", pair, 1000, 1, id="x"), Service("A", pair, 800, 1, id="y"), Service("A", elsewhere, 700, 1, id="z")]
    fixed = scenarios.repair_self_sufficiency(reqs, servs)
    assert [s.box_count for s in fixed] == [1, 1, 1]
    fixed = scenarios.repair_self_sufficiency(reqs + [Request("A", pair, 25, "r3")], servs)
    assert [s.box_count for s in fixed] == [1, 2, 1]


def test_config_validation_and_json():
    with pytest.raises(ValueError):
        cfg(kind="ring")
    with pytest.raises(ValueError):
        cfg(kind="small_world", n_forwarders=10, avg_degree=3)
    with pytest.raises(ValueError):
        cfg(kind="small_world", n_forwarders=4, avg_degree=4)
    with pytest.raises(ValueError):
        cfg(kind="power_law", n_forwarders=4)
    with pytest.raises(ValueError):
        cfg(volume_range=(1, 31))
    with pytest.raises(ValueError):
        cfg(cost_range=(0, 5))
    c = cfg(kind="small_world", n_forwarders=14, avg_degree=6, seed=2**63 - 1)
    assert ScenarioConfig.from_json(c.to_json()) == c
    with pytest.raises(ValueError):
        ScenarioConfig.from_json({"nope": 1})


def test_shared_pool_reuses_pairs():
    inst = generate(cfg(kind="small_world", n_forwarders=30, avg_degree=8, seed=0, shared_pool=True, n_port_pairs=20))
    inst.validate()
    assert len({s.pair for s in inst.services}) <= 20
