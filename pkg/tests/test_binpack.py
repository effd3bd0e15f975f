import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslcg.binpack import BoxType, Packing, box_order, exact_binpack, ffd_greedy, validate
from fslcg.errors import InfeasibleError
from fslcg.ffcg import solve_group
from fslcg.oracles import min_cost_packing


def random_group(rng, n_items=None, mixed=False):
    n_items = n_items if n_items is not None else rng.randint(1, 10)
    volumes = [rng.randint(1, 29) for _ in range(n_items)]
    boxes = []
    for t in range(rng.randint(1, 4)):
        cap = rng.choice([20, 30, 40]) if mixed else 30
        cap = max(cap, max(volumes, default=1))
        boxes.append(BoxType(rng.randint(700, 1300), rng.randint(1, 6), cap, f"s{t}"))
    # make sure a one-item-per-box packing exists
    if sum(b.count for b in boxes) < n_items:
        b = boxes[0]
        boxes[0] = BoxType(b.cost, n_items, b.capacity, b.key)
    return volumes, boxes


def oracle(volumes, boxes):
    return min_cost_packing(volumes, [(b.cost, b.capacity, b.count) for b in boxes])


def test_shared_lane_ffd(shared_lane_group):
    volumes, boxes = shared_lane_group
    p = ffd_greedy(volumes, boxes)
    validate(volumes, boxes, p)
    assert p.cost == 2800
    assert len(p.bins) == 3
    assert p.used(2) == [2, 1]


def test_shared_lane_exact(shared_lane_group):
    volumes, boxes = shared_lane_group
    bounds = ffd_greedy(volumes, boxes).used(2)
    p = exact_binpack(volumes, boxes, bounds)
    validate(volumes, boxes, p, bounds)
    assert p.cost == 1800
    contents = sorted(sorted((volumes[i] for i in items), reverse=True) for _, items in p.bins)
    assert contents == [[12, 6, 6, 6], [14, 10, 6]]
    assert all(t == 0 for t, _ in p.bins)  # both boxes from the cheaper service


def test_single_request_takes_cheapest_box():
    boxes = [BoxType(1000, 3, 30, "x"), BoxType(800, 1, 30, "y")]
    p = ffd_greedy([17], boxes)
    assert p.cost == 800 and p.bins == [(1, [0])]


def test_ties_broken_by_key():
    boxes = [BoxType(900, 1, 30, "b"), BoxType(900, 1, 30, "a")]
    assert box_order(boxes) == [1, 0]
    assert ffd_greedy([5], boxes).bins == [(1, [0])]


def test_no_requests():
    boxes = [BoxType(900, 1, 30)]
    assert ffd_greedy([], boxes).cost == 0
    assert exact_binpack([], boxes).cost == 0
    assert solve_group([], boxes).cost == 0


def test_infeasible():
    with pytest.raises(InfeasibleError):
        ffd_greedy([20, 20], [BoxType(900, 1, 30)])
    with pytest.raises(InfeasibleError):
        exact_binpack([31], [BoxType(900, 5, 30)])


def test_ffd_shortfall_falls_back_to_exact():
    # FFD strands the last 9 but 12+9+9 twice fills both boxes exactly
    volumes, boxes = [12, 12, 9, 9, 9, 9], [BoxType(900, 2, 30)]
    with pytest.raises(InfeasibleError):
        ffd_greedy(volumes, boxes)
    p = solve_group(volumes, boxes)
    validate(volumes, boxes, p)
    assert p.cost == 1800


def test_validate_rejects_bad_packings():
    boxes = [BoxType(900, 1, 30)]
    with pytest.raises(AssertionError):
        validate([20, 20], boxes, Packing([(0, [0, 1])], 900))  # overfull
    with pytest.raises(AssertionError):
        validate([20], boxes, Packing([], 0))  # item missing
    with pytest.raises(AssertionError):
        validate([5, 5], boxes, Packing([(0, [0]), (0, [1])], 1800))  # too many boxes
    with pytest.raises(AssertionError):
        validate([5], boxes, Packing([(0, [0])], 1))  # wrong cost


@pytest.mark.parametrize("seed", range(60))
def test_exact_matches_oracle(seed):
    rng = random.Random(seed)
    volumes, boxes = random_group(rng, rng.randint(0, 8), mixed=seed % 2 == 1)
    want = oracle(volumes, boxes)
    p = exact_binpack(volumes, boxes)
    validate(volumes, boxes, p)
    assert p.cost == want


@pytest.mark.parametrize("seed", range(40))
def test_dominance_and_volume_bound(seed):
    rng = random.Random(1000 + seed)
    volumes, boxes = random_group(rng, mixed=seed % 3 == 0)
    try:
        ffd = ffd_greedy(volumes, boxes)
    except InfeasibleError:
        pytest.skip("greedy shortfall")
    two = solve_group(volumes, boxes)
    ex = solve_group(volumes, boxes, exact=True)
    validate(volumes, boxes, two, ffd.used(len(boxes)))
    validate(volumes, boxes, ex)
    assert ex.cost <= two.cost <= ffd.cost
    cheapest_per_unit = min(b.cost / b.capacity for b in boxes)
    assert ex.cost >= math.ceil(sum(volumes) * cheapest_per_unit - 1e-9)


def test_adversarial_equal_capacity_terminates():
    rng = random.Random(7)
    for _ in range(20):
        volumes = [rng.randint(8, 22) for _ in range(10)]
        boxes = [BoxType(rng.randint(700, 1300), 10, 30, str(t)) for t in range(3)]
        p = exact_binpack(volumes, boxes)
        validate(volumes, boxes, p)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=7), st.integers(1, 3))
def test_exact_never_worse_than_incumbent(volumes, n_types):
    boxes = [BoxType(900 + 50 * t, len(volumes), 30, str(t)) for t in range(n_types)]
    greedy = ffd_greedy(volumes, boxes)
    p = exact_binpack(volumes, boxes, incumbent=greedy)
    assert p.cost <= greedy.cost
    assert p.cost == oracle(volumes, boxes)
