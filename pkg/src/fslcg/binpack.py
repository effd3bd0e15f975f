"""One-dimensional bin packing with priced, counted box types.

Items are integer volumes. A :class:`BoxType` is a service's pool of identical
boxes: ``count`` boxes of capacity ``capacity`` at ``cost`` each. Both solvers
return a :class:`Packing` whose bins reference box types by position.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from .errors import InfeasibleError


@dataclass(frozen=True)
class BoxType:
    cost: int
    count: int
    capacity: int
    key: str = ""

    def __post_init__(self) -> None:
        if self.cost <= 0 or self.count < 0 or self.capacity <= 0:
            raise ValueError(f"invalid box type {self}")


@dataclass
class Packing:
    # (box type index, item indices) per opened box
    bins: list[tuple[int, list[int]]] = field(default_factory=list)
    cost: int = 0

    def used(self, n_types: int) -> list[int]:
        out = [0] * n_types
        for t, _ in self.bins:
            out[t] += 1
        return out


def box_order(boxes: Sequence[BoxType]) -> list[int]:
    """Type indices by ascending cost, ties broken by key then position."""
    return sorted(range(len(boxes)), key=lambda t: (boxes[t].cost, boxes[t].key, t))


def validate(volumes: Sequence[int], boxes: Sequence[BoxType], packing: Packing, bounds: Sequence[int] | None = None) -> None:
    """Raise ``AssertionError`` unless every item sits in exactly one box that it fits."""
    seen = sorted(i for _, items in packing.bins for i in items)
    assert seen == list(range(len(volumes))), "each item must be packed exactly once"
    limit = bounds if bounds is not None else [b.count for b in boxes]
    used = packing.used(len(boxes))
    assert all(u <= lim for u, lim in zip(used, limit)), f"box counts {used} exceed {list(limit)}"
    for t, items in packing.bins:
        assert items, "opened box is empty"
        assert sum(volumes[i] for i in items) <= boxes[t].capacity, "box over capacity"
    assert packing.cost == sum(boxes[t].cost for t, _ in packing.bins), "cost mismatch"


def ffd_greedy(volumes: Sequence[int], boxes: Sequence[BoxType]) -> Packing:
    """First fit decreasing; new boxes come from the cheapest type that still has one."""
    order = sorted(range(len(volumes)), key=lambda i: (-volumes[i], i))
    left = [b.count for b in boxes]
    types = box_order(boxes)
    residual: list[int] = []
    packing = Packing()
    for i in order:
        w = volumes[i]
        for k, r in enumerate(residual):
            if r >= w:
                residual[k] -= w
                packing.bins[k][1].append(i)
                break
        else:
            for t in types:
                if left[t] and boxes[t].capacity >= w:
                    left[t] -= 1
                    residual.append(boxes[t].capacity - w)
                    packing.bins.append((t, [i]))
                    packing.cost += boxes[t].cost
                    break
            else:
                raise InfeasibleError(f"no box left for item {i} of volume {w}")
    return packing


class _Search:
    """Depth-first branch and bound over item -> box decisions.

    Items go in decreasing volume. Box types with equal (cost, capacity) are
    merged into one class so only one "open a new box" branch exists per
    class, and among open boxes only one per distinct (class, residual) pair
    is tried. Equal-volume items are placed in non-decreasing box order.
    """

    def __init__(self, volumes: Sequence[int], boxes: Sequence[BoxType], bounds: Sequence[int]):
        self.bounds = bounds
        self.order = sorted(range(len(volumes)), key=lambda i: (-volumes[i], i))
        self.w = [volumes[i] for i in self.order]
        self.suffix = [0] * (len(self.w) + 1)
        for k in range(len(self.w) - 1, -1, -1):
            self.suffix[k] = self.suffix[k + 1] + self.w[k]

        classes: dict[tuple[int, int], list[int]] = {}
        for t in box_order(boxes):
            if bounds[t] > 0:
                classes.setdefault((boxes[t].cost, boxes[t].capacity), []).append(t)
        self.cls = list(classes)  # (cost, capacity), ascending cost
        self.members = [classes[c] for c in self.cls]
        self.left = [sum(bounds[t] for t in mem) for mem in self.members]
        self.by_ratio = sorted(range(len(self.cls)), key=lambda c: self.cls[c][0] / self.cls[c][1])
        # a cheaper class of the same capacity makes opening class c pointless
        # while it has boxes left (swap the two boxes in any completion)
        self.dominators = [
            [d for d, (dcost, dcap) in enumerate(self.cls) if dcap == cap and dcost < cost]
            for c, (cost, cap) in enumerate(self.cls)
        ]
        half = max((cap for _, cap in self.cls), default=0) / 2
        self.big_suffix = [0] * (len(self.w) + 1)
        self.last_big = -1
        for k in range(len(self.w) - 1, -1, -1):
            is_big = self.w[k] > half
            self.big_suffix[k] = self.big_suffix[k + 1] + is_big
            if is_big and self.last_big < 0:
                self.last_big = k

        self.bin_cls: list[int] = []
        self.bin_res: list[int] = []
        self.bin_items: list[list[int]] = []
        self.where = [0] * len(self.w)
        self.best = math.inf
        self.best_bins: list[tuple[int, list[int]]] | None = None
        self.nodes = 0

    def lower_bound(self, k: int) -> float:
        # residual space below the smallest item can never be used again
        smallest = self.w[-1]
        excess = self.suffix[k] - sum(r for r in self.bin_res if r >= smallest)
        # items above half the largest capacity pairwise exclude each other
        big = self.big_suffix[k]
        if big:
            big -= sum(1 for r in self.bin_res if r >= self.w[self.last_big])
        if excess <= 0 and big <= 0:
            return 0
        caps = [cap for c, (_, cap) in enumerate(self.cls) if self.left[c]]
        if not caps:
            return math.inf
        # cheapest ``need`` boxes, each holding at most the largest capacity
        need = max(-(-excess // max(caps)), big)
        cheapest = 0
        for c, (cost, _) in enumerate(self.cls):
            take = min(need, self.left[c])
            cheapest += take * cost
            need -= take
            if not need:
                break
        if need:
            return math.inf
        if excess <= 0:
            return cheapest
        # fractional cover by cost per unit of capacity
        frac = 0.0
        rem = excess
        for c in self.by_ratio:
            cost, cap = self.cls[c]
            take = min(rem, self.left[c] * cap)
            frac += take * cost / cap
            rem -= take
            if rem <= 0:
                break
        if rem > 0:
            return math.inf
        return max(cheapest, math.ceil(frac - 1e-9))

    def run(self, cost: int, k: int) -> None:
        self.nodes += 1
        if k == len(self.w):
            if cost < self.best:
                self.best = cost
                self.best_bins = [(c, list(items)) for c, items in zip(self.bin_cls, self.bin_items)]
            return
        if cost + self.lower_bound(k) >= self.best:
            return
        w = self.w[k]
        start = self.where[k - 1] if k and self.w[k - 1] == w else 0
        tried = set()
        for b in range(start, len(self.bin_res)):
            r = self.bin_res[b]
            if r < w or (self.bin_cls[b], r) in tried:
                continue
            tried.add((self.bin_cls[b], r))
            self.bin_res[b] = r - w
            self.bin_items[b].append(k)
            self.where[k] = b
            self.run(cost, k + 1)
            self.bin_items[b].pop()
            self.bin_res[b] = r
        for c, (ccost, cap) in enumerate(self.cls):
            if not self.left[c] or cap < w or cost + ccost >= self.best:
                continue
            if any(self.left[d] for d in self.dominators[c]):
                continue
            self.left[c] -= 1
            self.bin_cls.append(c)
            self.bin_res.append(cap - w)
            self.bin_items.append([k])
            self.where[k] = len(self.bin_res) - 1
            self.run(cost + ccost, k + 1)
            self.bin_items.pop()
            self.bin_res.pop()
            self.bin_cls.pop()
            self.left[c] += 1

    def packing(self) -> Packing:
        assert self.best_bins is not None
        taken = [0] * len(self.cls)
        out = Packing(cost=int(self.best))
        # hand out concrete box types within each class in key order
        for c, items in self.best_bins:
            t = self._nth_member(c, taken[c])
            taken[c] += 1
            out.bins.append((t, sorted(self.order[k] for k in items)))
        return out

    def _nth_member(self, c: int, nth: int) -> int:
        for t in self.members[c]:
            cap = self.bounds[t]
            if nth < cap:
                return t
            nth -= cap
        raise AssertionError("class over-allocated")


def exact_binpack(
    volumes: Sequence[int],
    boxes: Sequence[BoxType],
    bounds: Sequence[int] | None = None,
    incumbent: Packing | None = None,
) -> Packing:
    """Minimum-cost packing using at most ``bounds[t]`` boxes of type ``t``.

    ``bounds`` defaults to each type's ``count``. A feasible ``incumbent``
    (typically the FFD packing) seeds the upper bound; it is returned as-is
    when nothing cheaper exists.
    """
    bounds = list(bounds) if bounds is not None else [b.count for b in boxes]
    if len(bounds) != len(boxes):
        raise ValueError("one bound per box type required")
    if not volumes:
        return Packing()
    search = _Search(volumes, boxes, bounds)
    if incumbent is not None:
        search.best = incumbent.cost
    search.run(0, 0)
    if search.best_bins is None:
        if incumbent is not None:
            return incumbent
        raise InfeasibleError(f"{len(volumes)} items do not fit the available boxes")
    return search.packing()
