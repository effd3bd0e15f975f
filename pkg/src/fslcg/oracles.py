"""Slow reference solvers used to cross-check the fast paths on small inputs."""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterator, Sequence


def set_partitions(n: int, fits=None) -> Iterator[list[list[int]]]:
    """All partitions of ``range(n)`` into blocks; ``fits(block, i)`` may veto adding ``i``."""
    blocks: list[list[int]] = []

    def rec(i: int) -> Iterator[list[list[int]]]:
        if i == n:
            yield [list(b) for b in blocks]
            return
        for b in blocks:
            if fits is None or fits(b, i):
                b.append(i)
                yield from rec(i + 1)
                b.pop()
        blocks.append([i])
        yield from rec(i + 1)
        blocks.pop()

    return rec(0)


def min_cost_packing(
    volumes: Sequence[int],
    boxes: Sequence[tuple[int, int, int]],
    item_groups: Sequence[Hashable] | None = None,
    box_groups: Sequence[Hashable] | None = None,
) -> int | None:
    """Cheapest packing by enumerating every set partition of the items.

    ``boxes`` holds ``(cost, capacity, count)`` per box type. Optional group
    labels restrict items to boxes with the same label (port pairs), which
    lets this solve the undecomposed multi-pair problem. ``None`` when
    nothing is feasible.
    """
    n = len(volumes)
    item_groups = item_groups or [0] * n
    box_groups = box_groups or [0] * len(boxes)
    cap_max = max((cap for _, cap, _ in boxes), default=0)

    def fits(block: list[int], i: int) -> bool:
        return item_groups[block[0]] == item_groups[i] and sum(volumes[j] for j in block) + volumes[i] <= cap_max

    best = math.inf
    for part in set_partitions(n, fits):
        loads = sorted(((sum(volumes[j] for j in b), item_groups[b[0]]) for b in part), reverse=True)
        cost = _assign_blocks(loads, boxes, box_groups)
        best = min(best, cost)
    return None if best == math.inf else int(best)


def _assign_blocks(loads: list[tuple[int, Hashable]], boxes, box_groups) -> float:
    left = [count for _, _, count in boxes]
    best = math.inf

    def rec(k: int, cost: int) -> None:
        nonlocal best
        if cost >= best:
            return
        if k == len(loads):
            best = cost
            return
        load, group = loads[k]
        for t, (c, cap, _) in enumerate(boxes):
            if left[t] and cap >= load and box_groups[t] == group:
                left[t] -= 1
                rec(k + 1, cost + c)
                left[t] += 1

    rec(0, 0)
    return best


def reachable_components(n: int, edges: Sequence[tuple[int, int]]) -> list[frozenset[int]]:
    """Components by repeated breadth-first search over an edge list."""
    nbrs: dict[int, set[int]] = {i: set() for i in range(n)}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    seen: set[int] = set()
    out = []
    for s in range(n):
        if s in seen:
            continue
        comp = {s}
        queue = [s]
        while queue:
            u = queue.pop(0)
            for w in nbrs[u] - comp:
                comp.add(w)
                queue.append(w)
        seen |= comp
        out.append(frozenset(comp))
    return out
