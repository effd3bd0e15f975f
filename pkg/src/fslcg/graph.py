"""Collaboration graphs over agents, with coalitions encoded as int bitmasks.

A coalition is a plain ``int`` whose bit ``i`` is set when agent ``i`` is a
member. Agents are indexed ``0..n-1`` and ``n`` is capped at 64 so every
coalition fits a machine word.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

MAX_AGENTS = 64

Coalition = int


def coalition(members: Iterable[int]) -> Coalition:
    mask = 0
    for i in members:
        if i < 0:
            raise ValueError(f"negative agent index {i}")
        mask |= 1 << i
    return mask


def members(mask: Coalition) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def size(mask: Coalition) -> int:
    return mask.bit_count()


def subsets(mask: Coalition) -> Iterator[Coalition]:
    """Yield every subset of ``mask`` exactly once, starting with the empty set."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        # increment restricted to the bits of mask
        sub = (sub - mask) & mask


@dataclass(frozen=True)
class AgentGraph:
    """Undirected simple graph; ``adj[i]`` is the neighbour bitmask of agent ``i``."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_AGENTS:
            raise ValueError(f"agent count must be in [1, {MAX_AGENTS}], got {self.n}")
        if len(self.adj) != self.n:
            raise ValueError("adjacency length does not match n")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"agent {i} has a neighbour outside 0..{self.n - 1}")
            if row >> i & 1:
                raise ValueError(f"self-loop on agent {i}")
            for j in members(row):
                if not self.adj[j] >> i & 1:
                    raise ValueError(f"adjacency not symmetric for ({i}, {j})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> AgentGraph:
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop on agent {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def empty(cls, n: int) -> AgentGraph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> AgentGraph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << i) for i in range(n)))

    @property
    def full(self) -> Coalition:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in members(self.adj[i]) if i < j]

    def degree(self, i: int) -> int:
        return size(self.adj[self._check(i)])

    def degrees(self) -> list[int]:
        return [size(row) for row in self.adj]

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.adj[self._check(i)] >> self._check(j) & 1)

    def induced(self, mask: Coalition) -> tuple[AgentGraph, list[int]]:
        """Subgraph on the agents of ``mask``, relabelled ``0..k-1``; also returns the old labels."""
        labels = members(mask)
        pos = {a: k for k, a in enumerate(labels)}
        edges = [(pos[u], pos[v]) for u, v in self.edges() if u in pos and v in pos]
        return AgentGraph.from_edges(len(labels), edges), labels

    def _check(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"agent index {i} out of range for n={self.n}")
        return i


def neighbors(g: AgentGraph, i: int) -> Coalition:
    return g.adj[g._check(i)]


def neighbor_subsets(g: AgentGraph, i: int) -> Iterator[Coalition]:
    """All ``2**degree(i)`` subsets of ``i``'s neighbourhood, the empty set included."""
    return subsets(neighbors(g, i))


def connected_components(g: AgentGraph) -> list[Coalition]:
    """Maximal connected vertex sets, ordered by their smallest member."""
    seen = 0
    comps = []
    for start in range(g.n):
        if seen >> start & 1:
            continue
        comp = frontier = 1 << start
        while frontier:
            reach = 0
            for v in members(frontier):
                reach |= g.adj[v]
            frontier = reach & ~comp
            comp |= frontier
        seen |= comp
        comps.append(comp)
    return comps
