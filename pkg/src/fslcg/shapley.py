"""Exact Shapley values for locally collaborative games.

Every routine returns exact :class:`fractions.Fraction` values. Marginal
contributions are accumulated as integers weighted by permutation counts and
divided by ``n!`` once at the end.
"""

from __future__ import annotations

import itertools
import math
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GuardError, LocalityError
from .graph import AgentGraph, Coalition, members, size, subsets

BRUTEFORCE_MAX_N = 12
PERMUTATION_MAX_N = 8
BASELINE_MAX_N = 30
LOCALITY_MAX_N = 16


class CharacteristicFunction:
    """Coalition -> integer value, memoised by coalition bitmask.

    Subclasses implement :meth:`_value`. ``evaluate(0)`` is always 0. The memo
    is a plain dict, so concurrent readers may occasionally compute the same
    coalition twice; ``_value`` must be pure for that to be harmless.
    """

    def __init__(self, n: int):
        self.n = n
        self._memo: dict[Coalition, int] = {0: 0}

    def _value(self, mask: Coalition) -> int:
        raise NotImplementedError

    def evaluate(self, mask: Coalition) -> int:
        try:
            return self._memo[mask]
        except KeyError:
            pass
        if mask >> self.n:
            raise ValueError(f"coalition {mask:#x} has members outside 0..{self.n - 1}")
        val = self._memo[mask] = self._value(mask)
        return val

    __call__ = evaluate

    def cache_clear(self) -> None:
        self._memo = {0: 0}

    @property
    def cache_size(self) -> int:
        return len(self._memo)


class FunctionGame(CharacteristicFunction):
    """Wraps a callable taking a coalition bitmask."""

    def __init__(self, n: int, fn: Callable[[Coalition], int]):
        super().__init__(n)
        self._fn = fn

    def _value(self, mask: Coalition) -> int:
        return self._fn(mask)


class TableGame(CharacteristicFunction):
    """Game given by an explicit value for every coalition (missing -> error)."""

    def __init__(self, n: int, table: Mapping[Coalition, int]):
        super().__init__(n)
        if table.get(0, 0) != 0:
            raise ValueError("value of the empty coalition must be 0")
        self._table = dict(table)

    def _value(self, mask: Coalition) -> int:
        return self._table[mask]


class _Counted:
    """Per-run view of a game that records which coalitions were asked for."""

    def __init__(self, v: CharacteristicFunction):
        self.v = v
        self.seen: dict[Coalition, int] = {}

    def __call__(self, mask: Coalition) -> int:
        try:
            return self.seen[mask]
        except KeyError:
            val = self.seen[mask] = self.v.evaluate(mask)
            return val


@dataclass
class ShapleyResult:
    values: list[Fraction]
    v_grand: int
    eval_count: int
    elapsed: float
    method: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self, labels: list[str] | None = None) -> dict:
        labels = labels or [str(i) for i in range(len(self.values))]
        return {
            "method": self.method,
            "values": {
                lab: {
                    "value_numerator": val.numerator,
                    "value_denominator": val.denominator,
                    "value_decimal": float(val),
                }
                for lab, val in zip(labels, self.values)
            },
            "v_grand": self.v_grand,
            "diagnostics": {"eval_count": self.eval_count, "elapsed_seconds": self.elapsed, **self.extra},
        }


@lru_cache(maxsize=None)
def factorials(n: int) -> tuple[int, ...]:
    out = [1]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return tuple(out)


def permutation_weight(n_total: int, n_i: int, s: int) -> int:
    """Number of orderings of ``n_total`` agents in which agent ``i`` is preceded by
    exactly a given ``s``-subset of its ``n_i`` neighbours (plus any non-neighbours).

    Sums over ``k``, the number of non-neighbours placed in front of ``i``.
    """
    if not 0 <= s <= n_i <= n_total - 1:
        raise ValueError(f"need 0 <= s <= n_i <= n_total-1, got s={s}, n_i={n_i}, n_total={n_total}")
    fact = factorials(n_total)
    m = n_total - n_i - 1
    return sum(math.comb(m, k) * fact[k + s] * fact[n_total - k - 1 - s] for k in range(m + 1))


@lru_cache(maxsize=4096)
def _weight_row(n_total: int, n_i: int) -> tuple[int, ...]:
    return tuple(permutation_weight(n_total, n_i, s) for s in range(n_i + 1))


def permutation_weight_by_enumeration(n_total: int, n_i: int, s: int) -> int:
    """Count the same orderings as :func:`permutation_weight` by walking all of them.

    Agent 0 plays ``i``, agents ``1..n_i`` are its neighbours and ``1..s`` is the
    fixed neighbour subset that has to be exactly the neighbours in front.
    """
    if n_total > PERMUTATION_MAX_N:
        raise GuardError(f"permutation enumeration limited to n <= {PERMUTATION_MAX_N}")
    if not 0 <= s <= n_i <= n_total - 1:
        raise ValueError("need 0 <= s <= n_i <= n_total-1")
    want = set(range(1, s + 1))
    nbrs = set(range(1, n_i + 1))
    count = 0
    for perm in itertools.permutations(range(n_total)):
        front = set(perm[: perm.index(0)])
        if front & nbrs == want:
            count += 1
    return count


def _finish(acc: list[int], n: int, v_grand: int, counted: _Counted, t0: float, method: str) -> ShapleyResult:
    denom = factorials(n)[n]
    return ShapleyResult(
        values=[Fraction(a, denom) for a in acc],
        v_grand=v_grand,
        eval_count=len(counted.seen),
        elapsed=time.perf_counter() - t0,
        method=method,
    )


def fs_lcg_shapley(
    g: AgentGraph,
    v: CharacteristicFunction,
    *,
    max_degree: int | None = None,
    verify_locality: bool = False,
) -> ShapleyResult:
    """Shapley values of a locally collaborative game from neighbour subsets only.

    For each agent the marginal contribution to every subset of its neighbours
    is weighted by :func:`permutation_weight`; non-neighbours never enter a
    queried coalition. Correct only when ``v`` is locally collaborative on
    ``g``; ``verify_locality`` checks that first (exhaustively, small ``n``).

    ``max_degree`` rejects graphs whose largest neighbourhood would need more
    than ``2**max_degree`` subsets for one agent.
    """
    if g.n != v.n:
        raise ValueError(f"graph has {g.n} agents but game has {v.n}")
    if max_degree is not None and max(g.degrees()) > max_degree:
        raise GuardError(f"max degree {max(g.degrees())} exceeds limit {max_degree}")
    if verify_locality:
        report = check_local_collaboration(g, v)
        if not report:
            raise LocalityError(f"not locally collaborative: agent {report.agent}, coalition {report.coalition:#x}")
    t0 = time.perf_counter()
    n = g.n
    val = _Counted(v)
    acc = []
    for i in range(n):
        bit = 1 << i
        nbrs = g.adj[i]
        weights = _weight_row(n, size(nbrs))
        total = 0
        for sub in subsets(nbrs):
            total += weights[size(sub)] * (val(sub | bit) - val(sub))
        acc.append(total)
    return _finish(acc, n, v.evaluate(g.full), val, t0, "fs_lcg")


def exact_shapley_bruteforce(v: CharacteristicFunction, *, max_n: int = BRUTEFORCE_MAX_N) -> ShapleyResult:
    """Coalition-sum Shapley values in pure Python integers."""
    n = v.n
    if n > max_n:
        raise GuardError(f"brute force limited to n <= {max_n}, got {n}")
    t0 = time.perf_counter()
    fact = factorials(n)
    val = _Counted(v)
    acc = [0] * n
    for mask in range(1 << n):
        s = size(mask)
        base = val(mask)
        for i in range(n):
            if not mask >> i & 1:
                acc[i] += fact[s] * fact[n - s - 1] * (val(mask | 1 << i) - base)
    return _finish(acc, n, val((1 << n) - 1), val, t0, "bruteforce")


def permutation_shapley(v: CharacteristicFunction, *, max_n: int = PERMUTATION_MAX_N) -> ShapleyResult:
    """Average marginal contribution over every join order."""
    n = v.n
    if n > max_n:
        raise GuardError(f"permutation enumeration limited to n <= {max_n}, got {n}")
    t0 = time.perf_counter()
    val = _Counted(v)
    acc = [0] * n
    for perm in itertools.permutations(range(n)):
        mask = 0
        for i in perm:
            acc[i] += val(mask | 1 << i) - val(mask)
            mask |= 1 << i
    return _finish(acc, n, val((1 << n) - 1), val, t0, "permutation")


def _popcounts(n: int) -> np.ndarray:
    counts = np.zeros(1 << n, dtype=np.int64)
    idx = np.arange(1 << n, dtype=np.int64)
    for b in range(n):
        counts += (idx >> b) & 1
    return counts


def baseline_graph_restricted_shapley(
    g: AgentGraph, v: CharacteristicFunction, *, max_n: int = BASELINE_MAX_N
) -> ShapleyResult:
    """Reference method that tabulates ``v`` on all ``2**n`` coalitions.

    Ignores locality entirely, so it is valid for any game on ``g``; used as
    the runtime comparator for :func:`fs_lcg_shapley`.
    """
    if g.n != v.n:
        raise ValueError(f"graph has {g.n} agents but game has {v.n}")
    n = g.n
    if n > max_n:
        raise GuardError(f"baseline limited to n <= {max_n}, got {n}")
    t0 = time.perf_counter()
    val = _Counted(v)
    table = [val(mask) for mask in range(1 << n)]
    fact = factorials(n)
    # per-size sums of marginals stay far below 2**63 for realistic cost games
    if max(map(abs, table)) << (n + 1) < 1 << 62:
        vals = np.array(table, dtype=np.int64)
        sizes = _popcounts(n)
        idx = np.arange(1 << n, dtype=np.int64)
        acc = []
        for i in range(n):
            without = idx[(idx >> i) & 1 == 0]
            diff = vals[without | (1 << i)] - vals[without]
            by_size = np.zeros(n, dtype=np.int64)
            np.add.at(by_size, sizes[without], diff)
            acc.append(sum(fact[s] * fact[n - s - 1] * int(by_size[s]) for s in range(n)))
    else:
        acc = [0] * n
        for mask, base in enumerate(table):
            s = size(mask)
            for i in range(n):
                if not mask >> i & 1:
                    acc[i] += fact[s] * fact[n - s - 1] * (table[mask | 1 << i] - base)
    return _finish(acc, n, table[-1], val, t0, "baseline")


@dataclass
class LocalityReport:
    ok: bool
    agent: int | None = None
    coalition: Coalition | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_local_collaboration(
    g: AgentGraph, v: CharacteristicFunction, *, max_n: int = LOCALITY_MAX_N
) -> LocalityReport:
    """Exhaustively test that each agent's marginal depends only on its neighbours.

    Stops at the first agent ``x`` and coalition ``X`` (not containing ``x``)
    with ``v(X+x) - v(X) != v(X'+x) - v(X')``, ``X'`` being ``X``'s members
    adjacent to ``x``.
    """
    if g.n != v.n:
        raise ValueError(f"graph has {g.n} agents but game has {v.n}")
    n = g.n
    if n > max_n:
        raise GuardError(f"locality check limited to n <= {max_n}, got {n}")
    checked = 0
    for x in range(n):
        bit = 1 << x
        nbrs = g.adj[x]
        for mask in subsets(g.full & ~bit):
            local = mask & nbrs
            checked += 1
            if mask == local:
                continue
            if v(mask | bit) - v(mask) != v(local | bit) - v(local):
                return LocalityReport(False, x, mask, checked)
    return LocalityReport(True, checked=checked)


def weight_partition_holds(n: int) -> bool:
    """Every ordering of ``n`` agents is counted once across neighbour-subset cases."""
    nfact = factorials(n)[n]
    return all(
        sum(math.comb(n_i, j) * w for j, w in enumerate(_weight_row(n, n_i))) == nfact for n_i in range(n)
    )


def component_shapley(g: AgentGraph, v: CharacteristicFunction, comp: Coalition) -> dict[int, Fraction]:
    """FS-LCG on the subgame induced by one component, keyed by original agent index."""
    sub_g, labels = g.induced(comp)

    def restricted(mask: Coalition) -> int:
        return v.evaluate(sum(1 << labels[k] for k in members(mask)))

    res = fs_lcg_shapley(sub_g, FunctionGame(sub_g.n, restricted))
    return dict(zip(labels, res.values))
