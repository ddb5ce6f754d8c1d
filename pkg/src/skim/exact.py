"""
Exact influence evaluation and the reference seed-selection algorithms.

Everything here counts covered node-instance pairs as integers; division by
``ell`` only happens when a value is presented.
"""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Iterable

import numpy as np

from . import _kernels
from .graph import MultiInstanceGraph
from .results import InfluenceValue, SeedSequence

__all__ = [
    "exact_influence",
    "prefix_influences",
    "exact_greedy",
    "brute_force_optimum",
    "degree_baseline",
    "OPTIMUM_GUARD",
]

OPTIMUM_GUARD = 10**6


def _check_nodes(g: MultiInstanceGraph, nodes: Iterable[int]) -> list[int]:
    nodes = [int(u) for u in nodes]
    bad = sorted({u for u in nodes if not 0 <= u < g.n})
    if bad:
        raise ValueError(f"unknown node ids: {bad}")
    return nodes


class _Coverage:
    """Covered-pair table plus scratch buffers for repeated searches."""

    def __init__(self, g: MultiInstanceGraph):
        self.g = g
        self.covered = np.zeros((g.ell, g.n), dtype=np.bool_)
        self.queue = np.empty(max(g.n, 1), dtype=np.int64)
        self.visit = np.zeros(max(g.n, 1), dtype=np.int64)
        self.stamp = 0

    def cover(self, x: int) -> int:
        return int(_kernels.cover_from(x, self.g.fwd_ptr, self.g.fwd_adj, self.covered, self.queue))

    def gain(self, x: int) -> int:
        c, self.stamp = _kernels.gain_from(x, self.g.fwd_ptr, self.g.fwd_adj, self.covered,
                                           self.visit, self.stamp, self.queue)
        return int(c)

    def gains(self) -> np.ndarray:
        out = np.empty(self.g.n, dtype=np.int64)
        self.stamp = _kernels.gains_all(self.g.fwd_ptr, self.g.fwd_adj, self.covered,
                                        self.visit, self.stamp, self.queue, out)
        return out


def exact_influence(g: MultiInstanceGraph, S: Iterable[int]) -> InfluenceValue:
    """Average over instances of the number of nodes reachable from ``S``."""
    nodes = _check_nodes(g, S)
    cov = _Coverage(g)
    return InfluenceValue(sum(cov.cover(u) for u in set(nodes)), g.ell)


def prefix_influences(g: MultiInstanceGraph, nodes: Iterable[int]) -> list[InfluenceValue]:
    """Exact influence of every prefix of ``nodes`` in one incremental pass."""
    nodes = _check_nodes(g, nodes)
    cov = _Coverage(g)
    out, acc = [], 0
    for u in nodes:
        acc += cov.cover(u)
        out.append(InfluenceValue(acc, g.ell))
    return out


def exact_greedy(g: MultiInstanceGraph, s: int, lazy: bool = True) -> SeedSequence:
    """Greedy seed selection by exact marginal gain.

    Ties go to the smallest node id.  With ``lazy`` the stale gains in a
    max-heap are upper bounds (submodularity) and only the top candidate is
    re-evaluated; ``lazy=False`` recomputes every gain each round and exists
    to cross-check the lazy path.
    """
    if not 0 <= s <= g.n:
        raise ValueError(f"s={s} outside [0, {g.n}]")
    cov = _Coverage(g)
    seq = SeedSequence(g.ell)
    if s == 0:
        return seq
    if not lazy:
        chosen = np.zeros(g.n, dtype=bool)
        for _ in range(s):
            gains = cov.gains()
            gains[chosen] = -1
            x = int(np.argmax(gains))  # first maximum = smallest id
            chosen[x] = True
            seq.append(x, cov.cover(x))
        return seq

    heap = [(-int(c), u, 0) for u, c in enumerate(cov.gains())]
    heapq.heapify(heap)
    rnd = 0
    while len(seq) < s:
        neg, u, stamp = heapq.heappop(heap)
        if stamp == rnd:
            seq.append(u, cov.cover(u))
            rnd += 1
        else:
            heapq.heappush(heap, (-cov.gain(u), u, rnd))
    return seq


def _reach_masks(g: MultiInstanceGraph) -> list[int]:
    """Reachable pairs of every node as a Python-int bitmask over ``ell * n`` bits."""
    masks = []
    for u in range(g.n):
        mask = 0
        for i in range(g.ell):
            seen = {u}
            stack = [u]
            while stack:
                v = stack.pop()
                for w in g.successors(i, v).tolist():
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            for v in seen:
                mask |= 1 << (i * g.n + v)
        masks.append(mask)
    return masks


def brute_force_optimum(g: MultiInstanceGraph, s: int) -> tuple[tuple[int, ...], InfluenceValue]:
    """Best size-``s`` seed set by exhaustive search (lexicographically first on ties).

    Refuses when there are more than ``OPTIMUM_GUARD`` candidate sets.
    """
    if not 0 <= s <= g.n:
        raise ValueError(f"s={s} outside [0, {g.n}]")
    if math.comb(g.n, s) > OPTIMUM_GUARD:
        raise ValueError(f"C({g.n}, {s}) = {math.comb(g.n, s)} subsets exceeds the guard of {OPTIMUM_GUARD}")
    masks = _reach_masks(g)
    best, best_set = -1, ()
    for combo in itertools.combinations(range(g.n), s):
        m = 0
        for u in combo:
            m |= masks[u]
        c = m.bit_count()
        if c > best:
            best, best_set = c, combo
    return best_set, InfluenceValue(best, g.ell)


def degree_baseline(g: MultiInstanceGraph, s: int) -> SeedSequence:
    """Seeds by decreasing out-degree in the union of all instances (ties: smaller id)."""
    if not 0 <= s <= g.n:
        raise ValueError(f"s={s} outside [0, {g.n}]")
    deg = g.union_graph().out_degree()
    order = np.lexsort((np.arange(g.n), -deg))[:s]
    cov = _Coverage(g)
    seq = SeedSequence(g.ell)
    for u in order.tolist():
        seq.append(u, cov.cover(u))
    return seq
