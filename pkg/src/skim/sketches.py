"""
Combined bottom-k reachability sketches and the influence oracle built on them.

A node's sketch holds the ``k`` smallest permutation ranks among the
node-instance pairs it reaches.  Sketches with fewer than ``k`` entries are
exact membership lists.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import MultiInstanceGraph
from .ranks import RankAssignment, to_uniform_rank

__all__ = [
    "CombinedSketch",
    "SketchSet",
    "build_sketches",
    "estimate_cardinality",
    "estimate_cardinality_continuous",
    "estimate_influence_limit",
    "query_influence",
    "write_sketches",
    "read_sketches",
]

CSKE_MAGIC = b"CSKE"
CSKE_VERSION = 1


@dataclass(frozen=True, eq=False)
class CombinedSketch:
    """Bottom-k set of permutation ranks for one node.

    ``source`` identifies the sketch set (``n, ell, k, seed``) so that
    sketches from different sets are not mixed in one query.
    """

    ranks: np.ndarray
    k: int
    source: tuple = field(default=(), compare=False)

    @property
    def full(self) -> bool:
        return len(self.ranks) == self.k

    @property
    def threshold(self) -> int | None:
        """k-th smallest rank, or None when the sketch is partial."""
        return int(self.ranks[-1]) if self.full else None

    def __len__(self) -> int:
        return len(self.ranks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CombinedSketch):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.ranks, other.ranks)


class SketchSet:
    """Sketches of all ``n`` nodes, stored as a padded ``(n, k)`` table."""

    def __init__(self, n: int, ell: int, k: int, seed: int, table: np.ndarray, sizes: np.ndarray):
        self.n, self.ell, self.k, self.seed = int(n), int(ell), int(k), int(seed)
        self.table = table
        self.sizes = sizes

    @property
    def source(self) -> tuple:
        return (self.n, self.ell, self.k, self.seed)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, u: int) -> CombinedSketch:
        if not 0 <= u < self.n:
            raise IndexError(f"node {u} outside [0, {self.n})")
        return CombinedSketch(self.table[u, : self.sizes[u]].copy(), self.k, self.source)

    def cardinality(self, u: int) -> float:
        return estimate_cardinality(self[u], self.n, self.ell)

    def influence(self, u: int) -> float:
        return self.cardinality(u) / self.ell

    def query(self, nodes: Iterable[int]) -> float:
        nodes = list(nodes)
        bad = [u for u in nodes if not 0 <= u < self.n]
        if bad:
            raise ValueError(f"unknown node ids: {bad}")
        return query_influence([self[u] for u in nodes], self.n, self.ell)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SketchSet):
            return NotImplemented
        return (self.source == other.source and np.array_equal(self.sizes, other.sizes)
                and all(np.array_equal(self.table[u, :s], other.table[u, :s])
                        for u, s in enumerate(self.sizes)))


def build_sketches(g: MultiInstanceGraph, ra: RankAssignment, k: int) -> SketchSet:
    """Combined reachability sketches for every node.

    Each instance is handled with pruned reverse searches in increasing rank
    order (a node whose instance-local sketch already has ``k`` entries is not
    expanded), then the local sketches are merged into the global ones and
    trimmed to ``k``.  Work is ``O(k * total arcs)``.
    """
    if (ra.n, ra.ell) != (g.n, g.ell):
        raise ValueError(f"rank assignment is for (n={ra.n}, ell={ra.ell}), "
                         f"graph has (n={g.n}, ell={g.ell})")
    if k < 1:
        raise ValueError("k must be positive")
    if ra.chunks < min(k, g.ell):
        raise ValueError(f"rank assignment materializes {ra.chunks} chunks, need {min(k, g.ell)}")
    table, sizes = _kernels.build_sketches(k, g.n, g.ell, g.rev_ptr, g.rev_adj, ra.node_at, ra.inst_at)
    return SketchSet(g.n, g.ell, k, ra.seed, table, sizes)


def estimate_cardinality(s: CombinedSketch, n: int, ell: int) -> float:
    """Estimate the number of pairs the sketched node reaches.

    Exact size for a partial sketch, otherwise ``1 + (k-1)(D-1)/(T-1)`` with
    ``D = n * ell`` and ``T`` the threshold rank.
    """
    if not s.full:
        return float(len(s.ranks))
    if s.k == 1:
        return 1.0
    T = int(s.ranks[-1])
    D = n * ell
    return 1.0 + (s.k - 1) * (D - 1) / (T - 1)


def estimate_cardinality_continuous(s: CombinedSketch, n: int, ell: int) -> float:
    """``(k-1)/tau`` with ``tau`` the threshold mapped to a uniform rank."""
    if not s.full:
        return float(len(s.ranks))
    return (s.k - 1) / to_uniform_rank(int(s.ranks[-1]), n, ell)


def estimate_influence_limit(T: int, k: int, n: int) -> float:
    """Influence estimate ``n(k-1)/(T-1)`` for infinitely many instances."""
    if T < 2:
        raise ValueError(f"threshold rank {T} < 2 gives a degenerate sketch")
    return n * (k - 1) / (T - 1)


def query_influence(sketches: Sequence[CombinedSketch], n: int, ell: int) -> float:
    """Estimate the influence of a seed set from its members' sketches.

    Every distinct rank held below the threshold of some full sketch, or in
    any partial sketch, is weighted by the inverse of the largest uniform
    threshold among the sketches holding it; partial sketches count as
    threshold 1, so their members weigh exactly 1.  When at least one sketch
    is full, one extra pair is added for the set-aside threshold element, so
    a single full sketch gives exactly :func:`estimate_cardinality`.  The
    union estimate is divided by ``ell``.
    """
    if len(sketches) == 0:
        raise ValueError("empty seed set")
    sources = {s.source for s in sketches}
    ks = {s.k for s in sketches}
    if len(sources) > 1 or len(ks) > 1:
        raise ValueError("sketches come from different sketch sets")
    D = n * ell
    ranks_parts, thr_parts = [], []
    any_full = False
    for s in sketches:
        if s.full:
            T = int(s.ranks[-1])
            members = s.ranks[:-1]
            tau = (T - 1) / (D - 1) if members.size else 1.0
            any_full = True
        else:
            members = s.ranks
            tau = 1.0
        ranks_parts.append(np.asarray(members, dtype=np.int64))
        thr_parts.append(np.full(len(members), tau))
    ranks = np.concatenate(ranks_parts)
    thr = np.concatenate(thr_parts)
    total = 0.0
    if ranks.size:
        # per distinct rank keep the largest threshold: sort by rank, then
        # by decreasing threshold, and take the first of each run
        order = np.lexsort((-thr, ranks))
        r_sorted = ranks[order]
        first = np.ones(r_sorted.size, dtype=bool)
        first[1:] = r_sorted[1:] != r_sorted[:-1]
        total = float(np.sum(1.0 / thr[order][first]))
    if any_full:
        total += 1.0
    return total / ell


# -- binary sketch format ------------------------------------------------------

def write_sketches(path, ss: SketchSet) -> None:
    """CSKE format: magic, u32 version/n/ell/k, u64 seed, then per node a u32
    byte count followed by that many bytes of little-endian u64 ranks."""
    with open(path, "wb") as fh:
        fh.write(CSKE_MAGIC)
        fh.write(struct.pack("<IIIIQ", CSKE_VERSION, ss.n, ss.ell, ss.k, ss.seed))
        for u in range(ss.n):
            ranks = ss.table[u, : ss.sizes[u]].astype("<u8")
            fh.write(struct.pack("<I", ranks.nbytes))
            fh.write(ranks.tobytes())


def read_sketches(path) -> SketchSet:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CSKE_MAGIC:
        raise ValueError(f"{path}: not a CSKE file")
    version, n, ell, k, seed = struct.unpack_from("<IIIIQ", data, 4)
    if version != CSKE_VERSION:
        raise ValueError(f"{path}: unsupported CSKE version {version}")
    pos = 4 + struct.calcsize("<IIIIQ")
    table = np.full((n, k), _kernels.PAD, dtype=np.int64)
    sizes = np.zeros(n, dtype=np.int64)
    for u in range(n):
        (nbytes,) = struct.unpack_from("<I", data, pos)
        pos += 4
        cnt = nbytes // 8
        if nbytes % 8 or cnt > k:
            raise ValueError(f"{path}: bad sketch length for node {u}")
        table[u, :cnt] = np.frombuffer(data, dtype="<u8", count=cnt, offset=pos)
        sizes[u] = cnt
        pos += nbytes
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes")
    return SketchSet(n, ell, k, seed, table, sizes)


def is_cske(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == CSKE_MAGIC
    except OSError:
        return False
