"""
Structured permutation ranks over node-instance pairs.

Positions ``1..D`` (``D = n * ell``) are split into chunks of ``n``.  Each
chunk holds every node exactly once; the instance paired with node ``v`` in
chunk ``j`` is drawn uniformly from the instances not yet paired with ``v``
in earlier chunks.  Only the first ``min(k, ell)`` chunks can ever enter a
bottom-k sketch, so that is all :func:`build_rank_assignment` materializes by
default.
"""

from __future__ import annotations

import numpy as np

from .graph import instance_rng

__all__ = ["RankAssignment", "build_rank_assignment", "to_uniform_rank"]


class RankAssignment:
    """Materialized prefix of a structured permutation.

    Attributes
    ----------
    n, ell, k, seed : int
        Dimensions and the seed the assignment was drawn from.
    chunks : int
        Number of materialized chunks; ``horizon = chunks * n``.
    node_at, inst_at : ndarray of int32
        ``node_at[t - 1], inst_at[t - 1]`` is the pair holding rank ``t``.
    rank_table : ndarray of int64, shape (n, ell)
        Rank of pair ``(v, i)``, or 0 when it lies beyond the horizon.
    """

    def __init__(self, n: int, ell: int, k: int, seed: int, chunks: int,
                 instance_order: np.ndarray, prefix: "RankAssignment | None" = None):
        self.n, self.ell, self.k, self.seed = n, ell, k, seed
        self.chunks = chunks
        self._instance_order = instance_order
        node_at = np.empty(chunks * n, dtype=np.int32)
        inst_at = np.empty(chunks * n, dtype=np.int32)
        done = 0
        if prefix is not None:
            done = prefix.chunks
            node_at[: done * n] = prefix.node_at
            inst_at[: done * n] = prefix.inst_at
        for j in range(done, chunks):
            order = instance_rng(seed, "rank-chunk", j).permutation(n).astype(np.int32)
            node_at[j * n:(j + 1) * n] = order
            inst_at[j * n:(j + 1) * n] = instance_order[order, j]
        self.node_at = node_at
        self.inst_at = inst_at
        if prefix is not None:
            table = prefix.rank_table.copy()
            table[node_at[done * n:], inst_at[done * n:]] = np.arange(
                done * n + 1, chunks * n + 1, dtype=np.int64)
        else:
            table = np.zeros((n, ell), dtype=np.int64)
            table[node_at, inst_at] = np.arange(1, chunks * n + 1, dtype=np.int64)
        self.rank_table = table

    @property
    def universe(self) -> int:
        return self.n * self.ell

    @property
    def horizon(self) -> int:
        return self.chunks * self.n

    def pair_at(self, rank: int) -> tuple[int, int]:
        if not 1 <= rank <= self.horizon:
            raise IndexError(f"rank {rank} outside materialized range 1..{self.horizon}")
        return int(self.node_at[rank - 1]), int(self.inst_at[rank - 1])

    def rank_of(self, v: int, i: int) -> int | None:
        """Rank of ``(v, i)``; None if the pair is beyond the horizon."""
        r = int(self.rank_table[v, i])
        return r or None

    def extended(self, extra_chunks: int = 1) -> "RankAssignment":
        """Same permutation with more chunks materialized (capped at ``ell``)."""
        chunks = min(self.ell, self.chunks + extra_chunks)
        return RankAssignment(self.n, self.ell, self.k, self.seed, chunks,
                              self._instance_order, prefix=self)

    def __repr__(self) -> str:
        return (f"RankAssignment(n={self.n}, ell={self.ell}, k={self.k}, "
                f"seed={self.seed}, horizon={self.horizon})")


def build_rank_assignment(n: int, ell: int, k: int, seed: int,
                          chunks: int | None = None) -> RankAssignment:
    """Draw a structured permutation and materialize ``min(k, ell)`` chunks.

    Chunk ``j`` uses its own random stream, so extending an assignment later
    gives exactly the ranks a larger ``chunks`` would have produced up front.
    """
    if n < 1 or ell < 1:
        raise ValueError("n and ell must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    if chunks is None:
        chunks = min(k, ell)
    chunks = max(1, min(int(chunks), ell))
    # row v is a uniform permutation of instances: its j-th entry is the
    # instance v takes in chunk j, never reused across chunks
    if ell == 1:
        instance_order = np.zeros((n, 1), dtype=np.int32)
    else:
        keys = instance_rng(seed, "rank-instances", 0).random((n, ell))
        instance_order = np.argsort(keys, axis=1).astype(np.int32)
    return RankAssignment(n, ell, k, seed, chunks, instance_order)


def to_uniform_rank(T: int, n: int, ell: int) -> float:
    """Map permutation rank ``T`` to ``(T - 1) / (n * ell - 1)``."""
    D = n * ell
    if not 1 <= T <= D:
        raise ValueError(f"rank {T} outside 1..{D}")
    if D == 1:
        return 0.0
    return (T - 1) / (D - 1)
