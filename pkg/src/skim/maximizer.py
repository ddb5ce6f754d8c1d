"""
SKIM: greedy influence maximization carried out in sketch space.

Pairs are processed in rank order; each uncovered pair triggers a reverse
search that adds its rank to the partial sketch of every node reaching it.
The first node whose sketch reaches ``k`` entries has the largest estimated
marginal influence and becomes the next seed.  Everything it reaches is then
covered, and covered ranks are dropped from all partial sketches, which
leaves exactly the partial sketches of the residual problem.  Sketch
building resumes from the next rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .confidence import ErrorLedger, IterationRecord, accumulate_ledger
from .graph import MultiInstanceGraph
from .ranks import RankAssignment, build_rank_assignment, to_uniform_rank
from .results import SeedSequence

__all__ = [
    "Selection",
    "ResidualState",
    "advance_sketch_building",
    "apply_residual",
    "skim_run",
    "verify_residual",
]


@dataclass(frozen=True)
class Selection:
    """How the latest candidate was found.

    ``rank`` is the last processed rank (the threshold of the selected
    sketch when ``aborted``).  ``runner_up`` is the largest other sketch size
    and ``k_prime`` the same with the last processed rank discounted.
    """

    node: int
    rank: int
    aborted: bool
    size: int
    runner_up: int
    k_prime: int


class ResidualState:
    """Mutable state of one SKIM run.

    ``covered[i, v]`` marks covered pairs, ``size[v]`` counts the live ranks in
    ``v``'s partial sketch.  The inverted index maps each processed rank ``t``
    to the nodes whose partial sketch holds it: ``entries[ent_start[t]:ent_end[t]]``.
    A rank is erased by collapsing its slice.
    """

    def __init__(self, g: MultiInstanceGraph, ra: RankAssignment, k: int):
        if (ra.n, ra.ell) != (g.n, g.ell):
            raise ValueError("rank assignment does not match the graph")
        if k < 1:
            raise ValueError("k must be positive")
        n, ell = g.n, g.ell
        self.k = k
        self.ra = ra
        self.covered = np.zeros((ell, n), dtype=np.bool_)
        self.size = np.zeros(n, dtype=np.int64)
        self.ent_start = np.zeros(n * ell + 1, dtype=np.int64)
        self.ent_end = np.zeros(n * ell + 1, dtype=np.int64)
        self.entries = np.empty(n * (min(k, 64) + 1), dtype=np.int32)
        self.used = 0
        self.cursor = 0
        self.visit = np.zeros(n, dtype=np.int64)
        self.stamp = 0
        self.queue = np.empty(n, dtype=np.int64)
        self.seeds = SeedSequence(ell)
        self.seeded = np.zeros(n, dtype=bool)
        self.insertions = 0
        self.last: Selection | None = None
        self.violations: list[str] = []

    def partial_sketch(self, v: int) -> list[int]:
        """Live ranks in ``v``'s partial sketch (linear scan; for checks)."""
        out = []
        for t in range(1, self.cursor + 1):
            lo, hi = self.ent_start[t], self.ent_end[t]
            if hi > lo and np.any(self.entries[lo:hi] == v):
                out.append(t)
        return out

    def _grow(self) -> None:
        bigger = np.empty(2 * self.entries.size, dtype=np.int32)
        bigger[: self.used] = self.entries[: self.used]
        self.entries = bigger


def advance_sketch_building(st: ResidualState, g: MultiInstanceGraph) -> int | None:
    """Resume sketch building until the next seed candidate is known.

    Returns the first node whose partial sketch reaches ``k``.  When every
    rank has been processed without that happening, returns the node with
    the largest partial sketch (smallest id on ties), or None if all partial
    sketches are empty, meaning nothing uncovered is left.  The rank horizon
    is extended a chunk at a time as needed.
    """
    k = st.k
    while True:
        ra = st.ra
        status, x, st.cursor, st.used, st.stamp, ins = _kernels.advance_skim(
            k, g.rev_ptr, g.rev_adj, ra.node_at, ra.inst_at, ra.horizon, st.cursor,
            st.covered, st.size, st.ent_start, st.ent_end, st.entries, st.used,
            st.visit, st.stamp, st.queue)
        st.insertions += ins
        if status == _kernels.ABORTED:
            t = st.cursor
            raw, excl = _kernels.runner_up(st.size, x, st.entries, st.ent_start[t], st.ent_end[t])
            if raw >= k or st.size[x] != k:
                st.violations.append(
                    f"rank {t}: selected {x} size {st.size[x]}, runner-up size {raw}, k={k}")
            st.last = Selection(int(x), int(t), True, int(st.size[x]), int(raw), int(excl))
            return int(x)
        if status == _kernels.GROW:
            st._grow()
            continue
        if ra.horizon < ra.universe:
            st.ra = ra.extended(1)
            continue
        x = int(np.argmax(st.size))
        if st.size[x] == 0:
            st.last = None
            return None
        raw, _ = _kernels.runner_up(st.size, x, st.entries, 0, 0)
        st.last = Selection(x, int(st.cursor), False, int(st.size[x]), int(raw), int(raw))
        return x


def apply_residual(st: ResidualState, x: int, g: MultiInstanceGraph) -> float:
    """Make ``x`` a seed and pass to the residual problem.

    Covers every pair ``x`` reaches through uncovered nodes and erases the
    covered ranks from the inverted index, decrementing the sketch sizes that
    held them.  Returns the marginal influence of ``x`` in expected nodes; the
    exact pair count is appended to ``st.seeds``.
    """
    if not 0 <= x < g.n:
        raise ValueError(f"unknown node {x}")
    if st.seeded[x]:
        raise ValueError(f"node {x} is already a seed")
    count = _kernels.residual_skim(x, g.fwd_ptr, g.fwd_adj, st.ra.rank_table, st.cursor,
                                   st.covered, st.size, st.ent_start, st.ent_end,
                                   st.entries, st.queue)
    st.seeded[x] = True
    st.seeds.append(x, int(count))
    return count / g.ell


def skim_run(g: MultiInstanceGraph, k: int, s: int | str = "all", seed: int = 0,
             ledger: bool = True, check_residual: bool = False,
             return_state: bool = False):
    """Run SKIM and return the first ``s`` seeds with their exact marginals.

    Parameters
    ----------
    g : MultiInstanceGraph
    k : int
        Sketch size; at least 2.
    s : int or "all"
        Number of seeds; "all" produces a full permutation of the nodes.
    seed : int
        Seed of the rank assignment.
    ledger : bool
        Keep the adaptive error ledger (costs a small convolution per seed).
    check_residual : bool
        After every seed, compare each partial sketch with a brute-force
        rebuild on the residual instances; mismatches go to
        ``state.violations``.  Quadratic, for small graphs only.
    return_state : bool
        Also return the final :class:`ResidualState`.

    Returns
    -------
    (SeedSequence, ErrorLedger or None[, ResidualState])
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    target = g.n if s == "all" else int(s)
    if not 0 <= target <= g.n:
        raise ValueError(f"s={s} outside [0, {g.n}]")
    ra = build_rank_assignment(g.n, g.ell, k, seed)
    st = ResidualState(g, ra, k)
    led = ErrorLedger(g.n) if ledger else None
    D = g.n * g.ell
    while len(st.seeds) < target:
        x = advance_sketch_building(st, g)
        if x is None:
            # nothing uncovered is reachable: emit the rest by id
            for u in np.flatnonzero(~st.seeded)[: target - len(st.seeds)]:
                apply_residual(st, int(u), g)
                if led is not None:
                    accumulate_ledger(led, IterationRecord(0, 1.0, st.seeds.gains[-1], g.ell))
            break
        sel = st.last
        apply_residual(st, x, g)
        if check_residual:
            st.violations.extend(verify_residual(st, g))
        if led is not None:
            tau = to_uniform_rank(sel.rank, g.n, g.ell) if D > 1 else 1.0
            accumulate_ledger(led, IterationRecord(sel.k_prime, max(tau, 1e-300),
                                                   st.seeds.gains[-1], g.ell))
    if return_state:
        return st.seeds, led, st
    return st.seeds, led


def verify_residual(st: ResidualState, g: MultiInstanceGraph) -> list[str]:
    """Compare every partial sketch with a rebuild on the residual instances.

    The rebuild takes, for each unseeded node, the bottom-k ranks among the
    uncovered pairs it reaches through uncovered nodes and keeps those up to
    the last processed rank.
    """
    problems = []
    cursor = st.cursor
    table = st.ra.rank_table
    sketches: dict[int, list[int]] = {u: [] for u in range(g.n)}
    for t in range(1, cursor + 1):
        lo, hi = st.ent_start[t], st.ent_end[t]
        for v in st.entries[lo:hi].tolist():
            sketches[v].append(t)
    for u in range(g.n):
        if st.seeded[u]:
            if sketches[u]:
                problems.append(f"seed {u} still holds ranks {sketches[u]}")
            continue
        ranks = []
        for i in range(g.ell):
            if st.covered[i, u]:
                continue
            seen = {u}
            stack = [u]
            while stack:
                v = stack.pop()
                for w in g.successors(i, v).tolist():
                    if w not in seen and not st.covered[i, w]:
                        seen.add(w)
                        stack.append(w)
            ranks.extend(int(table[v, i]) for v in seen if table[v, i] > 0)
        expected = [r for r in sorted(ranks)[: st.k] if r <= cursor]
        if sorted(sketches[u]) != expected:
            problems.append(f"node {u}: partial sketch {sorted(sketches[u])} != residual {expected}")
        if len(sketches[u]) != st.size[u]:
            problems.append(f"node {u}: size {st.size[u]} but {len(sketches[u])} live entries")
    return problems
