"""Numba kernels for the graph searches.  Callers own all state arrays."""

import numpy as np
from numba import njit

PAD = np.iinfo(np.int64).max

# advance_skim status codes
ABORTED = 0
HORIZON = 1
GROW = 2


@njit(cache=True)
def build_sketches(k, n, ell, rev_ptr, rev_adj, node_at, inst_at):
    """Pruned reverse searches per instance, merged into global bottom-k sketches."""
    horizon = node_at.shape[0]
    sk = np.full((n, k), PAD, dtype=np.int64)
    sz = np.zeros(n, dtype=np.int64)
    loc = np.empty((n, k), dtype=np.int64)
    lsz = np.zeros(n, dtype=np.int64)
    tmp = np.empty(k, dtype=np.int64)
    visit = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)

    # ranks grouped by instance, ascending within each group
    start = np.zeros(ell + 1, dtype=np.int64)
    for t in range(horizon):
        start[inst_at[t] + 1] += 1
    for i in range(ell):
        start[i + 1] += start[i]
    fill = start[:-1].copy()
    by_inst = np.empty(horizon, dtype=np.int64)
    for t in range(horizon):
        i = inst_at[t]
        by_inst[fill[i]] = t + 1
        fill[i] += 1

    for i in range(ell):
        ntouched = 0
        for idx in range(start[i], start[i + 1]):
            r = by_inst[idx]
            u = node_at[r - 1]
            if lsz[u] == k:
                continue
            visit[u] = r
            queue[0] = u
            head = 0
            tail = 1
            while head < tail:
                v = queue[head]
                head += 1
                if lsz[v] == k:
                    continue
                if lsz[v] == 0:
                    touched[ntouched] = v
                    ntouched += 1
                loc[v, lsz[v]] = r
                lsz[v] += 1
                for e in range(rev_ptr[i, v], rev_ptr[i, v + 1]):
                    w = rev_adj[e]
                    if visit[w] != r:
                        visit[w] = r
                        queue[tail] = w
                        tail += 1
        for j in range(ntouched):
            v = touched[j]
            a = 0
            b = 0
            c = 0
            na = sz[v]
            nb = lsz[v]
            while c < k and (a < na or b < nb):
                if b >= nb or (a < na and sk[v, a] < loc[v, b]):
                    tmp[c] = sk[v, a]
                    a += 1
                else:
                    tmp[c] = loc[v, b]
                    b += 1
                c += 1
            for q in range(c):
                sk[v, q] = tmp[q]
            sz[v] = c
            lsz[v] = 0
    return sk, sz


@njit(cache=True)
def cover_from(x, fwd_ptr, fwd_adj, covered, queue):
    """Cover every pair reachable from ``x`` through uncovered nodes; return the count."""
    ell = covered.shape[0]
    count = 0
    for i in range(ell):
        if covered[i, x]:
            continue
        covered[i, x] = True
        queue[0] = x
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            count += 1
            for e in range(fwd_ptr[i, v], fwd_ptr[i, v + 1]):
                w = fwd_adj[e]
                if not covered[i, w]:
                    covered[i, w] = True
                    queue[tail] = w
                    tail += 1
    return count


@njit(cache=True)
def gain_from(x, fwd_ptr, fwd_adj, covered, visit, stamp, queue):
    """Count uncovered pairs reachable from ``x`` without changing ``covered``."""
    ell = covered.shape[0]
    count = 0
    for i in range(ell):
        if covered[i, x]:
            continue
        stamp += 1
        visit[x] = stamp
        queue[0] = x
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            count += 1
            for e in range(fwd_ptr[i, v], fwd_ptr[i, v + 1]):
                w = fwd_adj[e]
                if visit[w] != stamp and not covered[i, w]:
                    visit[w] = stamp
                    queue[tail] = w
                    tail += 1
    return count, stamp


@njit(cache=True)
def gains_all(fwd_ptr, fwd_adj, covered, visit, stamp, queue, out):
    n = out.shape[0]
    for x in range(n):
        out[x], stamp = gain_from(x, fwd_ptr, fwd_adj, covered, visit, stamp, queue)
    return stamp


@njit(cache=True)
def advance_skim(k, rev_ptr, rev_adj, node_at, inst_at, horizon, cursor, covered,
                 size, ent_start, ent_end, entries, used, visit, stamp, queue):
    """Process pairs in rank order until some sketch reaches size ``k``.

    Returns ``(status, node, cursor, used, stamp, inserted)``.  On GROW the
    entry buffer lacks room for one more full search; nothing was consumed.
    """
    n = size.shape[0]
    cap = entries.shape[0]
    inserted = 0
    while cursor < horizon:
        if used + n > cap:
            return GROW, -1, cursor, used, stamp, inserted
        t = cursor + 1
        u = node_at[t - 1]
        i = inst_at[t - 1]
        cursor = t
        if covered[i, u]:
            continue
        stamp += 1
        ent_start[t] = used
        visit[u] = stamp
        queue[0] = u
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            size[v] += 1
            entries[used] = v
            used += 1
            inserted += 1
            if size[v] == k:
                ent_end[t] = used
                return ABORTED, v, cursor, used, stamp, inserted
            for e in range(rev_ptr[i, v], rev_ptr[i, v + 1]):
                w = rev_adj[e]
                if visit[w] != stamp and not covered[i, w]:
                    visit[w] = stamp
                    queue[tail] = w
                    tail += 1
        ent_end[t] = used
    return HORIZON, -1, cursor, used, stamp, inserted


@njit(cache=True)
def residual_skim(x, fwd_ptr, fwd_adj, rank_table, cursor, covered, size,
                  ent_start, ent_end, entries, queue):
    """Cover everything ``x`` reaches and drop the covered ranks from all sketches."""
    ell = covered.shape[0]
    count = 0
    for i in range(ell):
        if covered[i, x]:
            continue
        covered[i, x] = True
        queue[0] = x
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            count += 1
            t = rank_table[v, i]
            if t > 0 and t <= cursor:
                for e in range(ent_start[t], ent_end[t]):
                    size[entries[e]] -= 1
                ent_end[t] = ent_start[t]
            for e in range(fwd_ptr[i, v], fwd_ptr[i, v + 1]):
                w = fwd_adj[e]
                if not covered[i, w]:
                    covered[i, w] = True
                    queue[tail] = w
                    tail += 1
    return count


@njit(cache=True)
def runner_up(size, x, entries, lo, hi):
    """Largest sketch size among nodes other than ``x``.

    Returns the raw maximum and the maximum with the entries ``lo:hi`` (the
    last processed rank) discounted.
    """
    n = size.shape[0]
    raw = 0
    for v in range(n):
        if v != x and size[v] > raw:
            raw = size[v]
    for e in range(lo, hi):
        size[entries[e]] -= 1
    excl = 0
    for v in range(n):
        if v != x and size[v] > excl:
            excl = size[v]
    for e in range(lo, hi):
        size[entries[e]] += 1
    return raw, excl
