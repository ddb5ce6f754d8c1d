"""Shared fixtures and pure-Python oracles.

The oracles here deliberately avoid the package's kernels: reachability is a
plain dict-of-lists DFS, so a bug in the CSR layout or the numba searches
cannot hide behind itself.
"""

import numpy as np
import pytest

from skim.graph import BaseGraph, MultiInstanceGraph, assign_weighted_cascade, sample_instances


def random_base(n, m, seed, allow_loops=False):
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, m)
    h = rng.integers(0, n, m)
    if not allow_loops:
        keep = t != h
        t, h = t[keep], h[keep]
    return BaseGraph(n, t, h)


def skewed_base(n, m, seed, exponent=0.8):
    """Random digraph whose out-degrees follow a power law (social-network-like)."""
    rng = np.random.default_rng(seed)
    w = 1.0 / np.arange(1, n + 1) ** exponent
    t = rng.choice(n, m, p=w / w.sum())
    h = rng.integers(0, n, m)
    keep = t != h
    perm = rng.permutation(n)
    return BaseGraph(n, perm[t[keep]], perm[h[keep]])


def skewed_instances(n, m, ell, seed):
    return sample_instances(assign_weighted_cascade(skewed_base(n, m, seed)), ell, seed)


def random_instances(n, m, ell, seed):
    return sample_instances(assign_weighted_cascade(random_base(n, m, seed)), ell, seed)


def random_arbitrary_instances(n, ell, p, seed):
    """Independent G(n, p) digraph per instance (not tied to a common base)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(ell):
        mask = rng.random((n, n)) < p
        np.fill_diagonal(mask, False)
        t, h = np.nonzero(mask)
        out.append((t, h))
    return MultiInstanceGraph(n, out)


def adjacency(g):
    """``adj[i][u]`` = list of successors, built from the raw arc lists."""
    adj = []
    for i in range(g.ell):
        t, h = g.arcs(i)
        a = {u: [] for u in range(g.n)}
        for u, v in zip(t.tolist(), h.tolist()):
            a[u].append(v)
        adj.append(a)
    return adj


def reach(adj_i, sources, blocked=()):
    seen = set(s for s in sources if s not in blocked)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in adj_i[v]:
            if w not in seen and w not in blocked:
                seen.add(w)
                stack.append(w)
    return seen


def brute_influence_pairs(g, S, adj=None):
    adj = adj or adjacency(g)
    return sum(len(reach(adj[i], S)) for i in range(g.ell))


def brute_sketches(g, ra, k):
    """Bottom-k of {rank(v, i) : u reaches v in instance i} for every u."""
    adj = adjacency(g)
    out = []
    for u in range(g.n):
        ranks = []
        for i in range(g.ell):
            for v in reach(adj[i], [u]):
                r = int(ra.rank_table[v, i])
                if r:
                    ranks.append(r)
        out.append(sorted(ranks)[:k])
    return out


@pytest.fixture
def two_cliques():
    """Directed cliques on {0..4} and {5..7}, two identical instances."""
    arcs = [(u, v) for u in range(5) for v in range(5) if u != v]
    arcs += [(u, v) for u in range(5, 8) for v in range(5, 8) if u != v]
    t, h = np.array(arcs).T
    return MultiInstanceGraph.replicate(BaseGraph(8, t, h), 2)


@pytest.fixture
def star():
    """Center 0 pointing at leaves 1..9, one instance."""
    return MultiInstanceGraph.replicate(BaseGraph(10, np.zeros(9, int), np.arange(1, 10)), 1)


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_NOTES: dict[int, str] = {}
_ACCEPTANCE_OUTCOMES: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE_OUTCOMES[number] = ("PASS" if rep.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_OUTCOMES):
        status, title = _ACCEPTANCE_OUTCOMES[number]
        note = ACCEPTANCE_NOTES.get(number, "")
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}" + (f"  ({note})" if note else ""))
