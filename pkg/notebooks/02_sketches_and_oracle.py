"""
Combined reachability sketches as an influence oracle
=====================================================

Every node-instance pair gets a rank.  A node's sketch keeps the ``k``
smallest ranks among the pairs it reaches, across all instances.  From the
sketches alone we estimate the influence of a single node or of any set.
"""

# %%
import time

import numpy as np

from skim import build_rank_assignment, build_sketches, estimate_cardinality, exact_influence
from skim.graph import BaseGraph, assign_weighted_cascade, sample_instances

rng = np.random.default_rng(2)
n, m = 5000, 50_000
base = BaseGraph(n, rng.integers(0, n, m), rng.integers(0, n, m))
g = sample_instances(assign_weighted_cascade(base), ell=64, seed=2)

# %%
t0 = time.perf_counter()
ss = build_sketches(g, build_rank_assignment(g.n, g.ell, 64, seed=2), 64)
print(f"sketches for {g.n} nodes built in {time.perf_counter() - t0:.2f} s")

sk = ss[0]
print("node 0: full" if sk.full else "node 0: partial", "| first ranks", sk.ranks[:5])

# %%
# single nodes: estimate against the exact reach
for u in rng.choice(n, 5, replace=False):
    est = estimate_cardinality(ss[u], g.n, g.ell)
    print(f"node {u:5d}  estimate {est:8.2f}  exact {exact_influence(g, [u]).value:8.2f}")

# %%
# sets: the union query merges the sketches of the members
for size in (1, 10, 100, 1000):
    errs = []
    for _ in range(30):
        S = rng.choice(n, size, replace=False).tolist()
        ex = exact_influence(g, S).value
        errs.append(abs(ss.query(S) - ex) / ex)
    print(f"|S|={size:4d}  mean relative error {100 * np.mean(errs):5.2f}%")

# %%
# accuracy grows with k
S = rng.choice(n, 50, replace=False).tolist()
ex = exact_influence(g, S).value
for k in (8, 16, 64, 256):
    q = [build_sketches(g, build_rank_assignment(g.n, g.ell, k, seed=s), k).query(S) for s in range(20)]
    print(f"k={k:3d}  mean {np.mean(q):8.2f}  sd {np.std(q):7.2f}  exact {ex:.2f}")
