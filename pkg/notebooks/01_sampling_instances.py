"""
Sampling propagation instances
==============================

A directed graph with independent-cascade probabilities is turned into
``ell`` live-edge instances.  Influence of a seed set is then the average
number of nodes it reaches across instances.
"""

# %%
import numpy as np

from skim import assign_uniform, assign_weighted_cascade, exact_influence, load_edge_list, sample_instances

# a small random digraph, written as an edge list the loader accepts
rng = np.random.default_rng(0)
n, m = 500, 2500
tails, heads = rng.integers(0, n, m), rng.integers(0, n, m)
text = "\n".join(f"{a} {b}" for a, b in zip(tails, heads) if a != b)
base = load_edge_list(text)
print(base.n, "nodes,", base.m, "arcs")

# %%
# weighted cascade: an arc into v survives with probability 1/indeg(v)
wc = assign_weighted_cascade(base)
g = sample_instances(wc, ell=64, seed=1)
print("arcs kept per instance:", g.arc_counts()[:8], "...")

# uniform probability for comparison
un = sample_instances(assign_uniform(base, 0.05), ell=64, seed=1)
print("uniform 0.05, mean arcs kept:", un.arc_counts().mean())

# %%
# influence is exact with respect to the sampled instances
for S in ([0], [0, 1, 2], list(range(20))):
    v = exact_influence(g, S)
    print(f"|S|={len(S):2d}  influence {v.value:8.3f}  ({v.numerator} reached pairs / {v.ell})")

# %%
# more instances bring the estimate closer to the model's expectation
for ell in (16, 64, 256, 1024):
    vals = [exact_influence(sample_instances(wc, ell, seed), [0, 1, 2]).value for seed in range(20)]
    print(f"ell={ell:5d}  mean {np.mean(vals):7.3f}  sd {np.std(vals):6.3f}")
