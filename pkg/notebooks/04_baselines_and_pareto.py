"""
Baselines and the influence curve
=================================

A seed sequence defines a curve: influence of every prefix.  Here SKIM,
exact greedy and the out-degree heuristic are compared on training
instances and on fresh, held-out instances of the same model.
"""

# %%
import numpy as np

from skim import degree_baseline, exact_greedy, prefix_influences, skim_run
from skim.graph import BaseGraph, assign_weighted_cascade, sample_instances

# heavy-tailed out-degrees, closer to a social network than a uniform graph
rng = np.random.default_rng(4)
n, m = 5000, 40_000
w = 1.0 / np.arange(1, n + 1) ** 0.8
tails = rng.choice(n, m, p=w / w.sum())
base = BaseGraph(n, tails, rng.integers(0, n, m))
model = assign_weighted_cascade(base)
train = sample_instances(model, 64, seed=4)
held = sample_instances(model, 512, seed=4, domain="eval")

# %%
s = 100
runs = {
    "skim": skim_run(train, 64, s, seed=4)[0],
    "greedy": exact_greedy(train, s),
    "degree": degree_baseline(train, s),
}
print(f"{'s':>4} " + " ".join(f"{name:>16}" for name in runs))
curves = {name: [v.value for v in prefix_influences(held, seq.nodes)] for name, seq in runs.items()}
for j in (1, 5, 10, 25, 50, 100):
    row = " ".join(f"{runs[name].cumulative[j - 1]:7.1f} /{curves[name][j - 1]:7.1f}" for name in runs)
    print(f"{j:4d} {row}")
print("(training / held-out influence)")

# %%
# marginal gains shrink along the sequence, as submodularity predicts
print("skim marginals at 1, 10, 100:", [round(runs['skim'].marginals[j], 2) for j in (0, 9, 99)])
