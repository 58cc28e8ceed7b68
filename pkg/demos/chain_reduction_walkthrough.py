"""Reduce a small random graph to chains and check that walks agree.

Run: python demos/chain_reduction_walkthrough.py
"""

from __future__ import annotations

import numpy as np

from branchwalk import build_graph, compare_walks, default_times, full_decompose

rng = np.random.default_rng(7)
labels = [f"v{k}" for k in range(7)]
edges = []
for i in range(7):
    for j in range(i + 1, 7):
        if j == i + 1 or rng.uniform() < 0.35:
            amp = rng.uniform(0.2, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            edges.append((labels[i], labels[j], complex(amp)))
g = build_graph(labels, edges, [("v3", 0.4)])
print(f"graph: {g.size} nodes, {len(g.edges)} edges")

d = full_decompose(g, "v0")
for k, chain in enumerate(d.chains):
    hops = ", ".join(f"{abs(h):.4f}" for h in chain.hoppings)
    diag = ", ".join(f"{e:+.4f}" for e in chain.diagonals)
    print(f"chain {k} from {chain.start_label}: hoppings [{hops}]  energies [{diag}]")
if d.residual_dim:
    print(f"{d.residual_dim} dimensions left as isolated nodes")

report = compare_walks(g, d, default_times())
print(f"walk deviation over {len(default_times())} times: {report['max_deviation']:.2e}")
