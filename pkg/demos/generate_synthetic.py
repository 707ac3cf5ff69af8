"""
Generating a synthetic graph with structural bias
=================================================

Every node belongs to one of four (s, y) groups.  Edges are drawn with a
probability that depends only on the groups of the two endpoints, so the
edge-type mix, not the features, decides how much a message-passing model
mixes sensitive information into its predictions.
"""

import numpy as np

from fairgraph import compute_stats, expected_edge_counts, generate, preset
from fairgraph.graphdata import EdgeType

# The Syn-1 preset: 5,000 nodes, balanced groups, 48 features.
cfg = preset("syn1", seed=0)
g = generate(cfg)
stats = compute_stats(g)
print(stats.format_table())

# Compare realized edge counts with their closed-form expectations.  Each
# type's count is binomial, so deviations of a couple of standard deviations
# are normal.
sizes = [stats.group_sizes[k] for k in sorted(stats.group_sizes)]
expected = expected_edge_counts(cfg, sizes)
for t in EdgeType:
    got, exp = stats.edge_type_counts[t], expected[t]
    print(f"{t.name:>4}  realized {got:6d}  expected {exp:9.1f}  z={(got - exp) / np.sqrt(exp):+.2f}")

# Roughly half of all edges join two nodes of the same group.
same = stats.bucket(EdgeType.E1, EdgeType.E2, EdgeType.E3, EdgeType.E4)
print(f"same-group share: {same / stats.num_edges:.3f}")

# Features are [e_y | e_s]: the first block carries the label signal, the
# second the sensitive attribute.  Class means of the first block differ.
d1 = cfg.d1
print("mean e_y, y=1:", g.features[g.labels == 1, :d1].mean().round(3))
print("mean e_y, y=0:", g.features[g.labels == 0, :d1].mean().round(3))
