"""Diameter, radius and average eccentricity on a small random graph.

Eccentricities are never stored anywhere: each batch of p candidate nodes is
answered by a fresh multi-source BFS.
"""

from collections import Counter

import networkx as nx

from qcongest import apps
from qcongest.congest import Network

g = nx.connected_watts_strogatz_graph(14, 4, 0.2, seed=5)
net = Network(g.edges(), g.nodes())
truth = apps.brute_oracle(net)
print(f"n={net.n} m={net.m} D={net.D}; exact diameter {truth['diameter']}, radius "
      f"{truth['radius']}, mean eccentricity {truth['avgEccentricity']:.3f}")

for mode in ("max", "min"):
    vals = [int(apps.diameter_radius(net, mode, rng=s)[0]) for s in range(50)]
    value, run = apps.diameter_radius(net, mode, rng=0, repetitions=7)
    print(f"{mode}: single-run answers {dict(Counter(vals))}; "
          f"7-fold majority {value}, {run.rounds} rounds")

est, run = apps.avg_eccentricity(net, 0.25, rng=0)
print(f"average eccentricity estimate {est:.3f} (eps 0.25), {run.rounds} rounds <= {run.bound}")
