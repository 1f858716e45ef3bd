"""Short cycles and girth with verified witnesses.

Shows the plain search, the cluster-based search on a graph with two distant
squares, and the girth search on the Petersen graph.
"""

import networkx as nx

from qcongest import apps
from qcongest.congest import Network

petersen = Network(nx.petersen_graph().edges())
res, run = apps.find_short_cycle(petersen, 6, rng=0)
print(f"Petersen, k=6: {res} in {run.rounds} rounds (beta {run.extra['beta']:.3f})")

res, run = apps.find_short_cycle(petersen, 6, rng=0, beta=0.4)
print(f"same with beta=0.4 ({run.extra['heavy']} heavy nodes): {res}")

edges = [(0, 1), (1, 2), (2, 3), (3, 0)] + [(3 + i, 4 + i) for i in range(8)]
edges += [(11, 12), (12, 13), (13, 14), (14, 11)]
far = Network(edges)
res, run = apps.find_short_cycle_clustered(far, 4, rng=2)
print(f"two squares {far.D} apart: {res} using {run.extra['clusters']} clusters")

for name, net in (("K4", Network(nx.complete_graph(4).edges())), ("Petersen", petersen),
                  ("C8", Network(nx.cycle_graph(8).edges()))):
    g, run = apps.girth(net, 1.0, rng=0)
    print(f"girth({name}) = {g}, witness {run.extra['cycle']}, k tried {run.extra['ks']}")
