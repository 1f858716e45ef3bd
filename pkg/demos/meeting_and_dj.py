"""Distributed-data problems: every node holds a private vector.

Meeting scheduling sums availability calendars across the network and finds
the best slot; distributed Deutsch-Jozsa decides whether the XOR of the nodes'
strings is constant or balanced with a single batch.
"""

import numpy as np

from qcongest import apps
from qcongest.congest import Network

net = Network([(0, 1), (1, 2), (2, 3), (1, 4)])
rng = np.random.default_rng(11)
calendars = {v: rng.integers(0, 2, size=16).tolist() for v in net.nodes}
sums = apps.brute_oracle_sums(calendars)
slot, run = apps.meeting_schedule(net, calendars, rng=1)
print("column sums:", sums)
print(f"chosen slot {slot} with {sums[slot]} free nodes (best {max(sums)})")
print(f"rounds {run.rounds} <= bound {run.bound}, batches {run.runs[0].b}")

shares = {v: rng.integers(0, 2, size=8).tolist() for v in net.nodes}
target = [0, 1, 1, 0, 1, 0, 0, 1]
acc = list(target)
for v in net.nodes[1:]:
    acc = [a ^ b for a, b in zip(acc, shares[v])]
shares[net.nodes[0]] = acc
verdict, run = apps.distributed_dj(net, shares, rng=0)
print(f"XOR of shares is {target}: {verdict} in {run.rounds} rounds")
