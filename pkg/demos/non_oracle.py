"""Amplification and estimation when the state preparation is itself a protocol.

The preparer puts a Hadamard register on one node and copies it hop by hop
to a flag node, which marks some values. Each iterate costs two preparer
runs plus an AND up the BFS tree.
"""

import math

from qcongest.congest import Network
from qcongest.nonoracle import (
    aa_iterate, amplitude_amplify, amplitude_estimate, iterate_context, local_phase_problem,
    path_copy_problem, phase_estimate,
)

net = Network([(0, 1), (1, 2), (2, 3)])
prob = path_copy_problem(net, 1, 3, bits=2, marked=[2])
prob.p_max = 1.0
ctx = iterate_context(net, prob)
st, led = aa_iterate(ctx, ctx.prepared())
print(f"p = {prob.probability():.2f}; after one iterate the flag reads 1 with "
      f"probability {st.register_distribution('flag')[1]:.3f} ({len(led)} rounds)")

ok, led = amplitude_amplify(net, prob, 0.05, rng=0)
print(f"amplify: found marked value {ok} in {len(led)} rounds")

runs = [amplitude_estimate(net, prob, 0.05, 1 / 3, rng=s) for s in range(20)]
hits = sum(abs(r.estimate - 0.25) <= 0.05 for r in runs)
print(f"amplitude estimates {[round(r.estimate, 3) for r in runs[:5]]} ...; {hits}/20 within 0.05, "
      f"at most {max(len(r.ledger) for r in runs)} rounds (bound {runs[0].bound:.0f})")

theta = 2 * math.pi * 3 / 8
pe = phase_estimate(net, local_phase_problem(net, theta, eps=math.pi, rng=0), rng=0, t=3)
print(f"phase estimate {pe.estimate:.4f} vs {theta:.4f} with t={pe.t}, {len(pe.ledger)} rounds")
