"""Fan a leader's qubit register out to every node of a tree, then pull it back.

A Bell-like state a|00> + b|11> at the leader becomes a|0...0> + b|1...1>
across all copies, and the ledger shows the pipelined quantum messages.
"""

import numpy as np

from qcongest import statevector as sv
from qcongest.bridge import collect_state, distribute_state, distribution_bound
from qcongest.congest import Network

net = Network([(0, 1), (1, 2), (1, 3), (3, 4)])
state = sv.from_amplitudes([("r", 2)], [0.6, 0, 0, 0.8])

reg, ledger = distribute_state(net, leader=1, state=state)
amps = reg.state.amplitudes
print("nonzero basis states after fan-out:")
for idx in np.flatnonzero(np.abs(amps) > 1e-12):
    print(f"  |{idx:0{reg.state.n_qubits}b}>  amplitude {amps[idx].real:+.3f}")

print(f"rounds used {len(ledger)} (bound {distribution_bound(net.n, net.D, 2)})")
for r, rd in enumerate(ledger.rounds):
    print(f"  round {r} [{rd.label}] qubits per edge: {rd.messages}")

back, _ = collect_state(net, 1, reg)
print("round trip restores the leader state:", back.allclose(state))
