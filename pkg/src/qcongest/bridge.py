"""Compiling parallel-query algorithms onto a CONGEST network.

A batch of p queries costs, in pipelined rounds over a BFS tree rooted at
the leader: distributing the p indices, optionally computing the local values
(batch computer, alpha(p) rounds), aggregating the values up the tree with
the semigroup operation, sending partial aggregates back down so children
can uncompute them, and un-distributing the indices.

Quantum registers are simulated with :mod:`statevector`; each node owns named
registers and every qubit move is logged as a quantum message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Optional

import numpy as np

from . import statevector as sv
from .congest import BfsTree, Network, RoundLedger, build_bfs, elect_leader
from .errors import CapacityError, InvariantViolation, NotASemigroup, ParameterError
from .pqalg import BatchOracle, OracleSpec, QueryTranscript

C_D = 3
C_F = 6

COHERENT_NODE_CAP = 8
COHERENT_QUBIT_CAP = 18  # keeps the once-per-run check well under a second
DENSE_COPY_CAP = 16  # larger fan-outs use the sparse permutation simulation
CLASSICAL_NODE_CAP = 64


def lg(n: int) -> float:
    """log2 n for bound formulas, floored at 1."""
    return max(1.0, math.log2(max(n, 1)))


def _chunks(total: int, word: int) -> list:
    """Split ``total`` units into word-sized chunks."""
    if total <= 0:
        return []
    full, rest = divmod(total, word)
    return [word] * full + ([rest] if rest else [])


def tree_stream(tree: BfsTree, sizes: list, downward: bool) -> list:
    """Per-round edge loads for pipelining chunks along every tree edge.

    Downward, chunk j crosses into depth d at round d + j - 1; upward, the
    node at depth d forwards chunk j at round (H - d) + j. Returns one
    message dict per round.
    """
    h = tree.height
    c = len(sizes)
    if h == 0 or c == 0:
        return []
    rounds = [dict() for _ in range(h + c - 1)]
    for child, parent in tree.parent.items():
        d = tree.depth[child]
        for j, size in enumerate(sizes, 1):
            if downward:
                rounds[d + j - 2][(parent, child)] = size
            else:
                rounds[h - d + j - 1][(child, parent)] = size
    return rounds


def _record(ledger: RoundLedger, rounds: list, label: str, quantum: bool) -> None:
    for msgs in rounds:
        ledger.record(msgs, label, quantum)


# ---------------------------------------------------------------- state distribution

@dataclass
class DistributedRegister:
    state: sv.StateVector
    q: int
    leader: int
    tree: BfsTree
    owners: dict
    name: str = "reg"

    def copies(self) -> list:
        return [self.owners[v] for v in sorted(self.owners)]


def _reg(v: int) -> str:
    return f"n{v}"


def _xor_copy(q: int) -> list:
    """Permutation (a, b) -> (a, b xor a) on two q-qubit registers."""
    size = 2 ** q
    return [a * size + (b ^ a) for a in range(size) for b in range(size)]


def _bfs_order(tree: BfsTree) -> list:
    return sorted(tree.depth, key=lambda v: (tree.depth[v], v))


def distribute_state(net: Network, leader: int, state: sv.StateVector,
                     tree: Optional[BfsTree] = None, ledger: Optional[RoundLedger] = None):
    """Turn sum_i a_i |i> at the leader into sum_i a_i |i>^{(x) n}.

    Each parent XOR-copies its register into a fresh register for each child
    and streams it down in word-sized chunks. Returns (DistributedRegister, ledger).
    The register holds a dense state when n*q fits the simulator and a
    :class:`statevector.SparseState` otherwise (the circuit only permutes).
    Above DENSE_COPY_CAP qubits the sparse form is used.
    """
    if len(state.layout) != 1:
        raise ParameterError("distribute_state expects a single-register state")
    q = state.layout[0][1]
    ledger = ledger if ledger is not None else net.new_ledger()
    if tree is None:
        tree, _ = build_bfs(net, leader, ledger)
    order = _bfs_order(tree)
    layout = [(_reg(v), q) for v in order]
    perm = _xor_copy(q)
    if net.n * q > DENSE_COPY_CAP:
        glob = sv.SparseState.embed(state, layout)
        step = sv.apply_sparse
    else:
        amps = np.zeros(2 ** (net.n * q), dtype=np.complex128)
        # leader register is the most significant block; all others start at |0>
        stride = 2 ** (q * (net.n - 1))
        amps[np.arange(2 ** q) * stride] = state.amplitudes
        glob = sv.StateVector(amps, layout)
        step = sv.apply
    for v in order[1:]:
        glob = step(glob, sv.permutation(_reg(tree.parent[v]), _reg(v), mapping=perm))
    _record(ledger, tree_stream(tree, _chunks(q, ledger.word), True), "distribute", True)
    owners = {v: _reg(v) for v in order}
    return DistributedRegister(glob, q, leader, tree, owners, state.layout[0][0]), ledger


def collect_state(net: Network, leader: int, reg: DistributedRegister,
                  ledger: Optional[RoundLedger] = None):
    """Inverse of :func:`distribute_state`; returns (leader register state, ledger)."""
    ledger = ledger if ledger is not None else net.new_ledger()
    tree, q = reg.tree, reg.q
    glob = reg.state
    perm = _xor_copy(q)
    step = sv.apply_sparse if isinstance(glob, sv.SparseState) else sv.apply
    for v in reversed(_bfs_order(tree)[1:]):
        glob = step(glob, sv.permutation(_reg(tree.parent[v]), _reg(v), mapping=perm))
    _record(ledger, tree_stream(tree, _chunks(q, ledger.word), False), "collect", True)
    if isinstance(glob, sv.SparseState):
        out = np.zeros(2 ** q, dtype=np.complex128)
        for vals, a in glob.terms.items():
            if any(vals[1:]) and abs(a) > 1e-9:
                raise InvariantViolation("non-leader copies did not return to |0>")
            if not any(vals[1:]):
                out[vals[0]] += a
        return sv.StateVector(out, [(reg.name, q)]), ledger
    t = glob.amplitudes.reshape(2 ** q, -1)
    residue = np.abs(t[:, 1:]).max() if t.shape[1] > 1 else 0.0
    if residue > 1e-9:
        raise InvariantViolation("non-leader copies did not return to |0>")
    return sv.StateVector(t[:, 0].copy(), [(reg.name, q)]), ledger


def distribution_bound(n: int, D: int, q: int) -> int:
    return C_D * (D + math.ceil(q / lg(n)))


# ---------------------------------------------------------------- framework

@dataclass
class DistributedInput:
    """Per-node private values x^(v)_i combined by a commutative semigroup.

    ``local(v, i)`` is node v's value for index i; ``combine`` is the
    semigroup operation; values fit in q bits.
    """

    k: int
    q: int
    local: Callable[[int, int], object]
    combine: Callable
    name: str = ""
    value_range: Optional[tuple] = None

    def central_spec(self, net: Network) -> OracleSpec:
        def evaluate(i):
            return reduce(self.combine, (self.local(v, i) for v in net.nodes))
        return OracleSpec(self.k, self.q, evaluate, self.combine, self.name, self.value_range)


@dataclass
class BatchComputer:
    """Computes the local values of a batch on the fly.

    ``run(net, indices, ledger)`` executes the protocol for a classical batch,
    recording its rounds, and returns {node: {index: value}}. ``simulate``
    gives the same table without rounds, for the branches of a superposed
    batch, which is charged ``alpha(p, net)`` rounds.
    """

    run: Callable
    simulate: Callable
    alpha: Callable[[int, Network], int]


@dataclass
class FrameworkRun:
    result: object
    transcript: QueryTranscript
    ledger: RoundLedger
    bound: int
    p: int
    leader: Optional[int]
    tree: Optional[BfsTree]
    alpha: int = 0
    hygiene: Optional[bool] = None
    extra: dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.ledger)

    @property
    def b(self) -> int:
        return self.transcript.b


def framework_bound(n: int, D: int, k: int, q: int, p: int, b: int, alpha: int = 0) -> int:
    """C_F (D + b ((D+p) ceil(q/log n) + p ceil(log k/log n) + alpha))."""
    ln = lg(n)
    per = (D + p) * math.ceil(q / ln) + p * math.ceil(math.log2(max(k, 2)) / ln) + alpha
    return C_F * (D + b * per)


def check_semigroup_on(combine: Callable, samples: list, rng, trials: int = 64) -> None:
    g = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if not samples:
        return
    for _ in range(trials):
        a, b, c = (samples[int(i)] for i in g.integers(len(samples), size=3))
        if combine(a, b) != combine(b, a) or combine(combine(a, b), c) != combine(a, combine(b, c)):
            raise NotASemigroup(f"combine is not a commutative semigroup on ({a!r}, {b!r}, {c!r})")


class _NetworkResponder:
    """Answers batches by running the per-batch protocol on the network."""

    def __init__(self, net, tree, dinput, p, ledger, batch_computer):
        self.net, self.tree, self.din, self.p = net, tree, dinput, p
        self.ledger, self.bc = ledger, batch_computer
        w = ledger.word
        idx_bits = max(1, math.ceil(math.log2(max(dinput.k, 2))))
        self.idx_sizes = _chunks(p * idx_bits, w)
        self.val_sizes = _chunks(p * max(1, dinput.q), w)
        self.alpha_used = 0

    def _aggregate(self, table: dict, i: int):
        """Convergecast of combine over the tree for index i (bottom-up)."""
        agg = {}
        for v in sorted(self.tree.depth, key=lambda u: -self.tree.depth[u]):
            acc = table[v][i]
            for c in self.tree.children(v):
                acc = self.din.combine(acc, agg[c])
            agg[v] = acc
        return agg[self.tree.root]

    def __call__(self, indices: list, superposed: bool) -> list:
        led, tree = self.ledger, self.tree
        tag = "q" if superposed else "c"
        _record(led, tree_stream(tree, self.idx_sizes, True), f"batch:{tag}:indices", superposed)
        if self.bc is None:
            table = {v: {i: self.din.local(v, i) for i in indices} for v in self.net.nodes}
        elif superposed:
            table = self.bc.simulate(self.net, indices)
            cost = self.bc.alpha(self.p, self.net)
            led.charge(cost, "batch:q:alpha(charged)")
            self.alpha_used = max(self.alpha_used, cost)
        else:
            start = len(led)
            table = self.bc.run(self.net, indices, led)
            used = len(led) - start
            if used > self.bc.alpha(self.p, self.net):
                raise InvariantViolation(f"batch computer used {used} rounds > alpha(p)")
            self.alpha_used = max(self.alpha_used, self.bc.alpha(self.p, self.net))
        vals = [self._aggregate(table, i) for i in indices]
        _record(led, tree_stream(tree, self.val_sizes, False), f"batch:{tag}:aggregate", superposed)
        _record(led, tree_stream(tree, self.val_sizes, True), f"batch:{tag}:uncompute", superposed)
        _record(led, tree_stream(tree, self.idx_sizes, False), f"batch:{tag}:undistribute", superposed)
        return vals


def execute_framework(net: Network, algorithm: Callable, dinput: DistributedInput, p: int,
                      batch_computer: Optional[BatchComputer] = None, rng=None,
                      coherent_check: bool = False, semigroup_samples: Optional[list] = None):
    """Run ``algorithm(oracle, p, rng)`` with every batch answered by the network.

    ``algorithm`` follows the pqalg convention and returns (result, transcript).
    Returns a :class:`FrameworkRun`; raises InvariantViolation if the ledger
    exceeds the framework bound.
    """
    if p < 1:
        raise ParameterError("p must be at least 1")
    if net.n > CLASSICAL_NODE_CAP:
        raise CapacityError(f"n = {net.n} exceeds the desk-scale cap of {CLASSICAL_NODE_CAP}")
    g = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    spec = dinput.central_spec(net)
    samples = semigroup_samples
    if samples is None and batch_computer is None:
        probe = np.random.default_rng(0)
        samples = [dinput.local(net.nodes[int(probe.integers(net.n))], int(probe.integers(dinput.k)))
                   for _ in range(16)]
    check_semigroup_on(dinput.combine, samples or [], 0)
    ledger = net.new_ledger()
    if net.n == 1:
        result, transcript = algorithm(BatchOracle(spec, p), p, g)
        return FrameworkRun(result, transcript, ledger, 0, p, net.nodes[0], None)
    leader, _ = elect_leader(net, ledger)
    tree, _ = build_bfs(net, leader, ledger)
    responder = _NetworkResponder(net, tree, dinput, p, ledger, batch_computer)
    oracle = BatchOracle(spec, p, responder)
    result, transcript = algorithm(oracle, p, g)
    alpha = batch_computer.alpha(p, net) if batch_computer is not None else 0
    bound = framework_bound(net.n, net.D, dinput.k, dinput.q, p, transcript.b, alpha)
    run = FrameworkRun(result, transcript, ledger, bound, p, leader, tree, alpha)
    if len(ledger) > bound:
        raise InvariantViolation(f"framework used {len(ledger)} rounds > bound {bound}")
    if coherent_check and fits_coherent(net, dinput):
        run.hygiene = coherent_query(net, tree, dinput)[1]
    return run


def run_centralized(net: Network, algorithm: Callable, dinput: DistributedInput, p: int, rng=None):
    """Same algorithm against the centralized combined oracle (for equivalence checks)."""
    g = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return algorithm(BatchOracle(dinput.central_spec(net), p), p, g)


# ---------------------------------------------------------------- coherent batch circuit

def _coherent_layout(net: Network, tree: BfsTree, dinput: DistributedInput):
    kb = max(1, math.ceil(math.log2(max(dinput.k, 2))))
    q = max(1, dinput.q)
    layout = [("out", q)]
    for v in _bfs_order(tree):
        layout.append((f"i{v}", kb))
        layout.append((f"x{v}", q))
        if tree.children(v):
            layout.append((f"a{v}", q))
    return layout, kb, q


def fits_coherent(net: Network, dinput: DistributedInput) -> bool:
    if net.n > COHERENT_NODE_CAP:
        return False
    tree, _ = build_bfs(net, max(net.nodes))
    layout, _, _ = _coherent_layout(net, tree, dinput)
    return sum(w for _, w in layout) <= COHERENT_QUBIT_CAP


def coherent_query(net: Network, tree: BfsTree, dinput: DistributedInput,
                   amplitudes: Optional[np.ndarray] = None):
    """One query slot executed coherently on the statevector.

    Starting from sum_i a_i |i> at the leader, the circuit fans the index out
    down the tree, loads local values, aggregates them out-of-place up the
    tree, copies the root aggregate into the leader's output register, then
    runs everything before the copy in reverse. Returns (final state,
    hygiene flag): the flag is True when every register other than the
    leader's index and output is back to |0> and the leader holds
    sum_i a_i |i>|x_i>.
    """
    layout, kb, q = _coherent_layout(net, tree, dinput)
    if sum(w for _, w in layout) > sv.MAX_QUBITS:
        raise CapacityError("coherent query does not fit the statevector cap")
    root = tree.root
    K, Q = 2 ** kb, 2 ** q
    if amplitudes is None:
        amplitudes = np.zeros(K)
        amplitudes[:dinput.k] = 1
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    st = sv.new_state(layout)
    t = st.amplitudes.reshape(Q, K, -1)
    t[0, :, 0] = amplitudes
    t[0, 0, 0] = amplitudes[0]
    st = sv.StateVector(t.reshape(-1), layout)

    def val(v, i):
        return int(dinput.local(v, i)) % Q if i < dinput.k else 0

    def comb(a, b):
        return int(dinput.combine(a, b)) % Q

    forward = []
    order = _bfs_order(tree)
    copy_idx = _xor_copy(kb)
    for v in order[1:]:
        forward.append(sv.permutation(f"i{tree.parent[v]}", f"i{v}", mapping=copy_idx))
    for v in order:
        forward.append(sv.permutation(
            f"i{v}", f"x{v}", mapping=[i * Q + (x ^ val(v, i)) for i in range(K) for x in range(Q)]))
    for v in sorted(order, key=lambda u: -tree.depth[u]):
        kids = tree.children(v)
        if not kids:
            continue
        srcs = [f"x{v}"] + [f"a{c}" if tree.children(c) else f"x{c}" for c in kids]
        regs = srcs + [f"a{v}"]
        dim = Q ** len(regs)
        mapping = []
        for code in range(dim):
            digits, r = [], code
            for _ in regs:
                digits.append(r % Q)
                r //= Q
            digits.reverse()
            acc = reduce(comb, digits[:-1])
            digits[-1] ^= acc
            new = 0
            for d in digits:
                new = new * Q + d
            mapping.append(new)
        forward.append(sv.permutation(*regs, mapping=mapping))
    top = f"a{root}" if tree.children(root) else f"x{root}"
    copy_out = sv.permutation(top, "out", mapping=_xor_copy(q))
    for op in forward:
        st = sv.apply(st, op)
    st = sv.apply(st, copy_out)
    for op in reversed(forward):
        st = sv.apply(st, op.inverse())
    expect = np.zeros_like(st.amplitudes).reshape(Q, K, -1)
    for i in range(K):
        x = reduce(comb, [val(v, i) for v in net.nodes]) if i < dinput.k else 0
        expect[x, i, 0] = amplitudes[i]
    ok = bool(np.max(np.abs(st.amplitudes - expect.reshape(-1))) <= 1e-9)
    return st, ok
