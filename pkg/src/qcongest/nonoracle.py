"""Amplitude amplification, phase estimation and amplitude estimation over a network.

These wrap distributed subroutines that are not standard queries: the state
is spread over node-owned registers, and a preparation protocol (or a
unitary with a known eigenstate) is given as a gate list plus the per-round
messages it sends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import statevector as sv
from .bridge import _bfs_order, _chunks, tree_stream
from .congest import BfsTree, Network, RoundLedger, build_bfs, elect_leader
from .errors import InvariantViolation, ParameterError
from .pqalg import iterative_amplitude_estimation

C_A = 4
C_P = 8

AE_SHOTS = 8


@dataclass
class DistributedUnitary:
    """A unitary on node-owned registers.

    ``rounds`` lists the messages of each communication round the protocol
    needs; the adjoint sends the same loads in reverse order and direction.
    """

    layout: list
    owner: dict
    ops: list
    rounds: list = field(default_factory=list)

    @property
    def cost(self) -> int:
        return len(self.rounds)

    def apply(self, state: sv.StateVector) -> sv.StateVector:
        return sv.apply_all(state, self.ops)

    def adjoint(self, state: sv.StateVector) -> sv.StateVector:
        return sv.apply_all(state, [op.inverse() for op in reversed(self.ops)])

    def record(self, ledger: RoundLedger, adjoint: bool = False, label: str = "prepare") -> None:
        seq = reversed(self.rounds) if adjoint else self.rounds
        for msgs in seq:
            if adjoint:
                msgs = {(v, u): s for (u, v), s in msgs.items()}
            ledger.record(msgs, label + ("-adj" if adjoint else ""), True)

    def check(self, tol: float = 1e-9) -> None:
        rng = np.random.default_rng(0)
        n = sum(w for _, w in self.layout)
        a = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        st = sv.from_amplitudes(self.layout, a)
        if not self.adjoint(self.apply(st)).allclose(st, tol):
            raise InvariantViolation("preparer followed by its adjoint is not the identity")


@dataclass
class AmplitudeProblem:
    """A preparer of sqrt(1-p)|phi0>|0> + sqrt(p)|phi1>|1>; ``flag`` names the last qubit."""

    preparer: DistributedUnitary
    flag: str
    p_max: Optional[float] = None

    @property
    def flag_node(self) -> int:
        return self.preparer.owner[self.flag]

    def prepared(self) -> sv.StateVector:
        return self.preparer.apply(sv.new_state(self.preparer.layout))

    def probability(self) -> float:
        """Exact p from the simulated state (harness ground truth)."""
        return float(self.prepared().register_distribution(self.flag)[1])


def path_copy_problem(net: Network, source: int, flag_node: int, bits: int, marked) -> AmplitudeProblem:
    """Uniform ``bits``-qubit register at ``source``, XOR-copied hop by hop to ``flag_node``,
    which sets the flag on values in ``marked``; p = |marked| / 2**bits.
    """
    path = _shortest_path(net, source, flag_node)
    layout = [(f"r{v}", bits) for v in path] + [("flag", 1)]
    owner = {f"r{v}": v for v in path}
    owner["flag"] = flag_node
    ops = [sv.hadamard(f"r{source}")]
    copy = [a * 2 ** bits + (b ^ a) for a in range(2 ** bits) for b in range(2 ** bits)]
    rounds = []
    for u, v in zip(path, path[1:]):
        ops.append(sv.permutation(f"r{u}", f"r{v}", mapping=copy))
        rounds += [{(u, v): c} for c in _chunks(bits, net.word)]
    good = set(int(m) for m in marked)
    ops.append(sv.permutation(f"r{flag_node}", "flag",
                              mapping=[2 * x + (f ^ (x in good)) for x in range(2 ** bits) for f in (0, 1)]))
    return AmplitudeProblem(DistributedUnitary(layout, owner, ops, rounds), "flag")


def _shortest_path(net: Network, s: int, t: int) -> list:
    path = [t]
    while path[-1] != s:
        v = path[-1]
        path.append(min(u for u in net.adj[v] if net.dist(s, u) == net.dist(s, v) - 1))
    return path[::-1]


# ---------------------------------------------------------------- amplification iterate

@dataclass
class IterateContext:
    """Leader, BFS tree and the state layout (problem registers plus one AND ancilla per node)."""

    net: Network
    prob: AmplitudeProblem
    leader: int
    tree: BfsTree
    layout: list
    setup: RoundLedger

    def zero_state(self) -> sv.StateVector:
        return sv.new_state(self.layout)

    def prepared(self) -> sv.StateVector:
        return self.prob.preparer.apply(self.zero_state())


def iterate_context(net: Network, prob: AmplitudeProblem) -> IterateContext:
    ledger = net.new_ledger()
    if net.n == 1:
        leader = net.nodes[0]
        tree, _ = build_bfs(net, leader)
    else:
        leader, _ = elect_leader(net, ledger)
        tree, _ = build_bfs(net, leader, ledger)
    layout = list(prob.preparer.layout) + [(f"z{v}", 1) for v in _bfs_order(tree)]
    return IterateContext(net, prob, leader, tree, layout, ledger)


def _and_gate(ctx: IterateContext, v: int) -> sv.GateOp:
    """z_v ^= [v's registers are all zero and every child's subtree is all zero]."""
    local = [(r, w) for r, w in ctx.prob.preparer.layout if ctx.prob.preparer.owner[r] == v]
    kids = ctx.tree.children(v)
    regs = local + [(f"z{c}", 1) for c in kids] + [(f"z{v}", 1)]
    widths = [w for _, w in regs]
    code = np.arange(2 ** sum(widths))
    digits, r = [], code
    for w in reversed(widths):
        digits.append(r % (2 ** w))
        r = r >> w
    digits.reverse()
    ok = np.ones_like(code, dtype=bool)
    for d in digits[:len(local)]:
        ok &= d == 0
    for d in digits[len(local):-1]:
        ok &= d == 1
    return sv.permutation(*[name for name, _ in regs], mapping=code ^ ok.astype(np.int64))


def _and_ops(ctx: IterateContext) -> list:
    order = sorted(ctx.tree.depth, key=lambda u: (-ctx.tree.depth[u], u))
    return [_and_gate(ctx, v) for v in order]


def _and_rounds(tree: BfsTree, upward: bool) -> list:
    h = tree.height
    out = []
    depths = range(h, 0, -1) if upward else range(1, h + 1)
    for d in depths:
        msgs = {}
        for c, par in tree.parent.items():
            if tree.depth[c] == d:
                msgs[(c, par) if upward else (par, c)] = 1
        out.append(msgs)
    return out


def aa_iterate(ctx: IterateContext, state: sv.StateVector):
    """One amplification iterate A (2|0><0| - I) A^dagger S_good on the distributed state.

    The good-part reflection is a Z on the flag qubit. The zero reflection
    runs A^dagger, computes the all-zero indicator by a reversible AND up the
    tree, flips the phase at the leader unless the indicator is set,
    uncomputes the AND and re-runs A. Returns (state, ledger of this iterate).
    """
    prob = ctx.prob
    led = ctx.net.new_ledger()
    state = sv.apply(state, sv.pauli_z(prob.flag))
    state = prob.preparer.adjoint(state)
    prob.preparer.record(led, adjoint=True)
    ands = _and_ops(ctx)
    state = sv.apply_all(state, ands)
    for msgs in _and_rounds(ctx.tree, True):
        led.record(msgs, "and-up", True)
    z = f"z{ctx.leader}"
    state = sv.apply_all(state, [sv.pauli_x(z), sv.pauli_z(z), sv.pauli_x(z)])
    state = sv.apply_all(state, [op.inverse() for op in reversed(ands)])
    for msgs in _and_rounds(ctx.tree, False):
        led.record(msgs, "and-down", True)
    state = prob.preparer.apply(state)
    prob.preparer.record(led)
    return state, led


def iterate_bound(r_psi: int, d: int) -> int:
    return C_A * (r_psi + d)


def _report_flag(ctx: IterateContext, ledger: RoundLedger) -> None:
    """Broadcast the measured flag bit from its owner over a BFS tree rooted there."""
    src = ctx.prob.flag_node
    tree, _ = build_bfs(ctx.net, src)
    for msgs in tree_stream(tree, [1], True):
        ledger.record(msgs, "flag", False)


def amplify_bound(r_psi: int, d: int, p: float, delta: float) -> float:
    if p <= 0:
        return math.inf
    return C_A * (r_psi + d) * math.ceil(1 / math.sqrt(p)) * max(1, math.ceil(math.log2(1 / delta)))


def amplitude_amplify(net: Network, prob: AmplitudeProblem, delta: float, rng=None,
                      p_hint: Optional[float] = None, p_min: float = 1 / 64):
    """Drive the shared state into its good part with probability >= 1 - delta.

    With ``p_hint`` the iterate count is fixed from it and up to
    ceil(log2(1/delta)) attempts are made. Without it an exponentially growing
    random iterate count is used until the cost reaches the bound for
    ``p_min``. Every attempt measures the flag and broadcasts the outcome.
    Returns (success, ledger).
    """
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    g = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    ctx = iterate_context(net, prob)
    ledger = ctx.setup
    attempts = max(1, math.ceil(math.log2(1 / delta)))
    if p_hint is not None:
        th = math.asin(math.sqrt(min(1.0, max(p_hint, 1e-12))))
        j = max(0, round(math.pi / (4 * th) - 0.5))
        plan = [j] * attempts
    else:
        plan = None
    budget = amplify_bound(prob.preparer.cost, net.D, p_min, delta)
    m, spent = 1.0, 0
    cache = {}
    for a in range(attempts if plan else 10 ** 6):
        if plan:
            j = plan[a]
        else:
            j = int(g.integers(0, math.ceil(m)))
            m = min(m * 6 / 5, math.sqrt(1 / p_min))
            if spent + (2 * j + 1) * (prob.preparer.cost + net.D) > budget:
                break
        if j not in cache:
            st = ctx.prepared()
            it = None
            for _ in range(j):
                st, it = aa_iterate(ctx, st)
            cache[j] = (st, it)
        st, it = cache[j]
        before = len(ledger)
        prob.preparer.record(ledger)
        for _ in range(j):
            ledger.extend(it)
        bits, _ = sv.measure(st, [prob.flag], g)
        _report_flag(ctx, ledger)
        spent += len(ledger) - before
        if bits == "1":
            return True, ledger
    return False, ledger


# ---------------------------------------------------------------- phase estimation

@dataclass
class PhaseProblem:
    """An eigenstate |psi> on node-owned registers and a controlled-power builder for U.

    ``controlled(controls, power)`` gets each node's copy of the control
    qubit and returns the gates of controlled U**power. ``rounds`` is R, the
    cost of one application of U. ``theta`` is harness-only ground truth.
    """

    eigen: sv.StateVector
    owner: dict
    controlled: Callable
    rounds: int
    theta: float
    eps: float
    delta: float = 1 / 3

    def check(self, nodes, tol: float = 1e-9) -> None:
        layout = list(self.eigen.layout) + [(f"c{v}", 1) for v in nodes]
        st = sv.from_amplitudes(layout, np.kron(self.eigen.amplitudes, _one(len(nodes))))
        out = sv.apply_all(st, self.controlled({v: f"c{v}" for v in nodes}, 1))
        if np.max(np.abs(out.amplitudes - np.exp(1j * self.theta) * st.amplitudes)) > tol:
            raise InvariantViolation("U does not act on the shared state with phase theta")


def _one(n: int) -> np.ndarray:
    v = np.zeros(2 ** n)
    v[-1] = 1
    return v


def local_phase_problem(net: Network, theta: float, eps: float, delta: float = 1 / 3,
                        rng=None, rounds: int = 0) -> PhaseProblem:
    """Each node holds one qubit in |1> and a local phase theta_v, with sum theta_v = theta.

    U is the product of the local phases, so it needs no communication unless
    ``rounds`` says otherwise.
    """
    g = np.random.default_rng(rng)
    parts = g.dirichlet(np.ones(net.n)) * theta if net.n > 1 else np.array([theta])
    share = dict(zip(net.nodes, parts))
    layout = [(f"e{v}", 1) for v in net.nodes]
    eigen = sv.from_amplitudes(layout, _one(net.n))

    def controlled(controls, power):
        return [sv.controlled_phase(controls[v], f"e{v}", power * share[v]) for v in net.nodes]

    return PhaseProblem(eigen, {f"e{v}": v for v in net.nodes}, controlled, rounds, theta, eps, delta)


def control_qubits(eps: float) -> int:
    return max(1, math.ceil(math.log2(2 * math.pi / eps))) + 2


def repetitions(delta: float) -> int:
    """Runs for the median; the two guard qubits already give one run success >= 3/4."""
    if delta >= 1 / 4:
        return 1
    return 8 * math.ceil(math.log2(1 / delta))


def phase_bound(r: int, eps: float, delta: float, d: int) -> float:
    return C_P * ((r / eps) * math.log2(1 / delta) + d)


@dataclass
class PhaseResult:
    estimate: float
    ledger: RoundLedger
    bound: float
    t: int
    runs: int
    distribution: np.ndarray
    hygiene: bool


def _kickback_qubit(net: Network, tree: BfsTree, prob: PhaseProblem, power: int):
    """Fan one |+> control qubit out to every node, apply controlled U**power, fan it back.

    Returns the leader qubit's two amplitudes and whether every other register
    returned to its starting value.
    """
    order = _bfs_order(tree)
    layout = list(prob.eigen.layout) + [(f"c{v}", 1) for v in order]
    zero = np.zeros(2 ** net.n)
    zero[0] = 1
    st = sv.from_amplitudes(layout, np.kron(prob.eigen.amplitudes, zero))
    fan = [sv.pauli_x(f"c{v}", controls=(f"c{tree.parent[v]}",)) for v in order[1:]]
    st = sv.apply(st, sv.hadamard(f"c{tree.root}"))
    st = sv.apply_all(st, fan)
    st = sv.apply_all(st, prob.controlled({v: f"c{v}" for v in order}, power))
    st = sv.apply_all(st, list(reversed(fan)))
    t = st.amplitudes.reshape(len(prob.eigen.amplitudes), 2, -1)
    e = prob.eigen.amplitudes.conj()
    a0, a1 = e @ t[:, 0, 0], e @ t[:, 1, 0]
    clean = abs(abs(a0) ** 2 + abs(a1) ** 2 - 1) < 1e-9
    return np.array([a0, a1]), clean


def _circular_median(values: np.ndarray, size: int) -> float:
    center = int(np.bincount(values, minlength=size).argmax())
    offs = (values - center + size // 2) % size - size // 2
    return (center + float(np.median(offs))) % size


def phase_estimate(net: Network, prob: PhaseProblem, rng=None, t: Optional[int] = None,
                   runs: Optional[int] = None) -> PhaseResult:
    """Leader learns theta to within eps (mod 2 pi) with probability >= 1 - delta.

    All runs' control registers are streamed down the BFS tree together,
    every node applies its share of controlled U**(2**j) (R rounds per
    application of U), the copies are streamed back and the leader applies
    the inverse QFT and measures. The result is the circular median.
    Control qubits are independent given the eigenstate, so each one is
    simulated on its own fan-out circuit and the leader's register is their
    tensor product.
    """
    if prob.eps <= 0:
        raise ParameterError("eps must be positive")
    g = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    t = control_qubits(prob.eps) if t is None else int(t)
    runs = repetitions(prob.delta) if runs is None else int(runs)
    ledger = net.new_ledger()
    if net.n == 1:
        leader = net.nodes[0]
        tree, _ = build_bfs(net, leader)
    else:
        leader, _ = elect_leader(net, ledger)
        tree, _ = build_bfs(net, leader, ledger)
    chunks = _chunks(runs * t, ledger.word)
    for msgs in tree_stream(tree, chunks, True):
        ledger.record(msgs, "controls-down", True)
    ledger.charge(runs * (2 ** t - 1) * prob.rounds, "controlled-U")
    for msgs in tree_stream(tree, chunks, False):
        ledger.record(msgs, "controls-up", True)

    reg = np.ones(1, dtype=np.complex128)
    clean = True
    for j in range(t):
        q, ok = _kickback_qubit(net, tree, prob, 2 ** (t - 1 - j))
        reg = np.kron(reg, q)
        clean &= ok
    st = sv.apply(sv.from_amplitudes([("k", t)], reg), sv.inverse_qft("k"))
    dist = st.register_distribution("k")
    size = 2 ** t
    ys = g.choice(size, size=runs, p=dist / dist.sum())
    est = 2 * math.pi * _circular_median(ys, size) / size
    return PhaseResult(est, ledger, phase_bound(prob.rounds, prob.eps, prob.delta, net.D),
                       t, runs, dist, bool(clean))


def phase_error(estimate: float, theta: float) -> float:
    d = (estimate - theta) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


# ---------------------------------------------------------------- amplitude estimation

def estimate_bound(r_psi: int, d: int, p_max: float, eps: float, delta: float) -> float:
    return C_P * (r_psi + d) * (math.sqrt(p_max) / eps) * math.log2(1 / delta)


@dataclass
class EstimateResult:
    estimate: float
    ledger: RoundLedger
    bound: float
    shots: int
    hits: int


def amplitude_estimate(net: Network, prob: AmplitudeProblem, eps: float, delta: float,
                       rng=None, shots: int = AE_SHOTS) -> EstimateResult:
    """Estimate p to additive eps with probability >= 1 - delta.

    Iterative amplitude estimation: each shot prepares the state, applies m
    distributed iterates, measures the flag and reports it. The schedule
    stops before its cost would pass the round bound. When no shot ever
    reads 1 the estimate is 0.
    """
    if eps <= 0 or not 0 < delta < 1:
        raise ParameterError("need eps > 0 and delta in (0, 1)")
    if prob.p_max is None:
        raise ParameterError("amplitude estimation needs p_max")
    g = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    ctx = iterate_context(net, prob)
    ledger = ctx.setup
    r_psi = prob.preparer.cost
    bound = estimate_bound(r_psi, net.D, prob.p_max, eps, delta)
    unit = r_psi + net.D
    units = 10 ** 9 if unit == 0 else int((bound - len(ledger)) // unit)
    states = [ctx.prepared()]
    step_ledger = [None]
    tally = {"shots": 0, "hits": 0}

    def sample(m, n):
        while len(states) <= m:
            st, led = aa_iterate(ctx, states[-1])
            states.append(st)
            step_ledger.append(led)
        pr = float(states[m].register_distribution(prob.flag)[1])
        for _ in range(n):
            prob.preparer.record(ledger)
            for i in range(1, m + 1):
                ledger.extend(step_ledger[i])
            _report_flag(ctx, ledger)
        h = int(g.binomial(n, min(1.0, max(0.0, pr))))
        tally["shots"] += n
        tally["hits"] += h
        return h

    est, _ = iterative_amplitude_estimation(sample, eps, units, shots, delta)
    if tally["hits"] == 0:
        est = 0.0
    return EstimateResult(est, ledger, bound, tally["shots"], tally["hits"])
