import math

import numpy as np
import pytest

from qcongest.bridge import lg
from qcongest.congest import Network
from qcongest.errors import InvariantViolation, ParameterError
from qcongest.nonoracle import (
    C_A, C_P, aa_iterate, amplify_bound, amplitude_amplify, amplitude_estimate,
    control_qubits, iterate_bound, iterate_context, local_phase_problem,
    path_copy_problem, phase_error, phase_estimate,
)

STAR = Network([(0, i) for i in range(1, 4)])
PATH = Network([(0, 1), (1, 2), (2, 3)])


def problem(net, marked, bits=2, p_max=None):
    prob = path_copy_problem(net, net.nodes[1], net.nodes[-1], bits, marked)
    prob.p_max = p_max
    return prob


def rotated(ctx, j):
    """Exact Grover rotation of the prepared state by j iterates."""
    psi = ctx.prepared()
    flag = psi.qubits(ctx.prob.flag)[0]
    t = psi.amplitudes.reshape((2,) * psi.n_qubits)
    good = np.zeros_like(t)
    idx = [slice(None)] * psi.n_qubits
    idx[flag] = 1
    good[tuple(idx)] = t[tuple(idx)]
    good = good.reshape(-1)
    bad = psi.amplitudes - good
    p = np.linalg.norm(good) ** 2
    th = math.asin(math.sqrt(p))
    out = math.cos((2 * j + 1) * th) * (bad / (np.linalg.norm(bad) or 1))
    if p > 0:
        out = out + math.sin((2 * j + 1) * th) * good / math.sqrt(p)
    return out


@pytest.mark.parametrize("net", [STAR, PATH], ids=["star", "path"])
@pytest.mark.parametrize("marked,bits", [([3], 2), ([0, 5], 3), ([1, 2, 7], 3), (range(4), 2)])
def test_iterate_is_exact_rotation(net, marked, bits):
    prob = problem(net, marked, bits)
    prob.preparer.check()
    ctx = iterate_context(net, prob)
    st = ctx.prepared()
    for j in range(1, 4):
        st, led = aa_iterate(ctx, st)
        if len(marked) < 2 ** bits:
            assert np.max(np.abs(st.amplitudes - rotated(ctx, j))) <= 1e-9
        else:
            # p = 1: fixed point up to a global phase
            assert abs(abs(np.vdot(ctx.prepared().amplitudes, st.amplitudes)) - 1) <= 1e-9
        assert len(led) <= iterate_bound(prob.preparer.cost, net.D)
        assert led.max_payload() <= led.word


def test_iterate_quarter_to_one():
    prob = problem(STAR, [3])
    assert abs(prob.probability() - 0.25) < 1e-12
    ctx = iterate_context(STAR, prob)
    st, led = aa_iterate(ctx, ctx.prepared())
    assert abs(st.register_distribution("flag")[1] - 1) <= 1e-9
    assert prob.preparer.cost == 2 and len(led) <= C_A * (2 + 2)


def test_amplify_examples():
    ok, led = amplitude_amplify(STAR, problem(STAR, range(4)), 0.1, rng=0)
    assert ok and len(led) <= amplify_bound(2, STAR.D, 1.0, 0.1)
    ok, _ = amplitude_amplify(STAR, problem(STAR, []), 0.1, rng=0)
    assert not ok


@pytest.mark.parametrize("hint", [0.25, None])
def test_amplify_quarter(hint):
    prob = problem(STAR, [3])
    wins = 0
    for seed in range(200):
        ok, led = amplitude_amplify(STAR, prob, 0.1, rng=seed, p_hint=hint)
        wins += ok
        assert len(led) <= amplify_bound(prob.preparer.cost, STAR.D, 0.25, 0.1)
    assert wins / 200 >= 0.9


def test_amplify_bad_delta():
    with pytest.raises(ParameterError):
        amplitude_amplify(STAR, problem(STAR, [1]), 0.0)


@pytest.mark.parametrize("net", [STAR, PATH, Network([(0, 1)]),
                                 Network([(i, (i + 1) % 6) for i in range(6)])])
def test_phase_exact_three_eighths(net):
    th = 2 * math.pi * 3 / 8
    prob = local_phase_problem(net, th, eps=math.pi, rng=1)
    prob.check(net.nodes)
    res = phase_estimate(net, prob, rng=0, t=3)
    assert res.estimate == pytest.approx(th, abs=1e-12)
    assert res.distribution[3] == pytest.approx(1, abs=1e-9)
    assert res.hygiene
    assert len(res.ledger) <= res.bound
    assert res.ledger.max_payload() <= res.ledger.word


def test_phase_zero():
    prob = local_phase_problem(PATH, 0.0, eps=0.3, rng=0)
    assert phase_estimate(PATH, prob, rng=5).estimate == 0.0


def test_phase_pi():
    prob = local_phase_problem(STAR, math.pi, eps=0.2, rng=2)
    assert control_qubits(0.2) == 7
    hits = sum(phase_error(phase_estimate(STAR, prob, rng=s).estimate, math.pi) <= 0.2 for s in range(200))
    assert hits / 200 >= 0.66


def test_phase_median_runs_and_charge():
    prob = local_phase_problem(PATH, 1.0, eps=0.3, delta=0.05, rng=0, rounds=2)
    res = phase_estimate(PATH, prob, rng=0)
    assert res.runs == 8 * 5 and phase_error(res.estimate, 1.0) <= 0.3
    assert res.ledger.count("controlled-U") == res.runs * (2 ** res.t - 1) * 2


def test_phase_sharing_cost():
    # with R = 0 the rounds are leader setup plus streaming t qubits down and up
    for net in (STAR, PATH):
        prob = local_phase_problem(net, math.pi, eps=0.2, rng=0)
        res = phase_estimate(net, prob, rng=0)
        assert len(res.ledger) <= C_P * (net.D + math.ceil(res.t / lg(net.n)))


def test_phase_check_detects_wrong_theta():
    prob = local_phase_problem(PATH, 1.0, eps=0.3, rng=0)
    prob.theta = 1.1
    with pytest.raises(InvariantViolation):
        prob.check(PATH.nodes)


def test_estimate_examples():
    r = amplitude_estimate(STAR, problem(STAR, [], p_max=1.0), 0.05, 1 / 3, rng=0)
    assert r.estimate == 0.0
    r = amplitude_estimate(STAR, problem(STAR, range(4), p_max=1.0), 0.05, 1 / 3, rng=0)
    assert abs(r.estimate - 1) <= 0.05
    with pytest.raises(ParameterError):
        amplitude_estimate(STAR, problem(STAR, [1]), 0.05, 1 / 3)


def test_estimate_quarter():
    prob = problem(PATH, [2], p_max=1.0)
    hits = 0
    for seed in range(200):
        r = amplitude_estimate(PATH, prob, 0.05, 1 / 3, rng=seed)
        hits += abs(r.estimate - 0.25) <= 0.05
        assert len(r.ledger) <= r.bound
        assert r.ledger.max_payload() <= r.ledger.word
    assert hits / 200 >= 0.66
