import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcongest import apps
from qcongest.bridge import execute_framework, run_centralized
from qcongest.congest import Network
from qcongest.errors import ParameterError, ParseError
from qcongest.pqalg import PromiseViolation, Verdict

P3 = Network([(0, 1), (1, 2)])
P5 = Network([(i, i + 1) for i in range(4)])
C4 = Network([(i, (i + 1) % 4) for i in range(4)])
C6 = Network([(i, (i + 1) % 6) for i in range(6)])
C8 = Network([(i, (i + 1) % 8) for i in range(8)])
K4 = Network(itertools.combinations(range(4), 2))
S5 = Network([(0, i) for i in range(1, 5)])
PETERSEN = Network(nx.petersen_graph().edges())
TREE = Network([(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)])
CHORDED = Network([(i, (i + 1) % 5) for i in range(5)] + [(0, 2)])
ONE = Network([], [0])


def two_squares(gap=8):
    e = [(0, 1), (1, 2), (2, 3), (3, 0)] + [(3 + i, 4 + i) for i in range(gap)]
    a = 3 + gap
    return Network(e + [(a, a + 1), (a + 1, a + 2), (a + 2, a + 3), (a + 3, a)])


def random_graph(seed, n_max=12):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    g = nx.gnp_random_graph(n, 0.35, seed=seed)
    while not nx.is_connected(g):
        u, v = (int(a) for a in rng.integers(0, n, size=2))
        if u != v:
            g.add_edge(u, v)
    return Network(g.edges(), g.nodes())


def rate(fn, trials=200):
    return sum(bool(fn(s)) for s in range(trials)) / trials


# ---------------------------------------------------------------- distributed data

def test_meeting_examples():
    x = {0: [1, 1, 0, 1], 1: [0, 1, 0, 0], 2: [0, 1, 0, 1]}
    assert rate(lambda s: apps.meeting_schedule(P3, x, rng=s)[0] == 1, 500) >= 0.66
    assert apps.meeting_schedule(ONE, {0: [0, 1, 0, 1]}, rng=0)[0] in (1, 3)
    i, run = apps.meeting_schedule(P3, {v: [0] * 4 for v in P3.nodes}, rng=0)
    assert 0 <= i < 4 and run.rounds <= run.bound


def test_ed_vector_examples():
    assert apps.ed_vector(Network([(0, 1)]), {0: [2, 2], 1: [3, 3]}, rng=0)[0] == (0, 1)
    x = {0: [1, 1, 1, 1], 1: [0, 1, 0, 2]}
    net = Network([(0, 1)])
    assert rate(lambda s: apps.ed_vector(net, x, rng=s, p=1)[0] == (0, 2), 500) >= 0.66
    assert apps.ed_vector(net, {0: [1, 2, 3], 1: [0, 0, 0]}, rng=0)[0] == Verdict.NO_COLLISION


def test_ed_nodes_examples():
    net = Network([(0, 1)])
    assert apps.ed_nodes(net, {0: 7, 1: 7}, rng=0)[0] == (0, 1)
    vals = {0: 1, 1: 2, 2: 3, 3: 2, 4: 5}
    assert rate(lambda s: apps.ed_nodes(P5, vals, rng=s)[0] == (1, 3), 500) >= 0.66
    res, run = apps.ed_nodes(P5, {v: v + 10 for v in P5.nodes}, rng=0, debug=True)
    assert res == Verdict.ALL_DISTINCT and run.extra["confirmed"]


def test_dj_examples():
    net = Network([(0, 1)])
    assert apps.distributed_dj(net, {0: [0] * 4, 1: [0] * 4}, rng=0)[0] == Verdict.CONSTANT
    assert apps.distributed_dj(net, {0: [1, 1, 0, 0], 1: [1, 0, 1, 0]}, rng=0)[0] == Verdict.BALANCED
    assert apps.distributed_dj(net, {0: [1, 0, 1, 1], 1: [1, 0, 1, 1]}, rng=0)[0] == Verdict.CONSTANT
    with pytest.raises(PromiseViolation):
        apps.distributed_dj(net, {0: [1, 0, 0, 0], 1: [0] * 4}, rng=0, debug=True)
    with pytest.raises(ParameterError):
        apps.distributed_dj(net, {0: [1, 0, 0], 1: [0] * 3}, rng=0)


# ---------------------------------------------------------------- eccentricities

@pytest.mark.parametrize("net,d,r", [(K4, 1, 1), (P5, 4, 2), (C6, 3, 3)])
def test_diameter_radius_examples(net, d, r):
    assert rate(lambda s: apps.diameter_radius(net, "max", rng=s)[0] == d, 100) >= 0.66
    assert rate(lambda s: apps.diameter_radius(net, "min", rng=s)[0] == r, 100) >= 0.66
    _, run = apps.diameter_radius(net, "max", rng=0)
    assert run.rounds <= run.bound and run.ledger.max_payload() <= run.ledger.word


def test_diameter_majority_and_bad_mode():
    value, run = apps.diameter_radius(P5, "min", rng=1, repetitions=7)
    assert value == 2 and run.extra["repetitions"] == 7
    with pytest.raises(ParameterError):
        apps.diameter_radius(P5, "median")


@pytest.mark.parametrize("net,eps", [(K4, 0.1), (S5, 0.25), (P5, 0.5)])
def test_avg_eccentricity_examples(net, eps):
    truth = apps.brute_oracle(net)["avgEccentricity"]
    assert rate(lambda s: abs(apps.avg_eccentricity(net, eps, rng=s)[0] - truth) <= eps, 100) >= 0.66


def test_single_node_short_circuits():
    for fn in (lambda: apps.diameter_radius(ONE, rng=0), lambda: apps.find_short_cycle(ONE, 4, rng=0),
               lambda: apps.girth(ONE, rng=0), lambda: apps.avg_eccentricity(ONE, 0.1, rng=0)):
        _, run = fn()
        assert run.rounds == 0


# ---------------------------------------------------------------- cycles

def check_witness(net, res, truth):
    assert isinstance(res, apps.Cycle)
    assert apps.is_simple_cycle(net, res.nodes) and res.length == len(res.nodes)
    assert res.length >= truth


@pytest.mark.parametrize("net,k,want", [(C4, 4, 4), (CHORDED, 4, 3), (C6, 6, 6), (PETERSEN, 6, 5)])
@pytest.mark.parametrize("clustered", [False, True])
def test_short_cycle_examples(net, k, want, clustered):
    fn = apps.find_short_cycle_clustered if clustered else apps.find_short_cycle
    hits = 0
    for s in range(20):
        res, run = fn(net, k, rng=s)
        if res != Verdict.NOT_FOUND:
            check_witness(net, res, apps.brute_girth(net))
            hits += res.length == want
        assert run.ledger.max_payload() <= run.ledger.word
    assert hits >= 14


def test_tree_not_found():
    for fn in (apps.find_short_cycle, apps.find_short_cycle_clustered):
        assert fn(TREE, 6, rng=0)[0] == Verdict.NOT_FOUND
    assert apps.girth(TREE, rng=0)[0] == Verdict.ACYCLIC


def test_two_far_squares():
    net = two_squares()
    res, run = apps.find_short_cycle_clustered(net, 4, rng=0)
    assert res.length == 4 and run.extra["clusters"] >= 2


@pytest.mark.parametrize("beta", [0.4, 0.45])
def test_heavy_branch(beta):
    hits = 0
    for s in range(30):
        res, run = apps.find_short_cycle(PETERSEN, 6, rng=s, beta=beta)
        assert run.extra["heavy"] == 10 and run.runs
        check_witness(PETERSEN, res, 5)
        hits += res.length == 5
    assert hits >= 20


def test_detections_claims():
    # C6 from node 0 at depth 3: node 3 sees two parents, claim 6
    found = apps.detections(C6.adj, 0, 3)
    assert found[3][0] == 6 and sorted(found[3][1]) == list(range(6))
    # C5 odd cycle: nodes 2 and 3 at depth 2 see each other, claim 5
    c5 = Network([(i, (i + 1) % 5) for i in range(5)])
    found = apps.detections(c5.adj, 0, 3)
    assert found[2][0] == 5 and found[3][0] == 5


@pytest.mark.parametrize("net,g", [(K4, 3), (PETERSEN, 5), (C8, 8)])
def test_girth_examples(net, g):
    hits = 0
    for s in range(20):
        res, run = apps.girth(net, 1.0, rng=s)
        assert res == Verdict.ACYCLIC or res >= g
        if res != Verdict.ACYCLIC:
            assert apps.is_simple_cycle(net, run.extra["cycle"]) and len(run.extra["cycle"]) == res
        hits += res == g
        assert run.rounds <= run.bound
    assert hits >= 14


def test_cycle_params():
    apps.CycleParams(k=5, beta=0.3, delta_k=3, kappa=5)
    with pytest.raises(ParameterError):
        apps.CycleParams(k=3, beta=0.3, delta_k=2, kappa=3)
    with pytest.raises(ParameterError):
        apps.CycleParams(k=6, beta=0.3, delta_k=2, kappa=6)
    with pytest.raises(ParameterError):
        apps.find_short_cycle(C4, 3)
    assert 0 < apps.cycle_beta(10, 2, 6) <= 0.5


# ---------------------------------------------------------------- equivalence

def plans(net, seed):
    rng = np.random.default_rng(seed)
    x = {v: rng.integers(0, 2, size=4).tolist() for v in net.nodes}
    xs = {v: rng.integers(0, 3, size=6).tolist() for v in net.nodes}
    vals = {v: int(rng.integers(0, 2 * net.n)) for v in net.nodes}
    dj = {v: [0] * 4 for v in net.nodes}
    dj[net.nodes[0]] = [1, 1, 0, 0] if seed % 2 else [1] * 4
    yield apps.plan_meeting(net, x)
    yield apps.plan_ed_vector(net, xs)
    yield apps.plan_ed_nodes(net, vals)
    yield apps.plan_dj(net, dj)
    yield apps.plan_diameter(net, "max")
    yield apps.plan_diameter(net, "min")
    yield apps.plan_avg_ecc(net, 0.5)
    yield apps.plan_heavy(net, 4, 0.5)


@pytest.mark.parametrize("seed", range(5))
def test_framework_equivalence(seed):
    net = random_graph(seed, 5)
    for plan in plans(net, seed):
        run = execute_framework(net, plan.algorithm, plan.dinput, plan.p, plan.batch_computer,
                                rng=seed, coherent_check=True)
        res, tr = run_centralized(net, plan.algorithm, plan.dinput, plan.p, rng=seed)
        assert run.result == res and run.transcript.batches == tr.batches
        assert run.hygiene in (True, None)
        assert run.rounds <= plan.bound(net)


# ---------------------------------------------------------------- brute oracle and inputs

@pytest.mark.parametrize("seed", range(10))
def test_brute_oracle_matches_networkx(seed):
    net = random_graph(seed)
    g = nx.Graph(net.edges())
    g.add_nodes_from(net.nodes)
    out = apps.brute_oracle(net)
    assert out["diameter"] == nx.diameter(g) and out["radius"] == nx.radius(g)
    assert out["girth"] == nx.girth(g)
    sp = dict(nx.all_pairs_shortest_path_length(g))
    assert all(out["allPairsDistances"][net.index[u]][net.index[v]] == sp[u][v]
               for u in net.nodes for v in net.nodes)


def test_brute_oracle_examples():
    assert apps.brute_oracle(P5)["diameter"] == 4
    assert apps.brute_oracle(C6)["girth"] == 6
    assert apps.brute_oracle(TREE)["girth"] == math.inf
    assert apps.collisions([1, 2, 1]) == {(0, 2)}
    out = apps.brute_oracle(P3, {0: [1, 0, 1], 1: [0, 2, 0], 2: [0, 0, 0]})
    assert out["columnSums"] == [1, 2, 1] and out["collisions"] == {(0, 2)}


def test_parse_inputs():
    assert apps.parse_inputs("0: 1100\n1: 1010\n") == {0: [1, 1, 0, 0], 1: [1, 0, 1, 0]}
    assert apps.parse_inputs("0: 3,1,2\n# note\n1: 0, 0, 5") == {0: [3, 1, 2], 1: [0, 0, 5]}
    assert apps.parse_inputs("0: 7\n1: 12") == {0: [7], 1: [12]}
    assert apps.parse_inputs("0: 10\n1: 11", kind="ints") == {0: [10], 1: [11]}
    for bad in ("0 1100", "x: 1", "0: 1\n0: 1", "0: a,b", "0:", "", "0: -1,2"):
        with pytest.raises(ParseError):
            apps.parse_inputs(bad)
    with pytest.raises(ParseError):
        apps.parse_inputs("0: 12", kind="bits")
    with pytest.raises(ParseError):
        apps.attach_inputs(P3, {0: [1], 1: [1]})
    with pytest.raises(ParseError):
        apps.attach_inputs(P3, {0: [1], 1: [1], 2: [1, 0]})
    with pytest.raises(ParseError):
        apps.attach_inputs(P3, {0: [1], 1: [1], 2: [1], 9: [0]})


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(0, 50), st.lists(st.integers(0, 1), min_size=1, max_size=8),
                       min_size=1, max_size=6))
def test_parse_inputs_roundtrip(x):
    text = "\n".join(f"{v}: {','.join(map(str, row))}" for v, row in x.items())
    assert apps.parse_inputs(text) == x
