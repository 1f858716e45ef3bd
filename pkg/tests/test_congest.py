import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcongest.congest import (
    C_B, C_C, C_L, Network, RoundLedger, build_bfs, check_clustering, cluster_decompose,
    eccentricities_from, elect_leader, log2n, multi_source_bfs, parse_graph,
)
from qcongest.errors import BandwidthExceeded, DisconnectedGraph, ParseError


def random_connected(n, seed):
    rng = np.random.default_rng(seed)
    g = nx.random_labeled_tree(n, seed=seed) if hasattr(nx, "random_labeled_tree") else nx.random_tree(n, seed=seed)
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u, v = rng.integers(n, size=2)
        if u != v:
            g.add_edge(int(u), int(v))
    return Network(g.edges(), g.nodes())


def path(n):
    return Network([(i, i + 1) for i in range(n - 1)], range(n))


def cycle(n):
    return Network([(i, (i + 1) % n) for i in range(n)])


def test_parse_graph_and_errors():
    net = parse_graph("# a path\n0 1\n1 2  # trailing\n\n")
    assert net.n == 3 and net.m == 2 and net.D == 2
    with pytest.raises(ParseError):
        parse_graph("0 x\n")
    with pytest.raises(ParseError):
        parse_graph("0 1\n1 0\n")
    with pytest.raises(ParseError):
        parse_graph("# nothing\n")
    with pytest.raises(DisconnectedGraph):
        parse_graph("0 1\n2 3\n")
    assert parse_graph("0\n").n == 1


def test_ledger_bandwidth_abort():
    led = RoundLedger(4)
    led.record({(0, 1): 4})
    with pytest.raises(BandwidthExceeded):
        led.record({(0, 1): 5})


def test_elect_leader_examples():
    leader, led = elect_leader(Network([], [7]))
    assert leader == 7 and len(led) == 0
    net = Network([(3, 9), (9, 1)])
    leader, led = elect_leader(net)
    assert leader == 9 and len(led) <= C_L * 2
    star = Network([(0, i) for i in range(1, 6)])
    assert elect_leader(star)[0] == 5


def test_bfs_examples():
    tree, led = build_bfs(Network([], [0]), 0)
    assert tree.depth == {0: 0} and len(led) == 0
    tree, led = build_bfs(cycle(4), 0)
    assert [tree.depth[v] for v in range(4)] == [0, 1, 2, 1]
    assert tree.parent[2] == 1  # tie between 1 and 3 goes to the smaller id
    tree, _ = build_bfs(path(3), 1)
    assert [tree.depth[v] for v in range(3)] == [1, 0, 1]


@pytest.mark.parametrize("seed", range(100))
def test_bfs_matches_oracle(seed):
    n = int(np.random.default_rng(seed).integers(1, 17))
    net = random_connected(n, seed) if n > 1 else Network([], [0])
    root = net.nodes[seed % net.n]
    tree, led = build_bfs(net, root)
    assert len(led) <= net.D + 1
    g = nx.Graph(net.edges())
    g.add_nodes_from(net.nodes)
    truth = nx.single_source_shortest_path_length(g, root)
    assert tree.depth == truth
    for v, par in tree.parent.items():
        assert par in net.adj[v] and tree.depth[v] == tree.depth[par] + 1
    assert led.max_payload() <= led.word


def test_multi_source_examples():
    c4 = cycle(4)
    dist, led = multi_source_bfs(c4, range(4))
    assert set(eccentricities_from(dist).values()) == {2}
    assert len(led) <= C_B * (4 + 2)
    single, _ = multi_source_bfs(c4, [0])
    tree, _ = build_bfs(c4, 0)
    assert single[0] == tree.depth
    p5 = path(5)
    dist, _ = multi_source_bfs(p5, [0, 4])
    assert eccentricities_from(dist) == {0: 4, 4: 4}


def test_multi_source_depth_limit():
    dist, _ = multi_source_bfs(path(6), [0], depth_limit=2)
    assert dist[0] == {0: 0, 1: 1, 2: 2}


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 16), st.integers(0, 10 ** 6), st.data())
def test_multi_source_property(n, seed, data):
    net = random_connected(n, seed)
    srcs = data.draw(st.sets(st.sampled_from(net.nodes), min_size=1))
    dist, led = multi_source_bfs(net, srcs)
    for s in srcs:
        assert dist[s] == {v: net.dist(s, v) for v in net.nodes}
    assert len(led) <= C_B * (len(srcs) + net.D)
    assert led.max_payload() <= led.word


def test_cluster_small_diameter_single_cluster():
    net = cycle(5)
    clusters, led = cluster_decompose(net, 3, 0)
    assert len(clusters) == 1 and clusters[0].color == 0
    assert len(led) == C_C * 3 * log2n(5) ** 2


def test_cluster_two_cliques():
    d = 2
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    edges += [(u + 4, v + 4) for u in range(4) for v in range(u + 1, 4)]
    chain = [3] + list(range(8, 8 + 3 * d - 1)) + [4]
    edges += list(zip(chain, chain[1:]))
    net = Network(edges)
    assert net.dist(3, 4) == 3 * d
    for seed in range(20):
        clusters, _ = cluster_decompose(net, d, seed)
        check_clustering(net, clusters, d)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_cluster_random_tree(seed, d):
    g = nx.random_labeled_tree(16, seed=seed) if hasattr(nx, "random_labeled_tree") else nx.random_tree(16, seed=seed)
    net = Network(g.edges())
    clusters, _ = cluster_decompose(net, d, seed)
    check_clustering(net, clusters, d)
