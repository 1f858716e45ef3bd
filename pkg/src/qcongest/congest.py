"""Round-synchronous CONGEST engine with bandwidth auditing.

Every protocol appends to a :class:`RoundLedger`, one entry per synchronous
round, mapping each directed edge that carried a message to its payload size.
A payload above the word size w = 2 * ceil(log2 n) aborts the run.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BandwidthExceeded, DisconnectedGraph, ParameterError, ParseError

C_W = 2
C_L = 2
C_B = 2
C_C = 4


def log2n(n: int) -> int:
    """ceil(log2 n), floored at 1 so that bandwidth and chunk counts stay positive."""
    return max(1, math.ceil(math.log2(max(n, 1))))


def word_size(n: int) -> int:
    return C_W * log2n(n)


@dataclass
class Round:
    messages: dict
    quantum: bool = False
    label: str = ""


@dataclass
class RoundLedger:
    """Per-round, per-directed-edge payload log."""

    word: int
    rounds: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rounds)

    def record(self, messages: dict, label: str = "", quantum: bool = False) -> None:
        for edge, size in messages.items():
            if size > self.word:
                raise BandwidthExceeded(
                    f"round {len(self.rounds)} ({label}): edge {edge} carries {size} "
                    f"{'qubits' if quantum else 'bits'} > w = {self.word}")
        self.rounds.append(Round(dict(messages), quantum, label))

    def charge(self, count: int, label: str) -> None:
        """Append ``count`` rounds whose cost is charged rather than simulated."""
        for _ in range(int(count)):
            self.rounds.append(Round({}, False, label))

    def extend(self, other: "RoundLedger") -> None:
        if other.word != self.word:
            raise ParameterError("ledgers over different word sizes")
        self.rounds.extend(other.rounds)

    def max_payload(self) -> int:
        return max((s for r in self.rounds for s in r.messages.values()), default=0)

    def count(self, prefix: str) -> int:
        return sum(1 for r in self.rounds if r.label.startswith(prefix))

    def audit(self) -> None:
        for i, r in enumerate(self.rounds):
            for edge, size in r.messages.items():
                if size > self.word:
                    raise BandwidthExceeded(f"round {i} ({r.label}): edge {edge} carries {size} > {self.word}")


class Network:
    """Connected undirected graph with unique integer identifiers and private inputs."""

    def __init__(self, edges: Iterable, nodes: Optional[Iterable[int]] = None,
                 inputs: Optional[dict] = None):
        adj = {}
        for v in nodes or ():
            adj.setdefault(int(v), set())
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"self-loop at {u}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        if not adj:
            raise ParameterError("empty network")
        if any(v < 0 for v in adj):
            raise ParameterError("identifiers must be non-negative")
        self.nodes = sorted(adj)
        self.adj = {v: sorted(adj[v]) for v in self.nodes}
        self.index = {v: i for i, v in enumerate(self.nodes)}
        self.inputs = dict(inputs or {})
        if not np.isfinite(self.distances).all():
            raise DisconnectedGraph("network is not connected")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj.values()) // 2

    @property
    def word(self) -> int:
        return word_size(self.n)

    @property
    def id_bits(self) -> int:
        return max(1, max(self.nodes).bit_length())

    def edges(self) -> list:
        return [(u, v) for u in self.nodes for v in self.adj[u] if u < v]

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances (harness oracle), indexed by position in ``nodes``."""
        n = self.n
        rows, cols = [], []
        for u in self.nodes:
            for v in self.adj[u]:
                rows.append(self.index[u])
                cols.append(self.index[v])
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        return shortest_path(mat, unweighted=True, directed=False)

    def dist(self, u: int, v: int) -> int:
        return int(self.distances[self.index[u], self.index[v]])

    @property
    def D(self) -> int:
        return int(self.distances.max())

    def eccentricity(self, v: int) -> int:
        return int(self.distances[self.index[v]].max())

    def subgraph_distances(self, keep: set) -> dict:
        """Hop distances inside the induced subgraph on ``keep`` (harness helper)."""
        out = {}
        for s in keep:
            d = {s: 0}
            q = deque([s])
            while q:
                u = q.popleft()
                for w in self.adj[u]:
                    if w in keep and w not in d:
                        d[w] = d[u] + 1
                        q.append(w)
            out[s] = d
        return out

    def with_inputs(self, inputs: dict) -> "Network":
        return Network(self.edges(), self.nodes, inputs)

    def new_ledger(self) -> RoundLedger:
        return RoundLedger(self.word)


def parse_graph(text: str) -> Network:
    """Parse "u v" edge lines; '#' starts a comment; a lone "u" declares an isolated node."""
    edges, nodes, seen = [], [], set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            ints = [int(t) for t in parts]
        except ValueError:
            raise ParseError(f"line {lineno}: expected integers, got {raw!r}") from None
        if len(ints) == 1:
            nodes.append(ints[0])
            continue
        if len(ints) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        u, v = ints
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative node index")
        if u == v:
            raise ParseError(f"line {lineno}: self-loop")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate edge {u} {v}")
        seen.add(key)
        edges.append((u, v))
    if not edges and not nodes:
        raise ParseError("graph file has no edges")
    return Network(edges, nodes)


def load_graph(path) -> Network:
    with open(path) as fh:
        return parse_graph(fh.read())


def run_synchronous(net: Network, ledger: RoundLedger, init: Callable, step: Callable,
                    label: str, max_rounds: int, quantum: bool = False) -> dict:
    """Lockstep engine.

    ``init(v)`` gives the initial local state; ``step(v, state, inbox, r)``
    returns (state, outbox) where outbox maps neighbor -> (payload, size).
    The run ends at the first round in which no node sends anything.
    """
    state = {v: init(v) for v in net.nodes}
    inbox = {v: [] for v in net.nodes}
    for r in range(max_rounds):
        sent, nxt = {}, {v: [] for v in net.nodes}
        for v in net.nodes:
            state[v], out = step(v, state[v], inbox[v], r)
            for u, (payload, size) in out.items():
                if u not in net.adj[v]:
                    raise ParameterError(f"{v} sent to non-neighbor {u}")
                sent[(v, u)] = size
                nxt[u].append((v, payload))
        if not sent:
            break
        ledger.record(sent, label, quantum)
        inbox = nxt
    else:
        raise ParameterError(f"{label} did not terminate within {max_rounds} rounds")
    return state


def elect_leader(net: Network, ledger: Optional[RoundLedger] = None):
    """Flood the maximum identifier; returns (leader, ledger)."""
    ledger = ledger if ledger is not None else net.new_ledger()
    bits = net.id_bits

    def init(v):
        return {"best": v, "dirty": True}

    def step(v, s, inbox, r):
        for _, m in inbox:
            if m > s["best"]:
                s["best"], s["dirty"] = m, True
        out = {}
        if s["dirty"]:
            out = {u: (s["best"], bits) for u in net.adj[v]}
            s["dirty"] = False
        return s, out

    state = run_synchronous(net, ledger, init, step, "leader", 4 * net.n + 4)
    leaders = {s["best"] for s in state.values()}
    assert leaders == {max(net.nodes)}
    return max(net.nodes), ledger


@dataclass
class BfsTree:
    root: int
    parent: dict
    depth: dict

    @property
    def height(self) -> int:
        return max(self.depth.values())

    def children(self, v: int) -> list:
        return sorted(c for c, p in self.parent.items() if p == v)

    def levels(self) -> list:
        out = [[] for _ in range(self.height + 1)]
        for v, d in self.depth.items():
            out[d].append(v)
        return [sorted(l) for l in out]


def build_bfs(net: Network, root: int, ledger: Optional[RoundLedger] = None):
    """Layer-by-layer BFS; ties go to the smallest-id announcing neighbor."""
    if root not in net.index:
        raise ParameterError(f"unknown root {root}")
    ledger = ledger if ledger is not None else net.new_ledger()

    def init(v):
        return {"depth": 0 if v == root else None, "parent": None, "announce": v == root}

    def step(v, s, inbox, r):
        if s["depth"] is None and inbox:
            s["depth"] = r
            s["parent"] = min(u for u, _ in inbox)
            s["announce"] = True
        out = {}
        if s["announce"]:
            out = {u: (1, 1) for u in net.adj[v]}
            s["announce"] = False
        return s, out

    state = run_synchronous(net, ledger, init, step, "bfs", net.n + 2)
    tree = BfsTree(root, {v: s["parent"] for v, s in state.items() if v != root},
                   {v: s["depth"] for v, s in state.items()})
    return tree, ledger


def multi_source_bfs(net: Network, sources: Sequence[int], depth_limit: Optional[int] = None,
                     ledger: Optional[RoundLedger] = None):
    """Distances from every node to every source in ``sources``.

    Tokens are (source rank, distance) pairs, each fitting one word. Source of
    rank r injects its token at round r; afterwards every node broadcasts, per
    round, its smallest (distance, rank) token that improved since it was last
    sent. Returns ({source: {node: distance}}, ledger); distances beyond
    ``depth_limit`` are omitted.
    """
    srcs = sorted(set(int(s) for s in sources))
    if not srcs:
        raise ParameterError("source set must be nonempty")
    for s in srcs:
        if s not in net.index:
            raise ParameterError(f"unknown source {s}")
    limit = net.n if depth_limit is None else int(depth_limit)
    ledger = ledger if ledger is not None else net.new_ledger()
    rank = {s: i for i, s in enumerate(srcs)}
    size = 2 * log2n(net.n)

    def init(v):
        return {"best": {}, "pending": set()}

    def step(v, s, inbox, r):
        if v in rank and rank[v] == r:
            s["best"][rank[v]] = 0
            s["pending"].add(rank[v])
        for _, (rk, d) in inbox:
            if d + 1 <= limit and d + 1 < s["best"].get(rk, math.inf):
                s["best"][rk] = d + 1
                s["pending"].add(rk)
        out = {}
        ready = [rk for rk in s["pending"] if s["best"][rk] < limit]
        s["pending"] -= set(rk for rk in s["pending"] if s["best"][rk] >= limit)
        if ready:
            rk = min(ready, key=lambda x: (s["best"][x], x))
            s["pending"].discard(rk)
            out = {u: ((rk, s["best"][rk]), size) for u in net.adj[v]}
        return s, out

    # quiet rounds before late sources inject must not end the run early
    state = _run_with_injections(net, ledger, init, step, len(srcs), 4 * (net.n + len(srcs)) + 4)
    dist = {s: {} for s in srcs}
    for v, st in state.items():
        for rk, d in st["best"].items():
            dist[srcs[rk]][v] = d
    return dist, ledger


def _run_with_injections(net, ledger, init, step, inject_rounds, max_rounds):
    state = {v: init(v) for v in net.nodes}
    inbox = {v: [] for v in net.nodes}
    for r in range(max_rounds):
        sent, nxt = {}, {v: [] for v in net.nodes}
        for v in net.nodes:
            state[v], out = step(v, state[v], inbox[v], r)
            for u, (payload, size) in out.items():
                sent[(v, u)] = size
                nxt[u].append((v, payload))
        if not sent and r >= inject_rounds - 1:
            break
        ledger.record(sent, "msbfs")
        inbox = nxt
    else:
        raise ParameterError(f"multi-source BFS did not terminate within {max_rounds} rounds")
    return state


def eccentricities_from(dist: dict) -> dict:
    return {s: max(d.values()) for s, d in dist.items()}


@dataclass
class Cluster:
    nodes: frozenset
    color: int
    center: int


def cluster_decompose(net: Network, d: int, rng=None, ledger: Optional[RoundLedger] = None):
    """Colored clustering with separation ``d``, computed centrally.

    Ball carving: per color, repeatedly pick a random uncovered node, grow its
    ball in layers of width d until the next layer at most doubles it, make the
    ball a cluster and defer the layer to later colors. The ledger is charged
    C_C * d * ceil(log2 n)^2 rounds. Returns (clusters, ledger).
    """
    if d < 2:
        raise ParameterError("separation d must be at least 2")
    g = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    ledger = ledger if ledger is not None else net.new_ledger()
    dm = net.distances
    uncovered = set(net.nodes)
    clusters, color = [], 0
    while uncovered:
        remaining = set(uncovered)
        while remaining:
            pool = sorted(remaining)
            v = pool[int(g.integers(len(pool)))]
            row = dm[net.index[v]]
            rho = 0
            while True:
                kernel = {u for u in remaining if row[net.index[u]] <= rho * d}
                shell = {u for u in remaining if rho * d < row[net.index[u]] <= (rho + 1) * d}
                if len(kernel) + len(shell) <= 2 * len(kernel):
                    break
                rho += 1
            clusters.append(Cluster(frozenset(kernel), color, v))
            uncovered -= kernel
            remaining -= kernel | shell
        color += 1
    ledger.charge(C_C * d * log2n(net.n) ** 2, "cluster(charged)")
    return clusters, ledger


def check_clustering(net: Network, clusters: list, d: int) -> None:
    """Raise AssertionError unless the clustering meets its guarantees."""
    L = log2n(net.n)
    covered = set().union(*(c.nodes for c in clusters))
    assert covered == set(net.nodes), "uncovered nodes"
    colors = {c.color for c in clusters}
    assert len(colors) <= C_C * L, f"{len(colors)} colors"
    dm, ix = net.distances, net.index
    for c in clusters:
        idx = [ix[v] for v in c.nodes]
        assert dm[np.ix_(idx, idx)].max() <= C_C * d * L, "cluster too wide"
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            ca, cb = clusters[a], clusters[b]
            if ca.color != cb.color:
                continue
            ia, ib = [ix[v] for v in ca.nodes], [ix[v] for v in cb.nodes]
            assert dm[np.ix_(ia, ib)].min() >= d, "same-color clusters too close"
