"""Parallel-query quantum algorithms.

Every algorithm reaches its input only through a :class:`BatchOracle`, which
records each use of the p-fold oracle as one batch in a
:class:`QueryTranscript`. A batch is either *classical* (a concrete tuple of at
most p indices) or *superposed* (p query slots whose indices range over a
recorded support). The bridge swaps in a network-backed responder, so the same
code runs centrally and distributed.

Amplitudes are simulated exactly. Grover-type searches over p-subsets live in
the two-dimensional good/bad subspace, so their statistics are closed-form;
the element-distinctness walk is simulated as a vector over Johnson-graph
vertices; Deutsch-Jozsa runs on the dense statevector.

Phase-oracle accounting: one Grover iteration costs two batches, one to load
the p values and one to uncompute them after the phase is applied.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
import operator
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import statevector as sv
from .errors import CapacityError, NotASemigroup, ParameterError

C_G = 9
C_M = 9
C_E = 12
C_A = 20

WALK_DIM_CAP = 924

# Grover stage schedule: prior over the unknown marked count t is ~ t^-SCHED_PRIOR,
# and a stage of j iterations is scored by success probability / (2j+1)^SCHED_COST.
SCHED_PRIOR = 3.0
SCHED_COST = 1.5

# iterative amplitude estimation: shots per round and total failure budget
IQAE_SHOTS = 16
IQAE_ALPHA = 0.3


class Verdict(str, enum.Enum):
    NOT_FOUND = "NotFound"
    NO_COLLISION = "NoCollision"
    CONSTANT = "Constant"
    BALANCED = "Balanced"
    ACYCLIC = "Acyclic"
    ALL_DISTINCT = "AllDistinct"

    def __str__(self):
        return self.value


class PromiseViolation(ParameterError):
    """Input does not satisfy the algorithm's promise (raised only in debug mode)."""


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


@dataclass
class OracleSpec:
    """Query problem: index domain [k], values of width q, and the combine operation.

    ``evaluate`` maps an index to its (combined) value. ``value_range`` is an
    optional (lo, hi) bound used by mean estimation.
    """

    k: int
    q: int
    evaluate: Callable[[int], object]
    combine: Callable = operator.add
    name: str = ""
    value_range: Optional[tuple] = None

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("index domain must be nonempty")
        if self.q < 0:
            raise ParameterError("value width must be non-negative")

    def check_semigroup(self, samples: Sequence, rng=0, trials: int = 64) -> None:
        """Spot-check that ``combine`` is associative and commutative on ``samples``."""
        g = _rng(rng)
        samples = list(samples)
        if not samples:
            return
        f = self.combine
        for _ in range(trials):
            a, b, c = (samples[int(i)] for i in g.integers(len(samples), size=3))
            if f(a, b) != f(b, a) or f(f(a, b), c) != f(a, f(b, c)):
                raise NotASemigroup(f"combine fails on ({a!r}, {b!r}, {c!r})")


@dataclass(frozen=True)
class Batch:
    """One use of the p-fold oracle.

    ``width`` is the number of query slots used (at most p). Classical batches
    carry their index tuple; superposed batches carry ``indices=None`` and the
    support their slots range over.
    """

    width: int
    indices: Optional[tuple]
    support: tuple

    @property
    def superposed(self) -> bool:
        return self.indices is None


@dataclass
class QueryTranscript:
    p: int
    batches: list = field(default_factory=list)

    @property
    def b(self) -> int:
        return len(self.batches)

    def check(self) -> None:
        for bt in self.batches:
            if bt.width > self.p or bt.width < 0:
                raise ParameterError(f"batch of width {bt.width} exceeds p = {self.p}")
            if bt.indices is not None and len(bt.indices) != bt.width:
                raise ParameterError("classical batch width mismatch")


@dataclass
class WalkParams:
    k: int
    z: int
    p: int
    steps_per_quantum_step: int
    spectral_gap: float
    dimension: int


class BatchOracle:
    """The only path from an algorithm to ``spec.evaluate``.

    ``responder`` answers a list of indices with their values; by default it
    evaluates the centralized oracle. The bridge installs a network-backed
    responder with the same signature.
    """

    def __init__(self, spec: OracleSpec, p: int, responder: Optional[Callable] = None):
        if p < 1:
            raise ParameterError("parallelism p must be at least 1")
        self.spec = spec
        self.p = int(p)
        self.transcript = QueryTranscript(p=self.p)
        self._respond = responder or (lambda idx, superposed: [spec.evaluate(i) for i in idx])

    @property
    def k(self) -> int:
        return self.spec.k

    def classical(self, indices: Sequence[int]) -> list:
        idx = tuple(int(i) for i in indices)
        if len(idx) > self.p:
            raise ParameterError(f"{len(idx)} indices in a batch of parallelism {self.p}")
        if any(not 0 <= i < self.k for i in idx):
            raise ParameterError("query index out of range")
        self.transcript.batches.append(Batch(len(idx), idx, idx))
        return list(self._respond(list(idx), False))

    def superposed(self, support: Sequence[int], width: Optional[int] = None) -> dict:
        """Record a superposed batch and return the value table over ``support``."""
        sup = tuple(sorted(int(i) for i in support))
        w = min(self.p, len(sup)) if width is None else int(width)
        if w > self.p:
            raise ParameterError("superposed batch wider than p")
        self.transcript.batches.append(Batch(w, None, sup))
        vals = self._respond(list(sup), True)
        return dict(zip(sup, vals))


def _as_oracle(oracle, p) -> BatchOracle:
    if isinstance(oracle, BatchOracle):
        if oracle.p != p:
            raise ParameterError("oracle parallelism differs from requested p")
        return oracle
    return BatchOracle(oracle, p)


# ---------------------------------------------------------------- Grover over p-subsets

def _subset_fraction(r: int, t: int, p: int) -> float:
    """Fraction of p-subsets of an r-set that contain at least one of t marked items."""
    if t <= 0 or t > r:
        return 0.0
    if p >= r:
        return 1.0
    return 1.0 - math.comb(r - t, p) / math.comb(r, p)


@functools.lru_cache(maxsize=None)
def search_schedule(r0: int, p: int, t_min: int = 1) -> tuple:
    """Iteration counts j for successive stages of a search over an r0-element domain.

    Each stage runs j Grover iterations over p-subsets of the remaining domain
    and then checks the measured subset classically; a failed stage removes
    those p known-unmarked indices. The j are chosen greedily from a posterior
    over the unknown marked count, so the sequence depends only on (r0, p);
    ``t_min`` is a promised lower bound on that count.
    """
    ts = np.arange(min(max(1, t_min), r0), r0 + 1)
    w = ts.astype(float) ** (-SCHED_PRIOR)
    w /= w.sum()
    r, seq = r0, []
    while r > 0:
        fs = np.array([_subset_fraction(r, int(t), p) for t in ts])
        ths = np.arcsin(np.sqrt(fs))
        jmax = int(math.ceil(math.pi / (4 * max(ths[0], 1e-9)))) + 1
        js = np.arange(jmax + 1)
        succ = np.sin(np.outer(2 * js + 1, ths)) ** 2
        succ[:, fs >= 1] = 1.0
        j = int(np.argmax((succ @ w) / (2 * js + 1) ** SCHED_COST))
        seq.append(j)
        w = w * (1 - succ[j])
        if w.sum() <= 0:
            break
        w /= w.sum()
        r = max(r - p, 0)
    return tuple(seq)


def _stage_cost(j: int) -> int:
    return 2 * j + 1


def _grover_search(bo: BatchOracle, domain: list, is_marked: Callable, budget: int,
                   g: np.random.Generator, used: int = 0, t_min: int = 1):
    """Staged subset search; returns (measured subset or None, its values, batches used).

    The subset is returned only after the classical check batch confirms a
    marked element in it. ``domain`` is pruned in place.
    """
    p = bo.p
    sched = search_schedule(len(domain), p, t_min)
    for j in sched:
        if not domain:
            break
        if used + _stage_cost(j) > budget:
            break
        r = len(domain)
        m = min(p, r)
        if j > 0:
            table = {}
            for _ in range(2 * j):
                table = bo.superposed(domain, width=m)
            marked = [i for i in domain if is_marked(table[i])]
            mset = set(marked)
            th = math.asin(math.sqrt(_subset_fraction(r, len(marked), p)))
            good = g.random() < math.sin((2 * j + 1) * th) ** 2
            if good:
                while True:
                    s = g.choice(domain, size=m, replace=False)
                    if any(int(i) in mset for i in s):
                        break
            else:
                unmarked = [i for i in domain if i not in mset]
                s = g.choice(unmarked, size=m, replace=False) if len(unmarked) >= m else None
                if s is None:  # every p-subset is good
                    s = g.choice(domain, size=m, replace=False)
        else:
            s = g.choice(domain, size=m, replace=False)
        s = sorted(int(i) for i in s)
        vals = bo.classical(s)
        used += _stage_cost(j)
        if any(is_marked(v) for v in vals):
            return s, vals, used
        drop = set(s)
        domain[:] = [i for i in domain if i not in drop]
    return None, None, used


def parallel_grover_any(oracle, p: int, rng=None):
    """Find some i with x_i truthy using batches of p queries.

    Returns (index or Verdict.NOT_FOUND, transcript). The batch budget is
    C_G * ceil(sqrt(k/p)); a returned index has always been re-read classically.
    """
    bo = _as_oracle(oracle, p)
    g = _rng(rng)
    k = bo.k
    budget = C_G * math.ceil(math.sqrt(k / bo.p))
    domain = list(range(k))
    s, vals, _ = _grover_search(bo, domain, bool, budget, g)
    if s is None:
        return Verdict.NOT_FOUND, bo.transcript
    hits = [i for i, v in zip(s, vals) if v]
    return hits[int(g.integers(len(hits)))], bo.transcript


def parallel_grover_all(oracle, p: int, rng=None):
    """Find every marked index; returns (set of indices, transcript)."""
    bo = _as_oracle(oracle, p)
    g = _rng(rng)
    found = set()
    domain = list(range(bo.k))
    while domain:
        budget = C_G * math.ceil(math.sqrt(len(domain) / bo.p))
        s, vals, _ = _grover_search(bo, domain, bool, budget, g)
        if s is None:
            break
        found.update(i for i, v in zip(s, vals) if v)
        drop = set(s)
        domain[:] = [i for i in domain if i not in drop]
    return found, bo.transcript


def parallel_min(oracle, p: int, rng=None, multiplicity_hint: Optional[int] = None,
                 maximize: bool = False):
    """Index of a minimum (maximum with ``maximize``) value; returns (index, transcript).

    Runs within C_M * ceil(sqrt(k/(l p))) batches, l being the multiplicity
    hint (1 if absent), and returns the best index seen when the budget ends.
    """
    bo = _as_oracle(oracle, p)
    g = _rng(rng)
    k = bo.k
    ell = max(1, int(multiplicity_hint or 1))
    budget = C_M * math.ceil(math.sqrt(k / (ell * bo.p)))
    key = (lambda v: -v) if maximize else (lambda v: v)

    first = sorted(int(i) for i in g.choice(k, size=min(bo.p, k), replace=False))
    vals = bo.classical(first)
    used = 1
    best_i, best_v = min(zip(first, vals), key=lambda iv: (key(iv[1]), iv[0]))
    drop = set(first)
    domain = [i for i in range(k) if i not in drop]
    while domain and used < budget:
        y = key(best_v)
        # the l promised minima lie below any non-minimal threshold
        s, svals, used = _grover_search(bo, domain, lambda v: key(v) < y, budget, g, used, ell)
        if s is None:
            break
        best_i, best_v = min(zip(s, svals), key=lambda iv: (key(iv[1]), iv[0]))
        drop = set(s)
        domain[:] = [i for i in domain if i not in drop]
    return best_i, bo.transcript


# ---------------------------------------------------------------- element distinctness

def walk_subset_size(k: int, p: int) -> int:
    z = int(round(k ** (2 / 3) * p ** (1 / 3)))
    return max(p + 1, min(z, k // 2))


@functools.lru_cache(maxsize=32)
def _johnson(k: int, z: int, p: int):
    """Vertices of J(k,z), the eigenvalue-1 projector of P^p and its spectral gap."""
    subsets = np.array(list(itertools.combinations(range(k), z)), dtype=np.int64)
    dim = len(subsets)
    if dim > WALK_DIM_CAP:
        raise CapacityError(f"Johnson graph J({k},{z}) has {dim} vertices (cap {WALK_DIM_CAP})")
    pos = {tuple(s): n for n, s in enumerate(subsets.tolist())}
    step = np.zeros((dim, dim))
    pr = 1.0 / (z * (k - z))
    for n, s in enumerate(subsets.tolist()):
        inside = set(s)
        for a in s:
            for b in range(k):
                if b not in inside:
                    t = tuple(sorted((inside - {a}) | {b}))
                    step[n, pos[t]] = pr
    walk = np.linalg.matrix_power(step, p)  # p composed replacement steps
    evals, evecs = np.linalg.eigh((walk + walk.T) / 2)
    top = np.abs(evals - 1) < 1e-9
    proj = evecs[:, top] @ evecs[:, top].T
    gap = 1.0 - float(np.max(np.abs(evals[~top]))) if (~top).any() else 1.0
    return subsets, proj, gap


def _has_collision_rows(vals: np.ndarray) -> np.ndarray:
    s = np.sort(vals, axis=1)
    return (s[:, 1:] == s[:, :-1]).any(axis=1)


def _first_collision(idx: Sequence[int], vals: Sequence) -> Optional[tuple]:
    seen = {}
    for i, v in sorted(zip(idx, vals)):
        if v in seen:
            return (seen[v], i)
        seen[v] = i
    return None


def _verify_pair(bo: BatchOracle, pair: tuple) -> bool:
    i, j = pair
    if bo.p >= 2:
        vi, vj = bo.classical([i, j])
    else:
        (vi,), (vj,) = bo.classical([i]), bo.classical([j])
    return vi == vj


def element_distinctness_walk(oracle, p: int, rng=None):
    """Find i != j with x_i == x_j; returns (pair or Verdict.NO_COLLISION, transcript).

    With p >= k/8 the whole domain is read classically in random chunks of p.
    Otherwise amplitude amplification runs over Johnson-graph vertices
    (z-subsets with their values loaded), reflecting about the stationary
    state of the p-step walk through its spectral projector. Batch charges per
    attempt: ceil(z/p) for setup, 8*ceil(1/sqrt(gap)) per reflection (phase
    estimation on the walk, two updates per walk step, two batches per
    update). Any candidate pair is re-read with two classical evaluations.
    """
    bo = _as_oracle(oracle, p)
    g = _rng(rng)
    k, p = bo.k, bo.p
    budget = C_E * math.ceil((k / p) ** (2 / 3))
    if k < 2:
        return Verdict.NO_COLLISION, bo.transcript
    z = walk_subset_size(k, p)
    if 8 * p >= k or not (p < z <= k // 2):
        order = [int(i) for i in g.permutation(k)]
        seen_i, seen_v = [], []
        for c in range(0, k, p):
            chunk = sorted(order[c:c + p])
            seen_i += chunk
            seen_v += bo.classical(chunk)
            pair = _first_collision(seen_i, seen_v)
            if pair is not None and _verify_pair(bo, pair):
                return pair, bo.transcript
        return Verdict.NO_COLLISION, bo.transcript

    subsets, proj, gap = _johnson(k, z, p)
    setup = math.ceil(z / p)
    refl = 8 * math.ceil(1 / math.sqrt(gap))
    verify = math.ceil(2 / p)
    eps_min = z * (z - 1) / (k * (k - 1))
    j_opt = max(0, int(round(math.pi / (4 * math.asin(math.sqrt(eps_min))) - 0.5)))
    used, attempt = 0, 0
    while True:
        j = j_opt if attempt == 0 else int(g.integers(0, j_opt + 1))
        if used + setup + j * refl + verify > budget:
            break
        attempt += 1
        table = {}
        for _ in range(setup):
            table = bo.superposed(range(k))
        vals = np.array([table[i] for i in range(k)], dtype=object)
        vv = np.vectorize(hash, otypes=[np.int64])(vals)
        marked = _has_collision_rows(vv[subsets])
        psi = np.full(len(subsets), 1 / math.sqrt(len(subsets)))
        for _ in range(j):
            psi = np.where(marked, -psi, psi)
            for _ in range(refl):
                table = bo.superposed(range(k), width=p)
            psi = 2 * proj @ psi - psi
        used += setup + j * refl
        prob = np.abs(psi) ** 2
        s = subsets[int(g.choice(len(subsets), p=prob / prob.sum()))]
        pair = _first_collision(s.tolist(), [table[int(i)] for i in s])
        if pair is not None:
            used += verify
            if _verify_pair(bo, pair):
                return pair, bo.transcript
    return Verdict.NO_COLLISION, bo.transcript


def walk_params(k: int, p: int) -> WalkParams:
    z = walk_subset_size(k, p)
    subsets, _, gap = _johnson(k, z, p)
    return WalkParams(k, z, p, p, gap, len(subsets))


# ---------------------------------------------------------------- Deutsch-Jozsa

def deutsch_jozsa(oracle, rng=None, debug: bool = False):
    """Exact constant-vs-balanced test with a single phase query.

    Non-power-of-two k is zero-padded to the next power of two and the promise
    applies to the padded string. Returns (Verdict, transcript).
    """
    bo = _as_oracle(oracle, 1)
    k = bo.k
    n = max(1, math.ceil(math.log2(k))) if k > 1 else 1
    table = bo.superposed(range(k), width=1)
    x = [1 if table.get(i, 0) else 0 for i in range(2 ** n)]
    if debug:
        ones = sum(x)
        if ones not in (0, len(x), len(x) // 2):
            raise PromiseViolation(f"input has weight {ones} of {len(x)}: neither constant nor balanced")
    st = sv.new_state([("i", n)])
    st = sv.apply(st, sv.hadamard("i"))
    st = sv.apply(st, sv.oracle_reflection("i", predicate=lambda v: x[v] == 1))
    st = sv.apply(st, sv.hadamard("i"))
    val, _ = sv.measure_register(st, "i", _rng(0 if rng is None else rng))
    return (Verdict.CONSTANT if val == 0 else Verdict.BALANCED), bo.transcript


# ---------------------------------------------------------------- mean estimation

def mean_batch_bound(sigma: float, p: int, eps: float) -> int:
    """C_A * ceil(x * log2(2+x) * log2(2+log2(2+x))) with x = sigma/(sqrt(p) eps)."""
    x = sigma / (math.sqrt(p) * eps)
    lg = math.log2(2 + x)
    return C_A * max(1, math.ceil(x * lg * math.log2(2 + lg)))


def _find_next_power(k: int, th_l: float, th_u: float, up: bool) -> tuple:
    big_k = 4 * k + 2
    if th_u <= th_l:
        return k, up
    kmax = int(math.floor(math.pi / (th_u - th_l)))
    cand = kmax - (kmax - 2) % 4
    while cand >= 2 * big_k:
        lo, hi = cand * th_l / math.pi, cand * th_u / math.pi
        if math.floor(lo) == math.floor(hi) or hi == math.floor(lo) + 1:
            return (cand - 2) // 4, int(math.floor(lo)) % 2 == 0
        cand -= 4
    return k, up


def _clopper_pearson(c: int, n: int, alpha: float) -> tuple:
    lo = 0.0 if c == 0 else float(stats.beta.ppf(alpha / 2, c, n - c + 1))
    hi = 1.0 if c == n else float(stats.beta.ppf(1 - alpha / 2, c + 1, n - c))
    return lo, hi


def iterative_amplitude_estimation(sample: Callable[[int, int], int], eps: float, budget: int,
                                   shots: int = IQAE_SHOTS, alpha: float = IQAE_ALPHA):
    """Estimate a = sin^2(theta) to additive ``eps`` from Grover-power measurements.

    ``sample(power, shots)`` runs ``shots`` preparations followed by ``power``
    Grover iterates and returns how many flags read 1; a round costs
    shots * (1 + 2*power) batches. Stops early when the next round would
    exceed ``budget``. Returns (estimate, batches used).
    """
    rounds = max(1, math.ceil(math.log2(math.pi / (8 * eps)))) if eps < math.pi / 8 else 1
    k, up, th_l, th_u, used = 0, True, 0.0, math.pi / 2, 0
    counts = {}
    while math.sin(th_u) ** 2 - math.sin(th_l) ** 2 > 2 * eps:
        k, up = _find_next_power(k, th_l, th_u, up)
        cost = shots * (1 + 2 * k)
        if used + cost > budget:
            break
        used += cost
        h = int(sample(k, shots))
        c, n = counts.get(k, (0, 0))
        c, n = c + h, n + shots
        counts[k] = (c, n)
        amin, amax = _clopper_pearson(c, n, alpha / rounds)
        big_k = 4 * k + 2
        base = math.floor(big_k * th_l / (2 * math.pi)) * 2 * math.pi
        if up:
            nl = (base + math.acos(1 - 2 * amin)) / big_k
            nu = (base + math.acos(1 - 2 * amax)) / big_k
        else:
            nl = (base + 2 * math.pi - math.acos(1 - 2 * amax)) / big_k
            nu = (base + 2 * math.pi - math.acos(1 - 2 * amin)) / big_k
        th_l, th_u = max(th_l, nl), min(th_u, nu)
    return (math.sin(th_l) ** 2 + math.sin(th_u) ** 2) / 2, used


def parallel_mean_estimate(oracle, variance_bound: float, p: int, eps: float, rng=None,
                           bounds: Optional[tuple] = None, weights: Optional[Sequence] = None):
    """Estimate E[x_I] for I drawn from ``weights`` (uniform by default).

    One preparation unitary draws p independent indices, loads their values
    and rotates a flag qubit so that P(flag) = E[(mean - lo)/(hi - lo)], as a
    comparison of the averaged value against a uniform threshold register
    would. Iterative amplitude estimation then reads off the flag
    probability. Each shot with Grover power m costs 1 + 2m batches.
    Returns (estimate, transcript).
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if variance_bound < 0:
        raise ParameterError("variance bound must be non-negative")
    bo = _as_oracle(oracle, p)
    g = _rng(rng)
    k = bo.k
    lo, hi = bounds if bounds is not None else oracle_range(bo.spec)
    sigma = math.sqrt(variance_bound)
    w = np.full(k, 1 / k) if weights is None else np.asarray(weights, dtype=float) / np.sum(weights)
    if sigma == 0 or hi <= lo:
        i = int(g.choice(k, p=w))
        return float(bo.classical([i])[0]), bo.transcript
    budget = mean_batch_bound(sigma, bo.p, eps)
    support = [i for i in range(k) if w[i] > 0]

    def sample(power, shots):
        table = {}
        for _ in range(shots * (1 + 2 * power)):
            table = bo.superposed(support)
        vals = np.array([float(table[i]) for i in support])
        if vals.min() < lo - 1e-9 or vals.max() > hi + 1e-9:
            raise ParameterError("oracle value outside the declared range")
        a = float(np.dot(w[support], (vals - lo) / (hi - lo)))
        theta = math.asin(math.sqrt(min(max(a, 0.0), 1.0)))
        return g.binomial(shots, math.sin((2 * power + 1) * theta) ** 2)

    est, _ = iterative_amplitude_estimation(sample, eps / (hi - lo), budget)
    return lo + (hi - lo) * est, bo.transcript


def oracle_range(spec: OracleSpec) -> tuple:
    if spec.value_range is None:
        return 0.0, float(2 ** spec.q - 1)
    lo, hi = spec.value_range
    return float(lo), float(hi)
