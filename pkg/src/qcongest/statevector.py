"""Dense statevector simulation over named registers.

Basis ordering is big-endian: the first qubit of the first register is the
most significant bit of the amplitude index, and a register's value is the
integer spelled by its qubits in layout order.

Targets are addressed either by register name (the whole register) or by a
``(name, i)`` tuple for qubit ``i`` of that register.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import AddressError, CapacityError, StateError

MAX_QUBITS = 24
TOL = 1e-9

Address = Union[str, tuple]
Layout = Sequence[tuple]


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    layout: tuple

    def __post_init__(self):
        self.layout = tuple((str(n), int(w)) for n, w in self.layout)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise StateError(
                f"expected {2 ** self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    @property
    def n_qubits(self) -> int:
        return sum(w for _, w in self.layout)

    @property
    def names(self) -> list:
        return [n for n, _ in self.layout]

    def width(self, name: str) -> int:
        for n, w in self.layout:
            if n == name:
                return w
        raise AddressError(f"no register named {name!r}")

    def offset(self, name: str) -> int:
        pos = 0
        for n, w in self.layout:
            if n == name:
                return pos
            pos += w
        raise AddressError(f"no register named {name!r}")

    def qubits(self, target: Address) -> list:
        """Absolute qubit positions for a register name or (name, i) address."""
        if isinstance(target, str):
            off = self.offset(target)
            return list(range(off, off + self.width(target)))
        if isinstance(target, tuple) and len(target) == 2:
            name, i = target
            w = self.width(name)
            if not 0 <= int(i) < w:
                raise AddressError(f"qubit {i} out of range for register {name!r}")
            return [self.offset(name) + int(i)]
        raise AddressError(f"malformed address {target!r}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.layout)

    def probabilities(self, targets: Sequence[Address]) -> np.ndarray:
        """Marginal Born distribution over the concatenated target bits."""
        pos = _resolve(self, targets)
        n = self.n_qubits
        p = np.abs(self.amplitudes.reshape((2,) * n)) ** 2 if n else np.abs(self.amplitudes) ** 2
        rest = tuple(i for i in range(n) if i not in pos)
        marg = p.sum(axis=rest) if rest else p
        # axes of marg are the target positions in increasing order; reorder to request order
        order = sorted(pos)
        marg = np.transpose(marg, [order.index(q) for q in pos]) if pos else marg
        return np.asarray(marg).reshape(-1)

    def register_distribution(self, name: str) -> np.ndarray:
        return self.probabilities([name])

    def allclose(self, other: "StateVector", tol: float = TOL) -> bool:
        return (self.layout == other.layout
                and float(np.max(np.abs(self.amplitudes - other.amplitudes))) <= tol)


def new_state(layout: Layout) -> StateVector:
    """The all-zero basis state over ``layout``."""
    layout = tuple((str(n), int(w)) for n, w in layout)
    names = [n for n, _ in layout]
    if len(set(names)) != len(names):
        raise AddressError("duplicate register names")
    if any(w < 0 for _, w in layout):
        raise AddressError("negative register width")
    total = sum(w for _, w in layout)
    if total > MAX_QUBITS:
        raise CapacityError(f"{total} qubits exceeds the cap of {MAX_QUBITS}")
    amps = np.zeros(2 ** total, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, layout)


def from_amplitudes(layout: Layout, amplitudes) -> StateVector:
    """Wrap ``amplitudes`` (normalized here) as a state over ``layout``."""
    sv = new_state(layout)
    a = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(a)
    if nrm < 1e-12:
        raise StateError("zero-norm amplitude vector")
    return StateVector(a / nrm, sv.layout)


def basis_state(layout: Layout, values: dict) -> StateVector:
    """Computational basis state with each register set to ``values[name]``."""
    sv = new_state(layout)
    idx = 0
    for name, w in sv.layout:
        v = int(values.get(name, 0))
        if not 0 <= v < 2 ** w:
            raise AddressError(f"value {v} does not fit register {name!r}")
        idx = (idx << w) | v
    sv.amplitudes[0] = 0
    sv.amplitudes[idx] = 1
    return sv


class GateKind(enum.Enum):
    HADAMARD = "Hadamard"
    PAULI_Z = "PauliZ"
    PAULI_X = "PauliX"
    CONTROLLED_PHASE = "ControlledPhase"
    DIFFUSION = "DiffusionOverSubset"
    QFT = "QFT"
    INVERSE_QFT = "InverseQFT"
    ORACLE_REFLECTION = "OracleReflection"
    PERMUTATION = "PermutationUnitary"


_QUBIT_KINDS = {GateKind.HADAMARD, GateKind.PAULI_Z, GateKind.PAULI_X}


@dataclass(frozen=True)
class GateOp:
    """A unitary gate.

    Qubit-level kinds act on every qubit named by ``targets``. Register-level
    kinds (diffusion, QFT, reflection, permutation) treat the listed registers
    as one combined value, first register most significant. ``controls`` is an
    optional tuple of qubit addresses; the gate fires only when all are 1.
    """

    kind: GateKind
    targets: tuple
    angle: float = 0.0
    subset: Optional[tuple] = None
    predicate: Optional[Callable] = field(default=None, compare=False)
    mapping: Optional[tuple] = None
    controls: tuple = ()

    def inverse(self) -> "GateOp":
        k = self.kind
        if k == GateKind.CONTROLLED_PHASE:
            return GateOp(k, self.targets, angle=-self.angle, controls=self.controls)
        if k == GateKind.QFT:
            return GateOp(GateKind.INVERSE_QFT, self.targets, controls=self.controls)
        if k == GateKind.INVERSE_QFT:
            return GateOp(GateKind.QFT, self.targets, controls=self.controls)
        if k == GateKind.PERMUTATION:
            inv = np.empty(len(self.mapping), dtype=np.int64)
            inv[np.asarray(self.mapping)] = np.arange(len(self.mapping))
            return GateOp(k, self.targets, mapping=tuple(int(v) for v in inv),
                          controls=self.controls)
        # H, X, Z, diffusion and phase-flip reflections are involutions
        return self


def hadamard(*targets: Address) -> GateOp:
    return GateOp(GateKind.HADAMARD, tuple(targets))


def pauli_x(*targets: Address, controls: tuple = ()) -> GateOp:
    return GateOp(GateKind.PAULI_X, tuple(targets), controls=tuple(controls))


def pauli_z(*targets: Address) -> GateOp:
    return GateOp(GateKind.PAULI_Z, tuple(targets))


def controlled_phase(control: Address, target: Address, angle: float) -> GateOp:
    """Phase e^{i angle} on the |11> component of two qubits."""
    return GateOp(GateKind.CONTROLLED_PHASE, (control, target), angle=float(angle))


def diffusion(*registers: str, subset: Optional[Sequence[int]] = None,
              controls: tuple = ()) -> GateOp:
    """Reflection 2|s><s| - I about the uniform state over ``subset`` (default: all values)."""
    sub = None if subset is None else tuple(sorted(set(int(s) for s in subset)))
    return GateOp(GateKind.DIFFUSION, tuple(registers), subset=sub, controls=tuple(controls))


def qft(*registers: str, controls: tuple = ()) -> GateOp:
    return GateOp(GateKind.QFT, tuple(registers), controls=tuple(controls))


def inverse_qft(*registers: str, controls: tuple = ()) -> GateOp:
    return GateOp(GateKind.INVERSE_QFT, tuple(registers), controls=tuple(controls))


def oracle_reflection(*registers: str, predicate: Callable, controls: tuple = ()) -> GateOp:
    """Phase -1 on basis values where ``predicate`` holds.

    With a single register the predicate receives an int, otherwise a tuple
    of ints (one per register).
    """
    return GateOp(GateKind.ORACLE_REFLECTION, tuple(registers), predicate=predicate,
                  controls=tuple(controls))


def permutation(*registers: str, mapping: Sequence[int], controls: tuple = ()) -> GateOp:
    """Basis permutation |x> -> |mapping[x]> on the combined register value."""
    return GateOp(GateKind.PERMUTATION, tuple(registers),
                  mapping=tuple(int(v) for v in mapping), controls=tuple(controls))


def _resolve(state: StateVector, targets: Sequence[Address]) -> list:
    pos = []
    for t in targets:
        pos.extend(state.qubits(t))
    if len(set(pos)) != len(pos):
        raise AddressError("repeated target qubit")
    return pos


def _apply_qubit_gate(t: np.ndarray, kind: GateKind, q: int) -> np.ndarray:
    idx0 = [slice(None)] * t.ndim
    idx1 = [slice(None)] * t.ndim
    idx0[q], idx1[q] = 0, 1
    a0, a1 = t[tuple(idx0)].copy(), t[tuple(idx1)].copy()
    if kind == GateKind.HADAMARD:
        s = 1 / np.sqrt(2)
        t[tuple(idx0)], t[tuple(idx1)] = s * (a0 + a1), s * (a0 - a1)
    elif kind == GateKind.PAULI_X:
        t[tuple(idx0)], t[tuple(idx1)] = a1, a0
    else:
        t[tuple(idx1)] = -a1
    return t


def _apply_register_gate(state: StateVector, amps: np.ndarray, op: GateOp) -> np.ndarray:
    names = list(op.targets)
    if not names or any(not isinstance(n, str) for n in names):
        raise AddressError(f"{op.kind.value} needs register names as targets")
    if len(set(names)) != len(names):
        raise AddressError("repeated target register")
    dims = [2 ** w for _, w in state.layout]
    axes = [state.names.index(n) if n in state.names else None for n in names]
    if None in axes:
        raise AddressError(f"unknown register in {names}")
    t = amps.reshape(dims)
    t = np.moveaxis(t, axes, list(range(len(dims) - len(axes), len(dims))))
    moved_shape = t.shape
    dim = int(np.prod([dims[a] for a in axes]))
    m = t.reshape(-1, dim).copy()
    k = op.kind
    if k == GateKind.DIFFUSION:
        if op.subset is None:
            mean = m.mean(axis=1, keepdims=True)
            m = 2 * mean - m
        else:
            sub = np.asarray(op.subset, dtype=np.int64)
            if len(sub) == 0 or sub.min() < 0 or sub.max() >= dim:
                raise AddressError("diffusion subset out of register range")
            inside = m[:, sub]
            mean = inside.mean(axis=1, keepdims=True)
            m = -m
            m[:, sub] = 2 * mean - inside
    elif k == GateKind.QFT:
        m = np.fft.ifft(m, axis=1, norm="ortho")
    elif k == GateKind.INVERSE_QFT:
        m = np.fft.fft(m, axis=1, norm="ortho")
    elif k == GateKind.ORACLE_REFLECTION:
        sign = _predicate_signs(op.predicate, [dims[a] for a in axes])
        m = m * sign
    elif k == GateKind.PERMUTATION:
        mp = np.asarray(op.mapping, dtype=np.int64)
        if mp.shape != (dim,) or not np.array_equal(np.sort(mp), np.arange(dim)):
            raise AddressError("permutation mapping is not a bijection on the register")
        out = np.empty_like(m)
        out[:, mp] = m
        m = out
    t = m.reshape(moved_shape)
    t = np.moveaxis(t, list(range(len(dims) - len(axes), len(dims))), axes)
    return np.ascontiguousarray(t).reshape(-1)


def _predicate_signs(pred: Callable, dims: list) -> np.ndarray:
    dim = int(np.prod(dims))
    sign = np.ones(dim)
    for v in range(dim):
        if len(dims) == 1:
            arg = v
        else:
            arg, r = [], v
            for d in reversed(dims):
                arg.append(r % d)
                r //= d
            arg = tuple(reversed(arg))
        if pred(arg):
            sign[v] = -1.0
    return sign


def apply(state: StateVector, op: GateOp) -> StateVector:
    """Return a new state equal to ``op`` applied to ``state``."""
    n = state.n_qubits
    amps = state.amplitudes
    ctrl = _resolve(state, op.controls) if op.controls else []
    if op.kind in _QUBIT_KINDS:
        qs = _resolve(state, op.targets)
        if set(qs) & set(ctrl):
            raise AddressError("control and target overlap")
        t = amps.reshape((2,) * n).copy()
        for q in qs:
            t = _apply_qubit_gate(t, op.kind, q)
        new = t.reshape(-1)
    elif op.kind == GateKind.CONTROLLED_PHASE:
        qs = _resolve(state, op.targets)
        if len(qs) != 2:
            raise AddressError("ControlledPhase needs exactly two qubits")
        t = amps.reshape((2,) * n).copy()
        idx = [slice(None)] * n
        idx[qs[0]] = idx[qs[1]] = 1
        t[tuple(idx)] *= np.exp(1j * op.angle)
        new = t.reshape(-1)
    else:
        if ctrl:
            tq = _resolve(state, op.targets)
            if set(tq) & set(ctrl):
                raise AddressError("control and target overlap")
        new = _apply_register_gate(state, amps, op)
    if ctrl:
        # the gate acts block-diagonally on control values: keep only the all-ones block
        out = amps.reshape((2,) * n).copy()
        idx = [slice(None)] * n
        for q in ctrl:
            idx[q] = 1
        out[tuple(idx)] = new.reshape((2,) * n)[tuple(idx)]
        new = out.reshape(-1)
    return StateVector(new, state.layout)


def apply_all(state: StateVector, ops: Sequence[GateOp]) -> StateVector:
    for op in ops:
        state = apply(state, op)
    return state


def measure(state: StateVector, targets: Sequence[Address], rng) -> tuple:
    """Projectively measure ``targets``; returns (bitstring, collapsed state)."""
    if isinstance(targets, (str, tuple)) and not isinstance(targets, list):
        targets = [targets]
    nrm = state.norm()
    if nrm < 1e-12:
        raise StateError("cannot measure a zero-norm state")
    pos = _resolve(state, targets)
    probs = state.probabilities(targets) / nrm ** 2
    probs = np.clip(probs, 0, None)
    probs /= probs.sum()
    outcome = int(_as_rng(rng).choice(len(probs), p=probs))
    bits = format(outcome, f"0{len(pos)}b") if pos else ""
    n = state.n_qubits
    t = state.amplitudes.reshape((2,) * n)
    idx = [slice(None)] * n
    for q, b in zip(pos, bits):
        idx[q] = int(b)
    out = np.zeros_like(t)
    out[tuple(idx)] = t[tuple(idx)]
    out = out.reshape(-1)
    out /= np.linalg.norm(out)
    return bits, StateVector(out, state.layout)


def measure_register(state: StateVector, name: str, rng) -> tuple:
    """Measure a whole register; returns (integer value, collapsed state)."""
    bits, post = measure(state, [name], rng)
    return (int(bits, 2) if bits else 0), post


@dataclass
class SparseState:
    """Amplitudes keyed by per-register basis values, for permutation-only circuits.

    Used when a state has few nonzero terms but too many qubits for a dense
    vector (e.g. n copies of a q-qubit register). ``terms`` maps a tuple of
    register values, in layout order, to its amplitude.
    """

    terms: dict
    layout: tuple

    def __post_init__(self):
        self.layout = tuple((str(n), int(w)) for n, w in self.layout)

    @property
    def n_qubits(self) -> int:
        return sum(w for _, w in self.layout)

    @property
    def names(self) -> list:
        return [n for n, _ in self.layout]

    @classmethod
    def embed(cls, state: StateVector, layout: Layout) -> "SparseState":
        """Place ``state`` (one register) in the first register of ``layout``, rest |0>."""
        rest = (0,) * (len(layout) - 1)
        terms = {(i,) + rest: complex(a) for i, a in enumerate(state.amplitudes) if abs(a) > 0}
        return cls(terms, layout)

    def amplitude(self, values: tuple) -> complex:
        return self.terms.get(tuple(values), 0j)

    def to_dense(self) -> StateVector:
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.n_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        amps = np.zeros(2 ** self.n_qubits, dtype=np.complex128)
        widths = [w for _, w in self.layout]
        for vals, a in self.terms.items():
            idx = 0
            for v, w in zip(vals, widths):
                idx = (idx << w) | v
            amps[idx] += a
        return StateVector(amps, self.layout)

    def allclose(self, other: "SparseState", tol: float = TOL) -> bool:
        keys = set(self.terms) | set(other.terms)
        return self.layout == other.layout and all(
            abs(self.amplitude(k) - other.amplitude(k)) <= tol for k in keys)


def apply_sparse(state: SparseState, op: GateOp) -> SparseState:
    """Apply an uncontrolled permutation gate to a sparse state."""
    if op.kind != GateKind.PERMUTATION or op.controls:
        raise StateError("sparse states support uncontrolled permutations only")
    names = state.names
    try:
        axes = [names.index(n) for n in op.targets]
    except ValueError:
        raise AddressError(f"unknown register in {op.targets}") from None
    widths = [state.layout[a][1] for a in axes]
    if len(op.mapping) != 2 ** sum(widths):
        raise AddressError("permutation mapping does not match the register sizes")
    out = {}
    for vals, a in state.terms.items():
        x = 0
        for ax, w in zip(axes, widths):
            x = (x << w) | vals[ax]
        y = op.mapping[x]
        new = list(vals)
        for ax, w in zip(reversed(axes), reversed(widths)):
            new[ax] = y & ((1 << w) - 1)
            y >>= w
        key = tuple(new)
        out[key] = out.get(key, 0j) + a
    return SparseState(out, state.layout)
