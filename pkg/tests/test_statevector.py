import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from qcongest import statevector as sv
from qcongest.errors import AddressError, CapacityError, StateError


def random_state(layout, rng):
    n = sum(w for _, w in layout)
    a = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return sv.from_amplitudes(layout, a)


def test_new_state_zero():
    s = sv.new_state([("q", 1)])
    assert np.allclose(s.amplitudes, [1, 0])
    s = sv.new_state([("a", 2), ("b", 1)])
    assert len(s.amplitudes) == 8 and s.amplitudes[0] == 1


def test_capacity():
    with pytest.raises(CapacityError):
        sv.new_state([("a", 20), ("b", 5)])


def test_hadamard_and_z():
    s = sv.apply(sv.new_state([("q", 1)]), sv.hadamard("q"))
    assert np.allclose(s.amplitudes, [2 ** -0.5, 2 ** -0.5])
    r = random_state([("q", 2)], np.random.default_rng(1))
    twice = sv.apply(sv.apply(r, sv.pauli_z("q")), sv.pauli_z("q"))
    assert twice.allclose(r)


def test_qft_roundtrip():
    r = random_state([("x", 3)], np.random.default_rng(7))
    back = sv.apply(sv.apply(r, sv.qft("x")), sv.inverse_qft("x"))
    assert back.allclose(r)


def test_qft_of_zero_is_uniform():
    s = sv.apply(sv.new_state([("x", 3)]), sv.qft("x"))
    assert np.allclose(s.amplitudes, np.full(8, 8 ** -0.5))


def test_big_endian_layout():
    s = sv.basis_state([("a", 2), ("b", 1)], {"a": 2, "b": 1})
    assert s.amplitudes[0b101] == 1
    s = sv.apply(sv.new_state([("a", 2), ("b", 1)]), sv.pauli_x(("a", 0)))
    assert s.amplitudes[0b100] == 1


def test_bad_address():
    s = sv.new_state([("a", 2)])
    with pytest.raises(AddressError):
        sv.apply(s, sv.hadamard("nope"))
    with pytest.raises(AddressError):
        sv.apply(s, sv.hadamard(("a", 5)))


def test_diffusion_subset_matches_matrix():
    rng = np.random.default_rng(3)
    r = random_state([("x", 3)], rng)
    sub = [1, 4, 6]
    s = np.zeros(8)
    s[sub] = 1 / np.sqrt(3)
    m = 2 * np.outer(s, s) - np.eye(8)
    out = sv.apply(r, sv.diffusion("x", subset=sub))
    assert np.allclose(out.amplitudes, m @ r.amplitudes, atol=1e-12)


def test_grover_single_iteration_on_four():
    s = sv.apply(sv.new_state([("x", 2)]), sv.hadamard("x"))
    s = sv.apply(s, sv.oracle_reflection("x", predicate=lambda v: v == 2))
    s = sv.apply(s, sv.diffusion("x"))
    assert abs(abs(s.amplitudes[2]) - 1) < 1e-12


def test_controlled_ops():
    s = sv.basis_state([("c", 1), ("t", 2)], {"c": 1, "t": 0})
    out = sv.apply(s, sv.permutation("t", mapping=[3, 0, 1, 2], controls=(("c", 0),)))
    assert out.amplitudes[0b111] == 1
    s0 = sv.basis_state([("c", 1), ("t", 2)], {"c": 0, "t": 0})
    out0 = sv.apply(s0, sv.permutation("t", mapping=[3, 0, 1, 2], controls=(("c", 0),)))
    assert out0.allclose(s0)


def test_multi_register_predicate():
    s = sv.apply(sv.new_state([("a", 1), ("b", 1)]), sv.hadamard("a", "b"))
    s = sv.apply(s, sv.oracle_reflection("a", "b", predicate=lambda ab: ab == (1, 0)))
    assert s.amplitudes[0b10].real < 0 and s.amplitudes[0b01].real > 0


def _all_kinds():
    layout = [("a", 2), ("b", 2)]
    perm = np.random.default_rng(0).permutation(16)
    return layout, [
        sv.hadamard("a"),
        sv.pauli_x(("b", 1)),
        sv.pauli_z("a", "b"),
        sv.controlled_phase(("a", 0), ("b", 1), 0.7),
        sv.diffusion("a", "b", subset=[0, 3, 5, 9, 10]),
        sv.qft("b"),
        sv.inverse_qft("a", "b"),
        sv.oracle_reflection("a", predicate=lambda v: v % 3 == 1),
        sv.permutation("a", "b", mapping=perm),
        sv.qft("a", controls=(("b", 0),)),
    ]


def test_unitarity_every_kind():
    layout, ops = _all_kinds()
    rng = np.random.default_rng(11)
    for op in ops:
        for _ in range(100):
            r = random_state(layout, rng)
            out = sv.apply(r, op)
            assert abs(out.norm() - 1) < 1e-9
            assert sv.apply(out, op.inverse()).allclose(r)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 9))
def test_norm_preserved(seed, which):
    layout, ops = _all_kinds()
    r = random_state(layout, np.random.default_rng(seed))
    assert abs(sv.apply(r, ops[which]).norm() - 1) < 1e-9


def test_measure_basis_and_product():
    bits, post = sv.measure(sv.basis_state([("q", 1)], {"q": 1}), ["q"], 0)
    assert bits == "1" and post.amplitudes[1] == 1
    s = sv.basis_state([("a", 1), ("b", 1)], {"a": 0, "b": 1})
    bits, post = sv.measure(s, ["a"], 0)
    assert bits == "0"
    assert np.allclose(post.register_distribution("b"), [0, 1])


def test_measure_frequency():
    plus = sv.apply(sv.new_state([("q", 1)]), sv.hadamard("q"))
    rng = np.random.default_rng(2024)
    ones = sum(sv.measure(plus, ["q"], rng)[0] == "1" for _ in range(10000))
    assert abs(ones / 10000 - 0.5) <= 0.02


def test_measure_deterministic_given_seed():
    r = random_state([("x", 4)], np.random.default_rng(5))
    assert sv.measure(r, ["x"], 99)[0] == sv.measure(r, ["x"], 99)[0]


def test_measure_chi_squared():
    r = random_state([("x", 3)], np.random.default_rng(8))
    p = r.register_distribution("x")
    rng = np.random.default_rng(12)
    counts = np.bincount([sv.measure_register(r, "x", rng)[0] for _ in range(4000)], minlength=8)
    _, pval = stats.chisquare(counts, 4000 * p)
    assert pval > 1e-3


def test_measure_zero_norm():
    s = sv.new_state([("q", 1)])
    s.amplitudes[:] = 0
    with pytest.raises(StateError):
        sv.measure(s, ["q"], 0)


def test_partial_qubit_measure_order():
    s = sv.basis_state([("a", 3)], {"a": 0b110})
    assert sv.measure(s, [("a", 2), ("a", 0)], 0)[0] == "01"


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sparse_matches_dense_permutations(seed):
    rng = np.random.default_rng(seed)
    layout = [("a", 2), ("b", 1), ("c", 2)]
    dense = random_state([("a", 2)], rng)
    big = sv.from_amplitudes(layout, np.kron(dense.amplitudes, np.eye(8)[0]))
    sparse = sv.SparseState.embed(dense, layout)
    for _ in range(4):
        regs = [str(r) for r in rng.choice(["a", "b", "c"], size=2, replace=False)]
        dim = 2 ** sum(dict(layout)[r] for r in regs)
        op = sv.permutation(*regs, mapping=rng.permutation(dim))
        big, sparse = sv.apply(big, op), sv.apply_sparse(sparse, op)
    assert sparse.to_dense().allclose(big)


def test_sparse_rejects_other_gates():
    s = sv.SparseState.embed(sv.basis_state([("a", 1)], {"a": 1}), [("a", 1), ("b", 1)])
    with pytest.raises(StateError):
        sv.apply_sparse(s, sv.hadamard("a"))
    with pytest.raises(AddressError):
        sv.apply_sparse(s, sv.permutation("z", mapping=[1, 0]))
