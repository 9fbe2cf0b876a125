import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procrustes_povm.qubit import (
    IDENTITY,
    PROJ0,
    QubitError,
    QubitOperator,
    apply_single_qubit_op,
    basis_state,
    bell_state,
    binary_entropy,
    entropy_of_entanglement,
    fidelity,
    make_state,
    reduced_density_matrix,
    schmidt_pair,
)


def h2(p):
    # oracle: binary entropy written out
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_make_state_basis_and_scaling():
    s = make_state(1, [1, 0])
    assert s.norm() == pytest.approx(1, abs=1e-12)
    assert np.allclose(make_state(1, [2, 0]).amplitudes, [1, 0])


def test_make_state_pair_example():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    st_ = make_state(2, [c, 0, 0, 1j * s])
    assert np.allclose(st_.amplitudes, [c, 0, 0, 1j * s])
    assert abs(st_.norm() - 1) < 1e-12


def test_make_state_errors():
    with pytest.raises(QubitError):
        make_state(2, [1, 0, 0])
    with pytest.raises(QubitError):
        make_state(1, [0, 0])


def test_make_state_keeps_global_phase():
    s = make_state(1, [1j, 0])
    assert s.amplitudes[0] == pytest.approx(1j)


def test_identity_op():
    s = make_state(2, [0.6, 0, 0.8j, 0])
    out, w = apply_single_qubit_op(s, IDENTITY, 1)
    assert w == pytest.approx(1)
    assert np.allclose(out.amplitudes, s.amplitudes)


def test_projector_on_plus():
    plus = make_state(1, [1, 1])
    out, w = apply_single_qubit_op(plus, PROJ0, 0)
    assert w == pytest.approx(0.5)
    assert np.allclose(out.amplitudes, [1, 0])


def test_kraus_on_pair_matches_explicit_matrix():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    vec = np.array([c, 0, 0, 1j * s])
    m1 = np.diag([math.tan(math.pi / 6), -1j])
    expected = np.kron(m1, np.eye(2)) @ vec
    weight = np.vdot(expected, expected).real
    out, w = apply_single_qubit_op(make_state(2, vec), QubitOperator(m1), 0)
    assert w == pytest.approx(weight, abs=1e-12)
    assert w == pytest.approx(0.5, abs=1e-12)
    assert fidelity(out, bell_state()) == pytest.approx(1, abs=1e-12)


def test_zero_weight_branch_absent():
    out, w = apply_single_qubit_op(basis_state(1, 1), PROJ0, 0)
    assert out is None and w == 0


def test_target_out_of_range():
    with pytest.raises(QubitError):
        apply_single_qubit_op(bell_state(), IDENTITY, 2)


def test_qubit_ordering_most_significant_first():
    s = basis_state(2, 0)
    x = QubitOperator(np.array([[0, 1], [1, 0]]))
    out, _ = apply_single_qubit_op(s, x, 0)
    assert np.allclose(out.amplitudes, [0, 0, 1, 0])


def test_entropy_examples():
    assert entropy_of_entanglement(bell_state(), [0]) == pytest.approx(1, abs=1e-12)
    assert entropy_of_entanglement(basis_state(2, 0), [0]) == pytest.approx(0, abs=1e-12)
    pair = schmidt_pair(0.5, math.sqrt(0.75))
    assert entropy_of_entanglement(pair, [0]) == pytest.approx(h2(0.25), abs=1e-12)
    assert h2(0.25) == pytest.approx(0.8113, abs=1e-4)


def test_entropy_partition_errors():
    for bad in ([], [0, 1], [2]):
        with pytest.raises(QubitError):
            entropy_of_entanglement(bell_state(), bad)


def test_reduced_density_matrix_trace_one():
    rho = reduced_density_matrix(schmidt_pair(0.6, 0.8), [1])
    assert np.trace(rho).real == pytest.approx(1)
    assert np.allclose(rho, np.diag([0.36, 0.64]))


def test_fidelity_examples():
    zero, one = basis_state(1, 0), basis_state(1, 1)
    plus = make_state(1, [1, 1])
    assert fidelity(zero, zero) == pytest.approx(1)
    assert fidelity(zero, one) == pytest.approx(0)
    assert fidelity(zero, plus) == pytest.approx(0.5)
    with pytest.raises(QubitError):
        fidelity(zero, bell_state())


def test_binary_entropy_endpoints_vectorized():
    assert np.allclose(binary_entropy(np.array([0.0, 0.5, 1.0])), [0, 1, 0])


amp = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(amp, amp), min_size=4, max_size=4))
def test_norm_preserved_property(raw):
    a = np.array([complex(x, y) for x, y in raw])
    if np.linalg.norm(a) < 1e-6:
        return
    assert abs(make_state(2, a).norm() - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(-math.pi, math.pi))
def test_schmidt_entropy_in_range_and_zero_iff_product(p, g):
    s = schmidt_pair(math.sqrt(p), math.sqrt(1 - p) * np.exp(1j * g))
    e = entropy_of_entanglement(s, [0])
    assert -1e-12 <= e <= 1 + 1e-12
    assert e == pytest.approx(float(binary_entropy(p)), abs=1e-9)
    if e < 1e-12:
        assert min(p, 1 - p) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(amp, amp), min_size=8, max_size=8), st.floats(-math.pi, math.pi))
def test_fidelity_symmetric_and_phase_invariant(raw, phase):
    a = np.array([complex(x, y) for x, y in raw])
    if np.linalg.norm(a[:4]) < 1e-6 or np.linalg.norm(a[4:]) < 1e-6:
        return
    s, t = make_state(2, a[:4]), make_state(2, a[4:])
    f = fidelity(s, t)
    assert f == pytest.approx(fidelity(t, s), abs=1e-12)
    assert f == pytest.approx(fidelity(make_state(2, np.exp(1j * phase) * a[:4]), t), abs=1e-12)
    assert -1e-12 <= f <= 1 + 1e-12
