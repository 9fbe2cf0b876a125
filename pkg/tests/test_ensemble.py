import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procrustes_povm.distill import DistillParams, distill_pair
from procrustes_povm.ensemble import (
    EnsembleError,
    EnsembleSpec,
    calibrate_and_distill,
    distill_ensemble,
    make_rng,
    mean_alpha2_from_entropy,
    pair_branch_stats,
    sample_ensemble,
    sweep_grid,
)
from procrustes_povm.qubit import binary_entropy, entropy_of_entanglement, schmidt_pair


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


S_075 = h2(0.75)


def test_delta_samples():
    s = sample_ensemble(EnsembleSpec("delta", 0.75, size=100))
    assert s.shape == (100,) and np.all(s == 0.75)


def test_gaussian_mean_within_standard_error():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.75, 0.01, 100_000, seed=11))
    assert abs(s.mean() - 0.75) < 3 * 0.01 / math.sqrt(s.size)


def test_gaussian_truncation():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.999, 0.01, 20_000, seed=1))
    assert s.max() <= 1.0 and s.min() >= 0.0 and s.size == 20_000


def test_custom_samples_and_spec_errors():
    s = sample_ensemble(EnsembleSpec("custom_samples", samples=(0.1, 0.9)))
    assert list(s) == [0.1, 0.9]
    with pytest.raises(EnsembleError):
        EnsembleSpec("gaussian_alpha2", 1.2, 0.01)
    with pytest.raises(EnsembleError):
        EnsembleSpec("gaussian_alpha2", 0.5, 0.01, size=0)
    with pytest.raises(EnsembleError):
        EnsembleSpec("custom_samples")


def test_sampling_deterministic_and_position_keyed():
    spec = EnsembleSpec("gaussian_alpha2", 0.8, 0.05, 1000, seed=5)
    assert np.array_equal(sample_ensemble(spec, 3), sample_ensemble(spec, 3))
    assert not np.array_equal(sample_ensemble(spec, 3), sample_ensemble(spec, 4))


def test_entropy_inversion():
    assert mean_alpha2_from_entropy(1.0) == 0.5
    assert mean_alpha2_from_entropy(0.0) == 1.0
    assert mean_alpha2_from_entropy(S_075) == pytest.approx(0.75, abs=1e-10)
    assert mean_alpha2_from_entropy(0.8113) == pytest.approx(0.75, abs=1e-4)
    with pytest.raises(EnsembleError):
        mean_alpha2_from_entropy(1.5)


def test_branch_stats_match_pair_simulation():
    prm = DistillParams(0.4, 0.3)
    p0 = np.array([0.1, 0.5, 0.75, 0.99])
    P1, S, q = pair_branch_stats(p0, prm)
    for k, p in enumerate(p0):
        o1, _ = distill_pair(schmidt_pair(math.sqrt(p), math.sqrt(1 - p) * np.exp(0.3j)), prm)
        assert P1[k] == pytest.approx(o1.probability, abs=1e-12)
        assert S[k] == pytest.approx(entropy_of_entanglement(o1.state, [0]), abs=1e-9)


def test_delta_matched_example():
    r = distill_ensemble(np.full(1000, 0.75), DistillParams(math.pi / 6))
    assert r.mean_S_in == pytest.approx(S_075, abs=1e-12)
    assert r.mean_S_out == pytest.approx(1.0, abs=1e-9)
    assert r.survival_fraction == pytest.approx(0.5, abs=1e-12)
    assert r.delta_S == pytest.approx(1 - S_075, abs=1e-9)
    assert r.delta_S == pytest.approx(0.1887, abs=1e-4)


def test_identity_povm_changes_nothing():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.7, 0.1, 5000, seed=2))
    r = distill_ensemble(s, DistillParams(math.pi / 4))
    assert r.delta_S == pytest.approx(0, abs=1e-12)
    assert r.survival_fraction == pytest.approx(1, abs=1e-12)


def test_low_entanglement_gains():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.9, 0.01, 10_000, seed=3))
    r = distill_ensemble(s, DistillParams(math.acos(math.sqrt(0.9))))
    assert r.delta_S > 0


def test_histograms_and_mass():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.8, 0.05, 10_000, seed=4))
    r = distill_ensemble(s, DistillParams(0.5))
    assert np.all(r.in_histogram >= 0) and np.all(r.out_histogram >= 0)
    assert np.sum(r.in_histogram * np.diff(r.bin_edges)) == pytest.approx(1, abs=1e-12)
    assert abs(r.out_mass - r.survival_fraction) < 1e-12
    assert len(r.bin_edges) == 201


def test_survival_is_mean_p1():
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", 0.8, 0.05, 10_000, seed=4))
    prm = DistillParams(0.6, 1.0)
    P1, _, _ = pair_branch_stats(s, prm)
    assert abs(distill_ensemble(s, prm).survival_fraction - P1.mean()) < 1e-12


def test_coin_flip_mode():
    s = np.full(20_000, 0.75)
    r = distill_ensemble(s, DistillParams(math.pi / 6), coin_flip=True, rng=make_rng(0, 9))
    assert abs(r.survival_fraction - 0.5) < 4 * math.sqrt(0.25 / s.size)
    assert r.mean_S_out == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(EnsembleError):
        distill_ensemble(s, DistillParams(0.3), coin_flip=True)


def test_distill_errors():
    with pytest.raises(EnsembleError):
        distill_ensemble([], DistillParams(0.3))
    with pytest.raises(EnsembleError):
        distill_ensemble([1.2], DistillParams(0.3))


def test_deterministic_results():
    spec = EnsembleSpec("gaussian_alpha2", 0.8, 0.02, 3000, seed=8)
    a = distill_ensemble(sample_ensemble(spec), DistillParams(0.5))
    b = distill_ensemble(sample_ensemble(spec), DistillParams(0.5))
    assert a.delta_S == b.delta_S and np.array_equal(a.out_histogram, b.out_histogram)


def test_matched_delta_optimality():
    p = 0.8
    phis = np.linspace(0, math.pi / 2, 181)
    d = [distill_ensemble([p], DistillParams(f), bins=1).delta_S for f in phis]
    k = int(np.argmax(d))
    assert abs(phis[k] - math.acos(math.sqrt(p))) <= phis[1] - phis[0]
    best = distill_ensemble([p], DistillParams(math.acos(math.sqrt(p)))).delta_S
    assert best == pytest.approx(1 - h2(p), abs=1e-6)


def test_sweep_single_row_delta_limit():
    phis = np.linspace(0, math.pi / 4, 46)
    assert np.any(np.isclose(phis, math.pi / 6))
    g = sweep_grid(phis, [0.8113], 1e-6, 2000, seed=0)
    assert abs(g.optimal_phi_locus[0][1] - math.pi / 6) <= phis[1] - phis[0]


def test_sweep_identity_column_and_shapes():
    g = sweep_grid([math.pi / 4], [0.3, 0.6, 0.9], 0.01, 500, seed=0)
    assert g.delta_S_matrix.shape == (3, 1)
    assert np.allclose(g.delta_S_matrix, 0, atol=1e-12)
    assert [l[1] for l in g.optimal_phi_locus] == [phi for phi in g.phi_axis[g.argmax]]


def test_sweep_low_entropy_gains_more():
    g = sweep_grid(np.linspace(0, math.pi / 4, 30), [0.3, 0.9], 0.01, 5000, seed=1)
    assert g.row_max[0] > g.row_max[1]


def test_sweep_rows_are_position_keyed():
    # a row computed alone reproduces the same row inside a larger sweep
    phis = np.linspace(0.1, 0.7, 5)
    full = sweep_grid(phis, [0.3, 0.5, 0.7], 0.01, 800, seed=3)
    spec = EnsembleSpec("gaussian_alpha2", mean_alpha2_from_entropy(0.5), 0.01, 800, 3)
    row = [distill_ensemble(sample_ensemble(spec, 1), DistillParams(f), bins=1).delta_S for f in phis]
    assert np.array_equal(full.delta_S_matrix[1], row)


def test_sweep_axis_errors():
    with pytest.raises(EnsembleError):
        sweep_grid([0.5, 0.1], [0.5], 0.01, 10, 0)
    with pytest.raises(EnsembleError):
        sweep_grid([0.1], [], 0.01, 10, 0)
    with pytest.raises(EnsembleError):
        sweep_grid([0.1], [1.5], 0.01, 10, 0)


def test_calibration_delta_075():
    s = np.full(100_000, 0.75)
    prm, r = calibrate_and_distill(s, 0.1, 0.0, seed=4)
    assert abs(prm.phi - math.pi / 6) < 0.01
    assert abs(r.delta_S - (1 - S_075)) < 0.01
    assert r.n_pairs == 90_000


def test_calibration_maximal_ensemble():
    prm, r = calibrate_and_distill(np.full(50_000, 0.5), 0.1, 0.0, seed=1)
    assert abs(prm.phi - math.pi / 4) < 0.02
    assert abs(r.delta_S) < 1e-3


def test_calibration_consumes_pairs():
    s = np.arange(1, 11) / 11
    _, r = calibrate_and_distill(s, 0.3, 0.0, seed=0)
    assert r.n_pairs == 7
    with pytest.raises(EnsembleError):
        calibrate_and_distill(s, 0.95, 0.0, seed=0)
    with pytest.raises(EnsembleError):
        calibrate_and_distill(s, 1.0, 0.0, seed=0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 0.99), st.floats(0.0, math.pi / 2), st.integers(0, 2**32))
def test_out_mass_property(mean, phi, seed):
    s = sample_ensemble(EnsembleSpec("gaussian_alpha2", mean, 0.02, 500, seed=seed))
    r = distill_ensemble(s, DistillParams(phi))
    assert abs(r.out_mass - r.survival_fraction) < 1e-12
    assert 0 <= r.survival_fraction <= 1
    assert r.delta_S == pytest.approx(r.mean_S_out - r.mean_S_in, abs=1e-15)
    assert r.mean_S_in == pytest.approx(float(np.mean(binary_entropy(s))), abs=1e-12)
