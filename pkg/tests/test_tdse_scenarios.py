import math

import numpy as np
import pytest

from procrustes_povm.distill import DistillParams
from procrustes_povm.tdse import Grid2D, TDSEError, conditional_spin_state, spin_fidelity
from procrustes_povm.tdse.scenarios import initial_field, label_positions, scenario, scenario_grid, target_spinor
from procrustes_povm.tdse.script import DtPolicy, run_script, stage_bound

from conftest import REF_PARAMS, PHYS

pytestmark = pytest.mark.slow

LEAK = "leakage"


def test_target_spinor_is_m1_on_input():
    # oracle: M1 = diag(tan phi, e^{-i gamma}) for phi <= pi/4
    p = REF_PARAMS
    raw = np.array([math.tan(p.phi) * p.alpha, np.exp(-1j * p.gamma) * p.beta])
    assert spin_fidelity(target_spinor(p), raw) == pytest.approx(1, abs=1e-14)
    assert np.allclose(target_spinor(DistillParams(math.pi / 4, 0.3)), [math.sqrt(0.5), math.sqrt(0.5)])


def test_scenario_structure():
    s = scenario("trapped_povm", REF_PARAMS, PHYS)
    assert [st.name for st in s.stages] == ["a:split", "b1:rotate", "b2:split", "c1:flip", "c2:phase", "c3:merge", "d:hold"]
    pos = label_positions(PHYS, REF_PARAMS)
    z1 = PHYS.z1
    assert [pos[k] for k in ("s1", "s2", "t1", "t2", "t3", "t4")] == [-2 * z1, 2 * z1, -3 * z1, -z1, z1, 3 * z1]
    assert s.final_regions == ("p1", "p2", "t4") and pos["p2"] == pos["t1"]
    f = scenario("free_mzi", REF_PARAMS, PHYS)
    assert s.duration > 0 and f.duration > 0
    assert not any(t.kind == "harmonic_trap" for st in f.stages for t in st.terms)


def test_scenario_errors():
    with pytest.raises(TDSEError):
        scenario("ring", REF_PARAMS, PHYS)
    with pytest.raises(TDSEError):
        scenario("trapped_povm", REF_PARAMS, PHYS, pulse_time=0.0)


def test_trapped_povm_reference_state(trapped_run):
    script, traj, _ = trapped_run
    probs = traj.stages[-1].probabilities
    assert probs["p1"] == pytest.approx(0.5, abs=0.01)
    assert probs["p1"] + probs["p2"] >= 0.999
    c = conditional_spin_state(traj.final, script.labels["p1"])
    assert spin_fidelity(c, target_spinor(REF_PARAMS)) >= 0.995


def test_trapped_povm_norm_conserved(trapped_run):
    _, traj, _ = trapped_run
    assert traj.max_norm_drift < 1e-6


def test_identity_povm(identity_run):
    script, traj, _ = identity_run
    prm = DistillParams(math.pi / 4, 0.0)
    c = conditional_spin_state(traj.final, script.labels["p1"])
    assert spin_fidelity(c, (prm.alpha, prm.beta)) >= 0.995
    assert traj.stages[-1].probabilities["p1"] == pytest.approx(1.0, abs=1e-3)


def test_trim_calibration_is_small(identity_run):
    # the symmetric geometry leaves (almost) no residual phase to trim
    script, traj, _ = identity_run
    c = conditional_spin_state(traj.final, script.labels["p1"])
    assert abs(np.angle(c[1] / c[0])) < 1e-2


def test_free_mzi_leaks_more(trapped_run, free_run):
    lt = trapped_run.traj.stages[-1].probabilities[LEAK]
    lf = free_run.traj.stages[-1].probabilities[LEAK]
    assert lf > lt


@pytest.mark.xfail(strict=True, reason="gradient kicks on the dispersed free-flight packet drive the "
                                        "Visscher norm off by ~4e-6 at dt = 0.5 dt_max")
def test_free_mzi_norm_conserved(free_run):
    assert free_run.traj.max_norm_drift < 1e-6


def _offset_grid(dx, off=0.37):
    # shifted off the mirror-symmetric lattice so the deficit is not cancelled by symmetry
    g = scenario_grid(PHYS, dx)
    return Grid2D(g.nx, g.ny, dx, dx, (g.origin[0] + off * dx, g.origin[1] + off * dx))


def test_convergence_halving_dx_and_dt():
    s = scenario("trapped_povm", REF_PARAMS, PHYS)
    fine = _offset_grid(0.1)
    dt_fine = 0.5 * min(stage_bound(st, fine, PHYS) for st in s.stages)
    deficits = []
    for grid, dt in ((_offset_grid(0.2), 2 * dt_fine), (fine, dt_fine)):
        traj = run_script(initial_field(grid, REF_PARAMS, PHYS), s, PHYS, DtPolicy(dt=dt))
        c = conditional_spin_state(traj.final, s.labels["p1"])
        deficits.append(1 - spin_fidelity(c, target_spinor(REF_PARAMS)))
    coarse, fine_d = deficits
    assert coarse > 0
    assert fine_d <= coarse / 2
