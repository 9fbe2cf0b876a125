"""Shared, session-cached scenario runs (each takes tens of seconds)."""
import math
import time
from collections import namedtuple

import pytest

from procrustes_povm.distill import DistillParams
from procrustes_povm.tdse import PhysicalParams
from procrustes_povm.tdse.scenarios import initial_field, scenario, scenario_grid
from procrustes_povm.tdse.script import DtPolicy, run_script

PHYS = PhysicalParams()
REF_PARAMS = DistillParams(math.pi / 6, math.pi / 2)


# acceptance criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
N_CRITERIA = 10

Run = namedtuple("Run", "script traj seconds")


def _run(kind, params, dx=0.1, **kw):
    grid = scenario_grid(PHYS, dx)
    script = scenario(kind, params, PHYS, **kw)
    t0 = time.perf_counter()
    traj = run_script(initial_field(grid, params, PHYS), script, PHYS, DtPolicy(0.5), norm_every=10)
    return Run(script, traj, time.perf_counter() - t0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        ok, detail = ACCEPTANCE.get(n, (False, "not run"))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def trapped_run():
    return _run("trapped_povm", REF_PARAMS)


@pytest.fixture(scope="session")
def free_run():
    return _run("free_mzi", REF_PARAMS)


@pytest.fixture(scope="session")
def identity_run():
    # phi = pi/4, gamma = 0: M1 is the identity, also the trim-calibration state
    return _run("trapped_povm", DistillParams(math.pi / 4, 0.0))
