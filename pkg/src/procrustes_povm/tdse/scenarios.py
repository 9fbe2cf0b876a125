"""Stage scripts realizing the local POVM on a single massive spin-1/2 particle.

Geometry along ``z`` in units of the spin shift ``z1``: the input ``i`` sits
at 0, the first beam splitter sends spin-down to ``s1 = -2 z1`` and spin-up
to ``s2 = +2 z1``; the second one splits each arm again into
``t1 = -3 z1, t2 = -z1, t3 = z1, t4 = 3 z1``. ``t2`` and ``t3`` carry the
``M1`` branch and are merged into ``p1`` at 0; the ``M2`` branch is left in
``t1`` (and ``t4``), labelled ``p2``.

Transport is diabatic: a trap displaced by half the travel distance is
switched on for half a trap period, which moves a packet at rest to the
mirror point of the displaced centre, again at rest.
"""
from __future__ import annotations

import math

import numpy as np

from ..distill import DistillParams, config_from_params, kraus_diagonals
from .field import SpinorField, init_gaussian
from .grid import Grid2D, PhysicalParams, TDSEError
from .potentials import Rect, hard_wall, harmonic_trap, spin_shift, zeeman_pulse
from .regions import conditional_spin_state
from .script import DtPolicy, Stage, StageScript, run_script

KINDS = ("trapped_povm", "free_mzi")
REGION_HALF_WIDTH = 4.0  # in units of the ground-state width
LABELS = ("i", "s1", "s2", "t1", "t2", "t3", "t4", "p1", "p2")


def label_positions(physical: PhysicalParams, params: DistillParams) -> dict[str, float]:
    z1 = physical.z1
    cfg = config_from_params(params)
    pos = {"i": 0.0, "s1": -2 * z1, "s2": 2 * z1, "t1": -3 * z1, "t2": -z1, "t3": z1, "t4": 3 * z1, "p1": 0.0}
    pos["p2"] = pos["t4"] if cfg.theta2 > cfg.theta1 else pos["t1"]
    return pos


def scenario_labels(physical: PhysicalParams, params: DistillParams) -> dict[str, Rect]:
    h = REGION_HALF_WIDTH * physical.ground_width
    return {k: Rect.around(0.0, z, h) for k, z in label_positions(physical, params).items()}


def scenario_grid(physical: PhysicalParams = PhysicalParams(), dx: float = 0.1, margin: float | None = None,
                  y_half: float | None = None) -> Grid2D:
    """Grid symmetric about the origin covering ``|z| <= 3 z1 + margin``."""
    w = physical.ground_width
    margin = 5 * REGION_HALF_WIDTH * w / 4 + 2 * w if margin is None else margin
    y_half = 8 * w if y_half is None else y_half
    return Grid2D.centered(y_half, 3 * physical.z1 + margin, dx)


def initial_field(grid: Grid2D, params: DistillParams, physical: PhysicalParams = PhysicalParams()) -> SpinorField:
    """Trap ground state at the input site carrying spinor ``(alpha, beta)``."""
    return init_gaussian(grid, (0.0, 0.0), physical.ground_width, spinor=(params.alpha, params.beta))


def target_spinor(params: DistillParams) -> np.ndarray:
    """Normalized ``M1 (alpha, beta)``: the ideal spin state at ``p1``."""
    m1, _ = kraus_diagonals(config_from_params(params))
    out = m1 * np.array([params.alpha, params.beta])
    n = np.linalg.norm(out)
    if n == 0:
        raise TDSEError("M1 annihilates the input spinor")
    return out / n


def _rz_areas(params: DistillParams, trim: float):
    """``exp(i A sigma_z)`` multiplies down by ``e^{iA}`` and up by ``e^{-iA}``."""
    c = config_from_params(params)
    return {"t1": c.phase3, "t4": -c.phase4, "t2": c.phase1, "t3": -c.phase2 + trim}


def _pulse(physical, axis, area, duration, region):
    if abs(area) < 1e-15:
        return []
    return [zeeman_pulse(physical, axis, area, duration, region=region)]


def _trapped(params: DistillParams, physical: PhysicalParams, pulse_time: float, hold_time: float,
             trim: float, p2_label: str) -> list[Stage]:
    z1 = physical.z1
    half = math.pi / physical.omega
    cfg = config_from_params(params)
    big = 1e3 * z1
    rz = _rz_areas(params, trim)

    def hold(*wells):
        return harmonic_trap(physical, wells=list(wells))

    stages = [
        Stage(half, [spin_shift(physical, shift=z1)], "a:split", ("i", "s1", "s2")),
        Stage(pulse_time, [hold(-2 * z1, 2 * z1)]
              + _pulse(physical, "x", math.pi / 2 - cfg.theta1, pulse_time, Rect(-big, big, -big, 0.0))
              + _pulse(physical, "x", math.pi / 2 - cfg.theta2, pulse_time, Rect(-big, big, 0.0, big)),
              "b1:rotate", ("s1", "s2")),
        Stage(half, [spin_shift(physical, wells=[(-2 * z1, z1 / 2), (2 * z1, z1 / 2)])], "b2:split",
              ("t1", "t2", "t3", "t4")),
        Stage(pulse_time, [hold(-3 * z1, -z1, z1, 3 * z1)]
              + _pulse(physical, "x", math.pi / 2, pulse_time, Rect(-big, big, -2 * z1, 2 * z1))
              + _pulse(physical, "z", rz["t1"], pulse_time, Rect(-big, big, -big, -2 * z1))
              + _pulse(physical, "z", rz["t4"], pulse_time, Rect(-big, big, 2 * z1, big)),
              "c1:flip", ("t1", "t2", "t3", "t4")),
        Stage(pulse_time, [hold(-3 * z1, -z1, z1, 3 * z1)]
              + _pulse(physical, "z", rz["t2"], pulse_time, Rect(-big, big, -2 * z1, 0.0))
              + _pulse(physical, "z", rz["t3"], pulse_time, Rect(-big, big, 0.0, 2 * z1)),
              "c2:phase", ("t1", "t2", "t3", "t4")),
        Stage(half, [spin_shift(physical, wells=[(-3 * z1, 0.0), (-z1, -z1 / 2), (z1, -z1 / 2), (3 * z1, 0.0)])],
              "c3:merge", ("p1", "p2", p2_other(p2_label))),
        Stage(hold_time, [hold(-3 * z1, 0.0, 3 * z1)], "d:hold", ("p1", "p2", p2_other(p2_label))),
    ]
    return stages


def p2_other(p2_label: str) -> str:
    return "t4" if p2_label == "t1" else "t1"


def _free(params: DistillParams, physical: PhysicalParams, pulse_time: float, hold_time: float,
          trim: float, corridor: float) -> list[Stage]:
    """Same sequence with free flight in a hard-walled corridor instead of traps.

    Each transport is a pair of opposite spin-dependent force kicks of
    ``sqrt(2)/omega`` each, covering the same distance as the trapped move.
    """
    z1 = physical.z1
    kick = math.sqrt(2) / physical.omega
    cfg = config_from_params(params)
    big = 1e3 * z1
    rz = _rz_areas(params, trim)
    wall = hard_wall(physical, channel=Rect(-corridor, corridor, -big, big))

    def move(shift, name, regions):
        return [
            Stage(kick, [wall, spin_shift(physical, shift=shift, confine=False)], name + "+", regions),
            Stage(kick, [wall, spin_shift(physical, shift=-shift, confine=False)], name + "-", regions),
        ]

    t_all = ("t1", "t2", "t3", "t4")
    return [
        *move(z1, "a:split", ("i", "s1", "s2")),
        Stage(pulse_time, [wall]
              + _pulse(physical, "x", math.pi / 2 - cfg.theta1, pulse_time, Rect(-big, big, -big, 0.0))
              + _pulse(physical, "x", math.pi / 2 - cfg.theta2, pulse_time, Rect(-big, big, 0.0, big)),
              "b1:rotate", ("s1", "s2")),
        *move(z1 / 2, "b2:split", t_all),
        Stage(pulse_time, [wall]
              + _pulse(physical, "x", math.pi / 2, pulse_time, Rect(-big, big, -2 * z1, 2 * z1))
              + _pulse(physical, "z", rz["t1"], pulse_time, Rect(-big, big, -big, -2 * z1))
              + _pulse(physical, "z", rz["t4"], pulse_time, Rect(-big, big, 2 * z1, big)),
              "c1:flip", t_all),
        Stage(pulse_time, [wall]
              + _pulse(physical, "z", rz["t2"], pulse_time, Rect(-big, big, -2 * z1, 0.0))
              + _pulse(physical, "z", rz["t3"], pulse_time, Rect(-big, big, 0.0, 2 * z1)),
              "c2:phase", t_all),
        *move(-z1 / 2, "c3:merge", ("p1", "t1", "t4")),
        Stage(hold_time, [wall], "d:hold", ("p1", "t1", "t4")),
    ]


def scenario(
    kind: str,
    params: DistillParams,
    physical: PhysicalParams = PhysicalParams(),
    pulse_time: float = 0.5,
    hold_time: float = 1.0,
    trim: float = 0.0,
    corridor: float | None = None,
) -> StageScript:
    """Stage script for ``trapped_povm`` or ``free_mzi``.

    ``trim`` is an extra sigma_z area on the ``t3`` arm compensating a
    residual relative phase at recombination (see :func:`calibrate_trim`).
    ``corridor`` is the free-flight channel half-width (default 4 ground widths).
    """
    if kind not in KINDS:
        raise TDSEError(f"unknown scenario {kind!r}; expected one of {KINDS}")
    if not (pulse_time > 0 and hold_time > 0):
        raise TDSEError("pulse_time and hold_time must be positive")
    labels = scenario_labels(physical, params)
    p2 = "t4" if labels["p2"] == labels["t4"] else "t1"
    if kind == "trapped_povm":
        stages = _trapped(params, physical, pulse_time, hold_time, trim, p2)
        final = ("p1", "p2", p2_other(p2))
    else:
        corridor = REGION_HALF_WIDTH * physical.ground_width if corridor is None else corridor
        stages = _free(params, physical, pulse_time, hold_time, trim, corridor)
        final = ("p1", "t1", "t4")
    return StageScript(tuple(stages), labels, final)


def calibrate_trim(grid: Grid2D, physical: PhysicalParams = PhysicalParams(),
                   dt_policy: DtPolicy = DtPolicy(), **kw) -> float:
    """Residual relative phase at ``p1`` from one pre-run with the identity POVM.

    With ``phi = pi/4, gamma = 0`` the ideal output equals the input
    ``(1, 1)/sqrt(2)``; the measured ``arg(c_up / c_down)`` is returned and
    can be passed back as ``trim``.
    """
    params = DistillParams(math.pi / 4, 0.0)
    script = scenario("trapped_povm", params, physical, **kw)
    traj = run_script(initial_field(grid, params, physical), script, physical, dt_policy)
    c = conditional_spin_state(traj.final, script.labels["p1"])
    return float(np.angle(c[1] / c[0]))
