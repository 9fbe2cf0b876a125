"""Stage scripts: a sequence of piecewise-constant potential configurations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from typing import Mapping, Sequence

import numpy as np

from .field import SpinorField
from .grid import PhysicalParams, TDSEError
from .potentials import PotentialTerm, Rect, SampledPotential, max_stable_dt, sample_potential
from .regions import check_disjoint, region_probabilities
from .stepper import Propagator, expectation_energy, restagger


@dataclass(frozen=True)
class Stage:
    """``terms`` act for ``duration``; their time arguments are local to the stage.

    ``regions`` names the labels meaningful at the end of the stage
    (``None`` means all of the script's labels).
    """

    duration: float
    terms: tuple[PotentialTerm, ...]
    name: str = ""
    regions: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise TDSEError(f"stage {self.name!r}: duration must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class StageScript:
    stages: tuple[Stage, ...]
    labels: Mapping[str, Rect] = dfield(default_factory=dict)
    final_regions: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        for st in self.stages:
            self.active(st.regions)
        self.active(self.final_regions)

    def active(self, names: Sequence[str] | None) -> dict[str, Rect]:
        if names is None:
            sel = dict(self.labels)
        else:
            missing = [n for n in names if n not in self.labels]
            if missing:
                raise TDSEError(f"unknown region labels {missing}")
            sel = {n: self.labels[n] for n in names}
        check_disjoint(sel)
        return sel

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.stages)


@dataclass(frozen=True)
class DtPolicy:
    """Fixed ``dt`` or ``fraction`` of the smallest stability bound over the script.

    Each stage runs a whole number of steps, so its own step is the largest
    value not above the target that divides the stage duration.
    """

    fraction: float = 0.5
    dt: float | None = None

    def __post_init__(self) -> None:
        if self.dt is not None and not self.dt > 0:
            raise TDSEError("dt must be positive")
        if not 0 < self.fraction <= 1:
            raise TDSEError("fraction must lie in (0, 1]")


@dataclass
class Snapshot:
    t: float
    stage: str
    field: SpinorField


@dataclass
class StageRecord:
    name: str
    t_end: float
    dt: float
    steps: int
    energy_reference: float
    probabilities: dict[str, float]
    norm: float


@dataclass
class Trajectory:
    final: SpinorField
    snapshots: list[Snapshot]
    stages: list[StageRecord]
    norm_times: np.ndarray
    norms: np.ndarray

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0))) if len(self.norms) else 0.0


class _StageSampler:
    """Samples a stage's potential, reusing the last grid sample when nothing changed."""

    def __init__(self, terms: Sequence[PotentialTerm], grid, shift: float = 0.0):
        self.terms = list(terms)
        self.grid = grid
        self.shift = shift
        self.dynamic = any(t.time_dependent for t in self.terms)
        self._key = None
        self._sample: SampledPotential | None = None

    def key(self, t: float):
        env = tuple(term._env(t) for term in self.terms)
        return env + ((t,) if self.dynamic else ())

    def __call__(self, t: float) -> SampledPotential:
        k = self.key(t)
        if k != self._key:
            self._sample = sample_potential(self.terms, self.grid, t).shifted(self.shift)
            self._key = k
        return self._sample

    def is_static(self, t0: float, t1: float, probes: int = 9) -> bool:
        if self.dynamic:
            return False
        k0 = self.key(t0)
        return all(self.key(t) == k0 for t in np.linspace(t0, t1, probes))


def stage_bound(stage: Stage, grid, physical: PhysicalParams, probes: int = 5) -> float:
    times = np.linspace(0.0, stage.duration, probes)
    return max_stable_dt(grid, list(stage.terms), physical, times=times)


def run_script(
    initial: SpinorField,
    script: StageScript,
    physical: PhysicalParams = PhysicalParams(),
    dt_policy: DtPolicy = DtPolicy(),
    snapshot_every: int | None = None,
    norm_every: int = 50,
    energy_reference: bool = True,
    backend: str | None = None,
) -> Trajectory:
    """Evolve ``initial`` through every stage of ``script``.

    With ``energy_reference`` each stage is propagated with ``H - E`` where
    ``E`` is the packet's mean energy at the stage start; the removed global
    phase is kept in ``field.phase`` so :meth:`SpinorField.psi` is unchanged.
    Snapshots are taken every ``snapshot_every`` steps and at each stage end.
    """
    grid = initial.grid
    for name, r in script.labels.items():
        if not r.inside(grid):
            raise TDSEError(f"region {name!r} extends outside the grid")
    if not script.stages:
        f = initial.copy()
        return Trajectory(f, [], [], np.array([initial.t]), np.array([initial.norm()]))
    bounds = [stage_bound(s, grid, physical) for s in script.stages]
    if dt_policy.dt is not None:
        target = dt_policy.dt
    else:
        target = dt_policy.fraction * min(bounds)

    prop = Propagator(initial.copy(), physical, backend)
    snaps: list[Snapshot] = []
    records: list[StageRecord] = []
    norm_t = [initial.t]
    norms = [initial.norm()]
    chunk = max(1, min(norm_every, snapshot_every or norm_every))

    for idx, stage in enumerate(script.stages):
        label = stage.name or f"stage{idx}"
        n = max(1, math.ceil(stage.duration / target - 1e-9))
        dt = stage.duration / n
        if dt > bounds[idx] * (1 + 1e-12):
            raise TDSEError(f"stage {label!r}: dt={dt:.3e} exceeds the stability bound {bounds[idx]:.3e}")
        t0 = prop.field.t
        raw = _StageSampler(stage.terms, grid)
        e_ref = expectation_energy(prop.field, raw(0.0), physical) if energy_reference else 0.0
        sampler = _StageSampler(stage.terms, grid, e_ref)
        # switching H at fixed integer-time (u, v): rebuild the half-step pair
        prop.field = restagger(prop.field, sampler(0.0), dt, physical)
        static = sampler.is_static(0.0, stage.duration)
        done = 0
        while done < n:
            m = min(chunk - (done % chunk), n - done)
            if static:
                prop.advance_static(sampler(0.5 * stage.duration), dt, m)
            else:
                for _ in range(m):
                    tl = prop.field.t - t0
                    prop.advance(sampler(tl + 0.5 * dt), sampler(tl + dt), dt)
            done += m
            if done % norm_every == 0 or done == n:
                norm_t.append(prop.field.t)
                norms.append(prop.field.norm())
            if snapshot_every and (done % snapshot_every == 0) and done != n:
                snaps.append(Snapshot(prop.field.t, label, _with_phase(prop.field, e_ref * (prop.field.t - t0) / physical.hbar)))
        prop.field.t = t0 + stage.duration
        prop.field.phase += e_ref * stage.duration / physical.hbar
        f = prop.field
        snaps.append(Snapshot(f.t, label, f.copy()))
        probs = region_probabilities(f, script.active(stage.regions)) if script.labels else {}
        records.append(StageRecord(label, f.t, dt, n, e_ref, probs, f.norm()))
    return Trajectory(prop.field.copy(), snaps, records, np.array(norm_t), np.array(norms))


def _with_phase(f: SpinorField, extra: float) -> SpinorField:
    g = f.copy()
    g.phase += extra
    return g
