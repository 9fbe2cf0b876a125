"""Potential terms: scalar energies plus 2x2 Hermitian spin couplings.

Spin component 0 is spin-down (``|0>``), component 1 spin-up (``|1>``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .grid import Grid2D, PhysicalParams, TDSEError

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
WALL_FACTOR = 1e3
STABILITY_SAFETY = 0.5

ScalarFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
CouplingFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[y_lo, y_hi] x [z_lo, z_hi]``."""

    y_lo: float
    y_hi: float
    z_lo: float
    z_hi: float

    def __post_init__(self) -> None:
        if not (self.y_lo < self.y_hi and self.z_lo < self.z_hi):
            raise TDSEError(f"degenerate rectangle {self}")

    @classmethod
    def around(cls, y: float, z: float, half_y: float, half_z: float | None = None) -> Rect:
        half_z = half_y if half_z is None else half_z
        return cls(y - half_y, y + half_y, z - half_z, z + half_z)

    def mask(self, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        return (y >= self.y_lo) & (y <= self.y_hi) & (z >= self.z_lo) & (z <= self.z_hi)

    def overlaps(self, other: Rect) -> bool:
        return (self.y_lo < other.y_hi and other.y_lo < self.y_hi
                and self.z_lo < other.z_hi and other.z_lo < self.z_hi)

    def inside(self, grid: Grid2D) -> bool:
        y0, y1, z0, z1 = grid.extent
        eps = 1e-9
        return self.y_lo >= y0 - eps and self.y_hi <= y1 + eps and self.z_lo >= z0 - eps and self.z_hi <= z1 + eps

    def as_list(self) -> list[float]:
        return [self.y_lo, self.y_hi, self.z_lo, self.z_hi]


@dataclass(frozen=True)
class TermSample:
    scalar: np.ndarray | None
    coupling: np.ndarray | None  # (nx, ny, 2, 2) complex


@dataclass(eq=False)
class PotentialTerm:
    """One additive piece of the Hamiltonian's potential.

    ``scalar_fn(y, z, t)`` returns a real energy, ``coupling_fn(y, z, t)`` a
    ``(..., 2, 2)`` Hermitian matrix. If ``envelope`` is given both are
    multiplied by ``envelope(t)`` and the spatial parts are cached per grid.
    """

    kind: str
    scalar_fn: ScalarFn | None = None
    coupling_fn: CouplingFn | None = None
    envelope: Callable[[float], float] | None = None
    time_dependent: bool = False
    params: dict[str, Any] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.coupling_fn is not None:
            ys, zs = np.meshgrid(np.linspace(-3, 3, 5), np.linspace(-3, 3, 5), indexing="ij")
            for t in (0.0, 0.5):
                m = np.asarray(self.coupling_fn(ys, zs, t))
                if not np.allclose(m, np.swapaxes(m, -1, -2).conj(), atol=1e-12):
                    raise TDSEError(f"{self.kind}: spin coupling is not Hermitian")

    @property
    def is_static(self) -> bool:
        return not self.time_dependent and self.envelope is None

    def _env(self, t: float) -> float:
        return 1.0 if self.envelope is None else float(self.envelope(t))

    def scalar(self, y, z, t: float = 0.0) -> np.ndarray:
        if self.scalar_fn is None:
            return np.zeros(np.broadcast(y, z).shape)
        return self._env(t) * np.asarray(self.scalar_fn(y, z, t), dtype=float)

    def spin_coupling(self, y, z, t: float = 0.0) -> np.ndarray:
        if self.coupling_fn is None:
            return np.zeros(np.broadcast(y, z).shape + (2, 2), dtype=complex)
        return self._env(t) * np.asarray(self.coupling_fn(y, z, t), dtype=complex)

    def evaluate(self, grid: Grid2D, t: float = 0.0) -> TermSample:
        if self.time_dependent:
            y, z = grid.mesh()
            s = None if self.scalar_fn is None else np.asarray(self.scalar_fn(y, z, t), dtype=float)
            c = None if self.coupling_fn is None else np.asarray(self.coupling_fn(y, z, t), dtype=complex)
        else:
            if grid not in self._cache:
                y, z = grid.mesh()
                s = None if self.scalar_fn is None else np.broadcast_to(
                    np.asarray(self.scalar_fn(y, z, 0.0), dtype=float), grid.shape).copy()
                c = None if self.coupling_fn is None else np.broadcast_to(
                    np.asarray(self.coupling_fn(y, z, 0.0), dtype=complex), grid.shape + (2, 2)).copy()
                self._cache[grid] = (s, c)
            s, c = self._cache[grid]
        e = self._env(t)
        if e != 1.0:
            s = None if s is None else e * s
            c = None if c is None else e * c
        return TermSample(s, c)


@dataclass(eq=False)
class SampledPotential:
    """Potential on the grid in the layout the leapfrog kernels take.

    ``vd[..., i]`` is the full diagonal energy seen by spin component ``i``;
    the off-diagonal coupling is ``W_01 = wr + 1j * wi`` (``None`` when zero).
    """

    vd: np.ndarray
    wr: np.ndarray | None
    wi: np.ndarray | None
    scalar_max: float
    coupling_max: float

    def shifted(self, energy: float) -> SampledPotential:
        if energy == 0.0:
            return self
        return SampledPotential(self.vd - energy, self.wr, self.wi, self.scalar_max, self.coupling_max)


def sample_potential(terms: Iterable[PotentialTerm], grid: Grid2D, t: float = 0.0) -> SampledPotential:
    scalar = np.zeros(grid.shape)
    coup = None
    for term in terms:
        s = term.evaluate(grid, t)
        if s.scalar is not None:
            scalar = scalar + s.scalar
        if s.coupling is not None:
            coup = s.coupling if coup is None else coup + s.coupling
    if not np.all(np.isfinite(scalar)) or (coup is not None and not np.all(np.isfinite(coup))):
        raise TDSEError("potential is unbounded (non-finite samples) on the grid")
    vd = np.repeat(scalar[..., None], 2, axis=-1)
    wr = wi = None
    cmax = 0.0
    if coup is not None:
        d0, d1 = coup[..., 0, 0].real, coup[..., 1, 1].real
        vd[..., 0] += d0
        vd[..., 1] += d1
        w = coup[..., 0, 1]
        if np.any(w.real != 0):
            wr = np.ascontiguousarray(w.real)
        if np.any(w.imag != 0):
            wi = np.ascontiguousarray(w.imag)
        # spectral norm of a Hermitian 2x2
        cmax = float(np.max(np.abs(0.5 * (d0 + d1)) + np.sqrt((0.5 * (d0 - d1)) ** 2 + np.abs(w) ** 2)))
    return SampledPotential(np.ascontiguousarray(vd), wr, wi, float(np.max(np.abs(scalar))), cmax)


def kinetic_bound(grid: Grid2D, physical: PhysicalParams) -> float:
    cx, cy = physical.kinetic_coefficients(grid)
    return 4.0 * (cx + cy)


def max_stable_dt(
    grid: Grid2D,
    potential: Sequence[PotentialTerm] | SampledPotential,
    physical: PhysicalParams = PhysicalParams(),
    times: Sequence[float] = (0.0,),
    safety: float = STABILITY_SAFETY,
) -> float:
    """``safety * hbar / E_max`` with ``E_max = max|V| + max||W|| + (hbar^2/2m)(4/dx^2 + 4/dy^2)``."""
    if isinstance(potential, SampledPotential):
        samples = [potential]
    else:
        samples = [sample_potential(potential, grid, t) for t in times]
    e_max = max(s.scalar_max + s.coupling_max for s in samples) + kinetic_bound(grid, physical)
    return safety * physical.hbar / e_max


# --------------------------------------------------------------------------- builders


def _wells_arg(wells, z0, default_shift):
    if wells is None:
        return [(float(z0), float(default_shift))]
    out = []
    for w in wells:
        if isinstance(w, (int, float)):
            out.append((float(w), float(default_shift)))
        else:
            out.append((float(w[0]), float(w[1])))
    if not out:
        raise TDSEError("need at least one well")
    return out


def _min_sq(z: np.ndarray, centers: Sequence[float]) -> np.ndarray:
    d = None
    for c in centers:
        dc = (z - c) ** 2
        d = dc if d is None else np.minimum(d, dc)
    return d


def harmonic_trap(physical: PhysicalParams, y0: float = 0.0, z0: float = 0.0,
                  wells: Sequence[float] | None = None, omega: float | None = None) -> PotentialTerm:
    """``1/2 m w^2 ((y-y0)^2 + (z-z0)^2)``; several ``wells`` along z give the lower envelope."""
    w = physical.omega if omega is None else omega
    k = physical.mass * w**2
    centers = [z0] if wells is None else [float(c) for c in wells]

    def scalar(y, z, t):
        return 0.5 * k * ((y - y0) ** 2 + _min_sq(z, centers))

    return PotentialTerm("harmonic_trap", scalar, params={"y0": y0, "wells": centers, "omega": w})


def spin_shift(
    physical: PhysicalParams,
    shift: float | None = None,
    y0: float = 0.0,
    z0: float = 0.0,
    wells: Sequence[float | tuple[float, float]] | None = None,
    mode: str = "diabatic",
    ramp_time: float | None = None,
    confine: bool = True,
) -> PotentialTerm:
    """Trap whose minimum sits at ``z0 + shift`` for spin-up and ``z0 - shift`` for spin-down.

    ``wells`` lists ``(z0, shift)`` pairs for several independent wells.
    ``mode="adiabatic"`` ramps every shift linearly from 0 over ``ramp_time``.
    ``confine=False`` keeps only the spin-dependent gradient
    ``-/+ m w^2 shift (z - z0)`` (no electric trap), which kicks the two spin
    components apart.
    """
    default = physical.z1 if shift is None else shift
    wl = _wells_arg(wells, z0, default)
    k = physical.mass * physical.omega**2
    if mode not in ("diabatic", "adiabatic"):
        raise TDSEError(f"unknown switching mode {mode!r}")
    if mode == "adiabatic" and not (ramp_time and ramp_time > 0):
        raise TDSEError("adiabatic mode needs a positive ramp_time")
    if not confine and len(wl) != 1:
        raise TDSEError("gradient-only shift takes a single reference point")

    def ramp(t):
        return 1.0 if mode == "diabatic" else min(max(t / ramp_time, 0.0), 1.0)

    def per_spin(y, z, t):
        r = ramp(t)
        if confine:
            vdn = 0.5 * k * ((y - y0) ** 2 + _min_sq(z, [c - s * r for c, s in wl]))
            vup = 0.5 * k * ((y - y0) ** 2 + _min_sq(z, [c + s * r for c, s in wl]))
        else:
            (c, s), = wl
            g = k * s * r * (z - c) + 0.0 * y
            vdn, vup = g, -g
        return vdn, vup

    def scalar(y, z, t):
        vdn, vup = per_spin(y, z, t)
        return 0.5 * (vdn + vup)

    def coupling(y, z, t):
        vdn, vup = per_spin(y, z, t)
        half = 0.5 * (vdn - vup)
        out = np.zeros(np.shape(half) + (2, 2), dtype=complex)
        out[..., 0, 0] = half
        out[..., 1, 1] = -half
        return out

    return PotentialTerm(
        "spin_shift", scalar, coupling, time_dependent=(mode == "adiabatic"),
        params={"wells": wl, "y0": y0, "mode": mode, "ramp_time": ramp_time, "confine": confine},
    )


def pulse_envelope(area: float, duration: float, t_start: float = 0.0, shape: str = "tophat",
                   hbar: float = 1.0) -> Callable[[float], float]:
    """``lambda(t)`` with ``integral lambda dt = hbar * area``."""
    if not duration > 0:
        raise TDSEError("pulse duration must be positive")
    t_end = t_start + duration
    if shape == "tophat":
        lam = hbar * area / duration

        def env(t):
            return lam if t_start <= t <= t_end else 0.0
    elif shape == "sin2":
        amp = 2.0 * hbar * area / duration

        def env(t):
            if t_start <= t <= t_end:
                return amp * math.sin(math.pi * (t - t_start) / duration) ** 2
            return 0.0
    else:
        raise TDSEError(f"unknown envelope {shape!r}")
    return env


def zeeman_pulse(
    physical: PhysicalParams,
    axis: str,
    area: float,
    duration: float,
    t_start: float = 0.0,
    envelope: str = "tophat",
    region: Rect | None = None,
) -> PotentialTerm:
    """Uniform field pulse realizing ``exp(i * area * sigma_axis)`` on the spin.

    The coupling is ``-lambda(t) sigma_axis`` inside ``region`` (everywhere if
    ``None``), so that ``exp(-i H t / hbar)`` rotates by ``+area``.
    """
    if axis not in PAULI:
        raise TDSEError(f"unknown Pauli axis {axis!r}")
    if not math.isfinite(area):
        raise TDSEError("pulse area must be finite")
    sigma = PAULI[axis]

    def coupling(y, z, t):
        base = -np.ones(np.broadcast(y, z).shape)
        if region is not None:
            base = base * region.mask(y, z)
        return base[..., None, None] * sigma

    env = pulse_envelope(area, duration, t_start, envelope, physical.hbar)
    return PotentialTerm(
        "zeeman_pulse", None, coupling, envelope=env,
        params={"axis": axis, "area": area, "duration": duration, "t_start": t_start,
                "envelope": envelope, "region": None if region is None else region.as_list()},
    )


def hard_wall(physical: PhysicalParams, walls: Sequence[Rect] = (), channel: Rect | None = None,
              height: float | None = None) -> PotentialTerm:
    """Finite barrier of ``height`` (default ``1e3 hbar omega``) on ``walls`` and outside ``channel``."""
    h = WALL_FACTOR * physical.hbar * physical.omega if height is None else height
    if not h > 0:
        raise TDSEError("wall height must be positive")

    def scalar(y, z, t):
        blocked = np.zeros(np.broadcast(y, z).shape, dtype=bool)
        for r in walls:
            blocked |= r.mask(y, z)
        if channel is not None:
            blocked |= ~channel.mask(y, z)
        return h * blocked

    return PotentialTerm("hard_wall", scalar, params={
        "height": h, "walls": [r.as_list() for r in walls],
        "channel": None if channel is None else channel.as_list()})


_BUILDERS = {
    "harmonic_trap": harmonic_trap,
    "spin_shift": spin_shift,
    "zeeman_pulse": zeeman_pulse,
    "hard_wall": hard_wall,
}


def potential_term(kind: str, physical: PhysicalParams = PhysicalParams(), **parameters) -> PotentialTerm:
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise TDSEError(f"unknown potential kind {kind!r}; expected one of {sorted(_BUILDERS)}") from None
    return builder(physical, **parameters)


def constant_potential(value: float) -> PotentialTerm:
    return PotentialTerm("constant", lambda y, z, t: np.full(np.broadcast(y, z).shape, float(value)),
                         params={"value": value})
