"""Staggered leapfrog propagation of a :class:`SpinorField`.

One step maps ``(u^n, v^{n+1/2})`` to ``(u^{n+1}, v^{n+3/2})``: ``u`` is
advanced with the Hamiltonian sampled at ``t + dt/2`` and ``v`` with the one
at ``t + dt``. An unstaggered field (fresh from :func:`init_gaussian`) is
bootstrapped with a centred half step, ``v^{+-1/2} = v^0 +- (dt/2hbar)(-Re(H) u + Im(H) v)``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _leapfrog_py
from .field import SpinorField
from .grid import Grid2D, PhysicalParams, TDSEError
from .kernels import get_backend
from .potentials import PotentialTerm, SampledPotential, max_stable_dt, sample_potential

_DT_RTOL = 1e-12


def _imag_apply(f: np.ndarray, wi: np.ndarray | None) -> np.ndarray | None:
    if wi is None:
        return None
    out = np.empty_like(f)
    out[..., 0] = wi * f[..., 1]
    out[..., 1] = -wi * f[..., 0]
    out[0, :] = out[-1, :] = 0
    out[:, 0] = out[:, -1] = 0
    return out


def half_increment(u: np.ndarray, v: np.ndarray, sp: SampledPotential, cx: float, cy: float, a: float) -> np.ndarray:
    """``(a/2) (-Re(H) u + Im(H) v)``: half a leapfrog step of ``v``."""
    d = -_leapfrog_py.apply_h(u, sp.vd, sp.wr, cx, cy)
    iv = _imag_apply(v, sp.wi)
    if iv is not None:
        d += iv
    return 0.5 * a * d


def expectation_energy(field: SpinorField, sp: SampledPotential, physical: PhysicalParams) -> float:
    """``<psi|H|psi> / <psi|psi>`` using the integer-time field."""
    cx, cy = physical.kinetic_coefficients(field.grid)
    u, v = field.u, field.v_now()
    e = np.vdot(u, _leapfrog_py.apply_h(u, sp.vd, sp.wr, cx, cy)) + np.vdot(v, _leapfrog_py.apply_h(v, sp.vd, sp.wr, cx, cy))
    iu = _imag_apply(u, sp.wi)
    if iu is not None:
        e += 2 * np.vdot(v, iu)
    n = np.vdot(u, u) + np.vdot(v, v)
    if n == 0:
        return 0.0
    return float(e / n)


def restagger(field: SpinorField, sp: SampledPotential, dt: float, physical: PhysicalParams) -> SpinorField:
    """Rebuild the half-step pair around the integer-time ``v`` for a new ``H`` or ``dt``."""
    cx, cy = physical.kinetic_coefficients(field.grid)
    v0 = field.v_now()
    d = half_increment(field.u, v0, sp, cx, cy, dt / physical.hbar)
    return SpinorField(field.grid, field.u.copy(), v0 + d, t=field.t, dt=dt, v_prev=v0 - d, phase=field.phase)


bootstrap = restagger


class Propagator:
    """Steps a field in place; used by :func:`step` and the stage runner."""

    def __init__(self, field: SpinorField, physical: PhysicalParams = PhysicalParams(), backend: str | None = None):
        self.field = field
        self.physical = physical
        self.cx, self.cy = physical.kinetic_coefficients(field.grid)
        self.kernels = get_backend(backend)

    def ensure_staggered(self, sp: SampledPotential, dt: float) -> None:
        f = self.field
        if not f.staggered or abs(f.dt - dt) > _DT_RTOL * dt:
            self.field = restagger(f, sp, dt, self.physical)

    def advance(self, sp_half: SampledPotential, sp_full: SampledPotential, dt: float) -> None:
        """One step; ``sp_half`` at ``t + dt/2`` drives ``u``, ``sp_full`` at ``t + dt`` drives ``v``."""
        f = self.field
        a = dt / self.physical.hbar
        f.v_prev = f.v.copy()
        self.kernels.update_u(f.u, f.v, sp_half.vd, sp_half.wr, sp_half.wi, self.cx, self.cy, a)
        self.kernels.update_v(f.u, f.v, sp_full.vd, sp_full.wr, sp_full.wi, self.cx, self.cy, a)
        f.t += dt

    def advance_static(self, sp: SampledPotential, dt: float, n: int) -> None:
        """``n`` steps with a time-independent ``sp`` (no per-step sampling)."""
        f = self.field
        a = dt / self.physical.hbar
        k = self.kernels
        for _ in range(n):
            np.copyto(f.v_prev, f.v)
            k.update_u(f.u, f.v, sp.vd, sp.wr, sp.wi, self.cx, self.cy, a)
            k.update_v(f.u, f.v, sp.vd, sp.wr, sp.wi, self.cx, self.cy, a)
        f.t += n * dt


def _as_sample(potential, grid: Grid2D, t: float) -> SampledPotential:
    if isinstance(potential, SampledPotential):
        return potential
    return sample_potential(potential, grid, t)


def step(
    field: SpinorField,
    potential: Sequence[PotentialTerm] | SampledPotential,
    dt: float,
    physical: PhysicalParams = PhysicalParams(),
    backend: str | None = None,
) -> SpinorField:
    """Return ``field`` advanced by one leapfrog step (the input is not modified).

    Raises :class:`TDSEError` if ``dt`` exceeds :func:`max_stable_dt`.
    """
    if not dt > 0:
        raise TDSEError("dt must be positive")
    t = field.t
    times = (t, t + 0.5 * dt, t + dt)
    samples = [_as_sample(potential, field.grid, s) for s in times]
    bound = min(max_stable_dt(field.grid, s, physical) for s in samples)
    if dt > bound * (1 + 1e-12):
        raise TDSEError(f"dt={dt:.3e} exceeds the stability bound {bound:.3e}")
    prop = Propagator(field.copy(), physical, backend)
    prop.ensure_staggered(samples[0], dt)
    prop.advance(samples[1], samples[2], dt)
    return prop.field
