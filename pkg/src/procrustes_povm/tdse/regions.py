"""Region bookkeeping: populations and conditional spin states."""
from __future__ import annotations

from itertools import combinations
from typing import Mapping

import numpy as np

from .field import SpinorField
from .grid import TDSEError
from .potentials import Rect

LEAKAGE = "leakage"
MIN_PROBABILITY = 1e-6


def check_disjoint(regions: Mapping[str, Rect]) -> None:
    for (na, a), (nb, b) in combinations(regions.items(), 2):
        if a.overlaps(b):
            raise TDSEError(f"regions {na!r} and {nb!r} overlap")


def region_probabilities(field: SpinorField, regions: Mapping[str, Rect]) -> dict[str, float]:
    """Probability in each region (both spin components) plus ``"leakage"``."""
    check_disjoint(regions)
    grid = field.grid
    y, z = grid.mesh()
    rho = field.density().sum(axis=-1) * grid.cell_area
    out = {}
    for name, r in regions.items():
        if not r.inside(grid):
            raise TDSEError(f"region {name!r} extends outside the grid")
        out[name] = float(rho[r.mask(y, z)].sum())
    out[LEAKAGE] = 1.0 - sum(out.values())
    return out


def conditional_spin_state(field: SpinorField, region: Rect) -> np.ndarray:
    """Normalized spinor of the part of ``field`` inside ``region``.

    The position dependence is integrated out against a real Gaussian fitted
    (mean and variance per axis) to the density in the region.
    """
    grid = field.grid
    y, z = grid.mesh()
    m = region.mask(y, z)
    psi = field.psi()[m]  # (npts, 2)
    rho = np.sum(np.abs(psi) ** 2, axis=-1)
    p = rho.sum() * grid.cell_area
    if not p > MIN_PROBABILITY:
        raise TDSEError(f"region probability {p:.3g} too small for a conditional state")
    ys, zs = y[m], z[m]
    w = rho / rho.sum()
    my, mz = w @ ys, w @ zs
    vy = max(w @ (ys - my) ** 2, grid.dx**2)
    vz = max(w @ (zs - mz) ** 2, grid.dy**2)
    g = np.exp(-((ys - my) ** 2) / (4 * vy) - (zs - mz) ** 2 / (4 * vz))
    c = g @ psi
    n = np.linalg.norm(c)
    if n == 0:
        raise TDSEError("no overlap with the fitted spatial mode")
    return c / n


def spin_fidelity(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))
