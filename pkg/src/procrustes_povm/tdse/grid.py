"""Spatial grid and physical constants for the wavepacket simulations.

Grid axis 0 is the transverse coordinate (called ``y`` in the potentials),
axis 1 the transport coordinate (``z``) along which spin-dependent shifts act.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class TDSEError(ValueError):
    pass


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.nx < 3 or self.ny < 3:
            raise TDSEError("grid needs at least 3 points per axis")
        if not (self.dx > 0 and self.dy > 0):
            raise TDSEError("grid spacings must be positive")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def centered(cls, y_half: float, z_half: float, dx: float, dy: float | None = None) -> Grid2D:
        """Grid covering ``[-y_half, y_half] x [-z_half, z_half]``, symmetric about 0."""
        dy = dx if dy is None else dy
        nx = 2 * int(round(y_half / dx)) + 1
        ny = 2 * int(round(z_half / dy)) + 1
        return cls(nx, ny, dx, dy, (-(nx - 1) / 2 * dx, -(ny - 1) / 2 * dy))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def y(self) -> np.ndarray:
        return self.origin[0] + self.dx * np.arange(self.nx)

    @property
    def z(self) -> np.ndarray:
        return self.origin[1] + self.dy * np.arange(self.ny)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        y, z = self.y, self.z
        return (y[0], y[-1], z[0], z[-1])

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.y, self.z, indexing="ij")

    def contains(self, y: float, z: float) -> bool:
        y0, y1, z0, z1 = self.extent
        return y0 <= y <= y1 and z0 <= z <= z1


@dataclass(frozen=True)
class PhysicalParams:
    """Particle and trap constants; natural units ``hbar = m = omega = 1`` by default.

    ``z1 = mu B0 / (omega^2 m)`` is the spin-dependent displacement of the trap
    minimum; ``E0 = (z1 omega)^2 m / (2 q)`` the uniform electric field that
    completes the square.
    """

    mass: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0
    mu: float = 1.0
    B0: float = 6.0
    q: float = 1.0

    def __post_init__(self) -> None:
        for name in ("mass", "hbar", "omega", "mu", "B0", "q"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise TDSEError(f"{name} must be positive and finite, got {v}")

    @property
    def z1(self) -> float:
        return self.mu * self.B0 / (self.omega**2 * self.mass)

    @property
    def E0(self) -> float:
        return (self.z1 * self.omega) ** 2 * self.mass / (2 * self.q)

    @property
    def ground_width(self) -> float:
        """Position std of the trap ground state, ``sqrt(hbar / (2 m omega))``."""
        return math.sqrt(self.hbar / (2 * self.mass * self.omega))

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def kinetic_coefficients(self, grid: Grid2D) -> tuple[float, float]:
        c = self.hbar**2 / (2 * self.mass)
        return c / grid.dx**2, c / grid.dy**2
