"""Local two-outcome POVM for Procrustean distillation of Schmidt-form states.

The POVM is the double-interferometer device with two diagonal Kraus
operators::

    M1 = cos(theta1) e^{i phase1} |0><0| + cos(theta2) e^{i phase2} |1><1|
    M2 = sin(theta1) e^{i phase3} |0><0| + sin(theta2) e^{i phase4} |1><1|

For a known pair ``cos(phi)|00> + e^{i gamma} sin(phi)|11>`` the matched
configuration sends the successful ``p1`` branch to a Bell state with
probability ``1 - |cos 2 phi|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .qubit import (
    PureState,
    QubitError,
    QubitOperator,
    apply_single_qubit_op,
    make_state,
)

SCHMIDT_TOL = 1e-9
NORM_TOL = 1e-9


class DistillError(ValueError):
    pass


def canonical_phase(x: float) -> float:
    """Wrap an angle into ``(-pi, pi]``."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def re_arccos(x: float) -> float:
    """Real part of the principal complex arccos: 0 for x >= 1, pi for x <= -1."""
    if math.isnan(x):
        raise DistillError("arccos of NaN")
    if x >= 1.0:
        return 0.0
    if x <= -1.0:
        return math.pi
    return math.acos(x)


@dataclass(frozen=True)
class DistillParams:
    phi: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi) and math.isfinite(self.gamma)):
            raise DistillError("phi and gamma must be finite")
        if not -1e-12 <= self.phi <= math.pi / 2 + 1e-12:
            raise DistillError(f"phi={self.phi} outside [0, pi/2]")
        object.__setattr__(self, "phi", min(max(self.phi, 0.0), math.pi / 2))
        object.__setattr__(self, "gamma", canonical_phase(self.gamma))

    @property
    def alpha(self) -> float:
        return math.cos(self.phi)

    @property
    def beta(self) -> complex:
        return complex(np.exp(1j * self.gamma) * math.sin(self.phi))

    @property
    def success_probability(self) -> float:
        """``P1 = 1 - |cos 2 phi|`` for the matched input."""
        return 1.0 - abs(math.cos(2 * self.phi))


@dataclass(frozen=True)
class POVMConfig:
    theta1: float
    theta2: float
    phase1: float = 0.0
    phase2: float = 0.0
    phase3: float = 0.0
    phase4: float = 0.0

    def __post_init__(self) -> None:
        vals = (self.theta1, self.theta2, self.phase1, self.phase2, self.phase3, self.phase4)
        if not all(math.isfinite(v) for v in vals):
            raise DistillError("POVM angles must be finite")
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not -1e-12 <= v <= math.pi / 2 + 1e-12:
                raise DistillError(f"{name}={v} outside [0, pi/2]")


@dataclass(frozen=True)
class DistillationOutcome:
    branch: Literal["p1", "p2"]
    state: PureState | None
    probability: float


@dataclass(frozen=True)
class MBQCResourceEstimate:
    ghz_count: int
    bell_count: int
    ensemble_size: int
    alpha: float


def params_from_state(alpha: complex, beta: complex) -> DistillParams:
    """Read (phi, gamma) off normalized Schmidt coefficients, dropping global phase."""
    alpha, beta = complex(alpha), complex(beta)
    norm2 = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm2 - 1.0) > NORM_TOL:
        raise DistillError(f"|alpha|^2 + |beta|^2 = {norm2}, expected 1")
    if abs(alpha) > 0:
        beta = beta * (abs(alpha) / alpha)
    a = min(abs(alpha), 1.0)
    phi = math.acos(a)
    gamma = canonical_phase(math.atan2(beta.imag, beta.real)) if abs(beta) > 0 else 0.0
    return DistillParams(phi, gamma)


def config_from_params(params: DistillParams) -> POVMConfig:
    phi = params.phi
    tan = math.tan(phi)
    cot = math.inf if phi == 0.0 else math.cos(phi) / math.sin(phi)
    return POVMConfig(
        theta1=re_arccos(tan),
        theta2=re_arccos(cot),
        phase1=0.0,
        phase2=-params.gamma,
        phase3=-params.gamma,
        phase4=0.0,
    )


def _cos_sin(theta: float) -> tuple[float, float]:
    # exact zeros at the endpoints so an annihilated branch is reported absent
    if theta == math.pi / 2:
        return 0.0, 1.0
    return math.cos(theta), math.sin(theta)


def kraus_diagonals(config: POVMConfig) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of (M1, M2) as length-2 complex arrays."""
    c = config
    (c1, s1), (c2, s2) = _cos_sin(c.theta1), _cos_sin(c.theta2)
    m1 = np.array([c1 * np.exp(1j * c.phase1), c2 * np.exp(1j * c.phase2)])
    m2 = np.array([s1 * np.exp(1j * c.phase3), s2 * np.exp(1j * c.phase4)])
    return m1, m2


def kraus_operators(config: POVMConfig) -> tuple[QubitOperator, QubitOperator]:
    m1, m2 = kraus_diagonals(config)
    return QubitOperator(np.diag(m1)), QubitOperator(np.diag(m2))


def completeness_error(config: POVMConfig) -> float:
    """``max |M1^dag M1 + M2^dag M2 - I|`` entrywise."""
    m1, m2 = kraus_operators(config)
    s = m1.dagger.entries @ m1.entries + m2.dagger.entries @ m2.entries
    return float(np.max(np.abs(s - np.eye(2))))


def _apply_povm(state: PureState, config: POVMConfig, target: int) -> tuple[DistillationOutcome, DistillationOutcome]:
    m1, m2 = kraus_operators(config)
    try:
        s1, w1 = apply_single_qubit_op(state, m1, target)
        s2, w2 = apply_single_qubit_op(state, m2, target)
    except QubitError as exc:
        raise DistillError(str(exc)) from exc
    return DistillationOutcome("p1", s1, w1), DistillationOutcome("p2", s2, w2)


def _schmidt_coefficients(state: PureState) -> tuple[complex, complex]:
    a = state.amplitudes
    if abs(a[1]) > SCHMIDT_TOL or abs(a[2]) > SCHMIDT_TOL:
        raise DistillError("state is not of the form alpha|00> + beta|11>")
    return complex(a[0]), complex(a[3])


def distill_pair(
    state: PureState, params: DistillParams, target: int = 0
) -> tuple[DistillationOutcome, DistillationOutcome]:
    """Apply the POVM configured by ``params`` to one qubit of a Schmidt-form pair.

    ``params`` need not match the state; when they do, the ``p1`` branch is a
    Bell state.
    """
    if state.n != 2:
        raise DistillError(f"distill_pair needs a two-qubit state, got n={state.n}")
    if not 0 <= target < 2:
        raise DistillError(f"target qubit {target} out of range for n=2")
    _schmidt_coefficients(state)
    return _apply_povm(state, config_from_params(params), target)


def ghz_class_state(n: int, alpha: complex, beta: complex) -> PureState:
    """``alpha|0...0> + beta|1...1>`` on ``n`` qubits."""
    amps = np.zeros(2**n, dtype=complex)
    amps[0], amps[-1] = alpha, beta
    return make_state(n, amps)


def distill_ghz(
    n: int, alpha: complex, beta: complex, target: int = 0
) -> tuple[DistillationOutcome, DistillationOutcome]:
    """Matched POVM on one qubit of ``alpha|0>^n + beta|1>^n``."""
    if n < 2:
        raise DistillError(f"GHZ distillation needs n >= 2, got {n}")
    params = params_from_state(alpha, beta)
    return _apply_povm(ghz_class_state(n, alpha, beta), config_from_params(params), target)


def _ceil_count(x: float) -> int:
    # absorb float noise such as 2 / 0.5000000000000001
    return int(math.ceil(round(x, 9)))


def mbqc_resource_estimate(
    n_logical: int, depth_k: int, lattice_L: int, alpha: float, prefactor: float = 1.0
) -> MBQCResourceEstimate:
    """Order-of-magnitude resources for building an MBQC cluster from weak GHZ/Bell pairs.

    GHZ count scales as ``n k L^3``; Bell count equals the GHZ count; the raw
    ensemble is inflated by ``1/alpha^2`` since the success probability is
    quadratic in ``alpha``. ``prefactor`` is an unknown constant, 1 by default.
    """
    for name, v in (("n_logical", n_logical), ("depth_k", depth_k), ("lattice_L", lattice_L)):
        if int(v) != v or v < 1:
            raise DistillError(f"{name} must be a positive integer, got {v}")
    if alpha == 0:
        raise DistillError("alpha = 0 requires infinite resources")
    if not 0 < alpha <= 1 / math.sqrt(2) + 1e-12:
        raise DistillError(f"alpha={alpha} outside (0, 1/sqrt(2)]")
    if not prefactor > 0:
        raise DistillError("prefactor must be positive")
    ghz = _ceil_count(prefactor * n_logical * depth_k * lattice_L**3)
    bell = ghz
    ensemble = _ceil_count((ghz + bell) / alpha**2)
    return MBQCResourceEstimate(ghz, bell, ensemble, float(alpha))
