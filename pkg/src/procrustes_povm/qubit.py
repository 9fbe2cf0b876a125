"""Exact state and operator algebra for small n-qubit pure states.

Qubit 0 is the most significant bit of the computational-basis index, so for
a pair ``|ab>`` qubit 0 is ``a`` (Alice) and qubit 1 is ``b`` (Bob).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12


class QubitError(ValueError):
    """Invalid state, operator or qubit index."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise QubitError("n must be >= 1")
        amps = np.asarray(self.amplitudes)
        if amps.shape != (2**self.n,):
            raise QubitError(f"expected {2**self.n} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise QubitError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return 2**self.n

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"PureState(n={self.n}, amplitudes={np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class QubitOperator:
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries)
        if m.shape != (2, 2):
            raise QubitError(f"single-qubit operator must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise QubitError("operator entries must be finite")
        object.__setattr__(self, "entries", _frozen(m))

    @classmethod
    def diag(cls, d0: complex, d1: complex) -> QubitOperator:
        return cls(np.diag([d0, d1]).astype(complex))

    @property
    def dagger(self) -> QubitOperator:
        return QubitOperator(self.entries.conj().T)

    def __matmul__(self, other: QubitOperator) -> QubitOperator:
        return QubitOperator(self.entries @ other.entries)


IDENTITY = QubitOperator(np.eye(2))
PROJ0 = QubitOperator.diag(1, 0)
PROJ1 = QubitOperator.diag(0, 1)


def make_state(n: int, amplitudes: Sequence[complex] | np.ndarray) -> PureState:
    """Build a normalized ``n``-qubit state; the given global phase is kept."""
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if n < 1 or amps.size != 2**n:
        raise QubitError(f"dimension mismatch: n={n} needs {2**n} amplitudes, got {amps.size}")
    nrm = np.linalg.norm(amps)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise QubitError("cannot normalize a zero (or non-finite) vector")
    return PureState(n, amps / nrm)


def basis_state(n: int, index: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return PureState(n, amps)


def ghz_state(n: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def bell_state() -> PureState:
    return ghz_state(2)


def schmidt_pair(alpha: complex, beta: complex) -> PureState:
    """``alpha|00> + beta|11>``, normalized."""
    return make_state(2, [alpha, 0, 0, beta])


def _check_target(state: PureState, target: int) -> None:
    if not 0 <= target < state.n:
        raise QubitError(f"target qubit {target} out of range for n={state.n}")


def apply_unnormalized(state: PureState, op: QubitOperator, target: int) -> np.ndarray:
    """Raw ``op`` acting on qubit ``target``; returns the (unnormalized) amplitude vector."""
    _check_target(state, target)
    psi = state.amplitudes.reshape((2,) * state.n)
    out = np.tensordot(op.entries, psi, axes=([1], [target]))
    return np.moveaxis(out, 0, target).reshape(-1)


def apply_single_qubit_op(
    state: PureState, op: QubitOperator, target: int
) -> tuple[PureState | None, float]:
    """Apply ``op`` to one qubit.

    Returns the normalized post-operation state together with the weight
    ``<psi|op^dag op|psi>``. A zero-weight branch yields ``None`` in place of a
    state.
    """
    raw = apply_unnormalized(state, op, target)
    weight = float(np.vdot(raw, raw).real)
    if weight <= 0.0:
        return None, 0.0
    return PureState(state.n, raw / np.sqrt(weight)), weight


def reduced_density_matrix(state: PureState, keep: Iterable[int]) -> np.ndarray:
    """Partial trace of ``|psi><psi|`` onto the qubits in ``keep``."""
    keep = sorted(set(keep))
    n = state.n
    traced = [q for q in range(n) if q not in keep]
    rho = np.outer(state.amplitudes, state.amplitudes.conj()).reshape((2,) * (2 * n))
    # contract ket/bra index pairs of every traced qubit, highest first so
    # remaining axis numbers stay valid
    for q in sorted(traced, reverse=True):
        m = rho.ndim // 2
        rho = np.trace(rho, axis1=q, axis2=q + m)
    d = 2 ** len(keep)
    return rho.reshape(d, d)


def binary_entropy(p: float | np.ndarray) -> float | np.ndarray:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``; vectorized."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return float(h) if h.ndim == 0 else h


def entropy_of_entanglement(state: PureState, partition: Iterable[int]) -> float:
    """Base-2 von Neumann entropy of the reduced state on ``partition``."""
    part = sorted(set(partition))
    if not part or len(part) >= state.n or part[0] < 0 or part[-1] >= state.n:
        raise QubitError(f"partition {part} must be a nonempty proper subset of range({state.n})")
    evals = np.linalg.eigvalsh(reduced_density_matrix(state, part))
    evals = evals[evals > 1e-15]
    s = float(-np.sum(evals * np.log2(evals)))
    return max(s, 0.0)


def fidelity(a: PureState, b: PureState) -> float:
    if a.dim != b.dim:
        raise QubitError(f"dimension mismatch: {a.dim} vs {b.dim}")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(max(f, 0.0), 1.0))
