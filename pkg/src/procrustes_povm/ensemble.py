"""Monte-Carlo distillation of ensembles of pairs with spread entanglement.

Random numbers come from numpy's Philox4x32-10 counter-based bit generator.
Every stream is keyed by ``SeedSequence(seed, spawn_key=position)`` where the
position is the stream's place in the computation (a sweep row, the
calibration subset, ...), never the order in which streams are consumed, so
parallel and sequential evaluation agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import optimize

from .distill import DistillError, DistillParams, config_from_params, kraus_diagonals
from .qubit import binary_entropy

GENERATOR_NAME = "numpy.random.Philox"
GENERATOR_INFO = {"bit_generator": "Philox4x32-10", "numpy": np.__version__,
                  "seeding": "SeedSequence(seed, spawn_key=position)"}
N_BINS = 200
_BATCH_MIN = 1024


class EnsembleError(ValueError):
    pass


def make_rng(seed: int, *position: int) -> np.random.Generator:
    """Philox generator keyed by a seed and a positional spawn key."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in position))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EnsembleSpec:
    family: Literal["gaussian_alpha2", "delta", "custom_samples"]
    mean_alpha2: float = 0.5
    sigma: float = 0.0
    size: int = 10_000
    seed: int = 0
    samples: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.family not in ("gaussian_alpha2", "delta", "custom_samples"):
            raise EnsembleError(f"unknown family {self.family!r}")
        if self.family == "custom_samples":
            if not self.samples:
                raise EnsembleError("custom_samples family needs a nonempty sample list")
            s = np.asarray(self.samples, dtype=float)
            if np.any((s < 0) | (s > 1)) or not np.all(np.isfinite(s)):
                raise EnsembleError("custom samples must lie in [0, 1]")
            object.__setattr__(self, "size", len(self.samples))
        if self.size < 1:
            raise EnsembleError("ensemble size must be >= 1")
        if not 0.0 <= self.mean_alpha2 <= 1.0:
            raise EnsembleError(f"mean |alpha|^2 = {self.mean_alpha2} outside [0, 1]")
        if self.sigma < 0:
            raise EnsembleError("sigma must be >= 0")


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    mean_S_in: float
    mean_S_out: float
    delta_S: float
    survival_fraction: float
    in_histogram: np.ndarray
    out_histogram: np.ndarray
    bin_edges: np.ndarray
    delta_S_stderr: float = 0.0
    n_pairs: int = 0

    @property
    def out_mass(self) -> float:
        return float(np.sum(self.out_histogram * np.diff(self.bin_edges)))


@dataclass(frozen=True, eq=False)
class SweepGrid:
    phi_axis: np.ndarray
    S_in_axis: np.ndarray
    delta_S_matrix: np.ndarray
    optimal_phi_locus: list[tuple[float, float]]
    survival_matrix: np.ndarray = field(default=None)
    stderr_matrix: np.ndarray = field(default=None)
    mean_S_in_row: np.ndarray = field(default=None)

    @property
    def row_max(self) -> np.ndarray:
        return self.delta_S_matrix.max(axis=1)

    @property
    def argmax(self) -> np.ndarray:
        return self.delta_S_matrix.argmax(axis=1)


def _truncated_normal(rng: np.random.Generator, mean: float, sigma: float, size: int) -> np.ndarray:
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        draw = rng.normal(mean, sigma, size=max(2 * need, _BATCH_MIN))
        draw = draw[(draw >= 0.0) & (draw <= 1.0)]
        take = min(need, draw.size)
        out[filled:filled + take] = draw[:take]
        filled += take
    return out


def sample_ensemble(spec: EnsembleSpec, *position: int) -> np.ndarray:
    """Draw ``|alpha|^2`` values; deterministic in ``(spec.seed, position)``."""
    if spec.family == "delta":
        return np.full(spec.size, float(spec.mean_alpha2))
    if spec.family == "custom_samples":
        return np.asarray(spec.samples, dtype=float).copy()
    if spec.sigma == 0.0:
        return np.full(spec.size, float(spec.mean_alpha2))
    rng = make_rng(spec.seed, *position)
    return _truncated_normal(rng, spec.mean_alpha2, spec.sigma, spec.size)


def mean_alpha2_from_entropy(S_target: float) -> float:
    """Invert the binary entropy on the ``|alpha|^2 >= 1/2`` branch."""
    if not 0.0 <= S_target <= 1.0:
        raise EnsembleError(f"entropy {S_target} outside [0, 1]")
    if S_target == 1.0:
        return 0.5
    if S_target == 0.0:
        return 1.0
    return float(optimize.bisect(lambda p: binary_entropy(p) - S_target, 0.5, 1.0, xtol=1e-12, maxiter=200))


def pair_branch_stats(p0: np.ndarray, params: DistillParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair ``(P1, S_out, q_out)`` for pairs with ``|alpha|^2 = p0``.

    ``q_out`` is ``|alpha|^2`` of the normalized ``p1`` output. Pair phases do
    not enter: the POVM is diagonal, so only moduli survive in the weights.
    """
    m1, _ = kraus_diagonals(config_from_params(params))
    c0, c1 = abs(m1[0]) ** 2, abs(m1[1]) ** 2
    p0 = np.asarray(p0, dtype=float)
    w0 = c0 * p0
    w1 = c1 * (1.0 - p0)
    P1 = w0 + w1
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(P1 > 0, w0 / np.where(P1 > 0, P1, 1.0), 0.0)
    return P1, binary_entropy(q), q


def _histogram(values: np.ndarray, weights: np.ndarray | None, n_total: int, bins: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(values, bins=edges, weights=weights)
    return counts / (n_total * np.diff(edges)), edges


def distill_ensemble(
    samples: Sequence[float] | np.ndarray,
    params: DistillParams,
    *,
    coin_flip: bool = False,
    rng: np.random.Generator | None = None,
    bins: int = N_BINS,
) -> EnsembleResult:
    """Send every pair through the POVM configured by ``params``.

    By default survivors are weighted by their ``p1`` probability. With
    ``coin_flip=True`` each pair survives with a Bernoulli draw from ``rng``.
    """
    p0 = np.asarray(samples, dtype=float).ravel()
    if p0.size == 0:
        raise EnsembleError("empty ensemble")
    if np.any((p0 < 0) | (p0 > 1)):
        raise EnsembleError("samples must lie in [0, 1]")
    n = p0.size
    S_in = binary_entropy(p0)
    P1, S_out, q = pair_branch_stats(p0, params)
    if coin_flip:
        if rng is None:
            raise EnsembleError("coin_flip mode needs an rng")
        weights = (rng.random(n) < P1).astype(float)
    else:
        weights = P1
    W = float(weights.sum())
    mean_in = float(S_in.mean())
    mean_out = float(np.dot(weights, S_out) / W) if W > 0 else 0.0
    survival = W / n
    if W > 0:
        infl = weights * (S_out - mean_out) / (W / n) - (S_in - mean_in)
    else:
        infl = -(S_in - mean_in)
    stderr = float(infl.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    h_in, edges = _histogram(p0, None, n, bins)
    h_out, _ = _histogram(q, weights, n, bins)
    return EnsembleResult(
        mean_S_in=mean_in,
        mean_S_out=mean_out,
        delta_S=mean_out - mean_in,
        survival_fraction=survival,
        in_histogram=h_in,
        out_histogram=h_out,
        bin_edges=edges,
        delta_S_stderr=stderr,
        n_pairs=n,
    )


def _check_axis(name: str, axis: np.ndarray, lo: float, hi: float) -> None:
    if axis.ndim != 1 or axis.size == 0:
        raise EnsembleError(f"{name} must be a nonempty 1-D sequence")
    if np.any(np.diff(axis) < 0):
        raise EnsembleError(f"{name} must be sorted")
    if axis[0] < lo - 1e-12 or axis[-1] > hi + 1e-12:
        raise EnsembleError(f"{name} must lie within [{lo}, {hi}]")


def sweep_grid(
    phi_axis: Sequence[float],
    S_in_axis: Sequence[float],
    sigma: float,
    size: int,
    seed: int,
    gamma: float = 0.0,
) -> SweepGrid:
    """Mean-entropy gain over a grid of POVM angle and initial mean entropy.

    Row ``i`` draws one gaussian ensemble (stream position ``(i,)``) whose
    mean ``|alpha|^2`` has binary entropy ``S_in_axis[i]``; every column
    reuses it.
    """
    phis = np.asarray(phi_axis, dtype=float)
    s_axis = np.asarray(S_in_axis, dtype=float)
    _check_axis("phi_axis", phis, 0.0, math.pi / 2)
    _check_axis("S_in_axis", s_axis, 0.0, 1.0)
    shape = (s_axis.size, phis.size)
    dS = np.empty(shape)
    surv = np.empty(shape)
    se = np.empty(shape)
    mean_in = np.empty(s_axis.size)
    params = [DistillParams(float(p), gamma) for p in phis]
    for i, s in enumerate(s_axis):
        spec = EnsembleSpec("gaussian_alpha2", mean_alpha2_from_entropy(float(s)), sigma, size, seed)
        samples = sample_ensemble(spec, i)
        for j, prm in enumerate(params):
            r = distill_ensemble(samples, prm, bins=1)
            dS[i, j], surv[i, j], se[i, j] = r.delta_S, r.survival_fraction, r.delta_S_stderr
        mean_in[i] = r.mean_S_in
    best = dS.argmax(axis=1)
    locus = [(float(s_axis[i]), float(phis[best[i]])) for i in range(s_axis.size)]
    return SweepGrid(phis, s_axis, dS, locus, surv, se, mean_in)


def calibrate_and_distill(
    samples: Sequence[float] | np.ndarray,
    subset_fraction: float,
    gamma: float,
    seed: int,
    *,
    coin_flip: bool = False,
    bins: int = N_BINS,
) -> tuple[DistillParams, EnsembleResult]:
    """Spend a random subset on Z-basis measurements, then distill the rest.

    ``phi* = arccos sqrt(p0_hat)`` where ``p0_hat`` is the observed frequency
    of outcome 0 on the consumed pairs. Coin flips (if any) use stream ``(seed, 2)``.
    """
    p0 = np.asarray(samples, dtype=float).ravel()
    n = p0.size
    if not 0.0 < subset_fraction < 1.0:
        raise EnsembleError(f"subset_fraction={subset_fraction} outside (0, 1)")
    k = math.ceil(subset_fraction * n)
    if k < 1:
        raise EnsembleError("calibration subset is empty")
    if k >= n:
        raise EnsembleError(f"calibration would consume all {n} pairs")
    order = make_rng(seed, 0).permutation(n)
    used, rest = order[:k], np.sort(order[k:])
    outcomes = make_rng(seed, 1).random(k) < p0[used]
    p_hat = float(outcomes.mean())
    phi_star = math.acos(math.sqrt(min(max(p_hat, 0.0), 1.0)))
    params = DistillParams(phi_star, gamma)
    return params, distill_ensemble(p0[rest], params, coin_flip=coin_flip, rng=make_rng(seed, 2), bins=bins)


__all__ = [
    "EnsembleSpec",
    "EnsembleResult",
    "SweepGrid",
    "EnsembleError",
    "DistillError",
    "sample_ensemble",
    "mean_alpha2_from_entropy",
    "distill_ensemble",
    "sweep_grid",
    "calibrate_and_distill",
    "pair_branch_stats",
    "make_rng",
]
