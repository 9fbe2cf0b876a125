"""Command-line front end: ``procrustes-povm <command> --config FILE [--seed N] [--out DIR]``.

Every run writes ``metadata.json`` (resolved config, generator, artifacts) into
the output directory; failures write ``error.json`` and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Annotated, Any, Iterable, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .distill import (
    DistillParams,
    config_from_params,
    distill_ghz,
    distill_pair,
    mbqc_resource_estimate,
    params_from_state,
)
from .ensemble import (
    GENERATOR_INFO,
    EnsembleSpec,
    calibrate_and_distill,
    distill_ensemble,
    make_rng,
    mean_alpha2_from_entropy,
    sample_ensemble,
    sweep_grid,
)
from .qubit import bell_state, entropy_of_entanglement, fidelity, ghz_state, schmidt_pair

log = logging.getLogger("procrustes_povm")

SCHEMA_VERSION = "1.0"
COMMANDS = ("distill", "ghz", "sweep", "ensemble", "tdse", "mbqc")
EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class CLIError(Exception):
    pass


# --------------------------------------------------------------------------- schema


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Complex = tuple[float, float]


class Axis(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


AxisSpec = Union[Axis, list[float]]


def _axis(a: AxisSpec) -> np.ndarray:
    return a.values() if isinstance(a, Axis) else np.asarray(a, dtype=float)


class DistillConfig(_Strict):
    """Either ``phi``/``gamma`` or the Schmidt coefficients ``alpha``/``beta`` as ``[re, im]``."""

    phi: float | None = None
    gamma: float = 0.0
    alpha: Complex | None = None
    beta: Complex | None = None
    povm_phi: float | None = None
    povm_gamma: float | None = None
    target: Literal[0, 1] = 0

    @model_validator(mode="after")
    def _one_state(self):
        if (self.phi is None) == (self.alpha is None or self.beta is None):
            raise ValueError("give either phi (and gamma) or both alpha and beta")
        return self


class GHZConfig(_Strict):
    n_values: list[Annotated[int, Field(ge=2, le=12)]] = [2, 3, 4, 5, 6, 7, 8]
    phi: float
    gamma: float = 0.0
    target: int = Field(0, ge=0)


class SweepConfig(_Strict):
    phi_axis: AxisSpec
    S_in_axis: AxisSpec
    sigma: float = Field(ge=0)
    size: int = Field(ge=1)
    gamma: float = 0.0
    heatmap_bits: Literal[8, 16] = 8


class CalibrationConfig(_Strict):
    subset_fraction: float = Field(gt=0, lt=1)


class EnsembleConfig(_Strict):
    family: Literal["gaussian_alpha2", "delta", "custom_samples"] = "gaussian_alpha2"
    mean_alpha2: float | None = Field(None, ge=0, le=1)
    S_in: float | None = Field(None, ge=0, le=1)
    sigma: float = Field(0.0, ge=0)
    size: int = Field(10_000, ge=1)
    samples: list[float] | None = None
    phi: float | None = None
    gamma: float = 0.0
    calibration: CalibrationConfig | None = None
    coin_flip: bool = False
    bins: int = Field(200, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.mean_alpha2 is not None and self.S_in is not None:
            raise ValueError("give at most one of mean_alpha2 and S_in")
        if (self.phi is None) == (self.calibration is None):
            raise ValueError("give exactly one of phi and calibration")
        return self


class PhysicalConfig(_Strict):
    mass: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)
    omega: float = Field(1.0, gt=0)
    mu: float = Field(1.0, gt=0)
    B0: float = Field(6.0, gt=0)
    q: float = Field(1.0, gt=0)


class TDSEConfig(_Strict):
    scenario: Literal["trapped_povm", "free_mzi"] = "trapped_povm"
    phi: float
    gamma: float = 0.0
    physical: PhysicalConfig = PhysicalConfig()
    dx: float = Field(0.1, gt=0)
    dt_fraction: float = Field(0.5, gt=0, le=1)
    pulse_time: float = Field(0.5, gt=0)
    hold_time: float = Field(1.0, gt=0)
    trim: float | Literal["auto"] = 0.0
    corridor: float | None = Field(None, gt=0)
    snapshot_every: int | None = Field(None, ge=1)
    backend: Literal["compiled", "python"] | None = None


class MBQCConfig(_Strict):
    n_logical: int = Field(ge=1)
    depth_k: int = Field(ge=1)
    lattice_L: int = Field(ge=1)
    alpha: float = Field(gt=0)
    prefactor: float = Field(1.0, gt=0)


PARAMETER_MODELS: dict[str, type[_Strict]] = {
    "distill": DistillConfig,
    "ghz": GHZConfig,
    "sweep": SweepConfig,
    "ensemble": EnsembleConfig,
    "tdse": TDSEConfig,
    "mbqc": MBQCConfig,
}
# parameters measured in angle units (converted to radians on load)
ANGLE_KEYS = {"phi", "gamma", "povm_phi", "povm_gamma", "phi_axis"}


class ConfigDocument(_Strict):
    """Top-level config document."""

    command: Literal[COMMANDS] | None = None  # type: ignore[valid-type]
    angle_unit: Literal["rad", "deg"] = "rad"
    seed: int | None = Field(None, ge=0, lt=2**64)
    parameters: dict[str, Any] = {}


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: _Strict
    seed: int
    output_dir: Path

    def resolved(self) -> dict:
        return {
            "command": self.command,
            "angle_unit": "rad",
            "seed": self.seed,
            "parameters": self.parameters.model_dump(mode="json"),
        }


def _to_radians(params: dict) -> dict:
    out = dict(params)
    for k in ANGLE_KEYS & out.keys():
        v = out[k]
        if v is None:
            continue
        if isinstance(v, dict):
            out[k] = {**v, "start": math.radians(v["start"]), "stop": math.radians(v["stop"])} if "start" in v else v
        elif isinstance(v, list):
            out[k] = [math.radians(x) for x in v]
        elif isinstance(v, (int, float)):
            out[k] = math.radians(v)
    return out


def parse_config(command: str, document: dict, seed: int | None = None, output_dir: Path | str = ".") -> RunConfig:
    """Validate a config document for ``command``; raises :class:`CLIError` on schema violations."""
    if command not in PARAMETER_MODELS:
        raise CLIError(f"unknown command {command!r}; expected one of {list(COMMANDS)}")
    try:
        doc = ConfigDocument.model_validate(document)
        if doc.command is not None and doc.command != command:
            raise CLIError(f"config is for command {doc.command!r}, not {command!r}")
        raw = _to_radians(doc.parameters) if doc.angle_unit == "deg" else doc.parameters
        params = PARAMETER_MODELS[command].model_validate(raw)
    except ValidationError as exc:
        raise CLIError(f"config schema violation: {exc}") from exc
    resolved_seed = seed if seed is not None else (doc.seed if doc.seed is not None else 0)
    return RunConfig(command, params, int(resolved_seed), Path(output_dir))


def config_json_schema() -> dict:
    return {
        "title": "procrustes-povm config document",
        "schema_version": SCHEMA_VERSION,
        "document": ConfigDocument.model_json_schema(),
        "parameters": {k: m.model_json_schema() for k, m in PARAMETER_MODELS.items()},
        "angle_keys": sorted(ANGLE_KEYS),
    }


# --------------------------------------------------------------------------- writers


@dataclass(frozen=True)
class OutputArtifact:
    kind: Literal["csv_table", "heatmap_image", "metadata", "array"]
    path: str
    schema_version: str = SCHEMA_VERSION


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")  # no "-0"
    s = str(v)
    if any(c in s for c in ",\n\r\""):
        raise CLIError(f"string cell {s!r} contains a reserved character")
    return s


def write_table(rows: Iterable[Sequence], columns: Sequence[str], path: Path | str) -> OutputArtifact:
    """CSV with a header row, 17 significant digits for floats, LF line endings."""
    path = Path(path)
    cols = list(columns)
    lines = [",".join(cols)]
    for row in rows:
        row = list(row.values()) if isinstance(row, dict) else list(row)
        if len(row) != len(cols):
            raise CLIError(f"row has {len(row)} cells, schema has {len(cols)} columns")
        lines.append(",".join(_fmt(v) for v in row))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}") from exc
    return OutputArtifact("csv_table", str(path))


def gray_levels(matrix, value_range: tuple[float, float] | None = None, bits: int = 8) -> tuple[np.ndarray, list[str]]:
    """``round((v - vmin) / (vmax - vmin) * levels)``, clipped; a degenerate range gives mid-gray."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise CLIError("heatmap needs a nonempty 2-D matrix")
    if not np.all(np.isfinite(m)):
        raise CLIError("heatmap matrix has non-finite entries")
    if bits not in (8, 16):
        raise CLIError("bits must be 8 or 16")
    levels = 2**bits - 1
    vmin, vmax = (float(m.min()), float(m.max())) if value_range is None else map(float, value_range)
    warnings = []
    if vmax == vmin:
        warnings.append(f"degenerate value range [{vmin}, {vmax}]: uniform mid-gray")
        g = np.full(m.shape, (levels + 1) // 2)
    else:
        g = np.rint((m - vmin) / (vmax - vmin) * levels)
        g = np.clip(g, 0, levels)
    return g.astype(np.uint16 if bits == 16 else np.uint8), warnings


def write_heatmap(matrix, value_range: tuple[float, float] | None, path: Path | str, bits: int = 8):
    """Binary P5 graymap (row 0 at the top) plus ``<stem>_values.csv`` with the raw matrix.

    Returns ``(artifacts, warnings)``.
    """
    path = Path(path)
    g, warnings = gray_levels(matrix, value_range, bits)
    levels = 2**bits - 1
    header = f"P5\n{g.shape[1]} {g.shape[0]}\n{levels}\n".encode("ascii")
    body = g.astype(">u2").tobytes() if bits == 16 else g.tobytes()
    try:
        path.write_bytes(header + body)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}") from exc
    for w in warnings:
        log.warning("%s: %s", path.name, w)
    m = np.asarray(matrix, dtype=float)
    side = write_table(
        ((i, j, m[i, j]) for i in range(m.shape[0]) for j in range(m.shape[1])),
        ["row", "col", "value"],
        path.with_name(path.stem + "_values.csv"),
    )
    return [OutputArtifact("heatmap_image", str(path)), side], warnings


def read_pgm(path: Path | str) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise CLIError("not a binary graymap")
    w, h = map(int, parts[1].split())
    levels = int(parts[2])
    dtype = ">u2" if levels > 255 else np.uint8
    return np.frombuffer(parts[3], dtype=dtype).reshape(h, w).astype(int)


# --------------------------------------------------------------------------- commands


def _params_from(cfg: DistillConfig) -> DistillParams:
    if cfg.phi is not None:
        return DistillParams(cfg.phi, cfg.gamma)
    return params_from_state(complex(*cfg.alpha), complex(*cfg.beta))


def _cmd_distill(cfg: DistillConfig, seed: int, out: Path):
    state_params = _params_from(cfg)
    state = schmidt_pair(state_params.alpha, state_params.beta)
    povm = state_params
    if cfg.povm_phi is not None:
        povm = DistillParams(cfg.povm_phi, state_params.gamma if cfg.povm_gamma is None else cfg.povm_gamma)
    rows = []
    for o in distill_pair(state, povm, cfg.target):
        if o.state is None:
            rows.append((o.branch, o.probability, 0.0, 0.0))
        else:
            rows.append((o.branch, o.probability, entropy_of_entanglement(o.state, [0]),
                         fidelity(o.state, bell_state())))
    c = config_from_params(povm)
    return [
        write_table(rows, ["branch", "probability", "entropy", "bell_fidelity"], out / "distill.csv"),
        write_table([(povm.phi, povm.gamma, c.theta1, c.theta2, c.phase1, c.phase2, c.phase3, c.phase4)],
                    ["phi", "gamma", "theta1", "theta2", "phase1", "phase2", "phase3", "phase4"],
                    out / "povm.csv"),
    ]


def _cmd_ghz(cfg: GHZConfig, seed: int, out: Path):
    p = DistillParams(cfg.phi, cfg.gamma)
    rows = []
    for n in cfg.n_values:
        if cfg.target >= n:
            raise CLIError(f"target {cfg.target} out of range for n={n}")
        o1, o2 = distill_ghz(n, p.alpha, p.beta, cfg.target)
        f = fidelity(o1.state, ghz_state(n)) if o1.state is not None else 0.0
        rows.append((n, o1.probability, f, o2.probability))
    return [write_table(rows, ["n", "p1_probability", "p1_ghz_fidelity", "p2_probability"], out / "ghz.csv")]


def _cmd_sweep(cfg: SweepConfig, seed: int, out: Path):
    phis, s_axis = _axis(cfg.phi_axis), _axis(cfg.S_in_axis)
    g = sweep_grid(phis, s_axis, cfg.sigma, cfg.size, seed, cfg.gamma)
    rows = [
        (g.S_in_axis[i], g.phi_axis[j], g.delta_S_matrix[i, j], g.survival_matrix[i, j], g.stderr_matrix[i, j])
        for i in range(len(s_axis)) for j in range(len(phis))
    ]
    arts = [
        write_table(rows, ["S_in", "phi", "delta_S", "survival", "delta_S_stderr"], out / "sweep.csv"),
        write_table(
            [(s, p, g.row_max[i], g.mean_S_in_row[i]) for i, (s, p) in enumerate(g.optimal_phi_locus)],
            ["S_in", "phi_opt", "delta_S_max", "mean_S_in"], out / "sweep_locus.csv"),
    ]
    img, warnings = write_heatmap(g.delta_S_matrix, None, out / "sweep_delta_S.pgm", cfg.heatmap_bits)
    return arts + img, warnings


def _cmd_ensemble(cfg: EnsembleConfig, seed: int, out: Path):
    if cfg.S_in is not None:
        mean = mean_alpha2_from_entropy(cfg.S_in)
    else:
        mean = 0.5 if cfg.mean_alpha2 is None else cfg.mean_alpha2
    spec = EnsembleSpec(cfg.family, mean, cfg.sigma, cfg.size, seed,
                        None if cfg.samples is None else tuple(cfg.samples))
    samples = sample_ensemble(spec, 0)
    if cfg.calibration is not None:
        params, res = calibrate_and_distill(samples, cfg.calibration.subset_fraction, cfg.gamma, seed,
                                            coin_flip=cfg.coin_flip, bins=cfg.bins)
    else:
        params = DistillParams(cfg.phi, cfg.gamma)
        res = distill_ensemble(samples, params, coin_flip=cfg.coin_flip, rng=make_rng(seed, 1), bins=cfg.bins)
    e = res.bin_edges
    return [
        write_table([(params.phi, res.n_pairs, res.mean_S_in, res.mean_S_out, res.delta_S, res.delta_S_stderr,
                      res.survival_fraction, res.out_mass)],
                    ["phi", "n_pairs", "mean_S_in", "mean_S_out", "delta_S", "delta_S_stderr",
                     "survival_fraction", "out_mass"], out / "ensemble.csv"),
        write_table([(e[k], e[k + 1], res.in_histogram[k], res.out_histogram[k]) for k in range(len(e) - 1)],
                    ["bin_lo", "bin_hi", "in_density", "out_density"], out / "ensemble_histograms.csv"),
    ]


def _cmd_mbqc(cfg: MBQCConfig, seed: int, out: Path):
    r = mbqc_resource_estimate(cfg.n_logical, cfg.depth_k, cfg.lattice_L, cfg.alpha, cfg.prefactor)
    return [write_table([(cfg.n_logical, cfg.depth_k, cfg.lattice_L, r.alpha, cfg.prefactor,
                          r.ghz_count, r.bell_count, r.ensemble_size)],
                        ["n_logical", "depth_k", "lattice_L", "alpha", "prefactor",
                         "ghz_count", "bell_count", "ensemble_size"], out / "mbqc.csv")]


def _cmd_tdse(cfg: TDSEConfig, seed: int, out: Path):
    from .tdse import (DtPolicy, PhysicalParams, conditional_spin_state, initial_field, region_probabilities,
                       run_script, scenario, scenario_grid, spin_fidelity, target_spinor, calibrate_trim)

    phys = PhysicalParams(**cfg.physical.model_dump())
    params = DistillParams(cfg.phi, cfg.gamma)
    grid = scenario_grid(phys, cfg.dx)
    policy = DtPolicy(cfg.dt_fraction)
    kw = dict(pulse_time=cfg.pulse_time, hold_time=cfg.hold_time)
    trim = calibrate_trim(grid, phys, policy, **kw) if cfg.trim == "auto" else float(cfg.trim)
    script = scenario(cfg.scenario, params, phys, trim=trim, corridor=cfg.corridor, **kw)
    traj = run_script(initial_field(grid, params, phys), script, phys, policy,
                      snapshot_every=cfg.snapshot_every, backend=cfg.backend)
    final = traj.final
    probs = region_probabilities(final, script.active(script.final_regions))
    c = conditional_spin_state(final, script.labels["p1"])
    target = target_spinor(params)
    arts = [
        write_table([(cfg.scenario, spin_fidelity(c, target), probs["p1"], probs[script.final_regions[1]],
                      probs["leakage"], traj.max_norm_drift, trim, grid.nx, grid.ny, final.t)],
                    ["scenario", "p1_fidelity", "p1_probability", "p2_probability", "leakage",
                     "max_norm_drift", "trim", "nx", "ny", "t_final"], out / "tdse_summary.csv"),
        write_table([(s, c[s].real, c[s].imag, target[s].real, target[s].imag) for s in range(2)],
                    ["spin", "re", "im", "target_re", "target_im"], out / "tdse_spinor.csv"),
        write_table([(r.name, r.t_end, r.dt, r.steps, k, v) for r in traj.stages for k, v in r.probabilities.items()],
                    ["stage", "t_end", "dt", "steps", "region", "probability"], out / "tdse_stages.csv"),
        write_table(zip(traj.norm_times, traj.norms), ["t", "norm"], out / "tdse_norm.csv"),
    ]
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    rows = []
    for k, snap in enumerate(traj.snapshots):
        psi = snap.field.psi()
        p = snapdir / f"psi_{k:04d}.npy"
        np.save(p, np.stack([psi.real, psi.imag], axis=-1))
        rows.append((k, snap.t, snap.stage, p.name))
        arts.append(OutputArtifact("array", str(p)))
    arts.append(write_table(rows, ["index", "t", "stage", "file"], out / "snapshots.csv"))
    dens = final.density().sum(axis=-1)
    img, warnings = write_heatmap(dens, None, out / "tdse_final_density.pgm", 8)
    return arts + img, warnings


_DISPATCH = {
    "distill": _cmd_distill,
    "ghz": _cmd_ghz,
    "sweep": _cmd_sweep,
    "ensemble": _cmd_ensemble,
    "tdse": _cmd_tdse,
    "mbqc": _cmd_mbqc,
}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(config: RunConfig) -> tuple[int, list[OutputArtifact]]:
    """Execute ``config``; returns ``(exit_status, artifacts)``."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = _DISPATCH[config.command](config.parameters, config.seed, out)
    except Exception as exc:  # module errors are reported, not raised
        _write_json(out / "error.json", {
            "schema_version": SCHEMA_VERSION, "command": config.command,
            "error": type(exc).__name__, "message": f"{config.command}: {exc}",
            "config": config.resolved(),
        })
        log.error("%s failed: %s", config.command, exc)
        return EXIT_RUNTIME, []
    arts, warnings = res if isinstance(res, tuple) else (res, [])
    meta_path = out / "metadata.json"
    arts = list(arts) + [OutputArtifact("metadata", str(meta_path))]
    _write_json(meta_path, {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": config.resolved(),
        "generator": GENERATOR_INFO,
        "warnings": warnings,
        "artifacts": [{**asdict(a), "path": Path(a.path).relative_to(out).as_posix()} for a in arts],
    })
    return EXIT_OK, arts


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="procrustes-povm", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="JSON config document")
    p.add_argument("--seed", type=int, default=None, help="overrides the config's seed")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        try:
            document = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIError(f"cannot read config {args.config}: {exc}") from exc
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise CLIError("seed must be a 64-bit unsigned integer")
        config = parse_config(args.command, document, args.seed, args.out)
    except CLIError as exc:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_json(args.out / "error.json", {
            "schema_version": SCHEMA_VERSION, "command": args.command,
            "error": "ConfigError", "message": str(exc),
        })
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, _ = run(config)
    if status != EXIT_OK:
        print(f"error: see {args.out / 'error.json'}", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
