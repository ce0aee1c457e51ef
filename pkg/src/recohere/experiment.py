"""Experiment orchestration: config mappings in, deterministic artifacts out.

A run is fully described by its physics configuration; the resolved form of
that configuration is embedded in the report together with its sha256 digest,
and every artifact is written atomically (temp file, then rename) with stable
formatting, so identical configurations yield byte-identical outputs.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
import yaml

from .damping import DampingSpec, apply_damping
from .errors import ValidationError, ZeroProbabilityError
from .measurement import CmParams, cm_step
from .metrics import (
    CostSpec,
    QGridSpec,
    cost,
    distance,
    error_matrix,
    filtering_probability,
    q_function,
)
from .optimizer import OptimizerConfig, RecoveryRecord, SaturationSummary, run_sequence, saturation_report
from .plotting import render_qgrid, render_records
from .states import FieldDensityMatrix, FieldKet, engine_n_max, pure_density
from .version import __version__

CONFIG_NORM_TOL = 1e-9

_TOP_KEYS = {
    "initial_state", "gamma_t", "cost_r", "max_cms", "optimizer", "q_grid",
    "inject", "output_dir", "plots", "saturation_threshold", "inter_cm_gamma_t",
}
_OPTIMIZER_KEYS = {"g_tau_max", "grid_counts", "refine_iters", "seed", "random_restarts"}
_QGRID_KEYS = {"re_min", "re_max", "im_min", "im_max", "re_points", "im_points"}
_CM_KEYS = ("theta_i", "phi_i", "theta_f", "phi_f", "g_tau")


def _as_float(node, where: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {node!r}")
    return float(node)


def _as_int(node, where: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ValidationError(f"{where}: expected an integer, got {node!r}")
    return int(node)


def _parse_amplitude(node, where: str) -> complex:
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return complex(float(node), 0.0)
    if isinstance(node, (list, tuple)):
        if len(node) != 2:
            raise ValidationError(f"{where}: [re, im] form needs exactly two numbers")
        return complex(_as_float(node[0], where + "[0]"), _as_float(node[1], where + "[1]"))
    if isinstance(node, Mapping):
        if set(node) != {"mag", "phase_over_pi"}:
            raise ValidationError(f"{where}: mapping form needs exactly the keys mag and phase_over_pi")
        mag = _as_float(node["mag"], where + ".mag")
        phase = _as_float(node["phase_over_pi"], where + ".phase_over_pi") * np.pi
        return complex(mag * np.exp(1j * phase))
    raise ValidationError(f"{where}: amplitude must be a number, [re, im], or {{mag, phase_over_pi}}")


def _parse_initial_state(node, where: str = "initial_state"):
    if not isinstance(node, (list, tuple)) or not node:
        raise ValidationError(f"{where}: expected a nonempty list of (n, amplitude) entries")
    pairs = []
    seen = set()
    for idx, item in enumerate(node):
        spot = f"{where}[{idx}]"
        if isinstance(item, Mapping):
            if set(item) != {"n", "amplitude"}:
                raise ValidationError(f"{spot}: mapping form needs exactly the keys n and amplitude")
            n = _as_int(item["n"], spot + ".n")
            amp = _parse_amplitude(item["amplitude"], spot + ".amplitude")
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            n = _as_int(item[0], spot + "[0]")
            amp = _parse_amplitude(item[1], spot + "[1]")
        else:
            raise ValidationError(f"{spot}: expected {{n, amplitude}} or [n, amplitude]")
        if n < 0:
            raise ValidationError(f"{spot}: photon number must be nonnegative, got {n}")
        if n in seen:
            raise ValidationError(f"{spot}: duplicate photon number {n}")
        seen.add(n)
        pairs.append((n, amp))
    norm_sq = sum(abs(a) ** 2 for _, a in pairs)
    if abs(norm_sq - 1.0) > CONFIG_NORM_TOL:
        raise ValidationError(
            f"{where}: amplitudes are not normalized, sum of squares is {norm_sq!r} "
            f"(tolerance {CONFIG_NORM_TOL:g})")
    return tuple(sorted(pairs))


def _parse_cm_params(node, where: str) -> CmParams:
    if not isinstance(node, Mapping) or set(node) != set(_CM_KEYS):
        raise ValidationError(f"{where}: expected exactly the keys {', '.join(_CM_KEYS)}")
    values = {key: _as_float(node[key], f"{where}.{key}") for key in _CM_KEYS}
    try:
        return CmParams(**values)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed, validated description of one complete run."""

    initial_state: tuple
    gamma_t: float
    cost_r: float
    max_cms: int
    optimizer: OptimizerConfig
    q_grid: QGridSpec
    inject: tuple
    output_dir: Path
    plots: bool
    saturation_threshold: float
    inter_cm_gamma_t: float

    @classmethod
    def from_mapping(cls, data) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ValidationError(f"config root must be a mapping, got {type(data).__name__}")
        unknown = sorted(set(data) - _TOP_KEYS)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        for key in ("initial_state", "gamma_t"):
            if key not in data:
                raise ValidationError(f"missing required config key: {key}")
        initial_state = _parse_initial_state(data["initial_state"])
        gamma_t = DampingSpec(_as_float(data["gamma_t"], "gamma_t")).gamma_t
        cost_r = _as_float(data.get("cost_r", 2.0), "cost_r")
        max_cms = _as_int(data.get("max_cms", 4), "max_cms")
        if max_cms < 0:
            raise ValidationError(f"max_cms: must be nonnegative, got {max_cms}")
        inter = _as_float(data.get("inter_cm_gamma_t", 0.0), "inter_cm_gamma_t")
        if inter < 0.0:
            raise ValidationError(f"inter_cm_gamma_t: must be nonnegative, got {inter!r}")
        threshold = _as_float(data.get("saturation_threshold", 0.05), "saturation_threshold")
        if not 0.0 < threshold < 1.0:
            raise ValidationError(
                f"saturation_threshold: must sit strictly between 0 and 1, got {threshold!r}")

        opt_node = data.get("optimizer", {})
        if not isinstance(opt_node, Mapping):
            raise ValidationError("optimizer: expected a mapping")
        unknown = sorted(set(opt_node) - _OPTIMIZER_KEYS)
        if unknown:
            raise ValidationError(f"optimizer: unknown keys: {', '.join(unknown)}")
        opt_kwargs = {}
        if "g_tau_max" in opt_node:
            opt_kwargs["g_tau_max"] = _as_float(opt_node["g_tau_max"], "optimizer.g_tau_max")
        if "grid_counts" in opt_node:
            counts = opt_node["grid_counts"]
            if not isinstance(counts, (list, tuple)) or len(counts) != 5:
                raise ValidationError("optimizer.grid_counts: expected 5 integers")
            opt_kwargs["grid_counts"] = tuple(
                _as_int(c, f"optimizer.grid_counts[{i}]") for i, c in enumerate(counts))
        for key in ("refine_iters", "seed", "random_restarts"):
            if key in opt_node:
                opt_kwargs[key] = _as_int(opt_node[key], f"optimizer.{key}")
        optimizer = OptimizerConfig(cost_spec=CostSpec(cost_r), **opt_kwargs)

        grid_node = data.get("q_grid", {})
        if not isinstance(grid_node, Mapping):
            raise ValidationError("q_grid: expected a mapping")
        unknown = sorted(set(grid_node) - _QGRID_KEYS)
        if unknown:
            raise ValidationError(f"q_grid: unknown keys: {', '.join(unknown)}")
        grid_kwargs = {}
        for key in ("re_min", "re_max", "im_min", "im_max"):
            if key in grid_node:
                grid_kwargs[key] = _as_float(grid_node[key], f"q_grid.{key}")
        for key in ("re_points", "im_points"):
            if key in grid_node:
                grid_kwargs[key] = _as_int(grid_node[key], f"q_grid.{key}")
        q_grid = QGridSpec(**grid_kwargs)

        inject_node = data.get("inject", [])
        if not isinstance(inject_node, (list, tuple)):
            raise ValidationError("inject: expected a list of measurement parameter mappings")
        inject = tuple(
            _parse_cm_params(item, f"inject[{idx}]") for idx, item in enumerate(inject_node))

        plots = data.get("plots", True)
        if not isinstance(plots, bool):
            raise ValidationError(f"plots: expected true or false, got {plots!r}")

        return cls(
            initial_state=initial_state,
            gamma_t=gamma_t,
            cost_r=cost_r,
            max_cms=max_cms,
            optimizer=optimizer,
            q_grid=q_grid,
            inject=inject,
            output_dir=Path(data.get("output_dir", "out")),
            plots=plots,
            saturation_threshold=threshold,
            inter_cm_gamma_t=inter,
        )

    def with_output_dir(self, output_dir) -> "ExperimentConfig":
        return ExperimentConfig(
            initial_state=self.initial_state, gamma_t=self.gamma_t, cost_r=self.cost_r,
            max_cms=self.max_cms, optimizer=self.optimizer, q_grid=self.q_grid,
            inject=self.inject, output_dir=Path(output_dir), plots=self.plots,
            saturation_threshold=self.saturation_threshold,
            inter_cm_gamma_t=self.inter_cm_gamma_t)

    def resolved(self) -> dict:
        """Canonical physics configuration: everything that can change the
        numbers, nothing presentational (no output paths, no plot switch)."""
        return {
            "initial_state": [[n, [amp.real, amp.imag]] for n, amp in self.initial_state],
            "gamma_t": self.gamma_t,
            "cost_r": self.cost_r,
            "max_cms": self.max_cms,
            "optimizer": {
                "g_tau_max": self.optimizer.g_tau_max,
                "grid_counts": list(self.optimizer.grid_counts),
                "refine_iters": self.optimizer.refine_iters,
                "seed": self.optimizer.seed,
                "random_restarts": self.optimizer.random_restarts,
            },
            "q_grid": {
                "re_min": self.q_grid.re_min, "re_max": self.q_grid.re_max,
                "im_min": self.q_grid.im_min, "im_max": self.q_grid.im_max,
                "re_points": self.q_grid.re_points, "im_points": self.q_grid.im_points,
            },
            "inject": [_params_dict(p) for p in self.inject],
            "saturation_threshold": self.saturation_threshold,
            "inter_cm_gamma_t": self.inter_cm_gamma_t,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, allow_nan=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_config(path) -> ExperimentConfig:
    """Read a YAML (or JSON; YAML is a superset) config file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"config file {path} is not valid YAML: {exc}") from exc
    return ExperimentConfig.from_mapping(data)


@dataclass(frozen=True)
class ExperimentReport:
    """Everything run_experiment learned, plus provenance."""

    engine_version: str
    config_hash: str
    config: dict
    d0: float
    filtering_probability: float
    reduction_factor: Optional[float]
    records: tuple
    injected: tuple
    saturation: SaturationSummary
    output_dir: Path

    def to_dict(self) -> dict:
        return {
            "engine_version": self.engine_version,
            "config_hash": self.config_hash,
            "config": self.config,
            "d0": self.d0,
            "filtering_probability": self.filtering_probability,
            "reduction_factor": self.reduction_factor,
            "records": [_record_dict(rec) for rec in self.records],
            "injected_evaluations": list(self.injected),
            "saturation": {
                "saturation_step": self.saturation.saturation_step,
                "first_step_reduction": self.saturation.first_step_reduction,
                "final_distance": self.saturation.final_distance,
                "final_sequence_probability": self.saturation.final_sequence_probability,
                "threshold": self.saturation.threshold,
            },
        }


def _params_dict(params: CmParams) -> dict:
    return {key: getattr(params, key) for key in _CM_KEYS}


def _record_dict(rec: RecoveryRecord) -> dict:
    return {
        "step": rec.step_index,
        "params": None if rec.params is None else _params_dict(rec.params),
        "distance": rec.distance_after,
        "P_l": rec.step_probability,
        "P_seq": rec.sequence_probability,
        "cost": rec.cost,
    }


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _qgrid_csv(grid) -> str:
    """Delimited layout: first row the Re axis, first column the Im axis,
    corner empty, 17 significant digits throughout."""
    def fmt(x) -> str:
        return format(float(x), ".17g")

    lines = ["," + ",".join(fmt(v) for v in grid.re_axis)]
    for i in range(grid.im_axis.size):
        lines.append(fmt(grid.im_axis[i]) + "," + ",".join(fmt(v) for v in grid.values[i]))
    return "\n".join(lines) + "\n"


def export_qgrids(surfaces: Mapping, spec: QGridSpec, out_dir, plots: bool = True) -> list:
    """Sample each labelled matrix on the grid and write qgrid_<label>.csv
    (plus a rendered qgrid_<label>.png when plots is on). Returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, matrix in surfaces.items():
        grid = q_function(matrix, spec)
        csv_path = out_dir / f"qgrid_{label}.csv"
        _atomic_write_text(csv_path, _qgrid_csv(grid))
        paths.append(csv_path)
        if plots:
            png_path = out_dir / f"qgrid_{label}.png"
            render_qgrid(grid, png_path, label)
            paths.append(png_path)
    return paths


def _initial_ket(config: ExperimentConfig) -> FieldKet:
    top = max(n for n, _ in config.initial_state)
    coeffs = np.zeros(engine_n_max(top, config.max_cms) + 1, dtype=complex)
    for n, amp in config.initial_state:
        coeffs[n] = amp
    coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
    return FieldKet(coeffs)


def baseline_states(config: ExperimentConfig):
    """Target pure state and its damped image, on the engine truncation."""
    target = pure_density(_initial_ket(config))
    return target, apply_damping(target, DampingSpec(config.gamma_t))


def _replay(damped: FieldDensityMatrix, records: Sequence[RecoveryRecord],
            inter_cm_gamma_t: float) -> FieldDensityMatrix:
    """Reconstruct the final field state from the accepted parameter trail."""
    state = damped
    for rec in records[1:]:
        if rec.step_index > 1 and inter_cm_gamma_t > 0.0:
            state = apply_damping(state, DampingSpec(inter_cm_gamma_t))
        state = cm_step(state, rec.params).field_state
    return state


def _evaluate_injected(damped, target, params: CmParams, d0: float, spec: CostSpec) -> dict:
    entry = {"params": _params_dict(params)}
    try:
        outcome = cm_step(damped, params)
    except ZeroProbabilityError:
        entry.update(probability=0.0, distance=None, cost=None, reduction_factor=None)
        return entry
    d = distance(outcome.field_state, target)
    entry.update(
        probability=outcome.probability,
        distance=d,
        cost=None if not np.isfinite(c := cost(d, outcome.probability, spec)) else c,
        reduction_factor=(d0 / d) if (d0 > 0.0 and d > 0.0) else None,
    )
    return entry


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the full pipeline and write report.json, records.csv, the Q-grid
    family, and (optionally) figures into config.output_dir."""
    ket = _initial_ket(config)
    target = pure_density(ket)
    damping = DampingSpec(config.gamma_t)
    damped = apply_damping(target, damping)
    d0 = distance(damped, target)
    filt = filtering_probability(target, damped)

    records = tuple(run_sequence(
        ket, damping, config.optimizer, config.max_cms,
        extra_candidates=config.inject, inter_cm_gamma_t=config.inter_cm_gamma_t))
    final_state = _replay(damped, records, config.inter_cm_gamma_t)
    d_final = records[-1].distance_after
    reduction = (d0 / d_final) if (d0 > 0.0 and d_final > 0.0) else None

    injected = tuple(
        _evaluate_injected(damped, target, p, d0, config.optimizer.cost_spec)
        for p in config.inject)
    saturation = saturation_report(records, config.saturation_threshold)

    report = ExperimentReport(
        engine_version=__version__,
        config_hash=config.config_hash(),
        config=config.resolved(),
        d0=d0,
        filtering_probability=filt,
        reduction_factor=reduction,
        records=records,
        injected=injected,
        saturation=saturation,
        output_dir=config.output_dir,
    )

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write_text(out / "report.json",
                       json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n")
    rows = ["step,distance,P_l,P_seq"]
    rows.extend(
        f"{rec.step_index},{float(rec.distance_after)!r},{float(rec.step_probability)!r},"
        f"{float(rec.sequence_probability)!r}"
        for rec in records)
    _atomic_write_text(out / "records.csv", "\n".join(rows) + "\n")

    surfaces = {"original": target, "error_dissipated": error_matrix(damped, target)}
    if len(records) > 1:
        surfaces["error_recovered"] = error_matrix(final_state, target)
    export_qgrids(surfaces, config.q_grid, out, plots=config.plots)
    if config.plots:
        render_records(
            [rec.step_index for rec in records],
            [rec.distance_after for rec in records],
            [rec.sequence_probability for rec in records],
            out / "sequence.png")
    return report
