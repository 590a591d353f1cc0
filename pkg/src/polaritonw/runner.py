"""Run configuration, single-point drivers, sweeps, and file emission.

A run is described by one JSON document (schema in the README; unknown keys
are rejected).  Every driver emits the same flat record so sweep files have
a fixed column set per mode; sweep rows are ordered lexicographically by
the sweep axes and all summation orders are fixed, making repeated runs
byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .cavity import ParametricCoupling, PumpDrive
from .dynamics import (NoiseModel, correlator_tables, relax_to_steady,
                       stability_check, stationary_tables)
from .steady import entanglement_weight, steady_moments
from .tomography import (ReconstructionError, fit_w_mixture, reconstruct_rho,
                         trapezoid_weights)

__all__ = [
    "ConfigError",
    "NumericError",
    "Axis",
    "RunConfig",
    "SweepResult",
    "load_config",
    "config_from_dict",
    "run_single",
    "sweep_fig2",
    "sweep_fig3",
    "emit",
    "RECORD_COLUMNS",
]

RECORD_COLUMNS = ("w_weight", "fit_residual", "n_ii", "n_ss", "n_ssp",
                  "n_is_abs", "stability_margin")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericError(RuntimeError):
    """A numeric driver failed (integration or reconstruction)."""


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def values(self) -> list:
        if self.count == 1:
            return [float(self.start)]
        if self.scale == "linear":
            return np.linspace(self.start, self.stop, self.count).tolist()
        return np.geomspace(self.start, self.stop, self.count).tolist()


@dataclass(frozen=True)
class RunConfig:
    mode: str = "analytic"
    gamma_i: float = 1.0
    gamma_s: float = 1.0
    delta: Optional[float] = None
    g_pair: Optional[float] = None
    n_b: float = 0.0
    temperature: float = 0.0
    omega_i: float = 0.0
    activation_energy_mev: float = 5.0
    pl_coeff: float = 0.0
    drive_kind: str = "continuous"
    amplitude: Optional[float] = None
    omega_p: float = 0.0
    t0: float = 4.0
    sigma: float = 1.0
    t_d: float = 120.0
    grid_step: float = 0.25
    sweep_axes: tuple = ()
    output_path: Optional[str] = None
    output_format: str = "csv"
    rtol: float = 1e-9
    atol: float = 1e-12
    residual_threshold: float = 1e-3
    stability_guard: float = 1e-9
    workers: int = 1


_SECTION_KEYS = {
    "top": {"mode", "physics", "drive", "detection", "sweep", "output",
            "tolerances", "workers"},
    "physics": {"gamma_i", "gamma_s", "delta", "g_pair", "n_b", "temperature",
                "omega_i", "activation_energy_mev", "pl_coeff"},
    "drive": {"kind", "amplitude", "omega_p", "t0", "sigma"},
    "detection": {"t_d", "grid_step"},
    "sweep": {"axes"},
    "axis": {"name", "start", "stop", "count", "scale"},
    "output": {"path", "format"},
    "tolerances": {"rtol", "atol", "residual_threshold", "stability_guard"},
}


def _check_keys(section: dict, kind: str, context: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{context} must be a JSON object")
    unknown = sorted(set(section) - _SECTION_KEYS[kind])
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {unknown}")


def _number(section: dict, key: str, context: str, default=None, required=False):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"missing required key {key!r} in {context}")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{context}.{key} must be a number, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(f"{context}.{key} must be finite, got {val!r}")
    return float(val)


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a parsed JSON document and produce a :class:`RunConfig`."""
    _check_keys(raw, "top", "config")
    mode = raw.get("mode", "analytic")
    if mode not in ("analytic", "numeric"):
        raise ConfigError(f"mode must be 'analytic' or 'numeric', got {mode!r}")

    phys = raw.get("physics", {})
    _check_keys(phys, "physics", "physics")
    drive = raw.get("drive", {})
    _check_keys(drive, "drive", "drive")
    det = raw.get("detection", {})
    _check_keys(det, "detection", "detection")
    out = raw.get("output", {})
    _check_keys(out, "output", "output")
    tol = raw.get("tolerances", {})
    _check_keys(tol, "tolerances", "tolerances")

    axes = []
    if "sweep" in raw:
        _check_keys(raw["sweep"], "sweep", "sweep")
        ax_list = raw["sweep"].get("axes", [])
        if not isinstance(ax_list, list):
            raise ConfigError("sweep.axes must be a list")
        for i, ax in enumerate(ax_list):
            _check_keys(ax, "axis", f"sweep.axes[{i}]")
            name = ax.get("name")
            if not isinstance(name, str):
                raise ConfigError(f"sweep.axes[{i}].name must be a string")
            count = ax.get("count")
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                raise ConfigError(f"sweep.axes[{i}].count must be an integer >= 1")
            scale = ax.get("scale", "linear")
            if scale not in ("linear", "log"):
                raise ConfigError(f"sweep.axes[{i}].scale must be 'linear' or 'log'")
            start = _number(ax, "start", f"sweep.axes[{i}]", required=True)
            stop = _number(ax, "stop", f"sweep.axes[{i}]", default=start)
            if scale == "log" and (start <= 0 or stop <= 0):
                raise ConfigError(f"sweep.axes[{i}]: log scale needs positive bounds")
            axes.append(Axis(name=name, start=start, stop=stop, count=count, scale=scale))

    drive_kind = drive.get("kind", "continuous")
    if drive_kind not in ("continuous", "gaussian"):
        raise ConfigError(f"drive.kind must be 'continuous' or 'gaussian', got {drive_kind!r}")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path must be a string")

    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ConfigError("workers must be an integer >= 1")

    cfg = RunConfig(
        mode=mode,
        gamma_i=_number(phys, "gamma_i", "physics", default=1.0),
        gamma_s=_number(phys, "gamma_s", "physics", default=1.0),
        delta=_number(phys, "delta", "physics"),
        g_pair=_number(phys, "g_pair", "physics"),
        n_b=_number(phys, "n_b", "physics", default=0.0),
        temperature=_number(phys, "temperature", "physics", default=0.0),
        omega_i=_number(phys, "omega_i", "physics", default=0.0),
        activation_energy_mev=_number(phys, "activation_energy_mev", "physics", default=5.0),
        pl_coeff=_number(phys, "pl_coeff", "physics", default=0.0),
        drive_kind=drive_kind,
        amplitude=_number(drive, "amplitude", "drive"),
        omega_p=_number(drive, "omega_p", "drive", default=0.0),
        t0=_number(drive, "t0", "drive", default=4.0),
        sigma=_number(drive, "sigma", "drive", default=1.0),
        t_d=_number(det, "t_d", "detection", default=120.0),
        grid_step=_number(det, "grid_step", "detection", default=0.25),
        sweep_axes=tuple(axes),
        output_path=path,
        output_format=fmt,
        rtol=_number(tol, "rtol", "tolerances", default=1e-9),
        atol=_number(tol, "atol", "tolerances", default=1e-12),
        residual_threshold=_number(tol, "residual_threshold", "tolerances", default=1e-3),
        stability_guard=_number(tol, "stability_guard", "tolerances", default=1e-9),
        workers=workers,
    )
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig):
    if cfg.gamma_i <= 0 or cfg.gamma_s <= 0:
        raise ConfigError("physics.gamma_i and physics.gamma_s must be positive")
    if cfg.n_b < 0:
        raise ConfigError("physics.n_b must be >= 0")
    if cfg.t_d <= 0:
        raise ConfigError("detection.t_d must be positive")
    if cfg.grid_step <= 0 or cfg.grid_step > cfg.t_d:
        raise ConfigError("detection.grid_step must lie in (0, t_d]")
    if cfg.sigma <= 0:
        raise ConfigError("drive.sigma must be positive")
    if cfg.amplitude is not None and cfg.amplitude < 0:
        raise ConfigError("drive.amplitude must be >= 0")
    if cfg.rtol <= 0 or cfg.atol <= 0:
        raise ConfigError("tolerances.rtol and tolerances.atol must be positive")


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def _resolve_coupling(cfg: RunConfig, intensity: Optional[float] = None) -> ParametricCoupling:
    """Combine delta / g_pair / amplitude into one coupling.

    Pump intensity is ``amplitude**2``; when given explicitly it overrides
    the drive amplitude.  With only ``delta`` configured, a unit amplitude
    is implied.
    """
    if intensity is None:
        intensity = cfg.amplitude ** 2 if cfg.amplitude is not None else None
    if cfg.g_pair is not None:
        if intensity is None:
            if cfg.delta is None:
                raise ConfigError(
                    "physics.g_pair needs drive.amplitude (or a delta) to fix the "
                    "drive strength")
            return ParametricCoupling(g_pair=cfg.g_pair, delta=cfg.delta)
        return ParametricCoupling(g_pair=cfg.g_pair, delta=cfg.g_pair * intensity)
    if cfg.delta is None:
        raise ConfigError("physics must provide delta, or g_pair with drive.amplitude")
    if intensity not in (None, 0.0):
        return ParametricCoupling(g_pair=cfg.delta / intensity, delta=cfg.delta)
    return ParametricCoupling.from_delta(cfg.delta)


def _noise_model(cfg: RunConfig) -> NoiseModel:
    return NoiseModel(gamma_i=cfg.gamma_i, gamma_s=cfg.gamma_s, n_b=cfg.n_b,
                      temperature=cfg.temperature,
                      activation_energy_mev=cfg.activation_energy_mev,
                      pl_coeff=cfg.pl_coeff)


def _blank_record(margin: float) -> dict:
    rec = {col: None for col in RECORD_COLUMNS}
    rec["stability_margin"] = margin
    return rec


def _analytic_record(cfg: RunConfig, delta: float, n_b: float,
                     allow_unstable: bool = False) -> dict:
    start = time.perf_counter()
    st = stability_check(cfg.gamma_i, cfg.gamma_s, delta)
    if not st.stable or st.margin <= cfg.stability_guard:
        if allow_unstable:
            rec = _blank_record(st.margin)
            rec["wall_ms"] = (time.perf_counter() - start) * 1e3
            return rec
        raise ConfigError(
            f"stability condition violated for analytic mode: gamma_i*gamma_s - "
            f"4*delta^2 = {st.margin:.6g} <= 0 (delta={delta:.6g})")
    if delta == 0.0 and n_b == 0.0:
        raise ConfigError(
            "degenerate point delta=0 with zero background: nothing is emitted and "
            "the W weight is undefined")
    moments = steady_moments(cfg.gamma_i, cfg.gamma_s, delta, n_b,
                             guard=cfg.stability_guard)
    weight = entanglement_weight(moments)
    return {
        "w_weight": weight,
        "fit_residual": 0.0,
        "n_ii": moments.n_ii,
        "n_ss": moments.n_ss,
        "n_ssp": moments.n_ssp,
        "n_is_abs": abs(moments.n_is),
        "stability_margin": st.margin,
        "wall_ms": (time.perf_counter() - start) * 1e3,
    }


def _numeric_stationary_record(cfg: RunConfig, coupling: ParametricCoupling,
                               noise: NoiseModel) -> dict:
    start = time.perf_counter()
    st = stability_check(cfg.gamma_i, cfg.gamma_s, coupling.delta)
    if not st.stable:
        raise ConfigError(
            f"no steady state for a continuous drive: margin {st.margin:.6g} <= 0")
    try:
        moments = relax_to_steady(coupling, noise.effective(coupling.delta),
                                  omega_i=cfg.omega_i, rtol=cfg.rtol, atol=cfg.atol)
        tables = stationary_tables(moments, t_d=cfg.t_d, steps=4)
        rho = reconstruct_rho(tables)
    except ReconstructionError as exc:
        raise NumericError(str(exc)) from exc
    fit = fit_w_mixture(rho, residual_threshold=cfg.residual_threshold)
    signal_block = moments.normal[1:, 1:]
    off_mask = ~np.eye(4, dtype=bool)
    return {
        "w_weight": fit.w_weight,
        "fit_residual": fit.residual,
        "n_ii": moments.normal[0, 0].real,
        "n_ss": float(np.mean(np.diag(signal_block).real)),
        "n_ssp": float(np.mean(signal_block[off_mask].real)),
        "n_is_abs": float(np.mean(np.abs(moments.anomalous[0, 1:]))),
        "stability_margin": st.margin,
        "wall_ms": (time.perf_counter() - start) * 1e3,
    }


def _numeric_pulsed_record(cfg: RunConfig, coupling: ParametricCoupling,
                           noise: NoiseModel, drive: PumpDrive) -> dict:
    start = time.perf_counter()
    st = stability_check(cfg.gamma_i, cfg.gamma_s, coupling.delta)
    count = max(2, int(round(cfg.t_d / cfg.grid_step)))
    grid = np.linspace(0.0, cfg.t_d, count + 1)
    try:
        tables = correlator_tables(coupling, noise, drive, grid,
                                   omega_i=cfg.omega_i, rtol=cfg.rtol, atol=cfg.atol)
        rho = reconstruct_rho(tables)
    except ReconstructionError as exc:
        raise NumericError(str(exc)) from exc
    fit = fit_w_mixture(rho, residual_threshold=cfg.residual_threshold)

    # Window-averaged diagnostics alongside the fitted weight.
    span = tables.times[-1] - tables.times[0]
    w = trapezoid_weights(tables.times)
    off_mask = ~np.eye(4, dtype=bool)
    n_ss_t = np.einsum("jmm->j", tables.signal_normal).real / 4.0
    n_ssp_t = tables.signal_normal[:, off_mask].real.mean(axis=1)
    diag_idx = np.arange(tables.times.size)
    pair_abs_t = np.abs(tables.pair_anomalous[diag_idx, diag_idx, :]).mean(axis=1)
    return {
        "w_weight": fit.w_weight,
        "fit_residual": fit.residual,
        "n_ii": float(w @ tables.idler_population / span),
        "n_ss": float(w @ n_ss_t / span),
        "n_ssp": float(w @ n_ssp_t / span),
        "n_is_abs": float(w @ pair_abs_t / span),
        "stability_margin": st.margin,
        "wall_ms": (time.perf_counter() - start) * 1e3,
    }


def run_single(cfg: RunConfig) -> dict:
    """Evaluate one parameter point and return the flat record."""
    coupling = _resolve_coupling(cfg)
    noise = _noise_model(cfg)
    if cfg.mode == "analytic":
        return _analytic_record(cfg, coupling.delta,
                                noise.background_occupation(coupling.delta))
    if cfg.drive_kind == "continuous":
        return _numeric_stationary_record(cfg, coupling, noise)
    if cfg.amplitude is not None:
        amplitude = cfg.amplitude
    elif coupling.g_pair:
        amplitude = math.sqrt(coupling.delta / coupling.g_pair)
    else:
        amplitude = 0.0
    drive = PumpDrive(kind="gaussian", amplitude=amplitude,
                      omega_p=cfg.omega_p, t0=cfg.t0, sigma=cfg.sigma)
    return _numeric_pulsed_record(cfg, coupling, noise, drive)


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: tuple


def _default_axes_fig2() -> tuple:
    return (Axis(name="delta", start=0.05, stop=0.45, count=9),
            Axis(name="n_b", start=0.0, stop=1.0, count=6))


def _default_axes_fig3() -> tuple:
    return (Axis(name="intensity", start=0.005, stop=0.32, count=5, scale="log"),
            Axis(name="temperature", start=10.0, stop=70.0, count=4))


def _sweep_axes(cfg: RunConfig, names: tuple, defaults) -> tuple:
    if not cfg.sweep_axes:
        return defaults()
    got = tuple(ax.name for ax in cfg.sweep_axes)
    if sorted(got) != sorted(names):
        raise ConfigError(f"sweep axes must be {list(names)} (any order), got {list(got)}")
    return cfg.sweep_axes


def _run_grid(axes: tuple, point_fn, workers: int) -> list:
    values = [ax.values() for ax in axes]
    points = [(a, b) for a in values[0] for b in values[1]]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda p: point_fn(*p), points))
    else:
        records = [point_fn(a, b) for a, b in points]
    rows = []
    for (a, b), rec in zip(points, records):
        row = {axes[0].name: a, axes[1].name: b}
        row.update(rec)
        rows.append(row)
    return rows


def sweep_fig2(cfg: RunConfig) -> SweepResult:
    """W weight over a (delta, n_b) grid, analytic path.

    Points outside the stable region are emitted with blank weights and a
    non-positive stability margin rather than failing the sweep.
    """
    axes = _sweep_axes(cfg, ("delta", "n_b"), _default_axes_fig2)
    by_name = {ax.name: ax for ax in axes}
    ordered = (by_name["delta"], by_name["n_b"])
    for d in ordered[0].values():
        if d == 0.0 and any(nb == 0.0 for nb in ordered[1].values()):
            raise ConfigError(
                "sweep grid contains the degenerate point delta=0, n_b=0 "
                "(nothing is emitted there); shift the grid off that corner")

    def point(delta: float, n_b: float) -> dict:
        return _analytic_record(cfg, delta, n_b, allow_unstable=True)

    rows = _run_grid(ordered, point, cfg.workers)
    columns = (ordered[0].name, ordered[1].name) + RECORD_COLUMNS
    return SweepResult(columns=columns, rows=tuple(rows))


def sweep_fig3(cfg: RunConfig) -> SweepResult:
    """W weight over a (pump intensity, temperature) grid, pulsed numeric path.

    Intensity is the squared peak amplitude, so the drive strength per point
    is ``g_pair * intensity``; the temperature feeds the pump-induced
    background model.
    """
    if cfg.g_pair is None:
        raise ConfigError("sweep over pump intensity needs physics.g_pair")
    axes = _sweep_axes(cfg, ("intensity", "temperature"), _default_axes_fig3)
    by_name = {ax.name: ax for ax in axes}
    ordered = (by_name["intensity"], by_name["temperature"])
    if any(v < 0 for v in ordered[0].values()):
        raise ConfigError("pump intensity must be >= 0")

    def point(intensity: float, temperature: float) -> dict:
        coupling = ParametricCoupling(g_pair=cfg.g_pair, delta=cfg.g_pair * intensity)
        point_cfg = replace(cfg, temperature=temperature)
        noise = _noise_model(point_cfg)
        drive = PumpDrive(kind="gaussian", amplitude=math.sqrt(intensity),
                          omega_p=cfg.omega_p, t0=cfg.t0, sigma=cfg.sigma)
        return _numeric_pulsed_record(point_cfg, coupling, noise, drive)

    rows = _run_grid(ordered, point, cfg.workers)
    columns = (ordered[0].name, ordered[1].name) + RECORD_COLUMNS
    return SweepResult(columns=columns, rows=tuple(rows))


def _format_cell(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def emit(result: SweepResult, path, fmt: str = "csv",
         include_timing: bool = False) -> Path:
    """Write a sweep to ``path`` as CSV or JSON.

    CSV carries a header row, UTF-8, LF line endings, and 17 significant
    digits (full double precision); JSON is an array of row objects with
    identical field names.  Wall-clock timings are dropped unless
    ``include_timing`` is set, so identical configs produce identical bytes.
    """
    columns = list(result.columns) + (["wall_ms"] if include_timing else [])
    path = Path(path)
    try:
        if fmt == "csv":
            lines = [",".join(columns)]
            for row in result.rows:
                lines.append(",".join(_format_cell(row.get(c)) for c in columns))
            path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        elif fmt == "json":
            payload = [{c: row.get(c) for c in columns} for row in result.rows]
            path.write_text(json.dumps(payload, indent=1) + "\n",
                            encoding="utf-8", newline="\n")
        else:
            raise ConfigError(f"unknown output format {fmt!r}")
    except OSError as exc:
        raise NumericError(f"cannot write output {path}: {exc}") from exc
    return path
