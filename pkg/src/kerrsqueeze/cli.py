"""Deterministic command-line front end: JSON configs in, CSV/JSON out.

Scalar values in configs carry explicit unit suffixes (kappa_rad_s, p_in_w,
lambda_m) so no unit inference ever happens. Identical configs and input
files produce byte-identical outputs: floats are written with Python's
shortest round-trip repr, row order is fixed by the config grids, and no
timestamps or environment state enter the files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import characterize, core, detection, spectrum, steady_state
from .errors import ModelError, SchemaError

_TABULAR = ("sweep", "spectrum", "locking")


# ---------------------------------------------------------------------------
# config parsing

@dataclass
class RunConfig:
    """Validated view of one JSON config file."""

    path: Path
    raw: Dict[str, Any]
    threads: int = 1
    seed: int = 0
    out_format: Optional[str] = None

    @property
    def base_dir(self) -> Path:
        return self.path.parent

    def section(self, name: str, required: bool = True) -> Dict[str, Any]:
        sec = self.raw.get(name)
        if sec is None:
            if required:
                raise SchemaError(f"config key '{name}': section missing")
            return {}
        if not isinstance(sec, dict):
            raise SchemaError(f"config key '{name}': expected an object")
        return sec

    def resolve(self, name: str, rel: str) -> Path:
        p = (self.base_dir / rel).resolve() if not Path(rel).is_absolute() else Path(rel)
        if not p.is_file():
            raise SchemaError(f"config key '{name}': file not found: {rel}")
        return p


def load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"config file not found: {path}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"config {path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise SchemaError(f"config {path}: top level must be an object")
    return RunConfig(path=p, raw=raw)


def _num(sec: Dict[str, Any], key: str, path: str, *, required: bool = True,
         default: Optional[float] = None) -> Optional[float]:
    if key not in sec:
        if required:
            raise SchemaError(f"config key '{path}.{key}': missing")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"config key '{path}.{key}': expected a number, got {v!r}")
    return float(v)


def _num_list(sec: Dict[str, Any], key: str, path: str) -> List[float]:
    v = sec.get(key)
    if v is None:
        raise SchemaError(f"config key '{path}.{key}': missing")
    items = v if isinstance(v, list) else [v]
    if not items:
        raise SchemaError(f"config key '{path}.{key}': must not be empty")
    out = []
    for x in items:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise SchemaError(f"config key '{path}.{key}': expected numbers, got {x!r}")
        out.append(float(x))
    return out


def _grid(sec: Dict[str, Any], key: str, path: str, *, monotone: bool = True) -> np.ndarray:
    v = sec.get(key)
    if v is None:
        raise SchemaError(f"config key '{path}.{key}': missing")
    if isinstance(v, dict):
        start = _num(v, "start", f"{path}.{key}")
        stop = _num(v, "stop", f"{path}.{key}")
        points = v.get("points")
        if not isinstance(points, int) or isinstance(points, bool) or points < 1:
            raise SchemaError(f"config key '{path}.{key}.points': expected a positive integer")
        grid = np.linspace(start, stop, points)
    elif isinstance(v, list):
        if not v:
            raise SchemaError(f"config key '{path}.{key}': must not be empty")
        grid = np.array([_num({"x": x}, "x", f"{path}.{key}") for x in v])
    else:
        grid = np.array([_num(sec, key, path)])
    if monotone and grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise SchemaError(f"config key '{path}.{key}': grid must be strictly monotone")
    return grid


def parse_resonator(cfg: RunConfig) -> core.ResonatorParams:
    sec = cfg.section("resonator")
    kwargs: Dict[str, Any] = dict(
        kappa=_num(sec, "kappa_rad_s", "resonator"),
        gamma=_num(sec, "gamma_rad_s", "resonator"),
        g_opt=_num(sec, "g_opt_rad_s", "resonator", required=False, default=0.0),
        g_th=_num(sec, "g_th_rad_s", "resonator", required=False, default=0.0),
    )
    lam = _num(sec, "lambda_m", "resonator", required=False)
    omr = _num(sec, "omega_r_rad_s", "resonator", required=False)
    if lam is not None:
        kwargs["lambda_r"] = lam
    if omr is not None:
        kwargs["omega_r"] = omr
    rad = _num(sec, "radius_m", "resonator", required=False)
    nef = _num(sec, "n_eff", "resonator", required=False)
    if rad is not None:
        kwargs["radius"] = rad
    if nef is not None:
        kwargs["n_eff"] = nef
    try:
        return core.ResonatorParams(**kwargs)
    except ValueError as e:
        raise SchemaError(f"config key 'resonator': {e}") from e


def parse_pump(cfg: RunConfig) -> Tuple[List[float], Optional[float], List[str]]:
    sec = cfg.section("pump")
    powers = _num_list(sec, "p_in_w", "pump")
    for p in powers:
        if p < 0:
            raise SchemaError(f"config key 'pump.p_in_w': powers must be >= 0, got {p}")
    omega_p = _num(sec, "omega_p_rad_s", "pump", required=False)
    dirs = sec.get("direction", "down")
    dirs = dirs if isinstance(dirs, list) else [dirs]
    for d in dirs:
        if d not in ("up", "down"):
            raise SchemaError(f"config key 'pump.direction': expected 'up' or 'down', got {d!r}")
    return powers, omega_p, list(dirs)


def parse_detection(cfg: RunConfig) -> Tuple[List[float], Optional[detection.LossBudget]]:
    """Efficiency list for the run plus the loss budget, when one is given."""
    sec = cfg.section("detection", required=False)
    if not sec:
        return [1.0], None
    if "eta" in sec:
        etas = _num_list(sec, "eta", "detection")
        for e in etas:
            if not 0.0 <= e <= 1.0:
                raise SchemaError(f"config key 'detection.eta': must be in [0, 1], got {e}")
        return etas, None
    if "budget_path" in sec:
        budget = read_budget_json(cfg.resolve("detection.budget_path", sec["budget_path"]))
        return [budget.eta], budget
    if "entries" in sec:
        budget = _budget_from_obj(sec["entries"], "detection.entries")
        return [budget.eta], budget
    raise SchemaError("config key 'detection': need 'eta', 'budget_path' or 'entries'")


def _resolve_omega_p(params: core.ResonatorParams, omega_p: Optional[float]) -> float:
    if omega_p is not None:
        return omega_p
    try:
        return params.resonance_omega
    except ValueError as e:
        raise SchemaError(
            "config: pump.omega_p_rad_s missing and resonator has no "
            "lambda_m / omega_r_rad_s to fall back on"
        ) from e


# ---------------------------------------------------------------------------
# deterministic serialization

def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return str(v)


def _py(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays for JSON output."""
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_py(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return None  # JSON has no Infinity; absent threshold reports as null
    return obj


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]],
               meta: Sequence[Tuple[int, str]] = ()) -> str:
    """CSV text with '#' metadata lines inserted before the given row indices."""
    meta_at: Dict[int, List[str]] = {}
    for idx, line in meta:
        meta_at.setdefault(idx, []).append(line)
    lines: List[str] = []
    for line in meta_at.get(-1, []):
        lines.append(f"# {line}")
    lines.append(",".join(columns))
    for i, row in enumerate(rows):
        for line in meta_at.get(i, []):
            lines.append(f"# {line}")
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(obj: Any) -> str:
    return json.dumps(_py(obj), indent=2) + "\n"


def _flatten(obj: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    if isinstance(obj, dict):
        out: List[Tuple[str, Any]] = []
        for k, v in obj.items():
            out.extend(_flatten(v, f"{prefix}.{k}" if prefix else k))
        return out
    if isinstance(obj, (list, tuple)):
        return [(prefix, json.dumps(_py(obj)))]
    return [(prefix, obj)]


def render_report(obj: Dict[str, Any], out_format: str) -> str:
    if out_format == "json":
        return render_json(obj)
    pairs = _flatten(_py(obj))
    return render_csv(("key", "value"), [(k, v) for k, v in pairs])


def _write_output(out: Optional[str], text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# file readers

def _read_table(path: Path) -> Tuple[Dict[str, str], List[str], List[List[str]], List[int]]:
    meta: Dict[str, str] = {}
    columns: List[str] = []
    rows: List[List[str]] = []
    lineno_of_row: List[int] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text.lstrip("#").strip()
            if "=" in body:
                k, _, v = body.partition("=")
                meta[k.strip()] = v.strip()
            continue
        cells = [c.strip() for c in text.split(",")]
        if not columns:
            columns = cells
        else:
            rows.append(cells)
            lineno_of_row.append(lineno)
    if not columns:
        raise SchemaError(f"{path.name}: no header row found")
    return meta, columns, rows, lineno_of_row


def _column(path: Path, columns: List[str], rows: List[List[str]],
            lineno_of_row: List[int], name: str) -> np.ndarray:
    if name not in columns:
        raise SchemaError(f"{path.name}: missing required column '{name}'")
    j = columns.index(name)
    vals = []
    for row, lineno in zip(rows, lineno_of_row):
        if j >= len(row):
            raise SchemaError(f"{path.name}: line {lineno}: row has no column '{name}'")
        try:
            vals.append(float(row[j]))
        except ValueError as e:
            raise SchemaError(
                f"{path.name}: line {lineno}: column '{name}': not a number: {row[j]!r}"
            ) from e
    return np.array(vals)


def read_transmission_csv(path: Path) -> characterize.TransmissionTrace:
    meta, columns, rows, lines = _read_table(path)
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    freq_col = "delta_p_rad_s" if "delta_p_rad_s" in columns else "omega_p_rad_s"
    freq = _column(path, columns, rows, lines, freq_col)
    trans = _column(path, columns, rows, lines, "transmission")
    p_in = float(meta.get("p_in_w", "0") or 0)
    direction = meta.get("direction", "down")
    try:
        return characterize.TransmissionTrace(
            freq=freq, transmission=trans, p_in=p_in, direction=direction
        )
    except ValueError as e:
        raise SchemaError(f"{path.name}: {e}") from e


def read_resonance_csv(path: Path) -> characterize.ResonanceList:
    _, columns, rows, lines = _read_table(path)
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    mu = _column(path, columns, rows, lines, "mu")
    omega = _column(path, columns, rows, lines, "omega_rad_s")
    if not np.all(mu == np.round(mu)):
        raise SchemaError(f"{path.name}: column 'mu': mode numbers must be integers")
    try:
        return characterize.ResonanceList(tuple(zip(mu.astype(int), omega)))
    except ValueError as e:
        raise SchemaError(f"{path.name}: {e}") from e


def read_zero_span_csv(path: Path) -> characterize.ZeroSpanTrace:
    meta, columns, rows, lines = _read_table(path)
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    for key in ("center_hz", "rbw_hz", "vbw_hz"):
        if key not in meta:
            raise SchemaError(f"{path.name}: missing metadata line '# {key}=...'")
    t = _column(path, columns, rows, lines, "t_s")
    p = _column(path, columns, rows, lines, "power_dbm")
    try:
        return characterize.ZeroSpanTrace(
            t=t,
            power_dbm=p,
            center_hz=float(meta["center_hz"]),
            rbw_hz=float(meta["rbw_hz"]),
            vbw_hz=float(meta["vbw_hz"]),
        )
    except ValueError as e:
        raise SchemaError(f"{path.name}: {e}") from e


def _budget_from_obj(obj: Any, where: str) -> detection.LossBudget:
    if not isinstance(obj, list):
        raise SchemaError(f"{where}: expected a list of {{label, loss_db}} entries")
    entries = []
    for i, item in enumerate(obj):
        if not isinstance(item, dict) or "label" not in item or "loss_db" not in item:
            raise SchemaError(f"{where}: entry {i}: need 'label' and 'loss_db'")
        loss = item["loss_db"]
        if isinstance(loss, bool) or not isinstance(loss, (int, float)):
            raise SchemaError(f"{where}: entry {i}: 'loss_db' must be a number")
        entries.append((str(item["label"]), float(loss)))
    try:
        return detection.LossBudget(tuple(entries))
    except ValueError as e:
        raise SchemaError(f"{where}: {e}") from e


def read_budget_json(path: Path) -> detection.LossBudget:
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path.name}: line {e.lineno}: {e.msg}") from e
    return _budget_from_obj(obj, path.name)


# ---------------------------------------------------------------------------
# subcommands

def cmd_sweep(cfg: RunConfig) -> str:
    params = parse_resonator(cfg)
    powers, omega_p_cfg, dirs = parse_pump(cfg)
    omega_p = _resolve_omega_p(params, omega_p_cfg)
    grid_sec = cfg.section("grid")
    delta_p = _grid(grid_sec, "delta_p_rad_s", "grid")

    with_circ = params.radius is not None and params.n_eff is not None
    columns = ["delta_p_rad_s", "n_photons", "energy_j", "delta_cl_rad_s",
               "transmission", "stable", "direction"]
    if with_circ:
        # free spectral range converts stored energy to circulating power
        fsr = core.C_VACUUM / (params.n_eff * 2.0 * math.pi * params.radius)
        columns.append("circulating_power_w")

    rows: List[Sequence[Any]] = []
    meta: List[Tuple[int, str]] = []
    for p_in in powers:
        meta.append((len(rows), f"p_in_w={_fmt(p_in)}"))
        for direction in dirs:
            pump = core.PumpConfig(p_in=p_in, delta_p=delta_p, omega_p=omega_p,
                                   direction=direction)
            trace = steady_state.sweep(params, pump)
            for i, b in enumerate(trace.branches):
                row: List[Any] = [
                    float(trace.delta_p[i]), b.n, core.HBAR * omega_p * b.n,
                    b.delta_cl, float(trace.transmission[i]), b.stable, direction,
                ]
                if with_circ:
                    row.append(core.HBAR * omega_p * b.n * fsr)
                rows.append(row)

    if (cfg.out_format or "csv") == "json":
        return render_json({"columns": columns, "rows": [list(map(_py, r)) for r in rows]})
    return render_csv(columns, rows, meta)


def _locked_extrema(st: float, y: float, c: float) -> Tuple[float, float]:
    """Closed-form phase extrema of the locked variance at any frequency."""
    base = 1.0 + 2.0 * c * st * st / (y * y)
    amp = (c * st / y) * math.sqrt(1.0 + 4.0 * st * st / (y * y))
    return base - amp, base + amp


def _spectrum_rows_locking(cfg: RunConfig, params, powers, omega_p, etas,
                           omega_grid, phi_grid, optimize_phi, pool_map) -> Tuple[List[str], List[Sequence[Any]]]:
    p_th = core.threshold_power(params, omega_p, allow_infinite=True)

    tasks = []
    for eta in etas:
        for p_in in powers:
            _, branch = steady_state.injection_locking_point(params, p_in, omega_p)
            for w in omega_grid:
                tasks.append((eta, p_in, branch, float(w)))

    if optimize_phi:
        columns = ["eta", "p_in_w", "omega_rad_s", "v_s_ratio", "v_s_db",
                   "v_as_ratio", "v_as_db", "phi_opt_rad",
                   "v_s_locked_ratio", "v_as_locked_ratio"]

        def work(task):
            eta, p_in, branch, w = task
            v_min, v_max, phi_min = spectrum.variance_extrema(params, branch, w, eta)
            loss = core.total_loss(params)
            st = 0.0 if math.isinf(p_th) else p_in / p_th
            y = 1.0 + (2.0 * w / loss) ** 2
            c = 4.0 * eta * params.kappa / loss
            ls, la = _locked_extrema(st, y, c)
            return [eta, p_in, w, v_min, core.db_from_linear(v_min),
                    v_max, core.db_from_linear(v_max), phi_min, ls, la]

        return columns, list(pool_map(work, tasks))

    columns = ["eta", "p_in_w", "omega_rad_s", "phi_lo_rad", "v_ratio", "v_db",
               "v_locked_ratio"]

    def work(task):
        eta, p_in, branch, w = task
        out = []
        for phi in phi_grid:
            pt = spectrum.variance_spectrum(params, branch, w, float(phi), eta)
            locked = spectrum.locked_raw_variance(pt.sigma_tilde, pt.y, pt.c, float(phi))
            out.append([eta, p_in, w, float(phi), pt.v, core.db_from_linear(pt.v), locked])
        return out

    rows: List[Sequence[Any]] = []
    for chunk in pool_map(work, tasks):
        rows.extend(chunk)
    return columns, rows


def _spectrum_rows_detuning(cfg: RunConfig, params, powers, omega_p, etas, dirs,
                            delta_p, omega_grid, phi_grid, optimize_phi, pool_map) -> Tuple[List[str], List[Sequence[Any]]]:
    tasks = []
    for eta in etas:
        for p_in in powers:
            for direction in dirs:
                pump = core.PumpConfig(p_in=p_in, delta_p=delta_p, omega_p=omega_p,
                                       direction=direction)
                trace = steady_state.sweep(params, pump)
                for i, branch in enumerate(trace.branches):
                    for w in omega_grid:
                        tasks.append((eta, p_in, direction, float(trace.delta_p[i]),
                                      branch, float(w)))

    if optimize_phi:
        columns = ["eta", "p_in_w", "direction", "delta_p_rad_s", "n_photons",
                   "omega_rad_s", "v_s_ratio", "v_s_db", "v_as_ratio", "v_as_db",
                   "phi_opt_rad"]

        def work(task):
            eta, p_in, direction, dp, branch, w = task
            v_min, v_max, phi_min = spectrum.variance_extrema(params, branch, w, eta)
            return [eta, p_in, direction, dp, branch.n, w,
                    v_min, core.db_from_linear(v_min),
                    v_max, core.db_from_linear(v_max), phi_min]

        return columns, list(pool_map(work, tasks))

    columns = ["eta", "p_in_w", "direction", "delta_p_rad_s", "n_photons",
               "omega_rad_s", "phi_lo_rad", "v_ratio", "v_db"]

    def work(task):
        eta, p_in, direction, dp, branch, w = task
        out = []
        for phi in phi_grid:
            pt = spectrum.variance_spectrum(params, branch, w, float(phi), eta)
            out.append([eta, p_in, direction, dp, branch.n, w, float(phi),
                        pt.v, core.db_from_linear(pt.v)])
        return out

    rows: List[Sequence[Any]] = []
    for chunk in pool_map(work, tasks):
        rows.extend(chunk)
    return columns, rows


def cmd_spectrum(cfg: RunConfig) -> str:
    params = parse_resonator(cfg)
    powers, omega_p_cfg, dirs = parse_pump(cfg)
    omega_p = _resolve_omega_p(params, omega_p_cfg)
    etas, _ = parse_detection(cfg)
    sec = cfg.section("spectrum", required=False)
    mode = sec.get("mode", "locking")
    if mode not in ("locking", "detuning"):
        raise SchemaError(f"config key 'spectrum.mode': expected 'locking' or 'detuning', got {mode!r}")
    optimize_phi = bool(sec.get("optimize_phi", False))
    grid_sec = cfg.section("grid")
    omega_grid = _grid(grid_sec, "omega_rad_s", "grid")
    phi_grid = None if optimize_phi else _grid(grid_sec, "phi_lo_rad", "grid")

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            pool_map: Callable = lambda fn, items: list(pool.map(fn, items))
            if mode == "locking":
                columns, rows = _spectrum_rows_locking(
                    cfg, params, powers, omega_p, etas, omega_grid, phi_grid,
                    optimize_phi, pool_map)
            else:
                delta_p = _grid(grid_sec, "delta_p_rad_s", "grid")
                columns, rows = _spectrum_rows_detuning(
                    cfg, params, powers, omega_p, etas, dirs, delta_p,
                    omega_grid, phi_grid, optimize_phi, pool_map)
    else:
        pool_map = lambda fn, items: [fn(x) for x in items]
        if mode == "locking":
            columns, rows = _spectrum_rows_locking(
                cfg, params, powers, omega_p, etas, omega_grid, phi_grid,
                optimize_phi, pool_map)
        else:
            delta_p = _grid(grid_sec, "delta_p_rad_s", "grid")
            columns, rows = _spectrum_rows_detuning(
                cfg, params, powers, omega_p, etas, dirs, delta_p,
                omega_grid, phi_grid, optimize_phi, pool_map)

    if (cfg.out_format or "csv") == "json":
        return render_json({"columns": columns, "rows": [list(map(_py, r)) for r in rows]})
    return render_csv(columns, rows)


def cmd_locking(cfg: RunConfig) -> str:
    params = parse_resonator(cfg)
    powers, omega_p_cfg, _ = parse_pump(cfg)
    omega_p = _resolve_omega_p(params, omega_p_cfg)
    columns = ["p_in_w", "delta_p_lock_rad_s", "n_lock_photons", "delta_cl_rad_s",
               "delta_f_rad_s", "transmission"]
    rows = []
    for p_in in powers:
        dpl, branch = steady_state.injection_locking_point(params, p_in, omega_p)
        rows.append([p_in, dpl, branch.n, branch.delta_cl, branch.delta_f,
                     steady_state.transmission(params, branch)])
    if (cfg.out_format or "csv") == "json":
        return render_json({"columns": columns, "rows": [list(map(_py, r)) for r in rows]})
    return render_csv(columns, rows)


def cmd_threshold(cfg: RunConfig) -> str:
    params = parse_resonator(cfg)
    sec = cfg.section("pump", required=False)
    omega_p_cfg = _num(sec, "omega_p_rad_s", "pump", required=False) if sec else None
    omega_p = _resolve_omega_p(params, omega_p_cfg)
    p_th = core.threshold_power(params, omega_p, allow_infinite=True)
    try:
        q = core.quality_factor(params)
    except ValueError:
        q = None
    report = {
        "kappa_rad_s": params.kappa,
        "gamma_rad_s": params.gamma,
        "g_opt_rad_s": params.g_opt,
        "g_th_rad_s": params.g_th,
        "omega_p_rad_s": omega_p,
        "total_loss_rad_s": core.total_loss(params),
        "quality_factor": q,
        "p_th_w": p_th,
    }
    return render_report(report, cfg.out_format or "json")


def cmd_report(cfg: RunConfig) -> str:
    params = parse_resonator(cfg)
    powers, omega_p_cfg, _ = parse_pump(cfg)
    p_in = powers[0]
    omega_p = _resolve_omega_p(params, omega_p_cfg)
    etas, budget = parse_detection(cfg)
    eta = etas[0]
    rep_sec = cfg.section("report", required=False)
    p_th_model = core.threshold_power(params, omega_p, allow_infinite=True)
    p_th_override = _num(rep_sec, "p_th_w", "report", required=False)
    p_th_used = p_th_model if p_th_override is None else p_th_override

    caught: List[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        drv = core.drive_state(params, p_in, omega_p, eta=eta, p_th=p_th_used)
        if math.isfinite(p_th_used):
            chip = spectrum.locked_variances(p_in, p_th_used, params.kappa,
                                             params.gamma, eta=1.0)
            measured = spectrum.locked_variances(p_in, p_th_used, params.kappa,
                                                 params.gamma, eta=eta)
        else:
            chip = measured = None
    for w in wlist:
        caught.append(str(w.message))

    try:
        q = core.quality_factor(params)
    except ValueError:
        q = None

    def _block(res: Optional[spectrum.SqueezingResult]) -> Optional[Dict[str, float]]:
        if res is None:
            return None
        return {
            "v_s_ratio": res.v_s,
            "v_s_db": core.db_from_linear(res.v_s),
            "v_as_ratio": res.v_as,
            "v_as_db": core.db_from_linear(res.v_as),
        }

    report = {
        "resonator": {
            "kappa_rad_s": params.kappa,
            "gamma_rad_s": params.gamma,
            "g_opt_rad_s": params.g_opt,
            "g_th_rad_s": params.g_th,
        },
        "pump": {"p_in_w": p_in, "omega_p_rad_s": omega_p},
        "total_loss_rad_s": core.total_loss(params),
        "quality_factor": q,
        "p_th_model_w": p_th_model,
        "p_th_w": p_th_used,
        "drive": {
            "sigma_tilde": drv.sigma_tilde,
            "x": drv.x,
            "n_fluct_out": drv.n_fluct_out,
            "r": drv.r,
            "phi_opt_rad": (spectrum.optimal_phase(p_in, p_th_used)
                            if p_in > 0 and math.isfinite(p_th_used) else None),
        },
        "detection": {
            "eta": eta,
            "budget": None if budget is None else {
                "entries": [{"label": l, "loss_db": v} for l, v in budget.entries],
                "total_db": budget.total_db,
            },
        },
        "chip": _block(chip),
        "measured": _block(measured),
        "warnings": caught,
    }
    return render_report(report, cfg.out_format or "json")


def cmd_fit(cfg: RunConfig, kind: str) -> str:
    if kind == "transmission":
        sec = cfg.section("fit")
        path = cfg.resolve("fit.input", sec.get("input") or "")
        regime = sec.get("coupling_regime", "over")
        if regime not in ("over", "under"):
            raise SchemaError("config key 'fit.coupling_regime': expected 'over' or 'under'")
        max_residual = _num(sec, "max_residual", "fit", required=False, default=0.05)
        trace = read_transmission_csv(path)
        fit = characterize.fit_linear_resonance(trace, regime, max_residual=max_residual)
        se = characterize.resonance_fit_stderr(trace, fit)
        report = {
            "model": "linear_resonance",
            "input": str(sec.get("input")),
            "input_sha256": _sha256(path),
            "coupling_regime": regime,
            "parameters": {
                "center_rad_s": {"value": fit.omega_r, "stderr": se[0]},
                "kappa_rad_s": {"value": fit.kappa, "stderr": se[1]},
                "gamma_rad_s": {"value": fit.gamma, "stderr": se[2]},
            },
            "residual_rel": fit.residual,
        }
        return render_report(report, cfg.out_format or "json")

    if kind == "dispersion":
        sec = cfg.section("dispersion")
        path = cfg.resolve("dispersion.input", sec.get("input") or "")
        resonances = read_resonance_csv(path)
        fit = characterize.fit_dispersion(resonances)
        se = characterize.dispersion_fit_stderr(resonances)
        mus = np.array([m for m, _ in resonances.entries], dtype=float)
        omegas = np.array([w for _, w in resonances.entries])
        model = fit.omega_0 + fit.d1 * mus + 0.5 * fit.d2 * mus * mus
        report = {
            "model": "quadratic_dispersion",
            "input": str(sec.get("input")),
            "input_sha256": _sha256(path),
            "parameters": {
                "omega_0_rad_s": {"value": fit.omega_0, "stderr": se[0]},
                "d1_rad_s": {"value": fit.d1, "stderr": se[1]},
                "d2_rad_s": {"value": fit.d2, "stderr": se[2]},
            },
            "regime": characterize.dispersion_regime(fit.d2),
            "residual_norm_rad_s": float(np.linalg.norm(omegas - model)),
            "d_int_rad_s": [float(v) for v in fit.d_int],
        }
        return render_report(report, cfg.out_format or "json")

    if kind == "trace":
        sec = cfg.section("trace")
        t_path = cfg.resolve("trace.input", sec.get("input") or "")
        r_path = cfg.resolve("trace.reference", sec.get("reference") or "")
        low = _num(sec, "low_percentile", "trace", required=False, default=1.0)
        high = _num(sec, "high_percentile", "trace", required=False, default=99.0)
        detrend = bool(sec.get("detrend", False))
        trace = read_zero_span_csv(t_path)
        reference = read_zero_span_csv(r_path)
        v_s_db, v_as_db = characterize.reduce_homodyne_trace(
            trace, reference, low_percentile=low, high_percentile=high, detrend=detrend
        )
        report = {
            "model": "zero_span_reduction",
            "input": str(sec.get("input")),
            "input_sha256": _sha256(t_path),
            "reference": str(sec.get("reference")),
            "reference_sha256": _sha256(r_path),
            "metadata": {
                "center_hz": trace.center_hz,
                "rbw_hz": trace.rbw_hz,
                "vbw_hz": trace.vbw_hz,
            },
            "percentiles": [low, high],
            "detrend": detrend,
            "reference_level_dbm": float(np.mean(reference.power_dbm)),
            "v_s_db": v_s_db,
            "v_as_db": v_as_db,
            "v_s_ratio": core.linear_from_db(v_s_db),
            "v_as_ratio": core.linear_from_db(v_as_db),
        }
        return render_report(report, cfg.out_format or "json")

    raise SchemaError(f"unknown fit kind {kind!r}")


def cmd_losses(cfg: RunConfig) -> str:
    sec = cfg.section("losses")
    if "budget_path" in sec:
        budget = read_budget_json(cfg.resolve("losses.budget_path", sec["budget_path"]))
    elif "entries" in sec:
        budget = _budget_from_obj(sec["entries"], "losses.entries")
    else:
        raise SchemaError("config key 'losses': need 'budget_path' or 'entries'")
    report = {
        "entries": [{"label": l, "loss_db": v} for l, v in budget.entries],
        "total_db": budget.total_db,
        "eta": budget.eta,
    }
    return render_report(report, cfg.out_format or "json")


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrsqueeze",
        description="Kerr microring squeezed-light model and characterization fits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid evaluation")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for stochastic options (current subcommands are deterministic)")
    common.add_argument("--format", dest="out_format", choices=("csv", "json"),
                        default=None, help="output format (default: csv for tables, json for reports)")
    for name, help_text in (
        ("sweep", "branch-continued steady-state sweep over detuning"),
        ("spectrum", "quadrature variance spectra"),
        ("locking", "injection locking point per pump power"),
        ("threshold", "parametric threshold power report"),
        ("report", "end-to-end operating point summary"),
        ("fit-transmission", "fit a linear resonance lineshape"),
        ("fit-dispersion", "fit mode dispersion coefficients"),
        ("reduce-trace", "reduce a zero-span trace to squeezing dB"),
        ("losses", "evaluate a detection loss budget"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


_DISPATCH: Dict[str, Callable[[RunConfig], str]] = {
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "locking": cmd_locking,
    "threshold": cmd_threshold,
    "report": cmd_report,
    "fit-transmission": lambda cfg: cmd_fit(cfg, "transmission"),
    "fit-dispersion": lambda cfg: cmd_fit(cfg, "dispersion"),
    "reduce-trace": lambda cfg: cmd_fit(cfg, "trace"),
    "losses": cmd_losses,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg.threads = max(1, args.threads)
        cfg.seed = args.seed
        cfg.out_format = args.out_format
        text = _DISPATCH[args.command](cfg)
        _write_output(args.out, text)
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
