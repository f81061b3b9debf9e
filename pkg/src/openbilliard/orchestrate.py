"""Run orchestration: energy/coupling sweeps, pole scans, trajectory
tracing and Gamow exports, all writing deterministic CSV files.

Rows are always emitted in a fixed sort order with a fixed decimal format,
and every final file is written atomically (temp file + rename), so a
repeated run with the same config is byte-identical.  The manifest is the
one exception: it records wall-clock timing for bookkeeping.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfgmod
from .config import RunConfig
from .gamow import export_field, extract_gamow, mixing_coefficients
from .geometry import build_grid
from .poles import (
    Classification,
    eigs_near,
    find_poles,
    trace_poles,
)
from .scaling import make_scaling_map
from .scattering import solve_scattering, time_delay, unwrap_phase

_FMT = "%.17g"


def _atomic_write(path, text: str):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_FMT % v if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _fname_num(v: float) -> str:
    return ("%g" % v).replace("-", "m").replace(".", "p")


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_manifest(out_dir, config: RunConfig, grid, t0: float, files):
    manifest = {
        "config_hash": cfgmod.config_hash(config),
        "snapped_h": grid.h,
        "snapped_ny": grid.ny,
        "files": sorted(files),
        "elapsed_s": round(time.time() - t0, 3),
    }
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_sweep_delay(config: RunConfig, out_dir=None, workers: int = 1):
    """Time-delay sweep: one CSV per lambda with columns
    E, ReR, ImR, Theta, tau_w, unitarity_residual."""
    config.validate()
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    num, sweep = config.numerics, config.sweep
    grid = build_grid(config.geometry, num.h)
    energies = np.linspace(sweep.e_min, sweep.e_max, sweep.e_count)
    written = []
    if not sweep.lambdas:
        _write_manifest(out_dir, config, grid, t0, [])
        return []
    for lam in sweep.lambdas:
        from .operators import assemble_unscaled

        op = assemble_unscaled(grid, lam)

        def solve(e):
            return solve_scattering(grid, lam, float(e), num.n_modes, operator=op)

        pts = _pmap(solve, energies, workers)
        pts = unwrap_phase(pts, refine=solve)
        pts = time_delay(pts)
        rows = [
            (p.E, p.R.real, p.R.imag, p.theta_unwrapped, p.tau_w, p.unitarity_residual)
            for p in pts
        ]
        path = os.path.join(out_dir, f"delay_lambda_{_fname_num(lam)}.csv")
        _atomic_write(path, _csv(
            ["E", "ReR", "ImR", "Theta", "tau_w", "unitarity_residual"], rows))
        written.append(path)
    _write_manifest(out_dir, config, grid, t0, written)
    return written


def _poles_at(config: RunConfig, grid, lam: float, keep_vectors=False):
    num, sweep = config.numerics, config.sweep
    return find_poles(
        grid, lam, num.alpha, num.alpha_check, sweep.pole_window,
        d=num.d, shifts=[complex(s) - 0.05j for s in sweep.pole_seeds],
        seed=num.seed, keep_vectors=keep_vectors,
    )


def cmd_find_poles(config: RunConfig, out_dir=None, workers: int = 1):
    """Classified eigenvalue scan at each lambda in the sweep list."""
    config.validate()
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    grid = build_grid(config.geometry, config.numerics.h)
    rows = []
    for lam in config.sweep.lambdas:
        for p in _poles_at(config, grid, lam):
            rows.append((float(lam), p.energy.real, p.energy.imag, p.gamma,
                         p.residual, p.classification.value))
    rows.sort(key=lambda r: (-r[0], r[1], r[2]))
    path = os.path.join(out_dir, "poles.csv")
    _atomic_write(path, _csv(
        ["lambda", "ReE", "ImE", "Gamma", "residual", "classification"], rows))
    _write_manifest(out_dir, config, grid, t0, [path])
    return path


def _seed_poles(config: RunConfig, grid, lam: float):
    poles = [p for p in _poles_at(config, grid, lam)
             if p.classification is Classification.POLE
             and config.sweep.pole_window[0] <= p.energy.real <= config.sweep.pole_window[1]]
    return [p.energy for p in poles]


def cmd_trace(config: RunConfig, out_dir=None, workers: int = 1, seeds=None):
    """Trace pole trajectories over lambda_from -> lambda_to."""
    config.validate()
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    num, sweep = config.numerics, config.sweep
    grid = build_grid(config.geometry, num.h)
    if seeds is None:
        seeds = _seed_poles(config, grid, sweep.lambda_from)
    smap = make_scaling_map(np.exp(1j * num.alpha), config.geometry.scaling_anchor, num.d)
    trajs = trace_poles(grid, smap, sweep.lambda_from, sweep.lambda_to,
                        list(seeds), seed=num.seed)
    rows = []
    for tr in trajs:
        for lam, p in zip(tr.lams, tr.poles):
            rows.append((lam, p.energy.real, p.energy.imag, p.gamma, p.residual,
                         p.classification.value, tr.branch_id))
    rows.sort(key=lambda r: (r[6], -r[0]))
    path = os.path.join(out_dir, "trajectories.csv")
    _atomic_write(path, _csv(
        ["lambda", "ReE", "ImE", "Gamma", "residual", "classification", "branch_id"],
        rows))
    _write_manifest(out_dir, config, grid, t0, [path])
    return path, trajs


def cmd_gamow(config: RunConfig, out_dir=None, workers: int = 1):
    """Gamow field exports plus the mixing table at each lambda."""
    config.validate()
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    grid = build_grid(config.geometry, config.numerics.h)
    files = []
    mixing_rows = []
    for lam in config.sweep.lambdas:
        poles = [p for p in _poles_at(config, grid, lam, keep_vectors=True)
                 if p.classification is Classification.POLE
                 and config.sweep.pole_window[0] <= p.energy.real
                 <= config.sweep.pole_window[1]]
        poles.sort(key=lambda p: p.energy.real)
        for i, p in enumerate(poles, start=1):
            state = extract_gamow(p, grid)
            for m, n, c in mixing_coefficients(state):
                mixing_rows.append((float(lam), i, m, n, c.real, c.imag, abs(c) ** 2))
            path = os.path.join(
                out_dir, f"gamow_lambda_{_fname_num(lam)}_state{i}.dat")
            export_field(state, path)
            files.append(path)
    mpath = os.path.join(out_dir, "mixing.csv")
    _atomic_write(mpath, _csv(
        ["lambda", "state", "m", "n", "ReC", "ImC", "absC2"], mixing_rows))
    files.append(mpath)
    _write_manifest(out_dir, config, grid, t0, files)
    return files
