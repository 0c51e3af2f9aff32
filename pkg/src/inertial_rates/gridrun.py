"""Grid execution: one output directory per cell, failure isolation, and a
theoretical-vs-fitted summary across cells.

Workers recreate objectives from their config strings, so cells ship only
plain dataclasses between processes.  INERTIAL_RATES_WORKERS overrides the
configured parallelism degree.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import dynamics, io, lyapunov, rates
from .config import ExperimentConfig, GridSpec
from .objectives import ObjectiveSpec

WORKERS_ENV = "INERTIAL_RATES_WORKERS"


@dataclass
class CellResult:
    label: str
    config: ExperimentConfig
    verdict: Optional[dict]
    z: Optional[Tuple[np.ndarray, np.ndarray]]
    error: Optional[str] = None

    def summary_row(self) -> dict:
        row = {"label": self.label, "error": self.error}
        if self.verdict:
            row.update({
                "branch": self.verdict["branch"],
                "theoretical": self.verdict["theoretical"],
                "fitted": self.verdict["fitted"],
                "fitted_err": self.verdict["fitted_err"],
                "z_tail_ratio": self.verdict["z_tail_ratio"],
                "boundedness": self.verdict["boundedness"],
                "nonvanishing": self.verdict["nonvanishing"],
                "passed": self.verdict["passed"],
            })
        return row


def energy_reference_point(obj: ObjectiveSpec, x0: Sequence[float]):
    """Minimizer used in the energy: the hint itself, or for an interval
    minimizer set the extremal point on the side the run starts from."""
    hint = obj.minimizer_hint
    if isinstance(hint, tuple):
        lo, hi = hint
        return hi if float(x0[0]) >= 0.0 else lo
    return hint


def default_fit_window(
    traj: dynamics.Trajectory, gamma: float
) -> Optional[Tuple[float, float]]:
    """Absolute fit window for scheme runs of sharp objectives.

    For gamma <= 2 the sqrt(h)-scale viscosity of the scheme steepens the
    measured decay past t ~ 0.05/sqrt(h); exponent fits are restricted to
    the decade before that cap.  Flat objectives and integrator runs use the
    relative default (last half of the log-time span).
    """
    if not traj.is_scheme or gamma > 2.0:
        return None
    cap = rates.scheme_fit_cap(traj.step)
    t_pos = traj.t[traj.t > 0.0]
    if len(t_pos) == 0 or cap >= float(t_pos[-1]):
        return None
    return (cap / 10.0, cap)


def lyapunov_params_for(cfg: ExperimentConfig, gamma: float) -> lyapunov.LyapunovParams:
    if cfg.lyapunov == "manual":
        return lyapunov.manual_params(cfg.alpha, cfg.lyapunov_lambda, cfg.lyapunov_p)
    hint = "flat" if cfg.lyapunov == "auto-flat" else "sharp"
    return lyapunov.select_params(cfg.alpha, gamma, hint)


def run_cell(cfg: ExperimentConfig, outdir: Optional[str] = None, label: str = "cell") -> CellResult:
    """Run one experiment and write trajectory/energy/z/verdict files."""
    out = outdir if outdir is not None else cfg.outdir
    try:
        obj = cfg.build_objective()
        traj = dynamics.run(cfg, obj)
        io.write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
        gamma = obj.nominal_gamma
        regime = rates.theoretical_rate(cfg.alpha, gamma)
        rate = regime.exponent if cfg.rate_override is None else cfg.rate_override
        params = lyapunov_params_for(cfg, gamma)
        x_star = energy_reference_point(obj, cfg.x0)
        table = lyapunov.energy_along(traj, params, x_star=x_star, rate=rate)
        io.write_energy_csv(table, os.path.join(out, "energy.csv"))
        zs = rates.z_sequence(traj, rate)
        io.write_z_csv(zs, os.path.join(out, "z.csv"))
        try:
            verdict = rates.verify_rate(
                traj, regime, fit_t_window=default_fit_window(traj, gamma)
            )
            vdict = io.verdict_to_dict(verdict, cfg.objective, cfg.alpha, gamma)
        except ValueError as exc:
            # simulation succeeded but cannot support a rate verdict
            # (degenerate gaps or a horizon too short for the tail tests)
            vdict = io.verdict_to_dict(None, cfg.objective, cfg.alpha, gamma)
            vdict.update(branch=regime.branch, theoretical=regime.exponent,
                         verdict_error=str(exc))
        if traj.error:
            vdict["trajectory_error"] = traj.error
        io.write_json(vdict, os.path.join(out, "verdict.json"))
        return CellResult(label, cfg, vdict, (zs.t, zs.z), error=traj.error)
    except Exception as exc:  # isolate the cell; the grid must survive
        return CellResult(label, cfg, None, None, error=f"{type(exc).__name__}: {exc}")


def _grid_worker(item):
    label, cfg, outdir = item
    return run_cell(cfg, outdir, label)


def worker_count(requested: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return max(1, requested)


def run_grid(grid: GridSpec, outdir: str = "out") -> list:
    """Execute every cell, then assemble summary table and z overlay."""
    cells = grid.cells()
    items = [(label, cfg, os.path.join(outdir, label)) for label, cfg in cells]
    n_workers = worker_count(grid.parallelism)
    if n_workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_grid_worker, items))
    else:
        results = [_grid_worker(it) for it in items]
    rows = [r.summary_row() for r in results]
    io.write_summary(
        rows, os.path.join(outdir, "summary.csv"), os.path.join(outdir, "summary.txt")
    )
    series = [(r.label, r.z[0], r.z[1]) for r in results if r.z is not None]
    if series:
        from .svgplot import emit_svg

        emit_svg(series, os.path.join(outdir, "z_overlay.svg"))
    return results
