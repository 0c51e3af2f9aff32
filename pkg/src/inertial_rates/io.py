"""Deterministic file output: trajectory / energy / z CSV files, verdict
JSON, and grid summaries.  Identical inputs produce byte-identical files.
"""
from __future__ import annotations

import json
import os
from typing import Optional, Sequence

from .dynamics import Trajectory
from .lyapunov import EnergyTable
from .rates import RateVerdict, ZSeries


def fmt(x: float) -> str:
    """Decimal float with 17 significant digits (round-trip exact)."""
    return f"{x:.17g}"


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_trajectory_csv(traj: Trajectory, path: str) -> None:
    d = traj.dim
    cols = ["n", "t"] + [f"x_{i}" for i in range(d)] + [f"v_{i}" for i in range(d)] + ["gap"]
    lines = [",".join(cols)]
    for i in range(len(traj)):
        row = [str(int(traj.n[i])), fmt(traj.t[i])]
        row += [fmt(traj.x[i, j]) for j in range(d)]
        row += [fmt(traj.v[i, j]) for j in range(d)]
        row.append(fmt(traj.gap[i]))
        lines.append(",".join(row))
    _write_text(path, "\n".join(lines) + "\n")


def write_energy_csv(table: EnergyTable, path: str) -> None:
    lines = ["t,a,b,c,E,H,z"]
    for r in table:
        lines.append(",".join(fmt(v) for v in (r.t, r.a, r.b, r.c, r.E, r.H, r.z)))
    _write_text(path, "\n".join(lines) + "\n")


def write_z_csv(zs: ZSeries, path: str) -> None:
    lines = ["t,z"]
    for i in range(len(zs.t)):
        lines.append(f"{fmt(zs.t[i])},{fmt(zs.z[i])}")
    _write_text(path, "\n".join(lines) + "\n")


def verdict_to_dict(
    verdict: Optional[RateVerdict], objective: str, alpha: float, gamma: float
) -> dict:
    """Flatten a verdict for JSON; None yields a not-assessed skeleton."""
    base = {
        "objective": objective,
        "alpha": alpha,
        "gamma": gamma,
        "branch": None,
        "theoretical": None,
        "fitted": None,
        "fitted_err": None,
        "z_global_max": None,
        "z_tail_ratio": None,
        "boundedness": None,
        "nonvanishing": None,
        "upper_bound": None,
        "lower_bound": None,
        "passed": False,
    }
    if verdict is None:
        return base
    base.update(
        branch=verdict.branch,
        theoretical=verdict.theoretical,
        fitted=verdict.fitted,
        fitted_err=verdict.fitted_err,
        z_global_max=verdict.z_global_max,
        z_tail_ratio=verdict.z_tail_ratio,
        boundedness=verdict.boundedness,
        nonvanishing=verdict.nonvanishing,
        upper_bound="proven" if verdict.upper_bound_proven else "unproven",
        lower_bound="proven" if verdict.lower_bound_proven else "unproven",
        passed=verdict.passed,
    )
    return base


def write_json(obj: dict, path: str) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_summary(rows: Sequence[dict], csv_path: str, txt_path: str) -> None:
    """Theoretical-vs-fitted table across grid cells (CSV plus aligned text)."""
    cols = [
        "label", "branch", "theoretical", "fitted", "fitted_err",
        "z_tail_ratio", "boundedness", "nonvanishing", "passed", "error",
    ]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(_cell(r.get(c)) for c in cols))
    _write_text(csv_path, "\n".join(lines) + "\n")

    widths = {c: len(c) for c in cols}
    rendered = []
    for r in rows:
        rr = {c: _cell(r.get(c), text=True) for c in cols}
        rendered.append(rr)
        for c in cols:
            widths[c] = max(widths[c], len(rr[c]))
    head = "  ".join(c.ljust(widths[c]) for c in cols)
    sep = "  ".join("-" * widths[c] for c in cols)
    body = ["  ".join(r[c].ljust(widths[c]) for c in cols) for r in rendered]
    _write_text(txt_path, "\n".join([head, sep] + body) + "\n")


def _cell(v, text: bool = False) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}" if text else fmt(v)
    return str(v)
