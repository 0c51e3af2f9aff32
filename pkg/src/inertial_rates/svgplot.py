"""Static SVG rendering of normalized z-sequences (log-x, linear-y).

Pure text generation: the same series always produce byte-identical files.
"""
from __future__ import annotations

import math
import os
from typing import Sequence, Tuple

import numpy as np

WIDTH, HEIGHT = 900, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 160, 20, 40
Y_MAX = 1.05

_COLORS = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)


def _coord(v: float) -> str:
    return f"{v:.2f}"


def emit_svg(series: Sequence[Tuple[str, np.ndarray, np.ndarray]], path: str) -> None:
    """Write one SVG with a polyline per (label, t, z) series.

    Points with t <= 0 and any leading z == 0 prefix are dropped from the
    path; a dropped prefix is noted in the legend entry.
    """
    if not series:
        raise ValueError("emit_svg needs at least one series")
    prepared = []
    for label, t, z in series:
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        keep = t > 0.0
        t, z = t[keep], z[keep]
        note = ""
        nz = np.nonzero(z > 0.0)[0]
        if len(nz) and nz[0] > 0:
            t, z = t[nz[0]:], z[nz[0]:]
            note = f" (first {int(nz[0])} records zero)"
        if len(t) == 0:
            raise ValueError(f"series {label!r} has no drawable points")
        prepared.append((label + note, t, z))

    t_lo = min(float(t[0]) for _, t, _ in prepared)
    t_hi = max(float(t[-1]) for _, t, _ in prepared)
    if t_hi <= t_lo:
        t_hi = t_lo * 10.0
    l_lo, l_hi = math.log10(t_lo), math.log10(t_hi)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(t: float) -> float:
        return MARGIN_L + plot_w * (math.log10(t) - l_lo) / (l_hi - l_lo)

    def py(z: float) -> float:
        return MARGIN_T + plot_h * (1.0 - min(z, Y_MAX) / Y_MAX)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for k in range(math.ceil(l_lo), math.floor(l_hi) + 1):
        x = px(10.0 ** k)
        out.append(
            f'<line x1="{_coord(x)}" y1="{MARGIN_T}" x2="{_coord(x)}" '
            f'y2="{MARGIN_T + plot_h}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_coord(x)}" y="{HEIGHT - 14}" font-size="12" '
            f'text-anchor="middle">1e{k}</text>'
        )
    for yv in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(yv)
        out.append(
            f'<line x1="{MARGIN_L}" y1="{_coord(y)}" x2="{MARGIN_L + plot_w}" '
            f'y2="{_coord(y)}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_L - 8}" y="{_coord(y + 4)}" font-size="12" '
            f'text-anchor="end">{yv:g}</text>'
        )
    for i, (label, t, z) in enumerate(prepared):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{_coord(px(tv))},{_coord(py(zv))}" for tv, zv in zip(t, z))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>'
        )
        ly = MARGIN_T + 16 + 18 * i
        lx = WIDTH - MARGIN_R + 10
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 28}" y="{ly}" font-size="12">{_escape(label)}</text>')
    out.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
