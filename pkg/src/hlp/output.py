"""Deterministic CSV and SVG emitters for trajectories and cost curves.

The CSV schema is fixed across every mode:

    t, x, y, theta, mu_x, mu_y, mu_theta, segment, event, branch_path

Angles stay unwrapped inside each segment so plots are continuous;
fields a mode does not produce are left empty.  Event times appear
twice, flagged "pre" and "post".  The SVG plots are hand-emitted
polylines so byte-identical reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
from typing import Callable, Sequence

from .hybrid import HybridTrajectory

CSV_COLUMNS = (
    "t", "x", "y", "theta", "mu_x", "mu_y", "mu_theta",
    "segment", "event", "branch_path",
)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def trajectory_rows(traj: HybridTrajectory, state_columns: Callable,
                    branch_path: str = "") -> list:
    """Flatten a trajectory into CSV rows.

    state_columns(state) -> (x, y, theta, mu_x, mu_y, mu_theta) with None
    for fields the mode does not carry.  branch_path is the leaf's full
    tag string; each row records only the tags taken so far.
    """
    rows = []
    last = len(traj.arcs) - 1
    for seg, arc in enumerate(traj.arcs):
        n = len(arc.times)
        path = branch_path[:seg]
        for i in range(n):
            event = ""
            if seg > 0 and i == 0:
                event = "post"
            elif seg < last and i == n - 1:
                event = "pre"
            cols = state_columns(arc.states[i])
            rows.append(
                [_fmt(arc.times[i])] + [_fmt(c) for c in cols]
                + [str(seg), event, path]
            )
    return rows


def render_csv(rows: Sequence, header: Sequence = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_csv(rows: Sequence, path: str, header: Sequence = CSV_COLUMNS):
    """Write rows under the fixed schema; I/O errors carry the path."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(render_csv(rows, header))
    except OSError as e:
        raise OSError(f"cannot write CSV to {path}: {e}") from e


def render_svg(series: Sequence[dict], title: str = "",
               xlabel: str = "", ylabel: str = "",
               width: int = 800, height: int = 600) -> str:
    """Polyline plot of one or more labeled series.

    Each series is a dict with "label", "points" (list of (x, y)), and
    optional "events" (marker positions).  Output is a standalone SVG
    string with axes, tick labels, and a legend.
    """
    margin = 60.0
    xs = [p[0] for s in series for p in s["points"]]
    ys = [p[1] for s in series for p in s["points"]]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad_x = 0.05 * (x_hi - x_lo)
    pad_y = 0.05 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    def px(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin:.2f}" y1="{height - margin:.2f}" '
        f'x2="{width - margin:.2f}" y2="{height - margin:.2f}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{margin:.2f}" y1="{margin:.2f}" x2="{margin:.2f}" '
        f'y2="{height - margin:.2f}" stroke="black" stroke-width="1"/>',
    ]
    for k in range(5):
        fx = x_lo + k * (x_hi - x_lo) / 4.0
        fy = y_lo + k * (y_hi - y_lo) / 4.0
        out.append(
            f'<line x1="{px(fx):.2f}" y1="{height - margin:.2f}" '
            f'x2="{px(fx):.2f}" y2="{height - margin + 5:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{px(fx):.2f}" y="{height - margin + 20:.2f}" '
            f'font-size="12" text-anchor="middle">{fx:.4g}</text>')
        out.append(
            f'<line x1="{margin - 5:.2f}" y1="{py(fy):.2f}" '
            f'x2="{margin:.2f}" y2="{py(fy):.2f}" stroke="black"/>')
        out.append(
            f'<text x="{margin - 8:.2f}" y="{py(fy) + 4:.2f}" '
            f'font-size="12" text-anchor="end">{fy:.4g}</text>')
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="25" font-size="16" '
                   f'text-anchor="middle">{title}</text>')
    if xlabel:
        out.append(f'<text x="{width / 2:.2f}" y="{height - 15:.2f}" '
                   f'font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{height / 2:.2f}" font-size="13" '
                   f'text-anchor="middle" '
                   f'transform="rotate(-90 18 {height / 2:.2f})">{ylabel}</text>')
    for idx, s in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in s["points"])
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        for ex, ey in s.get("events", ()):
            out.append(f'<circle cx="{px(ex):.2f}" cy="{py(ey):.2f}" r="4" '
                       f'fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(
            f'<text x="{width - margin + 5:.2f}" '
            f'y="{margin + 16 * idx + 10:.2f}" font-size="12" '
            f'fill="{color}">{s["label"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(series: Sequence[dict], path: str, title: str = "",
             xlabel: str = "", ylabel: str = ""):
    """Write a polyline plot; I/O errors carry the path."""
    try:
        with open(path, "w") as fh:
            fh.write(render_svg(series, title, xlabel, ylabel))
    except OSError as e:
        raise OSError(f"cannot write SVG to {path}: {e}") from e
