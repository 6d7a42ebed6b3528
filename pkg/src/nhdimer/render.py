"""Deterministic SVG rendering of sweep grids.

Hand-rolled SVG so byte-identical output depends only on the input
grid: no timestamps, no library version drift, no float formatting
surprises.  Colors follow a fixed 11-anchor perceptual ramp; invalid
cells render gray and the legend reports their count.
"""

import math

import numpy as np

from .experiments import SweepGrid

# dark-violet -> teal -> yellow perceptual ramp anchors (sRGB, 0..1)
_RAMP = (
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
)

INVALID_FILL = "#bdbdbd"

_UNIT_SUFFIXES = (("_dbm", " (dBm)"), ("_db", " (dB)"), ("_rad", " (rad)"),
                  ("_hz", " (Hz)"), ("_mhz", " (MHz)"), ("_ghz", " (GHz)"))


def colormap_hex(t: float) -> str:
    """Hex color at position t in [0, 1] along the ramp."""
    t = min(max(float(t), 0.0), 1.0)
    pos = t * (len(_RAMP) - 1)
    k = min(int(pos), len(_RAMP) - 2)
    frac = pos - k
    rgb = tuple((1.0 - frac) * a + frac * b
                for a, b in zip(_RAMP[k], _RAMP[k + 1]))
    return "#" + "".join(f"{int(round(255 * c)):02x}" for c in rgb)


def _axis_label(name: str) -> str:
    for suffix, unit in _UNIT_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)] + unit
    return name


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _data_to_px(value, axis, origin_px, length_px, flip=False):
    """Pixel coordinate of a data value along one cell axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.size == 1:
        frac = 0.5
    else:
        idx = float(np.interp(value, axis, np.arange(axis.size)))
        frac = (idx + 0.5) / axis.size
    if flip:
        frac = 1.0 - frac
    return origin_px + frac * length_px


def render_heatmap(grid: SweepGrid, overlay=None, title: str | None = None,
                   width: int = 640, height: int = 480) -> str:
    """SVG heatmap of a sweep grid.

    axis2 runs along x, axis1 along y (first row at the bottom).  The
    color scale is linear between the finite valid extremes, annotated
    on the legend bar.  ``overlay``, if given, is an (n, 2) array of
    (axis2_value, axis1_value) points drawn as a white polyline; NaN
    rows split it into segments and out-of-range points are dropped.
    """
    n1, n2 = grid.cells.shape
    if n1 == 0 or n2 == 0:
        raise ValueError("cannot render an empty grid")
    left, right, top, bottom = 72, 96, 40, 56
    plot_w = width - left - right
    plot_h = height - top - bottom
    finite = grid.valid & np.isfinite(grid.cells)
    if finite.any():
        vmin = float(np.min(grid.cells[finite]))
        vmax = float(np.max(grid.cells[finite]))
    else:
        vmin = vmax = 0.0
    span = vmax - vmin
    n_invalid = int(np.size(grid.valid) - np.count_nonzero(grid.valid))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title is None:
        title = str(grid.metadata.get("kind", ""))
    if title:
        parts.append(f'<text x="{left + plot_w / 2:.2f}" y="24" '
                     f'font-family="monospace" font-size="14" '
                     f'text-anchor="middle">{title}</text>')

    cell_w = plot_w / n2
    cell_h = plot_h / n1
    for i in range(n1):
        # row 0 (smallest axis1 value) sits at the bottom
        y = top + plot_h - (i + 1) * cell_h
        for j in range(n2):
            x = left + j * cell_w
            if finite[i, j]:
                t = 0.5 if span == 0.0 else (grid.cells[i, j] - vmin) / span
                fill = colormap_hex(t)
            else:
                fill = INVALID_FILL
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" '
                         f'width="{cell_w + 0.5:.2f}" '
                         f'height="{cell_h + 0.5:.2f}" fill="{fill}"/>')

    if overlay is not None:
        pts = np.asarray(overlay, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("overlay must be an (n, 2) array")
        a1 = np.asarray(grid.axis1, dtype=float)
        a2 = np.asarray(grid.axis2, dtype=float)
        segment = []
        segments = []
        for x2, x1 in pts:
            inside = (np.isfinite(x1) and np.isfinite(x2)
                      and min(a1[0], a1[-1]) <= x1 <= max(a1[0], a1[-1])
                      and min(a2[0], a2[-1]) <= x2 <= max(a2[0], a2[-1]))
            if not inside:
                if len(segment) >= 2:
                    segments.append(segment)
                segment = []
                continue
            px = _data_to_px(x2, a2, left, plot_w)
            py = _data_to_px(x1, a1, top, plot_h, flip=True)
            segment.append(f"{px:.2f},{py:.2f}")
        if len(segment) >= 2:
            segments.append(segment)
        for seg in segments:
            parts.append(f'<polyline points="{" ".join(seg)}" fill="none" '
                         f'stroke="#ffffff" stroke-width="2" '
                         f'stroke-dasharray="6,3"/>')

    # axes: frame, end-tick labels, axis names
    parts.append(f'<rect x="{left}" y="{top}" width="{plot_w}" '
                 f'height="{plot_h}" fill="none" stroke="#000000"/>')
    a1 = np.asarray(grid.axis1, dtype=float)
    a2 = np.asarray(grid.axis2, dtype=float)
    parts.append(f'<text x="{left:.2f}" y="{top + plot_h + 18}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="start">{_fmt(a2[0])}</text>')
    parts.append(f'<text x="{left + plot_w:.2f}" y="{top + plot_h + 18}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="end">{_fmt(a2[-1])}</text>')
    parts.append(f'<text x="{left + plot_w / 2:.2f}" '
                 f'y="{top + plot_h + 36}" font-family="monospace" '
                 f'font-size="12" text-anchor="middle">'
                 f'{_axis_label(grid.axis2_name)}</text>')
    parts.append(f'<text x="{left - 6}" y="{top + plot_h:.2f}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="end">{_fmt(a1[0])}</text>')
    parts.append(f'<text x="{left - 6}" y="{top + 10:.2f}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="end">{_fmt(a1[-1])}</text>')
    parts.append(f'<text x="16" y="{top + plot_h / 2:.2f}" '
                 f'font-family="monospace" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{top + plot_h / 2:.2f})">'
                 f'{_axis_label(grid.axis1_name)}</text>')

    # legend: vertical color bar with min/max annotations
    bar_x = left + plot_w + 24
    bar_w = 16
    steps = 32
    step_h = plot_h / steps
    for k in range(steps):
        t = (k + 0.5) / steps
        y = top + plot_h - (k + 1) * step_h
        parts.append(f'<rect x="{bar_x}" y="{y:.2f}" width="{bar_w}" '
                     f'height="{step_h + 0.5:.2f}" '
                     f'fill="{colormap_hex(t)}"/>')
    parts.append(f'<rect x="{bar_x}" y="{top}" width="{bar_w}" '
                 f'height="{plot_h}" fill="none" stroke="#000000"/>')
    parts.append(f'<text x="{bar_x + bar_w + 4}" y="{top + plot_h:.2f}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="start">{_fmt(vmin)}</text>')
    parts.append(f'<text x="{bar_x + bar_w + 4}" y="{top + 10:.2f}" '
                 f'font-family="monospace" font-size="11" '
                 f'text-anchor="start">{_fmt(vmax)}</text>')
    if n_invalid:
        parts.append(f'<text x="{bar_x}" y="{top + plot_h + 18}" '
                     f'font-family="monospace" font-size="11" '
                     f'text-anchor="start">invalid: {n_invalid}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(svg: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def render_spectrum(freq_hz, power_dbm, title: str = "",
                    width: int = 640, height: int = 360,
                    floor_dbm: float | None = None) -> str:
    """SVG line plot of a power spectrum (used by the sync CLI output)."""
    freq = np.asarray(freq_hz, dtype=float)
    power = np.asarray(power_dbm, dtype=float)
    if freq.size != power.size or freq.size < 2:
        raise ValueError("need matching arrays with at least 2 samples")
    left, right, top, bottom = 72, 24, 32, 48
    plot_w = width - left - right
    plot_h = height - top - bottom
    vmin = float(np.min(power))
    vmax = float(np.max(power))
    if vmax == vmin:
        vmax = vmin + 1.0
    fmin, fmax = float(freq[0]), float(freq[-1])

    def px(f):
        return left + (f - fmin) / (fmax - fmin) * plot_w

    def py(v):
        return top + (vmax - v) / (vmax - vmin) * plot_h

    pts = " ".join(f"{px(f):.2f},{py(v):.2f}" for f, v in zip(freq, power))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#000000"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f4e79" '
        f'stroke-width="1.5"/>',
    ]
    if floor_dbm is not None and vmin <= floor_dbm <= vmax:
        y = py(floor_dbm)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + plot_w}" '
                     f'y2="{y:.2f}" stroke="#b22222" '
                     f'stroke-dasharray="4,4"/>')
    if title:
        parts.append(f'<text x="{left + plot_w / 2:.2f}" y="20" '
                     f'font-family="monospace" font-size="13" '
                     f'text-anchor="middle">{title}</text>')
    for f, anchor, x in ((fmin, "start", left), (fmax, "end", left + plot_w)):
        parts.append(f'<text x="{x}" y="{top + plot_h + 18}" '
                     f'font-family="monospace" font-size="11" '
                     f'text-anchor="{anchor}">{_fmt(f)}</text>')
    for v, y in ((vmin, top + plot_h), (vmax, top + 10)):
        parts.append(f'<text x="{left - 6}" y="{y:.2f}" '
                     f'font-family="monospace" font-size="11" '
                     f'text-anchor="end">{_fmt(v)}</text>')
    parts.append(f'<text x="{left + plot_w / 2:.2f}" '
                 f'y="{top + plot_h + 36}" font-family="monospace" '
                 f'font-size="12" text-anchor="middle">frequency offset '
                 f'(Hz)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
