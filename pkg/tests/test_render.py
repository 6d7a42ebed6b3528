import math

import numpy as np
import pytest

from nhdimer import SweepGrid
from nhdimer.render import (INVALID_FILL, colormap_hex, render_heatmap,
                            render_spectrum, write_svg)


def demo_grid(n1=3, n2=4, n_invalid=0):
    cells = np.arange(n1 * n2, dtype=float).reshape(n1, n2)
    valid = np.ones((n1, n2), dtype=bool)
    flat_cells = cells.ravel()
    flat_valid = valid.ravel()
    for k in range(n_invalid):
        flat_cells[k] = math.nan
        flat_valid[k] = False
    return SweepGrid("delta_g_db", np.linspace(0.0, 8.4, n1), "phi_rad",
                     np.linspace(0.0, 2 * math.pi, n2), cells, valid,
                     {"kind": "demo_dbm"})


def test_colormap_endpoints_and_clamping():
    assert colormap_hex(0.0) == "#440154"
    assert colormap_hex(1.0) == "#fde725"
    assert colormap_hex(-5.0) == colormap_hex(0.0)
    assert colormap_hex(7.0) == colormap_hex(1.0)
    # midpoint interpolates, not snaps
    assert colormap_hex(0.5) not in (colormap_hex(0.0), colormap_hex(1.0))


def test_heatmap_structure():
    grid = demo_grid()
    svg = render_heatmap(grid)
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")
    # one rect per cell, plus background, frame, 32 legend steps, legend frame
    assert svg.count("<rect ") == 3 * 4 + 2 + 32 + 1
    # axis labels pick up units from the axis-name suffix
    assert "delta_g (dB)" in svg
    assert "phi (rad)" in svg
    assert "demo_dbm" in svg  # metadata kind used as default title
    assert INVALID_FILL not in svg
    assert "invalid:" not in svg


def test_heatmap_invalid_cells_and_legend():
    grid = demo_grid(n_invalid=2)
    svg = render_heatmap(grid)
    assert svg.count(INVALID_FILL) == 2
    assert "invalid: 2" in svg


def test_heatmap_is_deterministic():
    grid = demo_grid(n_invalid=1)
    assert render_heatmap(grid) == render_heatmap(grid)


def test_heatmap_title_override():
    svg = render_heatmap(demo_grid(), title="custom title")
    assert "custom title" in svg
    assert "demo_dbm" not in svg


def test_heatmap_single_cell():
    grid = SweepGrid("a_db", np.array([1.0]), "b_rad", np.array([2.0]),
                     np.array([[5.0]]), np.array([[True]]), {})
    svg = render_heatmap(grid)
    assert svg.count("<rect ") == 1 + 2 + 32 + 1


def test_heatmap_empty_grid_raises():
    empty = SweepGrid("a", np.array([]), "b", np.array([]),
                      np.empty((0, 0)), np.empty((0, 0), dtype=bool), {})
    with pytest.raises(ValueError):
        render_heatmap(empty)


def test_heatmap_overlay_segments():
    grid = demo_grid()
    # overlay rows are (axis2, axis1); the NaN row splits the polyline
    overlay = np.array([
        [0.5, 1.0], [1.0, 2.0], [1.5, 3.0],
        [math.nan, math.nan],
        [4.0, 5.0], [4.5, 6.0],
    ])
    svg = render_heatmap(grid, overlay=overlay)
    assert svg.count("<polyline ") == 2
    # out-of-range points are dropped: one stray point leaves no polyline
    svg_short = render_heatmap(grid, overlay=np.array([[0.5, 1.0],
                                                       [99.0, 99.0]]))
    assert "<polyline " not in svg_short
    with pytest.raises(ValueError):
        render_heatmap(grid, overlay=np.zeros((3, 3)))


def test_write_svg(tmp_path):
    path = tmp_path / "demo.svg"
    svg = render_heatmap(demo_grid())
    write_svg(svg, path)
    assert path.read_text(encoding="utf-8") == svg


def test_render_spectrum_basics():
    freq = np.linspace(-5e6, 5e6, 101)
    power = -60.0 + 40.0 * np.exp(-((freq / 1e6) ** 2))
    svg = render_spectrum(freq, power, title="spec", floor_dbm=-44.0)
    assert svg.count("<polyline ") == 1
    assert "spec" in svg
    assert "<line " in svg  # floor marker inside the range
    no_floor = render_spectrum(freq, power, floor_dbm=-500.0)
    assert "<line " not in no_floor
    with pytest.raises(ValueError):
        render_spectrum(freq, power[:-1])
    with pytest.raises(ValueError):
        render_spectrum([1.0], [2.0])


def test_render_spectrum_flat_trace():
    svg = render_spectrum(np.linspace(0, 1, 8), np.zeros(8))
    assert svg.count("<polyline ") == 1
