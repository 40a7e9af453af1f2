"""PNG heatmaps of scalar fields and SVG drawings of contours.

Figures are drawn on the Agg canvas directly, without pyplot's global
state, with the fixed colormap ``viridis``. Inputs are the CSV files the
``ra-field``, ``h-field``, ``osc``, ``classify`` and ``loops`` subcommands
write.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from fastweb.entire import ComplexPoint
from fastweb.exceptions import FileFormatError
from fastweb.field import Contour, GridSpec, ScalarField
from fastweb.types import FilePath

logger = logging.getLogger(__name__)

COLORMAP = "viridis"
FIGURE_DPI = 100
SVG_SIZE = 512
SVG_STROKES = ("#440154", "#31688e", "#35b779", "#fde725", "#21918c", "#90d743")

FIELD_COLUMNS = ("x", "y", "value")
CONTOUR_COLUMNS = ("vertex", "x", "y", "label")


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise FileFormatError(f"cannot read CSV: {e}", file_path=str(path), expected_format="csv") from e


def _axis(values: np.ndarray, name: str, path: Path) -> tuple[float, float, int]:
    """Centre, extent and count of an equally spaced coordinate axis."""
    unique = np.unique(values)
    if unique.size < 2:
        raise FileFormatError(
            f"column '{name}' needs at least two distinct values",
            file_path=str(path),
            expected_format="grid csv",
        )
    steps = np.diff(unique)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        raise FileFormatError(
            f"column '{name}' is not equally spaced", file_path=str(path), expected_format="grid csv"
        )
    step = float(steps[0])
    return float(unique[0] + unique[-1]) / 2.0, step * unique.size, int(unique.size)


def read_field_csv(file_path: FilePath) -> ScalarField:
    """Rebuild a field from an ``x,y,value`` CSV on a regular grid.

    Raises:
        FileFormatError: If the columns are missing or the points are not a
            complete regular grid
    """
    path = Path(file_path)
    frame = _read_csv(path)
    missing = [c for c in FIELD_COLUMNS if c not in frame.columns]
    if missing:
        raise FileFormatError(
            f"missing columns {missing}", file_path=str(path), expected_format="x,y,value"
        )
    cx, width, nx = _axis(frame["x"].to_numpy(float), "x", path)
    cy, height, ny = _axis(frame["y"].to_numpy(float), "y", path)
    if len(frame) != nx * ny:
        raise FileFormatError(
            f"expected {nx * ny} rows for a {nx}x{ny} grid, found {len(frame)}",
            file_path=str(path),
            expected_format="grid csv",
        )
    grid = GridSpec(ComplexPoint(cx, cy), width, height, nx, ny)
    ordered = frame.sort_values(["y", "x"], kind="mergesort")
    values = pd.to_numeric(ordered["value"], errors="coerce").to_numpy(float).reshape(ny, nx)
    return ScalarField(grid, values, path.stem)


def read_contour_csv(file_path: FilePath) -> list[Contour]:
    """Contours from a ``vertex,x,y,label`` CSV, one per label."""
    path = Path(file_path)
    frame = _read_csv(path)
    missing = [c for c in CONTOUR_COLUMNS if c not in frame.columns]
    if missing:
        raise FileFormatError(
            f"missing columns {missing}", file_path=str(path), expected_format="vertex,x,y,label"
        )
    contours = []
    for label, part in frame.groupby("label", sort=True):
        part = part.sort_values("vertex")
        points = part["x"].to_numpy(float) + 1j * part["y"].to_numpy(float)
        if points.size < 3:
            raise FileFormatError(
                f"contour {label} has fewer than 3 vertices", file_path=str(path)
            )
        contours.append(Contour.from_array(points, float(label)))
    return contours


def render_field_png(
    s: ScalarField, file_path: FilePath, log_scale: bool = False, title: str | None = None
) -> Path:
    """Heatmap of a field; missing cells are left transparent."""
    values = s.values.astype(np.float64)
    if log_scale:
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(values > 0, np.log(values), np.nan)
    g = s.grid
    extent = (
        g.center.re - g.width / 2.0,
        g.center.re + g.width / 2.0,
        g.center.im - g.height / 2.0,
        g.center.im + g.height / 2.0,
    )
    fig = Figure(figsize=(6.0, 6.0 * g.height / g.width + 0.5), dpi=FIGURE_DPI)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    image = ax.imshow(
        np.ma.masked_invalid(values), origin="lower", extent=extent, cmap=COLORMAP, interpolation="nearest"
    )
    fig.colorbar(image, ax=ax, label=f"log {s.label}" if log_scale else s.label)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title if title is not None else s.label)
    path = Path(file_path)
    fig.savefig(path, format="png", metadata={"Software": None})
    logger.debug("rendered %s (%dx%d)", path, g.nx, g.ny)
    return path


def contours_svg(contours: list[Contour], bounds: tuple[float, float, float, float] | None = None) -> str:
    """SVG document with one closed path per contour.

    ``bounds`` is ``(xmin, xmax, ymin, ymax)`` in the complex plane and
    defaults to the bounding box of all vertices with a 5% margin.
    """
    if not contours:
        raise FileFormatError("no contours to draw", expected_format="contour csv")
    if bounds is None:
        pts = np.concatenate([c.as_array() for c in contours])
        xmin, xmax = float(pts.real.min()), float(pts.real.max())
        ymin, ymax = float(pts.imag.min()), float(pts.imag.max())
        pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-12)
        bounds = (xmin - pad, xmax + pad, ymin - pad, ymax + pad)
    xmin, xmax, ymin, ymax = bounds
    scale = SVG_SIZE / max(xmax - xmin, ymax - ymin)
    width = math.ceil((xmax - xmin) * scale)
    height = math.ceil((ymax - ymin) * scale)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for k, c in enumerate(contours):
        z = c.as_array()
        # the SVG y axis points down
        xs = (z.real - xmin) * scale
        ys = (ymax - z.imag) * scale
        moves = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs[:-1], ys[:-1]))
        stroke = SVG_STROKES[k % len(SVG_STROKES)]
        label = "" if math.isnan(c.label) else f' data-label="{c.label:.12g}"'
        lines.append(f'  <path d="M {moves} Z" fill="none" stroke="{stroke}" stroke-width="1.5"{label}/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_contours_svg(
    contours: list[Contour], file_path: FilePath, grid: GridSpec | None = None
) -> Path:
    """Write :func:`contours_svg`; the grid window fixes the view when given."""
    bounds = None
    if grid is not None:
        bounds = (
            grid.center.re - grid.width / 2.0,
            grid.center.re + grid.width / 2.0,
            grid.center.im - grid.height / 2.0,
            grid.center.im + grid.height / 2.0,
        )
    path = Path(file_path)
    path.write_text(contours_svg(contours, bounds), encoding="utf-8")
    return path


def render_file(input_path: FilePath, out_dir: FilePath, log_scale: bool = False) -> Path:
    """Render a field CSV to PNG or a contour CSV to SVG, chosen by its columns.

    Raises:
        FileFormatError: If the file is neither
    """
    path = Path(input_path)
    if not path.is_file():
        raise FileFormatError("input file does not exist", file_path=str(path))
    header = _read_csv(path).columns
    target = Path(out_dir)
    if all(c in header for c in CONTOUR_COLUMNS):
        return render_contours_svg(read_contour_csv(path), target / f"{path.stem}.svg")
    if all(c in header for c in FIELD_COLUMNS):
        return render_field_png(read_field_csv(path), target / f"{path.stem}.png", log_scale)
    raise FileFormatError(
        f"unrecognised columns {list(header)}",
        file_path=str(path),
        expected_format="x,y,value or vertex,x,y,label",
    )


__all__ = [
    "contours_svg",
    "read_contour_csv",
    "read_field_csv",
    "render_contours_svg",
    "render_field_png",
    "render_file",
]
