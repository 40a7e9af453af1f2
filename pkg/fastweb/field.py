"""Grid-scale computations.

Membership fields for ``A_R(f)``, fundamental holes and loops, the ``R_A``,
``v_n`` and ``h`` fields, the oscillation-based Julia proxy and statistics
of fields sampled along extracted contours.

Per-cell work runs on :mod:`fastweb.grid_engine` in fixed row blocks; the
reductions (flood fill, tracing, statistics) run on the completed field.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any

import networkx as nx
import numpy as np
import pandas as pd
from matplotlib.path import Path
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from fastweb import grid_engine
from fastweb.entire import ComplexPoint, FunctionSpec
from fastweb.exceptions import ContractError, GridError, OriginEscapingError, WindowError
from fastweb.extmag import ExtReal
from fastweb.fastesc import DEFAULT_NMAX, DEFAULT_TOL
from fastweb.maxmod import (
    DEFAULT_ESCAPE_THRESHOLD,
    DEFAULT_HORIZON,
    compute_Rf,
    escape_test,
    get_profile,
)
from fastweb.types import BoolArray, ComplexArray, FloatArray, ensure_positive, ensure_positive_int
from fastweb.utility.parallel import ordered_map, row_blocks

logger = logging.getLogger(__name__)

ROWS_PER_BLOCK = 16
FATOU_QUANTILE = 95.0
SUBMEAN_SLACK = 1e-3
SUBMEAN_RADIUS_CELLS = 2.0
SUBMEAN_ANGLES = 32
# a jump is an order of magnitude above the typical cell-to-cell change
USC_GRADIENT_FACTOR = 10.0

# 4-connected structuring element for regions
_CROSS = ndimage.generate_binary_structure(2, 1)


# =============================================================================
# Grid and field containers
# =============================================================================


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of cell centres over a rectangle.

    Row ``i`` has imaginary part ``ys[i]`` (increasing), column ``j`` real
    part ``xs[j]``. The middle row and column of an odd-sized grid sit
    exactly on the centre.
    """

    center: ComplexPoint
    width: float
    height: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        ensure_positive(self.width, "width")
        ensure_positive(self.height, "height")
        ensure_positive_int(self.nx, "nx")
        ensure_positive_int(self.ny, "ny")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs at least 2x2 cells, got {self.nx}x{self.ny}")

    @classmethod
    def parse(cls, text: str) -> GridSpec:
        """Parse ``"cx,cy,w,h,nx,ny"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 6:
            raise ValueError(f"expected 'cx,cy,w,h,nx,ny', got '{text}'")
        cx, cy, w, h = (float(p) for p in parts[:4])
        return cls(ComplexPoint(cx, cy), w, h, int(parts[4]), int(parts[5]))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GridSpec:
        center = data.get("center", (0.0, 0.0))
        return cls(
            ComplexPoint(float(center[0]), float(center[1])),
            float(data["width"]),
            float(data["height"]),
            int(data["nx"]),
            int(data["ny"]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": [self.center.re, self.center.im],
            "width": self.width,
            "height": self.height,
            "nx": self.nx,
            "ny": self.ny,
        }

    def __str__(self) -> str:
        return f"{self.center.re},{self.center.im},{self.width},{self.height},{self.nx},{self.ny}"

    @property
    def dx(self) -> float:
        return self.width / self.nx

    @property
    def dy(self) -> float:
        return self.height / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return self.ny, self.nx

    @property
    def xs(self) -> FloatArray:
        return self.center.re + (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.dx

    @property
    def ys(self) -> FloatArray:
        return self.center.im + (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.dy

    def centers(self) -> ComplexArray:
        """Cell centres as a ``(ny, nx)`` complex array."""
        return self.xs[None, :] + 1j * self.ys[:, None]

    def cell_of(self, z: complex) -> tuple[int, int] | None:
        """``(row, column)`` of the cell containing ``z``, None outside the grid."""
        j = math.floor((z.real - (self.center.re - self.width / 2.0)) / self.dx)
        i = math.floor((z.imag - (self.center.im - self.height / 2.0)) / self.dy)
        if 0 <= i < self.ny and 0 <= j < self.nx:
            return i, j
        return None

    def origin_cell(self) -> tuple[int, int] | None:
        return self.cell_of(0j)


@dataclass(frozen=True)
class ScalarField:
    """Real values on a grid; ``nan`` is the missing marker."""

    grid: GridSpec
    values: FloatArray
    label: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def defined(self) -> BoolArray:
        return ~np.isnan(self.values)

    @property
    def missing_count(self) -> int:
        return int(np.isnan(self.values).sum())

    def flat(self) -> FloatArray:
        """Row-major values."""
        return self.values.ravel()

    def to_frame(self) -> pd.DataFrame:
        xx, yy = np.meshgrid(self.grid.xs, self.grid.ys)
        return pd.DataFrame({"x": xx.ravel(), "y": yy.ravel(), "value": self.values.ravel()})


@dataclass(frozen=True)
class BitField:
    """Boolean values on a grid."""

    grid: GridSpec
    values: BoolArray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def count(self) -> int:
        return int(self.values.sum())

    def to_frame(self) -> pd.DataFrame:
        xx, yy = np.meshgrid(self.grid.xs, self.grid.ys)
        return pd.DataFrame(
            {"x": xx.ravel(), "y": yy.ravel(), "value": self.values.ravel().astype(np.int8)}
        )


@dataclass(frozen=True)
class Region:
    """4-connected set of cells."""

    grid: GridSpec
    mask: BoolArray
    contains_origin: bool

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return self.cell_count * self.grid.dx * self.grid.dy

    def touches_edge(self) -> bool:
        m = self.mask
        return bool(m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any())

    def contains(self, other: Region) -> bool:
        """Cell-wise mask containment ``other ⊆ self``."""
        return bool(np.all(self.mask | ~other.mask))


@dataclass(frozen=True)
class Contour:
    """Closed polyline; the first vertex is repeated at the end."""

    vertices: tuple[ComplexPoint, ...]
    label: float = math.nan

    def __post_init__(self) -> None:
        if len(self.vertices) < 4:
            raise GridError(f"a contour needs at least 4 vertices, got {len(self.vertices)}")
        if self.vertices[0] != self.vertices[-1]:
            raise GridError("contour is not closed")

    @classmethod
    def from_array(cls, points: ComplexArray, label: float = math.nan) -> Contour:
        pts = [ComplexPoint(float(p.real), float(p.imag)) for p in points]
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        return cls(tuple(pts), label)

    def as_array(self) -> ComplexArray:
        return np.array([v.to_complex() for v in self.vertices])

    @property
    def vertex_count(self) -> int:
        """Distinct vertices (the closing repeat is not counted)."""
        return len(self.vertices) - 1

    def length(self) -> float:
        return float(np.abs(np.diff(self.as_array())).sum())

    def signed_area(self) -> float:
        z = self.as_array()
        return 0.5 * float(np.sum(z[:-1].real * z[1:].imag - z[1:].real * z[:-1].imag))

    def enclosed_area(self) -> float:
        return abs(self.signed_area())

    def path(self) -> Path:
        z = self.as_array()
        return Path(np.column_stack([z.real, z.imag]), closed=True)

    def surrounds(self, points: ComplexArray) -> BoolArray:
        z = np.asarray(points, dtype=np.complex128).ravel()
        return self.path().contains_points(np.column_stack([z.real, z.imag]))

    def to_frame(self) -> pd.DataFrame:
        z = self.as_array()
        return pd.DataFrame(
            {"vertex": np.arange(z.size), "x": z.real, "y": z.imag, "label": self.label}
        )


def enclosed_area(c: Contour) -> float:
    return c.enclosed_area()


def contains_contour(outer: Contour, inner: Contour) -> bool:
    """True when every vertex of ``inner`` lies strictly inside ``outer``."""
    return bool(np.all(outer.surrounds(inner.as_array()[:-1])))


# =============================================================================
# Row-block driver
# =============================================================================


def _blocks(g: GridSpec) -> list[ComplexArray]:
    centers = g.centers()
    return [centers[a:b].ravel() for a, b in row_blocks(g.ny, ROWS_PER_BLOCK)]


def _assemble(parts: list[np.ndarray], g: GridSpec) -> np.ndarray:
    return np.concatenate(parts).reshape(g.shape)


# =============================================================================
# Membership and holes
# =============================================================================


def _require_escaping_radius(f: FunctionSpec, R: float, horizon: int, threshold: ExtReal) -> None:
    if not (R > 0 and math.isfinite(R)):
        raise ContractError("R must be a positive real", requirement="R > 0").add_context("R", R)
    if not escape_test(get_profile(f), R, horizon, threshold):
        raise ContractError(
            "M^n(R) does not escape within the horizon; A_R needs R > R_f",
            requirement="R > R_f",
        ).add_context("R", R)


def classify_ladder(
    f: FunctionSpec,
    g: GridSpec,
    radii: list[float],
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    threads: int = 1,
) -> list[BitField]:
    """:func:`classify_grid` for several radii, sharing one orbit trace per block."""
    for R in radii:
        _require_escaping_radius(f, R, horizon, threshold)
    task = partial(
        grid_engine.membership_block,
        function=f,
        horizon=horizon,
        threshold=threshold,
        radii=tuple(radii),
    )
    results = ordered_map(task, _blocks(g), threads)
    fields = []
    for k, R in enumerate(radii):
        codes = _assemble([block[k][0] for block in results], g)
        limited = int((codes == grid_engine.VERDICT_HORIZON_LIMITED).sum())
        meta = {
            "R": R,
            "horizon": horizon,
            "in": int((codes == grid_engine.VERDICT_IN).sum()),
            "out": int((codes == grid_engine.VERDICT_OUT).sum()),
            "horizon_limited": limited,
        }
        if limited:
            logger.warning("%d horizon-limited cells at R=%g recorded as false", limited, R)
        fields.append(BitField(g, codes == grid_engine.VERDICT_IN, meta))
    return fields


def classify_grid(
    f: FunctionSpec,
    g: GridSpec,
    R: float,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    threads: int = 1,
) -> BitField:
    """Cells whose centre is ``in`` ``A_R(f)`` at the horizon.

    Horizon-limited cells are recorded false; their count is in
    ``meta["horizon_limited"]``.

    Raises:
        ContractError: If ``M^n(R)`` does not escape within the horizon
    """
    return classify_ladder(f, g, [R], horizon, threshold, threads)[0]


def fundamental_hole(b: BitField) -> Region:
    """4-connected component of false cells containing the origin.

    Raises:
        WindowError: If the origin lies outside the grid
        OriginEscapingError: If the origin cell is true
    """
    cell = b.grid.origin_cell()
    if cell is None:
        raise WindowError("origin outside the grid window", R=b.meta.get("R"))
    if b.values[cell]:
        raise OriginEscapingError(R=b.meta.get("R"), horizon=b.meta.get("horizon"))
    labels, _ = ndimage.label(~b.values, structure=_CROSS)
    return Region(b.grid, labels == labels[cell], True)


# =============================================================================
# Marching squares
# =============================================================================

# corners: 0 = (i, j), 1 = (i, j+1), 2 = (i+1, j+1), 3 = (i+1, j); bit k set when corner k is inside
# edges:   "b" bottom 0-1, "r" right 1-2, "t" top 3-2, "l" left 0-3
_CORNER_EDGES = (("l", "b"), ("b", "r"), ("r", "t"), ("t", "l"))
_SEGMENTS: dict[int, tuple[tuple[str, str], ...]] = {
    1: (("l", "b"),),
    2: (("b", "r"),),
    3: (("l", "r"),),
    4: (("r", "t"),),
    6: (("b", "t"),),
    7: (("l", "t"),),
    8: (("t", "l"),),
    9: (("b", "t"),),
    11: (("r", "t"),),
    12: (("l", "r"),),
    13: (("b", "r"),),
    14: (("l", "b"),),
}


def _edge_key(i: int, j: int, edge: str) -> tuple[str, int, int]:
    if edge == "b":
        return ("h", i, j)
    if edge == "t":
        return ("h", i + 1, j)
    if edge == "l":
        return ("v", i, j)
    return ("v", i, j + 1)


def _square_segments(case: int, center_inside: bool) -> tuple[tuple[str, str], ...]:
    if case not in (5, 10):
        return _SEGMENTS[case]
    inside = (0, 2) if case == 5 else (1, 3)
    # a saddle cuts off the corners on the side the centre does not belong to
    cut = [k for k in range(4) if (k in inside) != center_inside]
    return tuple(_CORNER_EDGES[k] for k in cut)


def marching_squares(
    values: FloatArray, level: float, xs: FloatArray, ys: FloatArray
) -> list[ComplexArray]:
    """Closed level-set polylines of a sampled field.

    Samples sit at ``(xs[j], ys[i])``; ``nan`` counts as below the level.
    The field is padded by one sample below the level so every curve
    closes. Saddles are resolved by the mean of the four corners, a corner
    being inside when strictly above the level. Each polyline is oriented
    counter-clockwise and repeats its first vertex at the end.
    """
    v = np.where(np.isnan(values), -np.inf, values).astype(np.float64)
    finite = v[np.isfinite(v)]
    fill = (finite.min() if finite.size else level) - 1.0
    fill = min(fill, level - 1.0)
    v = np.where(np.isfinite(v), v, fill)
    v = np.pad(v, 1, constant_values=fill)
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    px = np.concatenate([[xs[0] - dx], xs, [xs[-1] + dx]])
    py = np.concatenate([[ys[0] - dy], ys, [ys[-1] + dy]])

    inside = v > level
    case = (
        inside[:-1, :-1].astype(np.int8)
        | (inside[:-1, 1:].astype(np.int8) << 1)
        | (inside[1:, 1:].astype(np.int8) << 2)
        | (inside[1:, :-1].astype(np.int8) << 3)
    )
    center = 0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, 1:] + v[1:, :-1])

    def crossing(key: tuple[str, int, int]) -> complex:
        kind, i, j = key
        if kind == "h":
            a, b = v[i, j], v[i, j + 1]
            tau = (level - a) / (b - a)
            return complex(px[j] + tau * (px[j + 1] - px[j]), py[i])
        a, b = v[i, j], v[i + 1, j]
        tau = (level - a) / (b - a)
        return complex(px[j], py[i] + tau * (py[i + 1] - py[i]))

    graph = nx.Graph()
    rows, cols = np.nonzero((case != 0) & (case != 15))
    for i, j in zip(rows.tolist(), cols.tolist()):
        for e1, e2 in _square_segments(int(case[i, j]), bool(center[i, j] > level)):
            graph.add_edge(_edge_key(i, j, e1), _edge_key(i, j, e2))

    loops: list[ComplexArray] = []
    for component in sorted(nx.connected_components(graph), key=min):
        sub = graph.subgraph(component)
        cycle = nx.find_cycle(sub, source=min(component))
        pts = np.array([crossing(u) for u, _ in cycle] + [crossing(cycle[0][0])])
        area = 0.5 * np.sum(pts[:-1].real * pts[1:].imag - pts[1:].real * pts[:-1].imag)
        if area < 0:
            pts = pts[::-1]
        loops.append(pts)
    return loops


def _largest(loops: list[ComplexArray]) -> ComplexArray:
    def area(pts: ComplexArray) -> float:
        return abs(0.5 * np.sum(pts[:-1].real * pts[1:].imag - pts[1:].real * pts[:-1].imag))

    return max(loops, key=area)


def extract_loop(r: Region, label: float = math.nan) -> Contour:
    """Outer boundary of a region as a closed polyline.

    Raises:
        WindowError: If the region touches the grid edge
    """
    if r.touches_edge():
        raise WindowError(
            "hole not compactly contained in the grid window; enlarge the grid at this R",
            R=None if math.isnan(label) else label,
        )
    filled = ndimage.binary_fill_holes(r.mask, structure=_CROSS)
    loops = marching_squares(filled.astype(np.float64), 0.5, r.grid.xs, r.grid.ys)
    if not loops:
        raise GridError("region is empty")
    if len(loops) > 1:
        logger.debug("region boundary split into %d loops; keeping the largest", len(loops))
    contour = Contour.from_array(_largest(loops), label)
    logger.debug(
        "loop at R=%s: %d vertices, area %.6g", label, contour.vertex_count, contour.enclosed_area()
    )
    return contour


def level_contour(s: ScalarField, level: float) -> Contour:
    """Largest closed curve where the field crosses ``level``."""
    loops = marching_squares(s.values, level, s.grid.xs, s.grid.ys)
    if not loops:
        raise GridError(f"field does not cross level {level}")
    return Contour.from_array(_largest(loops), level)


# =============================================================================
# R_A, v_n and h fields
# =============================================================================


def _status_counts(codes: np.ndarray, names: tuple[Any, ...]) -> dict[str, int]:
    return {
        (name.value if name is not None else "none"): int((codes == k).sum())
        for k, name in enumerate(names)
    }


def ra_field(
    f: FunctionSpec,
    g: GridSpec,
    tol: float = DEFAULT_TOL,
    nmax: int = DEFAULT_NMAX,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    threads: int = 1,
) -> ScalarField:
    """Extended ``R_A`` per cell centre.

    Non-escaping cells carry ``R_f``; undefined cells are missing. Status,
    truncation and escape-class counts are in ``meta``.

    Raises:
        ContractError: If ``f(0) != 0``
    """
    if not f.fixes_origin:
        raise ContractError(
            "the R_A field needs a function fixing the origin", requirement="f(0) = 0"
        ).add_context("function", str(f))
    r_f = compute_Rf(get_profile(f), horizon, threshold)
    task = partial(
        grid_engine.ra_block,
        function=f,
        horizon=horizon,
        threshold=threshold,
        tol=tol,
        nmax=nmax,
        r_f=r_f,
    )
    results = ordered_map(task, _blocks(g), threads)
    values = _assemble([r.value for r in results], g)
    status = _assemble([r.status for r in results], g)
    truncation = _assemble([r.truncation for r in results], g)
    escape = _assemble([r.escape_class for r in results], g)
    meta = {
        "R_f": r_f,
        "tol": tol,
        "nmax": nmax,
        "horizon": horizon,
        "status": _status_counts(status, grid_engine.RA_STATUSES),
        "truncation": _status_counts(truncation, grid_engine.TRUNCATIONS),
        "escape_class": _status_counts(escape, grid_engine.ESCAPE_CLASSES),
        "escaping_mask": escape == grid_engine.CLASS_ESCAPING,
        "bounded_mask": escape == grid_engine.CLASS_BOUNDED,
    }
    undefined = meta["status"]["undefined"]
    if undefined:
        logger.warning("%d cells with undefined R_A", undefined)
    return ScalarField(g, values, "R_A", meta)


def vn_fields(
    f: FunctionSpec,
    g: GridSpec,
    ns: list[int],
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    threads: int = 1,
) -> list[ScalarField]:
    """``v_n = -log M^{-n}(|f^n(z)|)`` for each ``n``; missing where ``f^n(z) = 0``."""
    task = partial(
        grid_engine.vn_block, function=f, horizon=horizon, threshold=threshold, ns=tuple(ns)
    )
    results = ordered_map(task, _blocks(g), threads)
    return [
        ScalarField(g, _assemble([block[k] for block in results], g), f"v_{n}", {"n": n})
        for k, n in enumerate(ns)
    ]


def vn_field(
    f: FunctionSpec,
    g: GridSpec,
    n: int,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    threads: int = 1,
) -> ScalarField:
    return vn_fields(f, g, [n], horizon, threshold, threads)[0]


def h_field(
    f: FunctionSpec,
    g: GridSpec,
    z0: ComplexPoint,
    n: int,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    stability_tol: float | None = None,
    threads: int = 1,
) -> ScalarField:
    """Log-modulus ratio against the base point ``z0``.

    Each cell uses the largest ``m <= n`` at which its orbit and the orbit of
    ``z0`` are in the same approximation regime. ``meta["index"]`` holds
    that ``m`` per cell.

    Raises:
        ContractError: If the orbit of ``z0`` does not escape at the horizon
    """
    base = grid_engine.trace_orbits(f, np.array([z0.to_complex()]), horizon, threshold)
    if not base.escaping[0]:
        raise ContractError(
            "base point does not escape at this horizon", requirement="z0 escaping"
        ).add_context("z0", str(z0))
    task = partial(
        grid_engine.h_block,
        function=f,
        horizon=horizon,
        threshold=threshold,
        base=base,
        n=n,
        stability_tol=stability_tol,
    )
    results = ordered_map(task, _blocks(g), threads)
    values = _assemble([r[0] for r in results], g)
    index = _assemble([r[1] for r in results], g)
    meta = {"z0": str(z0), "n": n, "stability_tol": stability_tol, "index": index}
    return ScalarField(g, values, "h", meta)


# =============================================================================
# Oscillation and field statistics
# =============================================================================


def _log_values(s: ScalarField) -> FloatArray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s.values > 0, np.log(s.values), np.nan)


def oscillation_field(s: ScalarField, log_scale: bool = True) -> ScalarField:
    """``max - min`` of the defined values in each 3x3 window.

    Cells that are themselves undefined (or nonpositive in log scale) are
    missing.
    """
    v = _log_values(s) if log_scale else s.values.astype(np.float64)
    defined = ~np.isnan(v)
    hi = ndimage.maximum_filter(np.where(defined, v, -np.inf), size=3, mode="constant", cval=-np.inf)
    lo = ndimage.minimum_filter(np.where(defined, v, np.inf), size=3, mode="constant", cval=np.inf)
    osc = np.where(defined, hi - lo, np.nan)
    return ScalarField(s.grid, osc, f"osc({s.label})", {"log_scale": log_scale})


def fatou_proxy_mask(
    osc: ScalarField, quantile: float = FATOU_QUANTILE, among: BoolArray | None = None
) -> BoolArray:
    """Cells whose oscillation is at most the given percentile.

    The percentile is taken over defined cells (restricted to ``among`` when
    given). This is the documented heuristic stand-in for the Fatou set.
    """
    pool = osc.defined if among is None else osc.defined & among
    if not pool.any():
        return np.zeros(osc.grid.shape, dtype=bool)
    cut = float(np.percentile(osc.values[pool], quantile))
    with np.errstate(invalid="ignore"):
        return pool & (osc.values <= cut)


def _interpolator(s: ScalarField, values: FloatArray | None = None) -> RegularGridInterpolator:
    data = s.values if values is None else values
    return RegularGridInterpolator(
        (s.grid.ys, s.grid.xs), data, method="linear", bounds_error=True
    )


def loop_level_stats(c: Contour, s: ScalarField) -> dict[str, float]:
    """Summary of the field sampled bilinearly along the contour.

    Samples that hit missing cells are dropped and counted.

    Raises:
        WindowError: If the contour leaves the field's sample range
    """
    z = c.as_array()[:-1]
    interp = _interpolator(s)
    try:
        samples = interp(np.column_stack([z.imag, z.real]))
    except ValueError as e:
        raise WindowError("contour exits the field") from e
    good = samples[~np.isnan(samples)]
    if good.size == 0:
        return {"mean": math.nan, "stddev": math.nan, "min": math.nan, "max": math.nan,
                "count": 0, "missing": int(samples.size)}
    return {
        "mean": float(good.mean()),
        "stddev": float(good.std()),
        "min": float(good.min()),
        "max": float(good.max()),
        "count": int(good.size),
        "missing": int(samples.size - good.size),
    }


def cell_gradient(s: ScalarField) -> float:
    """Median change of the field between neighbouring defined cells."""
    v = s.values
    diffs = np.concatenate([np.abs(np.diff(v, axis=0)).ravel(), np.abs(np.diff(v, axis=1)).ravel()])
    diffs = diffs[~np.isnan(diffs)]
    return float(np.median(diffs)) if diffs.size else math.nan


def submean_violations(
    v: ScalarField,
    mask: BoolArray,
    radius_cells: float = SUBMEAN_RADIUS_CELLS,
    slack: float = SUBMEAN_SLACK,
    angles: int = SUBMEAN_ANGLES,
) -> dict[str, Any]:
    """Discrete sub-mean-value test ``v(z) <= mean of v on a circle + slack``.

    Centres are the cells of ``mask`` whose 3x3 neighbourhood lies in the
    mask and whose test circle stays inside the grid and on defined values.
    """
    g = v.grid
    r = radius_cells * min(g.dx, g.dy)
    margin = int(math.ceil(radius_cells)) + 1
    core = ndimage.binary_erosion(mask & v.defined, structure=np.ones((3, 3), dtype=bool))
    core[:margin] = False
    core[-margin:] = False
    core[:, :margin] = False
    core[:, -margin:] = False
    rows, cols = np.nonzero(core)
    if rows.size == 0:
        return {"tested": 0, "violations": 0, "fraction": 0.0, "worst": 0.0}

    theta = 2.0 * math.pi * np.arange(angles) / angles
    cy = g.ys[rows][:, None] + r * np.sin(theta)[None, :]
    cx = g.xs[cols][:, None] + r * np.cos(theta)[None, :]
    ring = _interpolator(v)(np.column_stack([cy.ravel(), cx.ravel()])).reshape(cy.shape)
    complete = ~np.isnan(ring).any(axis=1)
    centre = v.values[rows, cols][complete]
    average = ring[complete].mean(axis=1)
    excess = centre - average
    bad = excess > slack
    tested = int(complete.sum())
    return {
        "tested": tested,
        "violations": int(bad.sum()),
        "fraction": float(bad.sum() / tested) if tested else 0.0,
        "worst": float(excess.max()) if tested else 0.0,
    }


def usc_violations(
    s: ScalarField, among: BoolArray | None = None, factor: float = USC_GRADIENT_FACTOR
) -> dict[str, Any]:
    """Grid proxy for upper semicontinuity of a positive field.

    A tested cell violates when ``log s(centre)`` is below the largest
    neighbouring log value by more than the allowance ``factor`` times the
    median cell-to-cell change of ``log s`` over the pool (see
    :func:`cell_gradient`).
    """
    logv = _log_values(s)
    defined = ~np.isnan(logv)
    pool = defined if among is None else defined & among
    tested = ndimage.binary_erosion(pool, structure=np.ones((3, 3), dtype=bool))
    if not tested.any():
        return {"tested": 0, "violations": 0, "fraction": 0.0, "gradient": 0.0, "allowance": 0.0}
    gradient = cell_gradient(ScalarField(s.grid, np.where(pool, logv, np.nan), "log"))
    allowance = factor * gradient
    hi = ndimage.maximum_filter(np.where(defined, logv, -np.inf), size=3, mode="constant", cval=-np.inf)
    bad = tested & (hi - logv > allowance)
    count = int(tested.sum())
    return {
        "tested": count,
        "violations": int(bad.sum()),
        "fraction": float(bad.sum() / count),
        "gradient": gradient,
        "allowance": allowance,
    }


__all__ = [
    "BitField",
    "Contour",
    "GridSpec",
    "Region",
    "ScalarField",
    "cell_gradient",
    "classify_grid",
    "classify_ladder",
    "contains_contour",
    "enclosed_area",
    "extract_loop",
    "fatou_proxy_mask",
    "fundamental_hole",
    "h_field",
    "level_contour",
    "loop_level_stats",
    "marching_squares",
    "oscillation_field",
    "ra_field",
    "submean_violations",
    "usc_violations",
    "vn_field",
    "vn_fields",
]
