"""Unit tests for grids, regions, contours and the grid-scale fields."""

import math

import numpy as np
import pandas as pd
import pytest

from fastweb.entire import ComplexPoint
from fastweb.exceptions import ContractError, GridError, OriginEscapingError, WindowError
from fastweb.field import (
    BitField,
    Contour,
    GridSpec,
    ScalarField,
    cell_gradient,
    classify_grid,
    classify_ladder,
    contains_contour,
    enclosed_area,
    extract_loop,
    fatou_proxy_mask,
    fundamental_hole,
    h_field,
    level_contour,
    loop_level_stats,
    marching_squares,
    oscillation_field,
    ra_field,
    submean_violations,
    usc_violations,
    vn_field,
)

from tests.conftest import HALF_EXP_RF

UNIT_GRID = "0,0,11,11,11,11"


def ring_field(grid: GridSpec, radius: int) -> BitField:
    """True on the square ring of cells at Chebyshev distance ``radius`` from the centre cell."""
    i, j = np.indices(grid.shape)
    ci, cj = grid.ny // 2, grid.nx // 2
    ring = np.maximum(np.abs(i - ci), np.abs(j - cj)) == radius
    return BitField(grid, ring, {"R": 1.0, "horizon": 10})


def unit_square(offset: complex = 0j, side: float = 1.0, label: float = math.nan) -> Contour:
    corners = np.array([0, side, side + side * 1j, side * 1j]) + offset
    return Contour.from_array(corners, label)


class TestGridSpec:
    def test_parse_and_geometry(self, small_grid):
        assert small_grid.shape == (31, 31)
        assert small_grid.dx == pytest.approx(6.0 / 31)
        assert small_grid.xs[15] == pytest.approx(0.0, abs=1e-15)
        assert small_grid.ys[15] == pytest.approx(0.0, abs=1e-15)
        assert small_grid.centers().shape == (31, 31)
        assert small_grid.origin_cell() == (15, 15)

    def test_text_and_dict_round_trip(self, tiny_grid):
        assert GridSpec.parse(str(tiny_grid)) == tiny_grid
        assert GridSpec.from_dict(tiny_grid.to_dict()) == tiny_grid

    @pytest.mark.parametrize("text", ["0,0,4,4,9", "0,0,4,4,1,9", "0,0,-4,4,9,9", "0,0,4,4,a,9"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            GridSpec.parse(text)

    def test_cell_of(self, tiny_grid):
        assert tiny_grid.cell_of(complex(1.9, -1.9)) == (0, 8)
        assert tiny_grid.cell_of(complex(2.5, 0.0)) is None

    def test_origin_outside(self):
        assert GridSpec.parse("10,10,4,4,9,9").origin_cell() is None


class TestContainers:
    def test_shape_must_match(self, tiny_grid):
        with pytest.raises(GridError):
            ScalarField(tiny_grid, np.zeros((3, 3)))
        with pytest.raises(GridError):
            BitField(tiny_grid, np.zeros((9, 8), dtype=bool))

    def test_scalar_field_frame(self, tiny_grid):
        values = np.arange(81, dtype=float).reshape(9, 9)
        values[0, 0] = np.nan
        s = ScalarField(tiny_grid, values, "demo")
        assert s.missing_count == 1
        frame = s.to_frame()
        assert list(frame.columns) == ["x", "y", "value"]
        assert len(frame) == 81
        assert frame["y"].iloc[0] == pytest.approx(tiny_grid.ys[0])
        assert frame["value"].iloc[9] == 9.0

    def test_bit_field_frame(self, tiny_grid):
        b = BitField(tiny_grid, np.eye(9, dtype=bool))
        assert b.count == 9
        assert b.to_frame()["value"].sum() == 9


class TestContour:
    def test_unit_square(self):
        c = unit_square()
        assert c.vertex_count == 4
        assert c.enclosed_area() == pytest.approx(1.0)
        assert enclosed_area(c) == pytest.approx(1.0)
        assert c.signed_area() == pytest.approx(1.0)
        assert c.length() == pytest.approx(4.0)

    def test_needs_closed_polyline(self):
        with pytest.raises(GridError):
            Contour.from_array(np.array([0.0, 1.0]))
        with pytest.raises(GridError):
            Contour(tuple(ComplexPoint(float(k), 0.0) for k in range(4)))

    def test_nesting(self):
        outer = unit_square(side=4.0)
        inner = unit_square(offset=1 + 1j)
        assert contains_contour(outer, inner)
        assert not contains_contour(inner, outer)
        assert outer.surrounds(np.array([2 + 2j, 5 + 5j])).tolist() == [True, False]

    def test_frame(self):
        frame = unit_square(label=2.0).to_frame()
        assert list(frame.columns) == ["vertex", "x", "y", "label"]
        assert len(frame) == 5
        assert (frame["label"] == 2.0).all()


class TestMarchingSquares:
    def test_single_cell_gives_a_diamond(self):
        values = np.zeros((5, 5))
        values[2, 2] = 1.0
        xs = ys = np.arange(5, dtype=float)
        loops = marching_squares(values, 0.5, xs, ys)
        assert len(loops) == 1
        loop = loops[0]
        assert loop[0] == loop[-1]
        assert Contour.from_array(loop).signed_area() == pytest.approx(0.5)

    def test_saddle_resolution(self):
        values = np.zeros((4, 4))
        values[1, 1] = values[2, 2] = 1.0
        xs = ys = np.arange(4, dtype=float)
        # the saddle centre averages 0.5: split at 0.5, joined below it
        assert len(marching_squares(values, 0.5, xs, ys)) == 2
        assert len(marching_squares(values, 0.4, xs, ys)) == 1

    def test_missing_values_count_as_below(self):
        values = np.full((5, 5), np.nan)
        values[2, 2] = 1.0
        xs = ys = np.arange(5, dtype=float)
        assert len(marching_squares(values, 0.5, xs, ys)) == 1

    def test_level_contour_of_a_cone(self):
        g = GridSpec.parse("0,0,4,4,81,81")
        s = ScalarField(g, -np.abs(g.centers()), "cone")
        c = level_contour(s, -1.0)
        assert c.label == -1.0
        assert c.enclosed_area() == pytest.approx(math.pi, rel=2e-2)
        with pytest.raises(GridError):
            level_contour(s, 5.0)


class TestHolesAndLoops:
    def test_hole_inside_a_ring(self):
        b = ring_field(GridSpec.parse(UNIT_GRID), 3)
        hole = fundamental_hole(b)
        assert hole.contains_origin
        assert hole.cell_count == 25
        assert hole.area == pytest.approx(25.0)
        assert not hole.touches_edge()

    def test_loop_around_the_hole(self):
        b = ring_field(GridSpec.parse(UNIT_GRID), 3)
        loop = extract_loop(fundamental_hole(b), 1.0)
        assert loop.label == 1.0
        # a 5x5 block of unit cells with its four corners cut
        assert loop.enclosed_area() == pytest.approx(24.5)
        assert loop.surrounds(np.array([0j]))[0]

    def test_nested_rings_nest(self):
        g = GridSpec.parse(UNIT_GRID)
        outer = extract_loop(fundamental_hole(ring_field(g, 4)), 1.0)
        inner = extract_loop(fundamental_hole(ring_field(g, 2)), 2.0)
        assert contains_contour(outer, inner)

    def test_open_hole_is_a_window_error(self):
        g = GridSpec.parse(UNIT_GRID)
        hole = fundamental_hole(BitField(g, np.zeros(g.shape, dtype=bool)))
        assert hole.touches_edge()
        with pytest.raises(WindowError):
            extract_loop(hole, 1.0)

    def test_escaping_origin(self):
        g = GridSpec.parse(UNIT_GRID)
        with pytest.raises(OriginEscapingError) as exc_info:
            fundamental_hole(BitField(g, np.ones(g.shape, dtype=bool), {"R": 1.0, "horizon": 10}))
        assert exc_info.value.context["R"] == 1.0

    def test_origin_outside_window(self):
        g = GridSpec.parse("10,10,4,4,9,9")
        with pytest.raises(WindowError):
            fundamental_hole(BitField(g, np.zeros(g.shape, dtype=bool)))

    def test_region_containment(self):
        g = GridSpec.parse(UNIT_GRID)
        big = fundamental_hole(ring_field(g, 4))
        small = fundamental_hole(ring_field(g, 2))
        assert big.contains(small)
        assert not small.contains(big)


class TestMembershipFields:
    def test_ladder_is_nested(self, half_exp, small_grid):
        low, high = classify_ladder(half_exp, small_grid, [1.0, 2.0])
        assert low.meta["R"] == 1.0 and high.meta["R"] == 2.0
        assert not np.any(high.values & ~low.values)
        # the positive real axis near the right edge escapes fast
        assert high.values[15, 30]
        assert not low.values[15, 15]
        assert low.meta["in"] == low.count
        assert {"in", "out", "horizon_limited", "horizon"} <= set(low.meta)

    def test_single_radius(self, half_exp, tiny_grid):
        b = classify_grid(half_exp, tiny_grid, 2.0)
        assert b.values.shape == tiny_grid.shape
        assert b.meta["horizon"] == 60

    @pytest.mark.parametrize("R", [0.5, 0.0, math.nan])
    def test_radius_below_Rf_rejected(self, half_exp, tiny_grid, R):
        with pytest.raises(ContractError):
            classify_grid(half_exp, tiny_grid, R)

    def test_hole_reaching_the_edge(self, half_exp, small_grid):
        # along the negative axis the hole runs out of the window
        hole = fundamental_hole(classify_grid(half_exp, small_grid, 2.0))
        assert hole.touches_edge()
        with pytest.raises(WindowError):
            extract_loop(hole, 2.0)

    def test_threads_do_not_change_the_result(self, half_exp, small_grid):
        serial = classify_grid(half_exp, small_grid, 1.5, threads=1)
        threaded = classify_grid(half_exp, small_grid, 1.5, threads=3)
        np.testing.assert_array_equal(serial.values, threaded.values)


class TestRateFields:
    def test_ra_field_on_the_real_axis(self, half_exp, tiny_grid):
        s = ra_field(half_exp, tiny_grid)
        xs = tiny_grid.xs
        for j in (6, 7, 8):
            assert s.values[4, j] == pytest.approx(xs[j], rel=1e-6)
        # bounded cells carry R_f
        assert s.values[4, 4] == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert s.values[4, 5] == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert s.meta["R_f"] == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert sum(s.meta["status"].values()) == 81
        assert s.meta["bounded_mask"][4, 4]

    def test_ra_field_needs_fixed_origin(self, pure_exp, tiny_grid):
        with pytest.raises(ContractError):
            ra_field(pure_exp, tiny_grid)

    def test_vn_field(self, half_exp, tiny_grid):
        v = vn_field(half_exp, tiny_grid, 2)
        assert v.label == "v_2"
        assert v.values[4, 8] == pytest.approx(-math.log(tiny_grid.xs[8]), rel=1e-9)
        assert math.isnan(v.values[4, 4])

    def test_h_field(self, half_exp, tiny_grid):
        h = h_field(half_exp, tiny_grid, ComplexPoint(2.0, 0.0), 3)
        index = h.meta["index"]
        assert index.shape == tiny_grid.shape
        assert 0 <= index[4, 8] <= 3
        assert np.isfinite(h.values[4, 8])
        assert h.values[4, 8] > 0

    def test_h_field_base_must_escape(self, half_exp, tiny_grid):
        with pytest.raises(ContractError):
            h_field(half_exp, tiny_grid, ComplexPoint(0.5, 0.0), 3)


class TestOscillationAndStatistics:
    def test_constant_field_has_no_oscillation(self, tiny_grid):
        osc = oscillation_field(ScalarField(tiny_grid, np.full(tiny_grid.shape, 2.0)))
        assert np.all(osc.values == 0.0)

    def test_ramp(self, tiny_grid):
        ramp = ScalarField(tiny_grid, np.tile(tiny_grid.xs + 10.0, (9, 1)))
        osc = oscillation_field(ramp, log_scale=False)
        assert osc.values[4, 4] == pytest.approx(2.0 * tiny_grid.dx)
        assert osc.values[4, 0] == pytest.approx(tiny_grid.dx)

    def test_missing_cells_stay_missing(self, tiny_grid):
        values = np.full(tiny_grid.shape, 2.0)
        values[3, 3] = np.nan
        values[5, 5] = -1.0
        osc = oscillation_field(ScalarField(tiny_grid, values))
        assert math.isnan(osc.values[3, 3])
        assert math.isnan(osc.values[5, 5])
        assert osc.values[0, 0] == 0.0

    def test_fatou_proxy_percentile(self):
        g = GridSpec.parse("0,0,10,10,10,10")
        osc = ScalarField(g, np.arange(100, dtype=float).reshape(10, 10))
        assert fatou_proxy_mask(osc).sum() == 95
        among = osc.values < 50
        assert fatou_proxy_mask(osc, among=among).sum() == 47
        empty = ScalarField(g, np.full((10, 10), np.nan))
        assert not fatou_proxy_mask(empty).any()

    def test_cell_gradient(self):
        g = GridSpec.parse("0,0,4,4,9,9")
        plane = g.centers()
        s = ScalarField(g, plane.real + plane.imag)
        assert cell_gradient(s) == pytest.approx(g.dx)

    def test_submean_on_sub_and_superharmonic_fields(self):
        g = GridSpec.parse("0,0,4,4,41,41")
        z = g.centers()
        everywhere = np.ones(g.shape, dtype=bool)
        sub = submean_violations(ScalarField(g, np.abs(z) ** 2), everywhere)
        assert sub["tested"] > 0
        assert sub["violations"] == 0
        sup = submean_violations(ScalarField(g, -(np.abs(z) ** 2)), everywhere)
        assert sup["fraction"] == 1.0

    def test_submean_with_nothing_to_test(self, tiny_grid):
        out = submean_violations(
            ScalarField(tiny_grid, np.zeros(tiny_grid.shape)), np.zeros(tiny_grid.shape, dtype=bool)
        )
        assert out == {"tested": 0, "violations": 0, "fraction": 0.0, "worst": 0.0}

    def test_usc_on_a_constant_field(self, tiny_grid):
        out = usc_violations(ScalarField(tiny_grid, np.full(tiny_grid.shape, 3.0)))
        assert out["tested"] == 49
        assert out["violations"] == 0
        assert out["allowance"] == 0.0

    def test_usc_catches_a_planted_dip(self, tiny_grid):
        i, j = np.indices(tiny_grid.shape)
        values = 2.0 + 0.05 * j + 0.03 * i
        values[4, 4] = 0.5
        out = usc_violations(ScalarField(tiny_grid, values))
        assert out["tested"] == 49
        assert out["violations"] == 1
        assert out["allowance"] == pytest.approx(10.0 * out["gradient"])
        assert out["allowance"] < math.log(values[4, 5] / 0.5)

    def test_usc_count_is_not_capped(self, small_grid):
        i, j = np.indices(small_grid.shape)
        values = 2.0 + 0.05 * j + 0.03 * i
        dips = (i % 4 == 2) & (j % 4 == 2) & (i < 30) & (j < 30)
        values[dips] = 0.5
        out = usc_violations(ScalarField(small_grid, values))
        assert out["tested"] == 29 * 29
        assert out["violations"] == int(dips.sum()) == 49
        assert out["fraction"] > 0.05

    def test_loop_level_stats(self, tiny_grid):
        s = ScalarField(tiny_grid, np.full(tiny_grid.shape, 3.0))
        stats = loop_level_stats(unit_square(offset=-0.5 - 0.5j), s)
        assert stats["mean"] == pytest.approx(3.0)
        assert stats["stddev"] == pytest.approx(0.0)
        assert stats["count"] == 4
        assert stats["missing"] == 0

    def test_loop_level_stats_outside_the_field(self, tiny_grid):
        s = ScalarField(tiny_grid, np.full(tiny_grid.shape, 3.0))
        with pytest.raises(WindowError):
            loop_level_stats(unit_square(offset=5 + 5j), s)

    def test_loop_level_stats_on_missing_values(self, tiny_grid):
        s = ScalarField(tiny_grid, np.full(tiny_grid.shape, np.nan))
        stats = loop_level_stats(unit_square(offset=-0.5 - 0.5j), s)
        assert stats["count"] == 0
        assert stats["missing"] == 4
        assert math.isnan(stats["mean"])


def test_frames_are_pandas(tiny_grid):
    assert isinstance(ScalarField(tiny_grid, np.zeros(tiny_grid.shape)).to_frame(), pd.DataFrame)
