"""Basic performance tests for fastweb grid computations."""

import time

import numpy as np
import pytest

from fastweb.blaschke import compose_orbit, random_blaschke
from fastweb.config import RunConfig
from fastweb.entire import FunctionSpec
from fastweb.fastesc import compute_RA
from fastweb.field import GridSpec, classify_grid, fundamental_hole, ra_field
from fastweb.maxmod import compute_Rf, get_profile


@pytest.mark.performance
class TestBasicPerformance:
    """Baselines for the per-point and per-grid kernels."""

    def test_config_creation_performance(self):
        from tests.fixtures.sample_configs import get_minimal_config

        start_time = time.perf_counter()
        for _ in range(100):
            RunConfig.from_dict(get_minimal_config())
        avg_time = (time.perf_counter() - start_time) / 100

        assert avg_time < 0.05, f"Average config creation took {avg_time:.4f}s, should be under 0.05s"

    def test_Rf_performance(self):
        f = FunctionSpec.create("half_exp")

        start_time = time.perf_counter()
        for _ in range(20):
            compute_Rf(get_profile(f))
        avg_time = (time.perf_counter() - start_time) / 20

        assert avg_time < 0.5, f"R_f bisection took {avg_time:.3f}s, should be under 0.5s"

    def test_escape_rate_performance(self):
        f = FunctionSpec.create("half_exp")
        points = np.linspace(0.8, 4.0, 50)

        start_time = time.perf_counter()
        for x in points:
            compute_RA(f, complex(x, 0.5))
        per_point = (time.perf_counter() - start_time) / len(points)

        assert per_point < 0.05, f"R_A took {per_point:.4f}s per point, should be under 0.05s"

    def test_blaschke_orbit_performance(self):
        rng = np.random.default_rng(1)
        seq = [random_blaschke(rng) for _ in range(1000)]

        start_time = time.perf_counter()
        compose_orbit(seq, 0.9 + 0j, 0.9)
        elapsed = time.perf_counter() - start_time

        assert elapsed < 1.0, f"1000-step composition took {elapsed:.3f}s, should be under 1.0s"

    @pytest.mark.slow
    def test_classify_grid_performance(self):
        f = FunctionSpec.create("half_exp")
        g = GridSpec.parse("0,0,6,6,64,64")

        start_time = time.perf_counter()
        hole = fundamental_hole(classify_grid(f, g, 2.0))
        elapsed = time.perf_counter() - start_time

        assert hole.cell_count > 0
        assert elapsed < 30.0, f"64x64 classification took {elapsed:.2f}s, should be under 30s"

    @pytest.mark.slow
    def test_threads_scale_grid_work(self):
        f = FunctionSpec.create("half_exp")
        g = GridSpec.parse("0,0,6,6,48,48")

        start_time = time.perf_counter()
        serial = ra_field(f, g, threads=1)
        serial_time = time.perf_counter() - start_time

        start_time = time.perf_counter()
        threaded = ra_field(f, g, threads=4)
        threaded_time = time.perf_counter() - start_time

        np.testing.assert_array_equal(serial.values, threaded.values)
        # pool start-up may dominate on small grids; only guard against pathologies
        assert threaded_time < 3.0 * serial_time + 5.0
