"""Unit tests for pointwise orbits, A_R membership and escape rates."""

import math

import pytest

from fastweb.entire import ComplexPoint
from fastweb.enums import EscapeClass, Membership, RAStatus, TruncationReason
from fastweb.exceptions import ContractError
from fastweb.extmag import ExtReal
from fastweb.fastesc import (
    bounded_log_radius,
    compute_RA,
    in_AR,
    orbit,
    ra_sequence,
)

from tests.conftest import HALF_EXP_RF


class TestOrbit:
    def test_orbit_of_two_escapes_at_three(self, half_exp):
        rec = orbit(half_exp, ComplexPoint(2.0, 0.0))
        assert rec.escape_class is EscapeClass.ESCAPING
        assert rec.escape_index == 3
        assert rec.horizon_used == 4
        assert len(rec.log_moduli) == 5
        assert rec.log_modulus(1) == pytest.approx(2.0)
        assert rec.log_modulus(2) == pytest.approx(math.exp(2.0) + 2.0 + math.log(0.5))

    def test_flagging_starts_past_float_range(self, half_exp):
        rec = orbit(half_exp, 2.0)
        assert rec.first_approximate == 3
        assert rec.approximate_flags == [False, False, False, True, True]
        assert isinstance(rec.log_modulus(4), ExtReal)

    def test_immediate_escape(self, half_exp):
        rec = orbit(half_exp, 20.0)
        assert rec.escape_index == 1
        assert rec.horizon_used == 2

    def test_bounded_orbits(self, half_exp):
        for z in (0.5, -5.0, complex(0.1, 0.2)):
            rec = orbit(half_exp, z, horizon=40)
            assert rec.escape_class is EscapeClass.BOUNDED_AT_HORIZON
            assert rec.escape_index is None
            assert rec.horizon_used == 40

    def test_short_horizon_leaves_orbit_unclassified(self, half_exp):
        # log|f^2(2)| is about 8.7: above e, below the threshold
        rec = orbit(half_exp, 2.0, horizon=2)
        assert rec.escape_class is EscapeClass.INDETERMINATE
        assert rec.horizon_used == 2

    def test_crossing_on_last_step_counts(self, half_exp):
        rec = orbit(half_exp, 2.0, horizon=3)
        assert rec.escape_class is EscapeClass.ESCAPING
        assert rec.escape_index == 3

    def test_horizon_must_be_positive(self, half_exp):
        with pytest.raises(ContractError):
            orbit(half_exp, 1.0, horizon=0)

    def test_zero_is_fixed(self, half_exp):
        rec = orbit(half_exp, 0.0, horizon=5)
        assert all(entry.is_zero for entry in rec.log_moduli)
        assert rec.escape_class is EscapeClass.BOUNDED_AT_HORIZON

    def test_bounded_log_radius(self):
        assert bounded_log_radius() == ExtReal(2, 0.0)
        assert bounded_log_radius(ExtReal(5, 0.0)) == ExtReal(4, 0.0)
        assert bounded_log_radius(ExtReal(0, 0.5)) == ExtReal(0, 0.0)


class TestMembership:
    def test_positive_axis_point_is_in(self, half_exp):
        result = in_AR(half_exp, 2.0, 2.0)
        assert result.verdict is Membership.IN
        assert result.violated_at is None
        assert result.horizon_used == 4

    def test_violation_at_start(self, half_exp):
        result = in_AR(half_exp, 2.0, 3.0)
        assert result.verdict is Membership.OUT
        assert result.violated_at == 0

    def test_violation_after_one_step(self, half_exp):
        result = in_AR(half_exp, ComplexPoint(-2.0, 0.0), 1.0)
        assert result.verdict is Membership.OUT
        assert result.violated_at == 1
        assert result.to_dict() == {"verdict": "out", "violated_at": 1, "horizon_used": 60}

    def test_record_is_reused(self, half_exp):
        rec = orbit(half_exp, 2.0)
        assert in_AR(half_exp, 2.0, 1.0, record=rec) == in_AR(half_exp, 2.0, 1.0)

    def test_smaller_radius_is_weaker(self, half_exp):
        for R in (1.0, 1.5, 2.0):
            assert in_AR(half_exp, 2.0, R).verdict is Membership.IN

    def test_ladder_must_escape_within_horizon(self, half_exp):
        # M^4(1) is the first iterate past the threshold
        assert in_AR(half_exp, 1.5, 1.0, horizon=4).verdict is Membership.IN
        with pytest.raises(ContractError):
            in_AR(half_exp, 1.5, 1.0, horizon=2)

    @pytest.mark.parametrize("R", [0.5, HALF_EXP_RF * 0.99, -1.0, math.inf])
    def test_radius_must_escape(self, half_exp, R):
        with pytest.raises(ContractError):
            in_AR(half_exp, 2.0, R)


class TestEscapeRate:
    def test_sequence_on_positive_axis(self, half_exp):
        seq = ra_sequence(half_exp, 2.0)
        assert len(seq) == 5
        assert seq.truncated is None
        assert seq.values == pytest.approx([2.0] * 5, rel=1e-6)
        assert seq.approximate == (False, False, False, True, True)

    def test_sequence_respects_nmax(self, half_exp):
        seq = ra_sequence(half_exp, 2.0, nmax=2)
        assert len(seq) == 3

    def test_sequence_truncates_at_range_floor(self, pure_exp):
        seq = ra_sequence(pure_exp, -1.0)
        assert seq.truncated is TruncationReason.DOMAIN_FLOOR
        assert seq.truncated_at == 1
        assert len(seq) == 1
        assert seq.log_values[0] == 0.0

    def test_compute_RA_escaping(self, half_exp):
        result = compute_RA(half_exp, ComplexPoint(2.0, 0.0))
        assert result.status is RAStatus.VALUE
        assert result.value == pytest.approx(2.0, rel=1e-6)
        assert result.residual < 1e-9
        assert result.escape_class is EscapeClass.ESCAPING
        assert len(result.sequence) == 5

    def test_residual_is_the_last_decrement(self, half_exp):
        result = compute_RA(half_exp, ComplexPoint(2.0, 0.5))
        assert result.status is RAStatus.VALUE
        previous, final = result.log_sequence[-2:]
        assert result.residual == abs(previous - final)
        assert result.residual < 1e-9
        # the orbit stops at its confirming iterate; the sequence goes on past it
        assert len(result.sequence) > result.horizon_used + 1
        assert result.approximate[-1]

    def test_orbit_stop_alone_does_not_settle(self, half_exp):
        result = compute_RA(half_exp, ComplexPoint(2.0, 0.5), nmax=4)
        assert result.horizon_used == 4
        assert result.status is RAStatus.UNDEFINED
        assert result.truncation is TruncationReason.NMAX_REACHED
        assert result.residual == pytest.approx(1.5446e-6, rel=1e-3)
        assert math.isnan(result.value)

    def test_zero_tolerance_runs_to_nmax(self, half_exp):
        result = compute_RA(half_exp, ComplexPoint(2.0, 0.5), tol=0.0, nmax=8)
        assert result.status is RAStatus.UNDEFINED
        assert result.truncation is TruncationReason.NMAX_REACHED
        assert len(result.log_sequence) == 9
        assert result.approximate[5:] == (True,) * 4

    def test_compute_RA_bounded_point_gets_Rf(self, half_exp):
        result = compute_RA(half_exp, 0.5)
        assert result.status is RAStatus.NOT_ESCAPING
        assert result.value == pytest.approx(HALF_EXP_RF, abs=1e-9)
        assert result.log_value == pytest.approx(math.log(HALF_EXP_RF), abs=1e-8)
        assert result.sequence == ()

    def test_compute_RA_short_sequence_stabilises(self, half_exp):
        result = compute_RA(half_exp, 2.0, nmax=2)
        assert result.status is RAStatus.VALUE
        assert result.residual < 1e-9
        assert result.value == pytest.approx(2.0, rel=1e-6)

    def test_compute_RA_unsettled_sequence(self, half_exp):
        result = compute_RA(half_exp, 2.0, tol=0.0, nmax=2)
        assert result.status is RAStatus.UNDEFINED
        assert result.truncation is TruncationReason.NMAX_REACHED
        assert math.isnan(result.value)

    def test_compute_RA_needs_fixed_origin(self, pure_exp):
        with pytest.raises(ContractError):
            compute_RA(pure_exp, 1.0)

    def test_result_dict(self, half_exp):
        data = compute_RA(half_exp, 2.0).to_dict()
        assert data["point"] == [2.0, 0.0]
        assert data["status"] == "value"
        assert data["truncation"] is None
        assert data["escape_class"] == "escaping"
        assert data["approximate"] == [False, False, False, True, True]
        assert all(isinstance(v, (float, str)) for v in data["log_sequence"])

    def test_bounded_result_dict(self, half_exp):
        data = compute_RA(half_exp, 0.5).to_dict()
        assert data["status"] == "not_escaping"
        assert data["sequence"] == []
        assert data["value"] == pytest.approx(HALF_EXP_RF, abs=1e-9)
