"""Tests for the extended-magnitude arithmetic."""

import math

import pytest

from fastweb.exceptions import DomainError
from fastweb.extmag import (
    FLOAT_CEILING,
    ExtReal,
    canonical,
    cmp,
    from_real,
    li_decode,
    li_encode,
    pow_ext,
    signed_add,
    signed_cmp,
    signed_exp,
    signed_log,
    signed_rel_diff,
    signed_scale,
    signed_to_float,
    to_ext,
)


class TestExtReal:
    """Level-index values."""

    def test_small_values_stay_at_level_zero(self):
        assert from_real(0.5) == ExtReal(0, 0.5)
        assert from_real(0.0).is_zero

    def test_one_is_one_level_up(self):
        assert from_real(1.0) == ExtReal(1, 0.0)

    @pytest.mark.parametrize("x", [0.25, 1.5, 10.0, 1234.5, 1e100, 1e300])
    def test_round_trip_through_float(self, x):
        assert from_real(x).to_float() == pytest.approx(x, rel=1e-10)

    def test_invalid_components_rejected(self):
        with pytest.raises(DomainError):
            ExtReal(-1, 0.5)
        with pytest.raises(DomainError):
            ExtReal(2, 1.0)
        with pytest.raises(DomainError):
            ExtReal(True, 0.5)
        with pytest.raises(DomainError):
            from_real(-1.0)
        with pytest.raises(DomainError):
            from_real(math.inf)

    def test_ordering_is_lexicographic(self):
        assert ExtReal(2, 0.9) < ExtReal(3, 0.0)
        assert ExtReal(3, 0.1) > ExtReal(3, 0.05)
        assert cmp(ExtReal(4, 0.5), ExtReal(4, 0.5)) == 0
        assert cmp(ExtReal(1, 0.5), ExtReal(4, 0.5)) == -1

    def test_overflowing_value_is_inf(self):
        assert ExtReal(5, 0.5).to_float() == math.inf

    def test_exp_and_log_move_one_level(self):
        x = ExtReal(3, 0.25)
        assert x.exp_ext() == ExtReal(4, 0.25)
        assert x.log_ext() == ExtReal(2, 0.25)
        assert ExtReal(0, 0.5).log_ext() == pytest.approx(math.log(0.5))
        with pytest.raises(DomainError):
            ExtReal(0, 0.0).log_ext()

    def test_text_form(self):
        x = from_real(12345.678)
        assert str(x).startswith("E(3,")
        assert ExtReal.parse(str(x)) == x
        with pytest.raises(DomainError):
            ExtReal.parse("3.5")

    def test_pow(self):
        assert pow_ext(from_real(100.0), 2.0).to_float() == pytest.approx(1e4, rel=1e-9)
        assert from_real(0.0).pow_ext(3.0).is_zero
        with pytest.raises(DomainError):
            pow_ext(from_real(2.0), 0.0)


class TestSignedLog:
    """Arithmetic on the mixed float / ExtReal representation."""

    def test_canonical(self):
        assert canonical(5.0) == 5.0
        assert isinstance(canonical(1e301), ExtReal)
        assert canonical(from_real(3.0)) == pytest.approx(3.0)
        with pytest.raises(DomainError):
            canonical(math.nan)
        with pytest.raises(DomainError):
            canonical(math.inf)

    def test_to_ext_rejects_negatives(self):
        with pytest.raises(DomainError):
            to_ext(-1.0)

    def test_exp_leaves_float_range(self):
        big = signed_exp(800.0)
        assert isinstance(big, ExtReal)
        assert signed_exp(1.0) == pytest.approx(math.e)
        assert signed_log(big) == pytest.approx(800.0, rel=1e-12)

    def test_log_of_zero_and_negative(self):
        assert signed_log(0.0) == -math.inf
        assert signed_log(ExtReal(0, 0.0)) == -math.inf
        with pytest.raises(DomainError):
            signed_log(-2.0)

    def test_compare_mixed(self):
        threshold = ExtReal(3, 0.0)
        assert signed_cmp(-1.0, threshold) == -1
        assert signed_cmp(ExtReal(5, 0.1), 1e10) == 1
        assert signed_cmp(ExtReal(4, 0.1), 1e10) == -1
        assert signed_cmp(16.0, threshold) == 1
        assert signed_cmp(15.0, threshold) == -1
        assert signed_cmp(2.0, 2.0) == 0

    def test_add_and_scale_on_floats(self):
        assert signed_add(1.5, 2.5) == 4.0
        assert signed_scale(2.0, 3.0) == 6.0
        with pytest.raises(DomainError):
            signed_scale(2.0, -1.0)

    def test_add_to_extended_value(self):
        big = signed_exp(1000.0)
        assert signed_add(big, 0.0) == big
        # a unit is far below the resolution of e^1000
        assert signed_rel_diff(signed_add(big, 1.0), big) == 0.0
        doubled = signed_add(big, big)
        assert signed_log(doubled) == pytest.approx(1000.0 + math.log(2.0), rel=1e-12)

    def test_scale_extended_value(self):
        big = signed_exp(1000.0)
        assert signed_log(signed_scale(big, math.e)) == pytest.approx(1001.0, rel=1e-12)

    def test_relative_difference(self):
        assert signed_rel_diff(1.0, 1.0) == 0.0
        assert signed_rel_diff(0.0, 0.0) == 0.0
        assert signed_rel_diff(1.0, 2.0) == pytest.approx(0.5)
        assert signed_rel_diff(signed_exp(900.0), signed_exp(900.0)) == 0.0

    def test_to_float_view(self):
        assert signed_to_float(3.0) == 3.0
        assert signed_to_float(ExtReal(6, 0.5)) == math.inf

    @pytest.mark.parametrize("x", [-5.0, -0.5, 0.0, 0.3, 2.0, 1e5, FLOAT_CEILING])
    def test_level_index_coordinate_round_trip(self, x):
        assert signed_to_float(li_decode(li_encode(x))) == pytest.approx(x, rel=1e-9, abs=1e-12)

    def test_level_index_coordinate_is_monotone(self):
        xs = [-100.0, -1.0, 0.0, 0.5, 1.0, 10.0, 1e10, 1e300]
        encoded = [li_encode(x) for x in xs] + [li_encode(ExtReal(5, 0.2))]
        assert encoded == sorted(encoded)
        assert li_encode(-math.inf) == -math.inf
