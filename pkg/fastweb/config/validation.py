"""Configuration validation components.

This module contains the validation logic that checks every run parameter
against the domain of the engine it is passed to, before any computation
starts.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from typing import TYPE_CHECKING, Any

from fastweb.entire import ComplexPoint, FunctionSpec
from fastweb.enums import Suite
from fastweb.exceptions import (
    ComputationError,
    InvalidConfigurationError,
    InvalidParameterError,
    UnknownSuiteError,
    ValidationError,
)
from fastweb.field import GridSpec
from fastweb.maxmod import compute_Rf, get_profile

if TYPE_CHECKING:
    from fastweb.config.run import RunConfig

logger = logging.getLogger(__name__)

ESCAPE_LEVEL_RANGE = (2, 3)


class ValidationResult:
    """Result of configuration validation."""

    def __init__(self) -> None:
        self.is_valid: bool = True
        self.errors: list[ValidationError] = []
        self.warnings: list[str] = []

    def add_error(self, error: ValidationError) -> None:
        """Add a validation error."""
        self.errors.append(error)
        self.is_valid = False

    def add_warning(self, warning: str) -> None:
        """Add a validation warning."""
        self.warnings.append(warning)

    def get_error_summary(self) -> str:
        """Get a summary of all validation errors."""
        if not self.errors:
            return "No validation errors"

        error_msgs = [f"- {error.message}" for error in self.errors]
        return f"Validation errors ({len(self.errors)}):\n" + "\n".join(error_msgs)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class ConfigValidator:
    """Centralized configuration validation system."""

    @staticmethod
    def validate_positive_real(value: Any, name: str) -> float:
        """Validate a positive finite real.

        Raises:
            InvalidParameterError: If the value is not a positive finite number
        """
        if not _is_real(value):
            raise InvalidParameterError(
                parameter_name=name,
                value=value,
                reason=f"must be a number, got {type(value).__name__}",
            )
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(
                parameter_name=name,
                value=value,
                reason="must be positive and finite",
                valid_range=(0, float("inf")),
            )
        return float(value)

    @staticmethod
    def validate_positive_int(value: Any, name: str) -> int:
        """Validate an integer of at least 1."""
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidParameterError(
                parameter_name=name,
                value=value,
                reason=f"must be an integer, got {type(value).__name__}",
            )
        if value < 1:
            raise InvalidParameterError(
                parameter_name=name, value=value, reason="must be at least 1", valid_range=(1, "inf")
            )
        return value

    @staticmethod
    def validate_seed(value: Any) -> int:
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise InvalidParameterError(
                parameter_name="seed", value=value, reason="must be a nonnegative integer"
            )
        return value

    @staticmethod
    def validate_tolerance(value: Any, name: str = "tol") -> float:
        """Validate a tolerance in ``(0, 1)``."""
        value = ConfigValidator.validate_positive_real(value, name)
        if value >= 1:
            raise InvalidParameterError(
                parameter_name=name, value=value, reason="must be below 1", valid_range=(0, 1)
            )
        return value

    @staticmethod
    def validate_escape_level(value: Any) -> int:
        """Validate the tower level of the escape threshold.

        Level 2 puts the threshold at ``e^e`` on the log scale, level 3 at
        ``e^{e^e}``; higher levels are not representable by the grid engine.
        """
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidParameterError(
                parameter_name="escape_level", value=value, reason="must be an integer"
            )
        lo, hi = ESCAPE_LEVEL_RANGE
        if not lo <= value <= hi:
            raise InvalidParameterError(
                parameter_name="escape_level",
                value=value,
                reason=f"must be between {lo} and {hi}",
                valid_range=ESCAPE_LEVEL_RANGE,
            )
        return value

    @staticmethod
    def validate_lambda(value: Any, name: str = "blaschke_lambda") -> float:
        """Validate a contraction bound in ``[0, 1)``."""
        if not _is_real(value):
            raise InvalidParameterError(
                parameter_name=name,
                value=value,
                reason=f"must be a number, got {type(value).__name__}",
            )
        if not 0 <= value < 1:
            raise InvalidParameterError(
                parameter_name=name, value=value, reason="must lie in [0, 1)", valid_range=(0, 1)
            )
        return float(value)

    @staticmethod
    def validate_R_ladder(values: Any) -> list[float]:
        """Validate a nonempty list of positive radii, returned sorted."""
        if isinstance(values, (int, float)) and not isinstance(values, bool):
            values = [values]
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            raise InvalidParameterError(
                parameter_name="R_ladder", value=values, reason="must be a nonempty list of radii"
            )
        ladder = [
            ConfigValidator.validate_positive_real(v, f"R_ladder[{i}]") for i, v in enumerate(values)
        ]
        if len(set(ladder)) != len(ladder):
            raise InvalidParameterError(
                parameter_name="R_ladder", value=values, reason="radii must be distinct"
            )
        return sorted(ladder)

    @staticmethod
    def validate_point(value: Any, name: str = "point") -> ComplexPoint:
        """Accept ``"re,im"``, ``[re, im]``, ``{"re": .., "im": ..}`` or a ComplexPoint."""
        if isinstance(value, ComplexPoint):
            return value
        try:
            if isinstance(value, str):
                return ComplexPoint.parse(value)
            if isinstance(value, Mapping):
                return ComplexPoint(float(value["re"]), float(value["im"]))
            if isinstance(value, (list, tuple)) and len(value) == 2:
                return ComplexPoint(float(value[0]), float(value[1]))
        except (ComputationError, KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(
                parameter_name=name, value=value, reason="expected a finite point 're,im'"
            ) from e
        raise InvalidParameterError(
            parameter_name=name, value=value, reason="expected a finite point 're,im'"
        )

    @staticmethod
    def validate_grid(value: Any) -> GridSpec:
        """Accept ``"cx,cy,w,h,nx,ny"``, a mapping or a GridSpec."""
        if isinstance(value, GridSpec):
            return value
        try:
            if isinstance(value, str):
                return GridSpec.parse(value)
            if isinstance(value, Mapping):
                return GridSpec.from_dict(dict(value))
        except (ComputationError, KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(
                parameter_name="grid", value=value, reason=f"invalid grid: {e}"
            ) from e
        raise InvalidParameterError(
            parameter_name="grid", value=value, reason="expected 'cx,cy,w,h,nx,ny' or a mapping"
        )

    @staticmethod
    def validate_function(value: Any) -> FunctionSpec:
        """Accept a family name, ``{"family": .., "params": {..}}`` or a FunctionSpec."""
        if isinstance(value, FunctionSpec):
            return value
        if isinstance(value, str):
            value = {"family": value}
        if not isinstance(value, Mapping):
            raise InvalidParameterError(
                parameter_name="function",
                value=value,
                reason="expected a family name or a mapping with 'family' and 'params'",
            )
        try:
            return FunctionSpec.from_dict(value)
        except InvalidParameterError:
            raise
        except (ComputationError, TypeError, ValueError) as e:
            raise InvalidParameterError(
                parameter_name="function", value=dict(value), reason=str(e)
            ) from e

    @staticmethod
    def validate_suites(values: Any) -> list[Suite]:
        """Validate suite names; an empty list or None selects every suite.

        Raises:
            UnknownSuiteError: If a name is not registered
        """
        if values is None:
            return list(Suite)
        if isinstance(values, (str, Suite)):
            values = [values]
        suites: list[Suite] = []
        for name in values:
            if isinstance(name, Suite):
                suites.append(name)
                continue
            try:
                suites.append(Suite.from_string(str(name)))
            except ValueError as e:
                raise UnknownSuiteError(str(name), [s.value for s in Suite]) from e
        return suites or list(Suite)

    @staticmethod
    def validate_run_config(config: RunConfig) -> ValidationResult:
        """Cross-field checks on a complete run configuration.

        Args:
            config: RunConfig instance to validate

        Returns:
            ValidationResult with any errors or warnings found
        """
        result = ValidationResult()
        try:
            if config.grid.origin_cell() is None:
                result.add_warning("grid window does not contain the origin; holes are undefined")
            if config.function.fixes_origin:
                r_f = compute_Rf(get_profile(config.function), config.horizon, config.threshold)
                low = [R for R in config.R_ladder if R <= r_f]
                if low:
                    result.add_error(
                        InvalidParameterError(
                            parameter_name="R_ladder",
                            value=low,
                            reason=f"A_R needs R > R_f = {r_f:.12g}",
                            valid_range=(r_f, float("inf")),
                        )
                    )
            else:
                result.add_warning(
                    f"{config.function.family.value} does not fix the origin; "
                    "R_f, R_A fields and loops are unavailable"
                )
            if config.nmax > config.horizon:
                result.add_warning(
                    f"nmax={config.nmax} exceeds horizon={config.horizon}; "
                    "sequences stop at the horizon"
                )
        except ValidationError as e:
            result.add_error(e)
        except ComputationError as e:
            result.add_error(InvalidConfigurationError(f"Unexpected validation error: {e}"))

        for warning in result.warnings:
            logger.warning(warning)
        return result


__all__ = ["ConfigValidator", "ValidationResult", "ESCAPE_LEVEL_RANGE"]
