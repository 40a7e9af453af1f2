"""Type definitions and type aliases for fastweb.

This module provides the shared type annotations and small value guards
used across the engines and the configuration layer.
"""

from __future__ import annotations

import math
import os
from typing import TYPE_CHECKING, Any, TypeAlias, Union

import numpy as np
import numpy.typing as npt

if TYPE_CHECKING:
    from fastweb.extmag import ExtReal

# =============================================================================
# Basic Type Aliases
# =============================================================================

Numeric: TypeAlias = int | float
LogRadius: TypeAlias = float  # t = log r
Probability: TypeAlias = float  # [0,1]

# A log-scale quantity: a float while it fits comfortably, an ExtReal beyond.
SignedLog: TypeAlias = Union[float, "ExtReal"]

# Data structure types
ConfigDict: TypeAlias = dict[str, Any]
FloatArray: TypeAlias = npt.NDArray[np.float64]
ComplexArray: TypeAlias = npt.NDArray[np.complex128]
BoolArray: TypeAlias = npt.NDArray[np.bool_]
IntArray: TypeAlias = npt.NDArray[np.int64]

# =============================================================================
# File I/O Types
# =============================================================================

FilePath: TypeAlias = Union[str, "os.PathLike[str]"]

# =============================================================================
# Type Utilities
# =============================================================================


def ensure_numeric(value: Any) -> float:
    """Ensure a value is numeric, converting if necessary."""
    if isinstance(value, bool):
        raise TypeError(f"Cannot convert {value} to numeric type")
    try:
        return float(value)
    except (ValueError, TypeError) as e:
        raise TypeError(f"Cannot convert {value} to numeric type") from e


def ensure_finite(value: Numeric, name: str = "value") -> float:
    """Ensure a numeric value is finite."""
    value = ensure_numeric(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def ensure_positive(value: Numeric, name: str = "value") -> float:
    """Ensure a numeric value is positive and finite."""
    value = ensure_finite(value, name)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def ensure_unit_interval(value: Numeric, name: str = "value", closed: bool = False) -> float:
    """Ensure a value lies in [0, 1), or in [0, 1] when ``closed``."""
    value = ensure_finite(value, name)
    upper_ok = value <= 1 if closed else value < 1
    if not (0 <= value and upper_ok):
        bracket = "]" if closed else ")"
        raise ValueError(f"{name} must be in [0, 1{bracket}, got {value}")
    return value


def ensure_positive_int(value: Any, name: str = "value") -> int:
    """Ensure a value is a positive integer."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be at least 1, got {value}")
    return int(value)


def is_config_dict(value: Any) -> bool:
    """Check if value is a valid configuration dictionary."""
    return isinstance(value, dict) and all(isinstance(k, str) for k in value)
