"""Enumeration definitions for fastweb.

This module contains the enums used throughout the library to replace
string-based dispatching on function families, verdicts and statuses.
"""

from __future__ import annotations

from enum import Enum


def _lookup(cls: type[Enum], value: str, label: str, aliases: dict[str, Enum] | None = None):
    normalized = value.strip().lower().replace(" ", "_").replace("-", "_")

    if aliases and normalized in aliases:
        return aliases[normalized]

    for member in cls:
        if member.value == normalized:
            return member

    valid_options = [member.value for member in cls]
    if aliases:
        valid_options += [alias for alias in aliases if alias not in valid_options]
    raise ValueError(f"Unknown {label}: '{value}'. Valid options are: {', '.join(valid_options)}")


class Family(Enum):
    """Built-in transcendental entire function families."""

    HALF_EXP = "half_exp"
    SCALED_EXP = "scaled_exp"
    PURE_EXP = "pure_exp"
    BAKER_PRODUCT = "baker_product"

    @classmethod
    def from_string(cls, value: str) -> Family:
        """Convert string to enum, accepting a few common aliases.

        Args:
            value: String representation of the family

        Returns:
            Family enum value

        Raises:
            ValueError: If string cannot be matched to any family
        """
        aliases = {
            "exp": cls.PURE_EXP,
            "lambda_exp": cls.SCALED_EXP,
            "baker": cls.BAKER_PRODUCT,
        }
        return _lookup(cls, value, "function family", aliases)

    @property
    def fixes_origin(self) -> bool:
        """True exactly for the families with f(0) = 0."""
        return self in (Family.HALF_EXP, Family.BAKER_PRODUCT)

    @property
    def is_exponential_type(self) -> bool:
        """True for the families whose growth is driven by a single exponential."""
        return self is not Family.BAKER_PRODUCT


class EscapeClass(Enum):
    """Classification of an orbit at a finite horizon."""

    ESCAPING = "escaping"
    BOUNDED_AT_HORIZON = "bounded_at_horizon"
    INDETERMINATE = "indeterminate"

    @classmethod
    def from_string(cls, value: str) -> EscapeClass:
        """Convert string to enum."""
        return _lookup(cls, value, "escape class")


class Membership(Enum):
    """Verdict of the horizon-level A_R membership test."""

    IN = "in"
    OUT = "out"
    HORIZON_LIMITED = "horizon_limited"

    @classmethod
    def from_string(cls, value: str) -> Membership:
        """Convert string to enum."""
        return _lookup(cls, value, "membership verdict")


class RAStatus(Enum):
    """Status of an escape-rate computation."""

    VALUE = "value"
    UNDEFINED = "undefined"
    NOT_ESCAPING = "not_escaping"

    @classmethod
    def from_string(cls, value: str) -> RAStatus:
        """Convert string to enum."""
        return _lookup(cls, value, "R_A status")


class TruncationReason(Enum):
    """Why an R_A sequence stopped before stabilising."""

    DOMAIN_FLOOR = "domain_floor"
    NMAX_REACHED = "nmax_reached"

    @classmethod
    def from_string(cls, value: str) -> TruncationReason:
        """Convert string to enum."""
        return _lookup(cls, value, "truncation reason")


class Verdict(Enum):
    """Verdict of a single verification check."""

    PASS = "pass"
    FAIL = "fail"
    SCORE_ONLY = "score-only"

    @classmethod
    def from_string(cls, value: str) -> Verdict:
        """Convert string to enum."""
        normalized = value.strip().lower().replace("_", "-")
        for verdict in cls:
            if verdict.value == normalized:
                return verdict
        valid_options = [verdict.value for verdict in cls]
        raise ValueError(
            f"Unknown verdict: '{value}'. Valid options are: {', '.join(valid_options)}"
        )


class Suite(Enum):
    """Registered verification suites."""

    MAXMOD_CONVEXITY = "maxmod_convexity"
    MAXMOD_GROWTH = "maxmod_growth"
    HADAMARD = "hadamard"
    RA_MONOTONE = "ra_monotone"
    RA_CONJUGACY = "ra_conjugacy"
    RA_UNION = "ra_union"
    RA_FLOOR = "ra_floor"
    RA_USC = "ra_usc"
    RA_SUBMEAN = "ra_submean"
    RATIO_LIMIT = "ratio_limit"
    LOOPS_NESTING = "loops_nesting"
    LOOPS_LEVEL = "loops_level"
    LOOPS_DICHOTOMY = "loops_dichotomy"
    BLASCHKE_ALL = "blaschke_all"

    @classmethod
    def from_string(cls, value: str) -> Suite:
        """Convert string to enum.

        Raises:
            ValueError: If string cannot be matched to any suite
        """
        return _lookup(cls, value, "suite")
