"""Configuration for fastweb runs.

Holds the RunConfig consumed by the command-line front end and the verify
harness, and the validator that checks each parameter against the domain
of the engine it feeds.
"""

from __future__ import annotations

from .run import RunConfig
from .validation import ConfigValidator, ValidationResult

__all__ = [
    "ConfigValidator",
    "RunConfig",
    "ValidationResult",
]
