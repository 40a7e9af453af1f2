"""Run configuration for the command-line front end and the verify harness.

A :class:`RunConfig` carries everything a subcommand needs: the function,
the grid window, the R-ladder, horizons, tolerances and the seed. It is
echoed into every output directory as ``effective_config.json`` and that
file is accepted back by ``--config``.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import yaml

from fastweb.config.validation import ConfigValidator
from fastweb.entire import ComplexPoint, FunctionSpec
from fastweb.enums import Family, Suite
from fastweb.exceptions import (
    InvalidConfigurationError,
    InvalidParameterError,
    MissingParameterError,
    with_context,
)
from fastweb.extmag import ExtReal
from fastweb.field import GridSpec
from fastweb.maxmod import escape_threshold
from fastweb.types import ConfigDict, FilePath

logger = logging.getLogger(__name__)

DEFAULT_GRID = "0,0,6,6,128,128"
DEFAULT_R_LADDER = (1.0, 1.5, 2.0, 2.5, 3.0)
DEFAULT_SEED = 20240101

# never echoed into reports or digests
RUNTIME_KEYS = ("threads", "out")


class RunConfig:
    """Parameters of one run, validated on assignment."""

    def __init__(self, **kwargs: Any) -> None:
        self.function: FunctionSpec = FunctionSpec.create(Family.HALF_EXP)
        self.grid: GridSpec = GridSpec.parse(DEFAULT_GRID)
        self.R_ladder: list[float] = list(DEFAULT_R_LADDER)
        self.horizon: int = 60
        self.escape_level: int = 3
        self.tol: float = 1e-9
        self.nmax: int = 30
        self.seed: int = DEFAULT_SEED
        self.threads: int = 1
        self.out: Path = Path("out")
        self.point: ComplexPoint | None = None
        self.z0: ComplexPoint | None = None
        self.h_n: int = 8
        self.suites: list[Suite] = list(Suite)
        self.samples: int = 1000
        self.blaschke_lambda: float = 0.9

        for key, value in kwargs.items():
            builder = getattr(self, f"with_{key}", None)
            if builder is None:
                raise InvalidParameterError(
                    parameter_name=key, value=value, reason="unknown configuration key"
                )
            builder(value)

    def __str__(self) -> str:
        return (
            f"RunConfig(function={self.function}, grid={self.grid}, R_ladder={self.R_ladder}, "
            f"horizon={self.horizon}, escape_level={self.escape_level}, tol={self.tol}, "
            f"nmax={self.nmax}, seed={self.seed})"
        )

    @property
    def threshold(self) -> ExtReal:
        """Escape threshold on the log-modulus."""
        return escape_threshold(self.escape_level)

    def require_point(self) -> ComplexPoint:
        if self.point is None:
            raise MissingParameterError("point")
        return self.point

    def require_z0(self) -> ComplexPoint:
        if self.z0 is None:
            raise MissingParameterError("z0")
        return self.z0

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self, include_runtime: bool = False) -> ConfigDict:
        """JSON-ready mapping; ``threads`` and ``out`` only on request."""
        data: ConfigDict = {
            "function": self.function.to_dict(),
            "grid": self.grid.to_dict(),
            "R_ladder": list(self.R_ladder),
            "horizon": self.horizon,
            "escape_level": self.escape_level,
            "tol": self.tol,
            "nmax": self.nmax,
            "seed": self.seed,
            "point": None if self.point is None else [self.point.re, self.point.im],
            "z0": None if self.z0 is None else [self.z0.re, self.z0.im],
            "h_n": self.h_n,
            "suites": [suite.value for suite in self.suites],
            "samples": self.samples,
            "blaschke_lambda": self.blaschke_lambda,
        }
        if include_runtime:
            data["threads"] = self.threads
            data["out"] = str(self.out)
        return data

    @staticmethod
    def from_dict(dictionary: ConfigDict) -> RunConfig:
        if not isinstance(dictionary, dict):
            raise InvalidParameterError(
                parameter_name="config",
                value=type(dictionary).__name__,
                reason=f"must be a mapping, got {type(dictionary).__name__}",
            )
        # absent optional points are serialized as null
        cleaned = {k: v for k, v in dictionary.items() if not (k in ("point", "z0") and v is None)}
        return RunConfig(**cleaned)

    @staticmethod
    def from_yaml(yaml_str: ConfigDict) -> RunConfig:
        """Create a RunConfig from an already parsed YAML document."""
        if not isinstance(yaml_str, dict):
            raise InvalidConfigurationError(
                "the configuration document must be a mapping", config_section="root"
            )
        return RunConfig.from_dict(yaml_str)

    @staticmethod
    def from_file(file_path: FilePath) -> RunConfig:
        """Load a JSON or YAML file (JSON is read through the YAML loader).

        Raises:
            InvalidConfigurationError: If the file is missing or not parseable
        """
        path = Path(file_path)
        with with_context(config_file=str(path)):
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise InvalidConfigurationError(
                    f"cannot read configuration file: {e.strerror}", config_section="file"
                ) from e
            try:
                data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                raise InvalidConfigurationError(
                    f"configuration file is not valid JSON or YAML: {e}", config_section="file"
                ) from e
            config = RunConfig.from_yaml(data if data is not None else {})
        logger.debug("loaded configuration from %s", path)
        return config

    def save_to_disk(self, file_path: FilePath) -> None:
        """Write the effective configuration (without runtime keys) as JSON."""
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        Path(file_path).write_text(text + "\n", encoding="utf-8")

    def copy(self) -> RunConfig:
        config = RunConfig.from_dict(self.to_dict())
        config.threads = self.threads
        config.out = self.out
        return config

    # ------------------------------------------------------------------
    # Builders
    # ------------------------------------------------------------------

    def with_function(self, function: Any) -> RunConfig:
        """Set the entire function (family name, mapping or FunctionSpec)."""
        self.function = ConfigValidator.validate_function(function)
        return self

    def with_family_params(self, params: dict[str, Any]) -> RunConfig:
        """Override parameters of the current family."""
        merged = dict(self.function.params)
        merged.update(params)
        self.function = ConfigValidator.validate_function(
            {"family": self.function.family.value, "params": merged}
        )
        return self

    def with_grid(self, grid: Any) -> RunConfig:
        self.grid = ConfigValidator.validate_grid(grid)
        return self

    def with_R_ladder(self, R_ladder: Any) -> RunConfig:
        self.R_ladder = ConfigValidator.validate_R_ladder(R_ladder)
        return self

    def with_horizon(self, horizon: Any) -> RunConfig:
        self.horizon = ConfigValidator.validate_positive_int(horizon, "horizon")
        return self

    def with_escape_level(self, escape_level: Any) -> RunConfig:
        self.escape_level = ConfigValidator.validate_escape_level(escape_level)
        return self

    def with_tol(self, tol: Any) -> RunConfig:
        self.tol = ConfigValidator.validate_tolerance(tol, "tol")
        return self

    def with_nmax(self, nmax: Any) -> RunConfig:
        self.nmax = ConfigValidator.validate_positive_int(nmax, "nmax")
        return self

    def with_seed(self, seed: Any) -> RunConfig:
        self.seed = ConfigValidator.validate_seed(seed)
        return self

    def with_threads(self, threads: Any) -> RunConfig:
        self.threads = ConfigValidator.validate_positive_int(threads, "threads")
        return self

    def with_out(self, out: Any) -> RunConfig:
        if not isinstance(out, (str, Path)) or str(out) == "":
            raise InvalidParameterError(parameter_name="out", value=out, reason="must be a path")
        self.out = Path(out)
        return self

    def with_point(self, point: Any) -> RunConfig:
        self.point = ConfigValidator.validate_point(point, "point")
        return self

    def with_z0(self, z0: Any) -> RunConfig:
        self.z0 = ConfigValidator.validate_point(z0, "z0")
        return self

    def with_h_n(self, h_n: Any) -> RunConfig:
        self.h_n = ConfigValidator.validate_positive_int(h_n, "h_n")
        return self

    def with_suites(self, suites: Any) -> RunConfig:
        self.suites = ConfigValidator.validate_suites(suites)
        return self

    def with_samples(self, samples: Any) -> RunConfig:
        self.samples = ConfigValidator.validate_positive_int(samples, "samples")
        return self

    def with_blaschke_lambda(self, blaschke_lambda: Any) -> RunConfig:
        self.blaschke_lambda = ConfigValidator.validate_lambda(blaschke_lambda)
        return self


__all__ = ["RunConfig", "DEFAULT_R_LADDER", "DEFAULT_SEED", "RUNTIME_KEYS"]
