"""Transcendental entire function families and overflow-safe evaluation.

All built-in families have nonnegative Taylor coefficients, so the maximum
modulus on ``|z| = r`` is attained on the positive axis and
``phi(t) = log M(e^t)`` is the family formula evaluated there.

Complex values are evaluated directly while ``|f(z)|`` fits into a float.
Beyond that, :func:`eval_log` works on ``(log-modulus, argument)`` pairs
using the family's dominant-term form and flags the result as approximate.
"""

from __future__ import annotations

import cmath
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from fastweb.enums import Family
from fastweb.exceptions import DomainError, InvalidParameterError, RangeOverflowError
from fastweb.extmag import (
    ExtReal,
    canonical,
    signed_add,
    signed_cmp,
    signed_exp,
    signed_scale,
    signed_to_float,
)
from fastweb.types import BoolArray, ComplexArray, ConfigDict, FloatArray, SignedLog

logger = logging.getLogger(__name__)

# Above this log-modulus results are produced by the dominant-term path
ASYMPTOTIC_THRESHOLD = 700.0
# A float argument carries no usable phase once its ulp exceeds this (radians)
PHASE_RESOLUTION = 1e-3
PHASE_LOSS_IMAG = PHASE_RESOLUTION * 2.0**52
# Above this t the Baker product phi is linear to double precision
FLOAT_LINEAR_REGIME = 1e6

_TWO_PI = 2.0 * math.pi

DEFAULT_PARAMS: dict[Family, dict[str, Any]] = {
    Family.HALF_EXP: {"scale": 0.5},
    Family.SCALED_EXP: {"lam": 0.25},
    Family.PURE_EXP: {},
    Family.BAKER_PRODUCT: {
        "C": 0.25,
        "a": (4.0, 16.0, 256.0, 65536.0, 4294967296.0, 18446744073709551616.0),
    },
}


def wrap_angle(theta: float) -> float:
    """Normalize an angle to ``(-pi, pi]``."""
    wrapped = math.remainder(theta, _TWO_PI)
    if wrapped <= -math.pi:
        wrapped += _TWO_PI
    return wrapped


def wrap_angle_array(theta: FloatArray) -> FloatArray:
    """Vectorized :func:`wrap_angle`."""
    wrapped = np.remainder(theta + math.pi, _TWO_PI) - math.pi
    return np.where(wrapped <= -math.pi, wrapped + _TWO_PI, wrapped)


def _softplus(x: float) -> float:
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


# =============================================================================
# Points
# =============================================================================


@dataclass(frozen=True)
class ComplexPoint:
    """A finite point of the complex plane."""

    re: float
    im: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("complex point components must be finite", value=(self.re, self.im))

    @classmethod
    def from_complex(cls, z: complex) -> ComplexPoint:
        return cls(float(z.real), float(z.imag))

    @classmethod
    def parse(cls, text: str) -> ComplexPoint:
        """Parse ``"re,im"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise DomainError("expected 're,im'", value=text)
        try:
            return cls(float(parts[0]), float(parts[1]))
        except ValueError as e:
            raise DomainError("expected 're,im'", value=text) from e

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    @property
    def modulus(self) -> float:
        return abs(self.to_complex())

    def __str__(self) -> str:
        return f"{self.re!r},{self.im!r}"


@dataclass(frozen=True)
class LogPolar:
    """``(log|w|, arg w)`` pair with an approximation flag.

    The argument is normalized to ``(-pi, pi]`` and the log-modulus is kept
    canonical (float up to the float ceiling, :class:`ExtReal` beyond).
    """

    log_modulus: SignedLog
    argument: float = 0.0
    approximate: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.argument):
            raise DomainError("argument must be finite", value=self.argument)
        object.__setattr__(self, "argument", wrap_angle(self.argument))
        object.__setattr__(self, "log_modulus", canonical(self.log_modulus))

    @classmethod
    def from_complex(cls, w: complex, approximate: bool = False) -> LogPolar:
        if w == 0:
            return cls(-math.inf, 0.0, approximate)
        return cls(math.log(abs(w)), cmath.phase(w), approximate)

    @property
    def is_zero(self) -> bool:
        return not isinstance(self.log_modulus, ExtReal) and self.log_modulus == -math.inf

    def modulus(self) -> SignedLog:
        """``|w|`` as a log-scale-compatible quantity (float or ExtReal)."""
        return signed_exp(self.log_modulus)

    def to_complex(self) -> complex:
        """Convert back to a complex value.

        Raises:
            RangeOverflowError: If ``|w|`` does not fit into a float
        """
        if self.is_zero:
            return 0j
        if signed_cmp(self.log_modulus, ASYMPTOTIC_THRESHOLD) > 0:
            raise RangeOverflowError("modulus beyond float range", log_modulus=self.log_modulus)
        return cmath.rect(math.exp(self.log_modulus), self.argument)


# =============================================================================
# Function families
# =============================================================================


@dataclass(frozen=True)
class FunctionSpec:
    """One member of a built-in entire function family.

    ``params`` is stored as a sorted tuple of ``(name, value)`` pairs so the
    spec is hashable; use :meth:`param` or the ``create`` constructor rather
    than building the tuple by hand.
    """

    family: Family
    params: tuple[tuple[str, Any], ...] = field(default=())

    def __post_init__(self) -> None:
        family = self.family
        if isinstance(family, str):
            family = Family.from_string(family)
            object.__setattr__(self, "family", family)
        merged = dict(DEFAULT_PARAMS[family])
        for name, value in dict(self.params).items():
            if name not in merged:
                raise InvalidParameterError(
                    name, value, f"not a parameter of {family.value}"
                ).add_context("known", sorted(merged))
            merged[name] = value
        merged = _validate_params(family, merged)
        object.__setattr__(self, "params", tuple(sorted(merged.items())))
        self._prepare(merged)

    def _prepare(self, p: dict[str, Any]) -> None:
        # Derived constants; not dataclass fields, so eq/hash ignore them
        if self.family is Family.HALF_EXP:
            object.__setattr__(self, "_log_const", math.log(p["scale"]))
        elif self.family is Family.SCALED_EXP:
            object.__setattr__(self, "_log_const", math.log(p["lam"]))
        elif self.family is Family.PURE_EXP:
            object.__setattr__(self, "_log_const", 0.0)
        else:
            a = p["a"]
            object.__setattr__(self, "_a", np.asarray(a, dtype=np.float64))
            object.__setattr__(self, "_log_a", tuple(math.log(ak) for ak in a))
            object.__setattr__(self, "_log_const", math.log(p["C"]))
            object.__setattr__(self, "_degree", len(a) + 2)

    # ------------------------------------------------------------------
    # Construction and serialization
    # ------------------------------------------------------------------

    @classmethod
    def create(cls, family: Family | str, **params: Any) -> FunctionSpec:
        """Build a spec from keyword parameters, defaults filling the rest."""
        if isinstance(family, str):
            family = Family.from_string(family)
        return cls(family, tuple(params.items()))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> FunctionSpec:
        """Build from ``{"family": ..., "params": {...}}``."""
        if "family" not in data:
            raise InvalidParameterError("function.family", None, "missing family name")
        try:
            family = Family.from_string(str(data["family"]))
        except ValueError as e:
            raise InvalidParameterError("function.family", data["family"], str(e)) from e
        params = data.get("params") or {}
        if not isinstance(params, Mapping):
            raise InvalidParameterError("function.params", params, "must be a mapping")
        return cls.create(family, **dict(params))

    def to_dict(self) -> ConfigDict:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params}
        return {"family": self.family.value, "params": params}

    def param(self, name: str) -> Any:
        return dict(self.params)[name]

    @property
    def fixes_origin(self) -> bool:
        return self.family.fixes_origin

    @property
    def log_const(self) -> float:
        """Log of the leading constant (scale, lambda or C; 0 for pure_exp)."""
        return self._log_const  # type: ignore[attr-defined]

    @property
    def log_abs_at_zero(self) -> float:
        """``log|f(0)|``; ``-inf`` when f fixes the origin."""
        return -math.inf if self.fixes_origin else self._log_const  # type: ignore[attr-defined]

    def __str__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.family.value}({inner})"

    # ------------------------------------------------------------------
    # Scalar kernels
    # ------------------------------------------------------------------

    def complex_value(self, z: complex) -> complex:
        """Direct complex evaluation; may raise ``OverflowError``."""
        fam = self.family
        if fam is Family.HALF_EXP:
            return self.param("scale") * z * cmath.exp(z)
        if fam is Family.SCALED_EXP:
            return self.param("lam") * cmath.exp(z)
        if fam is Family.PURE_EXP:
            return cmath.exp(z)
        value = self.param("C") * z * z
        for ak in self.param("a"):
            value *= 1.0 + z / ak
        return value

    def log_abs(self, z: complex) -> float:
        """``log|f(z)|`` computed termwise, never overflowing."""
        fam = self.family
        if fam is Family.PURE_EXP:
            return z.real
        if fam is Family.SCALED_EXP:
            return self._log_const + z.real  # type: ignore[attr-defined]
        if z == 0:
            return -math.inf
        if fam is Family.HALF_EXP:
            return self._log_const + math.log(abs(z)) + z.real  # type: ignore[attr-defined]
        total = self._log_const + 2.0 * math.log(abs(z))  # type: ignore[attr-defined]
        for ak in self.param("a"):
            term = abs(1.0 + z / ak)
            if term == 0.0:
                return -math.inf
            total += math.log(term)
        return total

    def step_complex(self, w: complex, approximate: bool = False) -> tuple[complex | None, LogPolar]:
        """One iteration from a float-range point ``w``.

        Returns:
            ``(value, image)``: the exact complex ``f(w)`` when it is still
            representable and its phase is kept (else None), and its
            log-polar image
        """
        log_mod = self.log_abs(w)
        phase_lost = self.family.is_exponential_type and abs(w.imag) > PHASE_LOSS_IMAG
        if phase_lost:
            return None, LogPolar(log_mod, 0.0, True)
        if log_mod <= ASYMPTOTIC_THRESHOLD:
            try:
                value = self.complex_value(w)
            except OverflowError:
                value = 0j
            if value != 0 or log_mod == -math.inf:
                return value, LogPolar.from_complex(value, approximate)
        if self.family is Family.BAKER_PRODUCT:
            arg = 2.0 * cmath.phase(w) + sum(cmath.phase(1.0 + w / ak) for ak in self.param("a"))
        elif self.family is Family.HALF_EXP:
            arg = cmath.phase(w) + w.imag
        else:
            arg = w.imag
        flagged = approximate or log_mod > ASYMPTOTIC_THRESHOLD
        return None, LogPolar(log_mod, wrap_angle(arg), flagged)

    def image_of_complex(self, w: complex, approximate: bool = False) -> LogPolar:
        """Log-polar image of a float-range point ``w``."""
        return self.step_complex(w, approximate)[1]

    def _asymptotic_image(self, z: LogPolar) -> LogPolar:
        # |z| beyond float range: dominant-term forms only
        L = z.log_modulus
        theta = z.argument
        if self.family is Family.BAKER_PRODUCT:
            offset = self._log_const - sum(self._log_a)  # type: ignore[attr-defined]
            log_mod = signed_add(signed_scale(L, float(self._degree)), offset)  # type: ignore[attr-defined]
            return LogPolar(log_mod, wrap_angle(self._degree * theta), True)  # type: ignore[attr-defined]
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        modulus = signed_exp(L)
        if cos_t > 0:
            real_part: SignedLog = signed_scale(modulus, cos_t)
        elif cos_t == 0:
            real_part = 0.0
        else:
            return LogPolar(-math.inf, 0.0, True)
        if self.family is Family.HALF_EXP:
            log_mod = signed_add(real_part, signed_add(L, self._log_const))  # type: ignore[attr-defined]
        else:
            log_mod = signed_add(real_part, self._log_const)  # type: ignore[attr-defined]
        if sin_t != 0.0:
            return LogPolar(log_mod, 0.0, True)
        arg = theta if self.family is Family.HALF_EXP else 0.0
        return LogPolar(log_mod, arg, True)

    def image_of_log_polar(self, z: LogPolar) -> LogPolar:
        if z.is_zero:
            return LogPolar(self.log_abs_at_zero, 0.0, z.approximate)
        modulus = signed_exp(z.log_modulus)
        if isinstance(modulus, ExtReal):
            return self._asymptotic_image(z)
        return self.image_of_complex(cmath.rect(modulus, z.argument), z.approximate)

    def phi(self, t: SignedLog) -> SignedLog:
        """``log M(e^t)`` evaluated on the positive axis."""
        fam = self.family
        if not isinstance(t, ExtReal) and t == -math.inf:
            return self.log_abs_at_zero
        if fam is Family.BAKER_PRODUCT:
            if isinstance(t, ExtReal) or t > FLOAT_LINEAR_REGIME:
                offset = self._log_const - sum(self._log_a)  # type: ignore[attr-defined]
                return signed_add(signed_scale(t, float(self._degree)), offset)  # type: ignore[attr-defined]
            total = self._log_const + 2.0 * t  # type: ignore[attr-defined]
            for log_ak in self._log_a:  # type: ignore[attr-defined]
                total += _softplus(t - log_ak)
            return canonical(total)
        r = signed_exp(t)
        if fam is Family.PURE_EXP:
            return r
        if fam is Family.SCALED_EXP:
            return signed_add(r, self._log_const)  # type: ignore[attr-defined]
        return signed_add(signed_add(r, t), self._log_const)  # type: ignore[attr-defined]

    # ------------------------------------------------------------------
    # Vectorized kernels used by the grid engine
    # ------------------------------------------------------------------

    def phi_array(self, t: FloatArray) -> FloatArray:
        """Float ``phi`` on an array; overflow becomes ``inf``."""
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            fam = self.family
            if fam is Family.PURE_EXP:
                return np.exp(t)
            if fam is Family.SCALED_EXP:
                return self._log_const + np.exp(t)  # type: ignore[attr-defined]
            if fam is Family.HALF_EXP:
                out = np.exp(t) + t + self._log_const  # type: ignore[attr-defined]
                return np.where(np.isneginf(t), -np.inf, out)
            out = self._log_const + 2.0 * t  # type: ignore[attr-defined]
            for log_ak in self._log_a:  # type: ignore[attr-defined]
                out = out + np.logaddexp(0.0, t - log_ak)
            return out

    def log_phi_array(self, t: FloatArray) -> FloatArray:
        """``log phi(t)`` on an array, valid where ``phi(t) > 0``.

        Stays finite for ``t`` beyond the exponent range of exp-type
        families; ``nan`` or ``-inf`` where ``phi(t) <= 0``.
        """
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            fam = self.family
            if fam is Family.PURE_EXP:
                return t.astype(np.float64, copy=True)
            if fam is Family.BAKER_PRODUCT:
                return np.log(self.phi_array(t))
            extra = self._log_const + (t if fam is Family.HALF_EXP else 0.0)  # type: ignore[attr-defined]
            large = t + np.log1p(extra * np.exp(-t))
            small = np.log(self.phi_array(t))
            return np.where(t > 30.0, large, small)

    def image_array(
        self, w: ComplexArray
    ) -> tuple[FloatArray, FloatArray, BoolArray, BoolArray, ComplexArray]:
        """Vectorized :meth:`step_complex`.

        Returns:
            ``(log_modulus, argument, phase_lost, exact, value)``; ``value``
            holds ``f(w)`` where ``exact`` is set and 0 elsewhere
        """
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            fam = self.family
            abs_w = np.abs(w)
            if fam is Family.PURE_EXP:
                log_mod = w.real.copy()
            elif fam is Family.SCALED_EXP:
                log_mod = self._log_const + w.real  # type: ignore[attr-defined]
            elif fam is Family.HALF_EXP:
                log_mod = self._log_const + np.log(abs_w) + w.real  # type: ignore[attr-defined]
            else:
                log_mod = self._log_const + 2.0 * np.log(abs_w)  # type: ignore[attr-defined]
                for ak in self._a:  # type: ignore[attr-defined]
                    log_mod = log_mod + np.log(np.abs(1.0 + w / ak))

            safe = log_mod <= ASYMPTOTIC_THRESHOLD
            w_safe = np.where(safe, w, 0.0)
            if fam is Family.HALF_EXP:
                value = self.param("scale") * w_safe * np.exp(w_safe)
                arg = np.angle(w) + w.imag
            elif fam is Family.SCALED_EXP:
                value = self.param("lam") * np.exp(w_safe)
                arg = w.imag.copy()
            elif fam is Family.PURE_EXP:
                value = np.exp(w_safe)
                arg = w.imag.copy()
            else:
                value = self.param("C") * w_safe * w_safe
                arg = 2.0 * np.angle(w)
                for ak in self._a:  # type: ignore[attr-defined]
                    value = value * (1.0 + w_safe / ak)
                    arg = arg + np.angle(1.0 + w / ak)

            if fam.is_exponential_type:
                phase_lost = np.abs(w.imag) > PHASE_LOSS_IMAG
            else:
                phase_lost = np.zeros(w.shape, dtype=bool)
            exact = safe & ~phase_lost & ((value != 0) | np.isneginf(log_mod))
            arg = np.where(exact, np.angle(value), wrap_angle_array(arg))
            arg = np.where(phase_lost, 0.0, arg)
            log_mod = np.where(exact & (value != 0), np.log(np.abs(value)), log_mod)
            return log_mod, arg, phase_lost, exact, np.where(exact, value, 0.0)


def _validate_params(family: Family, p: dict[str, Any]) -> dict[str, Any]:
    def positive(name: str) -> float:
        value = p[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParameterError(name, value, "must be a real number")
        value = float(value)
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(name, value, "must be positive and finite")
        return value

    if family is Family.HALF_EXP:
        return {"scale": positive("scale")}
    if family is Family.SCALED_EXP:
        return {"lam": positive("lam")}
    if family is Family.PURE_EXP:
        return {}
    C = positive("C")
    raw = p["a"]
    if isinstance(raw, (str, bytes)) or not hasattr(raw, "__iter__"):
        raise InvalidParameterError("a", raw, "must be a sequence of positive reals")
    a = tuple(float(ak) for ak in raw)
    if len(a) < 1:
        raise InvalidParameterError("a", raw, "needs at least one factor (K >= 1)")
    if not (a[0] > 0 and all(math.isfinite(ak) for ak in a)):
        raise InvalidParameterError("a", raw, "a_1 must be positive and all a_k finite")
    if any(a[k + 1] <= a[k] for k in range(len(a) - 1)):
        raise InvalidParameterError("a", raw, "a_k must be strictly increasing")
    return {"C": C, "a": a}


# =============================================================================
# Module-level operations
# =============================================================================


def evaluate(f: FunctionSpec, z: ComplexPoint) -> ComplexPoint:
    """Standard complex evaluation of ``f(z)``.

    Raises:
        RangeOverflowError: If ``|f(z)|`` is not representable; use
            :func:`eval_log` instead
    """
    w = z.to_complex()
    log_mod = f.log_abs(w)
    if log_mod > ASYMPTOTIC_THRESHOLD:
        raise RangeOverflowError(
            "f(z) overflows native floats; use eval_log", log_modulus=log_mod
        ).add_context("function", str(f))
    try:
        value = f.complex_value(w)
    except OverflowError:
        # e.g. lam*e^z with tiny lam: the product fits, e^z alone does not
        value = cmath.exp(w + cmath.log(_leading(f, w)))
    return ComplexPoint.from_complex(value)


def _leading(f: FunctionSpec, w: complex) -> complex:
    # f(w) / e^w for the exp-type families
    if f.family is Family.HALF_EXP:
        return f.param("scale") * w
    if f.family is Family.SCALED_EXP:
        return complex(f.param("lam"))
    return 1 + 0j


def eval_log(f: FunctionSpec, z: LogPolar) -> LogPolar:
    """Log-polar image of ``f(z)``; total on the whole extended range."""
    return f.image_of_log_polar(z)


def log_max_modulus(f: FunctionSpec, t: SignedLog) -> SignedLog:
    """``phi(t) = log M(e^t, f)``."""
    return f.phi(t)


def log_max_modulus_float(f: FunctionSpec, t: float) -> float:
    """Float view of :func:`log_max_modulus`, ``inf`` beyond float range."""
    return signed_to_float(f.phi(t))


__all__ = [
    "ASYMPTOTIC_THRESHOLD",
    "ComplexPoint",
    "FunctionSpec",
    "LogPolar",
    "eval_log",
    "evaluate",
    "log_max_modulus",
    "log_max_modulus_float",
    "wrap_angle",
]
