"""Extended-magnitude scalar arithmetic.

Values produced by iterating the maximum modulus grow like towers of
exponentials and leave native float range after two or three steps. They are
carried in level-index form: ``value = exp^level(mantissa)`` with the mantissa
in ``[0, 1)``.

Log-scale quantities (``t = log r``, ``s = log|w|``) are carried as
:data:`~fastweb.types.SignedLog`: a plain float while the value stays at or
below :data:`FLOAT_CEILING` (negative values, including ``-inf`` for ``log 0``,
are always floats) and an :class:`ExtReal` beyond. The ``signed_*`` helpers
implement the arithmetic the engines need on that mixed representation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from fastweb.exceptions import DomainError
from fastweb.types import SignedLog

FLOAT_CEILING = 1e300
LOG_FLOAT_CEILING = math.log(FLOAT_CEILING)
_EXP_OVERFLOW = 709.78

_TEXT_FORM = re.compile(r"^\s*E\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\)\s*$")


@dataclass(frozen=True, order=True, slots=True)
class ExtReal:
    """Nonnegative real in level-index form.

    Ordering is lexicographic on ``(level, mantissa)``, which agrees with the
    ordering of the represented values.
    """

    level: int
    mantissa: float

    def __post_init__(self) -> None:
        if isinstance(self.level, bool) or not isinstance(self.level, int) or self.level < 0:
            raise DomainError("level must be a nonnegative integer", value=self.level)
        if not (0.0 <= self.mantissa < 1.0):
            raise DomainError("mantissa must lie in [0, 1)", value=self.mantissa)

    @classmethod
    def from_real(cls, x: float) -> ExtReal:
        """Convert a finite nonnegative real to canonical form.

        Raises:
            DomainError: If ``x`` is negative or not finite
        """
        if not math.isfinite(x) or x < 0:
            raise DomainError("from_real expects a finite nonnegative real", value=x)
        level = 0
        v = float(x)
        while v >= 1.0:
            v = math.log(v)
            level += 1
        return cls(level, v)

    @classmethod
    def parse(cls, text: str) -> ExtReal:
        """Parse the ``E(level,mantissa)`` text form."""
        match = _TEXT_FORM.match(text)
        if match is None:
            raise DomainError("not an ExtReal text form", value=text)
        return cls(int(match.group(1)), float(match.group(2)))

    def to_float(self) -> float:
        """Return the value as a float, ``inf`` once it overflows."""
        v = self.mantissa
        for _ in range(self.level):
            if v > _EXP_OVERFLOW:
                return math.inf
            v = math.exp(v)
        return v

    @property
    def value(self) -> float:
        return self.to_float()

    @property
    def is_zero(self) -> bool:
        return self.level == 0 and self.mantissa == 0.0

    def exp_ext(self) -> ExtReal:
        """Return ``exp(value)``; one more tower level, same mantissa."""
        return ExtReal(self.level + 1, self.mantissa)

    def log_ext(self) -> SignedLog:
        """Return ``log(value)``.

        Values ``>= 1`` drop one level. Values in ``(0, 1)`` return the
        negative float ``log(mantissa)``.

        Raises:
            DomainError: If the value is 0
        """
        if self.level >= 1:
            return ExtReal(self.level - 1, self.mantissa)
        if self.mantissa == 0.0:
            raise DomainError("log of zero is undefined")
        return math.log(self.mantissa)

    def pow_ext(self, c: float) -> ExtReal:
        """Return ``value ** c`` for a positive exponent ``c``."""
        return pow_ext(self, c)

    def __str__(self) -> str:
        return f"E({self.level},{self.mantissa:.17g})"


def from_real(x: float) -> ExtReal:
    """Module-level alias of :meth:`ExtReal.from_real`."""
    return ExtReal.from_real(x)


def exp_ext(a: ExtReal) -> ExtReal:
    """Exponential of an extended magnitude."""
    return a.exp_ext()


def log_ext(a: ExtReal) -> SignedLog:
    """Logarithm of an extended magnitude (see :meth:`ExtReal.log_ext`)."""
    return a.log_ext()


def cmp(a: ExtReal, b: ExtReal) -> int:
    """Three-way comparison returning -1, 0 or 1."""
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def pow_ext(a: ExtReal, c: float) -> ExtReal:
    """Raise an extended magnitude to a positive real power.

    The product ``c * log(a)`` is formed at the first level whose value fits
    into a float.

    Raises:
        DomainError: If ``c`` is not positive
    """
    if not (c > 0 and math.isfinite(c)):
        raise DomainError("pow_ext expects a positive finite exponent", value=c)
    if a.is_zero:
        return a
    return to_ext(signed_exp(signed_scale(a.log_ext(), c)))


# =============================================================================
# Signed log-scale quantities
# =============================================================================


def canonical(x: SignedLog) -> SignedLog:
    """Return the canonical representation of a log-scale quantity."""
    if isinstance(x, ExtReal):
        as_float = x.to_float()
        return as_float if as_float <= FLOAT_CEILING else x
    x = float(x)
    if math.isnan(x):
        raise DomainError("log-scale quantity is NaN")
    if x > FLOAT_CEILING:
        if math.isinf(x):
            raise DomainError("positive infinity has no extended representation")
        return ExtReal.from_real(x)
    return x


def to_ext(x: SignedLog) -> ExtReal:
    """Convert a nonnegative log-scale quantity to :class:`ExtReal`."""
    if isinstance(x, ExtReal):
        return x
    if x < 0:
        raise DomainError("negative values have no extended representation", value=x)
    return ExtReal.from_real(x)


def signed_to_float(x: SignedLog) -> float:
    """Float value, ``inf`` for extended values beyond float range."""
    return x.to_float() if isinstance(x, ExtReal) else float(x)


def signed_exp(x: SignedLog) -> SignedLog:
    """``exp(x)`` in canonical form."""
    if isinstance(x, ExtReal):
        return x.exp_ext()
    if x <= LOG_FLOAT_CEILING:
        return math.exp(x)
    return ExtReal.from_real(x).exp_ext()


def signed_log(x: SignedLog) -> SignedLog:
    """``log(x)`` for ``x >= 0``; ``log 0`` is ``-inf``.

    Raises:
        DomainError: If ``x`` is negative
    """
    if isinstance(x, ExtReal):
        if x.is_zero:
            return -math.inf
        return canonical(x.log_ext())
    if x < 0:
        raise DomainError("log of a negative value", value=x)
    if x == 0:
        return -math.inf
    return math.log(x)


def signed_add(x: SignedLog, y: SignedLog) -> SignedLog:
    """``x + y`` for log-scale quantities."""
    x_ext = isinstance(x, ExtReal)
    y_ext = isinstance(y, ExtReal)
    if not x_ext and not y_ext:
        return canonical(float(x) + float(y))
    if not x_ext or (y_ext and y > x):
        x, y = y, x
    # x is the extended (and larger) operand from here on
    if isinstance(y, ExtReal):
        if y == x:
            return signed_scale(x, 2.0)
        log_x = signed_log(x)
        log_y = signed_log(y)
        if isinstance(log_x, ExtReal) or isinstance(log_y, ExtReal):
            return x
        log_ratio = log_y - log_x
        sign = 1.0
    else:
        if y == 0 or math.isinf(y):
            return x if y == 0 else canonical(y)
        log_x = signed_log(x)
        if isinstance(log_x, ExtReal):
            return x
        log_ratio = math.log(abs(y)) - log_x
        sign = math.copysign(1.0, y)
    if log_ratio < -745.0:
        return x
    return signed_exp(log_x + math.log1p(sign * math.exp(log_ratio)))


def signed_scale(x: SignedLog, c: float) -> SignedLog:
    """``c * x`` for a positive real ``c``."""
    if not c > 0:
        raise DomainError("signed_scale expects a positive factor", value=c)
    if isinstance(x, ExtReal):
        return signed_exp(signed_add(signed_log(x), math.log(c)))
    product = float(x) * c
    if product <= FLOAT_CEILING:
        return product
    return signed_exp(math.log(x) + math.log(c))


def signed_cmp(x: SignedLog, y: SignedLog) -> int:
    """Three-way comparison of log-scale quantities."""
    if not isinstance(x, ExtReal) and not isinstance(y, ExtReal):
        return (x > y) - (x < y)
    if not isinstance(x, ExtReal) and x < 0:
        return -1
    if not isinstance(y, ExtReal) and y < 0:
        return 1
    return cmp(to_ext(x), to_ext(y))


def signed_rel_diff(x: SignedLog, y: SignedLog) -> float:
    """Relative difference ``|x - y| / max(|x|, |y|)``, usable beyond float range."""
    if not isinstance(x, ExtReal) and not isinstance(y, ExtReal):
        scale = max(abs(x), abs(y))
        if scale == 0:
            return 0.0
        if math.isinf(scale):
            return 0.0 if x == y else 1.0
        return abs(x - y) / scale
    if signed_cmp(x, 0.0) <= 0 or signed_cmp(y, 0.0) <= 0:
        return 1.0
    log_x = signed_log(x)
    log_y = signed_log(y)
    if isinstance(log_x, ExtReal) or isinstance(log_y, ExtReal):
        return 0.0 if log_x == log_y else 1.0
    return -math.expm1(-abs(log_x - log_y))


def li_encode(x: SignedLog) -> float:
    """Monotone level-index coordinate ``level + mantissa``, odd-extended to negatives."""
    if isinstance(x, ExtReal):
        return x.level + x.mantissa
    if math.isinf(x):
        return x
    if x < 0:
        return -li_encode(-x)
    e = ExtReal.from_real(x)
    return e.level + e.mantissa


def li_decode(u: float) -> SignedLog:
    """Inverse of :func:`li_encode`."""
    if math.isinf(u):
        return u
    if u < 0:
        return -signed_to_float(li_decode(-u))
    level = math.floor(u)
    return canonical(ExtReal(int(level), u - level))
