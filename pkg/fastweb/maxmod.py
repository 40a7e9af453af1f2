"""Maximum-modulus engine.

Iterates ``phi(t) = log M(e^t)``, inverts it by monotone bisection and
locates the escape radius ``R_f``. All log-scale inputs and outputs are
:data:`~fastweb.types.SignedLog`, so ``M^n`` stays representable for every
horizon in use.
"""

from __future__ import annotations

import bisect
import functools
import logging
import math
import threading

from fastweb.entire import FunctionSpec
from fastweb.exceptions import ContractError, ConvergenceError, DomainError
from fastweb.extmag import (
    ExtReal,
    li_decode,
    li_encode,
    signed_cmp,
    signed_to_float,
)
from fastweb.types import SignedLog

logger = logging.getLogger(__name__)

DEFAULT_ESCAPE_LEVEL = 3
DEFAULT_ESCAPE_THRESHOLD = ExtReal(DEFAULT_ESCAPE_LEVEL, 0.0)
DEFAULT_HORIZON = 60
RF_TOLERANCE = 1e-9

_MAX_BRACKET_STEPS = 64
_MAX_LI_BISECTIONS = 200
_MAX_FLOAT_BISECTIONS = 2200
_LI_TOL = 1e-15
_FIXED_POINT_LADDER = 400
_FIXED_POINT_SPAN = 1e-12
_MAX_CACHE = 4096


def escape_threshold(level: int = DEFAULT_ESCAPE_LEVEL) -> ExtReal:
    """Escape threshold on the log-modulus: the tower ``exp^level(0)``."""
    return ExtReal(level, 0.0)


class MaxModProfile:
    """``phi`` for one function, with a monotone sample cache.

    The cache holds ``(li(t), li(phi(t)))`` pairs in increasing order and is
    only ever appended to; it seeds the brackets of :meth:`inverse`. Reads
    and writes go through a lock so a profile may be shared between threads.
    """

    def __init__(self, function: FunctionSpec) -> None:
        self.function = function
        self._lock = threading.Lock()
        self._t: list[float] = []
        self._phi: list[float] = []

    def __repr__(self) -> str:
        return f"MaxModProfile({self.function}, samples={len(self._t)})"

    @property
    def floor(self) -> float:
        """``log|f(0)|``, the lower end of ``phi``'s range."""
        return self.function.log_abs_at_zero

    def samples(self) -> list[tuple[float, float]]:
        """Snapshot of the cached ``(li(t), li(phi(t)))`` pairs."""
        with self._lock:
            return list(zip(self._t, self._phi))

    def phi(self, t: SignedLog, record: bool = False) -> SignedLog:
        value = self.function.phi(t)
        if record:
            self._record(t, value)
        return value

    def _record(self, t: SignedLog, value: SignedLog) -> None:
        if not isinstance(t, ExtReal) and math.isinf(t):
            return
        if not isinstance(value, ExtReal) and math.isinf(value):
            return
        u, v = li_encode(t), li_encode(value)
        with self._lock:
            if len(self._t) >= _MAX_CACHE:
                return
            i = bisect.bisect_left(self._t, u)
            if i < len(self._t) and self._t[i] == u:
                return
            # keep both coordinates strictly increasing
            if i > 0 and self._phi[i - 1] >= v:
                return
            if i < len(self._phi) and self._phi[i] <= v:
                return
            self._t.insert(i, u)
            self._phi.insert(i, v)

    def _seed(self, s: SignedLog) -> tuple[float, float]:
        v = li_encode(s)
        with self._lock:
            i = bisect.bisect_left(self._phi, v)
            lo = self._t[i - 1] if i > 0 else None
            hi = self._t[i] if i < len(self._t) else None
        if lo is None and hi is None:
            return -1.0, 1.0
        if lo is None:
            return hi - 1.0, hi  # type: ignore[operator]
        if hi is None:
            return lo, lo + 1.0
        return lo, hi

    def inverse(self, s: SignedLog) -> SignedLog:
        """``psi(s) = log M^{-1}(e^s)``.

        Raises:
            DomainError: If ``s`` lies below ``log|f(0)|``
            ConvergenceError: If no bracket can be established
        """
        floor = self.floor
        if not isinstance(s, ExtReal) and math.isnan(s):
            raise DomainError("inverse undefined", value=s)
        side = signed_cmp(s, floor)
        if side < 0:
            raise DomainError("inverse undefined", value=s).add_context("floor", floor)
        if side == 0:
            return -math.inf

        lo, hi = self._seed(s)
        lo, hi = self._grow_bracket(s, lo, hi)
        t = self._bisect(s, lo, hi)
        self._record(t, s)
        return t

    def _grow_bracket(self, s: SignedLog, lo: float, hi: float) -> tuple[float, float]:
        step = max(hi - lo, 1.0)
        for _ in range(_MAX_BRACKET_STEPS):
            if signed_cmp(self.phi(li_decode(lo)), s) <= 0:
                break
            hi, lo = lo, lo - step
            step *= 2.0
        else:
            raise ConvergenceError(
                "could not bracket the inverse from below", max_iterations=_MAX_BRACKET_STEPS
            ).add_context("s", s)
        step = max(hi - lo, 1.0)
        for _ in range(_MAX_BRACKET_STEPS):
            if signed_cmp(self.phi(li_decode(hi)), s) >= 0:
                break
            lo, hi = hi, hi + step
            step *= 2.0
        else:
            raise ConvergenceError(
                "could not bracket the inverse from above", max_iterations=_MAX_BRACKET_STEPS
            ).add_context("s", s)
        logger.debug("inverse bracket for s=%s: li in [%r, %r]", s, lo, hi)
        return lo, hi

    def _bisect(self, s: SignedLog, lo: float, hi: float) -> SignedLog:
        # level-index bisection until both ends decode to floats
        for _ in range(_MAX_LI_BISECTIONS):
            t_lo, t_hi = li_decode(lo), li_decode(hi)
            if _is_finite_float(t_lo) and _is_finite_float(t_hi):
                return self._bisect_float(s, t_lo, t_hi)
            if hi - lo <= _LI_TOL * max(1.0, abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if signed_cmp(self.phi(li_decode(mid)), s) < 0:
                lo = mid
            else:
                hi = mid
        return li_decode(0.5 * (lo + hi))

    def _bisect_float(self, s: SignedLog, lo: float, hi: float) -> float:
        # run to adjacent floats so the answer does not depend on the seed bracket
        for _ in range(_MAX_FLOAT_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if signed_cmp(self.phi(mid), s) < 0:
                lo = mid
            else:
                hi = mid
        return hi


def _is_finite_float(x: SignedLog) -> bool:
    return not isinstance(x, ExtReal) and math.isfinite(x)


@functools.lru_cache(maxsize=64)
def get_profile(f: FunctionSpec) -> MaxModProfile:
    """Shared profile per function spec."""
    return MaxModProfile(f)


def iterate_logM(p: MaxModProfile, t0: SignedLog, n: int) -> SignedLog:
    """``log M^n(e^{t0})``; ``n = 0`` returns ``t0``."""
    if n < 0:
        raise ContractError("iteration count must be nonnegative", requirement="n >= 0")
    t = t0
    for _ in range(n):
        t = p.phi(t, record=True)
    return t


def logM_ladder(p: MaxModProfile, t0: SignedLog, n: int) -> list[SignedLog]:
    """``[log M^k(e^{t0}) for k = 0..n]``."""
    values = [t0]
    for _ in range(n):
        values.append(p.phi(values[-1]))
    return values


def inverse_logM(p: MaxModProfile, s: SignedLog) -> SignedLog:
    """``log M^{-1}(e^s)`` (see :meth:`MaxModProfile.inverse`)."""
    return p.inverse(s)


def inverse_logM_n(p: MaxModProfile, s: SignedLog, n: int) -> SignedLog:
    """``log M^{-n}(e^s)``; raises :class:`DomainError` at the range floor."""
    for _ in range(n):
        s = p.inverse(s)
    return s


def escape_test(
    p: MaxModProfile,
    r: float,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
) -> bool:
    """True iff ``log M^n(r)`` reaches the threshold for some ``n <= horizon``."""
    if r < 0 or math.isnan(r):
        raise DomainError("radius must be nonnegative", value=r)
    t: SignedLog = math.log(r) if r > 0 else -math.inf
    for _ in range(horizon + 1):
        if signed_cmp(t, threshold) >= 0:
            return True
        nxt = p.phi(t)
        if p.function.fixes_origin and signed_cmp(nxt, t) <= 0:
            # M(r) <= r with M increasing: the orbit never grows again
            return False
        t = nxt
    return False


def escape_index(
    p: MaxModProfile,
    t0: SignedLog,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
) -> int | None:
    """First ``n <= horizon`` with ``log M^n(e^{t0})`` at the threshold, else None."""
    t = t0
    for n in range(horizon + 1):
        if signed_cmp(t, threshold) >= 0:
            return n
        t = p.phi(t)
    return None


def _is_fixed_or_below(p: MaxModProfile, r: float) -> bool:
    t = math.log(r)
    return signed_cmp(p.phi(t), t) <= 0


def compute_Rf(
    p: MaxModProfile,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
) -> float:
    """Escape radius ``R_f`` of a function fixing the origin.

    A bisection on ``escape_test`` locates the horizon-level boundary; it is
    then refined to the largest ``r`` with ``M(r) <= r`` below that boundary,
    which is the exact non-escape criterion for increasing ``M`` with
    ``M(0) = 0``. When ``M(r) > r`` throughout, the result is 0.

    Raises:
        ContractError: If ``f(0) != 0``
    """
    f = p.function
    if not f.fixes_origin:
        raise ContractError(
            f"R_f is only defined for functions fixing the origin, not {f.family.value}",
            requirement="f(0) = 0",
        ).add_context("function", str(f))
    return _compute_Rf_cached(f, horizon, threshold)


@functools.lru_cache(maxsize=64)
def _compute_Rf_cached(f: FunctionSpec, horizon: int, threshold: ExtReal) -> float:
    p = get_profile(f)
    hi = 1.0
    for _ in range(_MAX_BRACKET_STEPS):
        if escape_test(p, hi, horizon, threshold):
            break
        hi *= 2.0
    else:
        raise ConvergenceError("no escaping radius found", max_iterations=_MAX_BRACKET_STEPS)
    lo = 0.0
    while hi - lo > RF_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if escape_test(p, mid, horizon, threshold):
            hi = mid
        else:
            lo = mid
    horizon_radius = hi
    logger.debug("horizon-level escape boundary of %s: %.12g", f, horizon_radius)

    top = horizon_radius + 2.0 * RF_TOLERANCE
    if _is_fixed_or_below(p, top):
        return horizon_radius
    ratio = _FIXED_POINT_SPAN ** (1.0 / _FIXED_POINT_LADDER)
    above = top
    below = None
    r = top
    for _ in range(_FIXED_POINT_LADDER):
        r *= ratio
        if _is_fixed_or_below(p, r):
            below = r
            break
        above = r
    if below is None:
        logger.info("R_f of %s is 0 (M(r) > r on (0, %.3g])", f, top)
        return 0.0
    while above - below > RF_TOLERANCE * 1e-3:
        mid = 0.5 * (above + below)
        if mid <= below or mid >= above:
            break
        if _is_fixed_or_below(p, mid):
            below = mid
        else:
            above = mid
    logger.info("R_f of %s = %.12g", f, below)
    return below


def phi_ladder(p: MaxModProfile, ts: list[float]) -> list[tuple[float, float]]:
    """``(t, phi(t))`` rows in float view, for the ``maxmod`` dump."""
    return [(t, signed_to_float(p.phi(t))) for t in ts]


__all__ = [
    "DEFAULT_ESCAPE_THRESHOLD",
    "DEFAULT_HORIZON",
    "MaxModProfile",
    "compute_Rf",
    "escape_index",
    "escape_test",
    "escape_threshold",
    "get_profile",
    "inverse_logM",
    "inverse_logM_n",
    "iterate_logM",
    "logM_ladder",
    "phi_ladder",
]
