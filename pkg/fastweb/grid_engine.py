"""Vectorised orbit engine behind the grid-scale field computations.

Every cell follows the same rules as :func:`fastweb.fastesc.orbit`: exact
complex steps while ``|f^n(z)|`` is representable and its phase is kept,
then log-polar steps with the family's dominant-term forms. A log-modulus
beyond :data:`~fastweb.extmag.FLOAT_CEILING` is carried one level up (its
logarithm is stored). Such an entry is always above the escape threshold, so
at most one further iterate is needed to confirm the escape; when that
iterate is out of reach even at the lifted level it is recorded with regime
:data:`REGIME_BEYOND` and no stored value.

Per-entry regime codes:

- ``0`` unflagged float log-modulus
- ``1`` flagged float log-modulus
- ``2`` lifted: the stored value is the log of the log-modulus
- ``3`` beyond the lifted level
- ``-1`` past the end of the orbit

All operations are elementwise, so a cell's result does not depend on the
batch it was computed in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from fastweb.entire import ASYMPTOTIC_THRESHOLD, FunctionSpec, wrap_angle_array
from fastweb.enums import EscapeClass, Family, Membership, RAStatus, TruncationReason
from fastweb.exceptions import ConvergenceError
from fastweb.extmag import FLOAT_CEILING, LOG_FLOAT_CEILING, ExtReal, signed_log, signed_to_float
from fastweb.fastesc import EXACT_COMPARE_TOL, FLAGGED_COMPARE_TOL, bounded_log_radius
from fastweb.maxmod import get_profile, logM_ladder
from fastweb.types import BoolArray, ComplexArray, FloatArray, IntArray, SignedLog

logger = logging.getLogger(__name__)

REGIME_EXACT = 0
REGIME_FLAGGED = 1
REGIME_LIFTED = 2
REGIME_BEYOND = 3
REGIME_UNUSED = -1

CLASS_ESCAPING = 0
CLASS_BOUNDED = 1
CLASS_INDETERMINATE = 2
ESCAPE_CLASSES = (EscapeClass.ESCAPING, EscapeClass.BOUNDED_AT_HORIZON, EscapeClass.INDETERMINATE)

VERDICT_IN = 0
VERDICT_OUT = 1
VERDICT_HORIZON_LIMITED = 2
MEMBERSHIP = (Membership.IN, Membership.OUT, Membership.HORIZON_LIMITED)

STATUS_VALUE = 0
STATUS_UNDEFINED = 1
STATUS_NOT_ESCAPING = 2
RA_STATUSES = (RAStatus.VALUE, RAStatus.UNDEFINED, RAStatus.NOT_ESCAPING)

TRUNCATION_NONE = 0
TRUNCATION_DOMAIN_FLOOR = 1
TRUNCATION_NMAX = 2
TRUNCATIONS = (None, TruncationReason.DOMAIN_FLOOR, TruncationReason.NMAX_REACHED)

_MAX_BRACKET_STEPS = 2100
_MAX_FLOAT_BISECTIONS = 2200
# exp() of anything below this is finite
_EXP_SAFE = 700.0

_QUIET = {"divide": "ignore", "invalid": "ignore", "over": "ignore", "under": "ignore"}


@dataclass(frozen=True)
class OrbitBundle:
    """Orbits of a batch of points.

    ``values`` and ``regime`` have shape ``(horizon + 1, size)``; column
    ``k`` holds the orbit of ``points[k]`` up to index ``last[k]``.
    """

    points: ComplexArray
    values: FloatArray
    regime: np.ndarray
    last: IntArray
    escape_at: IntArray
    escape_class: np.ndarray
    horizon: int
    threshold: ExtReal

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def escaping(self) -> BoolArray:
        return self.escape_class == CLASS_ESCAPING

    @property
    def bounded(self) -> BoolArray:
        return self.escape_class == CLASS_BOUNDED

    def column(self, k: int) -> tuple[FloatArray, np.ndarray]:
        """Stored values and regimes of one orbit, trimmed to its length."""
        n = int(self.last[k]) + 1
        return self.values[:n, k], self.regime[:n, k]


# =============================================================================
# Orbits
# =============================================================================


def trace_orbits(f: FunctionSpec, z: ComplexArray, horizon: int, threshold: ExtReal) -> OrbitBundle:
    """Iterate ``f`` on every point of ``z`` with the escape-confirmation rule."""
    points = np.asarray(z, dtype=np.complex128).ravel()
    size = points.size
    cells = np.arange(size)
    thr = threshold.to_float()
    bound = bounded_log_radius(threshold).to_float()

    values = np.full((horizon + 1, size), np.nan)
    regime = np.full((horizon + 1, size), REGIME_UNUSED, dtype=np.int8)

    with np.errstate(**_QUIET):
        w = points.copy()
        s = np.log(np.abs(points))
        theta = np.angle(points)
    exact = np.ones(size, dtype=bool)
    flag = np.zeros(size, dtype=bool)
    lift = np.zeros(size, dtype=bool)
    beyond = np.zeros(size, dtype=bool)

    values[0] = s
    regime[0] = REGIME_EXACT
    crossing = np.where(s >= thr, 0, -1)
    escape_at = np.full(size, -1, dtype=np.int64)
    last = np.full(size, horizon, dtype=np.int64)
    active = np.ones(size, dtype=bool)

    for n in range(1, horizon + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w_n, s_n, th_n, ex_n, fl_n, lf_n, by_n = _step(
            f, w[idx], s[idx], theta[idx], exact[idx], flag[idx], lift[idx]
        )
        w[idx], s[idx], theta[idx] = w_n, s_n, th_n
        exact[idx], flag[idx], lift[idx], beyond[idx] = ex_n, fl_n, lf_n, by_n

        values[n, idx] = np.where(by_n, np.nan, s_n)
        regime[n, idx] = _regime_codes(fl_n, lf_n, by_n)

        above = by_n | lf_n | (s_n >= thr)
        crossed = crossing[idx] >= 0
        done = idx[crossed & above]
        escape_at[done] = crossing[done]
        last[done] = n
        active[done] = False
        crossing[idx[crossed & ~above]] = -1
        crossing[idx[~crossed & above]] = n
        # a beyond entry is always the confirming iterate of a lifted one
        if np.any(active[idx[by_n]]):
            raise ConvergenceError("orbit continued past an unrepresentable iterate")

    # crossed on the last step; no room left for a confirming iterate
    late = active & (crossing >= 0)
    escape_at[late] = crossing[late]

    final_s = values[last, cells]
    final_regime = regime[last, cells]
    with np.errstate(invalid="ignore"):
        small = (final_regime <= REGIME_FLAGGED) & (final_s < bound)
    escape_class = np.where(
        escape_at >= 0, CLASS_ESCAPING, np.where(small, CLASS_BOUNDED, CLASS_INDETERMINATE)
    ).astype(np.int8)
    return OrbitBundle(points, values, regime, last, escape_at, escape_class, horizon, threshold)


def trace_tail(f: FunctionSpec, z: ComplexArray, stop: int) -> tuple[FloatArray, np.ndarray]:
    """Orbits of ``z`` up to index ``stop`` without the escape-confirmation stop.

    The steps are those of :func:`trace_orbits`, so rows up to a cell's
    ``last`` repeat its traced orbit. A cell ends at its first beyond-lifted
    entry.
    """
    points = np.asarray(z, dtype=np.complex128).ravel()
    size = points.size
    values = np.full((stop + 1, size), np.nan)
    regime = np.full((stop + 1, size), REGIME_UNUSED, dtype=np.int8)

    with np.errstate(**_QUIET):
        w = points.copy()
        s = np.log(np.abs(points))
        theta = np.angle(points)
    exact = np.ones(size, dtype=bool)
    flag = np.zeros(size, dtype=bool)
    lift = np.zeros(size, dtype=bool)
    values[0] = s
    regime[0] = REGIME_EXACT
    active = np.ones(size, dtype=bool)

    for n in range(1, stop + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w_n, s_n, th_n, ex_n, fl_n, lf_n, by_n = _step(
            f, w[idx], s[idx], theta[idx], exact[idx], flag[idx], lift[idx]
        )
        w[idx], s[idx], theta[idx] = w_n, s_n, th_n
        exact[idx], flag[idx], lift[idx] = ex_n, fl_n, lf_n
        values[n, idx] = np.where(by_n, np.nan, s_n)
        regime[n, idx] = _regime_codes(fl_n, lf_n, by_n)
        active[idx[by_n]] = False
    return values, regime


def _regime_codes(flag: BoolArray, lift: BoolArray, beyond: BoolArray) -> np.ndarray:
    return np.where(
        beyond,
        REGIME_BEYOND,
        np.where(lift, REGIME_LIFTED, np.where(flag, REGIME_FLAGGED, REGIME_EXACT)),
    )


def _step(
    f: FunctionSpec,
    w: ComplexArray,
    s: FloatArray,
    theta: FloatArray,
    exact: BoolArray,
    flag: BoolArray,
    lift: BoolArray,
) -> tuple[ComplexArray, FloatArray, FloatArray, BoolArray, BoolArray, BoolArray, BoolArray]:
    m = w.size
    w_n = np.zeros(m, dtype=np.complex128)
    s_n = np.full(m, -np.inf)
    th_n = np.zeros(m)
    ex_n = np.zeros(m, dtype=bool)
    fl_n = np.ones(m, dtype=bool)
    lf_n = np.zeros(m, dtype=bool)
    by_n = np.zeros(m, dtype=bool)

    direct = ~lift & exact
    rect = ~lift & ~exact & (s <= LOG_FLOAT_CEILING)
    asym = ~lift & ~exact & (s > LOG_FLOAT_CEILING)

    with np.errstate(**_QUIET):
        for sel, from_value in ((direct, True), (rect, False)):
            if not sel.any():
                continue
            src = w[sel] if from_value else np.exp(s[sel]) * np.exp(1j * theta[sel])
            lm, arg, lost, ex, val = f.image_array(src)
            s_n[sel] = lm
            th_n[sel] = arg
            fl_n[sel] = flag[sel] | lost | (lm > ASYMPTOTIC_THRESHOLD)
            if from_value:
                ex_n[sel] = ex
                w_n[sel] = val

        if asym.any():
            s_n[asym], lf_n[asym] = _asymptotic_from_float(f, s[asym], theta[asym])
            th_n[asym] = _asymptotic_argument(f, theta[asym])

        if lift.any():
            s_l, lf_l, by_l = _asymptotic_from_lifted(f, s[lift], theta[lift])
            s_n[lift], lf_n[lift], by_n[lift] = s_l, lf_l, by_l
            th_n[lift] = _asymptotic_argument(f, theta[lift])

        # float results above the ceiling move up one level
        up = ~lf_n & ~by_n & (s_n > FLOAT_CEILING)
        s_n[up] = np.log(s_n[up])
        lf_n |= up
    ex_n &= ~lf_n
    fl_n |= lf_n | by_n
    return w_n, s_n, th_n, ex_n, fl_n, lf_n, by_n


def _asymptotic_argument(f: FunctionSpec, theta: FloatArray) -> FloatArray:
    if f.family is Family.BAKER_PRODUCT:
        return wrap_angle_array(f._degree * theta)  # type: ignore[attr-defined]
    # exp-type: the argument is either lost or 0 on the positive axis
    return np.zeros(theta.shape)


def _baker_offset(f: FunctionSpec) -> float:
    return f.log_const - sum(f._log_a)  # type: ignore[attr-defined]


def _asymptotic_from_float(
    f: FunctionSpec, s: FloatArray, theta: FloatArray
) -> tuple[FloatArray, BoolArray]:
    # |z| = e^s is beyond float range while s is a float
    if f.family is Family.BAKER_PRODUCT:
        return f._degree * s + _baker_offset(f), np.zeros(s.shape, dtype=bool)  # type: ignore[attr-defined]
    cos_t = np.cos(theta)
    extra = f.log_const + (s if f.family is Family.HALF_EXP else 0.0)
    extra = np.broadcast_to(extra, s.shape)
    out = np.full(s.shape, -np.inf)
    lifted = np.zeros(s.shape, dtype=bool)

    pos = cos_t > 0
    log_real = s[pos] + np.log(cos_t[pos])
    small = log_real < _EXP_SAFE
    near = np.exp(np.where(small, log_real, 0.0)) + extra[pos]
    far = log_real + np.log1p(extra[pos] * np.exp(-log_real))
    out[pos] = np.where(small, near, far)
    lifted[pos] = ~small

    zero = cos_t == 0
    out[zero] = extra[zero]
    return out, lifted


def _asymptotic_from_lifted(
    f: FunctionSpec, ls: FloatArray, theta: FloatArray
) -> tuple[FloatArray, BoolArray, BoolArray]:
    # |z| = exp(exp(ls)); only the dominant term survives
    shape = ls.shape
    if f.family is Family.BAKER_PRODUCT:
        out = ls + math.log(f._degree)  # type: ignore[attr-defined]
        return out, np.ones(shape, dtype=bool), np.zeros(shape, dtype=bool)
    cos_t = np.cos(theta)
    out = np.full(shape, -np.inf)
    lifted = np.zeros(shape, dtype=bool)
    beyond = cos_t > 0
    zero = cos_t == 0
    if f.family is Family.HALF_EXP:
        out[zero] = ls[zero]
        lifted[zero] = True
    else:
        out[zero] = f.log_const
    out[beyond] = np.nan
    return out, lifted, beyond


# =============================================================================
# Inverse of phi
# =============================================================================


def _target_phi(f: FunctionSpec, t: FloatArray, lifted: BoolArray) -> FloatArray:
    if not lifted.any():
        return f.phi_array(t)
    out = f.phi_array(t)
    out[lifted] = f.log_phi_array(t[lifted])
    return out


def inverse_phi_array(f: FunctionSpec, s: FloatArray, lifted: BoolArray | None = None) -> FloatArray:
    """``psi(s) = log M^{-1}(e^s)`` elementwise.

    Entries flagged ``lifted`` hold ``log s`` instead of ``s``. The result is
    the smallest float ``t`` with ``phi(t) >= s`` (bisection to adjacent
    floats), ``-inf`` at the range floor ``log|f(0)|`` and ``nan`` below it.

    Raises:
        ConvergenceError: If a bracket cannot be established
    """
    s = np.asarray(s, dtype=np.float64)
    lifted = np.zeros(s.shape, dtype=bool) if lifted is None else np.asarray(lifted, dtype=bool)
    out = np.full(s.shape, np.nan)
    floor = f.log_abs_at_zero
    with np.errstate(invalid="ignore"):
        out[~lifted & (s == floor)] = -np.inf
        live = np.isfinite(s) & (lifted | (s > floor))
    idx = np.flatnonzero(live)
    if idx.size == 0:
        return out
    target = s[idx]
    lf = lifted[idx]
    lo = np.full(idx.size, -1.0)
    hi = np.full(idx.size, 1.0)

    with np.errstate(**_QUIET):
        step = np.ones(idx.size)
        pending = np.arange(idx.size)
        for _ in range(_MAX_BRACKET_STEPS):
            if pending.size == 0:
                break
            move = _target_phi(f, lo[pending], lf[pending]) >= target[pending]
            pending = pending[move]
            hi[pending] = lo[pending]
            lo[pending] -= step[pending]
            step[pending] *= 2.0
        else:
            raise ConvergenceError(
                "could not bracket the inverse from below", max_iterations=_MAX_BRACKET_STEPS
            )

        step = np.maximum(hi - lo, 1.0)
        pending = np.arange(idx.size)
        for _ in range(_MAX_BRACKET_STEPS):
            if pending.size == 0:
                break
            move = ~(_target_phi(f, hi[pending], lf[pending]) >= target[pending])
            pending = pending[move]
            lo[pending] = hi[pending]
            hi[pending] += step[pending]
            step[pending] *= 2.0
        else:
            raise ConvergenceError(
                "could not bracket the inverse from above", max_iterations=_MAX_BRACKET_STEPS
            )

        pending = np.arange(idx.size)
        for _ in range(_MAX_FLOAT_BISECTIONS):
            if pending.size == 0:
                break
            a = lo[pending]
            b = hi[pending]
            mid = 0.5 * (a + b)
            open_ = (mid > a) & (mid < b)
            pending = pending[open_]
            mid = mid[open_]
            # nan counts as below the target
            below = ~(_target_phi(f, mid, lf[pending]) >= target[pending])
            lo[pending[below]] = mid[below]
            hi[pending[~below]] = mid[~below]

    out[idx] = hi
    return out


def pullback(
    f: FunctionSpec,
    bundle: OrbitBundle,
    steps: IntArray,
    cells: IntArray | None = None,
) -> FloatArray:
    """``log M^{-k}(|f^k(z)|)`` per cell, ``k = steps``.

    A beyond-lifted entry pulls back to the same value as its lifted
    predecessor to double precision, so it is replaced by that predecessor.
    ``nan`` marks an inverse that left the range of ``phi``.
    """
    cells = np.arange(bundle.size) if cells is None else np.asarray(cells)
    k = np.asarray(steps, dtype=np.int64)
    beyond = bundle.regime[k, cells] == REGIME_BEYOND
    k = np.where(beyond, k - 1, k)
    lifted = bundle.regime[k, cells] == REGIME_LIFTED
    return _pull(f, bundle.values[k, cells], lifted, k)


def _pull(f: FunctionSpec, s: FloatArray, lifted: BoolArray, k: IntArray) -> FloatArray:
    # k inverses of phi; the first one reads lifted entries
    t = np.asarray(s, dtype=np.float64).copy()
    remaining = np.asarray(k, dtype=np.int64).copy()
    first = remaining > 0
    if first.any():
        t[first] = inverse_phi_array(f, t[first], lifted[first])
        remaining[first] -= 1
    while True:
        sel = remaining > 0
        if not sel.any():
            break
        t[sel] = inverse_phi_array(f, t[sel])
        remaining[sel] -= 1
    return t


# =============================================================================
# Per-cell quantities
# =============================================================================


@dataclass(frozen=True)
class EscapeRates:
    """Per-cell extended ``R_A`` with the data behind it."""

    value: FloatArray
    log_value: FloatArray
    status: np.ndarray
    truncation: np.ndarray
    residual: FloatArray
    steps: IntArray
    escape_class: np.ndarray


def escape_rates(
    f: FunctionSpec, bundle: OrbitBundle, tol: float, nmax: int, r_f: float
) -> EscapeRates:
    """Vectorised :func:`fastweb.fastesc.compute_RA` over a bundle.

    Unsettled escaping cells whose orbit stopped short of ``nmax`` are
    continued past the stop as in the pointwise engine.
    """
    size = bundle.size
    steps = np.minimum(nmax, bundle.last)
    bounded = bundle.bounded

    t_final = np.full(size, np.nan)
    todo = np.flatnonzero(~bounded)
    t_final[todo] = pullback(f, bundle, steps[todo], todo)

    residual = np.where(bounded, 0.0, np.inf)
    prev_cells = np.flatnonzero(~bounded & (steps > 0))
    if prev_cells.size:
        t_prev = pullback(f, bundle, steps[prev_cells] - 1, prev_cells)
        residual[prev_cells] = _decrements(t_prev, t_final[prev_cells])

    floor_hit = ~bounded & np.isnan(t_final)
    cap = min(nmax, bundle.horizon)
    with np.errstate(invalid="ignore"):
        unsettled = ~(residual < tol)
    grow = np.flatnonzero(
        bundle.escaping & ~floor_hit & unsettled & (steps == bundle.last) & (steps < cap)
    )
    if grow.size:
        collapsed = _continue_rates(f, bundle, grow, cap, tol, t_final, residual, steps)
        floor_hit[grow[collapsed]] = True

    status = np.full(size, STATUS_UNDEFINED, dtype=np.int8)
    truncation = np.full(size, TRUNCATION_NONE, dtype=np.int8)
    with np.errstate(invalid="ignore"):
        settled = ~bounded & ~floor_hit & (residual < tol)
    status[settled] = STATUS_VALUE
    status[bounded] = STATUS_NOT_ESCAPING
    truncation[floor_hit] = TRUNCATION_DOMAIN_FLOOR
    truncation[~bounded & ~floor_hit & ~settled] = TRUNCATION_NMAX

    log_rf = math.log(r_f) if r_f > 0 else -math.inf
    log_value = np.where(bounded, log_rf, t_final)
    with np.errstate(over="ignore"):
        value = np.where(status == STATUS_VALUE, np.exp(t_final), np.nan)
    value[bounded] = r_f
    return EscapeRates(value, log_value, status, truncation, residual, steps, bundle.escape_class)


def _decrements(previous: FloatArray, current: FloatArray) -> FloatArray:
    with np.errstate(invalid="ignore"):
        return np.where(previous == current, 0.0, np.abs(previous - current))


def _continue_rates(
    f: FunctionSpec,
    bundle: OrbitBundle,
    cells: IntArray,
    cap: int,
    tol: float,
    t_final: FloatArray,
    residual: FloatArray,
    steps: IntArray,
) -> BoolArray:
    """Carry ``cells`` past their orbit stop until they settle; updates in place.

    Returns the mask over ``cells`` of continuations that left the range
    of ``phi``.
    """
    values, regime = trace_tail(f, bundle.points[cells], cap)
    collapsed = np.zeros(cells.size, dtype=bool)
    live = np.ones(cells.size, dtype=bool)
    for n in range(int(steps[cells].min()) + 1, cap + 1):
        sel = np.flatnonzero(live & (steps[cells] == n - 1))
        if sel.size == 0:
            continue
        reg = regime[n, sel]
        stuck = reg == REGIME_UNUSED
        live[sel[stuck]] = False
        sel, reg = sel[~stuck], reg[~stuck]
        at = cells[sel]

        # a beyond entry pulls back to the value of its predecessor
        t_new = t_final[at].copy()
        fresh = reg != REGIME_BEYOND
        if fresh.any():
            k = np.full(int(fresh.sum()), n, dtype=np.int64)
            t_new[fresh] = _pull(f, values[n, sel[fresh]], reg[fresh] == REGIME_LIFTED, k)

        lost = ~np.isfinite(t_new)
        collapsed[sel[lost]] = True
        live[sel[lost]] = False
        sel, at, t_new = sel[~lost], at[~lost], t_new[~lost]

        residual[at] = _decrements(t_final[at], t_new)
        t_final[at] = t_new
        steps[at] = n
        live[sel[residual[at] < tol]] = False
    return collapsed


def _ladder_arrays(ladder: list[SignedLog]) -> tuple[FloatArray, FloatArray, BoolArray]:
    T = np.array([signed_to_float(x) for x in ladder])
    ext = np.array([isinstance(x, ExtReal) for x in ladder], dtype=bool)
    log_T = np.array(
        [signed_to_float(signed_log(x)) if isinstance(x, ExtReal) else np.nan for x in ladder]
    )
    return T, log_T, ext


def violations(f: FunctionSpec, bundle: OrbitBundle, R: float) -> tuple[np.ndarray, IntArray]:
    """Per-cell ``A_R`` verdict codes and first violating index (-1 if none).

    Same decision rule as :func:`fastweb.fastesc.in_AR`; the caller checks
    that ``M^n(R)`` escapes.
    """
    ladder = logM_ladder(get_profile(f), math.log(R), bundle.horizon)
    T, log_T, ext = _ladder_arrays(ladder)
    T = T[:, None]
    log_T = log_T[:, None]
    ext = ext[:, None]
    v = bundle.values
    reg = bundle.regime

    with np.errstate(**_QUIET):
        tol = np.where(reg == REGIME_EXACT, EXACT_COMPARE_TOL, FLAGGED_COMPARE_TOL)
        plain = (reg == REGIME_EXACT) | (reg == REGIME_FLAGGED)

        scale = np.maximum(np.abs(v), np.abs(T))
        rel_float = np.where(
            scale == 0,
            0.0,
            np.where(np.isinf(scale), np.where(v == T, 0.0, 1.0), np.abs(v - T) / scale),
        )
        viol_plain_float = (v < T) & (rel_float > tol)
        rel_ext = np.where(v <= 0, 1.0, -np.expm1(-np.abs(np.log(v) - log_T)))
        viol_plain_ext = rel_ext > tol
        viol_plain = plain & np.where(ext, viol_plain_ext, viol_plain_float)

        rel_lifted = -np.expm1(-np.abs(v - log_T))
        viol_lifted = (reg == REGIME_LIFTED) & ext & (v < log_T) & (rel_lifted > tol)

        prev_below = np.zeros(v.shape, dtype=bool)
        prev_below[1:] = (reg[:-1] == REGIME_LIFTED) & ext[:-1] & (v[:-1] < log_T[:-1])
        viol_beyond = (reg == REGIME_BEYOND) & prev_below

    viol = viol_plain | viol_lifted | viol_beyond
    has = viol.any(axis=0)
    first = np.where(has, np.argmax(viol, axis=0), -1)
    cells = np.arange(bundle.size)
    first_regime = reg[np.maximum(first, 0), cells]
    codes = np.where(
        has,
        np.where(first_regime == REGIME_EXACT, VERDICT_OUT, VERDICT_HORIZON_LIMITED),
        np.where(bundle.escaping, VERDICT_IN, VERDICT_HORIZON_LIMITED),
    ).astype(np.int8)
    return codes, first


def vn_values(f: FunctionSpec, bundle: OrbitBundle, n: int) -> FloatArray:
    """``v_n = -log M^{-n}(|f^n(z)|)``; ``nan`` where ``f^n(z) = 0`` or undefined."""
    steps = np.minimum(n, bundle.last)
    t = pullback(f, bundle, steps)
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(t), -t, np.nan)


def _log_log_ratio(v: FloatArray, v0: FloatArray, reg: np.ndarray) -> FloatArray:
    with np.errstate(**_QUIET):
        return np.where(reg == REGIME_LIFTED, np.exp(v - v0), v / v0)


def h_values(
    bundle: OrbitBundle,
    base: OrbitBundle,
    n: int,
    stability_tol: float | None = None,
) -> tuple[FloatArray, IntArray]:
    """Ratio ``log|f^m(z)| / log|f^m(z0)|`` at the largest admissible ``m <= n``.

    ``m`` is admissible when both orbits have entry ``m`` in the same regime
    and the base log-modulus is positive. With ``stability_tol`` a cell whose
    ratio moved by more than that from ``m - 1`` is marked missing.

    Returns:
        ``(h, m)`` with ``nan`` / ``-1`` where no index is admissible
    """
    depth = min(n, bundle.horizon, base.horizon) + 1
    reg = bundle.regime[:depth]
    vals = bundle.values[:depth]
    reg0 = base.regime[:depth, :1]
    vals0 = base.values[:depth, :1]
    rows = np.arange(depth)[:, None]

    with np.errstate(invalid="ignore"):
        positive = np.where(reg0 == REGIME_LIFTED, True, vals0 > 0)
    ok = (
        (rows <= bundle.last[None, :])
        & (rows <= int(base.last[0]))
        & (reg == reg0)
        & (reg >= REGIME_EXACT)
        & (reg <= REGIME_LIFTED)
        & positive
    )
    ratio = _log_log_ratio(vals, vals0, reg)
    has = ok.any(axis=0)
    m = np.where(has, depth - 1 - np.argmax(ok[::-1], axis=0), -1)
    cells = np.arange(bundle.size)
    h = np.where(has, ratio[np.maximum(m, 0), cells], np.nan)

    if stability_tol is not None:
        prev = np.maximum(m - 1, 0)
        checkable = has & (m >= 1) & ok[prev, cells]
        with np.errstate(invalid="ignore"):
            drift = np.abs(h - ratio[prev, cells])
        unstable = checkable & ~(drift < stability_tol)
        h = np.where(unstable, np.nan, h)
    return h, m


# =============================================================================
# Row-block tasks (top level so a process pool can pickle them)
# =============================================================================


def orbit_block(
    z: ComplexArray, *, function: FunctionSpec, horizon: int, threshold: ExtReal
) -> tuple[np.ndarray, IntArray, IntArray]:
    """Escape class, orbit length and escape index per cell."""
    bundle = trace_orbits(function, z, horizon, threshold)
    return bundle.escape_class, bundle.last, bundle.escape_at


def membership_block(
    z: ComplexArray,
    *,
    function: FunctionSpec,
    horizon: int,
    threshold: ExtReal,
    radii: tuple[float, ...],
) -> list[tuple[np.ndarray, IntArray]]:
    """Verdict codes for every radius, sharing one orbit trace."""
    bundle = trace_orbits(function, z, horizon, threshold)
    return [violations(function, bundle, R) for R in radii]


def ra_block(
    z: ComplexArray,
    *,
    function: FunctionSpec,
    horizon: int,
    threshold: ExtReal,
    tol: float,
    nmax: int,
    r_f: float,
) -> EscapeRates:
    bundle = trace_orbits(function, z, horizon, threshold)
    return escape_rates(function, bundle, tol, nmax, r_f)


def vn_block(
    z: ComplexArray,
    *,
    function: FunctionSpec,
    horizon: int,
    threshold: ExtReal,
    ns: tuple[int, ...],
) -> list[FloatArray]:
    bundle = trace_orbits(function, z, horizon, threshold)
    return [vn_values(function, bundle, n) for n in ns]


def h_block(
    z: ComplexArray,
    *,
    function: FunctionSpec,
    horizon: int,
    threshold: ExtReal,
    base: OrbitBundle,
    n: int,
    stability_tol: float | None,
) -> tuple[FloatArray, IntArray]:
    bundle = trace_orbits(function, z, horizon, threshold)
    return h_values(bundle, base, n, stability_tol)


__all__ = [
    "EscapeRates",
    "OrbitBundle",
    "escape_rates",
    "h_values",
    "inverse_phi_array",
    "pullback",
    "trace_orbits",
    "trace_tail",
    "violations",
    "vn_values",
]
