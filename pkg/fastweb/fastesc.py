"""Pointwise fast-escape engine.

Orbits are iterated exactly in complex floats while possible and continue
on the log-polar path once ``|f^n(z)|`` leaves float range or its phase can
no longer be resolved. On top of an orbit this module decides membership in
``A_R(f)`` at a finite horizon and computes the escape-rate sequence
``M^{-n}(|f^n(z)|)`` and its limit ``R_A(z)``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from itertools import islice
from typing import Any

from fastweb.entire import ComplexPoint, FunctionSpec, LogPolar, eval_log
from fastweb.enums import EscapeClass, Membership, RAStatus, TruncationReason
from fastweb.exceptions import ContractError, DomainError
from fastweb.extmag import (
    ExtReal,
    signed_cmp,
    signed_exp,
    signed_rel_diff,
    signed_to_float,
)
from fastweb.maxmod import (
    DEFAULT_ESCAPE_THRESHOLD,
    DEFAULT_HORIZON,
    compute_Rf,
    escape_test,
    get_profile,
    inverse_logM_n,
    logM_ladder,
)
from fastweb.types import SignedLog

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_NMAX = 30
EXACT_COMPARE_TOL = 1e-9
FLAGGED_COMPARE_TOL = 1e-3


def bounded_log_radius(threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD) -> ExtReal:
    """Log of the escape radius: one tower level below the escape threshold.

    With the default threshold an orbit counts as bounded when its final
    modulus is below ``e^e``.
    """
    return ExtReal(max(threshold.level - 1, 0), 0.0)


def _as_point(z: ComplexPoint | complex) -> ComplexPoint:
    return z if isinstance(z, ComplexPoint) else ComplexPoint.from_complex(complex(z))


# =============================================================================
# Orbits
# =============================================================================


@dataclass(frozen=True)
class OrbitRecord:
    """Log-polar orbit ``z, f(z), ..., f^N(z)`` with ``N = horizon_used``."""

    point: ComplexPoint
    log_moduli: tuple[LogPolar, ...]
    horizon_used: int
    escape_class: EscapeClass
    escape_index: int | None = None

    @property
    def approximate_flags(self) -> list[bool]:
        return [entry.approximate for entry in self.log_moduli]

    @property
    def first_approximate(self) -> int | None:
        """Index of the first flagged entry, None if the orbit is exact."""
        for n, entry in enumerate(self.log_moduli):
            if entry.approximate:
                return n
        return None

    def log_modulus(self, n: int) -> SignedLog:
        return self.log_moduli[n].log_modulus


def _iterates(f: FunctionSpec, point: ComplexPoint) -> Iterator[LogPolar]:
    # exact complex steps while the value is kept, log-polar steps after
    w: complex | None = point.to_complex()
    current = LogPolar.from_complex(w)
    yield current
    while True:
        if w is not None:
            w, current = f.step_complex(w)
        else:
            current = eval_log(f, current)
        yield current


def orbit(
    f: FunctionSpec,
    z: ComplexPoint | complex,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
) -> OrbitRecord:
    """Iterate ``f`` from ``z`` for at most ``horizon`` steps.

    The orbit stops one iterate after the log-modulus first reaches
    ``threshold``; that confirming iterate must stay at or above the
    threshold, otherwise the crossing is discarded and iteration continues.
    """
    if horizon < 1:
        raise ContractError("horizon must be at least 1", requirement="horizon >= 1")
    point = _as_point(z)
    steps = _iterates(f, point)
    current = next(steps)
    entries = [current]
    crossing: int | None = 0 if signed_cmp(current.log_modulus, threshold) >= 0 else None
    escape_at: int | None = None

    for n in range(1, horizon + 1):
        current = next(steps)
        entries.append(current)
        above = signed_cmp(current.log_modulus, threshold) >= 0
        if crossing is not None:
            if above:
                escape_at = crossing
                break
            crossing = None
        elif above:
            crossing = n
    else:
        if crossing is not None:
            # crossed on the last step; no room left for a confirming iterate
            escape_at = crossing

    horizon_used = len(entries) - 1
    if escape_at is not None:
        escape_class = EscapeClass.ESCAPING
    elif signed_cmp(entries[-1].log_modulus, bounded_log_radius(threshold)) < 0:
        escape_class = EscapeClass.BOUNDED_AT_HORIZON
    else:
        escape_class = EscapeClass.INDETERMINATE
    return OrbitRecord(point, tuple(entries), horizon_used, escape_class, escape_at)


def orbit_tail(f: FunctionSpec, rec: OrbitRecord, stop: int) -> Iterator[LogPolar]:
    """Iterates ``f^n(z)`` for ``horizon_used < n <= stop``, past the orbit stop.

    All entries are flagged approximate. The generator is lazy, so a caller
    that stops early pays only for the iterates it consumed.
    """
    for entry in islice(_iterates(f, rec.point), rec.horizon_used + 1, stop + 1):
        yield LogPolar(entry.log_modulus, entry.argument, True)


# =============================================================================
# A_R membership
# =============================================================================


@dataclass(frozen=True)
class MembershipResult:
    """Verdict of :func:`in_AR` with the index of the first violation."""

    verdict: Membership
    violated_at: int | None
    horizon_used: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "violated_at": self.violated_at,
            "horizon_used": self.horizon_used,
        }


def _violates(s: SignedLog, T: SignedLog, tol: float) -> bool:
    return signed_cmp(s, T) < 0 and signed_rel_diff(s, T) > tol


def in_AR(
    f: FunctionSpec,
    z: ComplexPoint | complex,
    R: float,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
    record: OrbitRecord | None = None,
) -> MembershipResult:
    """Test ``|f^n(z)| >= M^n(R)`` for ``n <= horizon``.

    An exact entry below ``M^n(R)`` certifies ``out``. A flagged entry below
    it (beyond the relaxed tolerance) only yields ``horizon_limited``. After
    a confirmed escape the orbit follows the maximal-modulus continuation,
    under which every later comparison keeps the sign of the last one.

    Raises:
        ContractError: If ``M^n(R)`` does not escape within the horizon
    """
    p = get_profile(f)
    if not (R > 0 and math.isfinite(R)):
        raise ContractError("R must be a positive real", requirement="R > 0")
    if not escape_test(p, R, horizon, threshold):
        raise ContractError(
            "M^n(R) does not escape within the horizon; A_R needs R > R_f",
            requirement="R > R_f",
        ).add_context("R", R)
    rec = record if record is not None else orbit(f, z, horizon, threshold)
    ladder = logM_ladder(p, math.log(R), rec.horizon_used)

    for n, entry in enumerate(rec.log_moduli):
        tol = FLAGGED_COMPARE_TOL if entry.approximate else EXACT_COMPARE_TOL
        if _violates(entry.log_modulus, ladder[n], tol):
            verdict = Membership.HORIZON_LIMITED if entry.approximate else Membership.OUT
            return MembershipResult(verdict, n, rec.horizon_used)

    if rec.escape_class is EscapeClass.ESCAPING:
        return MembershipResult(Membership.IN, None, rec.horizon_used)
    return MembershipResult(Membership.HORIZON_LIMITED, None, rec.horizon_used)


# =============================================================================
# Escape-rate sequence
# =============================================================================


@dataclass(frozen=True)
class RASequence:
    """Prefix of ``log M^{-n}(|f^n(z)|)`` with truncation data."""

    log_values: tuple[SignedLog, ...]
    approximate: tuple[bool, ...]
    truncated: TruncationReason | None = None
    truncated_at: int | None = None

    @property
    def values(self) -> list[float]:
        """Radius-scale entries ``M^{-n}(|f^n(z)|)``."""
        return [signed_to_float(signed_exp(t)) for t in self.log_values]

    def __len__(self) -> int:
        return len(self.log_values)


def ra_sequence(
    f: FunctionSpec,
    z: ComplexPoint | complex,
    nmax: int = DEFAULT_NMAX,
    horizon: int = DEFAULT_HORIZON,
    record: OrbitRecord | None = None,
) -> RASequence:
    """``M^{-n}(|f^n(z)|)`` for ``n <= min(nmax, horizon_used)`` in log scale.

    An inverse hitting the range floor ``|f(0)|`` truncates the sequence
    with reason ``domain_floor``; no exception escapes.
    """
    p = get_profile(f)
    rec = record if record is not None else orbit(f, z, horizon)
    last = min(nmax, rec.horizon_used)
    values: list[SignedLog] = []
    flags: list[bool] = []
    for n in range(last + 1):
        entry = rec.log_moduli[n]
        try:
            values.append(inverse_logM_n(p, entry.log_modulus, n))
        except DomainError:
            logger.debug("R_A sequence of %s truncated at n=%d (domain floor)", rec.point, n)
            return RASequence(tuple(values), tuple(flags), TruncationReason.DOMAIN_FLOOR, n)
        flags.append(entry.approximate)
    return RASequence(tuple(values), tuple(flags))


@dataclass(frozen=True)
class RAResult:
    """Escape rate ``R_A(z)`` with provenance."""

    status: RAStatus
    value: float
    log_value: SignedLog
    sequence: tuple[float, ...] = ()
    log_sequence: tuple[SignedLog, ...] = ()
    residual: float = 0.0
    approximate: tuple[bool, ...] = ()
    truncation: TruncationReason | None = None
    horizon_used: int = 0
    escape_class: EscapeClass = EscapeClass.INDETERMINATE
    point: ComplexPoint | None = field(default=None)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready mapping; extended values use the ``E(level,mantissa)`` form."""

        def encode(x: SignedLog) -> Any:
            if isinstance(x, ExtReal):
                return str(x)
            return x if math.isfinite(x) else str(x)

        return {
            "point": None if self.point is None else [self.point.re, self.point.im],
            "status": self.status.value,
            "value": encode(self.value),
            "log_value": encode(self.log_value),
            "sequence": [encode(v) for v in self.sequence],
            "log_sequence": [encode(v) for v in self.log_sequence],
            "approximate": list(self.approximate),
            "residual": self.residual,
            "truncation": None if self.truncation is None else self.truncation.value,
            "horizon_used": self.horizon_used,
            "escape_class": self.escape_class.value,
        }


def compute_RA(
    f: FunctionSpec,
    z: ComplexPoint | complex,
    tol: float = DEFAULT_TOL,
    nmax: int = DEFAULT_NMAX,
    horizon: int = DEFAULT_HORIZON,
    threshold: ExtReal = DEFAULT_ESCAPE_THRESHOLD,
) -> RAResult:
    """Extended escape rate: the limit of the ``R_A`` sequence, or ``R_f``.

    The sequence is stable once its last decrement (log scale) is below
    ``tol``. A confirmed escape whose orbit stopped short of ``nmax`` is
    continued past the stop with flagged iterates until it settles. A
    sequence still moving at ``min(nmax, horizon)`` is undefined with reason
    ``nmax_reached``; a continuation that collapses to the range floor is
    undefined with reason ``domain_floor``.

    Raises:
        ContractError: If ``f(0) != 0``; use :func:`ra_sequence` instead
    """
    if not f.fixes_origin:
        raise ContractError(
            "extended R_A needs a function fixing the origin; use ra_sequence",
            requirement="f(0) = 0",
        ).add_context("function", str(f))
    point = _as_point(z)
    p = get_profile(f)
    rec = orbit(f, point, horizon, threshold)

    if rec.escape_class is EscapeClass.BOUNDED_AT_HORIZON:
        r_f = compute_Rf(p, horizon, threshold)
        log_rf = math.log(r_f) if r_f > 0 else -math.inf
        return RAResult(
            RAStatus.NOT_ESCAPING,
            r_f,
            log_rf,
            horizon_used=rec.horizon_used,
            escape_class=rec.escape_class,
            point=point,
        )

    seq = ra_sequence(f, point, nmax, horizon, record=rec)
    log_values = list(seq.log_values)
    flags = list(seq.approximate)
    truncation = seq.truncated if seq.log_values else TruncationReason.DOMAIN_FLOOR
    residual = _decrement(log_values[-2], log_values[-1]) if len(log_values) > 1 else math.inf

    extend = (
        truncation is None
        and rec.escape_class is EscapeClass.ESCAPING
        and len(log_values) - 1 == rec.horizon_used
        and not residual < tol
    )
    if extend:
        for n, entry in enumerate(orbit_tail(f, rec, min(nmax, horizon)), start=rec.horizon_used + 1):
            try:
                t = inverse_logM_n(p, entry.log_modulus, n)
            except DomainError:
                t = math.nan
            if not isinstance(t, ExtReal) and not math.isfinite(t):
                logger.debug("R_A continuation of %s collapsed at n=%d", point, n)
                truncation = TruncationReason.DOMAIN_FLOOR
                break
            log_values.append(t)
            flags.append(True)
            residual = _decrement(log_values[-2], t)
            if residual < tol:
                break

    common = {
        "sequence": tuple(signed_to_float(signed_exp(t)) for t in log_values),
        "log_sequence": tuple(log_values),
        "approximate": tuple(flags),
        "horizon_used": rec.horizon_used,
        "escape_class": rec.escape_class,
        "point": point,
    }
    final = log_values[-1] if log_values else -math.inf
    if truncation is TruncationReason.DOMAIN_FLOOR:
        return RAResult(
            RAStatus.UNDEFINED,
            math.nan,
            final,
            residual=residual,
            truncation=truncation,
            **common,
        )

    if residual < tol:
        return RAResult(
            RAStatus.VALUE,
            signed_to_float(signed_exp(final)),
            final,
            residual=residual,
            **common,
        )
    logger.warning(
        "R_A sequence at %s not stabilised after %d steps (residual %.3g)",
        point,
        len(log_values) - 1,
        residual,
    )
    return RAResult(
        RAStatus.UNDEFINED,
        math.nan,
        final,
        residual=residual,
        truncation=TruncationReason.NMAX_REACHED,
        **common,
    )


def _decrement(previous: SignedLog, current: SignedLog) -> float:
    if isinstance(previous, ExtReal) or isinstance(current, ExtReal):
        return signed_rel_diff(previous, current)
    if previous == current:
        return 0.0
    return abs(previous - current)


__all__ = [
    "MembershipResult",
    "OrbitRecord",
    "RAResult",
    "RASequence",
    "bounded_log_radius",
    "compute_RA",
    "in_AR",
    "orbit",
    "orbit_tail",
    "ra_sequence",
]
