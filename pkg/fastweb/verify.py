"""Theorem-check harness.

Every numerically checkable claim about the maximum modulus, the escape
rate ``R_A``, the loops ``L_R`` and finite Blaschke products is run as a
named suite. A suite produces one :class:`SuiteReport` with a record per
check. Checks with an a priori bound get ``pass`` or ``fail``; checks that
depend on the oscillation-based Fatou proxy are ``score-only``.

Random inputs come from ``numpy.random.default_rng([seed, suite_index])``,
so each suite is reproducible on its own and independent of which other
suites run.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from fastweb import grid_engine
from fastweb.blaschke import (
    BlaschkeSpec,
    beardon_carne_bound,
    compose_orbit,
    derivative_at_zero,
    hyperbolic_distance_disc,
    mu,
    mu_orbit,
    random_blaschke,
    random_disc_points,
)
from fastweb.config.run import RunConfig
from fastweb.entire import ComplexPoint, FunctionSpec, evaluate
from fastweb.enums import Family, Membership, Suite, TruncationReason, Verdict
from fastweb.exceptions import (
    ContractError,
    FastWebError,
    GridError,
    RangeOverflowError,
    UnknownSuiteError,
)
from fastweb.extmag import ExtReal, signed_cmp, signed_log, signed_rel_diff, signed_to_float
from fastweb.fastesc import in_AR, ra_sequence
from fastweb.field import (
    BitField,
    Contour,
    Region,
    ScalarField,
    cell_gradient,
    classify_ladder,
    contains_contour,
    extract_loop,
    fatou_proxy_mask,
    fundamental_hole,
    h_field,
    level_contour,
    loop_level_stats,
    oscillation_field,
    ra_field,
    submean_violations,
    usc_violations,
    vn_fields,
)
from fastweb.maxmod import (
    compute_Rf,
    escape_test,
    get_profile,
    inverse_logM_n,
    iterate_logM,
    logM_ladder,
)
from fastweb.types import SignedLog
from fastweb.utility.io import dump_json

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
DIGEST_LENGTH = 16

CHECK_SLACK = 1e-9
CONJUGACY_TOL = 1e-6
RATIO_BAND = 0.05
VIOLATION_BUDGET = 0.01
MAX_ITERATE = 3

CONVEXITY_LADDER = np.linspace(-5.0, 8.0, 131)
ITERATE_LADDER = np.linspace(-3.0, 2.5, 56)
ROUNDTRIP_POINTS = (0.0, 1.0, 5.0)
GROWTH_LADDER = np.arange(1.5, 40.5, 0.5)
HADAMARD_LADDER = np.arange(1.0, 31.0)
HADAMARD_UP = (1.5, 2.0)
HADAMARD_DOWN = (0.5, 0.75)
INVERSE_SCALING_POINTS = (10.0, 20.0)
CONCAVITY_LADDER = np.arange(5.0, 41.0)

SAMPLE_LOG_RADIUS_MAX = 3.0
MAX_SAMPLE_ROUNDS = 20
NON_FIXING_RADIUS_MIN = 0.5
RF_MARGIN = 1.01
BOUNDED_DISC_FRACTION = 0.9
UNION_SHRINK = 1e-6
UNION_BOUNDED_RADIUS = 1.1
AXIS_MAX = 3.0
AXIS_POINTS = 100
# ln(2 pi) + i pi/2 maps to 2 pi i, then onto the fixed value 1 of |e^z| at 0
PURE_EXP_FLOOR_POINT = complex(math.log(2.0 * math.pi), math.pi / 2.0)
SUBMEAN_LADDER = (1, 2, 3)

BLASCHKE_LAMBDAS = (0.0, 0.5, 0.9)
MU_ORBIT_LAMBDAS = (0.0, 0.5, 0.9, 0.99)
MU_ORBIT_START = 0.999
COMPOSE_LENGTH = 400
COMPOSE_START = 0.99
COMPOSE_STARTS = 10
POINTS_PER_PRODUCT = 10
PAIRS_PER_PRODUCT = 5
CONVERGENCE_LIMIT = 1e-3
MAJORANT_SLACK = 1e-12


# =============================================================================
# Records
# =============================================================================


def inputs_digest(payload: dict[str, Any]) -> str:
    """Short sha256 of the canonical JSON text of a check's inputs."""
    return hashlib.sha256(dump_json(payload).encode("utf-8")).hexdigest()[:DIGEST_LENGTH]


@dataclass(frozen=True)
class CheckRecord:
    """Outcome of one check."""

    id: str
    inputs_digest: str
    measured: Any
    bound: float | None
    verdict: Verdict
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "inputs_digest": self.inputs_digest,
            "measured": self.measured,
            "bound": self.bound,
            "verdict": self.verdict.value,
            "details": self.details,
        }


@dataclass
class SuiteReport:
    """All checks of one suite with the environment they ran in."""

    suite: Suite
    seed: int
    environment: dict[str, Any]
    checks: list[CheckRecord] = field(default_factory=list)

    def count(self, verdict: Verdict) -> int:
        return sum(1 for c in self.checks if c.verdict is verdict)

    @property
    def failed(self) -> bool:
        return self.count(Verdict.FAIL) > 0

    def failures(self) -> list[CheckRecord]:
        return [c for c in self.checks if c.verdict is Verdict.FAIL]

    def check(self, check_id: str) -> CheckRecord:
        for record in self.checks:
            if record.id == check_id:
                return record
        raise KeyError(check_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite.value,
            "seed": self.seed,
            "environment": self.environment,
            "counts": {v.value: self.count(v) for v in Verdict},
            "checks": [c.to_dict() for c in self.checks],
        }


def _environment(config: RunConfig, function: FunctionSpec | None) -> dict[str, Any]:
    return {
        "function": None if function is None else function.to_dict(),
        "grid": config.grid.to_dict(),
        "R_ladder": list(config.R_ladder),
        "horizon": config.horizon,
        "escape_level": config.escape_level,
        "tol": config.tol,
        "nmax": config.nmax,
        "samples": config.samples,
        "blaschke_lambda": config.blaschke_lambda,
    }


class SuiteContext:
    """Collects the records of one suite run."""

    def __init__(self, suite: Suite, config: RunConfig, bench: Workbench) -> None:
        self.suite = suite
        self.config = config
        self.bench = bench
        self.rng = np.random.default_rng([config.seed, list(Suite).index(suite)])
        function = bench.function if suite in _FIELD_SUITES else None
        self.report = SuiteReport(suite, config.seed, _environment(config, function))

    def record(
        self,
        check_id: str,
        inputs: dict[str, Any],
        measured: Any,
        bound: float | None,
        verdict: Verdict,
        **details: Any,
    ) -> CheckRecord:
        payload = {"suite": self.suite.value, "check": check_id, "seed": self.config.seed, **inputs}
        rec = CheckRecord(check_id, inputs_digest(payload), measured, bound, verdict, details)
        self.report.checks.append(rec)
        logger.debug("%s/%s: %s (measured %s)", self.suite.value, check_id, verdict.value, measured)
        return rec

    def bounded(
        self,
        check_id: str,
        inputs: dict[str, Any],
        measured: Any,
        bound: float | None,
        ok: bool,
        **details: Any,
    ) -> CheckRecord:
        verdict = Verdict.PASS if ok else Verdict.FAIL
        return self.record(check_id, inputs, measured, bound, verdict, **details)

    def score(self, check_id: str, inputs: dict[str, Any], measured: Any, **details: Any) -> CheckRecord:
        return self.record(check_id, inputs, measured, None, Verdict.SCORE_ONLY, **details)


# =============================================================================
# Shared grid work
# =============================================================================


def fixing_function(config: RunConfig) -> FunctionSpec:
    """The configured function if it fixes the origin, else default half_exp."""
    if config.function.fixes_origin:
        return config.function
    logger.warning(
        "%s does not fix the origin; field suites use %s",
        config.function.family.value,
        Family.HALF_EXP.value,
    )
    return FunctionSpec.create(Family.HALF_EXP)


def family_functions(config: RunConfig) -> list[FunctionSpec]:
    """One function per family; the configured function stands in for its own."""
    return [
        config.function if config.function.family is fam else FunctionSpec.create(fam)
        for fam in Family
    ]


class Workbench:
    """Grid fields shared between suites of one run, computed on first use."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config

    @cached_property
    def function(self) -> FunctionSpec:
        return fixing_function(self.config)

    @cached_property
    def r_f(self) -> float:
        return compute_Rf(get_profile(self.function), self.config.horizon, self.config.threshold)

    @cached_property
    def ra(self) -> ScalarField:
        c = self.config
        return ra_field(self.function, c.grid, c.tol, c.nmax, c.horizon, c.threshold, c.threads)

    @cached_property
    def escaping(self) -> np.ndarray:
        return self.ra.meta["escaping_mask"]

    @cached_property
    def oscillation(self) -> ScalarField:
        return oscillation_field(self.ra)

    @cached_property
    def fatou_proxy(self) -> np.ndarray:
        return fatou_proxy_mask(self.oscillation)

    @cached_property
    def radii(self) -> list[float]:
        """Ladder radii with ``M^n(R)`` escaping, i.e. ``R > R_f``."""
        p = get_profile(self.function)
        keep = [
            R for R in self.config.R_ladder if escape_test(p, R, self.config.horizon, self.config.threshold)
        ]
        dropped = sorted(set(self.config.R_ladder) - set(keep))
        if dropped:
            logger.warning("radii %s are not above R_f = %.12g and are skipped", dropped, self.r_f)
        return keep

    @cached_property
    def bitfields(self) -> list[BitField]:
        c = self.config
        if not self.radii:
            return []
        return classify_ladder(self.function, c.grid, self.radii, c.horizon, c.threshold, c.threads)

    @cached_property
    def holes(self) -> dict[float, Region | str]:
        """Fundamental hole per radius, or the error text that prevented it."""
        out: dict[float, Region | str] = {}
        for R, b in zip(self.radii, self.bitfields):
            try:
                out[R] = fundamental_hole(b)
            except GridError as e:
                out[R] = str(e)
        return out

    @cached_property
    def loops(self) -> dict[float, Contour | str]:
        out: dict[float, Contour | str] = {}
        for R, hole in self.holes.items():
            if isinstance(hole, str):
                out[R] = hole
                continue
            try:
                out[R] = extract_loop(hole, R)
            except GridError as e:
                out[R] = str(e)
        return out


# =============================================================================
# Helpers
# =============================================================================


def sample_points(rng: np.random.Generator, count: int, r_lo: float, r_hi: float) -> np.ndarray:
    """Modulus log-uniform on ``[r_lo, r_hi]``, argument uniform."""
    log_r = rng.uniform(math.log(r_lo), math.log(r_hi), size=count)
    theta = rng.uniform(-math.pi, math.pi, size=count)
    return np.exp(log_r) * np.exp(1j * theta)


def escaping_sample(
    rng: np.random.Generator,
    f: FunctionSpec,
    config: RunConfig,
    r_lo: float,
    r_hi: float,
    count: int,
) -> tuple[np.ndarray, int]:
    """``count`` sample points whose orbits escape, with the number drawn.

    Points are drawn in batches of ``count`` until enough escape or
    :data:`MAX_SAMPLE_ROUNDS` batches are used; the result may then be short.
    """
    kept: list[np.ndarray] = []
    found = drawn = 0
    for _ in range(MAX_SAMPLE_ROUNDS):
        batch = sample_points(rng, count, r_lo, r_hi)
        drawn += batch.size
        bundle = grid_engine.trace_orbits(f, batch, config.horizon, config.threshold)
        hits = batch[bundle.escaping][: count - found]
        kept.append(hits)
        found += hits.size
        if found == count:
            break
    else:
        logger.warning("only %d of %d sampled points escape for %s", found, count, f.family.value)
    return np.concatenate(kept), drawn


def sample_range(f: FunctionSpec, config: RunConfig) -> tuple[float, float]:
    hi = math.exp(SAMPLE_LOG_RADIUS_MAX)
    if not f.fixes_origin:
        return NON_FIXING_RADIUS_MIN, hi
    r_f = compute_Rf(get_profile(f), config.horizon, config.threshold)
    lo = max(r_f, 1e-2) * RF_MARGIN
    return lo, max(hi, 20.0 * lo)


def log_error(x: SignedLog, y: SignedLog) -> float:
    """Relative difference of two log-scale values, absolute below 1.

    Beyond float range the comparison is taken one logarithm down.
    """
    if isinstance(x, ExtReal) or isinstance(y, ExtReal):
        lx, ly = signed_log(x), signed_log(y)
        if isinstance(lx, ExtReal) or isinstance(ly, ExtReal):
            return signed_rel_diff(lx, ly)
        x, y = lx, ly
    if x == y:
        return 0.0
    return abs(x - y) / max(1.0, abs(x), abs(y))


def entry_log_error(value: float, regime: int, T: SignedLog) -> float:
    """:func:`log_error` between a stored orbit entry and a ladder value."""
    if regime == grid_engine.REGIME_LIFTED:
        lT = signed_log(T)
        if isinstance(lT, ExtReal):
            return 1.0
        return log_error(value, lT)
    if isinstance(T, ExtReal):
        return 1.0
    return log_error(value, T)


def entry_ratio(value: float, regime: int, T: SignedLog) -> float:
    """``log|f^n(z)| / log M^n(R_A(z))`` from a stored orbit entry."""
    if regime == grid_engine.REGIME_LIFTED:
        lT = signed_log(T)
        if isinstance(lT, ExtReal):
            return 0.0
        d = value - lT
        return math.inf if d > 700.0 else math.exp(d)
    if isinstance(T, ExtReal):
        return 0.0
    return value / T


def _rates(f: FunctionSpec, points: np.ndarray, config: RunConfig) -> tuple[grid_engine.OrbitBundle, grid_engine.EscapeRates]:
    bundle = grid_engine.trace_orbits(f, points, config.horizon, config.threshold)
    r_f = compute_Rf(get_profile(f), config.horizon, config.threshold)
    return bundle, grid_engine.escape_rates(f, bundle, config.tol, config.nmax, r_f)


def _ladder_inputs(ts: np.ndarray) -> list[float]:
    return [float(ts[0]), float(ts[-1]), int(ts.size)]


def _phi_values(f: FunctionSpec, ts: np.ndarray) -> np.ndarray:
    return np.array([signed_to_float(f.phi(float(t))) for t in ts])


def _holding_tail(ok: np.ndarray) -> int | None:
    """Index where the trailing run of True starts, None if the last entry fails."""
    if ok.size == 0 or not ok[-1]:
        return None
    failing = np.flatnonzero(~ok)
    return int(failing[-1]) + 1 if failing.size else 0


# =============================================================================
# Maximum modulus suites
# =============================================================================


def check_maxmod_convexity(ctx: SuiteContext) -> None:
    """``phi`` convex and increasing; iterates monotone; inverse round trip."""
    for f in family_functions(ctx.config):
        fam = f.family.value
        p = get_profile(f)
        ts = CONVEXITY_LADDER
        inputs = {"function": f.to_dict(), "t": _ladder_inputs(ts)}
        phi = _phi_values(f, ts)
        second = (phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) / np.maximum(1.0, np.abs(phi[1:-1]))
        worst = float(second.min())
        ctx.bounded(f"{fam}.phi_convex", inputs, worst, -CHECK_SLACK, worst >= -CHECK_SLACK)
        step = float(np.diff(phi).min())
        ctx.bounded(f"{fam}.phi_increasing", inputs, step, 0.0, step > 0.0)

        bad = 0
        for n in range(1, MAX_ITERATE + 1):
            values = [iterate_logM(p, float(t), n) for t in ITERATE_LADDER]
            bad += sum(1 for a, b in zip(values, values[1:]) if signed_cmp(b, a) < 0)
        ctx.bounded(
            f"{fam}.iterates_monotone",
            {"function": f.to_dict(), "t": _ladder_inputs(ITERATE_LADDER), "n_max": MAX_ITERATE},
            bad,
            0.0,
            bad == 0,
        )

        errors = []
        for t in ROUNDTRIP_POINTS:
            for n in range(1, MAX_ITERATE + 1):
                back = inverse_logM_n(p, iterate_logM(p, t, n), n)
                errors.append(log_error(back, t))
        worst_rt = max(errors)
        ctx.bounded(
            f"{fam}.inverse_roundtrip",
            {"function": f.to_dict(), "t": list(ROUNDTRIP_POINTS), "n_max": MAX_ITERATE},
            worst_rt,
            CHECK_SLACK,
            worst_rt <= CHECK_SLACK,
        )


def check_maxmod_growth(ctx: SuiteContext) -> None:
    """``log M(r) / log r`` strictly increasing along a ladder of ``t = log r``."""
    ts = GROWTH_LADDER
    for f in family_functions(ctx.config):
        fam = f.family.value
        ratio = _phi_values(f, ts) / ts
        step = float(np.diff(ratio).min())
        ctx.bounded(
            f"{fam}.ratio_increasing",
            {"function": f.to_dict(), "t": _ladder_inputs(ts)},
            step,
            0.0,
            step > 0.0,
            final_ratio=float(ratio[-1]),
        )


def check_hadamard(ctx: SuiteContext) -> None:
    """Scaling inequalities of ``phi`` and of the inverse ``psi``."""
    ts = HADAMARD_LADDER
    for f in family_functions(ctx.config):
        fam = f.family.value
        p = get_profile(f)
        phi = _phi_values(f, ts)
        for c in HADAMARD_UP + HADAMARD_DOWN:
            scaled = _phi_values(f, c * ts)
            if c > 1:
                gap = scaled - c * phi
            else:
                gap = c * phi - scaled
            rel = gap / np.maximum(1.0, np.abs(c * phi))
            ok = rel >= -CHECK_SLACK
            start = _holding_tail(ok)
            holds = start is not None and start <= ts.size // 2
            tail = rel[start:] if start is not None else rel
            ctx.bounded(
                f"{fam}.scaling_c={c:g}",
                {"function": f.to_dict(), "t": _ladder_inputs(ts), "c": c},
                float(tail.min()),
                -CHECK_SLACK,
                holds,
                first_holding_r=None if start is None else math.exp(float(ts[start])),
            )

        worst = math.inf
        for s in INVERSE_SCALING_POINTS:
            for c in HADAMARD_UP:
                lhs = signed_to_float(p.inverse(c * s))
                rhs = c * signed_to_float(p.inverse(s))
                worst = min(worst, (rhs - lhs) / max(1.0, abs(rhs)))
        ctx.bounded(
            f"{fam}.inverse_scaling",
            {"function": f.to_dict(), "s": list(INVERSE_SCALING_POINTS), "c": list(HADAMARD_UP)},
            worst,
            -CHECK_SLACK,
            worst >= -CHECK_SLACK,
        )

        worst_curv = -math.inf
        for n in range(1, MAX_ITERATE + 1):
            psi = np.array([signed_to_float(inverse_logM_n(p, float(s), n)) for s in CONCAVITY_LADDER])
            second = (psi[:-2] - 2.0 * psi[1:-1] + psi[2:]) / np.maximum(1.0, np.abs(psi[1:-1]))
            worst_curv = max(worst_curv, float(second.max()))
        ctx.bounded(
            f"{fam}.inverse_concave",
            {"function": f.to_dict(), "s": _ladder_inputs(CONCAVITY_LADDER), "n_max": MAX_ITERATE},
            worst_curv,
            CHECK_SLACK,
            worst_curv <= CHECK_SLACK,
        )


# =============================================================================
# Escape-rate suites
# =============================================================================


def monotone_violations(f: FunctionSpec, points: np.ndarray, config: RunConfig) -> dict[str, Any]:
    """Increases of ``log M^{-n}(|f^n(z)|)`` in ``n`` over escaping orbits.

    Entries after an exact one are compared with tolerance 1e-9, others
    with the relaxed tolerance 1e-3. A pullback below the range floor ends
    the sequence of that point.
    """
    bundle = grid_engine.trace_orbits(f, points, config.horizon, config.threshold)
    cells = np.flatnonzero(bundle.escaping)
    summary = {"points": int(points.size), "escaping": int(cells.size), "compared": 0,
               "violations": 0, "truncated": 0, "worst": 0.0}
    if cells.size == 0:
        return summary
    last = np.minimum(bundle.last[cells], config.nmax)
    prev = grid_engine.pullback(f, bundle, np.zeros(cells.size, dtype=np.int64), cells)
    alive = np.isfinite(prev)
    with np.errstate(invalid="ignore"):
        for n in range(1, int(last.max()) + 1):
            sel = np.flatnonzero(alive & (last >= n))
            if sel.size == 0:
                break
            cur = grid_engine.pullback(f, bundle, np.full(sel.size, n, dtype=np.int64), cells[sel])
            hit = np.isnan(cur)
            summary["truncated"] += int(hit.sum())
            alive[sel[hit]] = False
            keep = ~hit
            before = prev[sel][keep]
            after = cur[keep]
            exact = bundle.regime[n, cells[sel][keep]] == grid_engine.REGIME_EXACT
            tol = np.where(exact, grid_engine.EXACT_COMPARE_TOL, grid_engine.FLAGGED_COMPARE_TOL)
            finite = np.isfinite(before) & np.isfinite(after)
            excess = np.where(finite, (after - before) / np.maximum(1.0, np.abs(before)), -np.inf)
            summary["compared"] += int(finite.sum())
            summary["violations"] += int((excess > tol).sum())
            if excess.size:
                summary["worst"] = max(summary["worst"], float(excess.max()))
            prev[sel[keep]] = after
            alive[sel[keep]] &= np.isfinite(after)
    return summary


def check_ra_monotone(ctx: SuiteContext) -> None:
    """The ``R_A`` sequence is non-increasing on every family."""
    config = ctx.config
    for f in family_functions(config):
        fam = f.family.value
        lo, hi = sample_range(f, config)
        points, drawn = escaping_sample(ctx.rng, f, config, lo, hi, config.samples)
        result = monotone_violations(f, points, config)
        ctx.bounded(
            f"{fam}.non_increasing",
            {"function": f.to_dict(), "radius": [lo, hi], "samples": config.samples},
            result["violations"],
            0.0,
            result["violations"] == 0 and result["escaping"] == config.samples,
            drawn=drawn,
            **result,
        )

    pure = FunctionSpec.create(Family.PURE_EXP)
    seq = ra_sequence(pure, PURE_EXP_FLOOR_POINT, config.nmax, config.horizon)
    ok = seq.truncated is TruncationReason.DOMAIN_FLOOR and seq.truncated_at == 2
    ctx.bounded(
        "pure_exp.floor_truncation",
        {"function": pure.to_dict(), "point": [PURE_EXP_FLOOR_POINT.real, PURE_EXP_FLOOR_POINT.imag]},
        seq.truncated_at,
        2.0,
        ok,
        reason=None if seq.truncated is None else seq.truncated.value,
    )


def check_ra_conjugacy(ctx: SuiteContext) -> None:
    """``log R_A(f(z)) = phi(log R_A(z))``, and the same for ``f^2``."""
    config = ctx.config
    f = ctx.bench.function
    count = max(1, config.samples // 10)
    lo, hi = sample_range(f, config)
    points = sample_points(ctx.rng, count, lo, hi)
    _, rates = _rates(f, points, config)
    good = (rates.status == grid_engine.STATUS_VALUE) & (rates.escape_class == grid_engine.CLASS_ESCAPING)

    images: list[complex] = []
    seconds: list[complex | None] = []
    sources: list[int] = []
    for k in np.flatnonzero(good):
        try:
            w = evaluate(f, ComplexPoint.from_complex(complex(points[k])))
        except RangeOverflowError:
            continue
        try:
            w2: complex | None = evaluate(f, w).to_complex()
        except RangeOverflowError:
            w2 = None
        images.append(w.to_complex())
        seconds.append(w2)
        sources.append(int(k))

    inputs = {"function": f.to_dict(), "radius": [lo, hi], "samples": count}
    if not sources:
        ctx.bounded("one_step", inputs, math.nan, CONJUGACY_TOL, False, tested=0)
        return

    _, img_rates = _rates(f, np.array(images), config)
    one_step: list[float] = []
    for j, k in enumerate(sources):
        if img_rates.status[j] != grid_engine.STATUS_VALUE:
            continue
        lhs = f.phi(float(rates.log_value[k]))
        one_step.append(log_error(lhs, float(img_rates.log_value[j])))
    worst = max(one_step, default=math.nan)
    ctx.bounded(
        "one_step",
        inputs,
        worst,
        CONJUGACY_TOL,
        bool(one_step) and worst <= CONJUGACY_TOL,
        tested=len(one_step),
        skipped=count - len(one_step),
    )

    pairs = [(k, w2) for k, w2 in zip(sources, seconds) if w2 is not None]
    two_step: list[float] = []
    if pairs:
        _, sec_rates = _rates(f, np.array([w2 for _, w2 in pairs]), config)
        for j, (k, _) in enumerate(pairs):
            if sec_rates.status[j] != grid_engine.STATUS_VALUE:
                continue
            lhs = f.phi(f.phi(float(rates.log_value[k])))
            two_step.append(log_error(lhs, float(sec_rates.log_value[j])))
    worst2 = max(two_step, default=math.nan)
    ctx.bounded(
        "two_step",
        inputs,
        worst2,
        CONJUGACY_TOL,
        bool(two_step) and worst2 <= CONJUGACY_TOL,
        tested=len(two_step),
        skipped=count - len(two_step),
    )


def check_ra_union(ctx: SuiteContext) -> None:
    """Escaping points lie in ``A_R`` just below ``R_A``; bounded ones in none."""
    config = ctx.config
    f = ctx.bench.function
    r_f = ctx.bench.r_f
    count = max(1, config.samples // 10)
    lo, hi = sample_range(f, config)
    points = sample_points(ctx.rng, count, lo, hi)
    bundle, rates = _rates(f, points, config)

    tested = skipped = outside = 0
    for k in np.flatnonzero(rates.status == grid_engine.STATUS_VALUE):
        if rates.escape_class[k] != grid_engine.CLASS_ESCAPING:
            continue
        R = float(rates.value[k]) * (1.0 - UNION_SHRINK)
        if R <= r_f * (1.0 + UNION_SHRINK):
            skipped += 1
            continue
        try:
            result = in_AR(f, complex(points[k]), R, config.horizon, config.threshold)
        except ContractError:
            skipped += 1
            continue
        tested += 1
        outside += result.verdict is Membership.OUT
    ctx.bounded(
        "escaping_inside",
        {"function": f.to_dict(), "radius": [lo, hi], "samples": count, "shrink": UNION_SHRINK},
        outside,
        0.0,
        tested > 0 and outside == 0,
        tested=tested,
        skipped=skipped,
    )

    if r_f <= 0:
        ctx.score("bounded_outside", {"function": f.to_dict()}, None, note="R_f = 0: no bounded disc")
        return
    R = r_f * UNION_BOUNDED_RADIUS
    inner = sample_points(ctx.rng, count, r_f * 1e-3, r_f * BOUNDED_DISC_FRACTION)
    bounded = np.concatenate([inner, points[bundle.bounded]])
    misses = 0
    for z in bounded:
        if in_AR(f, complex(z), R, config.horizon, config.threshold).verdict is not Membership.OUT:
            misses += 1
    ctx.bounded(
        "bounded_outside",
        {"function": f.to_dict(), "R": R, "samples": count},
        misses,
        0.0,
        misses == 0,
        tested=int(bounded.size),
    )


def check_ra_floor(ctx: SuiteContext) -> None:
    """The extended ``R_A`` never drops below ``R_f`` and equals it off ``A(f)``."""
    ra = ctx.bench.ra
    r_f = ctx.bench.r_f
    inputs = {"function": ctx.bench.function.to_dict(), "grid": ra.grid.to_dict()}
    bounded = ra.meta["bounded_mask"]
    values = ra.values[ra.defined]
    lowest = float(values.min()) if values.size else math.nan
    ctx.bounded(
        "no_value_below_Rf",
        inputs,
        lowest,
        r_f * (1.0 - CHECK_SLACK),
        values.size > 0 and lowest >= r_f * (1.0 - CHECK_SLACK),
        R_f=r_f,
        missing=ra.missing_count,
    )
    off = ra.values[bounded]
    mismatched = int(np.count_nonzero(off != r_f))
    ctx.bounded("bounded_equals_Rf", inputs, mismatched, 0.0, mismatched == 0, cells=int(off.size))
    if off.size:
        ctx.bounded(
            "minimum_attained", inputs, lowest, r_f, abs(lowest - r_f) <= CHECK_SLACK * r_f
        )
    else:
        ctx.score("minimum_attained", inputs, lowest, note="no bounded cells in the window")


def check_ra_usc(ctx: SuiteContext) -> None:
    ra = ctx.bench.ra
    result = usc_violations(ra, among=ctx.bench.escaping)
    inputs = {"function": ctx.bench.function.to_dict(), "grid": ra.grid.to_dict()}
    if result["tested"] == 0:
        ctx.score("upper_semicontinuous", inputs, None, note="no interior escaping cells", **result)
        return
    ctx.bounded(
        "upper_semicontinuous",
        inputs,
        result["fraction"],
        VIOLATION_BUDGET,
        result["fraction"] <= VIOLATION_BUDGET,
        **result,
    )


def _submean_record(ctx: SuiteContext, check_id: str, v: ScalarField, mask: np.ndarray, inputs: dict[str, Any]) -> None:
    result = submean_violations(v, mask)
    if result["tested"] == 0:
        ctx.score(check_id, inputs, None, note="no Fatou-proxy cells to test", **result)
        return
    ctx.bounded(
        check_id, inputs, result["fraction"], VIOLATION_BUDGET,
        result["fraction"] <= VIOLATION_BUDGET, **result,
    )


def check_ra_submean(ctx: SuiteContext) -> None:
    """Sub-mean-value property of ``-log R_A`` and of the ``v_n`` ladder."""
    bench = ctx.bench
    config = ctx.config
    ra = bench.ra
    with np.errstate(divide="ignore", invalid="ignore"):
        v = ScalarField(ra.grid, np.where(ra.values > 0, -np.log(ra.values), np.nan), "v")
    mask = fatou_proxy_mask(bench.oscillation, among=bench.escaping)
    inputs = {"function": bench.function.to_dict(), "grid": ra.grid.to_dict()}
    _submean_record(ctx, "minus_log_RA", v, mask, inputs)

    fields = vn_fields(
        bench.function, config.grid, list(SUBMEAN_LADDER), config.horizon, config.threshold, config.threads
    )
    for vn in fields:
        n = vn.meta["n"]
        proxy = fatou_proxy_mask(oscillation_field(vn, log_scale=False))
        _submean_record(ctx, f"v_{n}", vn, proxy, {**inputs, "n": n})


def check_ratio_limit(ctx: SuiteContext) -> None:
    """``log|f^n(z)| / log M^n(R_A(z))`` tends to 1."""
    config = ctx.config
    f = ctx.bench.function
    p = get_profile(f)
    r_f = ctx.bench.r_f

    lo = max(r_f, 1e-2) * RF_MARGIN
    hi = max(AXIS_MAX, 2.0 * lo)
    xs = np.linspace(lo, hi, AXIS_POINTS)
    bundle, rates = _rates(f, xs.astype(np.complex128), config)
    valid = rates.status == grid_engine.STATUS_VALUE
    identity = np.abs(rates.value - xs) / xs
    worst_id = float(np.max(identity[valid])) if valid.any() else math.nan
    inputs = {"function": f.to_dict(), "x": [lo, hi, AXIS_POINTS]}
    ctx.bounded(
        "positive_axis_identity",
        inputs,
        worst_id,
        CHECK_SLACK,
        bool(valid.all()) and worst_id <= CHECK_SLACK,
        undefined=int((~valid).sum()),
    )

    worst = 0.0
    compared = 0
    for k in np.flatnonzero(valid):
        values, regimes = bundle.column(int(k))
        ladder = logM_ladder(p, float(rates.log_value[k]), values.size - 1)
        for n in range(values.size):
            if regimes[n] == grid_engine.REGIME_BEYOND or _below_one(ladder[n]):
                continue
            worst = max(worst, entry_log_error(float(values[n]), int(regimes[n]), ladder[n]))
            compared += 1
    ctx.bounded(
        "positive_axis_ratio",
        inputs,
        worst,
        CHECK_SLACK,
        compared > 0 and worst <= CHECK_SLACK,
        compared=compared,
    )

    count = max(1, config.samples // 10)
    lo_s, hi_s = sample_range(f, config)
    points = sample_points(ctx.rng, count, lo_s, hi_s)
    bundle, rates = _rates(f, points, config)
    ratios = []
    for k in np.flatnonzero((rates.status == grid_engine.STATUS_VALUE) & bundle.escaping):
        values, regimes = bundle.column(int(k))
        ladder = logM_ladder(p, float(rates.log_value[k]), values.size - 1)
        usable = [
            n for n in range(values.size)
            if regimes[n] == grid_engine.REGIME_EXACT and not _below_one(ladder[n])
        ]
        if usable:
            n = usable[-1]
            ratios.append(entry_ratio(float(values[n]), int(regimes[n]), ladder[n]))
    within = [abs(r - 1.0) <= RATIO_BAND for r in ratios]
    fraction = float(np.mean(within)) if within else math.nan
    ctx.score(
        "off_axis_ratio",
        {"function": f.to_dict(), "radius": [lo_s, hi_s], "samples": count, "band": RATIO_BAND},
        fraction,
        tested=len(ratios),
        median_ratio=float(np.median(ratios)) if ratios else math.nan,
    )


def _below_one(T: SignedLog) -> bool:
    return not isinstance(T, ExtReal) and abs(T) < 1.0


# =============================================================================
# Loop suites
# =============================================================================


def check_loops_nesting(ctx: SuiteContext) -> None:
    """Holes and loops grow with ``R``."""
    bench = ctx.bench
    base = {"function": bench.function.to_dict(), "grid": ctx.config.grid.to_dict()}
    radii = bench.radii
    if len(radii) < 2:
        ctx.score("ladder", {**base, "R": radii}, len(radii), note="fewer than two radii above R_f")
        return
    for R1, R2 in zip(radii, radii[1:]):
        inputs = {**base, "R": [R1, R2]}
        h1, h2 = bench.holes[R1], bench.holes[R2]
        if isinstance(h1, str) or isinstance(h2, str):
            ctx.score(f"holes[{R1:g}<{R2:g}]", inputs, None, error=h1 if isinstance(h1, str) else h2)
        else:
            ok = h2.contains(h1) and h2.cell_count > h1.cell_count
            ctx.bounded(
                f"holes[{R1:g}<{R2:g}]",
                inputs,
                h2.cell_count - h1.cell_count,
                0.0,
                ok,
                cells=[h1.cell_count, h2.cell_count],
                contained=h2.contains(h1),
            )
        l1, l2 = bench.loops[R1], bench.loops[R2]
        if isinstance(l1, str) or isinstance(l2, str):
            ctx.score(f"loops[{R1:g}<{R2:g}]", inputs, None, error=l1 if isinstance(l1, str) else l2)
            continue
        nested = contains_contour(l2, l1)
        a1, a2 = l1.enclosed_area(), l2.enclosed_area()
        ctx.bounded(
            f"loops[{R1:g}<{R2:g}]",
            inputs,
            a2 - a1,
            0.0,
            nested and a2 > a1,
            nested=nested,
            inside=float(np.mean(l2.surrounds(l1.as_array()[:-1]))),
            areas=[a1, a2],
        )


def check_loops_level(ctx: SuiteContext) -> None:
    """Stability of ``R_A`` (and ``h``) along each loop, plus a synthetic control."""
    bench = ctx.bench
    config = ctx.config
    g = config.grid
    centre = g.center.to_complex()
    rho = 0.25 * min(g.width, g.height)
    radius = ScalarField(g, np.abs(g.centers() - centre), "|z-c|")
    circle = level_contour(ScalarField(g, -radius.values, "-|z-c|"), -rho)
    stats = loop_level_stats(circle, radius)
    spacing = cell_gradient(radius)
    offset = abs(stats["mean"] - rho)
    ctx.bounded(
        "synthetic_circle",
        {"grid": g.to_dict(), "rho": rho},
        stats["stddev"],
        spacing,
        stats["stddev"] <= spacing and offset <= min(g.dx, g.dy),
        mean_offset=offset,
        **stats,
    )

    base = {"function": bench.function.to_dict(), "grid": g.to_dict()}
    fields: list[tuple[str, ScalarField]] = [("R_A", bench.ra)]
    if config.z0 is not None:
        try:
            fields.append(
                ("h", h_field(bench.function, g, config.z0, config.h_n, config.horizon,
                              config.threshold, threads=config.threads))
            )
        except ContractError as e:
            ctx.score("h_field", {**base, "z0": [config.z0.re, config.z0.im]}, None, error=str(e))

    for R, loop in bench.loops.items():
        for name, s in fields:
            inputs = {**base, "R": R, "field": name}
            if isinstance(loop, str):
                ctx.score(f"{name}_along_loop[{R:g}]", inputs, None, error=loop)
                continue
            try:
                stats = loop_level_stats(loop, s)
            except GridError as e:
                ctx.score(f"{name}_along_loop[{R:g}]", inputs, None, error=str(e))
                continue
            gradient = cell_gradient(s)
            measured = stats["stddev"] / gradient if gradient > 0 else math.nan
            ctx.score(f"{name}_along_loop[{R:g}]", inputs, measured, cell_gradient=gradient, **stats)


def check_loops_dichotomy(ctx: SuiteContext) -> None:
    """Each loop should lie on one side of the oscillation threshold."""
    bench = ctx.bench
    g = ctx.config.grid
    proxy = bench.fatou_proxy
    for R, loop in bench.loops.items():
        inputs = {"function": bench.function.to_dict(), "grid": g.to_dict(), "R": R}
        if isinstance(loop, str):
            ctx.score(f"loop[{R:g}]", inputs, None, error=loop)
            continue
        cells = [g.cell_of(z) for z in loop.as_array()[:-1]]
        sides = [bool(proxy[c]) for c in cells if c is not None]
        fraction = float(np.mean(sides)) if sides else math.nan
        ctx.score(
            f"loop[{R:g}]",
            inputs,
            max(fraction, 1.0 - fraction) if sides else math.nan,
            fatou_fraction=fraction,
            vertices=len(sides),
        )


# =============================================================================
# Blaschke suite
# =============================================================================


def _mu_majorant(r0: float, lam: float, steps: int) -> list[float]:
    values = [r0]
    r = r0
    for _ in range(steps):
        r = mu(r, lam) if r > 0 else 0.0
        values.append(r)
    return values


def check_blaschke_all(ctx: SuiteContext) -> None:
    """Schwarz-type bounds and the contraction of composed Blaschke products."""
    rng = ctx.rng
    config = ctx.config

    worst_bc = math.inf
    worst_sp = -math.inf
    at_zero = 0.0
    for _ in range(config.samples):
        b = random_blaschke(rng, lam=float(rng.uniform(0.0, 0.99)))
        at_zero = max(at_zero, abs(complex(b(0j))))
        z = random_disc_points(rng, POINTS_PER_PRODUCT)
        gap = beardon_carne_bound(z, derivative_at_zero(b)) - np.abs(b(z))
        worst_bc = min(worst_bc, float(gap.min()))

        w = random_disc_points(rng, PAIRS_PER_PRODUCT, 0.99)
        u = random_disc_points(rng, PAIRS_PER_PRODUCT, 0.99)
        before = _disc_distance(w, u)
        after = _disc_distance(b(w), b(u))
        worst_sp = max(worst_sp, float(((after - before) / np.maximum(1.0, before)).max()))

    ctx.bounded("fixes_origin", {"products": config.samples}, at_zero, 0.0, at_zero == 0.0)
    ctx.bounded(
        "beardon_carne",
        {"products": config.samples, "points": POINTS_PER_PRODUCT},
        worst_bc,
        -CHECK_SLACK,
        worst_bc >= -CHECK_SLACK,
    )
    ctx.bounded(
        "schwarz_pick",
        {"products": config.samples, "pairs": PAIRS_PER_PRODUCT},
        worst_sp,
        CHECK_SLACK,
        worst_sp <= CHECK_SLACK,
    )

    lambdas = sorted(set(BLASCHKE_LAMBDAS) | {config.blaschke_lambda})
    for lam in lambdas:
        seq = [random_blaschke(rng, lam=lam) for _ in range(COMPOSE_LENGTH)]
        bound = _mu_majorant(COMPOSE_START, lam, COMPOSE_LENGTH)
        excess = -math.inf
        starts = COMPOSE_START * np.exp(1j * rng.uniform(-math.pi, math.pi, size=COMPOSE_STARTS))
        finals = []
        for z in starts:
            orbit = compose_orbit(seq, complex(z), lam)
            excess = max(excess, max(p.modulus - r for p, r in zip(orbit, bound)))
            finals.append(orbit[-1])
        inputs = {"lambda": lam, "length": COMPOSE_LENGTH, "start": COMPOSE_START}
        ctx.bounded(f"mu_dominance[{lam:g}]", inputs, excess, MAJORANT_SLACK, excess <= MAJORANT_SLACK)

        distance = max(hyperbolic_distance_disc(a, b) for a, b in zip(finals, finals[1:]))
        limit = min(CONVERGENCE_LIMIT, 4.0 * math.atanh(bound[-1]) + MAJORANT_SLACK)
        ctx.bounded(
            f"hyperbolic_convergence[{lam:g}]",
            inputs,
            distance,
            limit,
            distance <= limit,
            mu_final=bound[-1],
        )

    try:
        compose_orbit([BlaschkeSpec(1 + 0j, 1, ((0.95 + 0j, 1),))], 0.5 + 0j, 0.5)
        raised = False
    except ContractError:
        raised = True
    ctx.bounded("contract_enforced", {"derivative": 0.95, "lambda": 0.5}, raised, None, raised)

    for lam in MU_ORBIT_LAMBDAS:
        values = mu_orbit(MU_ORBIT_START, lam)
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        ctx.bounded(
            f"mu_orbit[{lam:g}]",
            {"lambda": lam, "start": MU_ORBIT_START},
            len(values) - 1,
            None,
            decreasing,
            final=values[-1],
        )


def _disc_distance(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctanh(np.abs((w - z) / (1.0 - np.conj(w) * z)))


# =============================================================================
# Runner
# =============================================================================

_SUITES: dict[Suite, Callable[[SuiteContext], None]] = {
    Suite.MAXMOD_CONVEXITY: check_maxmod_convexity,
    Suite.MAXMOD_GROWTH: check_maxmod_growth,
    Suite.HADAMARD: check_hadamard,
    Suite.RA_MONOTONE: check_ra_monotone,
    Suite.RA_CONJUGACY: check_ra_conjugacy,
    Suite.RA_UNION: check_ra_union,
    Suite.RA_FLOOR: check_ra_floor,
    Suite.RA_USC: check_ra_usc,
    Suite.RA_SUBMEAN: check_ra_submean,
    Suite.RATIO_LIMIT: check_ratio_limit,
    Suite.LOOPS_NESTING: check_loops_nesting,
    Suite.LOOPS_LEVEL: check_loops_level,
    Suite.LOOPS_DICHOTOMY: check_loops_dichotomy,
    Suite.BLASCHKE_ALL: check_blaschke_all,
}

# suites that run on the single fixing function rather than on every family
_FIELD_SUITES = frozenset(
    {
        Suite.RA_CONJUGACY,
        Suite.RA_UNION,
        Suite.RA_FLOOR,
        Suite.RA_USC,
        Suite.RA_SUBMEAN,
        Suite.RATIO_LIMIT,
        Suite.LOOPS_NESTING,
        Suite.LOOPS_LEVEL,
        Suite.LOOPS_DICHOTOMY,
    }
)


def _as_suite(name: Suite | str) -> Suite:
    if isinstance(name, Suite):
        return name
    try:
        return Suite.from_string(name)
    except ValueError as e:
        raise UnknownSuiteError(str(name), [s.value for s in Suite]) from e


def run_suite(name: Suite | str, config: RunConfig, bench: Workbench | None = None) -> SuiteReport:
    """Run one suite.

    Args:
        name: Suite or its registered name
        config: Run configuration (seed, grid, horizons, sample count)
        bench: Shared field cache; a fresh one is made when omitted

    Raises:
        UnknownSuiteError: If the name is not registered
    """
    suite = _as_suite(name)
    bench = bench if bench is not None else Workbench(config)
    ctx = SuiteContext(suite, config, bench)
    logger.debug("running suite %s", suite.value)
    try:
        _SUITES[suite](ctx)
    except FastWebError as e:
        # a failing engine call is a failed check, not a crashed run
        logger.error("suite %s aborted: %s", suite.value, e)
        ctx.record("aborted", {}, None, None, Verdict.FAIL, error=str(e))
    report = ctx.report
    logger.info(
        "suite %s: %d pass, %d fail, %d score-only",
        suite.value,
        report.count(Verdict.PASS),
        report.count(Verdict.FAIL),
        report.count(Verdict.SCORE_ONLY),
    )
    return report


def run_suites(config: RunConfig) -> list[SuiteReport]:
    """Run the configured suites in registry order, sharing one workbench."""
    bench = Workbench(config)
    order = [s for s in Suite if s in set(config.suites)]
    return [run_suite(suite, config, bench) for suite in order]


def any_failed(reports: list[SuiteReport]) -> bool:
    return any(r.failed for r in reports)


def build_report(config: RunConfig, reports: list[SuiteReport]) -> dict[str, Any]:
    """JSON-ready report; contains no timings and no runtime-only settings."""
    totals = {v.value: sum(r.count(v) for r in reports) for v in Verdict}
    return {
        "version": REPORT_VERSION,
        "seed": config.seed,
        "config": config.to_dict(),
        "suites": [r.to_dict() for r in reports],
        "summary": {**totals, "failed": any_failed(reports)},
    }


def summarize(reports: list[SuiteReport]) -> str:
    """Plain-text table of verdict counts with the failing check ids."""
    width = max((len(r.suite.value) for r in reports), default=5)
    lines = [f"{'suite':<{width}}  pass  fail  score-only"]
    for r in reports:
        lines.append(
            f"{r.suite.value:<{width}}  {r.count(Verdict.PASS):>4}  {r.count(Verdict.FAIL):>4}  "
            f"{r.count(Verdict.SCORE_ONLY):>10}"
        )
        for c in r.failures():
            lines.append(f"  FAIL {c.id}: measured {c.measured}, bound {c.bound}")
    lines.append("FAILED" if any_failed(reports) else "OK")
    return "\n".join(lines)


__all__ = [
    "CheckRecord",
    "SuiteContext",
    "SuiteReport",
    "Workbench",
    "any_failed",
    "build_report",
    "escaping_sample",
    "family_functions",
    "fixing_function",
    "inputs_digest",
    "log_error",
    "monotone_violations",
    "run_suite",
    "run_suites",
    "sample_points",
    "summarize",
]
