"""Finite Blaschke products and contraction on the unit disc.

Products are normalised to fix the origin. A map with an interior fixed
point ``alpha`` is brought to this form by conjugating with the disc
automorphism returned by :func:`conjugate_to_origin`.

The hyperbolic metric has density ``2 / (1 - |z|^2)``.
"""

from __future__ import annotations

import cmath
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from fastweb.exceptions import ContractError, DomainError, InvalidParameterError

logger = logging.getLogger(__name__)

ROTATION_TOL = 1e-12
MU_STOP = 1e-6
MU_MAX_STEPS = 100_000


@dataclass(frozen=True)
class DiscPoint:
    """Point of the open unit disc."""

    value: complex

    def __post_init__(self) -> None:
        v = complex(self.value)
        if not (cmath.isfinite(v) and abs(v) < 1.0):
            raise DomainError("disc point must satisfy |z| < 1", value=v)
        object.__setattr__(self, "value", v)

    @property
    def modulus(self) -> float:
        return abs(self.value)


def _as_value(z: DiscPoint | complex) -> complex:
    return z.value if isinstance(z, DiscPoint) else DiscPoint(complex(z)).value


@dataclass(frozen=True)
class BlaschkeSpec:
    """``B(z) = c z^q prod_k ((z - a_k) / (1 - conj(a_k) z))^{m_k}``.

    ``zeros`` holds ``(a_k, m_k)`` pairs with distinct ``a_k``,
    ``0 < |a_k| < 1`` and ``m_k >= 1``.
    """

    rotation: complex = 1 + 0j
    power_at_zero: int = 1
    zeros: tuple[tuple[complex, int], ...] = ()

    def __post_init__(self) -> None:
        rotation = complex(self.rotation)
        if abs(abs(rotation) - 1.0) > ROTATION_TOL:
            raise InvalidParameterError("rotation", rotation, "must have modulus 1")
        if isinstance(self.power_at_zero, bool) or int(self.power_at_zero) != self.power_at_zero:
            raise InvalidParameterError("power_at_zero", self.power_at_zero, "must be an integer")
        if self.power_at_zero < 1:
            raise InvalidParameterError("power_at_zero", self.power_at_zero, "must be at least 1")
        zeros = tuple((complex(a), int(m)) for a, m in self.zeros)
        for a, m in zeros:
            if not 0.0 < abs(a) < 1.0:
                raise InvalidParameterError("zeros", a, "zeros must satisfy 0 < |a| < 1")
            if m < 1:
                raise InvalidParameterError("zeros", m, "multiplicities must be at least 1")
        if len({a for a, _ in zeros}) != len(zeros):
            raise InvalidParameterError("zeros", self.zeros, "zeros must be pairwise distinct")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "power_at_zero", int(self.power_at_zero))
        object.__setattr__(self, "zeros", zeros)

    @classmethod
    def power(cls, q: int) -> BlaschkeSpec:
        """``z ↦ z^q``."""
        return cls(1 + 0j, q, ())

    @property
    def degree(self) -> int:
        return self.power_at_zero + sum(m for _, m in self.zeros)

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        """Evaluate on a complex scalar or array (no disc check)."""
        out = self.rotation * z**self.power_at_zero
        for a, m in self.zeros:
            out = out * ((z - a) / (1.0 - a.conjugate() * z)) ** m
        return out

    def to_dict(self) -> dict[str, object]:
        return {
            "rotation": [self.rotation.real, self.rotation.imag],
            "power_at_zero": self.power_at_zero,
            "zeros": [[a.real, a.imag, m] for a, m in self.zeros],
        }


def eval_blaschke(b: BlaschkeSpec, z: DiscPoint | complex) -> DiscPoint:
    return DiscPoint(complex(b(_as_value(z))))


def derivative_at_zero(b: BlaschkeSpec) -> float:
    """``|B'(0)|``: 0 when ``q >= 2``, else ``prod |a_k|^{m_k}``."""
    if b.power_at_zero >= 2:
        return 0.0
    return math.prod(abs(a) ** m for a, m in b.zeros)


def mu(r: float, lam: float) -> float:
    """Majorant ``r (r + lam) / (1 + lam r)`` of ``max_{|z|=r} |B(z)|``.

    Raises:
        DomainError: Unless ``0 < r < 1`` and ``0 <= lam < 1``
    """
    if not 0.0 < r < 1.0:
        raise DomainError("mu needs 0 < r < 1", value=r)
    if not 0.0 <= lam < 1.0:
        raise DomainError("mu needs 0 <= lambda < 1", value=lam)
    return r * (r + lam) / (1.0 + lam * r)


def beardon_carne_bound(z: complex | np.ndarray, d0: float) -> float | np.ndarray:
    """``|z| (|z| + d0) / (1 + d0 |z|)`` with ``d0 = |B'(0)|``."""
    r = np.abs(z)
    return r * (r + d0) / (1.0 + d0 * r)


def mu_orbit(r0: float, lam: float, stop: float = MU_STOP, max_steps: int = MU_MAX_STEPS) -> list[float]:
    """``r0, mu(r0), mu^2(r0), ...`` until an iterate falls below ``stop``.

    Raises:
        ContractError: If ``stop`` is not reached within ``max_steps``
    """
    values = [r0]
    r = r0
    for _ in range(max_steps):
        if r < stop:
            return values
        r = mu(r, lam) if r > 0 else 0.0
        values.append(r)
    if r < stop:
        return values
    raise ContractError(
        f"mu-iterates did not fall below {stop} within {max_steps} steps",
        requirement="lambda < 1",
    ).add_context("lambda", lam)


def compose_orbit(
    seq: Sequence[BlaschkeSpec], z: DiscPoint | complex, lam: float
) -> list[DiscPoint]:
    """Partial compositions ``z, B_0(z), B_1(B_0(z)), ...``.

    Raises:
        ContractError: If some ``|B_n'(0)|`` exceeds ``lam``
    """
    if not 0.0 <= lam < 1.0:
        raise DomainError("lambda must lie in [0, 1)", value=lam)
    for n, b in enumerate(seq):
        d0 = derivative_at_zero(b)
        if d0 > lam:
            raise ContractError(
                f"|B_{n}'(0)| = {d0:.6g} exceeds lambda = {lam}",
                requirement="|B_n'(0)| <= lambda",
            ).add_context("index", n)
    orbit = [DiscPoint(_as_value(z))]
    for b in seq:
        orbit.append(eval_blaschke(b, orbit[-1]))
    return orbit


def hyperbolic_distance_disc(w: DiscPoint | complex, z: DiscPoint | complex) -> float:
    """``2 artanh |(w - z) / (1 - conj(w) z)|``."""
    a = _as_value(w)
    b = _as_value(z)
    return 2.0 * math.atanh(abs((a - b) / (1.0 - a.conjugate() * b)))


def mobius(a: complex, z: complex | np.ndarray) -> complex | np.ndarray:
    """Disc automorphism ``(z - a) / (1 - conj(a) z)`` sending ``a`` to 0."""
    a = complex(a)
    return (z - a) / (1.0 - a.conjugate() * z)


@dataclass(frozen=True)
class Conjugation:
    """``phi(z) = mobius(alpha, z)`` and its inverse ``mobius(-alpha, w)``."""

    alpha: complex

    def forward(self, z: complex | np.ndarray) -> complex | np.ndarray:
        return mobius(self.alpha, z)

    def inverse(self, w: complex | np.ndarray) -> complex | np.ndarray:
        return mobius(-self.alpha, w)

    def conjugate(self, g: Callable[[complex], complex]) -> Callable[[complex], complex]:
        """``phi ∘ g ∘ phi^{-1}``, which fixes 0 when ``g`` fixes ``alpha``."""

        def conjugated(w: complex) -> complex:
            return self.forward(g(self.inverse(w)))

        return conjugated


def conjugate_to_origin(alpha: DiscPoint | complex) -> Conjugation:
    return Conjugation(_as_value(alpha))


def random_blaschke(rng: np.random.Generator, max_zeros: int = 3, lam: float = 0.9) -> BlaschkeSpec:
    """Random product with ``|B'(0)| <= lam``.

    One in four draws (every draw when ``lam = 0``) has a double zero at the
    origin. Otherwise the first zero is pulled towards the origin if the
    derivative bound would fail.
    """
    rotation = cmath.exp(1j * rng.uniform(-math.pi, math.pi))
    q = 2 if rng.random() < 0.25 or lam <= 0.0 else 1
    k = int(rng.integers(1, max_zeros + 1))
    moduli = rng.uniform(0.05, 0.99, size=k)
    args = rng.uniform(-math.pi, math.pi, size=k)
    mults = rng.integers(1, 3, size=k)
    if q == 1:
        rest = float(np.prod(moduli[1:] ** mults[1:]))
        if moduli[0] ** mults[0] * rest > lam:
            moduli[0] = (lam / rest) ** (1.0 / mults[0]) * (1.0 - 1e-12)
    zeros = tuple(
        (complex(cmath.rect(float(r), float(t))), int(m)) for r, t, m in zip(moduli, args, mults)
    )
    return BlaschkeSpec(rotation, q, zeros)


def random_disc_points(rng: np.random.Generator, count: int, r_max: float = 0.999) -> np.ndarray:
    """Points uniform in argument with modulus uniform in ``[0, r_max)``."""
    r = rng.uniform(0.0, r_max, size=count)
    t = rng.uniform(-math.pi, math.pi, size=count)
    return r * np.exp(1j * t)


__all__ = [
    "BlaschkeSpec",
    "Conjugation",
    "DiscPoint",
    "beardon_carne_bound",
    "compose_orbit",
    "conjugate_to_origin",
    "derivative_at_zero",
    "eval_blaschke",
    "hyperbolic_distance_disc",
    "mobius",
    "mu",
    "mu_orbit",
    "random_blaschke",
    "random_disc_points",
]
