"""Unit tests for finite Blaschke products."""

import cmath
import math

import numpy as np
import pytest

from fastweb.blaschke import (
    BlaschkeSpec,
    DiscPoint,
    beardon_carne_bound,
    compose_orbit,
    conjugate_to_origin,
    derivative_at_zero,
    eval_blaschke,
    hyperbolic_distance_disc,
    mobius,
    mu,
    mu_orbit,
    random_blaschke,
    random_disc_points,
)
from fastweb.exceptions import ContractError, DomainError, InvalidParameterError


@pytest.fixture
def product() -> BlaschkeSpec:
    return BlaschkeSpec(cmath.exp(0.3j), 1, ((0.5 + 0j, 1), (0.4j, 2)))


class TestDiscPoint:
    def test_inside(self):
        assert DiscPoint(0.5j).modulus == pytest.approx(0.5)

    @pytest.mark.parametrize("z", [1.0, 1j, -2.0, complex(math.nan, 0.0)])
    def test_outside_rejected(self, z):
        with pytest.raises(DomainError):
            DiscPoint(z)


class TestBlaschkeSpec:
    def test_degree(self, product):
        assert product.degree == 4
        assert BlaschkeSpec.power(3).degree == 3

    def test_power_map(self):
        assert BlaschkeSpec.power(2)(0.5j) == pytest.approx(-0.25)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rotation": 2.0},
            {"power_at_zero": 0},
            {"power_at_zero": 1.5},
            {"power_at_zero": True},
            {"zeros": ((0j, 1),)},
            {"zeros": ((1.2 + 0j, 1),)},
            {"zeros": ((0.5 + 0j, 0),)},
            {"zeros": ((0.5 + 0j, 1), (0.5 + 0j, 2))},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            BlaschkeSpec(**kwargs)

    def test_unimodular_on_the_circle(self, product):
        circle = np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 64))
        np.testing.assert_allclose(np.abs(product(circle)), 1.0, rtol=1e-12)

    def test_fixes_origin_and_maps_into_disc(self, product, rng):
        assert product(0j) == 0
        for z in random_disc_points(rng, 50):
            assert eval_blaschke(product, complex(z)).modulus < 1.0

    def test_derivative_at_zero(self, product):
        assert derivative_at_zero(product) == pytest.approx(0.5 * 0.16)
        h = 1e-7
        assert abs(product(h)) / h == pytest.approx(0.08, rel=1e-5)
        assert derivative_at_zero(BlaschkeSpec.power(2)) == 0.0

    def test_to_dict(self, product):
        data = product.to_dict()
        assert data["power_at_zero"] == 1
        assert data["zeros"][1] == [0.0, 0.4, 2]


class TestContraction:
    def test_mu(self):
        assert mu(0.5, 0.9) == pytest.approx(0.5 * 1.4 / 1.45)
        assert mu(0.5, 0.0) == pytest.approx(0.25)
        for r, lam in [(0.0, 0.5), (1.0, 0.5), (0.5, 1.0), (0.5, -0.1)]:
            with pytest.raises(DomainError):
                mu(r, lam)

    def test_mu_orbit(self):
        values = mu_orbit(0.9, 0.9)
        assert values[0] == 0.9
        assert values[-1] < 1e-6
        assert all(b < a for a, b in zip(values, values[1:]))
        assert mu_orbit(0.0, 0.9) == [0.0]
        with pytest.raises(ContractError):
            mu_orbit(0.9, 0.9, max_steps=2)

    def test_beardon_carne_bound_holds(self, rng):
        for _ in range(20):
            b = random_blaschke(rng, lam=0.9)
            d0 = derivative_at_zero(b)
            z = random_disc_points(rng, 100)
            assert np.all(np.abs(b(z)) <= beardon_carne_bound(z, d0) + 1e-12)

    def test_random_products_respect_lambda(self, rng):
        for lam in (0.0, 0.3, 0.9):
            for _ in range(25):
                assert derivative_at_zero(random_blaschke(rng, lam=lam)) <= lam

    def test_compose_orbit_is_bounded_by_mu(self, rng):
        lam = 0.9
        seq = [random_blaschke(rng, lam=lam) for _ in range(30)]
        orbit = compose_orbit(seq, 0.9 + 0j, lam)
        assert len(orbit) == 31
        bound = 0.9
        for point in orbit[1:]:
            bound = mu(bound, lam)
            assert point.modulus <= bound + 1e-12

    def test_compose_orbit_of_powers(self):
        orbit = compose_orbit([BlaschkeSpec.power(2)] * 3, 0.5, 0.0)
        assert [p.value for p in orbit] == pytest.approx([0.5, 0.25, 0.0625, 0.00390625])

    def test_compose_orbit_rejects_large_derivative(self):
        steep = BlaschkeSpec(1 + 0j, 1, ((0.95 + 0j, 1),))
        with pytest.raises(ContractError) as exc_info:
            compose_orbit([BlaschkeSpec.power(2), steep], 0.5, 0.9)
        assert exc_info.value.context["index"] == 1
        with pytest.raises(DomainError):
            compose_orbit([], 0.5, 1.0)


class TestHyperbolicGeometry:
    def test_distance_from_origin(self):
        assert hyperbolic_distance_disc(0j, 0.5) == pytest.approx(2.0 * math.atanh(0.5))
        assert hyperbolic_distance_disc(0.3j, 0.3j) == 0.0

    def test_symmetric(self):
        assert hyperbolic_distance_disc(0.2 + 0.1j, -0.5j) == pytest.approx(
            hyperbolic_distance_disc(-0.5j, 0.2 + 0.1j)
        )

    def test_products_do_not_expand(self, product, rng):
        z = random_disc_points(rng, 40, r_max=0.95)
        w = random_disc_points(rng, 40, r_max=0.95)
        for a, b in zip(z, w):
            before = hyperbolic_distance_disc(complex(a), complex(b))
            after = hyperbolic_distance_disc(complex(product(complex(a))), complex(product(complex(b))))
            assert after <= before + 1e-9

    def test_automorphism_is_an_isometry(self):
        a = 0.3 - 0.4j
        z, w = 0.1 + 0.2j, -0.6j
        assert hyperbolic_distance_disc(mobius(a, z), mobius(a, w)) == pytest.approx(
            hyperbolic_distance_disc(z, w)
        )

    def test_conjugation_moves_fixed_point_to_origin(self):
        alpha = 0.4 + 0.2j
        conj = conjugate_to_origin(alpha)
        assert conj.forward(alpha) == pytest.approx(0.0)
        assert conj.inverse(conj.forward(0.1 - 0.3j)) == pytest.approx(0.1 - 0.3j)

        def g(z):
            return conj.inverse(conj.forward(z) ** 2)

        assert g(alpha) == pytest.approx(alpha)
        assert conj.conjugate(g)(0j) == pytest.approx(0.0, abs=1e-15)

    def test_random_disc_points(self, rng):
        z = random_disc_points(rng, 500, r_max=0.5)
        assert z.shape == (500,)
        assert np.all(np.abs(z) < 0.5)
