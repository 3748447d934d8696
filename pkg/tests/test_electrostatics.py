import itertools
import math
import unittest

import numpy as np
from scipy import integrate, special

from electrostatics import (
    FieldPoint,
    GreensEnv,
    PlaneConfig,
    coulomb_energy,
    field_point,
    greens_cover,
    greens_cover_asymptote,
    greens_cover_bessel,
    greens_cover_image,
    greens_cover_series,
    greens_plane,
    self_potential,
    surface_greens,
    surface_greens_asymptote,
    surface_greens_fourier,
    surface_greens_fourier_dz,
    surface_greens_series,
)
from models import ConvergenceError, DomainError


def image_self_energy(z: float, H: float, pairs: int = 200_000) -> float:
    """Half the image-charge potential at the ion, summed mirror by mirror."""
    mu = np.arange(pairs, 0, -1, dtype=float)
    shifts = 2.0 * H * mu
    terms = 2.0 / shifts - 1.0 / (2.0 * z + shifts) - 1.0 / np.abs(2.0 * z - shifts)
    image_potential = float(np.sum(terms)) - 1.0 / (2.0 * z)
    return -0.5 * image_potential


def laplacian(function, point: np.ndarray, step: float) -> tuple[float, list[float]]:
    """Central-difference Laplacian and its three second-derivative terms."""
    centre = function(point)
    terms = []
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        terms.append((function(point + offset) - 2.0 * centre + function(point - offset)) / step**2)
    return float(sum(terms)), terms


class SpecialFunctionSpotChecks(unittest.TestCase):
    def test_reference_values(self) -> None:
        table = [
            (float(special.digamma(1.0)), -np.euler_gamma),
            (float(special.digamma(0.5)), -np.euler_gamma - 2.0 * math.log(2.0)),
            (float(special.zeta(3.0)), 1.2020569031595942),
            (float(special.zeta(2.0)), math.pi**2 / 6.0),
            (float(special.k0(1.0)), 0.42102443824070834),
            (float(special.eval_legendre(3, 0.5)), -0.4375),
            (float(special.polygamma(1, 1.0)), math.pi**2 / 6.0),
        ]
        for computed, expected in table:
            self.assertAlmostEqual(computed, expected, delta=1e-13 * max(1.0, abs(expected)))


class CoverGreensTests(unittest.TestCase):
    def setUp(self) -> None:
        self.env = GreensEnv.for_height(1.0)

    def test_image_and_bessel_forms_agree(self) -> None:
        rhos = (0.2, 0.5, 1.0, 1.7)
        heights = (0.1, 0.35, 0.6, 0.9)
        for rho, z, zp in itertools.product(rhos, heights, heights):
            p = FieldPoint(rho, z, zp)
            image = greens_cover_image(p, self.env).value
            bessel = greens_cover_bessel(p, self.env).value
            self.assertAlmostEqual(image, bessel, delta=1e-10, msg=f"rho={rho}, z={z}, zp={zp}")

    def test_symmetric_in_heights(self) -> None:
        for rho, z, zp in [(0.3, 0.2, 0.7), (1.5, 0.1, 0.4), (0.0, 0.25, 0.5)]:
            self.assertAlmostEqual(
                greens_cover(FieldPoint(rho, z, zp), self.env),
                greens_cover(FieldPoint(rho, zp, z), self.env),
                delta=1e-12,
            )

    def test_vanishes_on_both_planes(self) -> None:
        peak = greens_cover(FieldPoint(0.5, 0.5, 0.5), self.env)
        self.assertEqual(greens_cover(FieldPoint(0.5, 0.0, 0.5), self.env), 0.0)
        self.assertEqual(greens_cover(FieldPoint(0.5, 1.0, 0.5), self.env), 0.0)
        self.assertLess(abs(greens_cover(FieldPoint(0.5, 1e-8, 0.5), self.env)), 1e-6 * peak)
        self.assertLess(abs(greens_cover(FieldPoint(0.5, 1.0 - 1e-8, 0.5), self.env)), 1e-6 * peak)

    def test_distant_cover_reduces_to_single_plane(self) -> None:
        env = GreensEnv.for_height(1e6)
        for rho, z, zp in [(0.5, 0.5, 0.5), (2.0, 0.3, 1.1), (0.0, 0.4, 0.9)]:
            p = FieldPoint(rho, z, zp)
            self.assertAlmostEqual(greens_cover(p, env), greens_plane(p), delta=1e-12)

    def test_shielding_regimes(self) -> None:
        h = 0.5
        H = 100.0 * h
        env = GreensEnv.for_height(H)
        for rho, regime in [(h / 20.0, "near"), (20.0 * h, "dipolar"), (4.0 * H, "screened")]:
            exact = greens_cover(FieldPoint(rho, h, h), env)
            approx, label = greens_cover_asymptote(rho, h, H)
            self.assertEqual(label, regime)
            self.assertLess(abs(approx - exact) / abs(exact), 0.05, msg=regime)

    def test_harmonic_between_the_planes(self) -> None:
        source = np.array([0.0, 0.0, 0.4])
        for H, point in [(1.0, (0.3, 0.2, 0.55)), (1.0, (1.5, 0.3, 0.6)), (2.0, (0.7, -0.4, 1.3))]:
            env = GreensEnv.for_height(H)
            total, terms = laplacian(
                lambda r: greens_cover(field_point(r, source), env), np.array(point), step=1e-3
            )
            self.assertLess(abs(total), 1e-4 * max(abs(term) for term in terms), msg=f"H={H}, r={point}")

    def test_cover_never_exceeds_single_plane(self) -> None:
        for H in (1.0, 2.0):
            env = GreensEnv.for_height(H)
            for rho in (0.05, 0.2, 0.5, 1.0, 2.0, 4.0):
                p = FieldPoint(rho, 0.3, 0.45)
                cover = greens_cover(p, env)
                self.assertGreater(cover, 0.0)
                self.assertLess(cover, greens_plane(p), msg=f"H={H}, rho={rho}")

    def test_tiny_offset_near_both_planes_uses_images(self) -> None:
        env = GreensEnv(PlaneConfig.COVER, 1.0, abs_tol=1e-8, max_terms=1000)
        p = FieldPoint(1e-4, 1.0 - 1e-9, 1e-9)
        self.assertGreater(p.separation, env.H)
        result = greens_cover_series(p, env)
        self.assertEqual(result.form, "image")
        self.assertLess(abs(result.value), 1e-6)

    def test_rejects_points_outside_slab(self) -> None:
        with self.assertRaises(DomainError):
            greens_cover(FieldPoint(0.5, 1.2, 0.5), self.env)
        with self.assertRaises(DomainError):
            greens_cover(FieldPoint(0.0, 0.5, 0.5), self.env)

    def test_term_budget_exhausted(self) -> None:
        env = GreensEnv(PlaneConfig.COVER, 1.0, max_terms=3)
        with self.assertRaises(ConvergenceError) as caught:
            greens_cover(FieldPoint(0.5, 0.5, 0.5), env)
        self.assertEqual(caught.exception.operation, "greens_cover")

    def test_cover_needs_finite_height(self) -> None:
        with self.assertRaises(DomainError):
            GreensEnv(PlaneConfig.COVER, math.inf)
        self.assertEqual(GreensEnv.for_height(math.inf).plane, PlaneConfig.PLANE)


class SinglePlaneTests(unittest.TestCase):
    def test_closed_form(self) -> None:
        p = FieldPoint(1.0, 0.5, 0.5)
        self.assertAlmostEqual(greens_plane(p), 1.0 - 1.0 / math.sqrt(2.0), places=14)

    def test_negative_height_rejected(self) -> None:
        with self.assertRaises(DomainError):
            greens_plane(FieldPoint(1.0, -0.1, 0.5))


class SelfPotentialTests(unittest.TestCase):
    def test_single_plane_limit(self) -> None:
        self.assertEqual(self_potential(0.25, math.inf), 1.0)
        z, H = 0.01, 100.0
        self.assertAlmostEqual(self_potential(z, H) * 4.0 * z, 1.0, delta=1e-6)

    def test_quarter_height_matches_image_sum(self) -> None:
        H = 1.0
        value = self_potential(H / 4.0, H)
        self.assertAlmostEqual(value, 1.5 * math.log(2.0), places=12)
        self.assertAlmostEqual(value, image_self_energy(H / 4.0, H), delta=1e-8)

    def test_outside_slab_rejected(self) -> None:
        with self.assertRaises(DomainError):
            self_potential(1.5, 1.0)
        with self.assertRaises(DomainError):
            self_potential(0.0, math.inf)

    def test_coulomb_energy_of_two_ions_above_plane(self) -> None:
        env = GreensEnv.for_height(math.inf)
        positions = [np.array([0.0, 0.0, 0.5]), np.array([1.0, 0.0, 0.5])]
        energy = coulomb_energy([1.0, 1.0], positions, env)
        self.assertAlmostEqual(energy, (1.0 - 1.0 / math.sqrt(2.0)) - 1.0, places=12)


class SurfaceGreensTests(unittest.TestCase):
    def setUp(self) -> None:
        self.env = GreensEnv.for_height(1.0)

    def test_three_forms_agree(self) -> None:
        for rho, z in [(0.3, 0.2), (0.5, 0.5), (1.0, 0.7), (0.2, 0.9), (1.2, 0.4), (0.8, 0.1)]:
            images = surface_greens(rho, z, self.env, form="images")
            bessel = surface_greens(rho, z, self.env, form="bessel")
            legendre = surface_greens(rho, z, self.env, form="legendre")
            self.assertAlmostEqual(images, bessel, delta=1e-10, msg=f"rho={rho}, z={z}")
            self.assertAlmostEqual(images, legendre, delta=1e-10, msg=f"rho={rho}, z={z}")

    def test_axis_value_is_exact(self) -> None:
        for z in (0.2, 0.5, 0.8):
            axis, label = surface_greens_asymptote(0.0, z, 1.0)
            self.assertEqual(label, "axis")
            self.assertAlmostEqual(axis, surface_greens(0.0, z, self.env), delta=1e-10)

    def test_screened_far_field(self) -> None:
        exact = surface_greens(4.0, 0.5, self.env)
        approx, label = surface_greens_asymptote(4.0, 0.5, 1.0)
        self.assertEqual(label, "screened")
        self.assertLess(abs(approx - exact) / exact, 0.05)

    def test_plane_integral_is_linear_profile(self) -> None:
        z = 0.4

        def ring(rho: float) -> float:
            return 2.0 * math.pi * rho * surface_greens(rho, z, self.env)

        near, _ = integrate.quad(ring, 0.0, 1.0, epsabs=1e-12, epsrel=1e-10, limit=200)
        far, _ = integrate.quad(ring, 1.0, 30.0, epsabs=1e-12, epsrel=1e-10, limit=200)
        self.assertAlmostEqual(near + far, (1.0 - z) / 1.0, delta=1e-7)

    def test_fourier_kernel_limits(self) -> None:
        self.assertAlmostEqual(surface_greens_fourier(0.0, 0.3, 1.0), 0.7, places=15)
        self.assertAlmostEqual(surface_greens_fourier(2.0, 0.3, math.inf), math.exp(-0.6), places=14)
        k = np.array([0.5, 3.0, 40.0])
        expected = np.sinh(k * 0.7) / np.sinh(k)
        np.testing.assert_allclose(surface_greens_fourier(k, 0.3, 1.0), expected, rtol=1e-12)
        self.assertAlmostEqual(surface_greens_fourier_dz(0.0, 0.3, 1.0), -1.0)

    def test_fourier_derivative_matches_difference(self) -> None:
        step = 1e-5
        for k in (0.5, 4.0):
            numeric = (
                surface_greens_fourier(k, 0.4 + step, 1.0) - surface_greens_fourier(k, 0.4 - step, 1.0)
            ) / (2.0 * step)
            self.assertAlmostEqual(surface_greens_fourier_dz(k, 0.4, 1.0), numeric, delta=1e-8)

    def test_fourier_kernel_solves_the_mode_equation(self) -> None:
        step = 1e-4
        for k, H in [(2.0, 1.5), (0.7, 1.0), (3.0, math.inf)]:
            z = 0.7
            second = (
                surface_greens_fourier(k, z + step, H)
                - 2.0 * surface_greens_fourier(k, z, H)
                + surface_greens_fourier(k, z - step, H)
            ) / step**2
            expected = k * k * surface_greens_fourier(k, z, H)
            self.assertAlmostEqual(second, expected, delta=1e-5 * expected, msg=f"k={k}, H={H}")

    def test_tiny_offset_under_the_cover_uses_images(self) -> None:
        env = GreensEnv(PlaneConfig.COVER, 1.0, abs_tol=1e-8, max_terms=1000)
        rho, z = 1e-4, 1.0 - 1e-9
        self.assertGreater(math.hypot(rho, z), env.H)
        result = surface_greens_series(rho, z, env)
        self.assertEqual(result.form, "images")
        self.assertTrue(math.isfinite(result.value))

    def test_unknown_form_rejected(self) -> None:
        with self.assertRaises(DomainError):
            surface_greens(0.5, 0.5, self.env, form="multipole")
        with self.assertRaises(DomainError):
            surface_greens(3.0, 0.5, self.env, form="legendre")


if __name__ == "__main__":
    unittest.main()
