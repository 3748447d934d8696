import math
import unittest

import numpy as np

from models import ConvergenceError, DomainError
from trap import (
    ElectrodePattern,
    Polygon,
    SIContext,
    example_pattern,
    find_rf_null,
    fourier_table,
    periodic_gradient,
    periodic_potential,
    polygon_fourier,
    pseudopotential,
    pseudopotential_ev,
    regular_polygon,
    total_potential,
    vertical_scan,
)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def square_cell(size: float, polygons: tuple[Polygon, ...]) -> ElectrodePattern:
    return ElectrodePattern(np.array([size, 0.0]), np.array([0.0, size]), polygons, "square")


class SIContextTests(unittest.TestCase):
    def test_energy_scale_of_default_design(self) -> None:
        ctx = SIContext()
        self.assertLess(abs(ctx.energy_pp_ev - 4.7) / 4.7, 0.02)
        self.assertLess(abs(ctx.energy_pp_kelvin - 5.5e4) / 5.5e4, 0.02)
        self.assertAlmostEqual(ctx.voltage_pp, ctx.energy_pp_ev, places=12)

    def test_stiff_frequency_bound(self) -> None:
        ctx = SIContext()
        self.assertLess(abs(ctx.stiff_frequency_bound - 5.35e5) / 5.35e5, 0.01)
        omega_bar = 2.0 * math.pi * 5e6
        self.assertAlmostEqual(ctx.omega0(omega_bar), ctx.gamma_unit / (2.0 * omega_bar), places=6)

    def test_round_trip_and_validation(self) -> None:
        ctx = SIContext(d=20e-6, u_rf=80.0)
        self.assertEqual(SIContext.from_dict(ctx.to_dict()), ctx)
        self.assertAlmostEqual(ctx.cover_height, 50.0 * 20e-6, places=15)
        self.assertAlmostEqual(ctx.trap_cover_height(), 50.0, places=12)
        self.assertEqual(ctx.trap_cover_height(7.5), 7.5)
        with self.assertRaises(DomainError):
            SIContext(mass=0.0)


class PolygonTests(unittest.TestCase):
    def test_fourier_transform_of_square(self) -> None:
        k = np.array([[1.0, 2.0], [0.0, 3.0], [-2.5, 0.7]])

        def side(q: float) -> complex:
            return 1.0 if q == 0.0 else (1.0 - np.exp(-1j * q)) / (1j * q)

        expected = np.array([side(kx) * side(ky) for kx, ky in k])
        np.testing.assert_allclose(polygon_fourier(UNIT_SQUARE, k), expected, atol=1e-14)
        np.testing.assert_allclose(polygon_fourier(UNIT_SQUARE[::-1], k), expected, atol=1e-14)

    def test_zero_wavevector_gives_area(self) -> None:
        hexagon = regular_polygon(np.zeros(2), 1.0, 6)
        area = polygon_fourier(hexagon, np.zeros((1, 2)))[0]
        self.assertAlmostEqual(area.real, 1.5 * math.sqrt(3.0), places=12)
        self.assertAlmostEqual(Polygon(hexagon).signed_area, 1.5 * math.sqrt(3.0), places=12)

    def test_self_intersecting_polygon_rejected(self) -> None:
        bowtie = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        with self.assertRaises(DomainError):
            square_cell(4.0, (Polygon(bowtie),))

    def test_pattern_round_trip(self) -> None:
        pattern = example_pattern()
        again = ElectrodePattern.from_dict(pattern.to_dict())
        self.assertEqual(again.to_dict(), pattern.to_dict())
        with self.assertRaises(DomainError):
            ElectrodePattern.from_dict({"cell": [[1.0, 0.0], [0.0, 1.0]]})


class PeriodicPotentialTests(unittest.TestCase):
    def test_uniform_electrode_gives_linear_profile(self) -> None:
        pattern = square_cell(1.0, (Polygon(UNIT_SQUARE),))
        table = fourier_table(pattern, z_min=0.2, H=4.0)
        for z in (0.5, 1.0, 3.0):
            self.assertAlmostEqual(periodic_potential(table, np.array([0.3, 0.7, z])), (4.0 - z) / 4.0, delta=1e-10)

    def test_sparse_discs_match_isolated_disc(self) -> None:
        radius, sides, size = 0.5, 128, 16.0
        circumradius = radius * math.sqrt(2.0 * math.pi / (sides * math.sin(2.0 * math.pi / sides)))
        disc = Polygon(regular_polygon(np.zeros(2), circumradius, sides))
        table = fourier_table(square_cell(size, (disc,)), z_min=0.3)

        i, j = np.meshgrid(np.arange(-200, 201), np.arange(-200, 201), indexing="ij")
        lateral2 = (size * i) ** 2 + (size * j) ** 2
        lateral2 = lateral2[lateral2 > 0]
        for z in (0.3, 0.6, 1.0):
            isolated = 1.0 - z / math.sqrt(z * z + radius * radius)
            images = float(np.sum(radius * radius * z / (2.0 * (lateral2 + z * z) ** 1.5)))
            value = periodic_potential(table, np.array([0.0, 0.0, z]))
            expected = isolated + images
            self.assertLess(abs(value - expected) / expected, 1e-3, msg=f"z={z}")

    def test_doubling_cutoff_is_converged(self) -> None:
        pattern = example_pattern()
        base = fourier_table(pattern, z_min=0.05)
        k_max = float(base.norms.max())
        doubled = fourier_table(pattern, z_min=0.05, k_max=2.0 * k_max)
        for point in ([0.3, 0.2, 0.1], [0.0, 0.0, 0.5], [1.2, 0.4, 0.25]):
            point = np.array(point)
            coarse = periodic_potential(base, point)
            fine = periodic_potential(doubled, point)
            self.assertLess(abs(coarse - fine), 1e-8 * abs(fine))

    def test_gradient_matches_finite_difference(self) -> None:
        table = fourier_table(example_pattern(), z_min=0.1)
        point = np.array([0.3, 0.2, 0.3])
        step = 1e-5
        numeric = np.array(
            [
                (periodic_potential(table, point + step * axis) - periodic_potential(table, point - step * axis))
                / (2.0 * step)
                for axis in np.eye(3)
            ]
        )
        np.testing.assert_allclose(periodic_gradient(table, point), numeric, rtol=1e-6, atol=1e-8)

    def test_potential_is_harmonic_above_the_plane(self) -> None:
        step = 1e-5
        for H in (math.inf, 2.0):
            table = fourier_table(example_pattern(), z_min=0.1, H=H)
            point = np.array([0.3, 0.2, 0.3])
            curvature = [
                (periodic_gradient(table, point + step * axis)[index] - periodic_gradient(table, point - step * axis)[index])
                / (2.0 * step)
                for index, axis in enumerate(np.eye(3))
            ]
            scale = max(abs(value) for value in curvature)
            self.assertLess(abs(sum(curvature)), 1e-5 * scale, msg=f"H={H}")

    def test_table_limits(self) -> None:
        with self.assertRaises(DomainError):
            fourier_table(example_pattern(), z_min=0.0)
        with self.assertRaises(ConvergenceError):
            fourier_table(example_pattern(), z_min=0.05, max_vectors=10)
        table = fourier_table(example_pattern(), z_min=0.1, H=2.0)
        with self.assertRaises(DomainError):
            periodic_potential(table, np.array([0.0, 0.0, 2.5]))


class RfNullTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.table = fourier_table(example_pattern(), z_min=0.05)
        cls.null = find_rf_null(cls.table, np.zeros(2), 0.05, 0.4)

    def test_null_sits_above_ring_centre(self) -> None:
        self.assertGreater(self.null, 0.1)
        self.assertLess(self.null, 0.25)
        reference = pseudopotential(self.table, np.array([0.0, 0.0, 0.4]))
        self.assertLess(pseudopotential(self.table, np.array([0.0, 0.0, self.null])), 1e-12 * reference)

    def test_scan_minimum_at_null(self) -> None:
        zs = np.linspace(0.05, 0.4, 141)
        scan = vertical_scan(self.table, np.zeros(2), zs, biases=(0.0, 0.05))
        self.assertEqual(list(scan.curve.columns), ["z", "pseudopotential", "phi_rf", "total_bias_0", "total_bias_0.05"])
        unbiased = scan.depths[0]
        self.assertTrue(unbiased.trapped)
        self.assertLessEqual(abs(unbiased.z_min - self.null), zs[1] - zs[0])
        self.assertGreater(unbiased.depth, 0.0)

    def test_bias_adds_no_force_at_null(self) -> None:
        bias = 0.1
        point = np.array([0.0, 0.0, self.null])
        reference = bias * float(np.linalg.norm(periodic_gradient(self.table, np.array([0.0, 0.0, 0.4]))))
        bias_force = bias * float(np.linalg.norm(periodic_gradient(self.table, point)))
        self.assertLess(bias_force, 1e-8 * reference)
        self.assertAlmostEqual(
            total_potential(self.table, point, bias) - pseudopotential(self.table, point),
            bias * (1.0 - periodic_potential(self.table, point)),
            places=14,
        )

    def test_energy_in_electronvolts(self) -> None:
        ctx = SIContext()
        point = np.array([0.0, 0.0, 0.3])
        self.assertAlmostEqual(
            pseudopotential_ev(self.table, point, ctx), pseudopotential(self.table, point) * ctx.energy_pp_ev, places=12
        )

    def test_missing_sign_change(self) -> None:
        with self.assertRaises(DomainError):
            find_rf_null(self.table, np.zeros(2), 0.3, 0.4)

    def test_scan_outside_slab(self) -> None:
        with self.assertRaises(DomainError):
            vertical_scan(self.table, np.zeros(2), np.array([0.0, 0.1]))


if __name__ == "__main__":
    unittest.main()
