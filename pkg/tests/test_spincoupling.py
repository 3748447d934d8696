import math
import unittest

import numpy as np

from geometry import Family, LatticeSpec, SiteIndex, Sublattice, bond_vectors
from models import ConfigurationError, DomainError
from phonons import (
    LatticePatch,
    assemble_all,
    assemble_gamma,
    bloch_bands,
    finite_normal_modes,
    normal_modes_from_couplings,
    uniform_kgrid,
)
from spincoupling import (
    DriveKind,
    DriveSpec,
    check_drive_collisions,
    closed_form_ratio,
    default_detunings,
    displacement_amplitudes,
    entanglement_bound_check,
    gapped_phase_check,
    j_exact_modesum,
    j_modesum_first_order,
    j_perturbative,
    jxy_scaling,
    kitaev_effective_hamiltonian,
    kitaev_jz_coefficient,
    magnetic_sideband_vectors,
    next_order_estimate,
    omega_table,
    phase_factor,
    quantization_frame,
)
from wires import null_gradient, tone_amplitude

OPEN_SITE = SiteIndex(0, 0, Sublattice.OPEN)
X_PARTNER = SiteIndex(-1, 0, Sublattice.FILLED)


class PerturbativeCouplingTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.spec = LatticeSpec()
        cls.tensor = assemble_gamma(cls.spec, Family.X, Family.X, cutoff=4.5)

    def test_first_order_mode_sum_reproduces_formula(self) -> None:
        patch = LatticePatch.build(3, 3)
        modes = finite_normal_modes(self.spec, self.tensor, patch)
        drive = DriveSpec(Family.X, detuning=0.5)
        expected = j_perturbative(self.tensor, drive, patch).values
        summed = j_modesum_first_order(modes, drive, self.spec).values
        np.testing.assert_allclose(summed, expected, atol=1e-10 * np.max(np.abs(expected)))

    def test_site_phases_modulate_pairs(self) -> None:
        patch = LatticePatch.build(2, 2)
        plain = j_perturbative(self.tensor, DriveSpec(Family.X, detuning=0.5), patch)
        shifted_site = SiteIndex(1, 0, Sublattice.FILLED)
        phased = j_perturbative(
            self.tensor, DriveSpec(Family.X, detuning=0.5, site_phases={shifted_site: math.pi / 3.0}), patch
        )
        neighbour = SiteIndex(1, 0, Sublattice.OPEN)
        self.assertAlmostEqual(
            phased.pair(neighbour, shifted_site), 0.5 * plain.pair(neighbour, shifted_site), delta=1e-15
        )
        self.assertEqual(phased.pair(OPEN_SITE, SiteIndex(1, 1, Sublattice.OPEN)), plain.pair(OPEN_SITE, SiteIndex(1, 1, Sublattice.OPEN)))

    def test_frame_lists_each_pair_once(self) -> None:
        patch = LatticePatch.build(2, 1)
        j = j_perturbative(self.tensor, DriveSpec(Family.X, detuning=0.5), patch)
        frame = j.as_frame()
        self.assertEqual(list(frame.columns), ["i", "j", "J"])
        self.assertLessEqual(len(frame), len(patch) * (len(patch) - 1) // 2)
        self.assertTrue(np.allclose(j.values, j.values.T))

    def test_wrong_family_or_zero_detuning(self) -> None:
        patch = LatticePatch.build(1, 1)
        with self.assertRaises(DomainError):
            j_perturbative(self.tensor, DriveSpec(Family.Z, detuning=0.5), patch)
        with self.assertRaises(DomainError):
            j_perturbative(self.tensor, DriveSpec(Family.X, detuning=0.0), patch)


class ModeSumOracleTests(unittest.TestCase):
    def test_two_ion_closed_form(self) -> None:
        spec = LatticeSpec()
        omega, coupling, detuning = 50.0, 0.1, 0.5
        modes = normal_modes_from_couplings(
            np.array([omega, omega]),
            np.array([[0.0, coupling], [coupling, 0.0]]),
            sites=(OPEN_SITE, X_PARTNER),
            families=(Family.X,),
        )
        drive = DriveSpec(Family.X, detuning=detuning, omega_bar=omega)
        exact = j_exact_modesum(modes, drive, spec).pair(OPEN_SITE, X_PARTNER)

        p_open = drive.projection(spec, Sublattice.OPEN)
        p_filled = drive.projection(spec, Sublattice.FILLED)
        drive_frequency = omega - detuning
        upper = math.sqrt(omega**2 + coupling)
        lower = math.sqrt(omega**2 - coupling)
        closed = -p_open * p_filled / 8.0 * 0.5 * (
            1.0 / (upper * (upper - drive_frequency)) - 1.0 / (lower * (lower - drive_frequency))
        )
        self.assertAlmostEqual(exact, closed, delta=1e-12 * abs(closed))

        perturbative = coupling * p_open * p_filled / (16.0 * omega**2 * detuning**2)
        small = coupling / (2.0 * omega * detuning)
        self.assertLess(abs(exact - perturbative) / abs(perturbative), 5.0 * small)

    def test_torus_agrees_with_perturbative_formula(self) -> None:
        omega = 100.0
        spec = LatticeSpec(omega_mean=omega, frequency_ratio=(1.0, 1.0, 1.0))
        tensor = assemble_gamma(spec, Family.X, Family.X, cutoff=4.5)
        patch = LatticePatch.build(8, 8, boundary="torus")
        bands = bloch_bands(tensor, omega_bar=omega, kpoints=uniform_kgrid(8))
        detuning = 10.0 * bands.half_width()
        drive = DriveSpec(Family.X, detuning=detuning, omega_bar=omega)

        modes = finite_normal_modes(spec, tensor, patch, omega_bars={family: omega for family in Family})
        exact = j_exact_modesum(modes, drive, spec)
        perturbative = j_perturbative(tensor, drive, patch)

        strong = np.abs(perturbative.values) > 0.5 * np.max(np.abs(perturbative.values))
        deviation = np.max(np.abs(exact.values[strong] - perturbative.values[strong]) / np.abs(perturbative.values[strong]))
        bound = next_order_estimate(modes.frequencies, omega, detuning)
        self.assertLess(deviation, 3.0 * bound)
        self.assertEqual(exact.diagnostics["off_target_leakage"], 0.0)

    def test_off_target_leakage_reported(self) -> None:
        spec = LatticeSpec()
        tensors = {key: value for key, value in assemble_all(spec, cutoff=1.5).items() if key[0] in (Family.X, Family.Z)}
        patch = LatticePatch.build(2, 2)
        modes = finite_normal_modes(spec, tensors, patch)
        drive = DriveSpec(Family.X, detuning=0.5)
        active = j_exact_modesum(modes, drive, spec)
        every = j_exact_modesum(modes, drive, spec, bands="all")
        self.assertEqual(active.diagnostics["modes_used"], len(patch))
        self.assertEqual(every.diagnostics["modes_used"], 2 * len(patch))
        self.assertGreater(active.diagnostics["off_target_leakage"], 0.0)
        with self.assertRaises(ConfigurationError):
            j_exact_modesum(modes, drive, spec, bands="nearest")


class DynamicsTests(unittest.TestCase):
    def test_phase_factor_tends_to_inverse_detuning(self) -> None:
        delta = 0.3
        for t in (10.0, 100.0, 1000.0):
            relative = abs(phase_factor(delta, t) / t - 1.0 / delta) * abs(delta)
            self.assertLessEqual(relative, 1.0 / (abs(delta) * t) + 1e-15)
        with self.assertRaises(DomainError):
            phase_factor(0.0, 1.0)

    def test_displacement_peaks_at_half_loop(self) -> None:
        spec = LatticeSpec()
        modes = normal_modes_from_couplings(
            np.array([5.0, 5.0]), np.array([[0.0, 0.2], [0.2, 0.0]]), sites=(OPEN_SITE, X_PARTNER), families=(Family.X,)
        )
        drive = DriveSpec(Family.X, detuning=0.4, omega_bar=5.0)
        table = omega_table(modes, drive, spec)
        delta0 = table.detunings[0]
        report = displacement_amplitudes(table, math.pi / delta0)
        strength = float(np.linalg.norm(table.values[:, 0]))
        self.assertAlmostEqual(report.amplitudes[0], 2.0 * strength / abs(delta0), places=12)
        self.assertAlmostEqual(report.max_ratio, table.max_ratio(), places=15)

    def test_next_order_estimate(self) -> None:
        estimate = next_order_estimate(np.array([9.9, 10.0, 10.2]), 10.0, 1.0)
        self.assertAlmostEqual(estimate, 0.2 + 0.1, places=12)


class DrivePlanningTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.spec = LatticeSpec()
        cls.tensors = {family: assemble_gamma(cls.spec, family, family, cutoff=4.5) for family in Family}

    def test_default_detuning_signs(self) -> None:
        detunings = default_detunings(self.spec, self.tensors)
        self.assertGreater(detunings[Family.X], 0.0)
        self.assertLess(detunings[Family.Y], 0.0)
        self.assertLess(detunings[Family.Z], 0.0)
        drives = {family: DriveSpec(family, detuning=value) for family, value in detunings.items()}
        check_drive_collisions(self.spec, drives, self.tensors)

    def test_collision_detected(self) -> None:
        drives = {Family.Y: DriveSpec(Family.Y, detuning=1.8)}
        with self.assertRaises(ConfigurationError):
            check_drive_collisions(self.spec, drives, self.tensors)

    def test_kitaev_table_ratios(self) -> None:
        detunings = default_detunings(self.spec, self.tensors)
        drives = {family: DriveSpec(family, detuning=value) for family, value in detunings.items()}
        table = kitaev_effective_hamiltonian(self.spec, drives, tensors=self.tensors)
        self.assertEqual(set(table.nearest), set(Family))
        self.assertAlmostEqual(table.relative(Family.X, Sublattice.OPEN, -1, 0, Sublattice.FILLED), 1.0, places=12)
        self.assertAlmostEqual(table.relative(Family.Y, Sublattice.OPEN, 0, -1, Sublattice.FILLED), 1.0, places=12)
        far = table.relative(Family.X, Sublattice.OPEN, -2, 0, Sublattice.FILLED)
        step = table.relative(Family.X, Sublattice.OPEN, 1, 0, Sublattice.OPEN)
        self.assertLess(abs(abs(far) - 0.05), 0.005)
        self.assertLess(abs(abs(step) - 0.06), 0.005)

    def test_bond_phase_modulation(self) -> None:
        detunings = default_detunings(self.spec, self.tensors)
        drives = {Family.X: DriveSpec(Family.X, detuning=detunings[Family.X])}
        key = (Sublattice.OPEN, -2, 0, Sublattice.FILLED)
        plain = kitaev_effective_hamiltonian(self.spec, drives, tensors=self.tensors)
        phased = kitaev_effective_hamiltonian(
            self.spec, drives, tensors=self.tensors, bond_phases={Family.X: {key: math.pi / 3.0}}
        )
        self.assertAlmostEqual(
            phased.relative(Family.X, *key), 0.5 * plain.relative(Family.X, *key), delta=1e-12
        )

    def test_drive_round_trip(self) -> None:
        drive = DriveSpec(
            Family.Y,
            detuning=-0.3,
            sideband={Sublattice.OPEN: np.array([0.0, 0.0, 1.0]), Sublattice.FILLED: np.array([0.0, 0.0, -1.0])},
            kind=DriveKind.MOLMER_SORENSEN,
            omega_bar=5.0,
        )
        self.assertEqual(DriveSpec.from_dict(drive.to_dict()).to_dict(), drive.to_dict())
        self.assertAlmostEqual(drive.drive_frequency(LatticeSpec()), 5.3, places=12)

    def test_carrier_round_trip_and_validation(self) -> None:
        drive = DriveSpec(Family.Z, detuning=0.2, carrier=np.array([0.1, -0.2, 0.0]))
        restored = DriveSpec.from_dict(drive.to_dict())
        np.testing.assert_allclose(restored.carrier, [0.1, -0.2, 0.0])
        self.assertAlmostEqual(restored.carrier_magnitude, 0.2, places=15)
        self.assertEqual(DriveSpec.from_dict({"family": "X", "detuning": 0.1}).carrier_magnitude, 0.0)
        with self.assertRaises(DomainError):
            DriveSpec(Family.Z, detuning=0.2, carrier=np.zeros(2))
        with self.assertRaises(DomainError):
            DriveSpec(Family.Z, detuning=0.2, carrier=np.array([0.0, math.nan, 0.0]))


class MagneticDriveTests(unittest.TestCase):
    def test_frame_is_right_handed(self) -> None:
        frame = quantization_frame(bond_vectors()[Family.Z])
        np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-14)
        self.assertAlmostEqual(float(np.linalg.det(frame)), 1.0, places=14)

    def test_sideband_from_null_gradient(self) -> None:
        gradient = null_gradient(math.sqrt(3.0) / 2.0)
        magnitude = gradient[0, 2]
        frame = quantization_frame(bond_vectors()[Family.Z])
        sidebands, carriers = magnetic_sideband_vectors(np.zeros(3), gradient, frame)
        np.testing.assert_allclose(carriers, np.zeros(3), atol=0.0)
        np.testing.assert_allclose(sidebands[2], [0.0, 0.0, math.sqrt(3.0) / 2.0 * magnitude], atol=1e-15)

    def test_jz_design_point(self) -> None:
        coefficient = kitaev_jz_coefficient()
        self.assertLess(abs(coefficient - 7.6e3) / 7.6e3, 0.02)


class BoundaryChecks(unittest.TestCase):
    def test_entanglement_limit(self) -> None:
        self.assertTrue(entanglement_bound_check(0.5, 1.0).passes)
        limit = entanglement_bound_check(-2.0, 2.0)
        self.assertFalse(limit.passes)
        self.assertTrue(limit.at_boundary)
        with self.assertRaises(DomainError):
            entanglement_bound_check(1.0, 0.0)

    def test_tone_amplitude_sits_on_the_limit(self) -> None:
        current = tone_amplitude(2e3, 7620.0)
        self.assertAlmostEqual(closed_form_ratio(current, 2e3, 7620.0), 1.0, places=12)

    def test_gapped_phase(self) -> None:
        check = gapped_phase_check(1.0, 1.0, 3.0)
        self.assertTrue(check.gapped)
        self.assertTrue(check.isotropic_xy)
        self.assertAlmostEqual(check.plaquette_coupling, 1.0 / (16.0 * 27.0), places=15)
        self.assertFalse(gapped_phase_check(1.0, 2.0, 2.5).gapped)
        with self.assertRaises(DomainError):
            gapped_phase_check(1.0, 1.0, 0.0)

    def test_jxy_scaling(self) -> None:
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        self.assertAlmostEqual(jxy_scaling(7620.0, omega_ratio=golden**2), 7620.0 * (golden + 1.0), delta=1e-9)
        self.assertAlmostEqual(jxy_scaling(2.0, dipole_ratio=0.5), 0.5, places=14)
        self.assertAlmostEqual(jxy_scaling(2.0, dipole_ratio=0.3 + 0.4j), 0.5, places=14)
        self.assertAlmostEqual(jxy_scaling(1.0, current_plus=2.0, current_minus=0.5, current_z=2.0), 0.25, places=14)
        self.assertEqual(jxy_scaling(2.0, dipole_ratio=0.0), 0.0)
        with self.assertRaises(DomainError):
            jxy_scaling(1.0, current_z=0.0)
        with self.assertRaises(DomainError):
            jxy_scaling(1.0, omega_ratio=-1.0)


if __name__ == "__main__":
    unittest.main()
