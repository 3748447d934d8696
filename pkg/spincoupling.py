"""Effective spin–spin couplings from state-dependent forces on the local vibrations.

A drive on family μ pushes ion i with force p_i = m_i^μ·s^{(i)} (s the sideband vector).
Far detuned from a narrow band, eliminating the phonons leaves

    J_ij = γ_ij cos(φ_i − φ_j) p_i p_j / (16 M ω̄² δ̄²)

with δ̄ = ω̄ − ω_I. The finite-lattice mode sum J_ij = −cos φ_ij Σ_m b_im b_jm/(8 M ω_m δ_m),
δ_m = ω_m − ω_I, is the exact long-time limit; i = j terms are global phases.
Energies are returned in the units of γ·p²/(M ω²), so reduced and SI inputs both work.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd
from scipy import constants

from electrostatics import GreensEnv
from geometry import FAMILIES, Family, LatticeSpec, SiteIndex, Sublattice, bond_label, bond_vectors
from models import ConfigurationError, DomainError
from phonons import (
    DEFAULT_CUTOFF,
    CouplingTensor,
    LatticePatch,
    NormalModes,
    assemble_gamma,
    gamma_matrix,
)
from trap import SIContext
from wires import WireGridSpec, null_gradient

log = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-6
ACTIVE_WEIGHT = 0.5


class DriveKind(str, Enum):
    PHASE_GATE = "phase_gate"
    MOLMER_SORENSEN = "molmer_sorensen"


@dataclass(frozen=True)
class DriveSpec:
    """State-dependent drive on one vibrational family.

    ``sideband`` is either one force vector for every site or a per-sublattice mapping.
    ``site_phases`` holds φ_s per site; missing sites have phase 0.
    ``carrier`` holds c_X, c_Y, c_Z; it is reported but does not enter J.
    """

    family: Family
    detuning: float
    sideband: np.ndarray | dict[Sublattice, np.ndarray] = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    carrier: np.ndarray = field(default_factory=lambda: np.zeros(3))
    site_phases: dict[SiteIndex, float] = field(default_factory=dict)
    kind: DriveKind = DriveKind.PHASE_GATE
    spin_splitting: float | None = None
    basis_phase: float = 0.0
    mass: float = 1.0
    omega_bar: float | None = None

    def __post_init__(self) -> None:
        carrier = np.asarray(self.carrier, dtype=float)
        if carrier.shape != (3,) or not np.all(np.isfinite(carrier)):
            raise DomainError(f"carrier needs three finite entries (X, Y, Z), got {self.carrier!r}")

    @property
    def carrier_magnitude(self) -> float:
        """Largest |c_ℓ|; the field null makes it vanish."""
        return float(np.max(np.abs(np.asarray(self.carrier, dtype=float))))

    def force(self, sublattice: Sublattice) -> np.ndarray:
        if isinstance(self.sideband, dict):
            return np.asarray(self.sideband[Sublattice(sublattice)], dtype=float)
        return np.asarray(self.sideband, dtype=float)

    def projection(self, spec: LatticeSpec, sublattice: Sublattice, family: Family | None = None) -> float:
        axis = spec.axis(sublattice, family or self.family)
        return float(axis @ self.force(sublattice))

    def phase(self, site: SiteIndex) -> float:
        return self.site_phases.get(site, 0.0)

    def bare(self, spec: LatticeSpec) -> float:
        return self.omega_bar if self.omega_bar is not None else spec.bare_frequencies()[Family(self.family)]

    def drive_frequency(self, spec: LatticeSpec) -> float:
        return self.bare(spec) - self.detuning

    def to_dict(self) -> dict:
        data = {
            "family": Family(self.family).value,
            "detuning": self.detuning,
            "kind": DriveKind(self.kind).value,
            "spin_splitting": self.spin_splitting,
            "basis_phase": self.basis_phase,
            "mass": self.mass,
            "omega_bar": self.omega_bar,
            "carrier": list(map(float, self.carrier)),
        }
        if isinstance(self.sideband, dict):
            data["sideband"] = {Sublattice(key).value: list(map(float, value)) for key, value in self.sideband.items()}
        else:
            data["sideband"] = list(map(float, self.sideband))
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DriveSpec":
        sideband = data.get("sideband", [0.0, 0.0, 1.0])
        if isinstance(sideband, dict):
            sideband = {Sublattice(key): np.asarray(value, dtype=float) for key, value in sideband.items()}
        else:
            sideband = np.asarray(sideband, dtype=float)
        return cls(
            family=Family(data["family"]),
            detuning=float(data["detuning"]),
            sideband=sideband,
            carrier=np.asarray(data.get("carrier", [0.0, 0.0, 0.0]), dtype=float),
            kind=DriveKind(data.get("kind", DriveKind.PHASE_GATE.value)),
            spin_splitting=data.get("spin_splitting"),
            basis_phase=float(data.get("basis_phase", 0.0)),
            mass=float(data.get("mass", 1.0)),
            omega_bar=None if data.get("omega_bar") is None else float(data["omega_bar"]),
        )


@dataclass
class JMatrix:
    family: Family
    values: np.ndarray
    sites: tuple[SiteIndex, ...]
    global_phase: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def pair(self, i: SiteIndex, j: SiteIndex) -> float:
        lookup = {site: index for index, site in enumerate(self.sites)}
        return float(self.values[lookup[i], lookup[j]])

    def as_frame(self) -> pd.DataFrame:
        rows = []
        for i, site_i in enumerate(self.sites):
            for j in range(i + 1, len(self.sites)):
                if self.values[i, j] != 0.0:
                    rows.append({"i": site_i.label(), "j": self.sites[j].label(), "J": self.values[i, j]})
        return pd.DataFrame(rows, columns=["i", "j", "J"])


def quantization_frame(z_axis: np.ndarray) -> np.ndarray:
    """Right-handed (X̂, Ŷ, Ẑ) rows with the given Ẑ."""
    z_hat = np.asarray(z_axis, dtype=float)
    z_hat = z_hat / np.linalg.norm(z_hat)
    helper = np.array([0.0, 0.0, 1.0]) if abs(z_hat[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    x_hat = helper - (helper @ z_hat) * z_hat
    x_hat /= np.linalg.norm(x_hat)
    y_hat = np.cross(z_hat, x_hat)
    return np.array([x_hat, y_hat, z_hat])


def magnetic_sideband_vectors(
    field_value: np.ndarray,
    gradient: np.ndarray,
    frame: np.ndarray,
    g_factor: float = 1.0,
    magneton: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Carrier c_ℓ = −gμ_B ê_ℓ·B and sideband s_ℓ = −gμ_B ∇(ê_ℓ·B) for ℓ = X, Y, Z.

    ``gradient[i, j]`` is ∂_i B_j; rows of the returned sideband array follow the frame.
    """
    field_value = np.asarray(field_value, dtype=float)
    gradient = np.asarray(gradient, dtype=float)
    carriers = -g_factor * magneton * (frame @ field_value)
    sidebands = -g_factor * magneton * (gradient @ frame.T).T
    return sidebands, carriers


def _drive_omega(tensor: CouplingTensor, drive: DriveSpec) -> float:
    if Family(drive.family) != tensor.mu:
        raise DomainError(f"drive on family {drive.family} applied to a gamma^{tensor.mu.value} tensor")
    return drive.bare(tensor.lattice)


def pair_coupling(gamma: float, phase: float, p_i: float, p_j: float, mass: float, omega_bar: float, detuning: float) -> float:
    if detuning == 0.0:
        raise DomainError("j_perturbative: zero detuning")
    return gamma * math.cos(phase) * p_i * p_j / (16.0 * mass * omega_bar**2 * detuning**2)


def bond_couplings(tensor: CouplingTensor, drive: DriveSpec, phases: dict | None = None) -> list[tuple]:
    """Perturbative J for every tensor entry as (entry, phase, J)."""
    omega_bar = _drive_omega(tensor, drive)
    spec = tensor.lattice
    result = []
    for entry in tensor.entries:
        key = (entry.source, entry.target.n_a, entry.target.n_b, entry.target.sublattice)
        if phases and key in phases:
            phase = phases[key]
        else:
            phase = drive.phase(SiteIndex(0, 0, entry.source)) - drive.phase(entry.target)
        p_i = drive.projection(spec, entry.source)
        p_j = drive.projection(spec, entry.target.sublattice)
        value = pair_coupling(entry.value, phase, p_i, p_j, drive.mass, omega_bar, drive.detuning)
        result.append((entry, phase, value))
    return result


def j_perturbative(tensor: CouplingTensor, drive: DriveSpec, patch: LatticePatch) -> JMatrix:
    omega_bar = _drive_omega(tensor, drive)
    spec = tensor.lattice
    gamma = gamma_matrix(tensor, patch)
    projections = np.array([drive.projection(spec, site.sublattice) for site in patch.sites])
    phases = np.array([drive.phase(site) for site in patch.sites])
    if drive.detuning == 0.0:
        raise DomainError("j_perturbative: zero detuning")

    values = gamma * np.cos(phases[:, None] - phases[None, :]) * np.outer(projections, projections)
    values /= 16.0 * drive.mass * omega_bar**2 * drive.detuning**2
    np.fill_diagonal(values, 0.0)
    return JMatrix(Family(drive.family), values, patch.sites, np.zeros(len(patch)), {"omega_bar": omega_bar})


def _mode_forces(modes: NormalModes, drive: DriveSpec, spec: LatticeSpec) -> np.ndarray:
    """b_im = Σ_μ O_{iμ,m} (m_i^μ·s_i), one row per site."""
    n_sites = len(modes.sites)
    forces = np.zeros((n_sites, modes.vectors.shape[1]))
    for position, site in enumerate(modes.sites):
        for family in modes.families:
            row = modes.row(position, family)
            forces[position] += modes.vectors[row] * drive.projection(spec, site.sublattice, family)
    return forces


def _mode_detunings(modes: NormalModes, drive: DriveSpec, spec: LatticeSpec) -> np.ndarray:
    omega_bar = drive.omega_bar if drive.omega_bar is not None else modes.bare.get(Family(drive.family), drive.bare(spec))
    detunings = modes.frequencies - (omega_bar - drive.detuning)
    if np.any(detunings == 0.0):
        raise DomainError("drive is exactly resonant with a normal mode")
    return detunings


def active_modes(modes: NormalModes, family: Family) -> np.ndarray:
    if len(modes.families) == 1:
        return np.ones(len(modes.frequencies), dtype=bool)
    return modes.family_weight(family) > ACTIVE_WEIGHT


def j_exact_modesum(modes: NormalModes, drive: DriveSpec, spec: LatticeSpec, bands: str = "active") -> JMatrix:
    if bands not in ("active", "all"):
        raise ConfigurationError(f"bands must be 'active' or 'all', got {bands!r}")
    forces = _mode_forces(modes, drive, spec)
    detunings = _mode_detunings(modes, drive, spec)
    active = active_modes(modes, drive.family)
    chosen = active if bands == "active" else np.ones_like(active)

    weights = np.where(chosen, 1.0 / (8.0 * drive.mass * modes.frequencies * detunings), 0.0)
    phases = np.array([drive.phase(site) for site in modes.sites])
    full = -np.cos(phases[:, None] - phases[None, :]) * ((forces * weights) @ forces.T)

    leak_weights = np.where(active, 0.0, 1.0 / (8.0 * drive.mass * modes.frequencies * detunings))
    leakage = (forces * leak_weights) @ forces.T
    target = (forces * np.where(active, weights, 0.0)) @ forces.T
    np.fill_diagonal(leakage, 0.0)
    np.fill_diagonal(target, 0.0)
    leakage_ratio = float(np.max(np.abs(leakage)) / np.max(np.abs(target))) if np.any(target) else 0.0

    global_phase = np.diag(full).copy()
    values = full.copy()
    np.fill_diagonal(values, 0.0)
    diagnostics = {
        "bands": bands,
        "modes_used": int(np.sum(chosen)),
        "min_abs_detuning": float(np.min(np.abs(detunings[chosen]))),
        "off_target_leakage": leakage_ratio,
    }
    return JMatrix(Family(drive.family), values, modes.sites, global_phase, diagnostics)


def j_modesum_first_order(modes: NormalModes, drive: DriveSpec, spec: LatticeSpec) -> JMatrix:
    """Mode sum with 1/(ω_mδ_m) replaced by its first-order expansion about ω̄, δ̄."""
    omega_bar = drive.omega_bar if drive.omega_bar is not None else modes.bare.get(Family(drive.family), drive.bare(spec))
    delta = drive.detuning
    if delta == 0.0:
        raise DomainError("j_modesum_first_order: zero detuning")
    forces = _mode_forces(modes, drive, spec)
    expansion = (1.0 / omega_bar) * (1.0 / delta - (modes.frequencies**2 - omega_bar**2) / (2.0 * omega_bar * delta**2))
    phases = np.array([drive.phase(site) for site in modes.sites])
    full = -np.cos(phases[:, None] - phases[None, :]) * ((forces * expansion) @ forces.T) / (8.0 * drive.mass)
    global_phase = np.diag(full).copy()
    np.fill_diagonal(full, 0.0)
    return JMatrix(Family(drive.family), full, modes.sites, global_phase, {"order": 1})


def next_order_estimate(frequencies: np.ndarray, omega_bar: float, detuning: float) -> float:
    """Relative size of the first neglected terms in the 1/δ̄ and δ̄/ω̄ expansions."""
    if detuning == 0.0:
        raise DomainError("next_order_estimate: zero detuning")
    spread = float(np.max(np.abs(np.asarray(frequencies) - omega_bar)))
    return spread / abs(detuning) + abs(detuning) / omega_bar


@dataclass
class OmegaTable:
    values: np.ndarray
    detunings: np.ndarray
    frequencies: np.ndarray

    def max_ratio(self) -> float:
        return float(np.max(np.abs(self.values / self.detunings[None, :])))


def omega_table(modes: NormalModes, drive: DriveSpec, spec: LatticeSpec, hbar: float = 1.0) -> OmegaTable:
    """Ω_im = q₀m b_im/(2ħ) with q₀m² = ħ/(2Mω_m)."""
    forces = _mode_forces(modes, drive, spec)
    q0 = np.sqrt(hbar / (2.0 * drive.mass * modes.frequencies))
    values = forces * q0[None, :] / (2.0 * hbar)
    return OmegaTable(values, _mode_detunings(modes, drive, spec), modes.frequencies)


@dataclass(frozen=True)
class DisplacementReport:
    amplitudes: np.ndarray
    max_ratio: float

    @property
    def max_amplitude(self) -> float:
        return float(np.max(self.amplitudes))


def displacement_amplitudes(table: OmegaTable, t: float) -> DisplacementReport:
    """|α_m(t)| = |Ω_·m| |1 − e^{iδ_m t}|/|δ_m| per mode."""
    if np.any(table.detunings == 0.0):
        raise DomainError("displacement_amplitudes: resonant mode")
    loop = np.abs(1.0 - np.exp(1j * table.detunings * t)) / np.abs(table.detunings)
    strength = np.linalg.norm(table.values, axis=0)
    return DisplacementReport(strength * loop, table.max_ratio())


def phase_factor(delta: float, t: float) -> float:
    """Accumulated geometric-phase factor (δt − sin δt)/δ²; tends to t/δ."""
    if delta == 0.0:
        raise DomainError("phase_factor: zero detuning")
    return (delta * t - math.sin(delta * t)) / delta**2


def gershgorin_half_width(tensor: CouplingTensor, omega_bar: float) -> float:
    return max(tensor.row_sum(sublattice) for sublattice in (Sublattice.OPEN, Sublattice.FILLED)) / (2.0 * omega_bar)


def default_detunings(spec: LatticeSpec, tensors: dict[Family, CouplingTensor], factor: float = 2.0) -> dict[Family, float]:
    """``factor`` band half-widths, on the side of the band facing away from the nearest other family."""
    omegas = spec.bare_frequencies()
    detunings = {}
    for family, tensor in tensors.items():
        magnitude = factor * gershgorin_half_width(tensor, omegas[family])
        others = [omega for other, omega in omegas.items() if other != family]
        nearest = min(others, key=lambda omega: abs(omega - omegas[family])) if others else 0.0
        # δ̄ > 0 puts the drive below the band
        detunings[family] = magnitude if nearest > omegas[family] else -magnitude
    return detunings


def check_drive_collisions(spec: LatticeSpec, drives: dict[Family, DriveSpec], tensors: dict[Family, CouplingTensor]) -> None:
    """Every drive must stay farther from the other bands than from its own band centre."""
    omegas = spec.bare_frequencies()
    widths = {family: gershgorin_half_width(tensor, omegas[family]) for family, tensor in tensors.items()}
    for family, drive in drives.items():
        drive_frequency = drive.drive_frequency(spec)
        for other, omega in omegas.items():
            if other == family:
                continue
            clearance = abs(drive_frequency - omega) - widths.get(other, 0.0)
            if clearance <= abs(drive.detuning):
                raise ConfigurationError(
                    f"drive on {family.value} at {drive_frequency:.6g} collides with band {other.value} "
                    f"(clearance {clearance:.3g} <= detuning {abs(drive.detuning):.3g})"
                )


@dataclass
class KitaevTable:
    frame: pd.DataFrame
    nearest: dict[Family, float]

    def relative(self, family: Family, source: Sublattice, d_a: int, d_b: int, target: Sublattice) -> float:
        frame = self.frame
        mask = (
            (frame["family"] == Family(family).value)
            & (frame["source"] == Sublattice(source).value)
            & (frame["d_a"] == d_a)
            & (frame["d_b"] == d_b)
            & (frame["target_sublattice"] == Sublattice(target).value)
        )
        return float(frame.loc[mask, "relative"].iloc[0])


def kitaev_effective_hamiltonian(
    spec: LatticeSpec,
    drives: dict[Family, DriveSpec],
    cutoff: float = DEFAULT_CUTOFF,
    env: GreensEnv | None = None,
    bond_phases: dict[Family, dict[tuple, float]] | None = None,
    tensors: dict[Family, CouplingTensor] | None = None,
) -> KitaevTable:
    """Coupling table of the effective spin model, normalized per family by its own bond.

    ``bond_phases`` maps (source, d_a, d_b, target) to φ_s^{ij} for that pair.
    """
    tensors = tensors or {family: assemble_gamma(spec, family, family, cutoff, env) for family in FAMILIES}
    check_drive_collisions(spec, drives, tensors)
    bonds = bond_vectors()

    rows = []
    nearest = {}
    for family, drive in drives.items():
        couplings = bond_couplings(tensors[family], drive, (bond_phases or {}).get(family))
        own = [
            value
            for entry, _, value in couplings
            if entry.source == Sublattice.OPEN and np.allclose(entry.separation[:2], bonds[family][:2], atol=1e-9)
        ]
        nearest[family] = own[0]
        for entry, phase, value in couplings:
            label = bond_label(entry.separation) if entry.source != entry.target.sublattice else None
            rows.append(
                {
                    "family": family.value,
                    "source": entry.source.value,
                    "target_sublattice": entry.target.sublattice.value,
                    "d_a": entry.target.n_a,
                    "d_b": entry.target.n_b,
                    "dx": float(entry.separation[0]),
                    "dy": float(entry.separation[1]),
                    "distance": float(np.linalg.norm(entry.separation[:2])),
                    "gamma": entry.value,
                    "phase": phase,
                    "J": value,
                    "relative": value / own[0],
                    "bond": label.value if label else "",
                }
            )
    frame = pd.DataFrame(rows)
    log.info(f"kitaev table: {len(frame)} couplings for families {[family.value for family in drives]}")
    return KitaevTable(frame, nearest)


@dataclass(frozen=True)
class EntanglementCheck:
    ratio: float
    passes: bool
    at_boundary: bool

    def as_dict(self) -> dict:
        return {"ratio": self.ratio, "passes": self.passes, "at_boundary": self.at_boundary}


def entanglement_bound_check(j: float, detuning: float, hbar: float = 1.0, tol: float = BOUNDARY_TOL) -> EntanglementCheck:
    """|J/(ħδ̄)| must stay below one to keep spins and phonons disentangled."""
    if detuning == 0.0:
        raise DomainError("entanglement_bound_check: zero detuning")
    ratio = abs(j / (hbar * detuning))
    return EntanglementCheck(ratio, ratio < 1.0, abs(ratio - 1.0) <= tol)


def closed_form_ratio(current: float, detuning_hz: float, coefficient_hz: float) -> float:
    """|J/(ħδ̄)| at the wire design point for J/h = coefficient·I²·x⁻², x = δ̄/(2π kHz)."""
    x = detuning_hz / 1e3
    return coefficient_hz * current**2 / (1e3 * x**3)


def kitaev_jz_coefficient(
    ctx: SIContext | None = None,
    wires: WireGridSpec | None = None,
    spec: LatticeSpec | None = None,
    omega_bar_hz: float = 5e6,
    detuning_hz: float = 1e3,
    g_factor: float = 1.0,
) -> float:
    """J_Z/h in Hz for 1 A of blue-wire current at the field null."""
    ctx = ctx or SIContext()
    spec = spec or LatticeSpec()
    depth = (wires.depth / wires.d) if wires is not None else math.sqrt(3.0) / 2.0
    i_blue = wires.i_blue if wires is not None else 1.0

    gradient = null_gradient(depth * ctx.d, ctx.d, i_blue, constants.mu_0)
    frame = quantization_frame(bond_vectors()[Family.Z])
    bohr = constants.physical_constants["Bohr magneton"][0]
    sidebands, carriers = magnetic_sideband_vectors(np.zeros(3), gradient, frame, g_factor, bohr)

    tensor = assemble_gamma(spec, Family.Z, Family.Z, cutoff=1.5).scaled(ctx.gamma_unit)
    gamma = tensor.value(Sublattice.OPEN, SiteIndex(-1, -1, Sublattice.FILLED))
    drive = DriveSpec(
        Family.Z,
        detuning=2.0 * math.pi * detuning_hz,
        sideband=sidebands[2],
        carrier=carriers,
        mass=ctx.mass,
        omega_bar=2.0 * math.pi * omega_bar_hz,
    )
    p_open = drive.projection(spec, Sublattice.OPEN)
    p_filled = drive.projection(spec, Sublattice.FILLED)
    energy = pair_coupling(gamma, 0.0, p_open, p_filled, ctx.mass, drive.omega_bar, drive.detuning)
    coefficient = energy / constants.h
    log.info(f"J_Z coefficient {coefficient:.1f} Hz at 1 A, carriers {drive.carrier_magnitude:.2e}")
    return coefficient


def jxy_scaling(
    j_z: float,
    omega_ratio: float = 1.0,
    dipole_ratio: complex = 1.0,
    current_plus: float = 1.0,
    current_minus: float = 1.0,
    current_z: float = 1.0,
) -> float:
    """J_X or J_Y of a π-transition Mølmer–Sørensen drive, scaled from J_Z.

    ``omega_ratio`` is ω̄_Z/ω̄_{X/Y}, i.e. |q̄₀_{X/Y}/q̄₀_Z|². ``dipole_ratio`` is
    (μ_d·Ẑ)/(gμ_B). The two sideband tones at ω_↑↓ ± ω̄_{X/Y} carry ``current_plus`` and
    ``current_minus``; ``current_z`` is the Z-drive amplitude behind ``j_z``.
    """
    if current_z == 0.0:
        raise DomainError("jxy_scaling: the Z-drive current must be nonzero")
    if not omega_ratio > 0.0:
        raise DomainError(f"jxy_scaling: frequency ratio must be positive, got {omega_ratio}")
    return j_z * omega_ratio * abs(dipole_ratio) ** 2 * current_plus * current_minus / current_z**2


@dataclass(frozen=True)
class PhaseCheck:
    gapped: bool
    isotropic_xy: bool
    plaquette_coupling: float

    def as_dict(self) -> dict:
        return {"gapped": self.gapped, "isotropic_xy": self.isotropic_xy, "plaquette_coupling": self.plaquette_coupling}


def gapped_phase_check(j_x: float, j_y: float, j_z: float, tol: float = 1e-9) -> PhaseCheck:
    """Gapped abelian phase when |J_Z| > |J_X| + |J_Y|; reports J_X²J_Y²/(16|J_Z|³)."""
    if j_z == 0.0:
        raise DomainError("gapped_phase_check: J_Z must be nonzero")
    gapped = abs(j_z) > abs(j_x) + abs(j_y) + tol * abs(j_z)
    isotropic = math.isclose(abs(j_x), abs(j_y), rel_tol=tol, abs_tol=tol * abs(j_z))
    plaquette = j_x**2 * j_y**2 / (16.0 * abs(j_z) ** 3)
    return PhaseCheck(gapped, isotropic, plaquette)
