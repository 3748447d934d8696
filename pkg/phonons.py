"""Lattice vibrations: coupling tensors γ^{μν}, Bloch bands, density of states and
finite-lattice normal modes.

γ is expressed in units of Q²/(4πε₀Md³), so a bare frequency ω̄ and a coupling enter
the dynamical matrix as ω̄²·1 + γ. The band scale of family μ is ω₀μ = 1/(2ω̄_μ).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from dipole import dipole_tensor
from electrostatics import GreensEnv
from geometry import (
    FAMILIES,
    SUBLATTICES,
    Family,
    LatticeSpec,
    SiteIndex,
    Sublattice,
    bond_label,
    neighbors,
    reciprocal_vectors,
    rotate_z,
    site_position,
)
from models import ConfigurationError, ConsistencyError, DomainError

log = logging.getLogger(__name__)

DEFAULT_CUTOFF = 8.0
DEFAULT_KGRID = 96
DEFAULT_DOS_BINS = 200
DEFAULT_MAX_SITES = 2000
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class CouplingEntry:
    """γ between the site of sublattice ``source`` in cell (0, 0) and ``target``."""

    source: Sublattice
    target: SiteIndex
    value: float
    separation: np.ndarray


@dataclass
class CouplingTensor:
    lattice: LatticeSpec
    mu: Family
    nu: Family
    cutoff: float
    env: GreensEnv
    entries: list[CouplingEntry] = field(default_factory=list)

    @property
    def is_diagonal_family(self) -> bool:
        return self.mu == self.nu

    def dominant(self) -> CouplingEntry:
        return max(self.entries, key=lambda entry: abs(entry.value))

    def value(self, source: Sublattice, target: SiteIndex) -> float:
        for entry in self.entries:
            if entry.source == source and entry.target == target:
                return entry.value
        return 0.0

    def max_abs(self) -> float:
        return max((abs(entry.value) for entry in self.entries), default=0.0)

    def scaled(self, factor: float) -> "CouplingTensor":
        entries = [
            CouplingEntry(entry.source, entry.target, entry.value * factor, entry.separation)
            for entry in self.entries
        ]
        return CouplingTensor(self.lattice, self.mu, self.nu, self.cutoff, self.env, entries)

    def row_sum(self, source: Sublattice) -> float:
        return sum(abs(entry.value) for entry in self.entries if entry.source == source)

    def as_frame(self) -> pd.DataFrame:
        rows = []
        for entry in self.entries:
            rows.append(
                {
                    "mu": self.mu.value,
                    "nu": self.nu.value,
                    "source": entry.source.value,
                    "target_sublattice": entry.target.sublattice.value,
                    "d_a": entry.target.n_a,
                    "d_b": entry.target.n_b,
                    "dx": float(entry.separation[0]),
                    "dy": float(entry.separation[1]),
                    "distance": float(np.linalg.norm(entry.separation)),
                    "gamma": entry.value,
                }
            )
        return pd.DataFrame(rows)


def default_env(spec: LatticeSpec, abs_tol: float = 1e-12) -> GreensEnv:
    return GreensEnv.for_height(spec.H, abs_tol=abs_tol)


def assemble_gamma(
    spec: LatticeSpec,
    mu: Family,
    nu: Family,
    cutoff: float = DEFAULT_CUTOFF,
    env: GreensEnv | None = None,
) -> CouplingTensor:
    """Translation-invariant couplings γ^{μν} from both sublattices out to ``cutoff``."""
    if cutoff < 1.0:
        raise DomainError(f"coupling cutoff must be at least one bond length, got {cutoff}")
    env = env or default_env(spec)
    mu, nu = Family(mu), Family(nu)

    entries: list[CouplingEntry] = []
    for source in SUBLATTICES:
        origin = SiteIndex(0, 0, source)
        r = site_position(origin, spec)
        m = spec.axis(source, mu)
        for target, separation in neighbors(origin, spec, cutoff):
            rp = site_position(target, spec)
            mp = spec.axis(target.sublattice, nu)
            value = float(m @ dipole_tensor(r, rp, env) @ mp)
            entries.append(CouplingEntry(source, target, value, separation))

    log.info(f"assembled gamma^{mu.value}{nu.value}: {len(entries)} entries within cutoff {cutoff}")
    return CouplingTensor(spec, mu, nu, cutoff, env, entries)


def assemble_all(
    spec: LatticeSpec,
    cutoff: float = DEFAULT_CUTOFF,
    env: GreensEnv | None = None,
    cross: bool = False,
) -> dict[tuple[Family, Family], CouplingTensor]:
    tensors = {}
    for mu in FAMILIES:
        for nu in FAMILIES:
            if mu != nu and not cross:
                continue
            tensors[(mu, nu)] = assemble_gamma(spec, mu, nu, cutoff, env)
    return tensors


def coupling_table(
    spec: LatticeSpec,
    family: Family = Family.X,
    cutoff: float = DEFAULT_CUTOFF,
    env: GreensEnv | None = None,
    tensor: CouplingTensor | None = None,
) -> pd.DataFrame:
    """Couplings of one family as percentages of the dominant nearest-neighbour bond."""
    tensor = tensor or assemble_gamma(spec, family, family, cutoff, env)
    frame = tensor.as_frame()
    dominant = abs(tensor.dominant().value)
    frame["relative"] = frame["gamma"] / dominant
    frame["percent"] = 100.0 * frame["relative"]
    frame["bond"] = [
        (bond_label(entry.separation).value if bond_label(entry.separation) and entry.source != entry.target.sublattice else "")
        for entry in tensor.entries
    ]
    frame["_key"] = (-frame["gamma"].abs()).round(12)
    frame = frame.sort_values(by=["_key", "distance"], kind="stable").drop(columns=["_key"])
    return frame.reset_index(drop=True)


@dataclass(frozen=True)
class LatticePatch:
    n_a: int
    n_b: int
    boundary: str = "open"
    sites: tuple[SiteIndex, ...] = ()

    @classmethod
    def build(cls, n_a: int, n_b: int, boundary: str = "open") -> "LatticePatch":
        if boundary not in ("open", "torus"):
            raise ConfigurationError(f"boundary must be 'open' or 'torus', got {boundary!r}")
        if n_a < 1 or n_b < 1:
            raise ConfigurationError(f"patch needs at least one cell per direction, got {n_a}x{n_b}")
        sites = tuple(
            SiteIndex(i, j, sublattice) for i in range(n_a) for j in range(n_b) for sublattice in SUBLATTICES
        )
        return cls(n_a, n_b, boundary, sites)

    def index(self) -> dict[SiteIndex, int]:
        return {site: position for position, site in enumerate(self.sites)}

    def __len__(self) -> int:
        return len(self.sites)

    def commensurate_k(self, i: int, j: int) -> np.ndarray:
        b1, b2 = reciprocal_vectors()
        return (i / self.n_a) * b1 + (j / self.n_b) * b2


def gamma_matrix(tensor: CouplingTensor, patch: LatticePatch) -> np.ndarray:
    """Dense γ_ij of one family pair on a patch; the torus sums every periodic image."""
    lookup = patch.index()
    size = len(patch)
    matrix = np.zeros((size, size))
    for site in patch.sites:
        i = lookup[site]
        for entry in tensor.entries:
            if entry.source != site.sublattice:
                continue
            n_a = site.n_a + entry.target.n_a
            n_b = site.n_b + entry.target.n_b
            if patch.boundary == "torus":
                n_a %= patch.n_a
                n_b %= patch.n_b
            j = lookup.get(SiteIndex(n_a, n_b, entry.target.sublattice))
            if j is not None:
                matrix[i, j] += entry.value
    return matrix


def bloch_matrix(tensor: CouplingTensor, k: np.ndarray) -> np.ndarray:
    """2×2 (or stacked N×2×2) Bloch sum M_ab(k) = Σ γ e^{ik·(r_j − r_a)}."""
    k_arr = np.atleast_2d(np.asarray(k, dtype=float))[:, :2]
    result = np.zeros((len(k_arr), 2, 2), dtype=complex)
    order = {Sublattice.OPEN: 0, Sublattice.FILLED: 1}
    for a in SUBLATTICES:
        for b in SUBLATTICES:
            chosen = [entry for entry in tensor.entries if entry.source == a and entry.target.sublattice == b]
            if not chosen:
                continue
            separations = np.array([entry.separation[:2] for entry in chosen])
            values = np.array([entry.value for entry in chosen])
            result[:, order[a], order[b]] = np.exp(1j * k_arr @ separations.T) @ values

    asymmetry = np.max(np.abs(result - np.conj(np.transpose(result, (0, 2, 1)))))
    scale = max(1.0, tensor.max_abs())
    if asymmetry > HERMITIAN_TOL * scale * max(1, len(tensor.entries)):
        raise ConsistencyError("bloch_matrix", f"Bloch matrix not Hermitian (deviation {asymmetry:.2e})")
    return result[0] if np.ndim(k) == 1 else result


def uniform_kgrid(n: int = DEFAULT_KGRID) -> np.ndarray:
    """Γ-centred n×n grid over the reciprocal cell."""
    if n < 1:
        raise DomainError(f"k-grid needs at least one point per direction, got {n}")
    b1, b2 = reciprocal_vectors()
    fractions = np.arange(n) / n
    f1, f2 = np.meshgrid(fractions, fractions, indexing="ij")
    return f1.reshape(-1, 1) * b1 + f2.reshape(-1, 1) * b2


def band_path(points_per_segment: int = 60) -> tuple[np.ndarray, list[str]]:
    """Γ–K–M–Γ path through the honeycomb Brillouin zone."""
    b1, b2 = reciprocal_vectors()
    gamma = np.zeros(2)
    k_point = (2.0 * b1 + b2) / 3.0
    m_point = b1 / 2.0
    corners = [gamma, k_point, m_point, gamma]
    path = []
    for start, stop in zip(corners[:-1], corners[1:]):
        for t in np.linspace(0.0, 1.0, points_per_segment, endpoint=False):
            path.append(start + t * (stop - start))
    path.append(gamma)
    return np.array(path), ["G", "K", "M", "G"]


@dataclass
class BandStructure:
    family: Family
    omega_bar: float
    kpoints: np.ndarray
    eigenvalues: np.ndarray
    out_of_phase: np.ndarray

    @property
    def omega0(self) -> float:
        return 1.0 / (2.0 * self.omega_bar)

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(self.omega_bar**2 + self.eigenvalues)

    @property
    def shifts_exact(self) -> np.ndarray:
        """(ω − ω̄) in units of ω₀."""
        return (self.frequencies - self.omega_bar) / self.omega0

    @property
    def shifts_first_order(self) -> np.ndarray:
        return self.eigenvalues / (2.0 * self.omega_bar) / self.omega0

    def band_centers(self) -> np.ndarray:
        return self.shifts_exact.mean(axis=0)

    def half_width(self) -> float:
        """Half the total spread of both bands, in frequency units."""
        frequencies = self.frequencies
        return float(frequencies.max() - frequencies.min()) / 2.0

    def as_frame(self) -> pd.DataFrame:
        frequencies = self.frequencies
        shifts = self.shifts_exact
        return pd.DataFrame(
            {
                "family": self.family.value,
                "kx": self.kpoints[:, 0],
                "ky": self.kpoints[:, 1],
                "omega_lower": frequencies[:, 0],
                "omega_upper": frequencies[:, 1],
                "shift_lower": shifts[:, 0],
                "shift_upper": shifts[:, 1],
                "shift_lower_first_order": self.shifts_first_order[:, 0],
                "shift_upper_first_order": self.shifts_first_order[:, 1],
                "lower_out_of_phase": self.out_of_phase[:, 0],
            }
        )


def bloch_bands(tensor: CouplingTensor, omega_bar: float | None = None, kpoints: np.ndarray | None = None) -> BandStructure:
    if not tensor.is_diagonal_family:
        raise DomainError("bloch_bands: the stiff-limit band construction takes a single-family tensor")
    omega_bar = omega_bar if omega_bar is not None else tensor.lattice.bare_frequencies()[tensor.mu]
    kpoints = uniform_kgrid() if kpoints is None else np.atleast_2d(np.asarray(kpoints, dtype=float))[:, :2]

    matrices = bloch_matrix(tensor, kpoints)
    matrices = np.atleast_3d(matrices).reshape(-1, 2, 2)
    eigenvalues, eigenvectors = np.linalg.eigh(matrices)
    if np.any(omega_bar**2 + eigenvalues < 0.0):
        raise DomainError("bloch_bands: couplings exceed the bare curvature, lattice is unstable")

    overlap = np.real(np.conj(eigenvectors[:, 0, :]) * eigenvectors[:, 1, :])
    log.info(f"bands for family {tensor.mu.value}: {len(kpoints)} k-points, omega_bar={omega_bar:.4g}")
    return BandStructure(tensor.mu, omega_bar, kpoints, eigenvalues, overlap < 0.0)


@dataclass
class DensityOfStates:
    edges: np.ndarray
    weights: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"omega_low": self.edges[:-1], "omega_high": self.edges[1:], "omega": self.centers, "weight": self.weights}
        )


def density_of_states(
    bands: BandStructure | list[BandStructure],
    bins: int = DEFAULT_DOS_BINS,
    scale: float = 1.0,
    value_range: tuple[float, float] | None = None,
) -> DensityOfStates:
    """Normalized histogram of all band frequencies divided by ``scale``."""
    structures = [bands] if isinstance(bands, BandStructure) else list(bands)
    if not structures:
        raise DomainError("density_of_states: no bands given")
    values = np.concatenate([structure.frequencies.ravel() for structure in structures]) / scale
    weights = np.full(values.shape, 1.0 / values.size)
    histogram, edges = np.histogram(values, bins=bins, range=value_range, weights=weights)
    return DensityOfStates(edges, histogram)


@dataclass
class NormalModes:
    """Columns of ``vectors`` are modes; rows run over (site, family) pairs."""

    frequencies: np.ndarray
    vectors: np.ndarray
    sites: tuple[SiteIndex, ...]
    families: tuple[Family, ...]
    bare: dict[Family, float]

    def row(self, site_position: int, family: Family) -> int:
        return site_position * len(self.families) + self.families.index(Family(family))

    def family_weight(self, family: Family) -> np.ndarray:
        rows = [self.row(i, family) for i in range(len(self.sites))]
        return np.sum(self.vectors[rows, :] ** 2, axis=0)


def normal_modes_from_couplings(
    omega_bar: np.ndarray,
    gamma: np.ndarray,
    sites: tuple[SiteIndex, ...] = (),
    families: tuple[Family, ...] = (Family.Z,),
) -> NormalModes:
    omega_bar = np.asarray(omega_bar, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    dynamical = np.diag(omega_bar**2) + gamma
    if not np.allclose(dynamical, dynamical.T, atol=1e-12 * max(1.0, np.max(np.abs(gamma)))):
        raise ConsistencyError("finite_normal_modes", "coupling matrix is not symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(dynamical)
    if eigenvalues[0] < 0.0:
        raise DomainError("finite_normal_modes: couplings exceed the bare curvature, lattice is unstable")
    bare = {family: float(omega_bar[index]) for index, family in enumerate(families) if index < len(omega_bar)}
    return NormalModes(np.sqrt(eigenvalues), eigenvectors, sites, families, bare)


def finite_normal_modes(
    spec: LatticeSpec,
    tensors: CouplingTensor | dict[tuple[Family, Family], CouplingTensor],
    patch: LatticePatch,
    max_sites: int = DEFAULT_MAX_SITES,
    omega_bars: dict[Family, float] | None = None,
) -> NormalModes:
    if len(patch) > max_sites:
        raise ConfigurationError(f"patch has {len(patch)} sites, the limit is {max_sites}")
    if isinstance(tensors, CouplingTensor):
        tensors = {(tensors.mu, tensors.nu): tensors}

    families = tuple(sorted({mu for mu, _ in tensors} | {nu for _, nu in tensors}, key=FAMILIES.index))
    omega_bars = omega_bars or spec.bare_frequencies()
    size = len(patch) * len(families)
    gamma = np.zeros((size, size))
    for (mu, nu), tensor in tensors.items():
        block = gamma_matrix(tensor, patch)
        rows = np.arange(len(patch)) * len(families) + families.index(mu)
        cols = np.arange(len(patch)) * len(families) + families.index(nu)
        gamma[np.ix_(rows, cols)] += block

    diagonal = np.tile([omega_bars[family] for family in families], len(patch))
    log.info(f"diagonalizing {size}x{size} dynamical matrix ({len(patch)} sites, {patch.boundary})")
    modes = normal_modes_from_couplings(diagonal, gamma, patch.sites, families)
    modes.bare = {family: omega_bars[family] for family in families}
    return modes


@dataclass(frozen=True)
class StiffnessReport:
    cross_ratio: float
    band_ratio: float
    cross_threshold: float
    band_threshold: float

    @property
    def cross_ok(self) -> bool:
        return self.cross_ratio < self.cross_threshold

    @property
    def band_ok(self) -> bool:
        return self.band_ratio < self.band_threshold

    @property
    def passed(self) -> bool:
        return self.cross_ok and self.band_ok

    def as_dict(self) -> dict:
        return {
            "cross_family_ratio": self.cross_ratio,
            "band_width_ratio": self.band_ratio,
            "cross_family_threshold": self.cross_threshold,
            "band_width_threshold": self.band_threshold,
            "cross_family_ok": self.cross_ok,
            "band_width_ok": self.band_ok,
            "passed": self.passed,
        }


def stiffness_report(
    spec: LatticeSpec,
    tensors: dict[tuple[Family, Family], CouplingTensor],
    omegas: dict[Family, float] | None = None,
    cross_threshold: float = 0.1,
    band_threshold: float = 0.1,
) -> StiffnessReport:
    """Compare couplings with bare-frequency separations for the stiff trapping limit."""
    omegas = omegas or spec.bare_frequencies()
    cross_ratio = 0.0
    band_ratio = 0.0
    for (mu, nu), tensor in tensors.items():
        strength = tensor.max_abs()
        if mu != nu:
            gap = abs(omegas[mu] ** 2 - omegas[nu] ** 2)
            ratio = math.inf if gap == 0.0 and strength > 0.0 else (0.0 if strength == 0.0 else strength / gap)
            cross_ratio = max(cross_ratio, ratio)
        else:
            gaps = [abs(omegas[mu] ** 2 - omegas[other] ** 2) for other in omegas if other != mu]
            gap = min(gaps) if gaps else math.inf
            ratio = math.inf if gap == 0.0 and strength > 0.0 else (0.0 if strength == 0.0 else strength / gap)
            band_ratio = max(band_ratio, ratio)

    report = StiffnessReport(cross_ratio, band_ratio, cross_threshold, band_threshold)
    if not report.passed:
        log.warning(f"stiff-trapping check failed: cross={cross_ratio:.3g}, band={band_ratio:.3g}")
    return report


def rotate_kpoints(kpoints: np.ndarray, angle: float) -> np.ndarray:
    padded = np.column_stack([kpoints[:, :2], np.zeros(len(kpoints))])
    return np.array([rotate_z(k, angle)[:2] for k in padded])
