"""Honeycomb lattice geometry in reduced units (nearest-neighbour distance d = 1).

Lab frame: electrode plane at z = 0, ions at height h. The ∘ ("open") sublattice sits
on the cell origins, the • ("filled") sublattice is offset by (√3, 1). All three bond
vectors point from an open site to its filled neighbours.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from models import DomainError

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

AXIS_TOLERANCE = 1e-12


class Sublattice(str, Enum):
    OPEN = "open"
    FILLED = "filled"


class Family(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


FAMILIES = (Family.X, Family.Y, Family.Z)
SUBLATTICES = (Sublattice.OPEN, Sublattice.FILLED)

CELL_A = np.array([SQRT3, 0.0, 0.0])
CELL_B = np.array([SQRT3 / 2.0, 1.5, 0.0])


@dataclass(frozen=True)
class BondVectors:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __getitem__(self, family: Family) -> np.ndarray:
        return {Family.X: self.x, Family.Y: self.y, Family.Z: self.z}[Family(family)]

    def items(self) -> list[tuple[Family, np.ndarray]]:
        return [(Family.X, self.x), (Family.Y, self.y), (Family.Z, self.z)]


def bond_vectors() -> BondVectors:
    return BondVectors(
        x=np.array([0.0, 1.0, 0.0]),
        y=np.array([SQRT3 / 2.0, -0.5, 0.0]),
        z=np.array([-SQRT3 / 2.0, -0.5, 0.0]),
    )


def default_axes() -> dict[Sublattice, dict[Family, np.ndarray]]:
    # every axis tilts out of the plane by the same angle, (m · ẑ) = 1/√3
    return {
        Sublattice.OPEN: {
            Family.X: np.array([0.0, 2.0, SQRT2]) / SQRT6,
            Family.Y: np.array([SQRT3, -1.0, SQRT2]) / SQRT6,
            Family.Z: np.array([-SQRT3, -1.0, SQRT2]) / SQRT6,
        },
        Sublattice.FILLED: {
            Family.X: np.array([0.0, -2.0, SQRT2]) / SQRT6,
            Family.Y: np.array([-SQRT3, 1.0, SQRT2]) / SQRT6,
            Family.Z: np.array([SQRT3, 1.0, SQRT2]) / SQRT6,
        },
    }


def default_frequency_ratio() -> tuple[float, float, float]:
    return (1.0 / GOLDEN_RATIO, 1.0, GOLDEN_RATIO)


@dataclass(frozen=True)
class SiteIndex:
    n_a: int
    n_b: int
    sublattice: Sublattice

    def shifted(self, d_a: int, d_b: int) -> "SiteIndex":
        return SiteIndex(self.n_a + d_a, self.n_b + d_b, self.sublattice)

    def label(self) -> str:
        mark = "o" if self.sublattice == Sublattice.OPEN else "*"
        return f"({self.n_a},{self.n_b},{mark})"


@dataclass(frozen=True)
class LatticeSpec:
    """Honeycomb trap lattice.

    ``omega_mean`` is the geometric mean of the three bare frequencies in reduced units
    (γ unit Q²/(4πε₀Md³) = 1). The default 5.0 makes ω₀Y/ω̄ = 0.02.
    """

    h: float = 0.5
    H: float = math.inf
    frequency_ratio: tuple[float, float, float] = field(default_factory=default_frequency_ratio)
    omega_mean: float = 5.0
    axes: dict[Sublattice, dict[Family, np.ndarray]] = field(default_factory=default_axes)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise DomainError(f"trap height h must be positive and finite, got {self.h}")
        if not self.H > self.h:
            raise DomainError(f"cover height H={self.H} must exceed the trap height h={self.h}")
        if len(self.frequency_ratio) != 3 or min(self.frequency_ratio) <= 0.0:
            raise DomainError(f"frequency ratio needs three positive entries, got {self.frequency_ratio}")
        if not self.omega_mean > 0.0:
            raise DomainError(f"omega_mean must be positive, got {self.omega_mean}")
        for sublattice in SUBLATTICES:
            triad = np.array([self.axes[sublattice][family] for family in FAMILIES], dtype=float)
            if triad.shape != (3, 3):
                raise DomainError(f"axes for {sublattice.value} must be three 3-vectors")
            deviation = np.max(np.abs(triad @ triad.T - np.eye(3)))
            if deviation > AXIS_TOLERANCE:
                raise DomainError(f"axes for {sublattice.value} are not orthonormal (deviation {deviation:.2e})")

    @property
    def has_cover(self) -> bool:
        return math.isfinite(self.H)

    def bare_frequencies(self) -> dict[Family, float]:
        geometric_mean = float(np.prod(self.frequency_ratio)) ** (1.0 / 3.0)
        scale = self.omega_mean / geometric_mean
        return {family: scale * ratio for family, ratio in zip(FAMILIES, self.frequency_ratio)}

    def axis(self, sublattice: Sublattice, family: Family) -> np.ndarray:
        return np.asarray(self.axes[Sublattice(sublattice)][Family(family)], dtype=float)

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "H": None if not self.has_cover else self.H,
            "frequency_ratio": list(self.frequency_ratio),
            "omega_mean": self.omega_mean,
            "axes": {
                sublattice.value: {family.value: self.axis(sublattice, family).tolist() for family in FAMILIES}
                for sublattice in SUBLATTICES
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeSpec":
        kwargs: dict = {}
        if "h" in data:
            kwargs["h"] = float(data["h"])
        if "H" in data:
            kwargs["H"] = math.inf if data["H"] is None else float(data["H"])
        if "frequency_ratio" in data:
            kwargs["frequency_ratio"] = tuple(float(v) for v in data["frequency_ratio"])
        if "omega_mean" in data:
            kwargs["omega_mean"] = float(data["omega_mean"])
        if "axes" in data:
            axes = default_axes()
            for sub_key, per_family in data["axes"].items():
                for fam_key, vector in per_family.items():
                    axes[Sublattice(sub_key)][Family(fam_key)] = np.asarray(vector, dtype=float)
            kwargs["axes"] = axes
        return cls(**kwargs)


def sublattice_offset(sublattice: Sublattice) -> np.ndarray:
    if sublattice == Sublattice.OPEN:
        return np.zeros(3)
    return np.array([SQRT3, 1.0, 0.0])


def site_position(idx: SiteIndex, spec: LatticeSpec) -> np.ndarray:
    horizontal = idx.n_a * CELL_A + idx.n_b * CELL_B + sublattice_offset(idx.sublattice)
    return horizontal + np.array([0.0, 0.0, spec.h])


def neighbors(idx: SiteIndex, spec: LatticeSpec, cutoff: float) -> list[tuple[SiteIndex, np.ndarray]]:
    """All sites within ``cutoff`` of ``idx`` sorted by distance, excluding ``idx``."""
    if cutoff <= 0.0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")

    origin = site_position(idx, spec)
    window = math.ceil(cutoff) + 2
    found: list[tuple[float, float, SiteIndex, np.ndarray]] = []
    for d_a in range(-window, window + 1):
        for d_b in range(-window, window + 1):
            for sublattice in SUBLATTICES:
                other = SiteIndex(idx.n_a + d_a, idx.n_b + d_b, sublattice)
                if other == idx:
                    continue
                separation = site_position(other, spec) - origin
                distance = float(np.linalg.norm(separation))
                if distance <= cutoff:
                    angle = math.atan2(separation[1], separation[0])
                    found.append((round(distance, 9), angle, other, separation))
    found.sort(key=lambda item: (item[0], item[1]))
    return [(other, separation) for _, _, other, separation in found]


def rotate_z(vector: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return rotation @ np.asarray(vector, dtype=float)


def bond_label(separation: np.ndarray, tol: float = 1e-9) -> Family | None:
    """Bond family of a nearest-neighbour separation taken from an open site, else None."""
    horizontal = np.asarray(separation, dtype=float).copy()
    horizontal[2] = 0.0
    for family, vector in bond_vectors().items():
        if np.allclose(horizontal, vector, atol=tol) or np.allclose(horizontal, -vector, atol=tol):
            return family
    return None


def patch_sites(n_a: int, n_b: int) -> list[SiteIndex]:
    return [
        SiteIndex(i, j, sublattice)
        for i in range(n_a)
        for j in range(n_b)
        for sublattice in SUBLATTICES
    ]


def reciprocal_vectors() -> tuple[np.ndarray, np.ndarray]:
    """Reciprocal basis (2D) with a_i · b_j = 2π δ_ij."""
    basis = np.array([CELL_A[:2], CELL_B[:2]])
    reciprocal = 2.0 * math.pi * np.linalg.inv(basis).T
    return reciprocal[0], reciprocal[1]
