"""Surface-electrode pseudopotentials for cell-periodic rf patterns, plus the SI unit layer.

Lengths are in units of d and electrode potentials in units of U_rf. The rf electrode
is a union of polygons (weights allow holes); everything else, including the cover
plane, is grounded for the rf field.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import constants, optimize

from electrostatics import surface_greens_fourier, surface_greens_fourier_dz
from geometry import CELL_A, CELL_B, SQRT3
from models import ConvergenceError, DomainError

log = logging.getLogger(__name__)

DEFAULT_FOURIER_TOL = 1e-6
DEFAULT_MAX_VECTORS = 200_000
BERYLLIUM_MASS = 9.0 * constants.atomic_mass


@dataclass(frozen=True)
class SIContext:
    """Ion species and trap drive; defaults describe ⁹Be⁺ at d = 30 µm."""

    charge: float = constants.e
    mass: float = BERYLLIUM_MASS
    d: float = 30e-6
    u_rf: float = 50.0
    omega_rf: float = 2.0 * math.pi * 200e6
    cover_ratio: float = 50.0

    def __post_init__(self) -> None:
        for name in ("charge", "mass", "d", "u_rf", "omega_rf", "cover_ratio"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"SIContext.{name} must be positive, got {getattr(self, name)}")

    @property
    def cover_height(self) -> float:
        return self.cover_ratio * self.d

    def trap_cover_height(self, H: float = math.inf) -> float:
        """Cover height in units of d for the rf model; a finite lattice H takes precedence."""
        if math.isfinite(H):
            return H
        return self.cover_height / self.d

    @property
    def energy_pp(self) -> float:
        """E_pp = Q²U_rf²/(4MΩ_rf²d²) in joules."""
        return self.charge**2 * self.u_rf**2 / (4.0 * self.mass * self.omega_rf**2 * self.d**2)

    @property
    def energy_pp_ev(self) -> float:
        return self.energy_pp / constants.electron_volt

    @property
    def energy_pp_kelvin(self) -> float:
        return self.energy_pp / constants.k

    @property
    def voltage_pp(self) -> float:
        return self.energy_pp / self.charge

    @property
    def gamma_unit(self) -> float:
        """Q²/(4πε₀Md³) in s⁻²; multiplies reduced couplings γ."""
        return self.charge**2 / (4.0 * math.pi * constants.epsilon_0 * self.mass * self.d**3)

    def omega0(self, omega_bar: float) -> float:
        """Band scale ω₀ = Q²/(8πε₀ω̄Md³) in rad/s."""
        return self.gamma_unit / (2.0 * omega_bar)

    @property
    def stiff_frequency_bound(self) -> float:
        """√(Q²/(8πε₀Md³)); bare frequencies must lie far above it."""
        return math.sqrt(self.gamma_unit / 2.0)

    def to_dict(self) -> dict:
        return {
            "charge": self.charge,
            "mass": self.mass,
            "d": self.d,
            "u_rf": self.u_rf,
            "omega_rf": self.omega_rf,
            "cover_ratio": self.cover_ratio,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SIContext":
        defaults = cls()
        return cls(**{key: float(data.get(key, value)) for key, value in defaults.to_dict().items()})


@dataclass(frozen=True)
class Polygon:
    vertices: np.ndarray
    weight: float = 1.0

    @property
    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0.0 and d3 * d4 < 0.0


def check_simple(vertices: np.ndarray) -> None:
    count = len(vertices)
    if count < 3:
        raise DomainError(f"electrode polygon needs at least 3 vertices, got {count}")
    edges = [(vertices[i], vertices[(i + 1) % count]) for i in range(count)]
    for i in range(count):
        for j in range(i + 2, count):
            if i == 0 and j == count - 1:
                continue
            if _segments_cross(*edges[i], *edges[j]):
                raise DomainError(f"electrode polygon is self-intersecting (edges {i} and {j})")


@dataclass(frozen=True)
class ElectrodePattern:
    a: np.ndarray
    b: np.ndarray
    polygons: tuple[Polygon, ...] = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self) -> None:
        if abs(self.cell_area) < 1e-12:
            raise DomainError("electrode pattern: degenerate unit cell")
        for polygon in self.polygons:
            check_simple(polygon.vertices)

    @property
    def cell_area(self) -> float:
        return float(self.a[0] * self.b[1] - self.a[1] * self.b[0])

    def reciprocal(self) -> tuple[np.ndarray, np.ndarray]:
        basis = np.array([self.a[:2], self.b[:2]], dtype=float)
        reciprocal = 2.0 * math.pi * np.linalg.inv(basis).T
        return reciprocal[0], reciprocal[1]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "cell": [list(map(float, self.a[:2])), list(map(float, self.b[:2]))],
            "polygons": [
                {"weight": polygon.weight, "vertices": polygon.vertices.tolist()} for polygon in self.polygons
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ElectrodePattern":
        try:
            a, b = (np.asarray(vector, dtype=float) for vector in data["cell"])
            polygons = tuple(
                Polygon(np.asarray(item["vertices"], dtype=float), float(item.get("weight", 1.0)))
                for item in data["polygons"]
            )
        except KeyError as exc:
            raise DomainError(f"electrode pattern is missing field {exc}") from exc
        return cls(a, b, polygons, str(data.get("label", "")))


def regular_polygon(center: np.ndarray, radius: float, sides: int, rotation: float = 0.0) -> np.ndarray:
    angles = rotation + 2.0 * math.pi * np.arange(sides) / sides
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])


def example_pattern(outer: float = 0.45, inner: float = 0.1) -> ElectrodePattern:
    """Illustrative honeycomb pattern: a hexagonal rf ring around every lattice site.

    Each ring has an rf null on its axis, giving one trap per site.
    """
    polygons = []
    for center in (np.zeros(2), np.array([SQRT3, 1.0])):
        polygons.append(Polygon(regular_polygon(center, outer, 6, math.pi / 6.0), 1.0))
        polygons.append(Polygon(regular_polygon(center, inner, 6, math.pi / 6.0), -1.0))
    return ElectrodePattern(CELL_A[:2].copy(), CELL_B[:2].copy(), tuple(polygons), "hexagonal rings")


def polygon_fourier(vertices: np.ndarray, k: np.ndarray) -> np.ndarray:
    """∫_polygon e^{−ik·r} d²r for each row of ``k``, by exact per-edge integrals."""
    vertices = np.asarray(vertices, dtype=float)
    k = np.atleast_2d(np.asarray(k, dtype=float))
    start = vertices
    stop = np.roll(vertices, -1, axis=0)
    edges = stop - start
    midpoints = 0.5 * (start + stop)
    x, y = vertices[:, 0], vertices[:, 1]
    signed = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    orientation = 1.0 if signed >= 0.0 else -1.0

    k2 = np.sum(k * k, axis=1)
    cross = k[:, :1] * edges[None, :, 1] - k[:, 1:2] * edges[None, :, 0]
    phase = np.exp(-1j * (k @ midpoints.T))
    sinc = np.sinc((k @ edges.T) / (2.0 * math.pi))
    safe = np.where(k2 > 0.0, k2, 1.0)
    result = orientation * 1j * np.sum(cross * phase * sinc, axis=1) / safe
    return np.where(k2 > 0.0, result, abs(signed))


@dataclass
class FourierTable:
    """Boundary coefficients c_G of the rf electrode potential, shared by all evaluations."""

    vectors: np.ndarray
    coefficients: np.ndarray
    H: float
    z_min: float

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def _check(self, z: float) -> None:
        if not (0.0 < z < self.H):
            raise DomainError(f"point height z={z} outside (0, {self.H})")
        if z < self.z_min:
            log.warning(f"evaluating at z={z:.3g} below the table's z_min={self.z_min:.3g}")

    def potential(self, point: np.ndarray) -> float:
        point = np.asarray(point, dtype=float)
        self._check(point[2])
        profile = surface_greens_fourier(self.norms, point[2], self.H)
        waves = np.exp(1j * (self.vectors @ point[:2]))
        return float(np.real(np.sum(self.coefficients * profile * waves)))

    def gradient(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        self._check(point[2])
        norms = self.norms
        profile = surface_greens_fourier(norms, point[2], self.H)
        slope = surface_greens_fourier_dz(norms, point[2], self.H)
        terms = self.coefficients * np.exp(1j * (self.vectors @ point[:2]))
        gx = np.real(np.sum(1j * self.vectors[:, 0] * terms * profile))
        gy = np.real(np.sum(1j * self.vectors[:, 1] * terms * profile))
        gz = np.real(np.sum(terms * slope))
        return np.array([gx, gy, gz])


def fourier_table(
    pattern: ElectrodePattern,
    z_min: float,
    H: float = math.inf,
    tol: float = DEFAULT_FOURIER_TOL,
    k_max: float | None = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> FourierTable:
    """Reciprocal vectors up to k_max = −ln(tol)/z_min and their boundary coefficients."""
    if not z_min > 0.0:
        raise DomainError(f"fourier_table: z_min must be positive, got {z_min}")
    if not H > z_min:
        raise DomainError(f"fourier_table: cover height {H} must exceed z_min={z_min}")
    k_max = k_max if k_max is not None else -math.log(tol) / z_min

    b1, b2 = pattern.reciprocal()
    n1 = math.ceil(k_max * float(np.linalg.norm(pattern.a)) / (2.0 * math.pi)) + 1
    n2 = math.ceil(k_max * float(np.linalg.norm(pattern.b)) / (2.0 * math.pi)) + 1
    estimate = math.pi * k_max**2 / abs(b1[0] * b2[1] - b1[1] * b2[0])
    if estimate > max_vectors:
        raise ConvergenceError(
            "fourier_table", f"k_max={k_max:.4g} needs about {estimate:.0f} vectors, max_vectors={max_vectors}"
        )

    i, j = np.meshgrid(np.arange(-n1, n1 + 1), np.arange(-n2, n2 + 1), indexing="ij")
    vectors = i.reshape(-1, 1) * b1 + j.reshape(-1, 1) * b2
    vectors = vectors[np.linalg.norm(vectors, axis=1) <= k_max]

    coefficients = np.zeros(len(vectors), dtype=complex)
    for polygon in pattern.polygons:
        coefficients += polygon.weight * polygon_fourier(polygon.vertices, vectors)
    coefficients /= abs(pattern.cell_area)

    log.info(f"fourier table: {len(vectors)} reciprocal vectors, k_max={k_max:.4g}")
    return FourierTable(vectors, coefficients, H, z_min)


def periodic_potential(table: FourierTable, point: np.ndarray) -> float:
    return table.potential(point)


def periodic_gradient(table: FourierTable, point: np.ndarray) -> np.ndarray:
    return table.gradient(point)


def pseudopotential(table: FourierTable, point: np.ndarray) -> float:
    """Ponderomotive energy in units of E_pp, i.e. |∇φ_rf|² in reduced units."""
    gradient = table.gradient(point)
    return float(gradient @ gradient)


def pseudopotential_ev(table: FourierTable, point: np.ndarray, ctx: SIContext) -> float:
    return pseudopotential(table, point) * ctx.energy_pp_ev


def total_potential(table: FourierTable, point: np.ndarray, bias: float = 0.0) -> float:
    """Pseudopotential plus the static energy of dc electrodes and cover held at V.

    ``bias`` is V/V_pp; the bias field vanishes wherever the rf field does.
    """
    gradient = table.gradient(point)
    return float(gradient @ gradient) + bias * (1.0 - table.potential(point))


def find_rf_null(table: FourierTable, xy: np.ndarray, z_low: float, z_high: float) -> float:
    """Height of the rf null on a vertical line, from the root of ∂φ/∂z."""
    xy = np.asarray(xy, dtype=float)[:2]

    def slope(z: float) -> float:
        return float(table.gradient(np.array([xy[0], xy[1], z]))[2])

    low, high = slope(z_low), slope(z_high)
    if low * high > 0.0:
        raise DomainError(f"find_rf_null: no sign change of dφ/dz between z={z_low} and z={z_high}")
    return float(optimize.brentq(slope, z_low, z_high, xtol=1e-14, rtol=1e-14))


@dataclass(frozen=True)
class TrapDepth:
    bias: float
    trapped: bool
    z_min: float | None = None
    minimum: float | None = None
    barrier: float | None = None

    @property
    def depth(self) -> float | None:
        if not self.trapped:
            return None
        return self.barrier - self.minimum

    def as_dict(self) -> dict:
        return {
            "bias": self.bias,
            "trapped": self.trapped,
            "z_min": self.z_min,
            "minimum": self.minimum,
            "barrier": self.barrier,
            "depth": self.depth,
        }


@dataclass
class ScanResult:
    curve: pd.DataFrame
    depths: list[TrapDepth]


def _depth_of(zs: np.ndarray, values: np.ndarray, bias: float) -> TrapDepth:
    interior = np.where((values[1:-1] < values[:-2]) & (values[1:-1] <= values[2:]))[0] + 1
    if len(interior) == 0:
        return TrapDepth(bias, False)
    index = int(interior[np.argmin(values[interior])])
    barrier = float(np.max(values[index:]))
    return TrapDepth(bias, True, float(zs[index]), float(values[index]), barrier)


def vertical_scan(
    table: FourierTable,
    xy: np.ndarray,
    zs: np.ndarray,
    biases: tuple[float, ...] = (0.0,),
) -> ScanResult:
    """Pseudopotential and total potential (E_pp units) along a vertical line."""
    xy = np.asarray(xy, dtype=float)[:2]
    zs = np.asarray(zs, dtype=float)
    if zs.min() <= 0.0 or zs.max() >= table.H:
        raise DomainError(f"vertical_scan: heights must lie inside (0, {table.H})")

    pseudo = np.empty(len(zs))
    phi = np.empty(len(zs))
    for index, z in enumerate(zs):
        point = np.array([xy[0], xy[1], z])
        gradient = table.gradient(point)
        pseudo[index] = float(gradient @ gradient)
        phi[index] = table.potential(point)

    curve = pd.DataFrame({"z": zs, "pseudopotential": pseudo, "phi_rf": phi})
    depths = []
    for bias in biases:
        total = pseudo + bias * (1.0 - phi)
        curve[f"total_bias_{bias:g}"] = total
        depth = _depth_of(zs, total, bias)
        if not depth.trapped:
            log.warning(f"no local minimum along the scan at bias {bias:g}: untrapped")
        depths.append(depth)
    return ScanResult(curve, depths)
