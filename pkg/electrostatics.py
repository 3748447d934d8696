"""Dirichlet Green's functions for an electrode plane at z = 0 and an optional grounded
cover plane at z = H.

Reduced units: lengths in d, potentials per unit charge with 1/(4πε₀) = 1. Image sums
are accumulated pairwise (μ, −μ) and closed with the Hurwitz-zeta tail of their
leading 1/μ³ behaviour, so a few hundred pairs reach 1e-12.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from models import ConvergenceError, DomainError, SeriesResult

log = logging.getLogger(__name__)

DEFAULT_ABS_TOL = 1e-12
DEFAULT_MAX_TERMS = 1_000_000
MIN_PAIRS = 5
# below this fraction of H the Bessel series needs too many terms
BESSEL_MIN_RHO = 0.25


class PlaneConfig(str, Enum):
    FREE = "free"
    PLANE = "plane"
    COVER = "cover"


@dataclass(frozen=True)
class GreensEnv:
    plane: PlaneConfig = PlaneConfig.PLANE
    H: float = math.inf
    abs_tol: float = DEFAULT_ABS_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self) -> None:
        if self.plane == PlaneConfig.COVER and not (self.H > 0.0 and math.isfinite(self.H)):
            raise DomainError(f"cover plane needs a finite positive height, got H={self.H}")
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}")

    @classmethod
    def for_height(cls, H: float, abs_tol: float = DEFAULT_ABS_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> "GreensEnv":
        if math.isfinite(H):
            return cls(PlaneConfig.COVER, H, abs_tol, max_terms)
        return cls(PlaneConfig.PLANE, math.inf, abs_tol, max_terms)

    def check_height(self, z: float, name: str = "z") -> None:
        if self.plane == PlaneConfig.FREE:
            return
        if z < 0.0 or (self.plane == PlaneConfig.COVER and z > self.H):
            raise DomainError(f"{name}={z} lies outside the slab between the planes (H={self.H})")


@dataclass(frozen=True)
class FieldPoint:
    rho: float
    z: float
    zp: float

    @property
    def separation(self) -> float:
        return math.hypot(self.rho, self.z - self.zp)


def field_point(r: np.ndarray, rp: np.ndarray) -> FieldPoint:
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    return FieldPoint(float(math.hypot(r[0] - rp[0], r[1] - rp[1])), float(r[2]), float(rp[2]))


def greens_free(r: np.ndarray, rp: np.ndarray) -> float:
    distance = float(np.linalg.norm(np.asarray(r, dtype=float) - np.asarray(rp, dtype=float)))
    if distance == 0.0:
        raise DomainError("greens_free: coincident points")
    return 1.0 / distance


def _check_not_coincident(p: FieldPoint, operation: str) -> None:
    if p.rho == 0.0 and p.z == p.zp:
        raise DomainError(f"{operation}: coincident points")


def greens_plane(p: FieldPoint) -> float:
    if p.z < 0.0 or p.zp < 0.0:
        raise DomainError(f"greens_plane: heights must be non-negative, got z={p.z}, z'={p.zp}")
    _check_not_coincident(p, "greens_plane")
    direct = 1.0 / math.hypot(p.rho, p.z - p.zp)
    image = 1.0 / math.hypot(p.rho, p.z + p.zp)
    return direct - image


def _pair_count(reach: float, H: float, abs_tol: float, power: float, h_power: float) -> int:
    # tail error after M pairs is bounded by ~ reach^power / (H^h_power M^4)
    estimate = (reach**power / (H**h_power * abs_tol)) ** 0.25
    return max(MIN_PAIRS, math.ceil(reach / H) + 2, math.ceil(estimate) + 1)


def greens_cover_image(p: FieldPoint, env: GreensEnv, pairs: int | None = None) -> SeriesResult:
    """Mirror-plane sum of single-plane Green's functions, closed with a ζ(3, M+1) tail."""
    _check_not_coincident(p, "greens_cover")
    H = env.H
    reach = math.hypot(p.rho, p.z + p.zp)
    count = pairs if pairs is not None else _pair_count(max(reach, H), H, env.abs_tol, 4.0, 5.0)
    if 2 * count + 1 > env.max_terms:
        raise ConvergenceError("greens_cover", f"image sum needs {2 * count + 1} terms, max_terms={env.max_terms}")

    rho2 = p.rho * p.rho
    direct = p.z - p.zp
    mirror = p.z + p.zp
    shifts = 2.0 * H * np.arange(count, 0, -1, dtype=float)
    pair_terms = (
        1.0 / np.sqrt(rho2 + (direct + shifts) ** 2)
        + 1.0 / np.sqrt(rho2 + (direct - shifts) ** 2)
        - 1.0 / np.sqrt(rho2 + (mirror + shifts) ** 2)
        - 1.0 / np.sqrt(rho2 + (mirror - shifts) ** 2)
    )
    centre = 1.0 / math.hypot(p.rho, direct) - 1.0 / math.hypot(p.rho, mirror)
    tail = -(p.z * p.zp / H**3) * float(special.zeta(3.0, count + 1.0))
    value = float(np.sum(pair_terms)) + centre + tail
    return SeriesResult(value, "image", 2 * count + 1)


def greens_cover_bessel(p: FieldPoint, env: GreensEnv) -> SeriesResult:
    """Resummed form (4/H) Σ sin sin K0(νπρ/H); needs ρ > 0."""
    H = env.H
    if p.rho <= 0.0:
        raise DomainError("greens_cover: Bessel form needs a positive horizontal separation")
    x = math.pi * p.rho / H
    count = math.ceil((math.log(4.0 / (H * env.abs_tol)) + 2.0) / x) + 2
    if count > env.max_terms:
        raise ConvergenceError("greens_cover", f"Bessel sum needs {count} terms, max_terms={env.max_terms}")

    nu = np.arange(count, 0, -1, dtype=float)
    kernel = special.k0e(nu * x) * np.exp(-nu * x)
    terms = np.sin(nu * math.pi * p.z / H) * np.sin(nu * math.pi * p.zp / H) * kernel
    return SeriesResult(float(4.0 / H * np.sum(terms)), "bessel", count)


def greens_cover_series(p: FieldPoint, env: GreensEnv) -> SeriesResult:
    if env.plane == PlaneConfig.FREE:
        _check_not_coincident(p, "greens_cover")
        return SeriesResult(1.0 / p.separation, "free", 1)
    if env.plane == PlaneConfig.PLANE:
        return SeriesResult(greens_plane(p), "plane", 2)

    env.check_height(p.z, "z")
    env.check_height(p.zp, "z'")
    if p.z in (0.0, env.H) or p.zp in (0.0, env.H):
        return SeriesResult(0.0, "boundary", 0)
    if p.separation <= env.H or p.rho < BESSEL_MIN_RHO * env.H:
        return greens_cover_image(p, env)
    return greens_cover_bessel(p, env)


def greens_cover(p: FieldPoint, env: GreensEnv) -> float:
    result = greens_cover_series(p, env)
    log.debug(f"G_H({p.rho:.4g}, {p.z:.4g}, {p.zp:.4g}) via {result.form} ({result.terms} terms)")
    return result.value


def self_potential(z: float, H: float) -> float:
    """Scaled self-potential e_H(z); the single-plane limit is 1/(4z)."""
    if not math.isfinite(H):
        if z <= 0.0:
            raise DomainError(f"self_potential: z must be positive, got {z}")
        return 1.0 / (4.0 * z)
    if not 0.0 < z < H:
        raise DomainError(f"self_potential: z={z} outside (0, {H})")
    return -(2.0 * np.euler_gamma + special.digamma(z / H) + special.digamma(1.0 - z / H)) / (4.0 * H)


def coulomb_energy(charges: list[float], positions: list[np.ndarray], env: GreensEnv) -> float:
    """Σ_{i<j} Q_iQ_j G_H(r_i, r_j) − Σ_i Q_i² e_H(z_i), reduced units."""
    if len(charges) != len(positions):
        raise DomainError("coulomb_energy: charges and positions differ in length")
    energy = 0.0
    for i, (charge_i, r_i) in enumerate(zip(charges, positions)):
        z_i = float(r_i[2])
        env.check_height(z_i)
        if env.plane != PlaneConfig.FREE:
            energy -= charge_i**2 * self_potential(z_i, env.H)
        for charge_j, r_j in zip(charges[i + 1:], positions[i + 1:]):
            energy += charge_i * charge_j * greens_cover(field_point(r_i, r_j), env)
    return energy


def greens_cover_asymptote(rho: float, h: float, H: float) -> tuple[float, str]:
    """Screening regimes of G_H(ρ, h, h): near-field, image dipole, exponential shielding."""
    if rho < h:
        return 1.0 / rho, "near"
    if rho <= H:
        return 2.0 * h * h / rho**3, "dipolar"
    value = math.sqrt(8.0 / (H * rho)) * math.sin(math.pi * h / H) ** 2 * math.exp(-math.pi * rho / H)
    return value, "screened"


def surface_greens_free(rho: float, z: float) -> float:
    return z / (2.0 * math.pi * (rho * rho + z * z) ** 1.5)


def surface_greens_images(rho: float, z: float, env: GreensEnv) -> SeriesResult:
    H = env.H
    s = math.hypot(rho, z)
    count = _pair_count(max(s, H), H, env.abs_tol, 3.0, 5.0)
    if 2 * count + 1 > env.max_terms:
        raise ConvergenceError("surface_greens", f"image sum needs {2 * count + 1} terms, max_terms={env.max_terms}")

    shifts = 2.0 * H * np.arange(count, 0, -1, dtype=float)
    upper = z + shifts
    lower = z - shifts
    rho2 = rho * rho
    pair_terms = upper / (rho2 + upper**2) ** 1.5 + lower / (rho2 + lower**2) ** 1.5
    tail = -z / (4.0 * math.pi * H**3) * float(special.zeta(3.0, count + 1.0))
    value = float(np.sum(pair_terms)) / (2.0 * math.pi) + surface_greens_free(rho, z) + tail
    return SeriesResult(value, "images", 2 * count + 1)


def surface_greens_bessel(rho: float, z: float, env: GreensEnv) -> SeriesResult:
    H = env.H
    if rho <= 0.0:
        raise DomainError("surface_greens: Bessel form needs a positive horizontal separation")
    x = math.pi * rho / H
    count = math.ceil((math.log(1.0 / (H * H * env.abs_tol)) + 10.0) / x) + 5
    if count > env.max_terms:
        raise ConvergenceError("surface_greens", f"Bessel sum needs {count} terms, max_terms={env.max_terms}")

    nu = np.arange(count, 0, -1, dtype=float)
    terms = nu * np.sin(nu * math.pi * z / H) * special.k0e(nu * x) * np.exp(-nu * x)
    return SeriesResult(float(np.sum(terms)) / (H * H), "bessel", count)


def surface_greens_legendre(rho: float, z: float, env: GreensEnv) -> SeriesResult:
    """Zeta/Legendre expansion about the single-plane kernel; only valid for s < 2H."""
    H = env.H
    s = math.hypot(rho, z)
    ratio = s / (2.0 * H)
    if ratio >= 1.0:
        raise DomainError(f"surface_greens: Legendre form needs s < 2H, got s={s}, H={H}")
    if s == 0.0:
        raise DomainError("surface_greens: Legendre form needs s > 0")

    scale = 1.0 / (4.0 * math.pi * H * H)
    if ratio > 0.0:
        needed = math.log(env.abs_tol / (scale * 4.0)) / math.log(ratio)
        needed = math.log(env.abs_tol / (scale * 4.0 * (abs(needed) + 2.0))) / math.log(ratio)
        count = max(3, math.ceil(needed / 2.0) + 2)
    else:
        count = 3
    if count > env.max_terms:
        raise ConvergenceError("surface_greens", f"Legendre sum needs {count} terms, max_terms={env.max_terms}")

    j = np.arange(2 * count - 1, 0, -2, dtype=float)
    terms = (j + 1.0) * special.zeta(j + 2.0) * ratio**j * special.eval_legendre(j.astype(int), z / s)
    value = surface_greens_free(rho, z) - scale * float(np.sum(terms))
    return SeriesResult(value, "legendre", count)


def surface_greens_series(rho: float, z: float, env: GreensEnv, form: str | None = None) -> SeriesResult:
    if rho < 0.0:
        raise DomainError(f"surface_greens: rho must be non-negative, got {rho}")
    if env.plane != PlaneConfig.COVER:
        if z <= 0.0:
            raise DomainError(f"surface_greens: z must be positive, got {z}")
        return SeriesResult(surface_greens_free(rho, z), "plane", 1)

    if not 0.0 < z < env.H:
        raise DomainError(f"surface_greens: z={z} outside (0, {env.H})")
    if form is None:
        form = "images" if math.hypot(rho, z) <= env.H or rho < BESSEL_MIN_RHO * env.H else "bessel"
    if form == "images":
        return surface_greens_images(rho, z, env)
    if form == "bessel":
        return surface_greens_bessel(rho, z, env)
    if form == "legendre":
        return surface_greens_legendre(rho, z, env)
    raise DomainError(f"surface_greens: unknown form {form!r}")


def surface_greens(rho: float, z: float, env: GreensEnv, form: str | None = None) -> float:
    return surface_greens_series(rho, z, env, form).value


def surface_greens_asymptote(rho: float, z: float, H: float) -> tuple[float, str]:
    if not math.isfinite(H):
        return surface_greens_free(rho, z), "plane"
    if rho < z:
        a = z / (2.0 * H)
        value = (special.polygamma(1, a) - special.polygamma(1, 1.0 - a)) / (8.0 * math.pi * H * H)
        return float(value), "axis"
    value = math.sin(math.pi * z / H) * math.exp(-math.pi * rho / H) / math.sqrt(2.0 * rho * H**3)
    return value, "screened"


def surface_greens_fourier(k: float | np.ndarray, z: float, H: float) -> float | np.ndarray:
    """sinh(k(H−z))/sinh(kH); e^{−kz} without cover plane and (H−z)/H at k = 0."""
    if z < 0.0 or z > H:
        raise DomainError(f"surface_greens_fourier: z={z} outside [0, {H}]")
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0.0):
        raise DomainError("surface_greens_fourier: wavenumbers must be non-negative")

    if not math.isfinite(H):
        result = np.exp(-k_arr * z)
    else:
        safe = np.where(k_arr > 0.0, k_arr, 1.0)
        a = safe * (H - z)
        b = safe * H
        ratio = np.exp(a - b) * np.expm1(-2.0 * a) / np.expm1(-2.0 * b)
        result = np.where(k_arr > 0.0, ratio, (H - z) / H)
    return float(result) if np.ndim(result) == 0 else result


def surface_greens_fourier_dz(k: float | np.ndarray, z: float, H: float) -> float | np.ndarray:
    if z < 0.0 or z > H:
        raise DomainError(f"surface_greens_fourier_dz: z={z} outside [0, {H}]")
    k_arr = np.asarray(k, dtype=float)

    if not math.isfinite(H):
        result = -k_arr * np.exp(-k_arr * z)
    else:
        safe = np.where(k_arr > 0.0, k_arr, 1.0)
        a = safe * (H - z)
        b = safe * H
        ratio = -safe * np.exp(a - b) * (1.0 + np.exp(-2.0 * a)) / (-np.expm1(-2.0 * b))
        result = np.where(k_arr > 0.0, ratio, -1.0 / H)
    return float(result) if np.ndim(result) == 0 else result
