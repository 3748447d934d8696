"""Magnetic field of the two-colour wire grid buried below the electrode plane.

Coordinates are measured in the wire plane: blue wires sit at x = n·d_w, red wires at
x = (n + ½)·d_w, all at z = 0 and running along ŷ. Ions sit at height h_w above the
blue wires. Currents flow along −ŷ; with ``mu0 = 1`` fields come out in units of
μ₀I/d, otherwise in SI when d is in metres and currents in amperes.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd

from geometry import SQRT3
from models import DomainError

log = logging.getLogger(__name__)

ON_WIRE_TOLERANCE = 1e-12
REFERENCE_DETUNING_HZ = 1e3


@dataclass(frozen=True)
class CurrentTone:
    label: str
    detuning: float
    amplitude: float
    phase: float = 0.0

    @property
    def rms(self) -> float:
        return self.amplitude / math.sqrt(2.0)


@dataclass(frozen=True)
class WireGridSpec:
    d: float = 1.0
    h_w: float | None = None
    i_blue: float = 1.0
    i_red: float | None = None
    mu0: float = 1.0
    tones: tuple[CurrentTone, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.d > 0.0:
            raise DomainError(f"wire grid: lattice constant must be positive, got {self.d}")
        if self.h_w is not None and not self.h_w > 0.0:
            raise DomainError(f"wire grid: wire depth must be positive, got {self.h_w}")

    @property
    def spacing(self) -> float:
        """Distance d_w between wires of equal colour."""
        return self.d * SQRT3 / 2.0

    @property
    def depth(self) -> float:
        return self.h_w if self.h_w is not None else self.spacing

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.spacing

    @property
    def red_current(self) -> float:
        nulling = self.i_blue / null_current_ratio(self.depth, self.d)
        if self.i_red is None:
            return nulling
        if not math.isclose(self.i_red, nulling, rel_tol=1e-12):
            warnings.warn(
                f"red-wire current {self.i_red} overrides the nulling value {nulling:.6g}; "
                "carrier terms will not vanish at the ion sites",
                stacklevel=2,
            )
        return self.i_red

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "h_w": self.h_w,
            "i_blue": self.i_blue,
            "i_red": self.i_red,
            "mu0": self.mu0,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WireGridSpec":
        return cls(
            d=float(data.get("d", 1.0)),
            h_w=None if data.get("h_w") is None else float(data["h_w"]),
            i_blue=float(data.get("i_blue", 1.0)),
            i_red=None if data.get("i_red") is None else float(data["i_red"]),
            mu0=float(data.get("mu0", 1.0)),
        )


def null_current_ratio(h_w: float, d: float = 1.0) -> float:
    """I_blue / I_red that cancels the field above every blue wire at height h_w."""
    if not h_w > 0.0:
        raise DomainError(f"null_current_ratio: wire depth must be positive, got {h_w}")
    return -math.tanh(2.0 * math.pi * h_w / (d * SQRT3)) ** 2


def _check_off_wire(x: float, z: float, spec: WireGridSpec) -> None:
    if abs(z) > ON_WIRE_TOLERANCE * spec.d:
        return
    phase = (x / spec.spacing) % 0.5
    if min(phase, 0.5 - phase) * spec.spacing <= ON_WIRE_TOLERANCE * spec.d:
        raise DomainError(f"wire_field: point ({x}, {z}) lies on a wire")


def wire_field(x: float, z: float, spec: WireGridSpec) -> np.ndarray:
    """Closed-form field of both infinite wire sets, as (Bx, By, Bz)."""
    _check_off_wire(x, z, spec)
    k = spec.wavenumber
    prefactor = spec.mu0 / (spec.d * SQRT3)
    sinh_kz = math.sinh(k * z)
    cosh_kz = math.cosh(k * z)
    sin_kx = math.sin(k * x)
    cos_kx = math.cos(k * x)

    blue = spec.i_blue / (cosh_kz - cos_kx)
    red = spec.red_current / (cosh_kz + cos_kx)
    b_x = -prefactor * sinh_kz * (blue + red)
    b_z = prefactor * sin_kx * (blue - red)
    return np.array([b_x, 0.0, b_z])


def _wire_set_direct(x: float, z: float, spacing: float, n_wires: int) -> tuple[float, float]:
    """Σ Z/(X²+Z²) and Σ X/(X²+Z²) over wires at n·spacing, with the midpoint-integral tail."""
    half = n_wires // 2
    positions = spacing * np.arange(-half, half + 1, dtype=float)
    dx = x - positions
    r2 = dx * dx + z * z
    z_sum = float(np.sum(z / r2))
    x_sum = float(np.sum(dx / r2))

    edge = (half + 0.5) * spacing
    if z != 0.0:
        z_sum += (math.pi - math.atan((edge - x) / z) - math.atan((edge + x) / z)) / spacing
    x_sum += math.log(((edge - x) ** 2 + z * z) / ((edge + x) ** 2 + z * z)) / (2.0 * spacing)
    return z_sum, x_sum


def wire_field_direct(x: float, z: float, spec: WireGridSpec, n_wires: int = 10_000) -> np.ndarray:
    """Wire-by-wire Biot–Savart sum over ``n_wires`` of each colour."""
    _check_off_wire(x, z, spec)
    scale = spec.mu0 / (2.0 * math.pi)
    blue_z, blue_x = _wire_set_direct(x, z, spec.spacing, n_wires)
    red_z, red_x = _wire_set_direct(x - spec.spacing / 2.0, z, spec.spacing, n_wires)
    red = spec.red_current
    b_x = -scale * (spec.i_blue * blue_z + red * red_z)
    b_z = scale * (spec.i_blue * blue_x + red * red_x)
    return np.array([b_x, 0.0, b_z])


def field_map(spec: WireGridSpec, xs: np.ndarray, zs: np.ndarray) -> pd.DataFrame:
    rows = []
    for z in np.asarray(zs, dtype=float):
        for x in np.asarray(xs, dtype=float):
            b = wire_field(float(x), float(z), spec)
            rows.append({"x": x, "z": z, "Bx": b[0], "By": b[1], "Bz": b[2], "B": float(np.linalg.norm(b))})
    return pd.DataFrame(rows)


def null_gradient(h_w: float, d: float = 1.0, i_blue: float = 1.0, mu0: float = 1.0) -> np.ndarray:
    """∂_i B_j at the field null above a blue wire; only the xz and zx entries survive."""
    u = 2.0 * math.pi * h_w / (d * SQRT3)
    magnitude = 4.0 * math.pi * mu0 * i_blue / (3.0 * d * d) / math.sinh(u) ** 2
    gradient = np.zeros((3, 3))
    gradient[0, 2] = magnitude
    gradient[2, 0] = magnitude
    return gradient


def wire_gradient_fd(x: float, z: float, spec: WireGridSpec, step: float | None = None) -> np.ndarray:
    """Central-difference ∂_i B_j; the y row vanishes for wires along ŷ."""
    step = step if step is not None else 1e-5 * spec.d
    gradient = np.zeros((3, 3))
    gradient[0] = (wire_field(x + step, z, spec) - wire_field(x - step, z, spec)) / (2.0 * step)
    gradient[2] = (wire_field(x, z + step, spec) - wire_field(x, z - step, spec)) / (2.0 * step)
    return gradient


@dataclass(frozen=True)
class CurrentBudget:
    tones: tuple[CurrentTone, ...]
    entanglement_ratio: float

    @property
    def rms(self) -> float:
        return math.sqrt(sum(tone.rms**2 for tone in self.tones))

    def as_dict(self) -> dict:
        return {
            "entanglement_ratio": self.entanglement_ratio,
            "rms_current": self.rms,
            "tones": [
                {"label": tone.label, "detuning": tone.detuning, "amplitude": tone.amplitude} for tone in self.tones
            ],
        }


def tone_amplitude(detuning_hz: float, coefficient_hz: float, ratio: float = 1.0) -> float:
    """Current amplitude at which |J/(ħδ̄)| reaches ``ratio`` for J = coefficient·I²·x⁻², x = δ̄/(2π kHz)."""
    if detuning_hz == 0.0:
        raise DomainError("tone_amplitude: zero detuning")
    x = abs(detuning_hz) / REFERENCE_DETUNING_HZ
    return math.sqrt(ratio * x**3 * REFERENCE_DETUNING_HZ / coefficient_hz)


def rms_current_budget(
    detunings_hz: dict[str, float],
    coefficient_hz: float,
    ratio: float = 1.0,
) -> CurrentBudget:
    """Per-wire rms current when every drive sits at the entanglement limit.

    The Z drive uses one tone; X and Y are Mølmer–Sørensen pairs with two tones each.
    """
    tones = []
    for family, detuning in detunings_hz.items():
        amplitude = tone_amplitude(detuning, coefficient_hz, ratio)
        labels = [family] if family == "Z" else [f"{family}+", f"{family}-"]
        tones.extend(CurrentTone(label, detuning, amplitude) for label in labels)
    budget = CurrentBudget(tuple(tones), ratio)
    log.info(f"rms current budget: {len(tones)} tones, {budget.rms:.4g} A")
    return budget


@dataclass(frozen=True)
class ScalingReport:
    j_current: Fraction
    j_frequency: Fraction
    j_distance: Fraction
    current_distance: Fraction
    stiff_frequency_distance: Fraction
    expansion_frequency_distance: Fraction
    heating_distance: Fraction
    stiff_frequency_bound: float | None = None

    def composite(self, frequency_distance: Fraction) -> Fraction:
        """d-exponent of J at the current bound with ω̄ ∝ d^{frequency_distance}."""
        return self.j_current * self.current_distance + self.j_frequency * frequency_distance + self.j_distance

    @property
    def composite_stiff(self) -> Fraction:
        return self.composite(self.stiff_frequency_distance)

    @property
    def composite_expansion(self) -> Fraction:
        return self.composite(self.expansion_frequency_distance)

    def heating_figure_of_merit(self, frequency_distance: Fraction) -> Fraction:
        """d-exponent of J·d⁴ against anomalous heating."""
        return self.composite(frequency_distance) - self.heating_distance

    def j_ratio(self, d_ratio: float) -> float:
        return d_ratio ** float(self.j_distance)

    def as_dict(self) -> dict:
        return {
            "J_current_exponent": str(self.j_current),
            "J_frequency_exponent": str(self.j_frequency),
            "J_distance_exponent": str(self.j_distance),
            "current_distance_exponent": str(self.current_distance),
            "stiff_frequency_distance_exponent": str(self.stiff_frequency_distance),
            "expansion_frequency_distance_exponent": str(self.expansion_frequency_distance),
            "composite_stiff": str(self.composite_stiff),
            "composite_expansion": str(self.composite_expansion),
            "heating_fom_stiff": str(self.heating_figure_of_merit(self.stiff_frequency_distance)),
            "heating_fom_expansion": str(self.heating_figure_of_merit(self.expansion_frequency_distance)),
            "stiff_frequency_bound": self.stiff_frequency_bound,
        }


def scaling_bounds(
    expansion_exponent: Fraction = Fraction(-5),
    stiff_frequency_bound: float | None = None,
) -> ScalingReport:
    """Miniaturization exponents for J at the entanglement limit.

    J ∝ I^{2/3} ω̄^{-2/3} d^{-7/3}, the wire current is bounded as d^{3/2}, and ω̄ must
    exceed d^{-3/2} (stiff trapping) or d^{expansion_exponent} (validity of the 1/δ̄
    expansion). Heating grows as d^{-4}.
    """
    return ScalingReport(
        j_current=Fraction(2, 3),
        j_frequency=Fraction(-2, 3),
        j_distance=Fraction(-7, 3),
        current_distance=Fraction(3, 2),
        stiff_frequency_distance=Fraction(-3, 2),
        expansion_frequency_distance=Fraction(expansion_exponent),
        heating_distance=Fraction(-4),
        stiff_frequency_bound=stiff_frequency_bound,
    )
