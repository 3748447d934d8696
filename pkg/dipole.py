"""Dipole–dipole couplings m·∇∇′G·m′ between small ion displacements.

Tensors are differentiated analytically; the cover-plane tensor sums mirror copies and
adds the ζ(3, M+1) tail of the leading −ẑẑ/(μH)³ pair term.
"""

import logging
import math

import numpy as np
import pandas as pd
from scipy import special

from electrostatics import MIN_PAIRS, GreensEnv, PlaneConfig
from models import ConvergenceError, DomainError

log = logging.getLogger(__name__)

MIRROR = np.diag([1.0, 1.0, -1.0])


def free_tensor(separation: np.ndarray) -> np.ndarray:
    """∇∇′(1/|r−r′|) = (I − 3nnᵀ)/R³ for R = r − r′."""
    separation = np.asarray(separation, dtype=float)
    distance = float(np.linalg.norm(separation))
    if distance == 0.0:
        raise DomainError("dipole tensor: coincident points")
    unit = separation / distance
    return (np.eye(3) - 3.0 * np.outer(unit, unit)) / distance**3


def _stacked_free_tensors(separations: np.ndarray) -> np.ndarray:
    distance = np.linalg.norm(separations, axis=1)
    unit = separations / distance[:, None]
    eye = np.broadcast_to(np.eye(3), (len(separations), 3, 3))
    return (eye - 3.0 * unit[:, :, None] * unit[:, None, :]) / distance[:, None, None] ** 3


def plane_tensor(r: np.ndarray, rp: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    if r[2] <= 0.0 or rp[2] <= 0.0:
        raise DomainError("dipole tensor: both points must lie above the electrode plane")
    return free_tensor(r - rp) - free_tensor(r - MIRROR @ rp) @ MIRROR


def cover_tensor(r: np.ndarray, rp: np.ndarray, env: GreensEnv, pairs: int | None = None) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    H = env.H
    if not (0.0 < r[2] < H and 0.0 < rp[2] < H):
        raise DomainError(f"dipole tensor: points must lie strictly between the planes (H={H})")

    direct = r - rp
    mirrored = r - MIRROR @ rp
    reach = max(float(np.linalg.norm(mirrored)), float(np.linalg.norm(direct)), H)
    if pairs is None:
        estimate = (reach**2 / (H**5 * env.abs_tol)) ** 0.25
        pairs = max(MIN_PAIRS, math.ceil(reach / H) + 2, math.ceil(estimate) + 1)
    if 2 * pairs + 1 > env.max_terms:
        raise ConvergenceError("dipdip_cover", f"mirror sum needs {2 * pairs + 1} terms, max_terms={env.max_terms}")

    shifts = np.zeros((pairs, 3))
    shifts[:, 2] = 2.0 * H * np.arange(pairs, 0, -1, dtype=float)
    direct_terms = _stacked_free_tensors(direct + shifts) + _stacked_free_tensors(direct - shifts)
    mirror_terms = _stacked_free_tensors(mirrored + shifts) + _stacked_free_tensors(mirrored - shifts)
    total = np.sum(direct_terms - mirror_terms @ MIRROR, axis=0)
    total += plane_tensor(r, rp)

    tail = np.zeros((3, 3))
    tail[2, 2] = -float(special.zeta(3.0, pairs + 1.0)) / H**3
    return total + tail


def dipole_tensor(r: np.ndarray, rp: np.ndarray, env: GreensEnv | None = None) -> np.ndarray:
    env = env or GreensEnv()
    if env.plane == PlaneConfig.FREE:
        return free_tensor(np.asarray(r, dtype=float) - np.asarray(rp, dtype=float))
    if env.plane == PlaneConfig.PLANE:
        return plane_tensor(r, rp)
    return cover_tensor(r, rp, env)


def dipdip_free(r: np.ndarray, m: np.ndarray, rp: np.ndarray, mp: np.ndarray) -> float:
    return float(np.asarray(m) @ free_tensor(np.asarray(r, dtype=float) - np.asarray(rp, dtype=float)) @ np.asarray(mp))


def dipdip_plane(r: np.ndarray, m: np.ndarray, rp: np.ndarray, mp: np.ndarray) -> float:
    return float(np.asarray(m) @ plane_tensor(r, rp) @ np.asarray(mp))


def dipdip_cover(
    r: np.ndarray,
    m: np.ndarray,
    rp: np.ndarray,
    mp: np.ndarray,
    env: GreensEnv,
    pairs: int | None = None,
) -> float:
    return float(np.asarray(m) @ cover_tensor(r, rp, env, pairs) @ np.asarray(mp))


def dipdip(r: np.ndarray, m: np.ndarray, rp: np.ndarray, mp: np.ndarray, env: GreensEnv) -> float:
    return float(np.asarray(m) @ dipole_tensor(r, rp, env) @ np.asarray(mp))


def demo_closed_forms(rho: float, h: float) -> dict[str, float]:
    """Two ions at equal height h, separated by ρx̂, both vibrating along x, y or z."""
    spread = rho * rho + 4.0 * h * h
    return {
        "xx": -(2.0 / rho**3) * (1.0 + rho**3 * (2.0 * h * h - rho * rho) / spread**2.5),
        "yy": (1.0 / rho**3) * (1.0 - rho**3 / spread**1.5),
        "zz": (1.0 / rho**3) * (1.0 - rho**3 * (8.0 * h * h - rho * rho) / spread**2.5),
    }


def demo_far_field(rho: float, h: float) -> dict[str, float]:
    return {
        "xx": -24.0 * h * h / rho**5,
        "yy": 6.0 * h * h / rho**5,
        "zz": 2.0 / rho**3,
    }


def demo_curves(rhos: np.ndarray, h: float) -> pd.DataFrame:
    rows = []
    axes = {"xx": np.array([1.0, 0.0, 0.0]), "yy": np.array([0.0, 1.0, 0.0]), "zz": np.array([0.0, 0.0, 1.0])}
    for rho in np.asarray(rhos, dtype=float):
        r = np.array([0.0, 0.0, h])
        rp = np.array([rho, 0.0, h])
        far = demo_far_field(rho, h)
        row = {"rho": rho, "h": h}
        for key, axis in axes.items():
            row[key] = dipdip_plane(r, axis, rp, axis)
            row[f"{key}_far"] = far[key]
        rows.append(row)
    log.info(f"tabulated {len(rows)} demo separations at h={h}")
    return pd.DataFrame(rows)
