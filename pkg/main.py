import logging
import math
import time
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

import config
import logger
from dipole import demo_curves
from electrostatics import (
    FieldPoint,
    PlaneConfig,
    greens_cover_asymptote,
    greens_cover_bessel,
    greens_cover_image,
    greens_cover_series,
    surface_greens_series,
)
from geometry import FAMILIES, Family, SiteIndex, Sublattice
from input_manager import RunInputs, load_config
from models import ConfigurationError, ConsistencyError, ConvergenceError, DomainError
from phonons import (
    LatticePatch,
    assemble_gamma,
    bloch_bands,
    coupling_table,
    density_of_states,
    finite_normal_modes,
    stiffness_report,
    uniform_kgrid,
)
from spincoupling import (
    DriveSpec,
    closed_form_ratio,
    default_detunings,
    entanglement_bound_check,
    gapped_phase_check,
    j_exact_modesum,
    j_perturbative,
    jxy_scaling,
    kitaev_effective_hamiltonian,
    kitaev_jz_coefficient,
    next_order_estimate,
)
from storage_manager import ResultStorageManager
from trap import fourier_table, vertical_scan
from wires import field_map, null_current_ratio, null_gradient, rms_current_budget, scaling_bounds

log = logging.getLogger("KitaevSim")

REDUCED_UNITS = {
    "length": "d (nearest-neighbour distance)",
    "gamma": "Q^2/(4 pi eps0 M d^3)",
    "frequency": "sqrt(Q^2/(4 pi eps0 M d^3))",
    "greens": "1/d (with 1/(4 pi eps0) = 1)",
}


def _emit(conf: config.RuntimeConfig, frame: pd.DataFrame, units: dict[str, str], meta: dict) -> Path:
    storage = ResultStorageManager(conf.output_path, verbose=conf.verbose)
    if conf.output_format == "csv":
        return storage.save_table(frame, units=units, meta=meta)
    return storage.save_report({"command": conf.command, "meta": meta, "rows": frame.to_dict("records")}, units=units)


def _run_meta(conf: config.RuntimeConfig, inputs: RunInputs) -> dict:
    return {
        "command": conf.command,
        "cutoff": conf.cutoff,
        "tol": conf.tol,
        "lattice": inputs.lattice.to_dict(),
    }


def _family_tensors(conf: config.RuntimeConfig, inputs: RunInputs) -> dict:
    env = inputs.greens_env(conf.tol)
    return {family: assemble_gamma(inputs.lattice, family, family, conf.cutoff, env) for family in FAMILIES}


def _drives(inputs: RunInputs, tensors: dict) -> dict[Family, DriveSpec]:
    defaults = default_detunings(inputs.lattice, tensors)
    drives = {}
    for family in FAMILIES:
        detuning = inputs.drive.detunings.get(family)
        drives[family] = DriveSpec(family, detuning if detuning is not None else defaults[family])
    return drives


def run_greens(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    env = inputs.greens_env(conf.tol)
    z, zp = inputs.grid.z, inputs.grid.zp
    rows = []
    for rho in inputs.grid.rho:
        point = FieldPoint(rho, z, zp)
        chosen = greens_cover_series(point, env)
        row = {"rho": rho, "z": z, "zp": zp, "G": chosen.value, "form": chosen.form, "terms": chosen.terms}
        if env.plane == PlaneConfig.COVER:
            row["G_image"] = greens_cover_image(point, env).value
            row["G_bessel"] = greens_cover_bessel(point, env).value if rho > 0.0 else math.nan
            asymptote, regime = greens_cover_asymptote(rho, z, env.H)
            row["asymptote"] = asymptote
            row["regime"] = regime
        surface = surface_greens_series(rho, z, env)
        row["G_surface"] = surface.value
        row["surface_form"] = surface.form
        rows.append(row)
    units = {"rho": "d", "z": "d", "G": REDUCED_UNITS["greens"], "G_surface": "1/d^2"}
    meta = _run_meta(conf, inputs) | {"plane": env.plane.value}
    return _emit(conf, pd.DataFrame(rows), units, meta)


def run_dipole(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    frame = demo_curves(np.asarray(inputs.grid.rho), inputs.lattice.h)
    units = {"rho": "d", "h": "d", "xx": "1/d^3", "yy": "1/d^3", "zz": "1/d^3"}
    return _emit(conf, frame, units, _run_meta(conf, inputs))


def run_couplings(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    family = Family(inputs.grid.family)
    frame = coupling_table(inputs.lattice, family, conf.cutoff, inputs.greens_env(conf.tol))
    top = frame.iloc[0]
    log.info(f"dominant coupling gamma={top['gamma']:.6f} on bond {top['bond'] or '-'}")
    units = {"gamma": REDUCED_UNITS["gamma"], "dx": "d", "dy": "d", "distance": "d", "percent": "% of dominant"}
    return _emit(conf, frame, units, _run_meta(conf, inputs) | {"family": family.value})


def _all_bands(conf: config.RuntimeConfig, inputs: RunInputs) -> list:
    tensors = _family_tensors(conf, inputs)
    kpoints = uniform_kgrid(inputs.grid.kgrid or conf.kgrid)
    return [bloch_bands(tensors[family], kpoints=kpoints) for family in FAMILIES]


def run_bands(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    structures = _all_bands(conf, inputs)
    frame = pd.concat([bands.as_frame() for bands in structures], ignore_index=True)
    separations = {}
    for bands in structures:
        lower, upper = bands.band_centers()
        separations[bands.family.value] = float(upper - lower)
        log.info(f"family {bands.family.value}: band centres separated by {upper - lower:.3f} omega0")
    units = {"kx": "1/d", "ky": "1/d", "omega_lower": REDUCED_UNITS["frequency"], "shift_lower": "omega0 = 1/(2 omega_bar)"}
    return _emit(conf, frame, units, _run_meta(conf, inputs) | {"band_center_separation": separations})


def run_dos(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    structures = _all_bands(conf, inputs)
    dos = density_of_states(structures, bins=inputs.grid.dos_bins)
    units = {"omega": REDUCED_UNITS["frequency"], "weight": "fraction of all modes"}
    meta = _run_meta(conf, inputs) | {"bare_frequencies": {k.value: v for k, v in inputs.lattice.bare_frequencies().items()}}
    return _emit(conf, dos.as_frame(), units, meta)


def _torus_comparison(conf: config.RuntimeConfig, inputs: RunInputs, tensors: dict, drives: dict) -> dict:
    family = Family(inputs.grid.family)
    size = inputs.grid.torus
    patch = LatticePatch.build(size, size, "torus")
    modes = finite_normal_modes(inputs.lattice, tensors[family], patch, conf.max_sites)
    drive = drives[family]
    exact = j_exact_modesum(modes, drive, inputs.lattice)
    perturbative = j_perturbative(tensors[family], drive, patch)

    neighbour = {Family.X: SiteIndex(-1, 0, Sublattice.FILLED), Family.Y: SiteIndex(0, -1, Sublattice.FILLED), Family.Z: SiteIndex(-1, -1, Sublattice.FILLED)}[family]
    site = SiteIndex(1, 1, Sublattice.OPEN)
    partner = SiteIndex((1 + neighbour.n_a) % size, (1 + neighbour.n_b) % size, Sublattice.FILLED)
    j_exact = exact.pair(site, partner)
    j_pert = perturbative.pair(site, partner)
    return {
        "family": family.value,
        "torus": size,
        "J_exact": j_exact,
        "J_perturbative": j_pert,
        "relative_deviation": abs(j_exact - j_pert) / abs(j_pert),
        "next_order_estimate": next_order_estimate(modes.frequencies, drive.bare(inputs.lattice), drive.detuning),
        "diagnostics": exact.diagnostics,
    }


def _si_summary(inputs: RunInputs) -> dict:
    ctx = inputs.si
    coefficient = kitaev_jz_coefficient(ctx, inputs.wires, inputs.lattice, inputs.drive.omega_bar_hz, 1e3, inputs.drive.g_factor)
    current = inputs.drive.current
    detuning_hz = inputs.drive.detuning_hz
    j_hz = coefficient * current**2 / (detuning_hz / 1e3) ** 2
    check = entanglement_bound_check(j_hz, detuning_hz)
    bare = inputs.lattice.bare_frequencies()
    j_xy = {
        family.value: jxy_scaling(j_hz, bare[Family.Z] / bare[family], inputs.drive.dipole_ratio, current, current, current)
        for family in (Family.X, Family.Y)
    }
    return {
        "J_Z_coefficient_hz": coefficient,
        "J_Z_hz": j_hz,
        "J_XY_hz": j_xy,
        "entanglement": check.as_dict(),
        "entanglement_closed_form": closed_form_ratio(current, detuning_hz, coefficient),
        "E_pp_J": ctx.energy_pp,
        "E_pp_eV": ctx.energy_pp_ev,
        "E_pp_K": ctx.energy_pp_kelvin,
        "V_pp": ctx.voltage_pp,
        "stiff_frequency_bound": ctx.stiff_frequency_bound,
    }


def run_jmatrix(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    tensors = _family_tensors(conf, inputs)
    drives = _drives(inputs, tensors)
    table = kitaev_effective_hamiltonian(inputs.lattice, drives, conf.cutoff, tensors=tensors)
    payload = {
        "command": conf.command,
        "meta": _run_meta(conf, inputs),
        "drives": {family.value: drive.to_dict() for family, drive in drives.items()},
        "nearest_neighbour_J": {family.value: value for family, value in table.nearest.items()},
        "torus_check": _torus_comparison(conf, inputs, tensors, drives),
        "si": _si_summary(inputs),
        "kitaev_table": table.frame.to_dict("records"),
    }
    units = REDUCED_UNITS | {"J": "gamma * p^2 / (M omega^2): reduced", "J_Z_hz": "Hz", "E_pp_J": "J"}
    return ResultStorageManager(conf.output_path, verbose=conf.verbose).save_report(payload, units=units)


def _wire_summary(inputs: RunInputs) -> dict:
    wires = inputs.wires
    coefficient = kitaev_jz_coefficient(inputs.si, wires, inputs.lattice, inputs.drive.omega_bar_hz, 1e3, inputs.drive.g_factor)
    detunings = {family.value: inputs.drive.detuning_hz for family in FAMILIES}
    return {
        "null_current_ratio": null_current_ratio(wires.depth, wires.d),
        "red_current": wires.red_current,
        "null_gradient": null_gradient(wires.depth, wires.d, wires.i_blue, wires.mu0),
        "J_Z_coefficient_hz": coefficient,
        "rms_budget": rms_current_budget(detunings, coefficient).as_dict(),
        "single_tone_amplitude": rms_current_budget({"Z": inputs.drive.detuning_hz}, coefficient).tones[0].amplitude,
    }


def run_wires(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    wires = inputs.wires
    xs = np.linspace(*inputs.grid.field_x[:2], inputs.grid.field_x[2])
    zs = np.linspace(*inputs.grid.field_z[:2], inputs.grid.field_z[2])
    frame = field_map(wires, xs * wires.d, zs * wires.d)
    summary = _wire_summary(inputs)
    units = {"x": "d", "z": "d above the wire plane", "Bx": "mu0 I / d", "Bz": "mu0 I / d"}
    path = _emit(conf, frame, units, _run_meta(conf, inputs) | {"wires": wires.to_dict()})
    if conf.output_format == "csv":
        summary_path = Path(conf.output_path).with_suffix(".json")
        ResultStorageManager(str(summary_path), verbose=conf.verbose).save_report(
            {"command": conf.command, "summary": summary}, units={"J_Z_coefficient_hz": "Hz at 1 A", "rms_budget": "A"}
        )
    return path


def run_trapscan(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    start, stop, count = inputs.grid.scan_z
    zs = np.linspace(start, stop, count)
    cover = inputs.si.trap_cover_height(inputs.lattice.H)
    table = fourier_table(inputs.pattern, z_min=start, H=cover)
    scan = vertical_scan(table, np.asarray(inputs.grid.xy), zs, inputs.grid.biases)
    for depth in scan.depths:
        if depth.trapped:
            log.info(f"bias {depth.bias:g}: minimum at z={depth.z_min:.4f}, depth {depth.depth:.4g} E_pp")
    units = {"z": "d", "pseudopotential": "E_pp", "total_bias_*": "E_pp (bias in V_pp)"}
    meta = _run_meta(conf, inputs) | {
        "pattern": inputs.pattern.label,
        "cover_height_d": cover,
        "depths": [depth.as_dict() for depth in scan.depths],
        "E_pp_eV": inputs.si.energy_pp_ev,
    }
    return _emit(conf, scan.curve, units, meta)


def run_kitaev_report(conf: config.RuntimeConfig, inputs: RunInputs) -> Path:
    spec = inputs.lattice
    env = inputs.greens_env(conf.tol)
    tensors = _family_tensors(conf, inputs)
    cross = {(mu, nu): assemble_gamma(spec, mu, nu, conf.cutoff, env) for mu in FAMILIES for nu in FAMILIES if mu != nu}
    stiffness = stiffness_report(spec, {(family, family): tensor for family, tensor in tensors.items()} | cross)

    drives = _drives(inputs, tensors)
    table = kitaev_effective_hamiltonian(spec, drives, conf.cutoff, tensors=tensors)
    x_table = coupling_table(spec, Family.X, tensor=tensors[Family.X])
    kpoints = uniform_kgrid(inputs.grid.kgrid or conf.kgrid)
    separations = {}
    for family in FAMILIES:
        lower, upper = bloch_bands(tensors[family], kpoints=kpoints).band_centers()
        separations[family.value] = float(upper - lower)

    nearest = table.nearest
    payload = {
        "command": conf.command,
        "meta": _run_meta(conf, inputs),
        "couplings": {
            "dominant_gamma": float(x_table.iloc[0]["gamma"]),
            "relative_minus_2_delta_y": table.relative(Family.X, Sublattice.OPEN, -2, 0, Sublattice.FILLED),
            "relative_delta_y_minus_delta_z": table.relative(Family.X, Sublattice.OPEN, 1, 0, Sublattice.OPEN),
        },
        "stiffness": stiffness.as_dict(),
        "band_center_separation_omega0": separations,
        "nearest_neighbour_J": {family.value: value for family, value in nearest.items()},
        "phase": gapped_phase_check(nearest[Family.X], nearest[Family.Y], nearest[Family.Z]).as_dict(),
        "si": _si_summary(inputs),
        "wires": _wire_summary(inputs),
        "scaling": scaling_bounds(stiff_frequency_bound=inputs.si.stiff_frequency_bound).as_dict(),
    }
    units = REDUCED_UNITS | {"J_Z_coefficient_hz": "Hz at 1 A and detuning 2 pi x 1 kHz", "J_XY_hz": "Hz", "stiff_frequency_bound": "rad/s"}
    return ResultStorageManager(conf.output_path, verbose=conf.verbose).save_report(payload, units=units)


HANDLERS = {
    "greens": run_greens,
    "dipole": run_dipole,
    "couplings": run_couplings,
    "bands": run_bands,
    "dos": run_dos,
    "jmatrix": run_jmatrix,
    "wires": run_wires,
    "trapscan": run_trapscan,
    "kitaev-report": run_kitaev_report,
}


def run(conf: config.RuntimeConfig) -> int:
    logger.setup_logging(verbose=conf.verbose, log_file=conf.log_file)
    started = time.perf_counter()
    inputs = load_config(conf.config_path, conf.seed_paper_defaults)
    log.info(f"{conf.command}: cutoff={conf.cutoff}, kgrid={conf.kgrid}, tol={conf.tol:g}")
    path = HANDLERS[conf.command](conf, inputs)
    log.info(f"output: {path}")
    log.info(f"timings(sec): total={time.perf_counter() - started:.2f}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = config.build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_usage()
        return 2

    try:
        return run(config.build_runtime_config(args))
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"[error] {exc}")
        return 3
    except (FileNotFoundError, ConfigurationError, DomainError, ValueError, PermissionError) as exc:
        print(f"[error] {exc}")
        return 1
    except Exception as exc:
        print(f"[error] unexpected failure: {exc.__class__.__name__}: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
