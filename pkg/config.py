import argparse
import os
from dataclasses import dataclass

from dotenv import load_dotenv

# Load environment variables once when module is imported
load_dotenv()

SUBCOMMANDS = ("greens", "dipole", "couplings", "bands", "dos", "jmatrix", "wires", "trapscan", "kitaev-report")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RuntimeConfig:
    command: str
    config_path: str | None
    output_path: str
    output_format: str
    tol: float
    cutoff: float
    kgrid: int
    max_sites: int
    seed_paper_defaults: bool
    verbose: bool
    log_file: str | None = None


def default_cutoff() -> float:
    try:
        return max(1.0, float(os.getenv("KITAEV_CUTOFF", "8.0")))
    except ValueError:
        return 8.0


def default_kgrid() -> int:
    try:
        return max(1, int(os.getenv("KITAEV_KGRID", "96")))
    except ValueError:
        return 96


def default_tol() -> float:
    try:
        value = float(os.getenv("KITAEV_TOL", "1e-12"))
    except ValueError:
        return 1e-12
    return value if value > 0.0 else 1e-12


def default_max_sites() -> int:
    try:
        return max(2, int(os.getenv("KITAEV_MAX_SITES", "2000")))
    except ValueError:
        return 2000


def default_log_file() -> str | None:
    return os.getenv("KITAEV_LOG_FILE") or None


def default_output_dir() -> str:
    return os.getenv("KITAEV_OUTPUT_DIR", "results") or "results"


def default_output_path(command: str, output_format: str) -> str:
    return os.path.join(default_output_dir(), f"{command}.{output_format}")


def _add_shared_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON design file (sections: lattice, environment, drive, wires, si, pattern, grid)")
    parser.add_argument("--out", default=None, help="output file (default: <KITAEV_OUTPUT_DIR>/<command>.<format>)")
    parser.add_argument("--format", choices=FORMATS, default=None, help="output format (each command has its own default)")
    parser.add_argument("--tol", type=float, default=default_tol(), help="absolute tolerance for series truncation")
    parser.add_argument("--cutoff", type=float, default=default_cutoff(), help="coupling cutoff radius in units of d")
    parser.add_argument("--kgrid", type=int, default=default_kgrid(), help="k-points per reciprocal direction")
    parser.add_argument("--max-sites", type=int, default=default_max_sites(), help="largest finite patch to diagonalize")
    parser.add_argument("--seed-paper-defaults", action="store_true", help="use every published design value (Be+ context, golden-ratio frequencies, tilted axes)")
    parser.add_argument("--quiet", action="store_true", help="only warnings and errors")
    parser.add_argument("--log-file", default=default_log_file(), help="also append log records to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitaev-sim",
        description="Design calculations for a trapped-ion honeycomb Kitaev simulator",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = {
        "greens": "Green's functions between grounded planes, every series form",
        "dipole": "dipole-dipole couplings above one plane against their closed forms",
        "couplings": "percentage table of vibrational couplings of one family",
        "bands": "Bloch bands of the three vibrational families",
        "dos": "density of states of all bands",
        "jmatrix": "effective spin-spin couplings, perturbative and exact",
        "wires": "wire-grid field map, null ratio, gradient and current budget",
        "trapscan": "pseudopotential scan above a periodic electrode pattern",
        "kitaev-report": "combined design report of the simulator",
    }
    for command in SUBCOMMANDS:
        sub = subparsers.add_parser(command, help=helps[command])
        _add_shared_arguments(sub)
    return parser


def default_format(command: str) -> str:
    return "json" if command in ("jmatrix", "kitaev-report") else "csv"


def build_runtime_config(args: argparse.Namespace) -> RuntimeConfig:
    output_format = args.format or default_format(args.command)
    return RuntimeConfig(
        command=args.command,
        config_path=args.config,
        output_path=args.out or default_output_path(args.command, output_format),
        output_format=output_format,
        tol=args.tol if args.tol > 0.0 else default_tol(),
        cutoff=max(1.0, float(args.cutoff)),
        kgrid=max(1, int(args.kgrid)),
        max_sites=max(2, int(args.max_sites)),
        seed_paper_defaults=bool(args.seed_paper_defaults),
        verbose=not args.quiet,
        log_file=args.log_file or None,
    )
