import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from electrostatics import DEFAULT_ABS_TOL, DEFAULT_MAX_TERMS, GreensEnv
from geometry import Family, LatticeSpec
from models import ConfigurationError, DomainError
from trap import ElectrodePattern, SIContext, example_pattern
from wires import WireGridSpec

log = logging.getLogger(__name__)

SECTIONS = ("lattice", "environment", "drive", "wires", "si", "pattern", "grid")

KEY_ALIASES = {
    "lattice": {
        "height": "h",
        "trap_height": "h",
        "h": "h",
        "cover_height": "H",
        "cover": "H",
        "H": "H",
        "omega_ratio": "frequency_ratio",
        "frequency_ratio": "frequency_ratio",
        "omega_mean": "omega_mean",
        "mean_frequency": "omega_mean",
        "axes": "axes",
    },
    "environment": {
        "abs_tol": "abs_tol",
        "tolerance": "abs_tol",
        "max_terms": "max_terms",
    },
    "drive": {
        "detunings": "detunings",
        "detuning": "detunings",
        "omega_bar_hz": "omega_bar_hz",
        "bare_frequency_hz": "omega_bar_hz",
        "detuning_hz": "detuning_hz",
        "g_factor": "g_factor",
        "g": "g_factor",
        "current": "current",
        "dipole_ratio": "dipole_ratio",
        "transition_dipole": "dipole_ratio",
    },
    "wires": {
        "d": "d",
        "spacing": "d",
        "h_w": "h_w",
        "depth": "h_w",
        "i_blue": "i_blue",
        "blue_current": "i_blue",
        "i_red": "i_red",
        "red_current": "i_red",
        "mu0": "mu0",
    },
    "si": {
        "charge": "charge",
        "Q": "charge",
        "mass": "mass",
        "M": "mass",
        "d": "d",
        "u_rf": "u_rf",
        "U_rf": "u_rf",
        "omega_rf": "omega_rf",
        "cover_ratio": "cover_ratio",
    },
    "grid": {
        "rho": "rho",
        "z": "z",
        "zp": "zp",
        "kgrid": "kgrid",
        "torus": "torus",
        "dos_bins": "dos_bins",
        "scan_z": "scan_z",
        "biases": "biases",
        "xy": "xy",
        "field_x": "field_x",
        "field_z": "field_z",
        "family": "family",
    },
}


@dataclass(frozen=True)
class DriveSettings:
    """Detunings (reduced units, None = twice the band half-width) and the SI design point."""

    detunings: dict[Family, float | None] = field(default_factory=lambda: {family: None for family in Family})
    omega_bar_hz: float = 5e6
    detuning_hz: float = 1e3
    g_factor: float = 1.0
    current: float = 1.0
    dipole_ratio: float = 1.0

    def to_dict(self) -> dict:
        return {
            "detunings": {family.value: value for family, value in self.detunings.items()},
            "omega_bar_hz": self.omega_bar_hz,
            "detuning_hz": self.detuning_hz,
            "g_factor": self.g_factor,
            "current": self.current,
            "dipole_ratio": self.dipole_ratio,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DriveSettings":
        detunings = {family: None for family in Family}
        for key, value in (data.get("detunings") or {}).items():
            detunings[Family(key)] = None if value is None else float(value)
        return cls(
            detunings=detunings,
            omega_bar_hz=float(data.get("omega_bar_hz", 5e6)),
            detuning_hz=float(data.get("detuning_hz", 1e3)),
            g_factor=float(data.get("g_factor", 1.0)),
            current=float(data.get("current", 1.0)),
            dipole_ratio=float(data.get("dipole_ratio", 1.0)),
        )


@dataclass(frozen=True)
class GridSettings:
    rho: tuple[float, ...] = (0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
    z: float = 0.5
    zp: float = 0.5
    kgrid: int | None = None
    torus: int = 4
    dos_bins: int = 200
    scan_z: tuple[float, float, int] = (0.05, 1.5, 146)
    biases: tuple[float, ...] = (0.0, 0.05, 0.1)
    xy: tuple[float, float] = (0.0, 0.0)
    field_x: tuple[float, float, int] = (0.0, 1.7320508075688772, 41)
    field_z: tuple[float, float, int] = (0.2, 1.6, 8)
    family: str = "X"

    def to_dict(self) -> dict:
        return {
            "rho": list(self.rho),
            "z": self.z,
            "zp": self.zp,
            "kgrid": self.kgrid,
            "torus": self.torus,
            "dos_bins": self.dos_bins,
            "scan_z": list(self.scan_z),
            "biases": list(self.biases),
            "xy": list(self.xy),
            "field_x": list(self.field_x),
            "field_z": list(self.field_z),
            "family": self.family,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSettings":
        defaults = cls()
        try:
            return cls(
                rho=tuple(float(v) for v in data.get("rho", defaults.rho)),
                z=float(data.get("z", defaults.z)),
                zp=float(data.get("zp", defaults.zp)),
                kgrid=None if data.get("kgrid") is None else int(data["kgrid"]),
                torus=int(data.get("torus", defaults.torus)),
                dos_bins=int(data.get("dos_bins", defaults.dos_bins)),
                scan_z=_span(data.get("scan_z", defaults.scan_z)),
                biases=tuple(float(v) for v in data.get("biases", defaults.biases)),
                xy=tuple(float(v) for v in data.get("xy", defaults.xy)),
                field_x=_span(data.get("field_x", defaults.field_x)),
                field_z=_span(data.get("field_z", defaults.field_z)),
                family=str(Family(data.get("family", defaults.family)).value),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"grid: {exc}") from exc


def _span(value) -> tuple[float, float, int]:
    start, stop, count = value
    return float(start), float(stop), int(count)


@dataclass(frozen=True)
class RunInputs:
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    environment: dict = field(default_factory=lambda: {"abs_tol": DEFAULT_ABS_TOL, "max_terms": DEFAULT_MAX_TERMS})
    drive: DriveSettings = field(default_factory=DriveSettings)
    wires: WireGridSpec = field(default_factory=WireGridSpec)
    si: SIContext = field(default_factory=SIContext)
    pattern: ElectrodePattern = field(default_factory=example_pattern)
    grid: GridSettings = field(default_factory=GridSettings)

    def greens_env(self, abs_tol: float | None = None) -> GreensEnv:
        return GreensEnv.for_height(
            self.lattice.H,
            abs_tol=abs_tol if abs_tol is not None else float(self.environment["abs_tol"]),
            max_terms=int(self.environment["max_terms"]),
        )

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice.to_dict(),
            "environment": dict(self.environment),
            "drive": self.drive.to_dict(),
            "wires": self.wires.to_dict(),
            "si": self.si.to_dict(),
            "pattern": self.pattern.to_dict(),
            "grid": self.grid.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunInputs":
        unknown = [key for key in data if key not in SECTIONS]
        if unknown:
            raise ConfigurationError(f"unknown config section(s): {', '.join(sorted(unknown))}")

        sections = {name: _normalize_keys(name, data.get(name) or {}) for name in SECTIONS}
        kwargs = {}
        try:
            if data.get("lattice") is not None:
                kwargs["lattice"] = LatticeSpec.from_dict(sections["lattice"])
            if data.get("environment") is not None:
                environment = {"abs_tol": DEFAULT_ABS_TOL, "max_terms": DEFAULT_MAX_TERMS}
                environment.update(sections["environment"])
                kwargs["environment"] = environment
            if data.get("drive") is not None:
                kwargs["drive"] = DriveSettings.from_dict(sections["drive"])
            if data.get("wires") is not None:
                kwargs["wires"] = WireGridSpec.from_dict(sections["wires"])
            if data.get("si") is not None:
                kwargs["si"] = SIContext.from_dict(sections["si"])
            if data.get("pattern") is not None:
                kwargs["pattern"] = ElectrodePattern.from_dict(data["pattern"])
            if data.get("grid") is not None:
                kwargs["grid"] = GridSettings.from_dict(sections["grid"])
        except DomainError as exc:
            raise ConfigurationError(f"invalid design value: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"malformed config: {exc.__class__.__name__}: {exc}") from exc
        return cls(**kwargs)


def _normalize_keys(section: str, values: dict) -> dict:
    if not isinstance(values, dict):
        raise ConfigurationError(f"section '{section}' must be an object")
    aliases = KEY_ALIASES.get(section)
    if aliases is None:
        return dict(values)
    normalized = {}
    for key, value in values.items():
        if key not in aliases:
            raise ConfigurationError(f"unknown field '{key}' in section '{section}'")
        normalized[aliases[key]] = value
    return normalized


def default_config() -> RunInputs:
    """Published design point: Be⁺ at d = 30 µm, golden-ratio frequencies, tilted axes."""
    return RunInputs()


def ensure_config_file(path: str | Path = "kitaev.json") -> Path:
    config_path = Path(path)
    if config_path.exists():
        return config_path

    config_path.parent.mkdir(parents=True, exist_ok=True)
    config_path.write_text(json.dumps(default_config().to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return config_path


def load_config(path: str | Path | None = None, seed_paper_defaults: bool = False) -> RunInputs:
    if seed_paper_defaults:
        if path:
            log.warning(f"--seed-paper-defaults given: ignoring {path}")
        return default_config()
    if path is None:
        log.info("no config file given, using design defaults")
        return default_config()

    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    text = config_path.read_text(encoding="utf-8")
    if not text.strip():
        raise ConfigurationError(f"config file {config_path} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{config_path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{config_path}: top level must be an object")
    return RunInputs.from_dict(data)


