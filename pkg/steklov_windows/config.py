"""Configuration: project paths, environment, and the run configuration table.

Code map:
    Config                  Project root, results directory, worker threads
    get_config()            Module-level default Config
    set_config()            Replace the default Config
    RunConfig               Validated union of geometry, oscillation, solver, sweep keys
    DEFAULTS                Documented default of every key
    parse_config()          Defaults < JSON/TOML file < flag overrides
    describe_keys()         One "key = default" line per key, for --help
"""

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from .errors import ConfigError
from .experiments.sweep import SweepConfig
from .fem.solvers import SolverConfig
from .geometry.domain import ChartFunction, DomainKind, OscillationSpec, ProfileKind, cells_from_eps

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

# Load .env from project root
_env_path = Path(__file__).parent.parent / ".env"
load_dotenv(_env_path)


class Config:
    """Project-level paths and execution settings.

    Paths resolve relative to the project root, which defaults to the parent
    of the package directory.
    """

    def __init__(self, project_root: Path | None = None):
        if project_root is None:
            self._project_root = Path(__file__).parent.parent.resolve()
        else:
            self._project_root = Path(project_root).resolve()

    @property
    def project_root(self) -> Path:
        return self._project_root

    @property
    def results_dir(self) -> Path:
        """Directory for sweep reports, eigenpairs and windows."""
        return self._project_root / "results"

    @property
    def threads(self) -> int:
        """Worker count from ``STEKLOV_THREADS``; 0 or unset means one per CPU."""
        raw = os.getenv("STEKLOV_THREADS", "0")
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigError("STEKLOV_THREADS", f"must be an integer, got {raw!r}") from e
        if value < 0:
            raise ConfigError("STEKLOV_THREADS", f"must be >= 0, got {value}")
        return value or os.cpu_count() or 1

    def ensure_dirs(self) -> None:
        self.results_dir.mkdir(parents=True, exist_ok=True)


# Default configuration instance
_default_config: Config | None = None


def get_config() -> Config:
    """Get the default configuration instance."""
    global _default_config
    if _default_config is None:
        _default_config = Config()
    return _default_config


def set_config(config: Config) -> None:
    """Set the default configuration instance."""
    global _default_config
    _default_config = config


REGIMES = {"subcritical": 0.5, "critical": 1.0, "supercritical": 2.0}

DEFAULTS: dict[str, Any] = {
    "domain": "square",
    "phi_offset": 1.0,
    "phi_slope": 0.0,
    "phi_bumps": [],
    "profile": "sin2",
    "coefficients": [],
    "regime": None,
    "a": 1.0,
    "alpha": 0.3,
    "p": 2.0,
    "k": [4, 8, 16, 32],
    "eps": None,
    "resolution": 1 / 64,
    "h": 0.05,
    "h_factor": 8.0,
    "h_min": 1 / 512,
    "h_far": 0.0,
    "grading": 0.25,
    "tol_lambda": 1e-8,
    "max_iter": 500,
    "restarts": 3,
    "arc_scan": 0,
    "delta": 0.2,
    "seed": 0,
    "threads": 0,
    "output": None,
    "verbosity": 1,
}

SECTIONS = {
    "geometry": {
        "domain",
        "phi_offset",
        "phi_slope",
        "phi_bumps",
        "resolution",
        "h",
        "h_factor",
        "h_min",
        "h_far",
        "grading",
    },
    "oscillation": {"profile", "coefficients", "regime", "a", "eps", "k"},
    "solver": {"p", "tol_lambda", "max_iter", "restarts", "arc_scan", "seed"},
    "sweep": {"alpha", "k", "eps", "delta", "threads", "output", "verbosity"},
}


@dataclass(frozen=True)
class RunConfig:
    """Every run setting, validated; see ``DEFAULTS`` for the documented defaults."""

    domain: str
    phi_offset: float
    phi_slope: float
    phi_bumps: tuple[float, ...]
    profile: str
    coefficients: tuple[tuple[float, float], ...]
    regime: str
    a: float
    alpha: float
    p: float
    k: tuple[int, ...]
    resolution: float
    h: float
    h_factor: float
    h_min: float
    h_far: float
    grading: float
    tol_lambda: float
    max_iter: int
    restarts: int
    arc_scan: int
    delta: float
    seed: int
    threads: int
    output: Path | None
    verbosity: int

    def oscillation(self) -> OscillationSpec:
        return OscillationSpec(profile=self.profile, a=self.a, coefficients=self.coefficients)

    def chart(self) -> ChartFunction:
        return ChartFunction(self.phi_offset, self.phi_slope, self.phi_bumps)

    def solver(self) -> SolverConfig:
        return SolverConfig(tol_lambda=self.tol_lambda, max_iter=self.max_iter, seed=self.seed)

    def resolved_threads(self) -> int:
        return self.threads or get_config().threads

    def to_sweep(self) -> SweepConfig:
        return SweepConfig(
            a=self.a,
            alpha=self.alpha,
            p=self.p,
            ks=self.k,
            profile=self.profile,
            coefficients=self.coefficients,
            phi_offset=self.phi_offset,
            phi_slope=self.phi_slope,
            phi_bumps=self.phi_bumps,
            resolution=self.resolution,
            h_factor=self.h_factor,
            h_min=self.h_min,
            h_far=self.h_far,
            grading=self.grading,
            tol_lambda=self.tol_lambda,
            max_iter=self.max_iter,
            seed=self.seed,
            restarts=self.restarts,
            arc_scan=self.arc_scan,
            delta=self.delta,
            threads=self.resolved_threads(),
            verbosity=self.verbosity,
        )


def _read_file(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError("config", f"file {path} not found")
    try:
        if path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        elif path.suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        else:
            raise ConfigError("config", f"unsupported config format {path.suffix!r} (use .json or .toml)")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError("config", f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a table")
    return data


def _flatten(data: dict[str, Any]) -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(key, "section must be a table")
            for inner, inner_value in value.items():
                if inner not in SECTIONS[key]:
                    raise ConfigError(inner, f"unknown key in section [{key}]")
                flat[inner] = inner_value
        elif key in DEFAULTS:
            flat[key] = value
        else:
            raise ConfigError(key, "unknown configuration key")
    return flat


def _number(values: dict[str, Any], key: str, kind=float):
    try:
        return kind(values[key])
    except (TypeError, ValueError) as e:
        raise ConfigError(key, f"expected {kind.__name__}, got {values[key]!r}") from e


def _as_list(value) -> list:
    return list(value) if isinstance(value, list | tuple) else [value]


def _resolve_k(values: dict[str, Any]) -> tuple[int, ...]:
    if values.get("eps") is not None:
        return tuple(sorted({cells_from_eps(float(e)) for e in _as_list(values["eps"])}))
    try:
        ks = sorted({int(k) for k in _as_list(values["k"])})
    except (TypeError, ValueError) as e:
        raise ConfigError("k", f"expected integers, got {values['k']!r}") from e
    if not ks or ks[0] < 2:
        raise ConfigError("k", f"every k must be >= 2, got {values['k']!r}")
    return tuple(ks)


def _resolve_regime(values: dict[str, Any], explicit: set[str]) -> tuple[str, float]:
    regime = values.get("regime")
    if regime is not None and regime not in REGIMES:
        raise ConfigError("regime", f"must be one of {', '.join(REGIMES)}, got {regime!r}")
    a = _number(values, "a")
    if regime is not None and "a" not in explicit:
        a = REGIMES[regime]
    if not a > 0:
        raise ConfigError("a", f"must be positive, got {a}")
    implied = "subcritical" if a < 1 else ("critical" if a == 1 else "supercritical")
    if regime is not None and regime != implied:
        raise ConfigError("a", f"a={a} is {implied}, but regime={regime}")
    return implied, a


def parse_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional JSON/TOML file and flag overrides.

    Args:
        path: Config file; keys may be flat or grouped in ``geometry``,
            ``oscillation``, ``solver`` and ``sweep`` tables.
        overrides: Flag values; ``None`` entries are ignored.

    Returns:
        The validated configuration.

    Raises:
        ConfigError: For unknown keys, unreadable files or out-of-range values;
            ``key`` names the offending entry.
    """
    values = dict(DEFAULTS)
    explicit: set[str] = set()
    if path is not None:
        from_file = _flatten(_read_file(Path(path)))
        values.update(from_file)
        explicit.update(from_file)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown configuration key")
        if value is not None:
            values[key] = value
            explicit.add(key)
    if overrides and overrides.get("k") is not None:
        values["eps"] = None

    try:
        domain = DomainKind(values["domain"]).value
    except ValueError as e:
        raise ConfigError("domain", f"must be square or disk, got {values['domain']!r}") from e
    try:
        profile = ProfileKind(values["profile"]).value
    except ValueError as e:
        raise ConfigError("profile", f"must be sin2 or fourier, got {values['profile']!r}") from e
    try:
        coefficients = tuple((float(c), float(s)) for c, s in values["coefficients"])
    except (TypeError, ValueError) as e:
        raise ConfigError("coefficients", "expected a list of [c, s] pairs") from e

    regime, a = _resolve_regime(values, explicit)
    alpha = _number(values, "alpha")
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha", f"must lie in (0, 1), got {alpha}")
    p = _number(values, "p")
    if p < 2:
        raise ConfigError("p", f"must be >= 2, got {p}")
    for key in ("resolution", "h", "h_factor", "h_min", "tol_lambda", "delta"):
        if not _number(values, key) > 0:
            raise ConfigError(key, f"must be positive, got {values[key]}")
    for key in ("h_far", "grading"):
        if _number(values, key) < 0:
            raise ConfigError(key, f"must be >= 0, got {values[key]}")
    for key in ("max_iter", "restarts", "arc_scan", "seed", "threads", "verbosity"):
        if _number(values, key, int) < 0:
            raise ConfigError(key, f"must be >= 0, got {values[key]}")
    if _number(values, "max_iter", int) < 1:
        raise ConfigError("max_iter", "must be at least 1")

    return RunConfig(
        domain=domain,
        phi_offset=_number(values, "phi_offset"),
        phi_slope=_number(values, "phi_slope"),
        phi_bumps=tuple(float(b) for b in _as_list(values["phi_bumps"])),
        profile=profile,
        coefficients=coefficients,
        regime=regime,
        a=a,
        alpha=alpha,
        p=p,
        k=_resolve_k(values),
        resolution=_number(values, "resolution"),
        h=_number(values, "h"),
        h_factor=_number(values, "h_factor"),
        h_min=_number(values, "h_min"),
        h_far=_number(values, "h_far"),
        grading=_number(values, "grading"),
        tol_lambda=_number(values, "tol_lambda"),
        max_iter=_number(values, "max_iter", int),
        restarts=_number(values, "restarts", int),
        arc_scan=_number(values, "arc_scan", int),
        delta=_number(values, "delta"),
        seed=_number(values, "seed", int),
        threads=_number(values, "threads", int),
        output=None if values["output"] is None else Path(values["output"]),
        verbosity=_number(values, "verbosity", int),
    )


def describe_keys() -> str:
    """Key table for --help: every configuration key with its default."""
    return "\n".join(f"{key} = {value!r}" for key, value in DEFAULTS.items())
