"""
Run configuration loaded from a JSON file and overridden by command-line flags.

Example file::

    {
        "schema_version": 1,
        "seed": 7,
        "preset": "hofstadter",
        "alpha": 0.3333333333333333,
        "patch": [30, 30],
        "mu": -1.3,
        "grid_size": 64,
        "deficiency_tol": 1e-3,
        "index_pair": {"example": "dimer", "n_dimers": 200, "beta": 0.4}
    }

Any ``NumericalSettings`` field may appear at the top level or under
"tolerances"; every other unknown key is rejected.
"""
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional

from core.errors import ConfigError
from core.settings import NumericalSettings

SCHEMA_VERSION = 1
_TOLERANCE_KEYS = {f.name for f in fields(NumericalSettings)}


@dataclass
class IndexPairConfig:
    example: str = "shift"
    sites: int = 41
    beta: float = 0.4
    n_dimers: int = 200
    dim: int = 64
    trials: int = 1
    n_plus: int = 2
    n_minus: int = 1
    p: Optional[str] = None
    q: Optional[str] = None


@dataclass
class CorrespondenceConfig:
    example: str = "random"
    modes: int = 8
    trials: int = 1


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    out: Optional[str] = None
    preset: str = "hofstadter"
    alpha: float = 1.0 / 3.0
    patch: List[int] = field(default_factory=lambda: [30, 30])
    n_internal: int = 1
    mu: Optional[float] = None
    energies: Optional[List[float]] = None
    hoppings: Optional[List[dict]] = None
    grid_size: int = 64
    window_radius: Optional[float] = None
    flux_convention: str = "half_line"
    ode_steps: int = 64
    chern_grid: int = 24
    chern_bands: Optional[List[int]] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    index_pair: IndexPairConfig = field(default_factory=IndexPairConfig)
    correspondence: CorrespondenceConfig = field(default_factory=CorrespondenceConfig)

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}")
        unknown = set(self.tolerances) - _TOLERANCE_KEYS
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(unknown))}")
        if len(self.patch) not in (2, 4):
            raise ConfigError("patch must be [width, height] or [x_min, x_max, y_min, y_max]")

    def settings(self) -> NumericalSettings:
        """Numerical settings: defaults, then the environment, then this config."""
        return NumericalSettings.from_env(**self.tolerances)

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied; tolerance names go to ``tolerances``."""
        top, tolerances = {}, dict(self.tolerances)
        for key, value in overrides.items():
            if value is None:
                continue
            if key in _TOLERANCE_KEYS:
                tolerances[key] = value
            elif key in {f.name for f in fields(self)}:
                top[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return replace(self, tolerances=tolerances, **top)

    def as_dict(self) -> dict:
        return asdict(self)


def _section(cls, raw, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(unknown))}")
    return cls(**raw)


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a parsed config mapping and build the RunConfig tree."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(raw)
    tolerances = dict(data.pop("tolerances", {}) or {})
    for key in list(data):
        if key in _TOLERANCE_KEYS:
            tolerances[key] = data.pop(key)
    sections = {
        "index_pair": (IndexPairConfig, data.pop("index_pair", {})),
        "correspondence": (CorrespondenceConfig, data.pop("correspondence", {})),
    }
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    nested = {name: _section(cls, value, name) for name, (cls, value) in sections.items()}
    try:
        return RunConfig(tolerances=tolerances, **nested, **data)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def load_config(path: Optional[str]) -> RunConfig:
    """RunConfig from a JSON file, or the defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
