"""
Numerical defaults shared by every pipeline.

All thresholds the lab uses live here so a run can echo them into its summary.
"""
import os
from dataclasses import asdict, dataclass, replace

from core.errors import ConfigError

THREADS_ENV = "FLUXLAB_THREADS"
MAX_MODES_ENV = "FLUXLAB_MAX_MODES"


@dataclass(frozen=True)
class NumericalSettings:
    decomposition_tol: float = 1e-10
    hermiticity_tol: float = 1e-8
    projection_tol: float = 1e-8
    excess_tol: float = 1e-7          # +-1 eigenvalue detection in index_eig
    agreement_tol: float = 1e-8
    unitarity_tol: float = 1e-9
    orthonormality_tol: float = 1e-10
    invariance_tol: float = 1e-9
    integrality_tol: float = 1e-8
    gap_tol: float = 1e-6             # distance of mu from the spectrum
    max_modes: int = 14
    dense_fock_limit: int = 12
    gamma_series_max_rank: int = 8
    crossing_step_floor: float = 1e-7
    crossing_overlap_min: float = 0.8
    tracked_levels: int = 12
    deficiency_tol: float = 1e-3
    max_ode_steps: int = 1 << 14
    n_jobs: int = 1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ConfigError(f"setting {name} must be positive, got {value}")

    @classmethod
    def from_env(cls, **overrides) -> "NumericalSettings":
        """Build settings from defaults, the environment and explicit overrides."""
        values = {}
        for env, key in ((THREADS_ENV, "n_jobs"), (MAX_MODES_ENV, "max_modes")):
            raw = os.environ.get(env)
            if raw is None or raw == "":
                continue
            try:
                values[key] = int(raw)
            except ValueError as exc:
                raise ConfigError(f"{env} must be an integer, got {raw!r}") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_overrides(self, **overrides) -> "NumericalSettings":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_SETTINGS = NumericalSettings()
