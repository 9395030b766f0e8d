"""Core numerical substrate for the flux-index lab."""
from core.base_lab import BaseLab, Check
from core.errors import LabError, ConfigError, NumericalError, AssertionFailure
from core.matrix_kernel import (
    Projection,
    eigh,
    expm_antihermitian,
    schatten_norm,
    validate_projection,
)
from core.settings import NumericalSettings, DEFAULT_SETTINGS

__all__ = [
    'BaseLab', 'Check',
    'LabError', 'ConfigError', 'NumericalError', 'AssertionFailure',
    'Projection', 'eigh', 'expm_antihermitian', 'schatten_norm', 'validate_projection',
    'NumericalSettings', 'DEFAULT_SETTINGS',
]
