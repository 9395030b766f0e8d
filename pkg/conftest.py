"""Shared fixtures for the lab test suite."""
import numpy as np
import pytest

from core.matrix_kernel import Projection, dagger, eigh
from core.settings import NumericalSettings
from labs.flux_lattice.lattice import Patch, build_model


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def settings():
    return NumericalSettings()


@pytest.fixture
def atomic_model():
    return build_model("atomic", Patch.centered(6), {"energies": (-1.0, 1.0)})


@pytest.fixture
def small_hofstadter():
    return build_model("hofstadter", Patch.centered(6), {"alpha": 1.0 / 3.0})


def lowest_projection(H: np.ndarray, rank: int) -> Projection:
    """Projection onto the ``rank`` lowest eigenvectors of H, whatever the gaps."""
    _, U = eigh(H)
    occupied = U[:, :rank]
    return Projection(occupied @ dagger(occupied), 1e-8, _rank=rank)
