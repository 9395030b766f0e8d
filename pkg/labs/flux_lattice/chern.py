"""Chern numbers of Bloch bands by lattice field strengths on a discretized Brillouin zone."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from core.errors import ConfigError, GapClosesOnBZ, NotCommensurate
from core.matrix_kernel import eigh
from core.settings import DEFAULT_SETTINGS
from labs.flux_lattice.lattice import LatticeModel

logger = logging.getLogger(__name__)

BandSelector = Union[Sequence[int], str]


@dataclass
class ChernResult:
    value: int
    raw: float
    grid: int
    bands: List[int]

    def as_dict(self) -> dict:
        return {"value": self.value, "raw": self.raw, "grid": self.grid, "bands": self.bands}


def _selector_level(selector: BandSelector) -> Optional[float]:
    if not isinstance(selector, str):
        return None
    if not selector.startswith("below:"):
        raise ConfigError(f"band selector must be a list of bands or 'below:<mu>', got {selector!r}")
    try:
        return float(selector.split(":", 1)[1])
    except ValueError as exc:
        raise ConfigError(f"bad Fermi level in band selector {selector!r}") from exc


def _bands(selector: BandSelector, energies: np.ndarray) -> List[int]:
    """Resolve a band selector against the spectrum at k = 0."""
    mu = _selector_level(selector)
    if mu is not None:
        return list(range(int(np.count_nonzero(energies < mu))))
    bands = sorted(int(b) for b in selector)
    if not bands or bands[0] < 0 or bands[-1] >= energies.shape[0]:
        raise ConfigError(f"band indices {bands} outside 0..{energies.shape[0] - 1}")
    if bands != list(range(bands[0], bands[-1] + 1)):
        raise ConfigError(f"band selection {bands} is not contiguous")
    return bands


def _link(a: np.ndarray, b: np.ndarray) -> complex:
    d = np.linalg.det(a.conj().T @ b)
    return d / abs(d) if abs(d) > 0 else 1.0


def chern_number(model: LatticeModel, band_selector: BandSelector = (0,), grid: int = 24,
                 gap_tol: Optional[float] = None) -> ChernResult:
    """
    Chern number of a group of Bloch bands of a translation-invariant model.

    Args:
        model: model with a magnetic unit cell commensurate with its patch
        band_selector: contiguous band indices, or 'below:<mu>' for every band under mu
        grid: points per reciprocal direction
        gap_tol: minimal gap to the neighbouring bands at every k

    Returns:
        ChernResult with the rounded value and the raw plaquette sum

    Raises:
        NotCommensurate: no unit cell, or the cell does not tile the patch
        GapClosesOnBZ: the selected bands touch the others somewhere on the grid
    """
    gap_tol = DEFAULT_SETTINGS.gap_tol if gap_tol is None else gap_tol
    if model.magnetic_cell is None:
        raise NotCommensurate(f"model {model.name} has no magnetic unit cell")
    c1, c2 = model.magnetic_cell
    if model.patch.width % c1 or model.patch.height % c2:
        raise NotCommensurate(
            f"cell {model.magnetic_cell} does not tile the {model.patch.width}x{model.patch.height} patch"
        )
    if grid < 2:
        raise ConfigError("k-grid needs at least two points per direction")

    fermi = _selector_level(band_selector)
    ks = 2.0 * np.pi * np.arange(grid) / grid
    bands = None
    states = np.empty((grid, grid), dtype=object)
    for i, k1 in enumerate(ks):
        for j, k2 in enumerate(ks):
            w, U = eigh(model.bloch_hamiltonian((k1, k2)))
            if bands is None:
                bands = _bands(band_selector, w)
                if not bands:
                    return ChernResult(0, 0.0, grid, [])
            lo, hi = bands[0], bands[-1]
            if fermi is not None and np.count_nonzero(w < fermi) != len(bands):
                raise GapClosesOnBZ(0.0, (float(k1), float(k2)))
            gaps = []
            if lo > 0:
                gaps.append(w[lo] - w[lo - 1])
            if hi + 1 < w.shape[0]:
                gaps.append(w[hi + 1] - w[hi])
            if gaps and min(gaps) < gap_tol:
                raise GapClosesOnBZ(float(min(gaps)), (float(k1), float(k2)))
            states[i, j] = U[:, lo:hi + 1]

    total = 0.0
    for i in range(grid):
        for j in range(grid):
            ip, jp = (i + 1) % grid, (j + 1) % grid
            loop = (_link(states[i, j], states[ip, j]) * _link(states[ip, j], states[ip, jp])
                    * np.conj(_link(states[i, jp], states[ip, jp])) * np.conj(_link(states[i, j], states[i, jp])))
            total += np.angle(loop)
    raw = float(total / (2.0 * np.pi))
    value = int(round(raw))
    logger.info("Chern number of bands %s on a %dx%d grid: %d (raw %.6f)", bands, grid, grid, value, raw)
    return ChernResult(value, raw, grid, bands)
