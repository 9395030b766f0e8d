"""
Spectral flow of H_phi through the Fermi level.

Levels near mu are followed between consecutive flux values by maximal
eigenvector overlap. A branch that moves from below mu to above it counts
+1 (rising), the opposite move -1. Intervals where the matching is unsure
are bisected until they resolve or reach the step floor.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from core.errors import NonSimpleCrossing, UnresolvedCrossing
from core.matrix_kernel import eigh
from core.settings import DEFAULT_SETTINGS, NumericalSettings
from labs.flux_lattice.flux import FluxSweep, tracked_band
from labs.projection_index.index import window_weights

logger = logging.getLogger(__name__)


@dataclass
class Crossing:
    phi: float
    direction: int
    energy_before: float
    energy_after: float
    overlap: float
    window_weight: float = 1.0
    branch: int = 0

    @property
    def localized(self) -> bool:
        return self.window_weight > 0.5

    def as_dict(self) -> dict:
        return {
            "phi": self.phi,
            "direction": self.direction,
            "energy_before": self.energy_before,
            "energy_after": self.energy_after,
            "overlap": self.overlap,
            "window_weight": self.window_weight,
            "branch": self.branch,
        }


@dataclass
class SpectralFlowResult:
    crossings: List[Crossing] = field(default_factory=list)
    refinements: int = 0

    @property
    def net_flow(self) -> int:
        """Signed count of crossings localized in the window."""
        return int(sum(c.direction for c in self.crossings if c.localized))

    @property
    def total_flow(self) -> int:
        return int(sum(c.direction for c in self.crossings))

    @property
    def edge_flow(self) -> int:
        return self.total_flow - self.net_flow

    def as_dict(self) -> dict:
        return {
            "net_flow": self.net_flow,
            "total_flow": self.total_flow,
            "edge_flow": self.edge_flow,
            "refinements": self.refinements,
            "crossings": [c.as_dict() for c in self.crossings],
        }


@dataclass
class _Level:
    """Eigen-data of H_phi at one flux value."""

    phi: float
    n_below: int
    offset: int
    energies: np.ndarray
    vectors: np.ndarray

    def near_mu(self, position: int, reach: int) -> bool:
        """Whether band position ``position`` lies within ``reach`` levels of mu."""
        index = self.offset + position
        return self.n_below - reach <= index < self.n_below + reach


def _level_at(sweep: FluxSweep, phi: float, n_levels: int) -> _Level:
    w, U = eigh(sweep.hamiltonian(phi))
    lo, e, V = tracked_band(w, U, sweep.mu, n_levels)
    return _Level(phi, int(np.count_nonzero(w < sweep.mu)), lo, e, V)


def _grid_level(sweep: FluxSweep, j: int) -> _Level:
    return _Level(float(sweep.grid[j]), int(np.count_nonzero(sweep.spectra[j] < sweep.mu)),
                  sweep.tracked_offsets[j], sweep.tracked_energies[j], sweep.tracked_vectors[j])


def _candidates(a: _Level, b: _Level, mu: float, window: Optional[np.ndarray]):
    overlap = np.abs(a.vectors.conj().T @ b.vectors)
    rows, cols = linear_sum_assignment(-overlap)
    # levels leaving or entering at the band edges pair up with each other;
    # only levels next to mu can cross it
    reach = max(1, a.energies.shape[0] // 4)
    found = []
    for r, c in zip(rows, cols):
        below_a, below_b = a.energies[r] < mu, b.energies[c] < mu
        if below_a == below_b:
            continue
        if not (a.near_mu(r, reach) and b.near_mu(c, reach)):
            continue
        weight = 1.0
        if window is not None:
            weight = 0.5 * float(window_weights(a.vectors[:, [r]], window)[0]
                                 + window_weights(b.vectors[:, [c]], window)[0])
        ea, eb = float(a.energies[r]), float(b.energies[c])
        # linear interpolation of the crossing point
        t = (mu - ea) / (eb - ea) if eb != ea else 0.5
        found.append(Crossing(
            phi=a.phi + t * (b.phi - a.phi),
            direction=1 if below_a else -1,
            energy_before=ea,
            energy_after=eb,
            overlap=float(overlap[r, c]),
            window_weight=weight,
            branch=a.offset + int(r),
        ))
    return found


def _resolve(sweep: FluxSweep, a: _Level, b: _Level, window, settings: NumericalSettings,
             counter: List[int]) -> List[Crossing]:
    found = _candidates(a, b, sweep.mu, window)
    consistent = (b.n_below - a.n_below) == -sum(c.direction for c in found)
    sharp = all(c.overlap >= settings.crossing_overlap_min for c in found)
    if consistent and sharp and len(found) <= 1:
        return found
    width = abs(b.phi - a.phi)
    if width < settings.crossing_step_floor:
        if len(found) > 1 and consistent:
            raise NonSimpleCrossing(0.5 * (a.phi + b.phi), [c.branch for c in found])
        branch = found[0].branch if found else None
        raise UnresolvedCrossing(0.5 * (a.phi + b.phi), branch=branch, width=width)
    counter[0] += 1
    mid = _level_at(sweep, 0.5 * (a.phi + b.phi), a.energies.shape[0])
    return (_resolve(sweep, a, mid, window, settings, counter)
            + _resolve(sweep, mid, b, window, settings, counter))


def spectral_flow(sweep: FluxSweep, window: Optional[np.ndarray] = None,
                  settings: Optional[NumericalSettings] = None) -> SpectralFlowResult:
    """
    Signed crossings of mu along the sweep, in the order of its grid.

    Args:
        sweep: FluxSweep (a reversed sweep gives the negated flow)
        window: optional 0/1 orbital weight; crossings whose eigenvector has
            more than half its weight inside count towards ``net_flow``
        settings: crossing_overlap_min and crossing_step_floor

    Returns:
        SpectralFlowResult with every crossing and the net, total and edge flows
    """
    settings = settings or DEFAULT_SETTINGS
    counter = [0]
    crossings: List[Crossing] = []
    previous = _grid_level(sweep, 0)
    for j in range(1, len(sweep)):
        current = _grid_level(sweep, j)
        crossings.extend(_resolve(sweep, previous, current, window, settings, counter))
        previous = current
    result = SpectralFlowResult(crossings, counter[0])
    logger.info("spectral flow: %d crossings, net %d, total %d (%d bisections)",
                len(crossings), result.net_flow, result.total_flow, counter[0])
    return result
