"""
Flux insertion through the plaquette at FLUX_POINT.

The gauge-transformed Hamiltonian H_phi multiplies every hopping between
orbitals in the left half-plane by a phase; phi is reduced mod 2 pi so
H_{2 pi} equals H_0 exactly.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from core.errors import ConfigError, DimensionMismatch, FermiLevelInSpectrum
from core.matrix_kernel import Projection, dagger, eigh, singular_values
from core.settings import DEFAULT_SETTINGS, NumericalSettings
from labs.flux_lattice.lattice import FLUX_POINT, LatticeModel

logger = logging.getLogger(__name__)

CONVENTIONS = ("half_line", "sign")
TWO_PI = 2.0 * np.pi


def upper_mask(model: LatticeModel) -> np.ndarray:
    """chi_up as a 0/1 vector over orbitals: x2 >= 0."""
    return (model.orbital_coordinates()[:, 1] >= 0).astype(float)


def left_mask(model: LatticeModel) -> np.ndarray:
    """chi_left as a 0/1 vector over orbitals: x1 < 0."""
    return (model.orbital_coordinates()[:, 0] < 0).astype(float)


def flux_signs(model: LatticeModel, convention: str = "half_line") -> np.ndarray:
    """
    Integer matrix S with H_phi = H * e^{i phi S} entrywise.

    'half_line' uses S(x, y) = chi_up(x) - chi_up(y) and 'sign' uses
    sgn(x2 - y2); both act only when x1 <= 0 and y1 <= 0.
    """
    if convention not in CONVENTIONS:
        raise ConfigError(f"unknown flux convention {convention!r}; choose from {', '.join(CONVENTIONS)}")
    coords = model.orbital_coordinates()
    left = coords[:, 0] <= 0
    both = np.logical_and.outer(left, left)
    if convention == "half_line":
        up = (coords[:, 1] >= 0).astype(int)
        S = up[:, np.newaxis] - up[np.newaxis, :]
    else:
        S = np.sign(coords[:, 1][:, np.newaxis] - coords[:, 1][np.newaxis, :])
    return np.where(both, S, 0).astype(int)


def reduce_phi(phi: float) -> float:
    reduced = float(np.mod(phi, TWO_PI))
    return 0.0 if np.isclose(reduced, TWO_PI, rtol=0.0, atol=1e-14) else reduced


def gauge_flux_hamiltonian(model: LatticeModel, phi: float, convention: str = "half_line",
                           signs: Optional[np.ndarray] = None) -> np.ndarray:
    """
    H_phi for the flux phi threaded at FLUX_POINT.

    Args:
        model: lattice model on a finite patch
        phi: flux, any real; reduced mod 2 pi
        convention: 'half_line' or 'sign'
        signs: precomputed ``flux_signs`` to reuse across a sweep

    Returns:
        Hermitian matrix with H_0 = H_{2 pi} = model.hamiltonian()
    """
    H = model.hamiltonian()
    S = flux_signs(model, convention) if signs is None else signs
    phase = np.exp(1j * reduce_phi(phi))
    mask = np.where(S == 1, phase, np.where(S == -1, np.conj(phase), 1.0))
    return H * mask


def gauge_unitary(model: LatticeModel, phi: float) -> np.ndarray:
    """Diagonal of G_phi = e^{i phi chi_up}."""
    return np.exp(1j * reduce_phi(phi) * upper_mask(model))


def fermi_projection(H: np.ndarray, mu: float, gap_tol: Optional[float] = None,
                     phi: Optional[float] = None) -> Projection:
    """
    Spectral projection 1(H <= mu), refused when mu sits within gap_tol of the spectrum.

    Raises:
        FermiLevelInSpectrum: if some eigenvalue satisfies |E - mu| < gap_tol
    """
    gap_tol = DEFAULT_SETTINGS.gap_tol if gap_tol is None else gap_tol
    w, U = eigh(H)
    closest = int(np.argmin(np.abs(w - mu)))
    if abs(w[closest] - mu) < gap_tol:
        raise FermiLevelInSpectrum(float(w[closest]), mu, phi)
    occupied = U[:, w < mu]
    return Projection(occupied @ dagger(occupied), DEFAULT_SETTINGS.projection_tol, _rank=occupied.shape[1])


def flux_window(model: LatticeModel, radius: Optional[float] = None) -> np.ndarray:
    """
    0/1 weight of the orbitals within ``radius`` of the flux plaquette.

    The default radius is half the distance from FLUX_POINT to the patch boundary,
    which keeps boundary-localized states out of windowed counts.
    """
    if radius is None:
        radius = 0.5 * model.patch.boundary_distance(FLUX_POINT)
    if radius <= 0:
        raise ConfigError(f"window radius must be positive, got {radius}")
    coords = model.orbital_coordinates().astype(float)
    dist = np.hypot(coords[:, 0] - FLUX_POINT[0], coords[:, 1] - FLUX_POINT[1])
    return (dist <= radius).astype(float)


def _diagonalize(model: LatticeModel, phi: float, convention: str, signs: np.ndarray):
    return eigh(gauge_flux_hamiltonian(model, phi, convention, signs))


@dataclass
class FluxSweep:
    """
    Spectra of H_phi over a grid of flux values.

    Per flux value only a band of ``tracked_levels`` consecutive eigenpairs
    centered on the Fermi level is stored, with its first spectral index;
    Hamiltonians are rebuilt on demand by ``hamiltonian``.
    """

    model: LatticeModel
    grid: np.ndarray
    mu: float
    convention: str
    spectra: List[np.ndarray] = field(repr=False)
    tracked_energies: List[np.ndarray] = field(repr=False)
    tracked_vectors: List[np.ndarray] = field(repr=False)
    tracked_offsets: List[int] = field(repr=False)
    _signs: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.grid)

    @property
    def signs(self) -> np.ndarray:
        if self._signs is None:
            self._signs = flux_signs(self.model, self.convention)
        return self._signs

    def hamiltonian(self, phi: float) -> np.ndarray:
        return gauge_flux_hamiltonian(self.model, phi, self.convention, self.signs)

    def reversed(self) -> "FluxSweep":
        return replace(self, grid=self.grid[::-1].copy(), spectra=self.spectra[::-1],
                       tracked_energies=self.tracked_energies[::-1],
                       tracked_vectors=self.tracked_vectors[::-1],
                       tracked_offsets=self.tracked_offsets[::-1])


def tracked_band(w: np.ndarray, U: np.ndarray, mu: float, n_levels: int):
    """
    Consecutive eigenpairs around the Fermi level of an ascending spectrum.

    The band is [n_below - n_levels // 2, ...) clipped to the spectrum, so its
    membership only changes when a level crosses mu, never when two levels on
    opposite sides of mu trade distance to it.

    Returns:
        (offset, energies, vectors) with offset the spectral index of the first level
    """
    n = w.shape[0]
    n_levels = min(n_levels, n)
    n_below = int(np.count_nonzero(w < mu))
    lo = int(np.clip(n_below - n_levels // 2, 0, n - n_levels))
    return lo, w[lo:lo + n_levels], U[:, lo:lo + n_levels]


def build_sweep(model: LatticeModel, grid: Union[int, Sequence[float]] = 64, mu: Optional[float] = None,
                convention: str = "half_line", settings: Optional[NumericalSettings] = None,
                progress: bool = False) -> FluxSweep:
    """
    Diagonalize H_phi on a flux grid.

    Args:
        model: lattice model
        grid: number of equally spaced points on [0, 2 pi] (endpoints included) or explicit values
        mu: Fermi level; defaults to model.mu
        convention: flux convention, see ``flux_signs``
        settings: n_jobs and tracked_levels are read from here

    Returns:
        FluxSweep with full spectra and the tracked eigenpairs
    """
    settings = settings or DEFAULT_SETTINGS
    mu = model.mu if mu is None else mu
    if isinstance(grid, (int, np.integer)):
        if grid < 2:
            raise ConfigError("flux grid needs at least two points")
        values = np.linspace(0.0, TWO_PI, int(grid))
    else:
        values = np.asarray(grid, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise DimensionMismatch("1-d grid of >= 2 points", values.shape, "flux grid")
    signs = flux_signs(model, convention)
    logger.info("sweeping %d flux values on %s (dim %d), n_jobs=%d",
                values.size, model.name, model.dim, settings.n_jobs)
    jobs = (delayed(_diagonalize)(model, phi, convention, signs)
            for phi in tqdm(values, desc="flux sweep", disable=not progress))
    results = Parallel(n_jobs=settings.n_jobs)(jobs)
    spectra, energies, vectors, offsets = [], [], [], []
    for w, U in results:
        lo, e, V = tracked_band(w, U, mu, settings.tracked_levels)
        spectra.append(w)
        energies.append(e)
        vectors.append(V)
        offsets.append(lo)
    return FluxSweep(model, values, mu, convention, spectra, energies, vectors, offsets, signs)


def laughlin_unitary(model: LatticeModel) -> np.ndarray:
    """Diagonal of e^{i arg(z)} with z the orbital position relative to FLUX_POINT."""
    coords = model.orbital_coordinates().astype(float)
    z = (coords[:, 0] - FLUX_POINT[0]) + 1j * (coords[:, 1] - FLUX_POINT[1])
    return z / np.abs(z)


@dataclass
class LaughlinSummability:
    singular_values: np.ndarray = field(repr=False)
    schatten2: float
    schatten3: float

    def as_dict(self) -> dict:
        return {"schatten2": self.schatten2, "schatten3": self.schatten3,
                "largest_singular_values": self.singular_values[:8].tolist()}


def laughlin_summability(P: Projection, model: LatticeModel) -> LaughlinSummability:
    """Singular values of P - L* P L for the Laughlin unitary L of the flux point."""
    L = laughlin_unitary(model)
    rotated = (L.conj()[:, np.newaxis] * P.matrix) * L[np.newaxis, :]
    s = singular_values(P.matrix - rotated)
    return LaughlinSummability(s, float(np.sqrt(np.sum(s ** 2))), float(np.cbrt(np.sum(s ** 3))))
