"""
Lattice models on a finite rectangular patch of Z^2.

Orbitals are ordered row-major (x2 outer, x1 inner) with the internal index
innermost, matching ``ModeSpace.patch`` so a patch model can be second
quantized directly.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, DecayViolation, NonHermitian, NotCommensurate, OriginOnBoundary
from core.matrix_kernel import hermiticity_residual
from core.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)

Site = Tuple[int, int]
Kernel = Callable[[Site, Site], np.ndarray]

PRESETS = ("atomic", "hofstadter", "custom")
DEFAULT_DECAY = (10.0, 0.5)
# centre of the plaquette at the end of the half-line cut
FLUX_POINT = (0.5, -0.5)


@dataclass(frozen=True)
class Patch:
    x_min: int
    x_max: int
    y_min: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ConfigError(f"empty patch {self.bounds}")

    @classmethod
    def centered(cls, width: int, height: Optional[int] = None) -> "Patch":
        """x in [-floor(w/2), w - floor(w/2) - 1], likewise for y."""
        height = width if height is None else height
        return cls(-(width // 2), width - width // 2 - 1, -(height // 2), height - height // 2 - 1)

    @property
    def bounds(self) -> Tuple[int, int, int, int]:
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    def sites(self) -> List[Site]:
        return [(x1, x2) for x2 in range(self.y_min, self.y_max + 1)
                for x1 in range(self.x_min, self.x_max + 1)]

    def site_index(self, site: Sequence[int]) -> int:
        x1, x2 = site
        if not (self.x_min <= x1 <= self.x_max and self.y_min <= x2 <= self.y_max):
            raise KeyError(f"site {tuple(site)} outside patch {self.bounds}")
        return (x2 - self.y_min) * self.width + (x1 - self.x_min)

    def coordinates(self) -> np.ndarray:
        return np.array(self.sites(), dtype=int)

    def origin_interior(self) -> bool:
        return self.x_min < 0 < self.x_max and self.y_min < 0 < self.y_max

    def boundary_distance(self, point: Tuple[float, float]) -> float:
        px, py = point
        return float(min(px - self.x_min, self.x_max - px, py - self.y_min, self.y_max - py))

    def origin_offset(self) -> Tuple[float, float]:
        """Origin minus patch center."""
        return (-(self.x_min + self.x_max) / 2.0, -(self.y_min + self.y_max) / 2.0)


@dataclass
class DecayReport:
    constant: float
    rate: float
    max_ratio: float
    worst_pair: Optional[Tuple[Site, Site]] = None

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0

    def as_dict(self) -> dict:
        return {"constant": self.constant, "rate": self.rate, "max_ratio": self.max_ratio}


@dataclass
class LatticeModel:
    name: str
    patch: Patch
    n_internal: int
    kernel: Kernel = field(repr=False)
    mu: float = 0.0
    hop_range: Optional[int] = 1
    magnetic_cell: Optional[Tuple[int, int]] = None
    params: Dict = field(default_factory=dict)
    decay: Optional[DecayReport] = None
    _hamiltonian: Optional[np.ndarray] = field(default=None, repr=False)
    _bloch_terms: Optional[list] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.patch.n_sites * self.n_internal

    def orbital_coordinates(self) -> np.ndarray:
        """(dim, 2) lattice position of every orbital."""
        return np.repeat(self.patch.coordinates(), self.n_internal, axis=0)

    def hamiltonian(self) -> np.ndarray:
        if self._hamiltonian is None:
            self._hamiltonian = self._assemble()
        return self._hamiltonian

    def _assemble(self) -> np.ndarray:
        n = self.n_internal
        sites = self.patch.sites()
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for a, x in enumerate(sites):
            if self.hop_range is None:
                partners = sites
            else:
                r = self.hop_range
                partners = [(x[0] + d1, x[1] + d2)
                            for d2 in range(-r, r + 1) for d1 in range(-r, r + 1)
                            if self.patch.x_min <= x[0] + d1 <= self.patch.x_max
                            and self.patch.y_min <= x[1] + d2 <= self.patch.y_max]
            for y in partners:
                block = np.asarray(self.kernel(x, y), dtype=complex).reshape(n, n)
                if np.any(block):
                    b = self.patch.site_index(y)
                    H[a * n:(a + 1) * n, b * n:(b + 1) * n] = block
        return H

    def check_decay(self, constant: float, rate: float) -> DecayReport:
        """max over site pairs of ||H(x,.;y,.)|| / (C e^{-rate |x - y|})."""
        ns, n = self.patch.n_sites, self.n_internal
        blocks = self.hamiltonian().reshape(ns, n, ns, n)
        norms = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=(1, 3)))
        coords = self.patch.coordinates().astype(float)
        dist = np.linalg.norm(coords[:, np.newaxis, :] - coords[np.newaxis, :, :], axis=-1)
        ratio = norms / (constant * np.exp(-rate * dist))
        a, b = np.unravel_index(np.argmax(ratio), ratio.shape)
        sites = self.patch.sites()
        return DecayReport(constant, rate, float(ratio[a, b]), (sites[a], sites[b]))

    def bloch_terms(self) -> list:
        """(cell site a, cell site b, (n1, n2), block) with H(k) = sum block e^{i k.n}."""
        if self._bloch_terms is not None:
            return self._bloch_terms
        if self.magnetic_cell is None or self.hop_range is None:
            raise NotCommensurate(f"model {self.name} has no magnetic unit cell")
        c1, c2 = self.magnetic_cell
        cell = [(a1, a2) for a2 in range(c2) for a1 in range(c1)]
        reach1 = self.hop_range // c1 + 1
        reach2 = self.hop_range // c2 + 1
        terms = []
        for ia, sa in enumerate(cell):
            for ib, sb in enumerate(cell):
                for n1 in range(-reach1, reach1 + 1):
                    for n2 in range(-reach2, reach2 + 1):
                        x = (sa[0] + n1 * c1, sa[1] + n2 * c2)
                        block = np.asarray(self.kernel(x, sb), dtype=complex).reshape(self.n_internal, self.n_internal)
                        shifted = np.asarray(self.kernel((x[0] + c1, x[1] + c2), (sb[0] + c1, sb[1] + c2)), dtype=complex)
                        if not np.allclose(block, shifted.reshape(block.shape), atol=1e-12):
                            raise NotCommensurate(
                                f"kernel of {self.name} is not periodic under the cell {self.magnetic_cell}"
                            )
                        if np.any(block):
                            terms.append((ia, ib, (n1, n2), block))
        self._bloch_terms = terms
        return terms

    def bloch_hamiltonian(self, k: Sequence[float]) -> np.ndarray:
        c1, c2 = self.magnetic_cell
        n = self.n_internal
        Hk = np.zeros((c1 * c2 * n, c1 * c2 * n), dtype=complex)
        for ia, ib, (n1, n2), block in self.bloch_terms():
            Hk[ia * n:(ia + 1) * n, ib * n:(ib + 1) * n] += block * np.exp(1j * (k[0] * n1 + k[1] * n2))
        return Hk


def atomic_kernel(energies: Sequence[float]) -> Kernel:
    E = np.diag(np.asarray(energies, dtype=complex))
    zero = np.zeros_like(E)

    def kernel(x: Site, y: Site) -> np.ndarray:
        return E if tuple(x) == tuple(y) else zero

    return kernel


def hofstadter_kernel(alpha: float, t: float = 1.0) -> Kernel:
    """Nearest-neighbour hopping -t with Landau-gauge phase e^{2 pi i alpha x1} on vertical hops."""

    def kernel(x: Site, y: Site) -> np.ndarray:
        d1, d2 = x[0] - y[0], x[1] - y[1]
        if abs(d1) == 1 and d2 == 0:
            return np.array([[-t]], dtype=complex)
        if d1 == 0 and abs(d2) == 1:
            return np.array([[-t * np.exp(2j * np.pi * alpha * x[0] * d2)]])
        return np.zeros((1, 1), dtype=complex)

    return kernel


def table_kernel(hoppings: Dict[Tuple[int, int], np.ndarray], n_internal: int) -> Kernel:
    """Translation-invariant kernel H(x, y) = hoppings[x - y]."""
    zero = np.zeros((n_internal, n_internal), dtype=complex)

    def kernel(x: Site, y: Site) -> np.ndarray:
        return hoppings.get((x[0] - y[0], x[1] - y[1]), zero)

    return kernel


def _parse_hoppings(raw, n_internal: int) -> Dict[Tuple[int, int], np.ndarray]:
    table = {}
    for entry in raw:
        try:
            d = tuple(int(v) for v in entry["d"])
            M = np.asarray(entry["matrix"], dtype=complex).reshape(n_internal, n_internal)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad hopping entry {entry!r}: {exc}") from exc
        table[d] = M
    return table


def magnetic_period(alpha: float) -> int:
    frac = Fraction(alpha).limit_denominator(1000)
    if abs(float(frac) - alpha) > 1e-12:
        return 0
    return frac.denominator


def build_model(preset: str, patch: Patch, params: Optional[Dict] = None) -> LatticeModel:
    """
    Build and validate a lattice model.

    Args:
        preset: 'atomic' (params: energies), 'hofstadter' (params: alpha, t) or
            'custom' (params: kernel callable or hoppings table, n_internal, hop_range)
        patch: finite patch with the origin in its interior
        params: preset parameters; 'mu' and 'decay' = (C, rate) are common to all

    Returns:
        LatticeModel with its decay report attached
    """
    params = dict(params or {})
    if not patch.origin_interior():
        raise OriginOnBoundary(patch.bounds)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    constant, rate = params.pop("decay", DEFAULT_DECAY)

    if preset == "atomic":
        energies = tuple(params.get("energies", (-1.0, 1.0)))
        model = LatticeModel("atomic", patch, len(energies), atomic_kernel(energies),
                             mu=float(params.get("mu", 0.0)), hop_range=0, magnetic_cell=(1, 1),
                             params={"energies": list(energies)})
    elif preset == "hofstadter":
        alpha = float(params.get("alpha", 1.0 / 3.0))
        t = float(params.get("t", 1.0))
        q = magnetic_period(alpha)
        model = LatticeModel("hofstadter", patch, 1, hofstadter_kernel(alpha, t),
                             mu=float(params.get("mu", -1.3)), hop_range=1,
                             magnetic_cell=(q, 1) if q else None,
                             params={"alpha": alpha, "t": t})
    else:
        n_internal = int(params.get("n_internal", 1))
        if "kernel" in params:
            kernel = params["kernel"]
            hop_range = params.get("hop_range")
            cell = params.get("magnetic_cell")
        else:
            table = _parse_hoppings(params.get("hoppings", []), n_internal)
            kernel = table_kernel(table, n_internal)
            hop_range = max((max(abs(d[0]), abs(d[1])) for d in table), default=0)
            cell = (1, 1)
        model = LatticeModel("custom", patch, n_internal, kernel,
                             mu=float(params.get("mu", 0.0)), hop_range=hop_range,
                             magnetic_cell=tuple(cell) if cell else None,
                             params={"n_internal": n_internal})

    H = model.hamiltonian()
    residual = hermiticity_residual(H)
    if residual > DEFAULT_SETTINGS.hermiticity_tol * max(1.0, float(np.abs(H).max())):
        raise NonHermitian(residual, DEFAULT_SETTINGS.hermiticity_tol)
    model.decay = model.check_decay(constant, rate)
    if not model.decay.passed:
        x, y = model.decay.worst_pair
        dist = float(np.hypot(x[0] - y[0], x[1] - y[1]))
        bound = constant * np.exp(-rate * dist)
        raise DecayViolation(x, y, model.decay.max_ratio * bound, bound)
    logger.info("built %s model on %dx%d patch, dim %d, mu %.4f",
                model.name, patch.width, patch.height, model.dim, model.mu)
    return model
