"""
Quasi-adiabatic flux insertion by the truncated Kato generator.

P_up(phi) = G_phi P G_phi* with G_phi = e^{i phi chi_up}. Its Kato generator,
the Hermitian K with i dU/dphi = K U transporting P_up, is
K = i[dP_up, P_up] = -[[chi_up, P_up], P_up]. Truncating it to the left
half-plane inserts the flux only at the end of the cut.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from core.errors import DimensionMismatch, StepFloorReached, UnitarityLoss
from core.matrix_kernel import (
    Projection,
    commutator,
    dagger,
    eigh,
    expm_antihermitian,
    singular_values,
    unitary_from_eigh,
    validate_projection,
)
from core.settings import DEFAULT_SETTINGS, NumericalSettings
from labs.flux_lattice.flux import TWO_PI, fermi_projection, gauge_unitary, left_mask, upper_mask
from labs.flux_lattice.lattice import LatticeModel
from labs.projection_index.index import ProjectionLike, projection_matrix

logger = logging.getLogger(__name__)

UNITARITY_BOUND = 1e-8


def _ground_projection(model: LatticeModel, P: Optional[ProjectionLike]) -> np.ndarray:
    if P is None:
        P = fermi_projection(model.hamiltonian(), model.mu)
    return projection_matrix(P)


def kato_generator(model: LatticeModel, phi: float = 0.0, d_phi: Optional[float] = None,
                   P: Optional[ProjectionLike] = None) -> np.ndarray:
    """
    Kato generator of the family P_up(phi).

    Args:
        model: lattice model; P defaults to its Fermi projection at model.mu
        phi: flux value
        d_phi: if given, dP_up is taken by a central finite difference of this
            step instead of the exact i[chi_up, P_up]
        P: ground-state projection at phi = 0

    Returns:
        Hermitian matrix K with i dU/dphi = K U transporting P_up
    """
    P0 = _ground_projection(model, P)
    g = gauge_unitary(model, phi)
    P_up = g[:, np.newaxis] * P0 * g.conj()[np.newaxis, :]
    if d_phi is None:
        dP = 1j * commutator(np.diag(upper_mask(model)).astype(complex), P_up)
    else:
        def conjugated(t):
            gt = gauge_unitary(model, t)
            return gt[:, np.newaxis] * P0 * gt.conj()[np.newaxis, :]
        dP = (conjugated(phi + d_phi) - conjugated(phi - d_phi)) / (2.0 * d_phi)
    K = 1j * commutator(dP, P_up)
    return 0.5 * (K + dagger(K))


def truncate_left(K: np.ndarray, model: LatticeModel) -> np.ndarray:
    """chi_left K chi_left with chi_left the orbitals at x1 < 0."""
    K = np.asarray(K)
    if K.shape != (model.dim, model.dim):
        raise DimensionMismatch((model.dim, model.dim), K.shape, "generator")
    left = left_mask(model)
    return left[:, np.newaxis] * K * left[np.newaxis, :]


def exact_quasi_adiabatic_unitary(model: LatticeModel, phi: float = TWO_PI,
                                  P: Optional[ProjectionLike] = None) -> np.ndarray:
    """Closed form G_phi exp(-i phi (chi_up + K_L)) of the truncated evolution."""
    K_L = truncate_left(kato_generator(model, 0.0, P=P), model)
    A = np.diag(upper_mask(model)).astype(complex) + K_L
    g = np.exp(1j * phi * upper_mask(model))
    return g[:, np.newaxis] * expm_antihermitian(A, -phi)


def charge_deficiency(P_qa: ProjectionLike, P_mu: ProjectionLike,
                      window: Optional[np.ndarray] = None) -> float:
    """trace(P_qa - P_mu), restricted to a diagonal window if one is given."""
    A, B = projection_matrix(P_qa), projection_matrix(P_mu)
    if A.shape != B.shape:
        raise DimensionMismatch(A.shape, B.shape, "projection")
    diff = np.real(np.diag(A - B))
    if window is not None:
        window = np.asarray(window, dtype=float)
        if window.shape != diff.shape:
            raise DimensionMismatch(diff.shape, window.shape, "window")
        diff = diff * window
    return float(np.sum(diff))


def singular_value_decay(P_qa: ProjectionLike, P_mu: ProjectionLike, n_fit: int = 40,
                         floor: float = 1e-13) -> float:
    """
    Fitted rate r of sigma_k ~ e^{-r k} over the leading singular values of P_qa - P_mu.

    Values below ``floor`` are left out of the fit; returns inf when fewer than
    two remain.
    """
    s = singular_values(projection_matrix(P_qa) - projection_matrix(P_mu))[:n_fit]
    s = s[s > floor]
    if s.size < 2:
        return float("inf")
    slope = np.polyfit(np.arange(s.size), np.log(s), 1)[0]
    return float(-slope)


@dataclass
class QuasiAdiabaticResult:
    unitary: np.ndarray = field(repr=False)
    projection: Projection = field(repr=False)
    ground: Projection = field(repr=False)
    n_steps: int
    deficiency: float
    deficiency_change: float
    unitarity_residual: float
    window: Optional[np.ndarray] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "n_steps": self.n_steps,
            "charge_deficiency": self.deficiency,
            "deficiency_change": self.deficiency_change,
            "unitarity_residual": self.unitarity_residual,
        }


def _integrate(K_L: np.ndarray, up: np.ndarray, n_steps: int) -> np.ndarray:
    w, V = eigh(K_L)
    d_phi = TWO_PI / n_steps
    step = unitary_from_eigh(w, V, -d_phi)
    U = np.eye(K_L.shape[0], dtype=complex)
    for j in range(n_steps):
        g = np.exp(1j * (j + 0.5) * d_phi * up)
        # exp(-i K(phi_mid) d_phi) = G_mid exp(-i K_L d_phi) G_mid*
        U = g[:, np.newaxis] * (step @ (g.conj()[:, np.newaxis] * U))
    return U


def quasi_adiabatic_evolve(model: LatticeModel, grid: Union[int, np.ndarray] = 64,
                           window: Optional[np.ndarray] = None,
                           settings: Optional[NumericalSettings] = None,
                           P: Optional[ProjectionLike] = None) -> QuasiAdiabaticResult:
    """
    Evolve P through one flux quantum with the midpoint exponential stepper.

    The step count starts at ``grid`` (or len(grid) - 1 for an explicit grid)
    and doubles until the charge deficiency changes by less than
    settings.deficiency_tol.

    Args:
        model: lattice model
        grid: initial number of steps over [0, 2 pi]
        window: diagonal window for the deficiency (None: plain trace)
        settings: deficiency_tol, max_ode_steps and unitarity checks
        P: ground-state projection; defaults to the Fermi projection at model.mu

    Returns:
        QuasiAdiabaticResult with U^qa, P^qa = U P U* and the converged deficiency

    Raises:
        StepFloorReached: the step count exceeded max_ode_steps before converging
        UnitarityLoss: ||U* U - 1|| above 1e-8 at phi = 2 pi
    """
    settings = settings or DEFAULT_SETTINGS
    if P is None:
        P = fermi_projection(model.hamiltonian(), model.mu)
    P0 = projection_matrix(P)
    ground = P if isinstance(P, Projection) else validate_projection(P0)
    K_L = truncate_left(kato_generator(model, 0.0, P=P0), model)
    up = upper_mask(model)

    n_steps = int(grid) if np.ndim(grid) == 0 else max(1, len(grid) - 1)
    previous = None
    change = float("inf")
    while True:
        U = _integrate(K_L, up, n_steps)
        P_qa = U @ P0 @ dagger(U)
        deficiency = charge_deficiency(P_qa, P0, window)
        if previous is not None:
            change = abs(deficiency - previous)
            logger.debug("quasi-adiabatic: %d steps, deficiency %.6f, change %.2e", n_steps, deficiency, change)
            if change < settings.deficiency_tol:
                break
        if 2 * n_steps > settings.max_ode_steps:
            raise StepFloorReached(n_steps, change)
        previous = deficiency
        n_steps *= 2

    residual = float(np.linalg.norm(dagger(U) @ U - np.eye(U.shape[0]), ord=2))
    if residual > UNITARITY_BOUND:
        raise UnitarityLoss(residual, UNITARITY_BOUND)
    projection = validate_projection(0.5 * (P_qa + dagger(P_qa)), tol=max(settings.projection_tol, 1e-8))
    logger.info("quasi-adiabatic evolution converged at %d steps, deficiency %.6f", n_steps, deficiency)
    return QuasiAdiabaticResult(U, projection, ground, n_steps, deficiency, change, residual, window)
