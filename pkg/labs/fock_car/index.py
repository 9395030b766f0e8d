"""
Many-body index N(omega_1, omega_2) = i omega_1(u* delta(u)) for omega_2 = omega_1 o Ad_u.

Evaluated from matrix-vector products only, so u may be sparse or matrix-free:
with delta(u) = i[Q, u] the index is <u Omega, u Q Omega> - <u Omega, Q u Omega>.
"""
import logging
from typing import Optional, Union

import numpy as np

from core.errors import DimensionMismatch, NotInvariant, NotUnitary
from core.matrix_kernel import Projection
from core.settings import DEFAULT_SETTINGS, NumericalSettings
from labs.fock_car.car import CARAlgebra, FockOperator
from labs.fock_car.charge import ChargeOperator, layer_charge
from labs.fock_car.implementers import stacked_projection
from labs.fock_car.states import PureState, quasi_free_state

logger = logging.getLogger(__name__)

SAMPLE_SEED = 20240229


def unitarity_defect(u: FockOperator, state: Optional[PureState] = None, n_samples: int = 4) -> float:
    """max ||u* u x - x|| over seeded random unit vectors (and the state vector, if given)."""
    rng = np.random.default_rng(SAMPLE_SEED)
    samples = []
    for _ in range(n_samples):
        x = rng.normal(size=u.dim) + 1j * rng.normal(size=u.dim)
        samples.append(x / np.linalg.norm(x))
    if state is not None:
        samples.append(state.vector)
    u_dag = u.adjoint()
    return float(max(np.linalg.norm(u_dag.apply(u.apply(x)) - x) for x in samples))


def is_unitary(u: FockOperator, tol: Optional[float] = None) -> bool:
    tol = DEFAULT_SETTINGS.unitarity_tol if tol is None else tol
    return unitarity_defect(u) <= tol


def _charge(Q: Union[ChargeOperator, FockOperator]) -> FockOperator:
    return Q.operator if isinstance(Q, ChargeOperator) else Q


def many_body_index(state: PureState, u: FockOperator, Q: Union[ChargeOperator, FockOperator],
                    settings: Optional[NumericalSettings] = None) -> float:
    """
    i omega_1(u* i[Q, u]) for a Q-invariant pure state omega_1.

    Args:
        state: omega_1, a pure Fock vector state (quasi-free or not)
        u: unitary carrying omega_1 to omega_2 = omega_1 o Ad_u
        Q: charge generating the U(1) action

    Returns:
        the index as a real number (an integer whenever omega_2 is Q-invariant too)
    """
    settings = settings or DEFAULT_SETTINGS
    Qop = _charge(Q)
    if not (u.dim == Qop.dim == state.vector.shape[0]):
        raise DimensionMismatch(state.vector.shape[0], (u.dim, Qop.dim), "state, unitary and charge")
    defect = unitarity_defect(u, state)
    if defect > settings.unitarity_tol:
        raise NotUnitary(defect, settings.unitarity_tol)
    variance = state.variance(Qop)
    if variance > settings.invariance_tol:
        raise NotInvariant(variance, settings.invariance_tol)

    psi = state.vector
    u_psi = u.apply(psi)
    value = np.vdot(u_psi, u.apply(Qop.apply(psi))) - np.vdot(u_psi, Qop.apply(u_psi))
    if abs(value.imag) > 1e3 * settings.integrality_tol:
        logger.warning("many-body index has imaginary part %.3e", value.imag)
    return float(value.real)


def charge_difference(omega1: PureState, omega2: PureState, Q: Union[ChargeOperator, FockOperator]) -> float:
    """omega_1(Q) - omega_2(Q)."""
    Qop = _charge(Q)
    return float(omega1.expectation(Qop).real - omega2.expectation(Qop).real)


def stacked_index(P: Projection, u_hat: FockOperator, car: CARAlgebra,
                  settings: Optional[NumericalSettings] = None) -> float:
    """
    Index of the stacked state omega_P x omega_{P^perp} under u_hat with the layer-1 charge.

    ``car`` must be built on ``ModeSpace.doubled()`` of P's mode space.
    """
    if not car.modes.stacked or car.n_modes != 2 * P.dim:
        raise DimensionMismatch(2 * P.dim, car.n_modes, "stacked mode space")
    stacked = quasi_free_state(stacked_projection(P, P.complement()), car)
    return many_body_index(stacked, u_hat, layer_charge(car, 1), settings)
