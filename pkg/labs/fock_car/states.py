"""
Pure states on the finite CAR algebra, represented by a normalized Fock vector.

A quasi-free state omega_P is stored as the Slater vector
a*(phi_1) ... a*(phi_k) |vac> over the eigenbasis of P (descending
eigenvalue, phase fixed), so omega_P(a*(f) a(g)) = <g, P f>.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from core.errors import DimensionMismatch
from core.matrix_kernel import Projection, validate_projection
from labs.fock_car.car import CARAlgebra, FockOperator
from labs.fock_car.modes import ModeSpace

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PureState:
    modes: ModeSpace
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if v.shape[0] != self.modes.fock_dim:
            raise DimensionMismatch(self.modes.fock_dim, v.shape[0], "state vector")
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("state vector is zero")
        object.__setattr__(self, "vector", v / norm)

    def expectation(self, op: FockOperator) -> complex:
        return complex(np.vdot(self.vector, op.apply(self.vector)))

    def __call__(self, op: FockOperator) -> complex:
        return self.expectation(op)

    def conjugated_by(self, u: FockOperator) -> "PureState":
        """omega o Ad_u, i.e. A -> omega(u* A u), represented by u Omega."""
        return PureState(self.modes, u.apply(self.vector))

    def two_point(self, f: np.ndarray, g: np.ndarray, car: CARAlgebra) -> complex:
        """omega(a*(f) a(g)) = <a(f) Omega, a(g) Omega>."""
        return complex(np.vdot(car.annihilate(f, self.vector), car.annihilate(g, self.vector)))

    def variance(self, op: FockOperator) -> float:
        """<A^2> - <A>^2 for Hermitian A, from matrix-vector products only."""
        Av = op.apply(self.vector)
        mean = np.vdot(self.vector, Av).real
        return float(max(np.vdot(Av, Av).real - mean ** 2, 0.0))


@dataclass(frozen=True, eq=False)
class QuasiFreeState(PureState):
    P: Optional[Projection] = None

    @property
    def particle_number(self) -> int:
        return self.P.rank


def two_point_matrix(state: PureState, car: CARAlgebra) -> np.ndarray:
    """C[i, j] = omega(a_i* a_j); equals P.T for omega_P."""
    A = np.column_stack([car.annihilators[k] @ state.vector for k in range(car.n_modes)])
    return A.conj().T @ A


def slater_vector(basis: np.ndarray, car: CARAlgebra) -> np.ndarray:
    """a*(phi_1) ... a*(phi_k) |vac> for the columns phi_j of ``basis``."""
    psi = car.vacuum()
    for j in reversed(range(basis.shape[1])):
        psi = car.create(basis[:, j], psi)
    return psi


def quasi_free_state(P: Union[Projection, np.ndarray], car: CARAlgebra,
                     tol: Optional[float] = None) -> QuasiFreeState:
    """
    Pure quasi-free state omega_P as a Slater vector.

    Args:
        P: projection on the one-particle space of ``car``
        car: CAR generators of the mode space
        tol: projection validation tolerance

    Returns:
        QuasiFreeState holding P and its normalized Fock vector
    """
    if not isinstance(P, Projection):
        P = validate_projection(P, tol)
    if P.dim != car.n_modes:
        raise DimensionMismatch(car.n_modes, P.dim, "one-particle projection")
    basis = P.range_basis()
    psi = slater_vector(basis, car)
    return QuasiFreeState(modes=car.modes, vector=psi, P=P)


def wick_expectation(P: Union[Projection, np.ndarray], creators: Sequence[np.ndarray],
                     annihilators: Sequence[np.ndarray]) -> complex:
    """
    omega_P(a*(f_n) ... a*(f_1) a(g_1) ... a(g_m)) by the determinant rule.

    ``creators`` lists f_1 .. f_n and ``annihilators`` lists g_1 .. g_m; the
    value is delta_nm det(<g_i, P f_j>).
    """
    if len(creators) != len(annihilators):
        return 0.0j
    if not creators:
        return 1.0 + 0.0j
    M = P.matrix if isinstance(P, Projection) else np.asarray(P, dtype=complex)
    G = np.array([np.asarray(g, dtype=complex) for g in annihilators])
    F = np.array([np.asarray(f, dtype=complex) for f in creators])
    gram = G.conj() @ M @ F.T
    return complex(np.linalg.det(gram))


def state_distance(omega1: PureState, omega2: PureState) -> float:
    """2 sqrt(1 - |<Omega_2, Omega_1>|^2), the norm distance of two pure states."""
    if omega1.vector.shape != omega2.vector.shape:
        raise DimensionMismatch(omega1.vector.shape, omega2.vector.shape, "state")
    overlap = abs(np.vdot(omega2.vector, omega1.vector)) ** 2
    return float(2.0 * np.sqrt(max(0.0, 1.0 - overlap)))
