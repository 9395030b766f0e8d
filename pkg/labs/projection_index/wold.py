"""
Wold-type decomposition P2 = V P1 V* + N_plus - N_minus.

N_plus spans im P2 cap ker P1 (the +1 eigenspace of P2 - P1), N_minus spans
im P1 cap ker P2. On the complement the pair is rotated by the Kato unitary

    V = (P2' P1' + (1 - P2')(1 - P1')) (1 - (P1' - P2')^2)^(-1/2)

with P1' = P1 - N_minus and P2' = P2 - N_plus, which requires ||P1' - P2'|| < 1.
V acts as the identity on both excess spaces.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import DegenerateGeometry
from core.matrix_kernel import Projection, dagger, eigh, operator_norm
from core.settings import DEFAULT_SETTINGS
from labs.projection_index.index import ProjectionLike, matrix_pair, split_excess

logger = logging.getLogger(__name__)


@dataclass
class WoldDecomposition:
    V: np.ndarray
    N_plus: Projection
    N_minus: Projection
    n_plus: int
    n_minus: int
    plus_vectors: np.ndarray
    minus_vectors: np.ndarray
    reconstruction_residual: float = 0.0
    unitarity_residual: float = 0.0

    @property
    def index(self) -> int:
        """index(P1, P2) = tr(P1 - P2) = n_minus - n_plus."""
        return self.n_minus - self.n_plus

    def rotated(self, P1: ProjectionLike) -> np.ndarray:
        """P~ = V P1 V*."""
        A = P1.matrix if isinstance(P1, Projection) else np.asarray(P1, dtype=complex)
        return self.V @ A @ dagger(self.V)


def _projection(vectors: np.ndarray, tol: float) -> Projection:
    return Projection(vectors @ dagger(vectors), tol, _rank=vectors.shape[1])


def wold_decompose(P1: ProjectionLike, P2: ProjectionLike, tol: Optional[float] = None) -> WoldDecomposition:
    """
    Split the pair (P1, P2) into a unitarily rotated part and finite excess.

    Args:
        P1, P2: projections of equal dimension
        tol: +-1 eigenvalue detection tolerance, also the margin for ||P1' - P2'|| < 1

    Returns:
        WoldDecomposition with reconstruction and unitarity residuals recorded
    """
    A, B = matrix_pair(P1, P2)
    tol = DEFAULT_SETTINGS.excess_tol if tol is None else tol
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)

    split = split_excess(B - A, tol)
    F_plus = split.plus_vectors
    F_minus = split.minus_vectors
    N_plus = F_plus @ dagger(F_plus)
    N_minus = F_minus @ dagger(F_minus)

    A_gen = A - N_minus
    B_gen = B - N_plus
    w, U = eigh(A_gen - B_gen)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    if norm >= 1.0 - tol:
        raise DegenerateGeometry(norm, tol)

    inv_sqrt = (U * (1.0 / np.sqrt(1.0 - w ** 2))[np.newaxis, :]) @ dagger(U)
    V = (B_gen @ A_gen + (eye - B_gen) @ (eye - A_gen)) @ inv_sqrt

    reconstruction = operator_norm(B - (V @ A @ dagger(V) + N_plus - N_minus))
    unitarity = operator_norm(dagger(V) @ V - eye)
    logger.debug(
        "wold: n_plus=%d n_minus=%d generic norm=%.3e reconstruction=%.2e",
        F_plus.shape[1], F_minus.shape[1], norm, reconstruction,
    )
    return WoldDecomposition(
        V=V,
        N_plus=_projection(F_plus, tol),
        N_minus=_projection(F_minus, tol),
        n_plus=F_plus.shape[1],
        n_minus=F_minus.shape[1],
        plus_vectors=F_plus,
        minus_vectors=F_minus,
        reconstruction_residual=reconstruction,
        unitarity_residual=unitarity,
    )
