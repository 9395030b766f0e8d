"""
Index of a pair of projections by three independent formulas.

    index_eig          multiplicity of +1 minus multiplicity of -1 in the spectrum of P - Q
    index_trace_power  tr((P - Q)^(2p' + 1))
    index_arveson      tr(Q (P - Q) Q) + tr(Q^perp (P - Q) Q^perp)
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import AmbiguousSpectrum, DimensionMismatch
from core.matrix_kernel import Projection, as_matrix, eigh, same_shape
from core.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)

ProjectionLike = Union[Projection, np.ndarray]


def projection_matrix(P: ProjectionLike) -> np.ndarray:
    if isinstance(P, Projection):
        return P.matrix
    return as_matrix(P)


def matrix_pair(P: ProjectionLike, Q: ProjectionLike) -> Tuple[np.ndarray, np.ndarray]:
    A, B = projection_matrix(P), projection_matrix(Q)
    same_shape(A, B, "projection pair")
    return A, B


def window_weights(U: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Weight <u_k, W u_k> of every column of ``U`` for a diagonal window W."""
    window = np.asarray(window, dtype=float)
    if window.shape != (U.shape[0],):
        raise DimensionMismatch((U.shape[0],), window.shape, "window")
    return np.einsum("i,ik->k", window, np.abs(U) ** 2)


@dataclass
class ExcessSplit:
    """Eigen-data of a difference of projections split at +-1."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def plus_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, self.plus]

    @property
    def minus_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, self.minus]


def split_excess(D: np.ndarray, tol: float, window: Optional[np.ndarray] = None) -> ExcessSplit:
    """
    Classify eigenvalues of the Hermitian difference ``D`` near +1 and -1.

    Eigenvalues in the dead zone (tol, 2 tol) around +-1 raise AmbiguousSpectrum.
    With a window, only eigenvectors whose window weight exceeds 1/2 are
    classified (and checked against the dead zone).
    """
    w, U = eigh(D)
    dist_plus = np.abs(w - 1.0)
    dist_minus = np.abs(w + 1.0)
    counted = np.ones(w.shape, dtype=bool)
    if window is not None:
        counted = window_weights(U, window) > 0.5
    nearest = np.minimum(dist_plus, dist_minus)
    dead = counted & (nearest > tol) & (nearest < 2 * tol)
    if np.any(dead):
        raise AmbiguousSpectrum(float(w[dead][0]), tol)
    return ExcessSplit(
        eigenvalues=w,
        eigenvectors=U,
        plus=counted & (dist_plus <= tol),
        minus=counted & (dist_minus <= tol),
    )


def index_eig(P: ProjectionLike, Q: ProjectionLike, tol: Optional[float] = None,
              window: Optional[np.ndarray] = None) -> int:
    """
    dim(im P cap ker Q) - dim(im Q cap ker P) from the +-1 eigenvalues of P - Q.

    Args:
        P, Q: projections of equal dimension
        tol: distance from +-1 within which an eigenvalue counts
        window: optional diagonal site weight; only eigenvectors localized in it count

    Returns:
        the integer index
    """
    A, B = matrix_pair(P, Q)
    tol = DEFAULT_SETTINGS.excess_tol if tol is None else tol
    split = split_excess(A - B, tol, window)
    return int(np.count_nonzero(split.plus)) - int(np.count_nonzero(split.minus))


def index_trace_power(P: ProjectionLike, Q: ProjectionLike, p_prime: int = 0) -> float:
    if p_prime < 0:
        raise ValueError(f"p_prime must be >= 0, got {p_prime}")
    A, B = matrix_pair(P, Q)
    D = A - B
    return float(np.trace(np.linalg.matrix_power(D, 2 * p_prime + 1)).real)


def index_arveson(P: ProjectionLike, Q: ProjectionLike) -> float:
    A, B = matrix_pair(P, Q)
    D = A - B
    B_perp = np.eye(B.shape[0], dtype=complex) - B
    return float(np.trace(B @ D @ B).real + np.trace(B_perp @ D @ B_perp).real)


@dataclass
class IndexReport:
    value_eig: int
    value_trace_power: float
    value_arveson: float
    agreement_residual: float
    trace_powers: Dict[int, float] = field(default_factory=dict)
    tol: float = DEFAULT_SETTINGS.agreement_tol

    @property
    def agrees(self) -> bool:
        return self.agreement_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "value_eig": self.value_eig,
            "value_trace_power": self.value_trace_power,
            "value_arveson": self.value_arveson,
            "trace_powers": {str(k): v for k, v in sorted(self.trace_powers.items())},
            "agreement_residual": self.agreement_residual,
            "agreement_tol": self.tol,
            "agrees": self.agrees,
        }


def index_report(P: ProjectionLike, Q: ProjectionLike, p_primes: Sequence[int] = (0, 1, 2),
                 tol: Optional[float] = None, agreement_tol: Optional[float] = None) -> IndexReport:
    """Run all three formulas and record the largest disagreement."""
    agreement_tol = DEFAULT_SETTINGS.agreement_tol if agreement_tol is None else agreement_tol
    value = index_eig(P, Q, tol=tol)
    powers = {int(p): index_trace_power(P, Q, int(p)) for p in p_primes}
    arveson = index_arveson(P, Q)
    residual = max([abs(v - value) for v in powers.values()] + [abs(arveson - value)])
    report = IndexReport(
        value_eig=value,
        value_trace_power=powers.get(0, next(iter(powers.values()))),
        value_arveson=arveson,
        agreement_residual=float(residual),
        trace_powers=powers,
        tol=agreement_tol,
    )
    if not report.agrees:
        logger.warning("index formulas disagree: residual %.3e", residual)
    return report
