"""
Dense complex linear algebra substrate.

Hermitian eigendecomposition with reproducible phases, Schatten norms,
unitary exponentials and projection validation. Everything here is a pure
function of its inputs.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from core.errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidOrder,
    NonHermitian,
    NotProjection,
)
from core.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)


def as_matrix(A, square: bool = True) -> np.ndarray:
    """Coerce ``A`` to a finite complex 2-D array."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionMismatch("non-empty 2-D matrix", M.shape)
    if square and M.shape[0] != M.shape[1]:
        raise DimensionMismatch("square matrix", M.shape)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has NaN or Inf entries")
    return M


def same_shape(A: np.ndarray, B: np.ndarray, what: str = "operand") -> None:
    if A.shape != B.shape:
        raise DimensionMismatch(A.shape, B.shape, what)


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def commutator(A, B):
    return A @ B - B @ A


def anticommutator(A, B):
    return A @ B + B @ A


def operator_norm(A: np.ndarray, hermitian: bool = False) -> float:
    """Largest singular value; uses eigvalsh when ``A`` is known to be Hermitian."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    if hermitian:
        w = sla.eigvalsh(0.5 * (A + dagger(A)))
        return float(np.max(np.abs(w)))
    return float(sla.svdvals(A)[0])


def hermiticity_residual(A: np.ndarray) -> float:
    """Operator norm of A - A*, computed from the Hermitian matrix i(A - A*)."""
    D = A - dagger(A)
    if not np.any(D):
        return 0.0
    return operator_norm(1j * D, hermitian=True)


def phase_fix(U: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Make the first non-negligible component of every column real positive."""
    U = np.array(U, dtype=complex, copy=True)
    if U.size == 0:
        return U
    mags = np.abs(U)
    # first row index per column whose magnitude is clearly nonzero
    threshold = tol * np.maximum(mags.max(axis=0), tol)
    lead = np.argmax(mags > threshold, axis=0)
    cols = np.arange(U.shape[1])
    pivots = U[lead, cols]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return U / phases[np.newaxis, :]


def eigh(A, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hermitian eigendecomposition with ascending eigenvalues.

    Args:
        A: square Hermitian matrix
        tol: hermiticity tolerance relative to max(1, ||A||_F); defaults to the
            lab setting

    Returns:
        (eigenvalues, eigenvectors) with A = U diag(w) U* and phase-fixed columns
    """
    A = as_matrix(A)
    tol = DEFAULT_SETTINGS.hermiticity_tol if tol is None else tol
    scale = max(1.0, float(np.linalg.norm(A)))
    residual = float(np.linalg.norm(A - dagger(A)))
    if residual > tol * scale:
        raise NonHermitian(residual, tol * scale)
    try:
        w, U = sla.eigh(0.5 * (A + dagger(A)))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
    return w, phase_fix(U)


def singular_values(A) -> np.ndarray:
    A = as_matrix(A, square=False)
    try:
        return sla.svdvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD failed: {exc}") from exc


def schatten_norm(A, p: float) -> float:
    """(sum sigma_i^p)^(1/p) over the singular values of ``A``; max sigma for p = inf."""
    if p < 1:
        raise InvalidOrder(p)
    s = singular_values(A)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if np.isinf(p):
        return float(s[0])
    # scale by the largest value to keep sigma^p finite for large p
    top = s[0]
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def expm_antihermitian(A, t: float, tol: Optional[float] = None) -> np.ndarray:
    """Return exp(i t A) for Hermitian ``A``."""
    A = as_matrix(A)
    tol = DEFAULT_SETTINGS.hermiticity_tol if tol is None else tol
    residual = hermiticity_residual(A)
    bound = tol * max(1.0, operator_norm(A, hermitian=True))
    if residual > bound:
        raise NonHermitian(residual, bound)
    if t == 0.0:
        return np.eye(A.shape[0], dtype=complex)
    return sla.expm(1j * t * 0.5 * (A + dagger(A)))


def unitary_from_eigh(w: np.ndarray, U: np.ndarray, t: float) -> np.ndarray:
    """exp(i t A) for A = U diag(w) U*."""
    return (U * np.exp(1j * t * w)[np.newaxis, :]) @ dagger(U)


@dataclass(frozen=True, eq=False)
class Projection:
    """Validated orthogonal projection together with its residuals."""

    matrix: np.ndarray
    tol: float
    hermiticity_residual: float = 0.0
    idempotency_residual: float = 0.0
    spectrum_residual: float = 0.0
    _rank: Optional[int] = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        if self._rank is not None:
            return self._rank
        return int(round(float(np.trace(self.matrix).real)))

    def complement(self) -> "Projection":
        return Projection(
            matrix=np.eye(self.dim, dtype=complex) - self.matrix,
            tol=self.tol,
            hermiticity_residual=self.hermiticity_residual,
            idempotency_residual=self.idempotency_residual,
            spectrum_residual=self.spectrum_residual,
            _rank=None if self._rank is None else self.dim - self._rank,
        )

    def conjugate_by(self, W: np.ndarray) -> "Projection":
        """W P W* as a projection (no revalidation beyond shape)."""
        same_shape(self.matrix, W, "conjugating unitary")
        return Projection(W @ self.matrix @ dagger(W), self.tol, _rank=self._rank)

    def range_basis(self) -> np.ndarray:
        """Orthonormal basis of im(P), ordered by descending eigenvalue, phase fixed."""
        w, U = eigh(self.matrix)
        order = np.argsort(-w, kind="stable")
        return U[:, order[: self.rank]]


def validate_projection(M, tol: Optional[float] = None) -> Projection:
    """
    Check that ``M`` is an orthogonal projection in operator norm.

    Args:
        M: square matrix
        tol: tolerance for ||P - P*|| and ||P^2 - P||

    Returns:
        Projection with the measured residuals recorded
    """
    tol = DEFAULT_SETTINGS.projection_tol if tol is None else tol
    P = as_matrix(M)
    herm = hermiticity_residual(P)
    idem = operator_norm(P @ P - P)
    if herm > tol or idem > tol:
        raise NotProjection(herm, idem, tol)
    w = sla.eigvalsh(0.5 * (P + dagger(P)))
    spectrum = float(np.max(np.minimum(np.abs(w), np.abs(w - 1.0)))) if w.size else 0.0
    if spectrum > tol:
        raise NotProjection(herm, max(idem, spectrum), tol)
    rank = int(np.count_nonzero(w > 0.5))
    return Projection(
        matrix=P,
        tol=tol,
        hermiticity_residual=herm,
        idempotency_residual=idem,
        spectrum_residual=spectrum,
        _rank=rank,
    )


def projection_onto(vectors, tol: Optional[float] = None) -> Projection:
    """Orthogonal projection onto the span of the columns of ``vectors``."""
    V = np.asarray(vectors, dtype=complex)
    if V.ndim == 1:
        V = V[:, np.newaxis]
    if V.shape[1] == 0:
        return Projection(np.zeros((V.shape[0], V.shape[0]), dtype=complex), tol or DEFAULT_SETTINGS.projection_tol, _rank=0)
    Q, _ = sla.qr(V, mode="economic")
    return Projection(Q @ dagger(Q), tol or DEFAULT_SETTINGS.projection_tol, _rank=Q.shape[1])


def spectral_projection(H, mu: float) -> Tuple[Projection, np.ndarray, np.ndarray]:
    """
    Projection onto the eigenvalues of ``H`` at or below ``mu``.

    Returns:
        (projection, eigenvalues, eigenvectors)
    """
    w, U = eigh(H)
    occupied = U[:, w <= mu]
    P = occupied @ dagger(occupied)
    return Projection(P, DEFAULT_SETTINGS.projection_tol, _rank=occupied.shape[1]), w, U


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (X + dagger(X))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(n, random_state=rng)


def random_projection(n: int, rank: int, rng: np.random.Generator) -> Projection:
    if not 0 <= rank <= n:
        raise DimensionMismatch(f"rank in [0, {n}]", rank, "projection rank")
    U = random_unitary(n, rng)
    cols = U[:, :rank]
    return Projection(cols @ dagger(cols), DEFAULT_SETTINGS.projection_tol, _rank=rank)
