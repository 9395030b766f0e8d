"""
Finite CAR algebra on the 2^n-dimensional Fock space.

Jordan-Wigner convention: mode k of the ModeSpace is tensor factor k, mode 0
is the most significant bit of the occupation-basis index, and

    a_k = Z x ... x Z x s x 1 x ... x 1,   s = [[0, 1], [0, 0]],  Z = diag(1, -1)

so {a_j, a_k*} = delta_jk exactly. The one-particle inner product is
antilinear in its first slot (numpy.vdot); a(f) = sum_k conj(f_k) a_k is
antilinear in f, a*(f) is linear, and {a(f), a*(g)} = <f, g>.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from core.errors import DimensionMismatch, TooManyModes
from core.settings import DEFAULT_SETTINGS
from labs.fock_car.modes import ModeSpace

logger = logging.getLogger(__name__)

OperatorMatrix = Union[np.ndarray, sp.spmatrix, LinearOperator]

_LADDER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_PARITY = sp.csr_matrix(np.diag([1.0, -1.0]))


def estimate_generator_bytes(n_modes: int) -> int:
    # 2n CSR generators with 2^(n-1) stored entries each (value + column index)
    # plus row pointers
    per_entry = 8 + 4
    return 2 * n_modes * ((1 << max(n_modes - 1, 0)) * per_entry + ((1 << n_modes) + 1) * 4)


def _is_linear_operator(M) -> bool:
    return isinstance(M, LinearOperator)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Operator on the Fock space over ``modes``; the matrix may be dense, sparse or matrix-free."""

    modes: ModeSpace
    matrix: OperatorMatrix

    def __post_init__(self):
        dim = self.modes.fock_dim
        if tuple(self.matrix.shape) != (dim, dim):
            raise DimensionMismatch((dim, dim), tuple(self.matrix.shape), "Fock operator")

    @property
    def dim(self) -> int:
        return self.modes.fock_dim

    @property
    def matrix_free(self) -> bool:
        return _is_linear_operator(self.matrix)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=complex)
        if vector.shape[0] != self.dim:
            raise DimensionMismatch(self.dim, vector.shape[0], "Fock vector")
        return np.asarray(self.matrix @ vector).reshape(vector.shape)

    def adjoint(self) -> "FockOperator":
        if self.matrix_free:
            return FockOperator(self.modes, self.matrix.H)
        return FockOperator(self.modes, self.matrix.conj().T)

    @property
    def H(self) -> "FockOperator":
        return self.adjoint()

    def toarray(self) -> np.ndarray:
        if self.matrix_free:
            return self.matrix @ np.eye(self.dim, dtype=complex)
        if sp.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def _coerce(self, other: "FockOperator"):
        if not isinstance(other, FockOperator):
            return NotImplemented
        if other.modes != self.modes:
            raise DimensionMismatch(self.modes.n_modes, other.modes.n_modes, "mode space")
        a, b = self.matrix, other.matrix
        if _is_linear_operator(a) or _is_linear_operator(b):
            return aslinearoperator(a), aslinearoperator(b)
        return a, b

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        return FockOperator(self.modes, pair[0] @ pair[1])

    def __add__(self, other: "FockOperator") -> "FockOperator":
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        return FockOperator(self.modes, pair[0] + pair[1])

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        return FockOperator(self.modes, pair[0] - pair[1])

    def __mul__(self, scalar) -> "FockOperator":
        if not np.isscalar(scalar):
            return NotImplemented
        return FockOperator(self.modes, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FockOperator":
        return self * (-1.0)


class CARAlgebra:
    """Jordan-Wigner generators a_k, a_k* for one ModeSpace, built once and shared read-only."""

    def __init__(self, modes: ModeSpace, max_modes: Optional[int] = None):
        cap = DEFAULT_SETTINGS.max_modes if max_modes is None else max_modes
        n = modes.n_modes
        estimate = estimate_generator_bytes(n)
        if n > cap:
            raise TooManyModes(n, cap, estimate)
        logger.info("building CAR generators: %d modes, Fock dimension %d, about %.1f MiB",
                    n, 1 << n, estimate / 2**20)
        self.modes = modes
        self.n_modes = n
        self.annihilators: List[sp.csr_matrix] = [self._jordan_wigner(k) for k in range(n)]
        self.creators: List[sp.csr_matrix] = [a.T.tocsr() for a in self.annihilators]
        self.identity = FockOperator(modes, sp.identity(1 << n, dtype=complex, format="csr"))

    def _jordan_wigner(self, k: int) -> sp.csr_matrix:
        n = self.n_modes
        string = sp.identity(1, format="csr")
        for _ in range(k):
            string = sp.kron(string, _PARITY, format="csr")
        op = sp.kron(string, _LADDER, format="csr")
        return sp.kron(op, sp.identity(1 << (n - k - 1), format="csr"), format="csr")

    @property
    def fock_dim(self) -> int:
        return 1 << self.n_modes

    def a(self, k: int) -> FockOperator:
        return FockOperator(self.modes, self.annihilators[k])

    def a_dag(self, k: int) -> FockOperator:
        return FockOperator(self.modes, self.creators[k])

    def vacuum(self) -> np.ndarray:
        psi = np.zeros(self.fock_dim, dtype=complex)
        psi[0] = 1.0
        return psi

    def occupations(self) -> np.ndarray:
        """(2^n, n) array of occupation numbers of every basis state."""
        states = np.arange(self.fock_dim)
        shifts = self.n_modes - 1 - np.arange(self.n_modes)
        return (states[:, np.newaxis] >> shifts[np.newaxis, :]) & 1

    def check_vector(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=complex).reshape(-1)
        if f.shape[0] != self.n_modes:
            raise DimensionMismatch(self.n_modes, f.shape[0], "one-particle vector")
        return f

    def annihilate(self, f: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """a(f) psi without assembling a(f)."""
        f = self.check_vector(f)
        out = np.zeros_like(psi, dtype=complex)
        for k in np.flatnonzero(f):
            out += np.conj(f[k]) * (self.annihilators[k] @ psi)
        return out

    def create(self, f: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """a*(f) psi without assembling a*(f)."""
        f = self.check_vector(f)
        out = np.zeros_like(psi, dtype=complex)
        for k in np.flatnonzero(f):
            out += f[k] * (self.creators[k] @ psi)
        return out


def build_car(modes: ModeSpace, max_modes: Optional[int] = None) -> CARAlgebra:
    """Jordan-Wigner CAR generators for ``modes``; raises TooManyModes above the cap."""
    return CARAlgebra(modes, max_modes=max_modes)


def _combine(matrices: Sequence[sp.csr_matrix], coefficients: np.ndarray, dim: int) -> sp.csr_matrix:
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for k in np.flatnonzero(coefficients):
        out = out + coefficients[k] * matrices[k]
    return out.tocsr()


def annihilator_of(f, car: CARAlgebra) -> FockOperator:
    """a(f) = sum_k conj(f_k) a_k."""
    f = car.check_vector(f)
    return FockOperator(car.modes, _combine(car.annihilators, np.conj(f), car.fock_dim))


def creator_of(f, car: CARAlgebra) -> FockOperator:
    """a*(f) = sum_k f_k a_k*."""
    f = car.check_vector(f)
    return FockOperator(car.modes, _combine(car.creators, f, car.fock_dim))


def number_operator(f, car: CARAlgebra) -> FockOperator:
    """a*(f) a(f)."""
    return creator_of(f, car) @ annihilator_of(f, car)


def quadratic(A: np.ndarray, car: CARAlgebra) -> FockOperator:
    """Second quantization sum_jk A_jk a_j* a_k of a one-particle matrix."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (car.n_modes, car.n_modes):
        raise DimensionMismatch((car.n_modes, car.n_modes), A.shape, "one-particle operator")
    out = sp.csr_matrix((car.fock_dim, car.fock_dim), dtype=complex)
    for j, k in zip(*np.nonzero(A)):
        out = out + A[j, k] * (car.creators[j] @ car.annihilators[k])
    return FockOperator(car.modes, out.tocsr())
