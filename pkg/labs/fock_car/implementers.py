"""
Second-quantized implementers and intertwining unitaries.

dgamma(A_1, ..., A_n) is the multilinear extension of
a*(f_n) ... a*(f_1) a(g_1) ... a(g_n) over rank-one terms |f><g|, and

    gamma(V) = 1 + sum_n (1/n!) dgamma(V - 1, ..., V - 1)

implements the Bogoliubov automorphism a*(f) -> a*(Vf). Only terms with
distinct rank-one indices survive, so the series is a sum over subsets of the
rank-one terms of V - 1 and stops at n = rank(V - 1).
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from core.errors import DimensionMismatch, NotOrthonormal, NotUnitary
from core.matrix_kernel import Projection, dagger, operator_norm
from core.settings import DEFAULT_SETTINGS, NumericalSettings
from labs.fock_car.car import CARAlgebra, FockOperator, annihilator_of, creator_of
from labs.projection_index.wold import WoldDecomposition, wold_decompose

logger = logging.getLogger(__name__)

RankOne = Tuple[np.ndarray, np.ndarray]


def rank_one_decomposition(A: np.ndarray, tol: float = 1e-12) -> List[RankOne]:
    """A = sum_k |f_k><g_k| from the SVD, dropping singular values below tol * max(1, ||A||)."""
    A = np.asarray(A, dtype=complex)
    U, s, Wh = sla.svd(A)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    return [(s[k] * U[:, k], Wh[k, :].conj()) for k in range(s.size) if s[k] > cutoff]


def _check_one_particle(A: np.ndarray, car: CARAlgebra) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape != (car.n_modes, car.n_modes):
        raise DimensionMismatch((car.n_modes, car.n_modes), A.shape, "one-particle operator")
    return A


def dgamma(operators: Sequence[np.ndarray], car: CARAlgebra,
           decompositions: Optional[Sequence[Sequence[RankOne]]] = None) -> FockOperator:
    """
    Multilinear second quantization of one-particle operators.

    Args:
        operators: A_1 .. A_n on the one-particle space
        car: CAR generators
        decompositions: optional explicit rank-one decompositions, one list of
            (f, g) pairs per operator; SVD decompositions are used otherwise

    Returns:
        dgamma(A_1, .., A_n) = sum a*(f^n) .. a*(f^1) a(g^1) .. a(g^n)
    """
    ops = [_check_one_particle(A, car) for A in operators]
    if decompositions is None:
        decompositions = [rank_one_decomposition(A) for A in ops]
    elif len(decompositions) != len(ops):
        raise DimensionMismatch(len(ops), len(decompositions), "decomposition list")

    dim = car.fock_dim
    result = sp.identity(dim, dtype=complex, format="csr")
    for terms in decompositions:
        layer = sp.csr_matrix((dim, dim), dtype=complex)
        for f, g in terms:
            layer = layer + creator_of(f, car).matrix @ result @ annihilator_of(g, car).matrix
        result = layer.tocsr()
    return FockOperator(car.modes, result)


def unitarity_residual(V: np.ndarray) -> float:
    V = np.asarray(V, dtype=complex)
    return operator_norm(dagger(V) @ V - np.eye(V.shape[0]))


def _require_unitary(V: np.ndarray, tol: float) -> None:
    residual = unitarity_residual(V)
    if residual > tol:
        raise NotUnitary(residual, tol)


def _gamma_series(D: np.ndarray, car: CARAlgebra) -> FockOperator:
    terms = rank_one_decomposition(D)
    creators = [creator_of(f, car).matrix for f, _ in terms]
    annihilators = [annihilator_of(g, car).matrix for _, g in terms]
    r = len(terms)
    identity = sp.identity(car.fock_dim, dtype=complex, format="csr")
    subset_terms = [identity]
    total = identity.copy()
    # T_S = a*(f_top) T_{S minus top} a(g_top), top = largest index in S
    for mask in range(1, 1 << r):
        top = mask.bit_length() - 1
        parent = subset_terms[mask ^ (1 << top)]
        term = (creators[top] @ parent @ annihilators[top]).tocsr()
        subset_terms.append(term)
        total = total + term
    logger.debug("gamma series: rank %d, %d subset terms", r, 1 << r)
    return FockOperator(car.modes, total.tocsr())


def _schur_eigen(V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    T, W = sla.schur(V, output="complex")
    return np.diag(T).copy(), W


class _ProductOperator(LinearOperator):
    """Matrix-free product of commuting factors 1 + c_k a*(w_k) a(w_k)."""

    def __init__(self, car: CARAlgebra, coefficients: np.ndarray, vectors: np.ndarray):
        super().__init__(dtype=complex, shape=(car.fock_dim, car.fock_dim))
        self.car = car
        self.coefficients = coefficients
        self.vectors = vectors

    def _apply(self, x: np.ndarray, conj: bool) -> np.ndarray:
        psi = np.asarray(x, dtype=complex).reshape(-1).copy()
        for c, w in zip(self.coefficients, self.vectors.T):
            c = np.conj(c) if conj else c
            psi = psi + c * self.car.create(w, self.car.annihilate(w, psi))
        return psi

    def _matvec(self, x):
        return self._apply(x, conj=False)

    def _rmatvec(self, x):
        return self._apply(x, conj=True)

    def _adjoint(self):
        return _ProductOperator(self.car, np.conj(self.coefficients), self.vectors)


def bogoliubov_operator(V: np.ndarray, car: CARAlgebra, matrix_free: Optional[bool] = None,
                        settings: Optional[NumericalSettings] = None) -> FockOperator:
    """
    gamma(V) as the product over a Schur basis V = sum e^{i theta_k} |w_k><w_k| of
    1 + (e^{i theta_k} - 1) a*(w_k) a(w_k).

    Matrix-free above the dense Fock limit unless ``matrix_free`` says otherwise.
    """
    settings = settings or DEFAULT_SETTINGS
    V = _check_one_particle(V, car)
    _require_unitary(V, settings.unitarity_tol)
    lam, W = _schur_eigen(V)
    keep = np.abs(lam - 1.0) > 1e-14
    coefficients = lam[keep] - 1.0
    vectors = W[:, keep]
    if matrix_free is None:
        matrix_free = car.n_modes > settings.dense_fock_limit
    if matrix_free:
        return FockOperator(car.modes, _ProductOperator(car, coefficients, vectors))
    result = sp.identity(car.fock_dim, dtype=complex, format="csr")
    for c, w in zip(coefficients, vectors.T):
        n_w = creator_of(w, car).matrix @ annihilator_of(w, car).matrix
        result = (result + c * (n_w @ result)).tocsr()
    return FockOperator(car.modes, result)


def gamma(V: np.ndarray, car: CARAlgebra, method: str = "auto",
          settings: Optional[NumericalSettings] = None) -> FockOperator:
    """
    Bogoliubov implementer gamma(V) with gamma(V) a*(f) gamma(V)* = a*(Vf).

    Args:
        V: unitary on the one-particle space
        car: CAR generators
        method: 'series' sums the dgamma expansion, 'spectral' uses the Schur
            product form, 'auto' picks the series while rank(V - 1) is small

    Returns:
        the implementer as a FockOperator
    """
    settings = settings or DEFAULT_SETTINGS
    V = _check_one_particle(V, car)
    _require_unitary(V, settings.unitarity_tol)
    D = V - np.eye(car.n_modes)
    if method == "auto":
        rank = len(rank_one_decomposition(D))
        use_series = rank <= settings.gamma_series_max_rank and car.n_modes <= settings.dense_fock_limit
        method = "series" if use_series else "spectral"
    if method == "series":
        return _gamma_series(D, car)
    if method == "spectral":
        return bogoliubov_operator(V, car, settings=settings)
    raise ValueError(f"unknown gamma method {method!r}")


class _ReflectionProduct(LinearOperator):
    """Matrix-free v = prod_i (a(f_i) + a*(f_i)), factors applied right to left."""

    def __init__(self, car: CARAlgebra, vectors: np.ndarray, reverse: bool = False):
        super().__init__(dtype=complex, shape=(car.fock_dim, car.fock_dim))
        self.car = car
        self.vectors = vectors
        self.reverse = reverse

    def _factor(self, f, psi):
        return self.car.annihilate(f, psi) + self.car.create(f, psi)

    def _matvec(self, x):
        psi = np.asarray(x, dtype=complex).reshape(-1)
        order = range(self.vectors.shape[1])
        for i in (order if self.reverse else reversed(order)):
            psi = self._factor(self.vectors[:, i], psi)
        return psi

    def _rmatvec(self, x):
        return self._adjoint()._matvec(x)

    def _adjoint(self):
        return _ReflectionProduct(self.car, self.vectors, reverse=not self.reverse)


def excess_unitary(vectors, car: CARAlgebra, matrix_free: Optional[bool] = None,
                   settings: Optional[NumericalSettings] = None) -> FockOperator:
    """
    v = prod_i (a(f_i) + a*(f_i)) in the given order.

    Each factor is self-adjoint and squares to <f_i, f_i> = 1, so v is unitary
    and v^2 = +-1.
    """
    settings = settings or DEFAULT_SETTINGS
    F = np.asarray(vectors, dtype=complex)
    if F.ndim == 1:
        F = F[:, np.newaxis]
    if F.size == 0:
        return car.identity
    if F.shape[0] != car.n_modes:
        raise DimensionMismatch(car.n_modes, F.shape[0], "excess vectors")
    residual = operator_norm(dagger(F) @ F - np.eye(F.shape[1]))
    if residual > settings.orthonormality_tol:
        raise NotOrthonormal(residual)
    if matrix_free is None:
        matrix_free = car.n_modes > settings.dense_fock_limit
    if matrix_free:
        return FockOperator(car.modes, _ReflectionProduct(car, F))
    result = sp.identity(car.fock_dim, dtype=complex, format="csr")
    for f in F.T:
        factor = annihilator_of(f, car).matrix + creator_of(f, car).matrix
        result = (result @ factor).tocsr()
    return FockOperator(car.modes, result)


@dataclass
class Intertwiner:
    """u = v_plus v_minus gamma(V) mapping Omega_{P1} to a multiple of Omega_{P2}."""

    u: FockOperator
    wold: WoldDecomposition
    v_plus: FockOperator
    v_minus: FockOperator
    gamma: FockOperator


def _assemble(V: np.ndarray, plus: np.ndarray, minus: np.ndarray, car: CARAlgebra,
              settings: NumericalSettings, gamma_method: str) -> Tuple[FockOperator, ...]:
    g = gamma(V, car, method=gamma_method, settings=settings)
    v_minus = excess_unitary(minus, car, settings=settings)
    v_plus = excess_unitary(plus, car, settings=settings)
    return v_plus @ v_minus @ g, v_plus, v_minus, g


def intertwiner_parts(P1, P2, car: CARAlgebra, settings: Optional[NumericalSettings] = None,
                      gamma_method: str = "auto") -> Intertwiner:
    settings = settings or DEFAULT_SETTINGS
    wold = wold_decompose(P1, P2, tol=settings.excess_tol)
    if wold.V.shape[0] != car.n_modes:
        raise DimensionMismatch(car.n_modes, wold.V.shape[0], "one-particle space")
    u, v_plus, v_minus, g = _assemble(wold.V, wold.plus_vectors, wold.minus_vectors,
                                      car, settings, gamma_method)
    return Intertwiner(u=u, wold=wold, v_plus=v_plus, v_minus=v_minus, gamma=g)


def intertwiner(P1, P2, car: CARAlgebra, settings: Optional[NumericalSettings] = None,
                gamma_method: str = "auto") -> FockOperator:
    """
    Unitary u with omega_{P2}(A) = omega_{P1}(u* A u).

    gamma(V) carries Omega_{P1} to Omega_{V P1 V*} = Omega_{P2 - N_plus + N_minus};
    v_minus then empties the N_minus modes and v_plus fills the N_plus modes.
    """
    return intertwiner_parts(P1, P2, car, settings, gamma_method).u


def interleave(A1: np.ndarray, A2: np.ndarray) -> np.ndarray:
    """A1 on layer 1 and A2 on layer 2 of the interleaved doubled space."""
    A1 = np.asarray(A1, dtype=complex)
    A2 = np.asarray(A2, dtype=complex)
    if A1.shape != A2.shape:
        raise DimensionMismatch(A1.shape, A2.shape, "layer operator")
    n = A1.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[0::2, 0::2] = A1
    out[1::2, 1::2] = A2
    return out


def embed_layer(vectors: np.ndarray, layer: int) -> np.ndarray:
    F = np.asarray(vectors, dtype=complex)
    if F.ndim == 1:
        F = F[:, np.newaxis]
    out = np.zeros((2 * F.shape[0], F.shape[1]), dtype=complex)
    out[layer - 1::2, :] = F
    return out


def stacked_projection(P: Projection, P2: Projection) -> Projection:
    """P on layer 1 and P2 on layer 2."""
    return Projection(interleave(P.matrix, P2.matrix), P.tol, _rank=P.rank + P2.rank)


def stacked_intertwiner_parts(P: Projection, P_prime: Projection, car: CARAlgebra,
                              settings: Optional[NumericalSettings] = None,
                              gamma_method: str = "auto") -> Tuple[FockOperator, WoldDecomposition, WoldDecomposition]:
    settings = settings or DEFAULT_SETTINGS
    if car.n_modes != 2 * P.dim or not car.modes.stacked:
        raise DimensionMismatch(2 * P.dim, car.n_modes, "stacked mode space")
    layer1 = wold_decompose(P, P_prime, tol=settings.excess_tol)
    layer2 = wold_decompose(P.complement(), P_prime.complement(), tol=settings.excess_tol)
    V = interleave(layer1.V, layer2.V)
    plus = np.hstack([embed_layer(layer1.plus_vectors, 1), embed_layer(layer2.plus_vectors, 2)])
    minus = np.hstack([embed_layer(layer1.minus_vectors, 1), embed_layer(layer2.minus_vectors, 2)])
    u, _, _, _ = _assemble(V, plus, minus, car, settings, gamma_method)
    return u, layer1, layer2


def stacked_intertwiner(P: Projection, P_prime: Projection, car: CARAlgebra,
                        settings: Optional[NumericalSettings] = None,
                        gamma_method: str = "auto") -> FockOperator:
    """
    Factorized intertwiner for omega_{P + P^perp} -> omega_{P' + P'^perp} on the doubled space.

    Each layer is decomposed separately so excess vectors never mix layers.
    """
    return stacked_intertwiner_parts(P, P_prime, car, settings, gamma_method)[0]
