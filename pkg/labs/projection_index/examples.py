"""
Named projection pairs: the truncated shift, the dimer chain whose difference
is compact but not Hilbert-Schmidt, random pairs and pairs with planted excess.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as sla

from core.errors import ConfigError, DimensionMismatch
from core.matrix_kernel import (
    Projection,
    dagger,
    random_hermitian,
    random_projection,
    random_unitary,
    validate_projection,
)
from core.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)


@dataclass
class ProjectionPair:
    name: str
    P: Projection
    Q: Projection
    expected_index: Optional[int] = None
    meta: Dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.P.dim


def chain_positions(sites: int) -> np.ndarray:
    """Sites -floor(n/2) .. n - floor(n/2) - 1 of a truncated chain."""
    if sites < 3:
        raise ConfigError(f"shift example needs at least 3 sites, got {sites}")
    start = -(sites // 2)
    return np.arange(start, start + sites)


def shift_pair(sites: int = 41) -> ProjectionPair:
    """
    P = chi_{x >= 1} and P_R = chi_{x >= 0} on a truncated chain.

    P_R is the bilateral shift of P, so P_R - P is the rank-one projection on
    site 0 and index(P, P_R) = -1.
    """
    x = chain_positions(sites)
    P = np.diag((x >= 1).astype(complex))
    P_R = np.diag((x >= 0).astype(complex))
    tol = DEFAULT_SETTINGS.projection_tol
    return ProjectionPair(
        name="shift",
        P=Projection(P, tol, _rank=int(np.count_nonzero(x >= 1))),
        Q=Projection(P_R, tol, _rank=int(np.count_nonzero(x >= 0))),
        expected_index=-1,
        meta={"sites": int(sites), "positions": x.tolist()},
    )


def dimer_angles(n_dimers: int, beta: float) -> np.ndarray:
    n = np.arange(1, n_dimers + 1, dtype=float)
    return np.arcsin(n ** (-beta))


def dimer_pair(n_dimers: int = 200, beta: float = 0.4) -> ProjectionPair:
    """
    Direct sum of 2x2 blocks P_n = |e1><e1|, Q_n = |v_n><v_n| with
    v_n = (cos theta_n, sin theta_n) and theta_n = arcsin(n^-beta).

    Each block of P - Q has eigenvalues +-sin(theta_n), so the singular values
    are n^-beta (twice each) and the index is 0.
    """
    if n_dimers < 1:
        raise ConfigError("dimer example needs at least one dimer")
    if not 0 < beta:
        raise ConfigError(f"beta must be positive, got {beta}")
    theta = dimer_angles(n_dimers, beta)
    P = np.zeros((2 * n_dimers, 2 * n_dimers), dtype=complex)
    Q = np.zeros_like(P)
    for k, t in enumerate(theta):
        v = np.array([np.cos(t), np.sin(t)])
        block = slice(2 * k, 2 * k + 2)
        P[2 * k, 2 * k] = 1.0
        Q[block, block] = np.outer(v, v)
    tol = DEFAULT_SETTINGS.projection_tol
    return ProjectionPair(
        name="dimer",
        P=Projection(P, tol, _rank=n_dimers),
        Q=Projection(Q, tol, _rank=n_dimers),
        expected_index=0,
        meta={"n_dimers": int(n_dimers), "beta": float(beta)},
    )


@dataclass
class DimerSummability:
    """Partial sums of sigma^p for the dimer singular values n^-beta."""

    sigma: np.ndarray
    partial_p2: np.ndarray
    partial_p3: np.ndarray
    dyadic_increments_p2: List[float]
    dyadic_increments_p3: List[float]

    @property
    def relative_tail_p3(self) -> float:
        """Share of the last term in the p = 3 partial sum."""
        return float(self.sigma[-1] ** 3 / self.partial_p3[-1])

    @property
    def p2_keeps_growing(self) -> bool:
        inc = self.dyadic_increments_p2
        return len(inc) > 1 and all(b >= a for a, b in zip(inc, inc[1:]))

    @property
    def p3_settles(self) -> bool:
        # the first dyadic block is too short to follow the power law
        inc = self.dyadic_increments_p3[1:]
        return len(inc) > 1 and all(b < a for a, b in zip(inc, inc[1:]))

    def as_dict(self) -> dict:
        return {
            "partial_sum_p2": float(self.partial_p2[-1]),
            "partial_sum_p3": float(self.partial_p3[-1]),
            "relative_tail_p3": self.relative_tail_p3,
            "dyadic_increments_p2": self.dyadic_increments_p2,
            "dyadic_increments_p3": self.dyadic_increments_p3,
            "p2_keeps_growing": self.p2_keeps_growing,
            "p3_settles": self.p3_settles,
        }


def _dyadic_increments(partial: np.ndarray) -> List[float]:
    # S(2m) - S(m) for m = 1, 2, 4, ... while 2m fits
    out = []
    m = 1
    while 2 * m <= partial.size:
        out.append(float(partial[2 * m - 1] - partial[m - 1]))
        m *= 2
    return out


def dimer_summability(n_dimers: int = 200, beta: float = 0.4) -> DimerSummability:
    n = np.arange(1, n_dimers + 1, dtype=float)
    sigma = n ** (-beta)
    p2 = np.cumsum(sigma ** 2)
    p3 = np.cumsum(sigma ** 3)
    return DimerSummability(
        sigma=sigma,
        partial_p2=p2,
        partial_p3=p3,
        dyadic_increments_p2=_dyadic_increments(p2),
        dyadic_increments_p3=_dyadic_increments(p3),
    )


def random_pair(dim: int, rng: np.random.Generator, rank_p: Optional[int] = None,
                rank_q: Optional[int] = None) -> ProjectionPair:
    """Independent Haar-random projections; ranks drawn uniformly when not given."""
    if dim < 1:
        raise ConfigError(f"dimension must be positive, got {dim}")
    rank_p = int(rng.integers(0, dim + 1)) if rank_p is None else rank_p
    rank_q = int(rng.integers(0, dim + 1)) if rank_q is None else rank_q
    P = random_projection(dim, rank_p, rng)
    Q = random_projection(dim, rank_q, rng)
    return ProjectionPair(
        name="random",
        P=P,
        Q=Q,
        expected_index=rank_p - rank_q,
        meta={"dim": int(dim), "rank_p": rank_p, "rank_q": rank_q},
    )


def planted_pair(dim: int, n_plus: int, n_minus: int, rng: np.random.Generator,
                 rank: Optional[int] = None, angle: float = 0.3) -> ProjectionPair:
    """
    Pair (P1, P2) with dim(im P2 cap ker P1) = n_plus and dim(im P1 cap ker P2) = n_minus.

    The generic part of P1 is rotated by exp(i angle H) with H random on the
    complement of the planted vectors, so ||P1' - P2'|| stays well below 1.
    """
    rank = dim // 2 if rank is None else rank
    if not (n_minus <= rank and n_plus <= dim - rank):
        raise ConfigError(
            f"cannot plant n_plus={n_plus}, n_minus={n_minus} with rank {rank} in dimension {dim}"
        )
    U = random_unitary(dim, rng)
    minus = U[:, :n_minus]
    kept = U[:, n_minus:rank]
    plus = U[:, rank:rank + n_plus]
    rest = U[:, rank + n_plus:]

    generic = np.hstack([kept, rest])
    H = random_hermitian(generic.shape[1], rng)
    H /= max(1.0, np.linalg.norm(H, 2))
    W = generic @ sla.expm(1j * angle * H) @ dagger(generic)
    W += minus @ dagger(minus) + plus @ dagger(plus)

    P1 = np.hstack([minus, kept])
    P1 = P1 @ dagger(P1)
    rotated = W @ kept
    P2 = rotated @ dagger(rotated) + plus @ dagger(plus)
    tol = DEFAULT_SETTINGS.projection_tol
    return ProjectionPair(
        name="planted",
        P=Projection(P1, tol, _rank=rank),
        Q=Projection(P2, tol, _rank=rank - n_minus + n_plus),
        expected_index=n_minus - n_plus,
        meta={"dim": int(dim), "n_plus": int(n_plus), "n_minus": int(n_minus), "rank": int(rank)},
    )


def load_projection(path: str, tol: Optional[float] = None) -> Projection:
    """Read a square matrix from ``.npy`` or whitespace-separated text and validate it."""
    if not os.path.exists(path):
        raise ConfigError(f"matrix file not found: {path}")
    try:
        if path.endswith(".npy"):
            M = np.load(path)
        else:
            M = np.loadtxt(path, dtype=complex, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"could not read matrix from {path}: {exc}") from exc
    try:
        return validate_projection(M, tol)
    except DimensionMismatch as exc:
        raise ConfigError(f"{path}: {exc}") from exc
