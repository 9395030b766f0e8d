"""Regional charges Q^Lambda and the U(1) derivation delta(A) = i[Q, A]."""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import DimensionMismatch
from labs.fock_car.car import CARAlgebra, FockOperator
from labs.fock_car.modes import Label


@dataclass(frozen=True, eq=False)
class ChargeOperator:
    region: Tuple[Label, ...]
    indices: Tuple[int, ...]
    operator: FockOperator

    @property
    def diagonal(self) -> np.ndarray:
        return self.operator.matrix.diagonal().real

    def spectrum(self) -> np.ndarray:
        return np.unique(np.rint(self.diagonal)).astype(int)


def charge_operator(region: Iterable[Sequence[int]], car: CARAlgebra) -> ChargeOperator:
    """
    Q^Lambda = sum over x in Lambda of a_x* a_x, diagonal in the occupation basis.

    Raises UnknownLabel for labels outside the mode space.
    """
    region = tuple(tuple(label) for label in region)
    indices = tuple(car.modes.indices_of(region))
    occ = car.occupations()
    counts = occ[:, list(indices)].sum(axis=1) if indices else np.zeros(car.fock_dim, dtype=int)
    Q = sp.diags(counts.astype(complex), format="csr")
    return ChargeOperator(region=region, indices=indices, operator=FockOperator(car.modes, Q))


def full_charge(car: CARAlgebra) -> ChargeOperator:
    return charge_operator(car.modes.labels, car)


def layer_charge(car: CARAlgebra, layer: int = 1) -> ChargeOperator:
    """Charge of one layer of a stacked mode space, i.e. Q x 1 for layer 1."""
    return charge_operator(car.modes.layer_labels(layer), car)


def _charge_op(Q: Union[ChargeOperator, FockOperator]) -> FockOperator:
    return Q.operator if isinstance(Q, ChargeOperator) else Q


def delta_rho(A: FockOperator, Q: Union[ChargeOperator, FockOperator]) -> FockOperator:
    """i[Q, A]."""
    Qop = _charge_op(Q)
    if Qop.dim != A.dim:
        raise DimensionMismatch(Qop.dim, A.dim, "Fock operator")
    return 1j * (Qop @ A - A @ Qop)


def rotation(Q: Union[ChargeOperator, FockOperator], t: float) -> FockOperator:
    """e^{itQ}; diagonal because every charge is diagonal in the occupation basis."""
    Qop = _charge_op(Q)
    diag = Qop.matrix.diagonal()
    return FockOperator(Qop.modes, sp.diags(np.exp(1j * t * diag.real), format="csr"))
