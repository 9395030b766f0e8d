"""Finite CAR algebra, quasi-free states and the many-body index."""
from labs.fock_car.car import CARAlgebra, FockOperator, annihilator_of, build_car, creator_of
from labs.fock_car.charge import ChargeOperator, charge_operator, delta_rho, full_charge, layer_charge
from labs.fock_car.controller import CorrespondenceController
from labs.fock_car.implementers import (
    bogoliubov_operator,
    dgamma,
    excess_unitary,
    gamma,
    intertwiner,
    stacked_intertwiner,
    stacked_projection,
)
from labs.fock_car.index import charge_difference, many_body_index, stacked_index
from labs.fock_car.modes import ModeSpace
from labs.fock_car.states import PureState, QuasiFreeState, quasi_free_state, state_distance, wick_expectation

__all__ = [
    'CARAlgebra', 'FockOperator', 'annihilator_of', 'build_car', 'creator_of',
    'ChargeOperator', 'charge_operator', 'delta_rho', 'full_charge', 'layer_charge',
    'CorrespondenceController',
    'bogoliubov_operator', 'dgamma', 'excess_unitary', 'gamma', 'intertwiner',
    'stacked_intertwiner', 'stacked_projection',
    'charge_difference', 'many_body_index', 'stacked_index',
    'ModeSpace',
    'PureState', 'QuasiFreeState', 'quasi_free_state', 'state_distance', 'wick_expectation',
]
