"""Labs package."""
from labs.flux_lattice import ChernController, FluxSweepController, StackedIndexController
from labs.fock_car import CorrespondenceController
from labs.projection_index import IndexPairController

__all__ = [
    'IndexPairController',
    'CorrespondenceController',
    'FluxSweepController', 'ChernController', 'StackedIndexController',
]
