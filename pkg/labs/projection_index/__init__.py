"""Index of a pair of projections."""
from labs.projection_index.controller import IndexPairController
from labs.projection_index.examples import (
    ProjectionPair,
    dimer_pair,
    dimer_summability,
    load_projection,
    planted_pair,
    random_pair,
    shift_pair,
)
from labs.projection_index.index import (
    IndexReport,
    index_arveson,
    index_eig,
    index_report,
    index_trace_power,
)
from labs.projection_index.wold import WoldDecomposition, wold_decompose

__all__ = [
    'IndexPairController',
    'ProjectionPair', 'dimer_pair', 'dimer_summability', 'load_projection', 'planted_pair', 'random_pair', 'shift_pair',
    'IndexReport', 'index_arveson', 'index_eig', 'index_report', 'index_trace_power',
    'WoldDecomposition', 'wold_decompose',
]
