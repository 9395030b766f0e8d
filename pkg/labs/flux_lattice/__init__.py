"""Flux insertion in lattice Hamiltonians on a finite patch."""
from labs.flux_lattice.chern import ChernResult, chern_number
from labs.flux_lattice.controller import ChernController, FluxSweepController, StackedIndexController, make_model
from labs.flux_lattice.flux import (
    FluxSweep,
    build_sweep,
    fermi_projection,
    flux_window,
    gauge_flux_hamiltonian,
    laughlin_summability,
    laughlin_unitary,
)
from labs.flux_lattice.lattice import LatticeModel, Patch, build_model
from labs.flux_lattice.spectral_flow import Crossing, SpectralFlowResult, spectral_flow
from labs.flux_lattice.transport import (
    QuasiAdiabaticResult,
    charge_deficiency,
    exact_quasi_adiabatic_unitary,
    kato_generator,
    quasi_adiabatic_evolve,
    truncate_left,
)

__all__ = [
    'ChernResult', 'chern_number',
    'ChernController', 'FluxSweepController', 'StackedIndexController', 'make_model',
    'FluxSweep', 'build_sweep', 'fermi_projection', 'flux_window', 'gauge_flux_hamiltonian',
    'laughlin_summability', 'laughlin_unitary',
    'LatticeModel', 'Patch', 'build_model',
    'Crossing', 'SpectralFlowResult', 'spectral_flow',
    'QuasiAdiabaticResult', 'charge_deficiency', 'exact_quasi_adiabatic_unitary', 'kato_generator',
    'quasi_adiabatic_evolve', 'truncate_left',
]
