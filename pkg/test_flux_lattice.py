"""
Tests for lattice models, flux insertion, spectral flow, quasi-adiabatic
transport and Chern numbers.
"""
import numpy as np
import pytest

from conftest import lowest_projection
from core.errors import (
    ConfigError,
    DecayViolation,
    DimensionMismatch,
    FermiLevelInSpectrum,
    NotCommensurate,
    OriginOnBoundary,
    TooManyModes,
)
from core.matrix_kernel import commutator, eigh, hermiticity_residual, operator_norm
from labs.flux_lattice import (
    ChernController,
    FluxSweepController,
    Patch,
    StackedIndexController,
    build_model,
    build_sweep,
    charge_deficiency,
    chern_number,
    exact_quasi_adiabatic_unitary,
    fermi_projection,
    flux_window,
    gauge_flux_hamiltonian,
    kato_generator,
    laughlin_summability,
    make_model,
    quasi_adiabatic_evolve,
    spectral_flow,
    truncate_left,
)
from labs.flux_lattice.flux import FluxSweep, flux_signs, left_mask, reduce_phi, tracked_band, upper_mask
from labs.flux_lattice.lattice import FLUX_POINT, magnetic_period
from labs.flux_lattice.transport import singular_value_decay


def test_centered_patch_bounds():
    patch = Patch.centered(30)
    assert patch.bounds == (-15, 14, -15, 14)
    assert patch.n_sites == 900
    assert patch.origin_interior()
    assert Patch.centered(5, 3).bounds == (-2, 2, -1, 1)


def test_site_ordering_is_row_major():
    patch = Patch(-1, 1, -1, 0)
    assert patch.sites()[:4] == [(-1, -1), (0, -1), (1, -1), (-1, 0)]
    assert patch.site_index((0, 0)) == 4
    with pytest.raises(KeyError):
        patch.site_index((2, 0))


def test_origin_on_boundary_is_rejected():
    with pytest.raises(OriginOnBoundary):
        build_model("atomic", Patch(0, 4, -2, 2))


def test_unknown_preset_is_rejected():
    with pytest.raises(ConfigError):
        build_model("graphene", Patch.centered(4))


def test_slow_decay_is_rejected():
    hoppings = [{"d": [20, 0], "matrix": [[1.0]]}, {"d": [-20, 0], "matrix": [[1.0]]}]
    with pytest.raises(DecayViolation):
        build_model("custom", Patch.centered(22, 3), {"hoppings": hoppings})


def test_custom_hopping_table():
    hoppings = [{"d": [1, 0], "matrix": [[-1.0]]}, {"d": [-1, 0], "matrix": [[-1.0]]}]
    model = build_model("custom", Patch.centered(4), {"hoppings": hoppings})
    H = model.hamiltonian()
    a, b = model.patch.site_index((0, 0)), model.patch.site_index((1, 0))
    assert H[a, b] == -1.0
    assert model.decay.passed


def test_bad_hopping_entry():
    with pytest.raises(ConfigError):
        build_model("custom", Patch.centered(4), {"hoppings": [{"matrix": [[1.0]]}]})


def test_hofstadter_is_hermitian(small_hofstadter):
    H = small_hofstadter.hamiltonian()
    assert hermiticity_residual(H) < 1e-12
    assert small_hofstadter.magnetic_cell == (3, 1)
    assert magnetic_period(0.25) == 4
    assert magnetic_period(1.0 / np.sqrt(2.0)) == 0


def test_atomic_hamiltonian_is_unchanged_by_flux(atomic_model):
    H = atomic_model.hamiltonian()
    for phi in (0.3, np.pi, 5.0):
        assert np.array_equal(gauge_flux_hamiltonian(atomic_model, phi), H)


def test_flux_is_periodic(small_hofstadter):
    H0 = small_hofstadter.hamiltonian()
    assert np.array_equal(gauge_flux_hamiltonian(small_hofstadter, 0.0), H0)
    assert np.array_equal(gauge_flux_hamiltonian(small_hofstadter, 2.0 * np.pi), H0)
    assert reduce_phi(-0.5) == pytest.approx(2.0 * np.pi - 0.5)


def test_flux_hamiltonian_is_hermitian(small_hofstadter):
    for convention in ("half_line", "sign"):
        H = gauge_flux_hamiltonian(small_hofstadter, 1.1, convention)
        assert hermiticity_residual(H) < 1e-12


def test_half_line_phase_on_the_cut(small_hofstadter):
    model = small_hofstadter
    H, H_phi = model.hamiltonian(), gauge_flux_hamiltonian(model, 0.7)
    x, y = model.patch.site_index((-1, -1)), model.patch.site_index((-1, 0))
    assert H_phi[x, y] == pytest.approx(H[x, y] * np.exp(-0.7j))
    right_x, right_y = model.patch.site_index((1, -1)), model.patch.site_index((1, 0))
    assert H_phi[right_x, right_y] == H[right_x, right_y]


def test_sign_convention_flips_upper_left_bond():
    model = build_model("hofstadter", Patch.centered(8))
    x, y = model.patch.site_index((-2, 0)), model.patch.site_index((-2, 1))
    H = model.hamiltonian()
    assert gauge_flux_hamiltonian(model, np.pi, "sign")[x, y] == pytest.approx(-H[x, y])
    assert gauge_flux_hamiltonian(model, np.pi, "half_line")[x, y] == pytest.approx(H[x, y])


def test_unknown_convention(small_hofstadter):
    with pytest.raises(ConfigError):
        flux_signs(small_hofstadter, "cylinder")


def test_fermi_projection():
    P = fermi_projection(np.diag([-1.0, 1.0]), 0.0)
    assert np.allclose(P.matrix, np.diag([1.0, 0.0]))
    with pytest.raises(FermiLevelInSpectrum):
        fermi_projection(np.diag([-1.0, 1.0]), 1.0)


def test_flux_window_is_centered_on_flux_point(small_hofstadter):
    window = flux_window(small_hofstadter, radius=1.0)
    coords = small_hofstadter.orbital_coordinates()
    inside = {tuple(c) for c, w in zip(coords, window) if w}
    assert inside == {(0, -1), (1, -1), (0, 0), (1, 0)}
    assert FLUX_POINT == (0.5, -0.5)
    with pytest.raises(ConfigError):
        flux_window(small_hofstadter, radius=0.0)


def test_hofstadter_has_three_bands(small_hofstadter):
    Hk = small_hofstadter.bloch_hamiltonian((0.3, 1.2))
    assert Hk.shape == (3, 3)
    assert hermiticity_residual(Hk) < 1e-12


def test_kato_generator_vanishes_for_atomic_model(atomic_model):
    K = kato_generator(atomic_model)
    assert np.allclose(K, 0.0)


def test_kato_generator_transports_projection(small_hofstadter):
    model = small_hofstadter
    P = lowest_projection(model.hamiltonian(), 12)
    phi = 0.7
    K = kato_generator(model, phi, P=P)
    assert hermiticity_residual(K) < 1e-12
    g = np.exp(1j * phi * upper_mask(model))
    P_up = g[:, np.newaxis] * P.matrix * g.conj()[np.newaxis, :]
    dP = 1j * commutator(np.diag(upper_mask(model)).astype(complex), P_up)
    # i dP/dphi = [K, P]
    assert operator_norm(commutator(K, P_up) - 1j * dP) < 1e-10


def test_kato_generator_finite_difference(small_hofstadter):
    model = small_hofstadter
    P = lowest_projection(model.hamiltonian(), 12)
    exact = kato_generator(model, 0.7, P=P)
    numeric = kato_generator(model, 0.7, d_phi=1e-5, P=P)
    assert operator_norm(exact - numeric) < 1e-7


def test_truncate_left(small_hofstadter):
    model = small_hofstadter
    assert np.allclose(truncate_left(np.eye(model.dim), model), np.diag(left_mask(model)))
    with pytest.raises(DimensionMismatch):
        truncate_left(np.eye(3), model)


def test_atomic_transport_is_trivial(atomic_model):
    result = quasi_adiabatic_evolve(atomic_model, grid=8)
    assert result.deficiency == pytest.approx(0.0, abs=1e-12)
    assert result.unitarity_residual < 1e-8
    assert np.allclose(result.projection.matrix, result.ground.matrix, atol=1e-10)
    assert singular_value_decay(result.projection, result.ground) == float("inf")


def test_stepper_converges_to_closed_form(small_hofstadter):
    model = small_hofstadter
    P = lowest_projection(model.hamiltonian(), 12)
    result = quasi_adiabatic_evolve(model, grid=512, P=P)
    exact = exact_quasi_adiabatic_unitary(model, P=P)
    assert operator_norm(result.unitary - exact) < 1e-2
    window = flux_window(model, radius=2.0)
    exact_qa = exact @ P.matrix @ exact.conj().T
    assert result.deficiency == pytest.approx(charge_deficiency(exact_qa, P), abs=1e-10)
    assert charge_deficiency(result.projection, P, window) == pytest.approx(
        charge_deficiency(exact_qa, P, window), abs=1e-2)


def test_charge_deficiency_window_shape():
    with pytest.raises(DimensionMismatch):
        charge_deficiency(np.eye(2), np.eye(2), window=np.ones(3))


def test_atomic_sweep_has_no_flow(atomic_model):
    sweep = build_sweep(atomic_model, grid=8)
    assert len(sweep) == 8
    flow = spectral_flow(sweep, flux_window(atomic_model))
    assert flow.crossings == []
    assert flow.net_flow == 0
    assert spectral_flow(sweep.reversed()).total_flow == 0


def _moving_levels(phi):
    t = phi / (2 * np.pi)
    return np.array([-2.0 + 1.2 * t, -1.5, -0.3, 0.5 - t, 1.0, 2.0])


class _DiagonalSweep(FluxSweep):
    def hamiltonian(self, phi):
        return np.diag(_moving_levels(phi))


def _diagonal_sweep(grid, n_levels=4):
    spectra, energies, vectors, offsets = [], [], [], []
    for phi in grid:
        w, U = eigh(np.diag(_moving_levels(phi)))
        lo, e, V = tracked_band(w, U, 0.0, n_levels)
        spectra.append(w)
        energies.append(e)
        vectors.append(V)
        offsets.append(lo)
    return _DiagonalSweep(None, np.asarray(grid), 0.0, "half_line", spectra, energies, vectors, offsets)


def test_tracked_band_keeps_levels_above_mu():
    # near t = 5/6 the rising level below mu is as close to mu as the level at 1.0
    phi = 2 * np.pi * 0.8333
    w, U = eigh(np.diag(_moving_levels(phi)))
    lo, e, _ = tracked_band(w, U, 0.0, 4)
    assert lo == 2
    assert np.isclose(e, 1.0).any()
    assert np.count_nonzero(e > 0.0) == 2


def test_band_edge_exchange_is_not_a_crossing():
    sweep = _diagonal_sweep(np.linspace(0.0, 2 * np.pi, 10))
    assert sweep.tracked_offsets[0] == 1 and sweep.tracked_offsets[-1] == 2
    flow = spectral_flow(sweep)
    assert len(flow.crossings) == 1
    crossing = flow.crossings[0]
    assert crossing.direction == -1
    assert crossing.phi == pytest.approx(np.pi)
    assert crossing.branch == 3
    assert flow.net_flow == -1
    assert flow.refinements == 0
    backward = spectral_flow(sweep.reversed())
    assert isinstance(sweep.reversed(), _DiagonalSweep)
    assert backward.net_flow == 1


def test_sweep_rejects_short_grid(atomic_model):
    with pytest.raises(ConfigError):
        build_sweep(atomic_model, grid=1)


def test_laughlin_summability_of_atomic_model(atomic_model):
    P = fermi_projection(atomic_model.hamiltonian(), 0.0)
    result = laughlin_summability(P, atomic_model)
    assert result.schatten2 == pytest.approx(0.0, abs=1e-12)


def test_chern_number_of_atomic_model():
    model = make_model("atomic", 4)
    assert chern_number(model, [0], grid=6).value == 0
    assert chern_number(model, "below:0.0", grid=6).bands == [0]


def test_hofstadter_chern_numbers():
    model = make_model("hofstadter", 6)
    values = [chern_number(model, [b], grid=24) for b in range(3)]
    assert [abs(c.value) for c in values] == [1, 2, 1]
    assert sum(c.value for c in values) == 0
    assert abs(values[0].raw - values[0].value) < 1e-6


def test_chern_needs_commensurate_patch():
    with pytest.raises(NotCommensurate):
        chern_number(make_model("hofstadter", 7), [0])
    with pytest.raises(ConfigError):
        chern_number(make_model("hofstadter", 6), [0, 2])
    with pytest.raises(ConfigError):
        chern_number(make_model("hofstadter", 6), "above:1")


def test_flux_sweep_controller_atomic():
    lab = FluxSweepController(preset="atomic", size=8, grid=8, ode_steps=8, chern_grid=6)
    summary = lab.run()
    assert summary["spectral_flow"]["net_flow"] == 0
    assert summary["index"] == 0
    assert summary["chern"]["value"] == 0
    assert not lab.failed_checks()
    assert len(lab.spectra_rows()) == 8 * min(lab.settings.tracked_levels, 128)


def test_chern_controller_hofstadter():
    lab = ChernController(preset="hofstadter", size=6, grid=16)
    summary = lab.run()
    assert abs(summary["chern"]["value"]) == 1
    assert [abs(c) for c in summary["per_band"]] == [1, 2, 1]
    assert not lab.failed_checks()


def test_flux_sweep_controller_small_hofstadter():
    lab = FluxSweepController(preset="hofstadter", size=12, grid=24, ode_steps=32, chern_grid=12)
    summary = lab.run()
    flow = summary["spectral_flow"]["net_flow"]
    assert abs(flow) == 1
    assert summary["reversed_net_flow"] == -flow
    assert summary["index"] == flow
    assert round(summary["charge_deficiency"]) == flow
    assert abs(summary["chern"]["value"]) == 1
    assert summary["singular_value_decay"] is not None
    assert summary["singular_value_decay"] > 0


def test_stacked_controller_refuses_large_patch():
    with pytest.raises(TooManyModes):
        StackedIndexController(preset="hofstadter", size=4).run()


@pytest.mark.slow
def test_stacked_index_on_small_patch():
    lab = StackedIndexController(preset="hofstadter", size=3)
    summary = lab.run()
    assert summary["modes"] == 18
    assert summary["difference"] < 1e-7
    assert not lab.failed_checks()


@pytest.mark.slow
def test_hofstadter_flux_insertion():
    lab = FluxSweepController(preset="hofstadter", size=30, grid=64, chern_grid=24)
    summary = lab.run()
    flow = summary["spectral_flow"]["net_flow"]
    assert abs(flow) == 1
    assert summary["reversed_net_flow"] == -flow
    assert summary["index"] == flow
    assert summary["charge_deficiency"] == pytest.approx(flow, abs=0.05)
    assert abs(summary["chern"]["value"]) == 1
    assert not lab.failed_checks()
