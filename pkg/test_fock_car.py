"""
Tests for the finite CAR algebra, quasi-free states and the many-body index.
"""
import numpy as np
import pytest

from core.errors import NotInvariant, NotOrthonormal, NotUnitary, TooManyModes, UnknownLabel
from core.matrix_kernel import operator_norm, random_projection, random_unitary, schatten_norm
from core.settings import NumericalSettings
from labs.fock_car import (
    CorrespondenceController,
    ModeSpace,
    annihilator_of,
    build_car,
    charge_operator,
    creator_of,
    delta_rho,
    excess_unitary,
    full_charge,
    gamma,
    intertwiner,
    layer_charge,
    many_body_index,
    quasi_free_state,
    stacked_index,
    stacked_intertwiner,
    stacked_projection,
    state_distance,
    wick_expectation,
)
from labs.fock_car.charge import rotation
from labs.fock_car.implementers import bogoliubov_operator, intertwiner_parts
from labs.fock_car.states import PureState, two_point_matrix
from labs.projection_index import index_eig, shift_pair


def _random_vector(n, rng):
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    return f / np.linalg.norm(f)


@pytest.fixture
def car4():
    return build_car(ModeSpace.generic(4))


def test_canonical_anticommutation_relations(car4):
    eye = np.eye(car4.fock_dim)
    for i in range(4):
        for j in range(4):
            a_i, a_j, ad_j = car4.annihilators[i], car4.annihilators[j], car4.creators[j]
            assert np.allclose((a_i @ ad_j + ad_j @ a_i).toarray(), eye if i == j else 0.0)
            assert np.allclose((a_i @ a_j + a_j @ a_i).toarray(), 0.0)


def test_smeared_operators_follow_inner_product(car4, rng):
    f, g = _random_vector(4, rng), _random_vector(4, rng)
    anti = (annihilator_of(f, car4) @ creator_of(g, car4) + creator_of(g, car4) @ annihilator_of(f, car4))
    assert np.allclose(anti.toarray(), np.vdot(f, g) * np.eye(car4.fock_dim))


def test_vacuum_is_annihilated(car4):
    vac = car4.vacuum()
    for a in car4.annihilators:
        assert np.allclose(a @ vac, 0.0)


def test_mode_cap_is_enforced():
    with pytest.raises(TooManyModes) as info:
        build_car(ModeSpace.generic(15))
    assert info.value.estimated_bytes > 0
    assert build_car(ModeSpace.generic(3), max_modes=3).fock_dim == 8


def test_unknown_label_is_a_key_error():
    modes = ModeSpace.chain([0, 1, 2])
    assert modes.index_of((2,)) == 2
    with pytest.raises(KeyError):
        modes.index_of((7,))
    with pytest.raises(UnknownLabel):
        charge_operator([(7,)], build_car(modes))


def test_doubled_space_interleaves_layers():
    modes = ModeSpace.chain([0, 1]).doubled()
    assert modes.labels == ((1, 0), (2, 0), (1, 1), (2, 1))
    assert modes.layer_indices(2) == [1, 3]


def test_two_point_matrix_is_transposed_projection(car4, rng):
    P = random_projection(4, 2, rng)
    omega = quasi_free_state(P, car4)
    assert omega.particle_number == 2
    assert np.allclose(two_point_matrix(omega, car4), P.matrix.T, atol=1e-10)


def test_two_point_functional(car4, rng):
    P = random_projection(4, 2, rng)
    omega = quasi_free_state(P, car4)
    f, g = _random_vector(4, rng), _random_vector(4, rng)
    assert omega.two_point(f, g, car4) == pytest.approx(np.vdot(g, P.matrix @ f), abs=1e-10)


def test_wick_rule_matches_fock_expectation(car4, rng):
    P = random_projection(4, 2, rng)
    omega = quasi_free_state(P, car4)
    f1, f2, g1, g2 = (_random_vector(4, rng) for _ in range(4))
    op = creator_of(f2, car4) @ creator_of(f1, car4) @ annihilator_of(g1, car4) @ annihilator_of(g2, car4)
    assert omega(op) == pytest.approx(wick_expectation(P, [f1, f2], [g1, g2]), abs=1e-10)
    assert wick_expectation(P, [f1], []) == 0.0


def test_quasi_free_state_is_charge_eigenvector(car4, rng):
    P = random_projection(4, 3, rng)
    omega = quasi_free_state(P, car4)
    Q = full_charge(car4)
    assert omega(Q.operator).real == pytest.approx(3.0)
    assert omega.variance(Q.operator) < 1e-12
    assert list(Q.spectrum()) == [0, 1, 2, 3, 4]


def test_gamma_series_matches_schur_product(car4, rng):
    V = random_unitary(4, rng)
    series = gamma(V, car4, method="series").toarray()
    spectral = gamma(V, car4, method="spectral").toarray()
    assert np.allclose(series, spectral, atol=1e-10)


def test_gamma_implements_bogoliubov_automorphism(car4, rng):
    V = random_unitary(4, rng)
    G = gamma(V, car4)
    f = _random_vector(4, rng)
    lhs = (G @ creator_of(f, car4) @ G.adjoint()).toarray()
    assert np.allclose(lhs, creator_of(V @ f, car4).toarray(), atol=1e-10)


def test_gamma_of_identity_is_identity(car4):
    assert np.allclose(gamma(np.eye(4), car4).toarray(), np.eye(16))


def test_gamma_rejects_non_unitary(car4):
    with pytest.raises(NotUnitary):
        gamma(2.0 * np.eye(4), car4)


def test_matrix_free_implementer_agrees_with_sparse(car4, rng):
    V = random_unitary(4, rng)
    dense = bogoliubov_operator(V, car4, matrix_free=False)
    free = bogoliubov_operator(V, car4, matrix_free=True)
    psi = _random_vector(16, rng)
    assert free.matrix_free
    assert np.allclose(free.apply(psi), dense.apply(psi), atol=1e-10)
    assert np.allclose(free.adjoint().apply(psi), dense.adjoint().apply(psi), atol=1e-10)


def test_excess_unitary_squares_to_sign(car4, rng):
    F = random_unitary(4, rng)[:, :2]
    v = excess_unitary(F, car4).toarray()
    assert np.allclose(v.conj().T @ v, np.eye(16), atol=1e-10)
    square = v @ v
    assert np.allclose(square, square[0, 0] * np.eye(16), atol=1e-10)
    assert abs(abs(square[0, 0]) - 1.0) < 1e-10


def test_excess_unitary_needs_orthonormal_vectors(car4):
    with pytest.raises(NotOrthonormal):
        excess_unitary(np.ones((4, 2)), car4)


def test_intertwiner_transports_state(rng):
    car = build_car(ModeSpace.generic(5))
    P1 = random_projection(5, 3, rng)
    P2 = random_projection(5, 2, rng)
    u = intertwiner(P1, P2, car)
    omega2 = quasi_free_state(P1, car).conjugated_by(u)
    assert np.allclose(two_point_matrix(omega2, car), P2.matrix.T, atol=1e-8)
    assert state_distance(omega2, quasi_free_state(P2, car)) < 1e-4


def test_many_body_index_equals_projection_index(rng):
    car = build_car(ModeSpace.generic(6))
    P1 = random_projection(6, 4, rng)
    P2 = random_projection(6, 2, rng)
    omega1 = quasi_free_state(P1, car)
    parts = intertwiner_parts(P1, P2, car)
    value = many_body_index(omega1, parts.u, full_charge(car))
    assert value == pytest.approx(index_eig(P1, P2), abs=1e-8)
    assert parts.wold.index == 2


def test_shift_many_body_index():
    pair = shift_pair(8)
    modes = ModeSpace.chain(pair.meta["positions"])
    car = build_car(modes)
    e0 = np.zeros(8)
    e0[modes.index_of((0,))] = 1.0
    omega = quasi_free_state(pair.P, car)
    value = many_body_index(omega, excess_unitary(e0, car), full_charge(car))
    assert value == pytest.approx(-1.0, abs=1e-10)


def test_many_body_index_needs_invariant_state(car4):
    psi = (car4.vacuum() + car4.creators[0] @ car4.vacuum()) / np.sqrt(2.0)
    state = PureState(car4.modes, psi)
    with pytest.raises(NotInvariant):
        many_body_index(state, car4.identity, full_charge(car4))


def test_delta_rho_of_creator(car4, rng):
    Q = full_charge(car4)
    f = _random_vector(4, rng)
    # [Q, a*(f)] = a*(f)
    assert np.allclose(delta_rho(creator_of(f, car4), Q).toarray(), 1j * creator_of(f, car4).toarray())


def test_stacked_index_equals_single_particle(rng):
    P = random_projection(3, 2, rng)
    P_prime = random_projection(3, 1, rng)
    car = build_car(ModeSpace.generic(3).doubled())
    u_hat = stacked_intertwiner(P, P_prime, car)
    value = stacked_index(P, u_hat, car)
    assert value == pytest.approx(index_eig(P, P_prime), abs=1e-8)
    assert layer_charge(car, 1).indices == (0, 2, 4)


@pytest.fixture(scope="module")
def car5():
    return build_car(ModeSpace.generic(5))


@pytest.fixture(scope="module")
def car6():
    return build_car(ModeSpace.generic(6))


def _three_projections(seed):
    rng = np.random.default_rng(seed)
    ranks = rng.integers(1, 5, size=3)
    return rng, [random_projection(5, int(r), rng) for r in ranks]


@pytest.mark.parametrize("seed", range(20))
def test_many_body_index_is_integral_and_additive(car5, seed):
    _, (P1, P2, P3) = _three_projections(seed)
    Q = full_charge(car5)
    omega1 = quasi_free_state(P1, car5)
    u12, u23 = intertwiner(P1, P2, car5), intertwiner(P2, P3, car5)
    n12 = many_body_index(omega1, u12, Q)
    n23 = many_body_index(quasi_free_state(P2, car5), u23, Q)
    assert abs(n12 - round(n12)) < 1e-8
    assert round(n12) == index_eig(P1, P2)
    assert many_body_index(omega1, u23 @ u12, Q) == pytest.approx(n12 + n23, abs=1e-8)
    assert many_body_index(omega1, intertwiner(P1, P3, car5), Q) == pytest.approx(n12 + n23, abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_many_body_index_flips_sign_under_inverse(car5, seed):
    _, (P1, P2, _) = _three_projections(seed)
    Q = full_charge(car5)
    u = intertwiner(P1, P2, car5)
    forward = many_body_index(quasi_free_state(P1, car5), u, Q)
    backward = many_body_index(quasi_free_state(P2, car5), u.adjoint(), Q)
    assert backward == pytest.approx(-forward, abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_many_body_index_does_not_depend_on_intertwiner(car5, seed):
    rng, (P1, P2, _) = _three_projections(seed)
    Q = full_charge(car5)
    alpha, beta = rng.uniform(0.0, 2 * np.pi, size=2)
    # W commutes with P1, so gamma(W) only rephases the Slater vector of P1
    W = np.exp(1j * alpha) * P1.matrix + np.exp(1j * beta) * (np.eye(5) - P1.matrix)
    u = intertwiner(P1, P2, car5)
    other = rotation(Q, 0.7) @ u @ gamma(W, car5)
    omega1 = quasi_free_state(P1, car5)
    assert state_distance(omega1.conjugated_by(other), quasi_free_state(P2, car5)) < 1e-4
    assert many_body_index(omega1, other, Q) == pytest.approx(many_body_index(omega1, u, Q), abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_nonzero_index_separates_states(car5, seed):
    _, (P1, P2, _) = _three_projections(seed)
    omega1 = quasi_free_state(P1, car5)
    omega2 = omega1.conjugated_by(intertwiner(P1, P2, car5))
    distance = state_distance(omega1, omega2)
    if index_eig(P1, P2) != 0:
        assert distance == pytest.approx(2.0, abs=1e-8)
    else:
        assert distance < 2.0


@pytest.mark.parametrize("seed", range(20))
def test_many_body_index_adds_over_layers(seed):
    rng = np.random.default_rng(100 + seed)
    r1, r2, r3, r4 = (int(r) for r in rng.integers(1, 3, size=4))
    P1, P2 = random_projection(3, r1, rng), random_projection(3, r2, rng)
    P1_prime, P2_prime = random_projection(3, r3, rng), random_projection(3, r4, rng)
    car = build_car(ModeSpace.generic(3).doubled())
    S1 = stacked_projection(P1, P1_prime)
    S2 = stacked_projection(P2, P2_prime)
    value = many_body_index(quasi_free_state(S1, car), intertwiner(S1, S2, car), full_charge(car))
    expected = index_eig(P1, P2) + index_eig(P1_prime, P2_prime)
    assert expected == (r1 - r2) + (r3 - r4)
    assert value == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_gamma_is_a_charge_preserving_representation(car6, seed):
    rng = np.random.default_rng(seed)
    V1, V2 = random_unitary(6, rng), random_unitary(6, rng)
    G1, G2 = gamma(V1, car6), gamma(V2, car6)
    f = _random_vector(6, rng)
    lhs = (G1 @ creator_of(f, car6) @ G1.adjoint()).toarray()
    assert np.allclose(lhs, creator_of(V1 @ f, car6).toarray(), atol=1e-9)
    assert np.allclose((G1 @ G2).toarray(), gamma(V1 @ V2, car6).toarray(), atol=1e-9)
    assert np.abs(delta_rho(G1, full_charge(car6)).toarray()).max() < 1e-9
    bound = np.exp(schatten_norm(V1 - np.eye(6), 1))
    assert operator_norm(G1.toarray()) <= bound + 1e-9
    assert operator_norm(G1.toarray()) == pytest.approx(1.0, abs=1e-9)


def test_correspondence_controller_random():
    lab = CorrespondenceController(example="random", n_modes=5, trials=3, seed=11)
    summary = lab.run()
    assert summary["passed"] == 3
    assert not lab.failed_checks()


def test_correspondence_controller_shift():
    lab = CorrespondenceController(example="shift", n_modes=6)
    summary = lab.run()
    assert summary["results"][0]["index_eig"] == -1
    assert not lab.failed_checks()


def test_correspondence_controller_respects_mode_cap():
    lab = CorrespondenceController(n_modes=9, settings=NumericalSettings(max_modes=8))
    with pytest.raises(TooManyModes):
        lab.run()
