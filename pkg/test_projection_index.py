"""
Tests for the index of a pair of projections and its examples.
"""
import numpy as np
import pytest

from core.errors import AmbiguousSpectrum, ConfigError, DimensionMismatch, NotProjection
from core.matrix_kernel import dagger, operator_norm, random_unitary
from labs.projection_index import (
    IndexPairController,
    dimer_pair,
    dimer_summability,
    index_arveson,
    index_eig,
    index_report,
    index_trace_power,
    load_projection,
    planted_pair,
    random_pair,
    shift_pair,
    wold_decompose,
)


def test_shift_pair_index_is_minus_one():
    pair = shift_pair(41)
    assert index_eig(pair.P, pair.Q) == -1
    for p_prime in (0, 1, 2):
        assert index_trace_power(pair.P, pair.Q, p_prime) == pytest.approx(-1.0, abs=1e-12)
    assert index_arveson(pair.P, pair.Q) == pytest.approx(-1.0, abs=1e-12)


def test_shift_pair_positions_are_centered():
    pair = shift_pair(5)
    assert pair.meta["positions"] == [-2, -1, 0, 1, 2]
    with pytest.raises(ConfigError):
        shift_pair(2)


def test_index_is_antisymmetric():
    pair = shift_pair(11)
    assert index_eig(pair.Q, pair.P) == 1


def test_window_hides_excess_outside():
    pair = shift_pair(11)
    x = np.array(pair.meta["positions"])
    assert index_eig(pair.P, pair.Q, window=(x != 0).astype(float)) == 0
    assert index_eig(pair.P, pair.Q, window=(x == 0).astype(float)) == -1


def test_window_shape_is_checked():
    pair = shift_pair(11)
    with pytest.raises(DimensionMismatch):
        index_eig(pair.P, pair.Q, window=np.ones(3))


def test_random_pair_index_is_rank_difference(rng):
    pair = random_pair(10, rng, rank_p=6, rank_q=3)
    report = index_report(pair.P, pair.Q)
    assert report.value_eig == 3
    assert report.agrees
    assert report.agreement_residual < 1e-8


def test_formulas_agree_on_random_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        dim = int(rng.integers(8, 129))
        pair = random_pair(dim, rng)
        report = index_report(pair.P, pair.Q, p_primes=(0, 1, 2))
        assert report.value_eig == pair.expected_index
        assert report.agreement_residual < 1e-8
        assert sorted(report.trace_powers) == [0, 1, 2]


@pytest.mark.parametrize("dim, n_plus, n_minus", [(12, 2, 1), (10, 0, 3), (9, 1, 1)])
def test_index_is_invariant_under_unitary_conjugation(rng, dim, n_plus, n_minus):
    pair = planted_pair(dim, n_plus=n_plus, n_minus=n_minus, rng=rng)
    W = random_unitary(dim, rng)
    P = W @ pair.P.matrix @ dagger(W)
    Q = W @ pair.Q.matrix @ dagger(W)
    assert index_eig(P, Q) == index_eig(pair.P, pair.Q) == n_minus - n_plus


def test_equal_projections_have_index_zero(rng):
    pair = random_pair(9, rng, rank_p=4, rank_q=4)
    assert index_eig(pair.P, pair.P) == 0


def test_planted_pair_wold_decomposition(rng):
    pair = planted_pair(12, n_plus=2, n_minus=1, rng=rng)
    assert pair.expected_index == -1
    assert index_eig(pair.P, pair.Q) == -1

    wold = wold_decompose(pair.P, pair.Q)
    assert (wold.n_plus, wold.n_minus) == (2, 1)
    assert wold.index == -1
    assert wold.reconstruction_residual < 1e-8
    assert wold.unitarity_residual < 1e-8
    rebuilt = wold.rotated(pair.P) + wold.N_plus.matrix - wold.N_minus.matrix
    assert operator_norm(rebuilt - pair.Q.matrix) < 1e-8


def test_planted_pair_rejects_impossible_excess(rng):
    with pytest.raises(ConfigError):
        planted_pair(6, n_plus=4, n_minus=0, rng=rng)


def test_near_one_eigenvalue_is_ambiguous():
    theta = np.arcsin(1.0 - 1.5e-7)
    v = np.array([np.cos(theta), np.sin(theta)])
    P = np.diag([1.0, 0.0])
    Q = np.outer(v, v)
    with pytest.raises(AmbiguousSpectrum):
        index_eig(P, Q, tol=1e-7)
    assert index_eig(P, Q, tol=1e-6) == 0


def test_dimer_index_and_singular_values():
    pair = dimer_pair(200, 0.4)
    assert index_eig(pair.P, pair.Q) == 0
    sigma = np.sort(np.linalg.svd(pair.P.matrix - pair.Q.matrix, compute_uv=False))[::-1]
    expected = np.sort(np.repeat(np.arange(1, 201, dtype=float) ** -0.4, 2))[::-1]
    assert np.allclose(sigma, expected, atol=1e-10)


def test_dimer_summability():
    summ = dimer_summability(200, 0.4)
    assert summ.relative_tail_p3 < 1e-3
    assert summ.p2_keeps_growing
    assert summ.p3_settles


def test_dimer_rejects_bad_parameters():
    with pytest.raises(ConfigError):
        dimer_pair(0, 0.4)
    with pytest.raises(ConfigError):
        dimer_pair(10, -1.0)


def test_load_projection_from_npy(tmp_path):
    path = tmp_path / "p.npy"
    np.save(path, np.diag([1.0, 0.0, 1.0]))
    P = load_projection(str(path))
    assert P.rank == 2


def test_load_projection_from_text(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("1 0\n0 0\n")
    assert load_projection(str(path)).rank == 1


def test_load_projection_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_projection(str(tmp_path / "missing.npy"))
    path = tmp_path / "bad.npy"
    np.save(path, np.diag([1.0, 0.5]))
    with pytest.raises(NotProjection):
        load_projection(str(path))


def test_controller_shift():
    lab = IndexPairController(example="shift", sites=21)
    summary = lab.run()
    assert summary["index"]["value_eig"] == -1
    assert summary["wold"]["n_plus"] == 1
    assert summary["wold"]["n_minus"] == 0
    assert not lab.failed_checks()


def test_controller_dimer():
    lab = IndexPairController(example="dimer", n_dimers=200, beta=0.4)
    summary = lab.run()
    assert summary["index"]["value_eig"] == 0
    assert summary["dimer"]["relative_tail_p3"] < 1e-3
    assert not lab.failed_checks()


def test_controller_random_batch():
    lab = IndexPairController(example="random", trials=4, dim_range=(4, 12), seed=3)
    summary = lab.run()
    assert len(summary["results"]) == 4
    assert summary["agreeing_trials"] == 4
    assert not lab.failed_checks()


def test_controller_file_pair(tmp_path):
    p, q = tmp_path / "p.npy", tmp_path / "q.npy"
    np.save(p, np.diag([1.0, 1.0, 0.0]))
    np.save(q, np.diag([1.0, 0.0, 0.0]))
    summary = IndexPairController(p_path=str(p), q_path=str(q)).run()
    assert summary["index"]["value_eig"] == 1


def test_controller_rejects_unknown_example():
    with pytest.raises(ConfigError):
        IndexPairController(example="spiral")
    with pytest.raises(ConfigError):
        IndexPairController(p_path="only-p.npy")


def test_wold_rotation_is_unitary(rng):
    pair = random_pair(8, rng, rank_p=4, rank_q=4)
    wold = wold_decompose(pair.P, pair.Q)
    assert np.allclose(dagger(wold.V) @ wold.V, np.eye(8), atol=1e-8)
