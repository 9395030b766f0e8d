"""
Tests for the linear algebra substrate, settings and the error hierarchy.
"""
import numpy as np
import pytest

from core.base_lab import BaseLab
from core.errors import (
    EXIT_ASSERTION,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    AssertionFailure,
    ConfigError,
    DimensionMismatch,
    InvalidOrder,
    NonHermitian,
    NotProjection,
    UnknownLabel,
)
from core.matrix_kernel import (
    dagger,
    eigh,
    expm_antihermitian,
    operator_norm,
    phase_fix,
    projection_onto,
    random_hermitian,
    random_projection,
    random_unitary,
    schatten_norm,
    spectral_projection,
    validate_projection,
)
from core.settings import MAX_MODES_ENV, THREADS_ENV, NumericalSettings


def test_eigh_reconstructs_and_sorts(rng):
    A = random_hermitian(7, rng)
    w, U = eigh(A)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(U @ np.diag(w) @ dagger(U), A, atol=1e-10)
    assert np.allclose(dagger(U) @ U, np.eye(7), atol=1e-12)


def test_eigh_phases_are_reproducible(rng):
    A = random_hermitian(5, rng)
    _, U = eigh(A)
    _, U2 = eigh(A.copy())
    assert np.allclose(U, U2)
    lead = U[np.argmax(np.abs(U) > 1e-12 * np.abs(U).max(axis=0), axis=0), np.arange(5)]
    assert np.allclose(lead.imag, 0.0) and np.all(lead.real > 0)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitian):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigh_rejects_rectangular():
    with pytest.raises(DimensionMismatch):
        eigh(np.zeros((2, 3)))


def test_phase_fix_handles_zero_leading_rows():
    U = np.array([[0.0, 1j], [-1j, 0.0]])
    fixed = phase_fix(U)
    assert np.allclose(fixed, [[0.0, 1.0], [1.0, 0.0]])


def test_schatten_norms_of_diagonal():
    A = np.diag([3.0, 4.0])
    assert schatten_norm(A, 2) == pytest.approx(5.0)
    assert schatten_norm(A, 1) == pytest.approx(7.0)
    assert schatten_norm(A, np.inf) == pytest.approx(4.0)
    assert schatten_norm(np.zeros((3, 3)), 2) == 0.0


def test_schatten_rejects_order_below_one():
    with pytest.raises(InvalidOrder):
        schatten_norm(np.eye(2), 0.5)


def test_expm_antihermitian_is_unitary(rng):
    A = random_hermitian(6, rng)
    U = expm_antihermitian(A, 0.7)
    assert operator_norm(dagger(U) @ U - np.eye(6)) < 1e-12
    assert np.allclose(expm_antihermitian(A, 0.0), np.eye(6))


def test_non_hermitian_error_reports_compared_tolerance():
    A = np.array([[0.0, 4.0], [0.0, 0.0]])
    # symmetric part has norm 2, so the bound is twice the setting
    with pytest.raises(NonHermitian) as info:
        expm_antihermitian(A, 1.0)
    assert info.value.tol == pytest.approx(2e-8)
    assert info.value.residual == pytest.approx(4.0)
    # eigh scales by the Frobenius norm
    with pytest.raises(NonHermitian) as info:
        eigh(A)
    assert info.value.tol == pytest.approx(4e-8)


def test_validate_projection_records_rank(rng):
    P = random_projection(8, 3, rng)
    checked = validate_projection(P.matrix)
    assert checked.rank == 3
    assert checked.idempotency_residual < 1e-10
    assert checked.complement().rank == 5


def test_validate_projection_rejects_non_projection():
    with pytest.raises(NotProjection) as info:
        validate_projection(np.diag([1.0, 0.5]))
    assert info.value.idempotency_residual == pytest.approx(0.25)


def test_projection_onto_span():
    P = projection_onto(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    assert P.rank == 2
    assert np.allclose(P.matrix, np.diag([1.0, 1.0, 0.0]))


def test_spectral_projection_counts_levels():
    P, w, _ = spectral_projection(np.diag([-2.0, -1.0, 3.0]), 0.0)
    assert P.rank == 2
    assert np.allclose(w, [-2.0, -1.0, 3.0])


def test_random_unitary_is_unitary(rng):
    U = random_unitary(5, rng)
    assert np.allclose(dagger(U) @ U, np.eye(5), atol=1e-12)


def test_random_projection_rejects_bad_rank(rng):
    with pytest.raises(DimensionMismatch):
        random_projection(3, 4, rng)


def test_settings_reject_non_positive_values():
    with pytest.raises(ConfigError):
        NumericalSettings(excess_tol=0.0)


def test_settings_from_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    monkeypatch.setenv(MAX_MODES_ENV, "10")
    s = NumericalSettings.from_env(deficiency_tol=1e-4)
    assert s.n_jobs == 3
    assert s.max_modes == 10
    assert s.deficiency_tol == 1e-4


def test_settings_from_env_rejects_garbage(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        NumericalSettings.from_env()


def test_exit_codes():
    assert ConfigError("x").exit_code == EXIT_CONFIG
    assert NonHermitian(1.0, 1e-8).exit_code == EXIT_NUMERICAL
    assert AssertionFailure("x").exit_code == EXIT_ASSERTION
    assert isinstance(UnknownLabel((9,)), KeyError)


class _FailingLab(BaseLab):
    name = "failing"

    def run(self):
        self.check("always_off", 1.0, 0.0, 0.1)
        return self.base_summary()

    def table(self):
        return []


def test_failed_check_raises_assertion_failure():
    lab = _FailingLab(seed=0)
    summary = lab.run()
    assert summary["checks"][0]["passed"] is False
    with pytest.raises(AssertionFailure) as info:
        lab.raise_on_failure()
    assert info.value.residual == pytest.approx(1.0)
