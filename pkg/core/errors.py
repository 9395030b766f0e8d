"""
Exception hierarchy for the flux-index lab.

Every error carries an ``exit_code`` so the launcher can map failures onto the
documented process exit codes without inspecting messages.
"""
from typing import Optional


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ASSERTION = 4


class LabError(Exception):
    """Base class for all lab errors."""

    exit_code = EXIT_NUMERICAL


class ConfigError(LabError):
    """Bad configuration key, value, preset name or input file."""

    exit_code = EXIT_CONFIG


class AssertionFailure(LabError):
    """A theorem equality failed beyond its tolerance."""

    exit_code = EXIT_ASSERTION

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class NumericalError(LabError):
    """A numerical precondition or postcondition failed."""

    exit_code = EXIT_NUMERICAL


class NonHermitian(NumericalError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"matrix is not Hermitian: ||A - A*|| = {residual:.3e} > {tol:.1e}")
        self.residual = residual
        self.tol = tol


class ConvergenceFailure(NumericalError):
    pass


class InvalidOrder(NumericalError, ValueError):
    def __init__(self, p: float):
        super().__init__(f"Schatten order must be >= 1 or inf, got {p}")
        self.p = p


class NotProjection(NumericalError):
    """Raised with both residuals so callers can report how far off the input was."""

    def __init__(self, hermiticity_residual: float, idempotency_residual: float, tol: float):
        super().__init__(
            f"not a projection: ||P - P*|| = {hermiticity_residual:.3e}, "
            f"||P^2 - P|| = {idempotency_residual:.3e} (tol {tol:.1e})"
        )
        self.hermiticity_residual = hermiticity_residual
        self.idempotency_residual = idempotency_residual
        self.tol = tol


class DimensionMismatch(NumericalError, ValueError):
    def __init__(self, expected, got, what: str = "operand"):
        super().__init__(f"dimension mismatch for {what}: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class AmbiguousSpectrum(NumericalError):
    def __init__(self, eigenvalue: float, tol: float):
        super().__init__(
            f"eigenvalue {eigenvalue:.12f} lies in the dead zone ({tol:.1e}, {2 * tol:.1e}) around +-1"
        )
        self.eigenvalue = eigenvalue
        self.tol = tol


class DegenerateGeometry(NumericalError):
    def __init__(self, norm: float, tol: float):
        super().__init__(
            f"generic part of P1 - P2 has norm {norm:.12f} >= 1 - {tol:.1e}; no Kato rotation exists"
        )
        self.norm = norm


class TooManyModes(NumericalError):
    def __init__(self, n_modes: int, cap: int, estimated_bytes: int):
        super().__init__(
            f"{n_modes} modes exceeds the cap of {cap} "
            f"(Fock dimension 2^{n_modes}, about {estimated_bytes / 2**20:.1f} MiB of generators)"
        )
        self.n_modes = n_modes
        self.cap = cap
        self.estimated_bytes = estimated_bytes


class UnknownLabel(NumericalError, KeyError):
    def __init__(self, label):
        super().__init__(f"unknown mode label {label!r}")
        self.label = label

    def __str__(self):
        return self.args[0]


class NotUnitary(NumericalError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"operator is not unitary: residual {residual:.3e} > {tol:.1e}")
        self.residual = residual


class NotInvariant(NumericalError):
    def __init__(self, variance: float, tol: float):
        super().__init__(f"state is not charge invariant: charge variance {variance:.3e} > {tol:.1e}")
        self.variance = variance


class NotOrthonormal(NumericalError):
    def __init__(self, residual: float):
        super().__init__(f"vectors are not orthonormal: ||F*F - 1|| = {residual:.3e}")
        self.residual = residual


class DecayViolation(NumericalError):
    def __init__(self, x, y, norm: float, bound: float):
        super().__init__(
            f"hopping {x} -> {y} has norm {norm:.3e} above the decay bound {bound:.3e}"
        )
        self.sites = (x, y)
        self.norm = norm
        self.bound = bound


class OriginOnBoundary(NumericalError):
    def __init__(self, bounds):
        super().__init__(f"origin must lie in the interior of the patch, got bounds {bounds}")
        self.bounds = bounds


class FermiLevelInSpectrum(NumericalError):
    def __init__(self, eigenvalue: float, mu: float, phi: Optional[float] = None):
        where = f" at phi = {phi:.6f}" if phi is not None else ""
        super().__init__(f"Fermi level {mu} is within tolerance of eigenvalue {eigenvalue:.12f}{where}")
        self.eigenvalue = eigenvalue
        self.mu = mu
        self.phi = phi


class UnresolvedCrossing(NumericalError):
    def __init__(self, phi: float, branch: Optional[int] = None, width: float = 0.0):
        super().__init__(
            f"could not resolve crossing near phi = {phi:.6f} (branch {branch}, cell width {width:.2e})"
        )
        self.phi = phi
        self.branch = branch
        self.width = width


class NonSimpleCrossing(NumericalError):
    def __init__(self, phi: float, branches):
        super().__init__(f"branches {list(branches)} cross the Fermi level in one cell at phi = {phi:.6f}")
        self.phi = phi
        self.branches = list(branches)


class StepFloorReached(NumericalError):
    def __init__(self, n_steps: int, change: float):
        super().__init__(
            f"quasi-adiabatic evolution did not converge at {n_steps} steps (last change {change:.3e})"
        )
        self.n_steps = n_steps
        self.change = change


class UnitarityLoss(NumericalError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"propagator lost unitarity: ||U*U - 1|| = {residual:.3e} > {tol:.1e}")
        self.residual = residual


class NotCommensurate(NumericalError):
    pass


class GapClosesOnBZ(NumericalError):
    def __init__(self, gap: float, k=None):
        super().__init__(f"selected bands are not separated: minimal gap {gap:.3e} at k = {k}")
        self.gap = gap
        self.k = k
