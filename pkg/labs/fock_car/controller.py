import logging
from typing import Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from core.base_lab import BaseLab
from core.errors import ConfigError
from core.matrix_kernel import random_projection
from core.settings import NumericalSettings
from labs.fock_car.car import CARAlgebra, build_car
from labs.fock_car.charge import full_charge
from labs.fock_car.implementers import excess_unitary, intertwiner_parts
from labs.fock_car.index import charge_difference, many_body_index
from labs.fock_car.modes import ModeSpace
from labs.fock_car.states import quasi_free_state, state_distance, two_point_matrix
from labs.projection_index.examples import shift_pair
from labs.projection_index.index import index_eig

logger = logging.getLogger(__name__)

CORRESPONDENCE_EXAMPLES = ("shift", "random", "equal")


def _pair_for(example: str, n_modes: int, rng: np.random.Generator):
    if example == "shift":
        pair = shift_pair(n_modes)
        return pair.P, pair.Q, ModeSpace.chain(pair.meta["positions"])
    P1 = random_projection(n_modes, int(rng.integers(0, n_modes + 1)), rng)
    if example == "equal":
        return P1, P1, ModeSpace.generic(n_modes)
    P2 = random_projection(n_modes, int(rng.integers(0, n_modes + 1)), rng)
    return P1, P2, ModeSpace.generic(n_modes)


def correspondence_trial(example: str, n_modes: int, seed, settings: NumericalSettings) -> Dict:
    """One comparison of index(P1, P2) with the many-body index of (omega_P1, omega_P2)."""
    rng = np.random.default_rng(seed)
    P1, P2, modes = _pair_for(example, n_modes, rng)
    car = build_car(modes, max_modes=settings.max_modes)
    single = index_eig(P1, P2, tol=settings.excess_tol)

    omega1 = quasi_free_state(P1, car)
    parts = intertwiner_parts(P1, P2, car, settings)
    omega2 = omega1.conjugated_by(parts.u)
    Q = full_charge(car)
    many = many_body_index(omega1, parts.u, Q, settings)

    state_residual = float(np.max(np.abs(two_point_matrix(omega2, car) - P2.matrix.T)))
    trial = {
        "rank_p1": P1.rank,
        "rank_p2": P2.rank,
        "index_eig": single,
        "many_body_index": many,
        "difference": abs(many - single),
        "charge_difference": charge_difference(omega1, omega2, Q),
        "state_residual": state_residual,
        "state_distance": state_distance(omega1, omega2),
        "n_plus": parts.wold.n_plus,
        "n_minus": parts.wold.n_minus,
    }
    if example == "shift":
        zero = modes.index_of((0,))
        e0 = np.zeros(n_modes)
        e0[zero] = 1.0
        trial["shift_unitary_index"] = many_body_index(omega1, excess_unitary(e0, car, settings=settings), Q, settings)
    return trial


class CorrespondenceController(BaseLab):
    """Single-particle index against the many-body index of the quasi-free pair."""

    name = "correspondence"

    def __init__(self, example: str = "random", n_modes: int = 8, trials: int = 1,
                 settings: Optional[NumericalSettings] = None, seed: Optional[int] = 0,
                 progress: bool = False, equality_tol: float = 1e-7):
        """
        Initialize the correspondence check.

        Args:
            example: 'shift', 'random' or 'equal'
            n_modes: one-particle dimension (chain length for the shift)
            trials: number of seeded pairs (random and equal examples)
            equality_tol: allowed |index - many-body index|
        """
        super().__init__(settings=settings, seed=seed)
        if example not in CORRESPONDENCE_EXAMPLES:
            raise ConfigError(f"unknown example {example!r}; choose from {', '.join(CORRESPONDENCE_EXAMPLES)}")
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        self.example = example
        self.n_modes = n_modes
        self.trials = 1 if example == "shift" else trials
        self.progress = progress
        self.equality_tol = equality_tol
        self.results: List[Dict] = []
        self.summary: Dict = {}

    def run(self) -> Dict:
        self.reset()
        s = self.settings
        # fail fast before spawning workers
        if self.n_modes > s.max_modes:
            CARAlgebra(ModeSpace.generic(self.n_modes), max_modes=s.max_modes)
        seeds = np.random.SeedSequence(self.seed).spawn(self.trials)
        jobs = (delayed(correspondence_trial)(self.example, self.n_modes, sq, s)
                for sq in tqdm(seeds, desc="correspondence", disable=not self.progress))
        self.results = Parallel(n_jobs=s.n_jobs)(jobs)

        worst = max(r["difference"] for r in self.results)
        passed = sum(1 for r in self.results if r["difference"] < self.equality_tol)
        self.check("index_equality", worst, 0.0, self.equality_tol)
        self.check("state_transport", max(r["state_residual"] for r in self.results), 0.0, 1e-8)
        if self.example == "shift":
            self.check("shift_many_body_index", self.results[0]["shift_unitary_index"], -1.0, s.integrality_tol)

        summary = self.base_summary()
        summary.update({
            "example": self.example,
            "n_modes": self.n_modes,
            "trials": self.trials,
            "passed": passed,
            "equality_tol": self.equality_tol,
            "worst_difference": worst,
            "results": self.results,
        })
        summary["checks"] = [c.as_dict() for c in self.checks]
        self.summary = summary
        self.finished = True
        return summary

    def table(self) -> List[tuple]:
        if not self.summary:
            return []
        rows = [
            ("example", self.example),
            ("modes", self.n_modes),
            ("trials passed", f"{self.summary['passed']}/{self.trials}"),
            ("worst |index - N|", f"{self.summary['worst_difference']:.2e}"),
        ]
        if self.trials == 1:
            r = self.results[0]
            rows.insert(2, ("index(P1, P2)", r["index_eig"]))
            rows.insert(3, ("many-body index", f"{r['many_body_index']:.10f}"))
        return rows
