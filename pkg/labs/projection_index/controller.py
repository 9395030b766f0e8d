import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from core.base_lab import BaseLab
from core.errors import ConfigError
from core.matrix_kernel import singular_values
from core.settings import NumericalSettings
from labs.projection_index.examples import (
    ProjectionPair,
    dimer_pair,
    dimer_summability,
    load_projection,
    planted_pair,
    random_pair,
    shift_pair,
)
from labs.projection_index.index import index_report
from labs.projection_index.wold import wold_decompose

logger = logging.getLogger(__name__)

EXAMPLES = ("shift", "dimer", "random", "planted")


def _random_trial(seed: np.random.SeedSequence, dim_range, p_primes, excess_tol, agreement_tol) -> Dict:
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(dim_range[0], dim_range[1] + 1))
    pair = random_pair(dim, rng)
    report = index_report(pair.P, pair.Q, p_primes, tol=excess_tol, agreement_tol=agreement_tol)
    return {
        "dim": dim,
        "expected": pair.expected_index,
        "report": report.as_dict(),
    }


class IndexPairController(BaseLab):
    """Index of one projection pair (or a batch of random pairs) by all formulas."""

    name = "index-pair"

    def __init__(self, example: str = "shift", sites: int = 41, beta: float = 0.4,
                 n_dimers: int = 200, dim: int = 64, trials: int = 1,
                 dim_range: Sequence[int] = (8, 128), n_plus: int = 2, n_minus: int = 1,
                 p_path: Optional[str] = None, q_path: Optional[str] = None,
                 p_primes: Sequence[int] = (0, 1, 2),
                 settings: Optional[NumericalSettings] = None, seed: Optional[int] = 0,
                 progress: bool = False):
        """
        Initialize the index-pair run.

        Args:
            example: one of 'shift', 'dimer', 'random', 'planted' (ignored when files are given)
            sites: chain length for the shift example
            beta, n_dimers: dimer example parameters
            dim: dimension of random and planted pairs
            trials: number of random pairs; more than one runs a batch over dim_range
            p_path, q_path: matrix files for an explicit pair
            p_primes: odd powers 2p'+1 used by the trace formula
        """
        super().__init__(settings=settings, seed=seed)
        if (p_path is None) != (q_path is None):
            raise ConfigError("--p and --q must be given together")
        if p_path is None and example not in EXAMPLES:
            raise ConfigError(f"unknown example {example!r}; choose from {', '.join(EXAMPLES)}")
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        if not p_primes:
            raise ConfigError("at least one p' is required")
        self.example = example
        self.sites = sites
        self.beta = beta
        self.n_dimers = n_dimers
        self.dim = dim
        self.trials = trials
        self.dim_range = tuple(dim_range)
        self.n_plus = n_plus
        self.n_minus = n_minus
        self.p_path = p_path
        self.q_path = q_path
        self.p_primes = tuple(int(p) for p in p_primes)
        self.progress = progress
        self.pair: Optional[ProjectionPair] = None
        self.summary: Dict = {}

    def build_pair(self) -> ProjectionPair:
        tol = self.settings.projection_tol
        if self.p_path is not None:
            P = load_projection(self.p_path, tol)
            Q = load_projection(self.q_path, tol)
            return ProjectionPair(name="files", P=P, Q=Q, meta={"p": self.p_path, "q": self.q_path})
        rng = np.random.default_rng(self.seed)
        if self.example == "shift":
            return shift_pair(self.sites)
        if self.example == "dimer":
            return dimer_pair(self.n_dimers, self.beta)
        if self.example == "random":
            return random_pair(self.dim, rng)
        return planted_pair(self.dim, self.n_plus, self.n_minus, rng)

    def run(self) -> Dict:
        self.reset()
        if self.p_path is None and self.example == "random" and self.trials > 1:
            self.summary = self._run_batch()
        else:
            self.summary = self._run_single()
        self.finished = True
        return self.summary

    def _run_single(self) -> Dict:
        s = self.settings
        pair = self.pair = self.build_pair()
        report = index_report(pair.P, pair.Q, self.p_primes, tol=s.excess_tol, agreement_tol=s.agreement_tol)
        self.check("formula_agreement", report.agreement_residual, 0.0, s.agreement_tol)
        if pair.expected_index is not None:
            self.check("expected_index", report.value_eig, pair.expected_index, 0.5)

        wold = wold_decompose(pair.P, pair.Q, tol=s.excess_tol)
        self.check("wold_reconstruction", wold.reconstruction_residual, 0.0, s.projection_tol)
        self.check("wold_index", wold.index, report.value_eig, 0.5)

        summary = self.base_summary()
        summary.update({
            "example": pair.name,
            "meta": {k: v for k, v in pair.meta.items() if k != "positions"},
            "dim": pair.dim,
            "index": report.as_dict(),
            "wold": {
                "n_plus": wold.n_plus,
                "n_minus": wold.n_minus,
                "reconstruction_residual": wold.reconstruction_residual,
                "unitarity_residual": wold.unitarity_residual,
            },
        })
        if pair.name == "dimer":
            summary["dimer"] = self._dimer_checks(pair)
        summary["checks"] = [c.as_dict() for c in self.checks]
        return summary

    def _dimer_checks(self, pair: ProjectionPair) -> Dict:
        summ = dimer_summability(self.n_dimers, self.beta)
        sigma = np.sort(singular_values(pair.P.matrix - pair.Q.matrix))[::-1]
        expected = np.sort(np.repeat(summ.sigma, 2))[::-1]
        sv_residual = float(np.max(np.abs(sigma - expected)))
        self.check("dimer_singular_values", sv_residual, 0.0, 1e-10)
        self.check("dimer_relative_tail_p3", summ.relative_tail_p3, 0.0, 1e-3)
        out = summ.as_dict()
        out["singular_value_residual"] = sv_residual
        return out

    def _run_batch(self) -> Dict:
        s = self.settings
        seeds = np.random.SeedSequence(self.seed).spawn(self.trials)
        jobs = (delayed(_random_trial)(sq, self.dim_range, self.p_primes, s.excess_tol, s.agreement_tol)
                for sq in tqdm(seeds, desc="index-pair", disable=not self.progress))
        results: List[Dict] = Parallel(n_jobs=s.n_jobs)(jobs)
        worst = max(r["report"]["agreement_residual"] for r in results)
        mismatched = sum(1 for r in results if r["report"]["value_eig"] != r["expected"])
        self.check("batch_formula_agreement", worst, 0.0, s.agreement_tol)
        self.check("batch_expected_index_mismatches", mismatched, 0, 0.5)
        summary = self.base_summary()
        summary.update({
            "example": "random",
            "trials": self.trials,
            "dim_range": list(self.dim_range),
            "worst_agreement_residual": worst,
            "agreeing_trials": sum(1 for r in results if r["report"]["agrees"]),
            "results": results,
        })
        return summary

    def table(self) -> List[tuple]:
        if not self.summary:
            return []
        if "results" in self.summary:
            return [
                ("trials", self.summary["trials"]),
                ("agreeing", self.summary["agreeing_trials"]),
                ("worst residual", f"{self.summary['worst_agreement_residual']:.2e}"),
            ]
        idx = self.summary["index"]
        rows = [
            ("example", self.summary["example"]),
            ("dimension", self.summary["dim"]),
            ("index (eigenvalues)", idx["value_eig"]),
            ("index (trace power)", f"{idx['value_trace_power']:.12f}"),
            ("index (Arveson)", f"{idx['value_arveson']:.12f}"),
            ("agreement residual", f"{idx['agreement_residual']:.2e}"),
            ("n_plus / n_minus", f"{self.summary['wold']['n_plus']} / {self.summary['wold']['n_minus']}"),
        ]
        if "dimer" in self.summary:
            rows.append(("sum sigma^3 tail", f"{self.summary['dimer']['relative_tail_p3']:.2e}"))
        return rows
