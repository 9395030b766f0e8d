import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from core.base_lab import BaseLab
from core.errors import ConfigError, NotCommensurate, TooManyModes
from core.settings import NumericalSettings
from labs.flux_lattice.chern import chern_number
from labs.flux_lattice.flux import CONVENTIONS, build_sweep, fermi_projection, flux_window, laughlin_summability
from labs.flux_lattice.lattice import FLUX_POINT, PRESETS, LatticeModel, Patch, build_model
from labs.flux_lattice.spectral_flow import spectral_flow
from labs.flux_lattice.transport import quasi_adiabatic_evolve, singular_value_decay
from labs.fock_car.car import build_car, estimate_generator_bytes
from labs.fock_car.implementers import stacked_intertwiner
from labs.fock_car.index import stacked_index
from labs.fock_car.modes import ModeSpace
from labs.projection_index.index import index_eig

logger = logging.getLogger(__name__)

STACKED_MODE_CAP = 18


def make_model(preset: str, size: Union[int, Sequence[int]], alpha: float = 1.0 / 3.0,
               mu: Optional[float] = None, energies: Optional[Sequence[float]] = None,
               hoppings: Optional[list] = None, n_internal: int = 1,
               decay: Optional[Sequence[float]] = None) -> LatticeModel:
    """Model from flat run parameters, as read from the command line or a config file."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    if np.ndim(size) == 0:
        patch = Patch.centered(int(size))
    elif len(size) == 4:
        patch = Patch(*(int(v) for v in size))
    else:
        patch = Patch.centered(int(size[0]), int(size[1]))
    params: Dict = {}
    if mu is not None:
        params["mu"] = mu
    if decay is not None:
        params["decay"] = tuple(decay)
    if preset == "hofstadter":
        params["alpha"] = alpha
    elif preset == "atomic" and energies is not None:
        params["energies"] = tuple(energies)
    elif preset == "custom":
        params.update({"hoppings": hoppings or [], "n_internal": n_internal})
    return build_model(preset, patch, params)


class FluxSweepController(BaseLab):
    """Flux insertion on a patch: spectral flow, quasi-adiabatic transport, charge deficiency, index."""

    name = "flux-sweep"

    def __init__(self, preset: str = "hofstadter", size: Union[int, Sequence[int]] = 30,
                 alpha: float = 1.0 / 3.0, mu: Optional[float] = None,
                 energies: Optional[Sequence[float]] = None, hoppings: Optional[list] = None,
                 n_internal: int = 1, grid: int = 64, ode_steps: int = 64,
                 window_radius: Optional[float] = None, convention: str = "half_line",
                 chern: bool = True, chern_grid: int = 24, flux_excess_tol: float = 1e-3,
                 flow_tol: float = 0.05, settings: Optional[NumericalSettings] = None,
                 seed: Optional[int] = 0, progress: bool = False):
        """
        Initialize the flux-sweep run.

        Args:
            preset: 'atomic', 'hofstadter' or 'custom'
            size: patch side, (width, height) centered on the origin, or explicit bounds
            alpha: flux per plaquette of the hofstadter preset
            mu: Fermi level; defaults to the preset's gap value
            grid: flux values in the spectral sweep
            ode_steps: initial step count of the quasi-adiabatic integrator
            window_radius: radius of the disk around the flux plaquette used to localize counts
            convention: flux phase convention
            chern: also compute the Chern number of the occupied bands
            flux_excess_tol: +-1 eigenvalue tolerance of the windowed index
            flow_tol: allowed |charge deficiency - net flow|
        """
        super().__init__(settings=settings, seed=seed)
        if convention not in CONVENTIONS:
            raise ConfigError(f"unknown flux convention {convention!r}")
        if grid < 2 or ode_steps < 1:
            raise ConfigError("grid needs two points and ode_steps at least one step")
        self.preset = preset
        self.size = size
        self.alpha = alpha
        self.mu = mu
        self.energies = energies
        self.hoppings = hoppings
        self.n_internal = n_internal
        self.grid = grid
        self.ode_steps = ode_steps
        self.window_radius = window_radius
        self.convention = convention
        self.with_chern = chern
        self.chern_grid = chern_grid
        self.flux_excess_tol = flux_excess_tol
        self.flow_tol = flow_tol
        self.progress = progress
        self.model: Optional[LatticeModel] = None
        self.sweep = None
        self.summary: Dict = {}

    def run(self) -> Dict:
        self.reset()
        s = self.settings
        model = self.model = make_model(self.preset, self.size, self.alpha, self.mu, self.energies,
                                        self.hoppings, self.n_internal)
        mu = model.mu
        P_mu = fermi_projection(model.hamiltonian(), mu, s.gap_tol)
        window = flux_window(model, self.window_radius)
        radius = self.window_radius or 0.5 * model.patch.boundary_distance(FLUX_POINT)

        self.sweep = build_sweep(model, self.grid, mu, self.convention, s, self.progress)
        flow = spectral_flow(self.sweep, window, s)
        backward = spectral_flow(self.sweep.reversed(), window, s)

        qa = quasi_adiabatic_evolve(model, self.ode_steps, window, s, P=P_mu)
        index = index_eig(qa.projection, P_mu, tol=self.flux_excess_tol, window=window)
        decay = singular_value_decay(qa.projection, P_mu)

        chern = None
        if self.with_chern:
            try:
                chern = chern_number(model, f"below:{mu}", self.chern_grid, s.gap_tol)
            except NotCommensurate as exc:
                logger.warning("skipping Chern number: %s", exc)

        self.check("deficiency_matches_flow", qa.deficiency, flow.net_flow, self.flow_tol)
        self.check("index_matches_flow", index, flow.net_flow, 0.5)
        self.check("reversed_flow_negated", flow.net_flow + backward.net_flow, 0.0, 0.5)
        self.check("ode_converged", qa.deficiency_change, 0.0, s.deficiency_tol)
        self.check("trace_class_decay", float(decay > 0), 1.0, 0.5)
        if chern is not None:
            self.check("chern_magnitude", abs(chern.value), abs(flow.net_flow), 0.5)

        summary = self.base_summary()
        summary.update({
            "model": {
                "preset": model.name,
                "params": model.params,
                "patch": list(model.patch.bounds),
                "dim": model.dim,
                "mu": mu,
                "decay": model.decay.as_dict() if model.decay else None,
            },
            "convention": self.convention,
            "grid": self.grid,
            "window": {"radius": radius, "orbitals": int(window.sum()),
                       "origin_offset": list(model.patch.origin_offset())},
            "occupied": P_mu.rank,
            "spectral_flow": flow.as_dict(),
            "reversed_net_flow": backward.net_flow,
            "quasi_adiabatic": qa.as_dict(),
            "charge_deficiency": qa.deficiency,
            "index": index,
            "singular_value_decay": None if np.isinf(decay) else decay,
            "laughlin": laughlin_summability(P_mu, model).as_dict(),
            "chern": chern.as_dict() if chern else None,
            "sign_relation": flow.net_flow * chern.value if chern else None,
            "flux_excess_tol": self.flux_excess_tol,
        })
        summary["checks"] = [c.as_dict() for c in self.checks]
        self.summary = summary
        self.finished = True
        return summary

    def spectra_rows(self) -> List[tuple]:
        """(phi, spectral index, eigenvalue) for the levels tracked around mu."""
        if self.sweep is None:
            return []
        rows = []
        sweep = self.sweep
        for phi, lo, energies in zip(sweep.grid, sweep.tracked_offsets, sweep.tracked_energies):
            rows.extend((float(phi), lo + b, float(e)) for b, e in enumerate(energies))
        return rows

    def table(self) -> List[tuple]:
        if not self.summary:
            return []
        flow = self.summary["spectral_flow"]
        rows = [
            ("model", f"{self.summary['model']['preset']} dim {self.summary['model']['dim']}"),
            ("Fermi level", self.summary["model"]["mu"]),
            ("net / total flow", f"{flow['net_flow']} / {flow['total_flow']}"),
            ("charge deficiency", f"{self.summary['charge_deficiency']:.6f}"),
            ("index(P_qa, P_mu)", self.summary["index"]),
            ("ODE steps", self.summary["quasi_adiabatic"]["n_steps"]),
        ]
        if self.summary["chern"] is not None:
            rows.append(("Chern number", self.summary["chern"]["value"]))
        return rows


class ChernController(BaseLab):
    """Chern numbers of the Bloch bands of a translation-invariant preset."""

    name = "chern"

    def __init__(self, preset: str = "hofstadter", alpha: float = 1.0 / 3.0, size: int = 30,
                 bands: Union[Sequence[int], str, None] = None, grid: int = 24,
                 mu: Optional[float] = None, energies: Optional[Sequence[float]] = None,
                 settings: Optional[NumericalSettings] = None, seed: Optional[int] = 0):
        super().__init__(settings=settings, seed=seed)
        self.preset = preset
        self.alpha = alpha
        self.size = size
        self.bands = bands
        self.grid = grid
        self.mu = mu
        self.energies = energies
        self.summary: Dict = {}

    def run(self) -> Dict:
        self.reset()
        s = self.settings
        model = make_model(self.preset, self.size, self.alpha, self.mu, self.energies)
        selector = self.bands if self.bands is not None else f"below:{model.mu}"
        coarse = chern_number(model, selector, self.grid, s.gap_tol)
        fine = chern_number(model, selector, 2 * self.grid, s.gap_tol)
        self.check("grid_doubling_stable", fine.value, coarse.value, 0.5)
        self.check("integrality", coarse.raw, coarse.value, 1e-6)

        n_bands = model.bloch_hamiltonian((0.0, 0.0)).shape[0]
        per_band = [chern_number(model, [b], self.grid, s.gap_tol).value for b in range(n_bands)]
        self.check("all_bands_sum", sum(per_band), 0.0, 0.5)

        summary = self.base_summary()
        summary.update({
            "model": {"preset": model.name, "params": model.params, "mu": model.mu,
                      "magnetic_cell": list(model.magnetic_cell)},
            "selector": selector if isinstance(selector, str) else list(selector),
            "chern": coarse.as_dict(),
            "chern_doubled_grid": fine.as_dict(),
            "per_band": per_band,
        })
        summary["checks"] = [c.as_dict() for c in self.checks]
        self.summary = summary
        self.finished = True
        return summary

    def table(self) -> List[tuple]:
        if not self.summary:
            return []
        return [
            ("model", self.summary["model"]["preset"]),
            ("bands", self.summary["chern"]["bands"]),
            ("Chern number", self.summary["chern"]["value"]),
            ("raw sum", f"{self.summary['chern']['raw']:.8f}"),
            ("per band", self.summary["per_band"]),
        ]


class StackedIndexController(BaseLab):
    """Index of P against its quasi-adiabatic image, single-particle and in the doubled Fock space."""

    name = "stacked-index"

    def __init__(self, preset: str = "hofstadter", size: int = 3, alpha: float = 1.0 / 3.0,
                 mu: Optional[float] = None, energies: Optional[Sequence[float]] = None,
                 ode_steps: int = 64, equality_tol: float = 1e-7,
                 settings: Optional[NumericalSettings] = None, seed: Optional[int] = 0):
        super().__init__(settings=settings, seed=seed)
        self.preset = preset
        self.size = size
        self.alpha = alpha
        self.mu = mu
        self.energies = energies
        self.ode_steps = ode_steps
        self.equality_tol = equality_tol
        self.summary: Dict = {}

    def run(self) -> Dict:
        self.reset()
        model = make_model(self.preset, self.size, self.alpha, self.mu, self.energies)
        # the doubled space needs twice the one-particle modes
        s = self.settings.with_overrides(max_modes=max(self.settings.max_modes, STACKED_MODE_CAP))
        if 2 * model.dim > s.max_modes:
            raise TooManyModes(2 * model.dim, s.max_modes, estimate_generator_bytes(2 * model.dim))
        P = fermi_projection(model.hamiltonian(), model.mu, s.gap_tol)
        qa = quasi_adiabatic_evolve(model, self.ode_steps, None, s, P=P)
        single = index_eig(P, qa.projection, tol=s.excess_tol)

        modes = ModeSpace.patch(model.patch.sites(), model.n_internal).doubled()
        car = build_car(modes, max_modes=s.max_modes)
        u_hat = stacked_intertwiner(P, qa.projection, car, s)
        many = stacked_index(P, u_hat, car, s)
        self.check("stacked_equals_single", many, single, self.equality_tol)

        summary = self.base_summary()
        summary.update({
            "model": {"preset": model.name, "params": model.params, "mu": model.mu,
                      "patch": list(model.patch.bounds)},
            "modes": car.n_modes,
            "fock_dim": car.fock_dim,
            "index_eig": single,
            "stacked_index": many,
            "difference": abs(many - single),
            "quasi_adiabatic": qa.as_dict(),
        })
        summary["checks"] = [c.as_dict() for c in self.checks]
        self.summary = summary
        self.finished = True
        return summary

    def table(self) -> List[tuple]:
        if not self.summary:
            return []
        return [
            ("model", self.summary["model"]["preset"]),
            ("Fock modes", self.summary["modes"]),
            ("index(P, P_qa)", self.summary["index_eig"]),
            ("stacked index", f"{self.summary['stacked_index']:.10f}"),
            ("difference", f"{self.summary['difference']:.2e}"),
        ]
