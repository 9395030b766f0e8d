"""
Flux Lab - command-line launcher.
Runs one pipeline per subcommand and writes its summary.
"""
import argparse
import logging
import os
import sys
from dataclasses import replace

# Add project root to path
sys.path.insert(0, os.path.dirname(__file__))

from core.errors import EXIT_OK, ConfigError, LabError
from ui.report import print_report, write_csv, write_json
from ui.settings import RunConfig, load_config

logger = logging.getLogger("fluxlab")

def launch_index_pair(cfg: RunConfig, progress: bool):
    from labs.projection_index.controller import IndexPairController
    ip = cfg.index_pair
    return IndexPairController(
        example=ip.example, sites=ip.sites, beta=ip.beta, n_dimers=ip.n_dimers, dim=ip.dim,
        trials=ip.trials, n_plus=ip.n_plus, n_minus=ip.n_minus, p_path=ip.p, q_path=ip.q,
        settings=cfg.settings(), seed=cfg.seed, progress=progress,
    )


def launch_correspondence(cfg: RunConfig, progress: bool):
    from labs.fock_car.controller import CorrespondenceController
    c = cfg.correspondence
    return CorrespondenceController(example=c.example, n_modes=c.modes, trials=c.trials,
                                    settings=cfg.settings(), seed=cfg.seed, progress=progress)


def launch_flux_sweep(cfg: RunConfig, progress: bool, chern: bool = True):
    from labs.flux_lattice.controller import FluxSweepController
    return FluxSweepController(
        preset=cfg.preset, size=cfg.patch, alpha=cfg.alpha, mu=cfg.mu, energies=cfg.energies,
        hoppings=cfg.hoppings, n_internal=cfg.n_internal, grid=cfg.grid_size, ode_steps=cfg.ode_steps,
        window_radius=cfg.window_radius, convention=cfg.flux_convention, chern=chern,
        chern_grid=cfg.chern_grid, settings=cfg.settings(), seed=cfg.seed, progress=progress,
    )


def launch_chern(cfg: RunConfig, progress: bool):
    from labs.flux_lattice.controller import ChernController
    return ChernController(preset=cfg.preset, alpha=cfg.alpha, size=cfg.patch, bands=cfg.chern_bands,
                           grid=cfg.chern_grid, mu=cfg.mu, energies=cfg.energies,
                           settings=cfg.settings(), seed=cfg.seed)


def launch_stacked_index(cfg: RunConfig, progress: bool):
    from labs.flux_lattice.controller import StackedIndexController
    return StackedIndexController(preset=cfg.preset, size=cfg.patch, alpha=cfg.alpha, mu=cfg.mu,
                                  energies=cfg.energies, ode_steps=cfg.ode_steps,
                                  settings=cfg.settings(), seed=cfg.seed)


def parse_bands(raw):
    if raw is None or raw.startswith("below:"):
        return raw
    try:
        return [int(b) for b in raw.split(",") if b.strip()]
    except ValueError as exc:
        raise ConfigError(f"--bands must be a comma list of band indices or below:<mu>, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='JSON run configuration')
    common.add_argument('--seed', type=int, default=None, help='Random seed (default: 0)')
    common.add_argument('--tol', type=float, default=None,
                        help='Tolerance for detecting eigenvalues +-1 (default: 1e-7)')
    common.add_argument('--out', type=str, default=None, help='Directory for summary.json (and spectra.csv)')
    common.add_argument('--jobs', type=int, default=None, help='Worker processes (default: $FLUXLAB_THREADS or 1)')
    common.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    common.add_argument('-q', '--quiet', action='store_true', help='No progress bars or tables')

    parser = argparse.ArgumentParser(description='Flux Lab - indices of projections, quasi-free states and flux insertion')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('index-pair', parents=[common], help='Index of a pair of projections')
    p.add_argument('--example', choices=['shift', 'dimer', 'random', 'planted'], default=None)
    p.add_argument('--sites', type=int, default=None, help='Chain length of the shift example')
    p.add_argument('--beta', type=float, default=None, help='Dimer angle exponent')
    p.add_argument('--dimers', type=int, default=None, help='Number of dimers')
    p.add_argument('--dim', type=int, default=None, help='Dimension of random and planted pairs')
    p.add_argument('--trials', type=int, default=None, help='Random pairs in a batch')
    p.add_argument('--n-plus', type=int, default=None)
    p.add_argument('--n-minus', type=int, default=None)
    p.add_argument('--p', type=str, default=None, help='Matrix file (.npy or text) for P')
    p.add_argument('--q', type=str, default=None, help='Matrix file (.npy or text) for Q')

    p = sub.add_parser('correspondence', parents=[common], help='Single-particle vs many-body index')
    p.add_argument('--example', choices=['shift', 'random', 'equal'], default=None)
    p.add_argument('--modes', type=int, default=None, help='One-particle dimension')
    p.add_argument('--trials', type=int, default=None)

    for name, help_text in (('flux-sweep', 'Flux insertion pipeline'),
                            ('chern', 'Chern numbers of Bloch bands'),
                            ('stacked-index', 'Stacked many-body index on a small patch')):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument('--preset', choices=['atomic', 'hofstadter', 'custom'], default=None)
        p.add_argument('--alpha', type=float, default=None, help='Flux per plaquette (hofstadter)')
        p.add_argument('--size', type=int, default=None, help='Square patch side')
        p.add_argument('--mu', type=float, default=None, help='Fermi level')
        if name == 'flux-sweep':
            p.add_argument('--grid', type=int, default=None, help='Flux values in the sweep')
            p.add_argument('--ode-steps', type=int, default=None, help='Initial quasi-adiabatic step count')
            p.add_argument('--window-radius', type=float, default=None)
            p.add_argument('--convention', choices=['half_line', 'sign'], default=None)
            p.add_argument('--chern-grid', type=int, default=None)
            p.add_argument('--no-chern', action='store_true', help='Skip the Chern number')
        elif name == 'chern':
            p.add_argument('--bands', type=str, default=None, help="Band indices '0,1' or 'below:<mu>'")
            p.add_argument('--grid', type=int, default=None, help='k-points per direction')
        else:
            p.add_argument('--ode-steps', type=int, default=None)
    return parser


def resolve_config(args) -> RunConfig:
    """Config file values overridden by the flags that were given."""
    cfg = load_config(args.config)

    def get(name):
        return getattr(args, name, None)

    size = get('size')
    if args.command == 'stacked-index' and size is None and args.config is None:
        size = 3
    cfg = cfg.with_overrides(
        seed=args.seed, out=args.out, excess_tol=args.tol, n_jobs=args.jobs,
        preset=get('preset'), alpha=get('alpha'), mu=get('mu'),
        patch=[size, size] if size is not None else None,
        window_radius=get('window_radius'), flux_convention=get('convention'),
        ode_steps=get('ode_steps'),
    )
    if args.command == 'flux-sweep':
        cfg = cfg.with_overrides(grid_size=get('grid'), chern_grid=get('chern_grid'))
    elif args.command == 'chern':
        cfg = cfg.with_overrides(chern_grid=get('grid'), chern_bands=parse_bands(get('bands')))
    elif args.command == 'index-pair':
        fields = {'example': get('example'), 'sites': get('sites'), 'beta': get('beta'),
                  'n_dimers': get('dimers'), 'dim': get('dim'), 'trials': get('trials'),
                  'n_plus': get('n_plus'), 'n_minus': get('n_minus'), 'p': get('p'), 'q': get('q')}
        cfg = replace(cfg, index_pair=replace(cfg.index_pair, **{k: v for k, v in fields.items() if v is not None}))
    elif args.command == 'correspondence':
        fields = {'example': get('example'), 'modes': get('modes'), 'trials': get('trials')}
        cfg = replace(cfg, correspondence=replace(cfg.correspondence,
                                                  **{k: v for k, v in fields.items() if v is not None}))
    return cfg


def configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else (logging.ERROR if quiet else logging.WARNING)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def run_command(args) -> int:
    cfg = resolve_config(args)
    progress = not args.quiet
    if args.command == 'index-pair':
        controller = launch_index_pair(cfg, progress)
    elif args.command == 'correspondence':
        controller = launch_correspondence(cfg, progress)
    elif args.command == 'flux-sweep':
        controller = launch_flux_sweep(cfg, progress, chern=not args.no_chern)
    elif args.command == 'chern':
        controller = launch_chern(cfg, progress)
    else:
        controller = launch_stacked_index(cfg, progress)

    summary = controller.run()
    summary['config'] = cfg.as_dict()
    if not args.quiet:
        print_report(controller.name, controller.table(), summary['checks'])
    if cfg.out:
        path = write_json(os.path.join(cfg.out, 'summary.json'), summary)
        logger.info("wrote %s", path)
        if args.command == 'flux-sweep':
            write_csv(os.path.join(cfg.out, 'spectra.csv'), ('phi', 'branch', 'eigenvalue'),
                      controller.spectra_rows())
    controller.raise_on_failure()
    return EXIT_OK


def main(argv=None) -> int:
    """Main entry point - parses the subcommand and maps lab errors onto exit codes."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return run_command(args)
    except LabError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
