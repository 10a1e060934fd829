"""
cli.py - Command-line front end for the rotating Kepler toolkit

This module parses the command line and an optional key=value config file into
a RunConfig and dispatches to one of five modes: toric profiles, the resonance
catalogue, the resonance trees, the verification suite and trajectory export.
"""

import argparse
import configparser
import contextlib
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import dynamics
import export
import orbit_catalogue
import resonance_tree
import toric_domain
from phase_space import DomainError, NumericFailure, PhasePoint, Trajectory
from root_solver import CRITICAL_ENERGY, CornerKind, RootSolver
from verification import GROUPS, VerificationSuite

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SUBCOMMANDS = ('profile', 'orbits', 'tree', 'verify', 'flow')
FORMATS = ('csv', 'svg', 'text')


@dataclass
class RunConfig:
    """Everything a run needs; defaults, then the config file, then flags."""
    subcommand: str = 'verify'
    energy: Optional[float] = None
    depth: int = 4
    samples: int = 201
    seed: int = 42
    tolerances: dict = dataclasses.field(default_factory=dict)
    output: Optional[str] = None
    format: str = 'csv'
    workers: int = 1
    only: list = dataclasses.field(default_factory=list)
    max_sum: Optional[int] = None
    t_max: Optional[float] = None
    field: str = 'H'
    q: Optional[tuple] = None
    p: Optional[tuple] = None
    T: Optional[float] = None
    dt: Optional[float] = None
    orbit: Optional[tuple] = None
    rotating: bool = False
    eccentricity: float = 0.3

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise DomainError(f"Unknown subcommand {self.subcommand!r}")
        if self.format not in FORMATS:
            raise DomainError(f"Unknown format {self.format!r}")
        if self.samples < 2:
            raise DomainError("samples must be at least 2")
        if self.depth < 0:
            raise DomainError("depth must be non-negative")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")


# Value parsers shared by flags and the config file

def parse_pair(text, kind=float):
    parts = [s.strip() for s in str(text).split(',')]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    try:
        return tuple(kind(s) for s in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_label(text):
    return parse_pair(text, int)


def parse_tolerance(text):
    name, sep, value = str(text).partition('=')
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {name!r} is not a number") from None


def _parse_bool(text):
    value = str(text).strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


CONFIG_TYPES = {
    'energy': float, 'depth': int, 'samples': int, 'seed': int, 'output': str,
    'format': str, 'workers': int, 'max_sum': int, 't_max': float, 'field': str,
    'q': parse_pair, 'p': parse_pair, 'T': float, 'dt': float, 'orbit': parse_label,
    'rotating': _parse_bool, 'eccentricity': float,
}


def load_config_file(path):
    """
    Read key=value lines (with '#' comments) into RunConfig fields.

    'tol' takes comma-separated name=value pairs and 'only' comma-separated groups.

    Args:
        path (str): Config file

    Returns:
        dict: Field values
    """
    text = Path(path).read_text()
    parser = configparser.ConfigParser(delimiters=('=',), comment_prefixes=('#',),
                                       inline_comment_prefixes=('#',))
    parser.optionxform = str
    parser.read_string('[run]\n' + text)
    values = {}
    for key, raw in parser['run'].items():
        key = key.strip().replace('-', '_')
        if key == 'tol':
            values['tolerances'] = dict(parse_tolerance(item) for item in raw.split(',') if item.strip())
        elif key == 'only':
            values['only'] = [g.strip() for g in raw.split(',') if g.strip()]
        elif key in CONFIG_TYPES:
            try:
                values[key] = CONFIG_TYPES[key](raw.strip())
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise DomainError(f"Bad value for {key!r} in {path}: {exc}") from None
        else:
            raise DomainError(f"Unknown config key {key!r} in {path}")
    return values


def build_parser():
    """
    Build the argument parser.

    Flags default to None so that unset flags do not override the config file.

    Returns:
        argparse.ArgumentParser: The parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value config file')
    common.add_argument('--output', help='output path (default: stdout)')
    common.add_argument('--format', choices=FORMATS)
    common.add_argument('--seed', type=int)
    noise = common.add_mutually_exclusive_group()
    noise.add_argument('--verbose', action='store_true', help='debug logging')
    noise.add_argument('--quiet', action='store_true', help='warnings and errors only')

    parser = argparse.ArgumentParser(
        prog='rkp', description='Rotating Kepler problem: regularization, toric domains and resonances')
    sub = parser.add_subparsers(dest='subcommand', required=True)

    prof = sub.add_parser('profile', parents=[common], help='moment image of K~ <= c')
    prof.add_argument('--energy', type=float, required=True)
    prof.add_argument('--samples', type=int)
    prof.add_argument('--t-max', dest='t_max', type=float)

    orbits = sub.add_parser('orbits', parents=[common], help='resonance catalogue')
    orbits.add_argument('--max-sum', dest='max_sum', type=int)
    orbits.add_argument('--energy', type=float)
    orbits.add_argument('--depth', type=int)

    tree = sub.add_parser('tree', parents=[common], help='Stern-Brocot and slope trees')
    tree.add_argument('--depth', type=int)

    verify = sub.add_parser('verify', parents=[common], help='run the verification suite')
    verify.add_argument('--tol', action='append', type=parse_tolerance, default=None,
                        metavar='NAME=VALUE')
    verify.add_argument('--only', action='append', choices=GROUPS, default=None)
    verify.add_argument('--workers', type=int)

    flow = sub.add_parser('flow', parents=[common], help='export a trajectory')
    flow.add_argument('--field', choices=('H', 'K'))
    flow.add_argument('--q', type=parse_pair)
    flow.add_argument('--p', type=parse_pair)
    flow.add_argument('--T', type=float)
    flow.add_argument('--dt', type=float)
    flow.add_argument('--orbit', type=parse_label, metavar='K,L')
    flow.add_argument('--rotating', action='store_true', default=None)
    flow.add_argument('--eccentricity', type=float)
    flow.add_argument('--samples', type=int)
    return parser


def make_config(args):
    """Merge defaults, the config file and the parsed flags into a RunConfig."""
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    for f in dataclasses.fields(RunConfig):
        flag = 'tol' if f.name == 'tolerances' else f.name
        value = getattr(args, flag, None)
        if value is None:
            continue
        if f.name == 'tolerances':
            value = {**values.get('tolerances', {}), **dict(value)}
        values[f.name] = value
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


@contextlib.contextmanager
def _open_output(cfg, suffix=None):
    if cfg.output is None:
        yield sys.stdout
        return
    path = Path(cfg.output)
    if suffix is not None:
        path = path.with_suffix(suffix)
    with path.open('w', newline='') as out:
        yield out
    logger.info("Wrote %s", path)


# Modes

def run_profile(cfg):
    """Profiles of K~ <= c: bounded and unbounded below -3/2, connected above."""
    if cfg.energy is None:
        raise DomainError("profile needs --energy")
    if cfg.format == 'text':
        raise DomainError("profile writes csv or svg")
    c = cfg.energy
    if c <= CRITICAL_ENERGY:
        cs = toric_domain.corners(c)
        t_max = cfg.t_max if cfg.t_max is not None else max(2.0, 2.0 * cs.b_u)
        profiles = [toric_domain.profile(c, cfg.samples),
                    toric_domain.unbounded_profile(c, t_max, cfg.samples)]
        logger.info("c=%g: corners a=%.12g b=%.12g b_u=%.12g", c, cs.a, cs.b, cs.b_u)
    else:
        a = RootSolver().solve_corner(c, CornerKind.DIAGONAL)
        t_max = cfg.t_max if cfg.t_max is not None else max(2.0, 2.0 * a)
        profiles = [toric_domain.connected_profile(c, t_max, cfg.samples)]
        logger.info("c=%g is above the critical energy: one connected region, no direct orbit", c)

    if cfg.format == 'svg':
        if cfg.output is None:
            cfg.output = f"profile_c{c:g}.svg"
        export.render_profile_svg(profiles, cfg.output)
        with _open_output(cfg, suffix='.csv') as out:
            export.write_profile_csv(profiles, out)
    else:
        with _open_output(cfg) as out:
            export.write_profile_csv(profiles, out)
    return EXIT_OK


def run_orbits(cfg):
    max_sum = cfg.max_sum if cfg.max_sum is not None else cfg.depth
    rows = orbit_catalogue.catalogue(max_sum)
    if cfg.energy is not None:
        inside = orbit_catalogue.tori_in_window(cfg.energy, max_sum)
        logger.info("Tori at c=%g: %s", cfg.energy, ', '.join(str(lab) for lab in inside) or 'none')
    with _open_output(cfg) as out:
        export.write_catalogue_csv(rows, out, energy=cfg.energy)
    return EXIT_OK


def run_tree(cfg):
    if cfg.depth > resonance_tree.MAX_DEPTH:
        raise DomainError(f"depth {cfg.depth} exceeds the maximum {resonance_tree.MAX_DEPTH}")
    with _open_output(cfg) as out:
        if cfg.format == 'text':
            out.write(resonance_tree.format_tree(cfg.depth))
        elif cfg.format == 'csv':
            export.write_tree_csv(resonance_tree.tree_rows(cfg.depth), out)
        else:
            raise DomainError("tree writes text or csv")
    return EXIT_OK


def run_verify(cfg):
    """Run the suite; exit 1 if any check fails."""
    suite = VerificationSuite(seed=cfg.seed, tolerances=cfg.tolerances, only=cfg.only,
                              workers=cfg.workers)
    results = suite.run()
    with _open_output(cfg) as out:
        export.write_report_csv(results, out)
    summary = suite.get_results()
    logger.info("%d checks, %d passed, %d failed", summary['checks_run'], summary['passed'],
                summary['failed'])
    return EXIT_OK if suite.all_passed else EXIT_FAILED


def run_flow(cfg):
    """Trajectory CSV from an initial condition or a second-kind orbit."""
    if cfg.orbit is not None:
        label = orbit_catalogue.ResonanceLabel(*cfg.orbit)
        result = orbit_catalogue.second_kind_orbit(label, e=cfg.eccentricity,
                                                   n_samples=cfg.samples - 1)
        traj = result.trajectory
        if not cfg.rotating:
            traj = Trajectory(traj.times, [dynamics.kepler_state(result.orbit, t) for t in traj.times])
        comments = [f"orbit {label} e={cfg.eccentricity:g} frame={'rotating' if cfg.rotating else 'inertial'}",
                    f"symmetry_residual={export.fmt(result.symmetry_residual)}"]
    else:
        if cfg.q is None or cfg.p is None or cfg.T is None:
            raise DomainError("flow needs --q, --p and --T, or --orbit")
        field_ = dynamics.Field(cfg.field)
        traj = dynamics.flow(field_, PhasePoint(cfg.q, cfg.p), cfg.T, cfg.dt)
        comments = [f"field X_{cfg.field}"]
    with _open_output(cfg) as out:
        export.write_trajectory_csv(traj, out, comments)
    return EXIT_OK


MODES = {
    'profile': run_profile,
    'orbits': run_orbits,
    'tree': run_tree,
    'verify': run_verify,
    'flow': run_flow,
}


def setup_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)
    # matplotlib's font manager is chatty at DEBUG
    logging.getLogger('matplotlib').setLevel(max(level, logging.WARNING))


def run_cli(argv=None):
    """
    Parse argv, run one mode and return the exit code.

    Args:
        argv (list): Arguments without the program name; sys.argv[1:] when None

    Returns:
        int: 0 on success, 1 on a failed verification, 2 on usage or domain errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    setup_logging(verbose=args.verbose, quiet=args.quiet)

    try:
        cfg = make_config(args)
        return MODES[cfg.subcommand](cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        logger.error("Numerical failure: %s", exc)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
