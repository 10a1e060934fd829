"""
verification.py - Verification suite for the rotating Kepler toolkit

This module runs the invariant checks of every module: conservation laws and the
Poisson table, the properties of the Ligon-Schaaf and Levi-Civita maps, the
special concave toric domain theorem, the resonance catalogue and the trees.
Each check draws its random samples from its own seed, derived from the run
seed, so results do not depend on which checks run or on how many workers
share them.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

import dynamics
import orbit_catalogue
import regularization
import resonance_tree
import symbolic_checks
import toric_domain
from phase_space import DomainError, OscPoint, PhasePoint
from root_solver import CRITICAL_ENERGY

logger = logging.getLogger(__name__)

GROUPS = ('dynamics', 'regularization', 'toric', 'catalogue', 'tree', 'symbolic')


@dataclass(frozen=True)
class Check:
    name: str
    group: str
    tolerance: float
    func: object


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    n_samples: int
    max_residual: float
    tolerance: float
    passed: bool


CHECKS = {}


def check(name, group, tolerance):
    """Register a check; the function takes an rng and returns (n_samples, max_residual)."""
    def register(func):
        CHECKS[name] = Check(name=name, group=group, tolerance=tolerance, func=func)
        return func
    return register


# Samplers

def random_p_minus(rng, e_max=0.7):
    """A point of P_minus on a bound ellipse with H in [-0.8, -0.3] and e <= e_max."""
    orbit = dynamics.kepler_ellipse(H=rng.uniform(-0.8, -0.3), e=rng.uniform(0.0, e_max),
                                    phase=rng.uniform(0.0, 2.0 * math.pi),
                                    omega=rng.uniform(0.0, 2.0 * math.pi),
                                    sense=int(rng.choice([1, -1])))
    return orbit.state(0.0)


def random_osc_point(rng, v_min=0.1, norm_sq_min=0.25, scale=1.5):
    """An OscPoint away from v = 0 and from the apex of the moment cone."""
    while True:
        u1, u2, v1, v2 = rng.uniform(-scale, scale, size=4)
        osc = OscPoint(complex(u1, u2), complex(v1, v2))
        if abs(osc.v) >= v_min and abs(osc.u) ** 2 + abs(osc.v) ** 2 >= norm_sq_min:
            return osc


def random_chart_point(rng, p_min=0.1):
    while True:
        q = rng.uniform(-2.0, 2.0, size=2)
        p = rng.uniform(-2.0, 2.0, size=2)
        if np.linalg.norm(p) >= p_min:
            return PhasePoint(q, p)


# Core dynamics

@check('critical_potential', 'dynamics', 1e-12)
def _critical_potential(rng):
    worst = 0.0
    for theta in rng.uniform(0.0, 2.0 * math.pi, size=100):
        pt = dynamics.critical_point(theta)
        bundle = dynamics.energies(pt)
        worst = max(worst, abs(bundle.U - CRITICAL_ENERGY), abs(bundle.K - CRITICAL_ENERGY),
                    float(np.linalg.norm(dynamics.effective_potential_gradient(pt.q))))
    return 100, worst


@check('energy_conservation', 'dynamics', 1e-9)
def _energy_conservation(rng):
    orbit = dynamics.kepler_ellipse(-0.5, rng.uniform(0.1, 0.5), phase=rng.uniform(0.0, 2.0 * math.pi))
    start = orbit.state(0.0)
    drift = 0.0
    for field, observable in ((dynamics.Field.H, 'H'), (dynamics.Field.K, 'K')):
        traj = dynamics.flow(field, start, 10.0 * orbit.period)
        values = [getattr(dynamics.energies(s), observable) for s in traj.states]
        drift = max(drift, max(abs(v - values[0]) for v in values))
    return 2, drift


@check('circular_closure', 'dynamics', 1e-9)
def _circular_closure(rng):
    start = PhasePoint([1.0, 0.0], [0.0, 1.0])
    traj = dynamics.flow(dynamics.Field.H, start, 2.0 * math.pi)
    equilibrium = dynamics.flow(dynamics.Field.K, PhasePoint([1.0, 0.0], [0.0, -1.0]), 5.0, dt=0.01)
    drift = max(float(np.max(np.abs(s.as_array() - equilibrium.start.as_array())))
                for s in equilibrium.states)
    return 2, max(float(np.max(np.abs(traj.end.as_array() - start.as_array()))), drift)


@check('poisson_table', 'dynamics', 1e-6)
def _poisson_table(rng):
    O = dynamics.Observable
    worst = 0.0
    for _ in range(200):
        pt = random_p_minus(rng)
        s = pt.as_array()
        H, L = O.H(s), O.L(s)
        pb = dynamics.poisson_bracket
        worst = max(worst,
                    abs(pb(O.H, O.L, pt)),
                    abs(pb(O.A1, O.L, pt) + O.A2(s)),
                    abs(pb(O.A2, O.L, pt) - O.A1(s)),
                    abs(pb(O.A1, O.A2, pt) + 2.0 * H * L),
                    abs(pb(O.ETA1, O.L, pt) + O.ETA2(s)),
                    abs(pb(O.ETA2, O.L, pt) - O.ETA1(s)),
                    abs(pb(O.ETA1, O.ETA2, pt) - L))
    return 200, worst


@check('runge_lenz_identity', 'dynamics', 1e-12)
def _runge_lenz_identity(rng):
    worst = 0.0
    for _ in range(1000):
        rl = dynamics.runge_lenz(random_p_minus(rng))
        worst = max(worst, abs(rl.norm_sq_residual))
    return 1000, worst


# Regularization

@check('ls_sphere', 'regularization', 1e-10)
def _ls_sphere(rng):
    worst = 0.0
    for _ in range(1000):
        pt = random_p_minus(rng)
        sp = regularization.ligon_schaaf(pt)
        norm_res, dot_res = sp.constraint_residuals()
        worst = max(worst, abs(norm_res), abs(dot_res),
                    abs(regularization.delaunay_energy(sp) - dynamics.energies(pt).H),
                    regularization.ls_frame(pt).orthonormality_residual())
    return 1000, worst


@check('symplectic', 'regularization', 1e-6)
def _symplectic(rng):
    worst = 0.0
    for _ in range(1000):
        pt = random_p_minus(rng)
        worst = max(worst, regularization.symplectic_residual(regularization.MapKind.LIGON_SCHAAF, pt))
    return 1000, worst


@check('stereo_symplectic', 'regularization', 1e-6)
def _stereo_symplectic(rng):
    worst = 0.0
    for _ in range(100):
        worst = max(worst, regularization.symplectic_residual(regularization.MapKind.STEREO_LIFT,
                                                              random_chart_point(rng)))
        worst = max(worst, regularization.symplectic_residual(regularization.MapKind.LEVI_CIVITA,
                                                              random_osc_point(rng, v_min=0.5)))
    return 200, worst


@check('conjugacy', 'regularization', 1e-5)
def _conjugacy(rng):
    worst = 0.0
    for _ in range(10):
        worst = max(worst, regularization.conjugacy_residual(random_p_minus(rng, e_max=0.5), 1.0))
    return 10, worst


@check('momentum', 'regularization', 1e-9)
def _momentum(rng):
    worst = 0.0
    for _ in range(1000):
        pt = random_p_minus(rng)
        plane = regularization.so3_moments(pt)
        sphere = regularization.sphere_moments_in_plane_frame(regularization.ligon_schaaf(pt))
        worst = max(worst, float(np.max(np.abs(plane - sphere))))
    return 1000, worst


@check('ls_inverse', 'regularization', 1e-9)
def _ls_inverse(rng):
    worst = 0.0
    for _ in range(100):
        pt = random_p_minus(rng)
        back = regularization.ligon_schaaf_inverse(regularization.ligon_schaaf(pt))
        worst = max(worst, float(np.max(np.abs(back.as_array() - pt.as_array()))))
    return 100, worst


@check('stereo_roundtrip', 'regularization', 1e-12)
def _stereo_roundtrip(rng):
    worst = 0.0
    for _ in range(1000):
        pt = random_chart_point(rng)
        back = regularization.stereo_drop(regularization.stereo_lift(pt))
        worst = max(worst, float(np.max(np.abs(back.as_array() - pt.as_array()))))
    return 1000, worst


@check('lc_double_cover', 'regularization', 0.0)
def _lc_double_cover(rng):
    mismatches = 0
    for _ in range(1000):
        osc = random_osc_point(rng)
        if not np.array_equal(regularization.levi_civita(osc).as_array(),
                              regularization.levi_civita(-osc).as_array()):
            mismatches += 1
    return 1000, float(mismatches)


@check('lc_roundtrip', 'regularization', 1e-12)
def _lc_roundtrip(rng):
    worst = 0.0
    for _ in range(1000):
        pt = random_chart_point(rng)
        for branch in (1, -1):
            back = regularization.levi_civita(regularization.lc_lift(pt, branch))
            worst = max(worst, float(np.max(np.abs(back.as_array() - pt.as_array()))))
    return 1000, worst


@check('pullback', 'regularization', 1e-10)
def _pullback(rng):
    worst = 0.0
    for _ in range(1000):
        osc = random_osc_point(rng)
        reduced = toric_domain.ktilde(toric_domain.moment_mu(osc))
        worst = max(worst, abs(reduced - regularization.chart_rkp_energy(regularization.levi_civita(osc))))
    return 1000, worst


@check('linear_S', 'regularization', 1e-14)
def _linear_s(rng):
    worst = regularization.symplectic_residual(regularization.MapKind.LINEAR_S, (0j, 0j))
    for _ in range(1000):
        z1 = complex(*rng.normal(size=2))
        z2 = complex(*rng.normal(size=2))
        osc = regularization.linear_S(z1, z2)
        norm_sq = abs(z1) ** 2 + abs(z2) ** 2
        worst = max(worst, abs(abs(osc.u) ** 2 + abs(osc.v) ** 2 - norm_sq) / max(1.0, norm_sq))
    return 1000, worst


@check('diagram', 'regularization', 1e-12)
def _diagram(rng):
    worst = 0.0
    for _ in range(1000):
        z1 = complex(*rng.normal(size=2))
        z2 = complex(*rng.normal(size=2))
        worst = max(worst, toric_domain.diagram_residual(z1, z2))
    return 1000, worst


# Toric domain

@check('corners_critical', 'toric', 1e-12)
def _corners_critical(rng):
    cs = toric_domain.corners(CRITICAL_ENERGY)
    singular = toric_domain.ktilde(toric_domain.MomentPair(0.5, -0.5))
    return 1, max(abs(cs.a - 0.25), abs(cs.b - 0.5), abs(cs.b_u - 0.5), abs(singular - CRITICAL_ENERGY))


@check('sctd', 'toric', 1e-9)
def _sctd(rng):
    worst = 0.0
    energies = (-1.5, -1.7, -2.0, -3.0)
    for c in energies:
        report = toric_domain.verify_special(toric_domain.profile(c, 201))
        violation = max(0.0, -report.convexity_min, report.slope_max + 1.0,
                        max(report.endpoint_residuals), -1.0 - report.f_slope_min,
                        report.f_slope_max)
        if c < CRITICAL_ENERGY and report.slope_max > -1.0 - 1e-6:
            # the maximal slope -1 is reached only at the critical energy
            violation = max(violation, 1.0)
        if not report.passed:
            violation = max(violation, 1.0)
        worst = max(worst, violation)
    return len(energies), worst


@check('corner_circular', 'toric', 1e-12)
def _corner_circular(rng):
    worst = 0.0
    n = 0
    for c in (-1.5, -2.0, -3.0):
        for orbit in toric_domain.corner_orbits(c):
            worst = max(worst, abs(orbit.circular_residual),
                        abs(dynamics.energies(orbit.state()).K - c))
            n += 1
    return n, worst


@check('component_gap', 'toric', 0.0)
def _component_gap(rng):
    scan = toric_domain.component_gap_scan(-1.7, 200)
    return scan.n_checked, float(scan.n_admissible)


@check('torus_points', 'toric', 1e-12)
def _torus_points(rng):
    worst = 0.0
    n = 0
    for c in rng.uniform(-1.58, -0.2, size=20):
        for label in orbit_catalogue.tori_in_window(c, 8):
            tp = toric_domain.torus_point(label.k, label.l, c)
            worst = max(worst, abs(toric_domain.ktilde(tp.mp) - c))
            if c < CRITICAL_ENERGY:
                cs = toric_domain.corners(c)
                if cs.b < tp.mp.mu1 < cs.b_u:
                    worst = max(worst, 1.0)
            n += 1
    return n, worst


@check('p_roots_critical', 'toric', 1e-9)
def _p_roots_critical(rng):
    roots = orbit_catalogue.p_roots(CRITICAL_ENERGY)
    if len(roots) != 3:
        return 1, 1.0
    return 1, float(np.max(np.abs(np.array(roots) - np.array([-2.0, -0.5, -0.5]))))


# Orbit catalogue

@check('resonance_catalogue', 'catalogue', 1e-12)
def _resonance_catalogue(rng):
    critical = orbit_catalogue.resonance_data(orbit_catalogue.ResonanceLabel(1, 1))
    worst = max(abs(critical.c_kl + 0.5), abs(critical.L_kl - 1.0),
                abs(critical.c_minus + 1.5), abs(critical.c_plus - 0.5))
    rows = orbit_catalogue.catalogue(20)
    for row in rows:
        k, l = row.label.k, row.label.l
        worst = max(worst,
                    abs(orbit_catalogue.period_of_energy(row.c_kl) * k - 2.0 * math.pi * l),
                    orbit_catalogue.window_residual(row),
                    abs(row.L_kl - math.sqrt(-1.0 / (2.0 * row.c_kl))),
                    max(abs(a - b) for a, b in zip(orbit_catalogue.window_from_p(row.c_kl),
                                                   (row.c_minus, row.c_plus))))
        expected = (orbit_catalogue.Classification.CRITICAL if k == l else
                    orbit_catalogue.Classification.INTERIOR if k > l else
                    orbit_catalogue.Classification.EXTERIOR)
        if row.classification != expected or (row.L_kl < 1.0) != (k > l):
            worst = max(worst, 1.0)
    return len(rows), worst


@check('p_nonnegative', 'catalogue', 1e-12)
def _p_nonnegative(rng):
    worst = 0.0
    for _ in range(1000):
        bundle = dynamics.energies(random_p_minus(rng))
        worst = max(worst, -orbit_catalogue.p_value(bundle.K, bundle.H))
    return 1000, worst


@check('second_kind_symmetry', 'catalogue', 1e-6)
def _second_kind_symmetry(rng):
    worst = 0.0
    n = 0
    for k, l in ((2, 1), (3, 2), (1, 2)):
        for e in (0.2, 0.3):
            orbit = orbit_catalogue.second_kind_orbit(orbit_catalogue.ResonanceLabel(k, l), e=e,
                                                      n_samples=10, phase=rng.uniform(0.0, 2.0 * math.pi))
            worst = max(worst, orbit.symmetry_residual)
            n += 1
    return n, worst


# Trees

def _fractions(texts):
    out = []
    for text in texts:
        num, den = text.split('/')
        out.append(resonance_tree.Fraction(int(num), int(den)))
    return tuple(out)


@check('tree_levels', 'tree', 0.0)
def _tree_levels(rng):
    sb = _fractions(['1/4', '2/5', '3/5', '3/4', '4/3', '5/3', '5/2', '4/1'])
    slopes = _fractions(['5/3', '7/3', '4/1', '7/1', '-7/1', '-4/1', '-7/3', '-5/3'])
    mismatches = int(resonance_tree.stern_brocot_level(3).nodes != sb)
    mismatches += int(resonance_tree.new_tree_level(3).nodes != slopes)
    for n in range(13):
        nodes = resonance_tree.stern_brocot_level(n).nodes
        mismatches += sum(1 for a, b in zip(nodes, nodes[1:]) if not a < b)
        mismatches += sum(1 for f in nodes if math.gcd(f.num, f.den) != 1)
        if n <= 10:
            mismatches += sum(1 for i, f in enumerate(nodes)
                              if resonance_tree.node_at(resonance_tree.TreePath.from_index(n, i)) != f)
    return 13, float(mismatches)


@check('slope_identity', 'tree', 0.0)
def _slope_identity(rng):
    failures = 0
    seen = set()
    n = 0
    for total in range(2, 51):
        for k in range(1, total):
            l = total - k
            if math.gcd(k, l) != 1:
                continue
            n += 1
            if resonance_tree.slope_cross_check(k, l) != 0:
                failures += 1
            if math.gcd(k + l, abs(l - k)) not in (1, 2):
                failures += 1
            node = resonance_tree.transform_node(k, l)
            if node in seen:
                failures += 1
            seen.add(node)
    return n, float(failures)


def _register_symbolic():
    for name in symbolic_checks.IDENTITIES:
        def run(rng, name=name):
            return 1, 0.0 if symbolic_checks.check_identity(name).passed else 1.0
        check(f'symbolic_{name}', 'symbolic', 0.0)(run)


_register_symbolic()


# Running

def _run_check(name, seed_seq, tolerance):
    entry = CHECKS[name]
    rng = np.random.default_rng(seed_seq)
    try:
        n_samples, residual = entry.func(rng)
    except (DomainError, RuntimeError) as exc:
        logger.error("Check %s raised %s: %s", name, type(exc).__name__, exc)
        n_samples, residual = 0, math.inf
    return CheckResult(name=name, group=entry.group, n_samples=n_samples,
                       max_residual=float(residual), tolerance=tolerance,
                       passed=bool(residual <= tolerance))


class VerificationSuite:
    """Runs the registered checks and collects their results."""

    def __init__(self, seed=42, tolerances=None, only=None, workers=1):
        """
        Initialize the suite.

        Args:
            seed (int): Run seed; each check gets its own derived seed
            tolerances (dict): Per-check tolerance overrides
            only (list): Restrict to these groups
            workers (int): Number of worker processes
        """
        tolerances = dict(tolerances or {})
        unknown = set(tolerances) - set(CHECKS)
        if unknown:
            raise DomainError(f"Unknown check(s) in tolerance overrides: {', '.join(sorted(unknown))}")
        groups = list(only) if only else list(GROUPS)
        bad_groups = set(groups) - set(GROUPS)
        if bad_groups:
            raise DomainError(f"Unknown group(s): {', '.join(sorted(bad_groups))}")
        if workers < 1:
            raise DomainError("workers must be at least 1")

        names = sorted(CHECKS)
        children = np.random.SeedSequence(seed).spawn(len(names))
        self.seeds = dict(zip(names, children))
        self.names = [name for name in names if CHECKS[name].group in groups]
        self.tolerances = {name: tolerances.get(name, CHECKS[name].tolerance) for name in self.names}
        self.workers = workers
        self.results = []

    def next_check(self):
        """
        Generator that runs the selected checks one at a time.

        Yields:
            CheckResult: The result of the next check
        """
        for name in self.names:
            result = _run_check(name, self.seeds[name], self.tolerances[name])
            self._record(result)
            yield result

    def run(self):
        """
        Run every selected check.

        Returns:
            list: CheckResult entries sorted by check name
        """
        self.results = []
        if self.workers == 1:
            for _ in self.next_check():
                pass
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(_run_check, name, self.seeds[name], self.tolerances[name])
                           for name in self.names]
                for future in futures:
                    self._record(future.result())
        self.results.sort(key=lambda r: r.name)
        return self.results

    def _record(self, result):
        self.results.append(result)
        if result.passed:
            logger.info("%-28s ok    max residual %.3g (tol %.3g, n=%d)",
                        result.name, result.max_residual, result.tolerance, result.n_samples)
        else:
            logger.error("%-28s FAIL  max residual %.3g (tol %.3g, n=%d)",
                         result.name, result.max_residual, result.tolerance, result.n_samples)

    @property
    def all_passed(self):
        return all(r.passed for r in self.results)

    def get_results(self):
        """
        Summary of the collected results.

        Returns:
            dict: Counts and the names of failing checks
        """
        failed = [r.name for r in self.results if not r.passed]
        return {
            'checks_run': len(self.results),
            'passed': len(self.results) - len(failed),
            'failed': len(failed),
            'failing_checks': failed,
        }
