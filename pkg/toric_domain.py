"""
toric_domain.py - Moment maps and the sublevel sets of the reduced Hamiltonian

This module pushes the rotating Kepler Hamiltonian down to the moment image of
the torus action, K~(mu1, mu2) = -1/(8 mu1^2) + 2 mu2, and describes its
sublevel sets: the bounded and unbounded components below the critical energy,
their corners, the boundary graph g_c, and the check that the bounded component
is a special concave toric domain.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from orbit_catalogue import ResonanceLabel, resonance_data
from phase_space import DomainError, NumericFailure, PhasePoint, complex_of
from regularization import linear_S
from root_solver import CRITICAL_ENERGY, CornerKind, RootSolver

logger = logging.getLogger(__name__)

CONE_TOL = 1e-12
CONVEXITY_TOL = 1e-12
SLOPE_TOL = 1e-9
ENDPOINT_TOL = 1e-9

_solver = RootSolver()


class Component(Enum):
    """Where a region or a moment point sits relative to K~ <= c."""
    BOUNDED = 'bounded'
    UNBOUNDED = 'unbounded'
    CONNECTED = 'connected'
    OUTSIDE = 'outside'


@dataclass(frozen=True)
class MomentPair:
    """A point of the moment cone |mu2| <= mu1."""
    mu1: float
    mu2: float

    def __post_init__(self):
        object.__setattr__(self, 'mu1', float(self.mu1))
        object.__setattr__(self, 'mu2', float(self.mu2))
        if abs(self.mu2) > self.mu1 + CONE_TOL * max(1.0, self.mu1):
            raise DomainError(f"({self.mu1}, {self.mu2}) lies outside the cone |mu2| <= mu1")


@dataclass(frozen=True)
class QPair:
    """A point of the closed first quadrant."""
    nu1: float
    nu2: float

    def __post_init__(self):
        object.__setattr__(self, 'nu1', float(self.nu1))
        object.__setattr__(self, 'nu2', float(self.nu2))
        if self.nu1 < -CONE_TOL or self.nu2 < -CONE_TOL:
            raise DomainError(f"({self.nu1}, {self.nu2}) lies outside the first quadrant")


# Moment maps

def moment_mu(osc):
    """mu(u, v) = ((|u|^2 + |v|^2) / 2, u1 v2 - u2 v1)."""
    u, v = osc.u, osc.v
    mu1 = 0.5 * (abs(u) ** 2 + abs(v) ** 2)
    mu2 = u.real * v.imag - u.imag * v.real
    return MomentPair(mu1, mu2)


def moment_nu(z1, z2):
    """nu(z1, z2) = (pi |z1|^2, pi |z2|^2)."""
    z1 = z1 if isinstance(z1, complex) else complex_of(z1)
    z2 = z2 if isinstance(z2, complex) else complex_of(z2)
    return QPair(math.pi * abs(z1) ** 2, math.pi * abs(z2) ** 2)


def rotate_to_mu(qp):
    """
    Rotate the quadrant onto the moment cone.

    The orientation puts mu2 = (nu2 - nu1) / (2 pi); with linear_S this matches
    the torus moment map only after swapping the factors, see diagram_residual.

    Args:
        qp (QPair): Quadrant point

    Returns:
        MomentPair: Cone point
    """
    return MomentPair((qp.nu1 + qp.nu2) / (2.0 * math.pi), (qp.nu2 - qp.nu1) / (2.0 * math.pi))


def unrotate(mp):
    return QPair(math.pi * (mp.mu1 - mp.mu2), math.pi * (mp.mu1 + mp.mu2))


def diagram_residual(z1, z2):
    """|rotate_to_mu(nu(z1, z2)) - mu(S(z2, z1))|, the commuting square."""
    top = rotate_to_mu(moment_nu(z1, z2))
    bottom = moment_mu(linear_S(z2, z1))
    return max(abs(top.mu1 - bottom.mu1), abs(top.mu2 - bottom.mu2))


# Reduced Hamiltonian and its level curves

def ktilde(mp):
    """K~(mu1, mu2) = -1/(8 mu1^2) + 2 mu2."""
    if mp.mu1 <= 0.0:
        raise DomainError("K~ is singular at mu1 = 0")
    return -1.0 / (8.0 * mp.mu1 * mp.mu1) + 2.0 * mp.mu2


def boundary_g(c, t):
    """
    The level curve K~ = c as a graph mu2 = g_c(mu1).

    Args:
        c (float): Jacobi energy
        t (float): mu1, t > 0

    Returns:
        float: c/2 + 1/(16 t^2)
    """
    if t <= 0.0:
        raise DomainError(f"g_c needs t > 0 (t={t})")
    return 0.5 * c + 1.0 / (16.0 * t * t)


def boundary_slope(t):
    return -1.0 / (8.0 * t ** 3)


@dataclass(frozen=True)
class Corners:
    a: float
    b: float
    b_u: float


def corners(c):
    """
    Corners of the sublevel set K~ <= c below the critical energy.

    a solves g(a) = a, b and b_u are the two positive solutions of g(t) = -t.

    Args:
        c (float): Jacobi energy, c <= -3/2

    Returns:
        Corners: (a, b, b_u)
    """
    if c > CRITICAL_ENERGY:
        raise DomainError(f"No bounded component for c={c} > -3/2")
    a = _solver.solve_corner(c, CornerKind.DIAGONAL)
    b = _solver.solve_corner(c, CornerKind.INNER)
    b_u = _solver.solve_corner(c, CornerKind.OUTER)
    return Corners(a=a, b=b, b_u=b_u)


# Profiles

@dataclass
class DomainProfile:
    """
    Sampled upper boundary of a component of K~ <= c in the moment cone.

    samples holds rows (t, upper(t)); the lower boundary is always mu2 = -t.
    Bounded profiles sample g_c on [a, b]; the edges along the cone to (a, a)
    and (b, -b) are implied.
    """
    c: float
    a: float
    b: Optional[float]
    samples: np.ndarray
    component: Component
    b_u: Optional[float] = None
    corner_rows: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 2 or len(self.samples) < 2:
            raise ValueError("Profile samples must be an (n, 2) array with n >= 2")
        if np.any(np.diff(self.samples[:, 0]) <= 0):
            raise ValueError("Profile samples must be strictly increasing in t")
        if self.b is not None and not 0.0 < self.a < self.b:
            raise ValueError(f"Corners must satisfy 0 < a < b (a={self.a}, b={self.b})")

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def g(self):
        return self.samples[:, 1]

    def outline(self):
        """Closed polygon of the region, starting at its first boundary sample or the apex."""
        if self.component == Component.BOUNDED:
            upper = [(0.0, 0.0)] + [tuple(row) for row in self.samples]
            return np.array(upper + [(0.0, 0.0)])
        lower = [(t, -t) for t in self.t[::-1]]
        return np.array([tuple(row) for row in self.samples] + lower + [tuple(self.samples[0])])


def _chebyshev_nodes(lo, hi, n):
    j = np.arange(n)
    nodes = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(np.pi * j / (n - 1))
    nodes[0], nodes[-1] = lo, hi
    return nodes


def profile(c, n):
    """
    Bounded component of K~ <= c, sampled at Chebyshev nodes of [a, b].

    Args:
        c (float): Jacobi energy, c <= -3/2
        n (int): Number of samples, n >= 2

    Returns:
        DomainProfile: The bounded profile
    """
    if n < 2:
        raise DomainError("A profile needs at least two samples")
    cs = corners(c)
    t = _chebyshev_nodes(cs.a, cs.b, n)
    g = np.array([boundary_g(c, ti) for ti in t])
    return DomainProfile(c=c, a=cs.a, b=cs.b, b_u=cs.b_u, samples=np.column_stack([t, g]),
                         component=Component.BOUNDED,
                         corner_rows=[0, n - 1])


def unbounded_profile(c, t_max, n):
    """Unbounded component: upper boundary min(t, g_c(t)) on [b_u, t_max]."""
    if n < 2:
        raise DomainError("A profile needs at least two samples")
    cs = corners(c)
    if t_max <= cs.b_u:
        raise DomainError(f"t_max={t_max} must exceed the inner corner b_u={cs.b_u}")
    t = np.linspace(cs.b_u, t_max, n)
    upper = np.array([min(ti, boundary_g(c, ti)) for ti in t])
    return DomainProfile(c=c, a=cs.a, b=cs.b, b_u=cs.b_u, samples=np.column_stack([t, upper]),
                         component=Component.UNBOUNDED, corner_rows=[0])


def connected_profile(c, t_max, n):
    """
    Above the critical energy K~ <= c is one region touching the apex of the cone.

    Args:
        c (float): Jacobi energy, c > -3/2
        t_max (float): Right end of the sampled window
        n (int): Number of uniform samples; the corner a is always included

    Returns:
        DomainProfile: Profile with component CONNECTED and b = None
    """
    if c <= CRITICAL_ENERGY:
        raise DomainError(f"c={c} has separate components; use profile/unbounded_profile")
    if n < 2:
        raise DomainError("A profile needs at least two samples")
    a = _solver.solve_corner(c, CornerKind.DIAGONAL)
    if t_max <= a:
        raise DomainError(f"t_max={t_max} must exceed the corner a={a}")
    t = np.unique(np.append(np.linspace(0.0, t_max, n), a))
    upper = np.array([ti if ti <= a else boundary_g(c, ti) for ti in t])
    corner = int(np.searchsorted(t, a))
    return DomainProfile(c=c, a=a, b=None, samples=np.column_stack([t, upper]),
                         component=Component.CONNECTED, corner_rows=[corner])


# Special concave toric domain check

@dataclass(frozen=True)
class SpecialReport:
    convexity_min: float
    slope_max: float
    secant_slope_max: float
    endpoint_residuals: tuple
    f_slope_min: float
    f_slope_max: float
    cone_excess: float
    passed: bool


def verify_special(prof, convexity_tol=CONVEXITY_TOL, slope_tol=SLOPE_TOL, endpoint_tol=ENDPOINT_TOL):
    """
    Check that a bounded profile is the boundary of a special concave toric domain.

    The rotated graph must stay in the cone, be convex with slopes at most -1
    (both analytically and by secants) and start on mu2 = mu1 and end on
    mu2 = -mu1; after unrotating, the boundary function f must have f' in [-1, 0].
    A malformed profile gives passed=False rather than an error.

    Args:
        prof (DomainProfile): A bounded profile
        convexity_tol (float): Allowed negative second divided difference
        slope_tol (float): Slack on g' <= -1 and on f' in [-1, 0]
        endpoint_tol (float): Allowed |g(t0) - t0| and |g(tn) + tn| at the first and last samples

    Returns:
        SpecialReport: The measurements and the verdict
    """
    if prof.component != Component.BOUNDED:
        raise DomainError("Only bounded profiles can be special concave toric domains")
    t, g = prof.t, prof.g

    secants = np.diff(g) / np.diff(t)
    if len(t) >= 3:
        convexity_min = float(np.min(2.0 * np.diff(secants) / (t[2:] - t[:-2])))
    else:
        convexity_min = math.inf
    slope_max = float(np.max(boundary_slope(t)))
    secant_slope_max = float(np.max(secants))
    endpoints = (float(abs(g[0] - t[0])), float(abs(g[-1] + t[-1])))
    cone_excess = float(np.max(np.abs(g) - t))

    # inline unrotate: samples off the cone must fail, not raise
    nu1 = math.pi * (t - g)
    nu2 = math.pi * (t + g)
    with np.errstate(divide='ignore', invalid='ignore'):
        f_slopes = np.diff(nu2) / np.diff(nu1)
    if np.all(np.isfinite(f_slopes)):
        f_slope_min, f_slope_max = float(np.min(f_slopes)), float(np.max(f_slopes))
    else:
        f_slope_min, f_slope_max = -math.inf, math.inf

    passed = (cone_excess <= CONE_TOL * max(1.0, float(t[-1]))
              and convexity_min >= -convexity_tol
              and slope_max <= -1.0 + slope_tol
              and secant_slope_max <= -1.0 + slope_tol
              and max(endpoints) <= endpoint_tol
              and f_slope_min >= -1.0 - slope_tol
              and f_slope_max <= slope_tol)
    report = SpecialReport(convexity_min=convexity_min, slope_max=slope_max,
                           secant_slope_max=secant_slope_max,
                           endpoint_residuals=endpoints,
                           f_slope_min=f_slope_min, f_slope_max=f_slope_max,
                           cone_excess=cone_excess, passed=passed)
    logger.debug("verify_special(c=%r): %s", prof.c, report)
    return report


# Tori, corners and the gap between components

@dataclass(frozen=True)
class TorusPoint:
    label: ResonanceLabel
    mp: MomentPair
    slope: Fraction


def torus_point(k, l, c):
    """
    The point of the torus T_{k,l} in the moment image at energy c.

    Args:
        k (int): Resonance numerator
        l (int): Resonance denominator, gcd(k, l) = 1
        c (float): Jacobi energy inside the window (c-, c+)

    Returns:
        TorusPoint: Moment point ((l/k)^(1/3) / 2, (c - c_kl) / 2) and tangent slope -k/l
    """
    data = resonance_data(ResonanceLabel(k, l))
    if not data.c_minus < c < data.c_plus:
        raise DomainError(f"c={c} outside the window ({data.c_minus}, {data.c_plus}) of T_{k},{l}")
    mp = MomentPair(0.5 * (l / k) ** (1.0 / 3.0), 0.5 * (c - data.c_kl))
    return TorusPoint(label=data.label, mp=mp, slope=Fraction(-k, l))


def classify_moment(c, mp):
    """
    Which component of K~ <= c contains a moment point.

    Raises NumericFailure if an admissible point falls between b and b_u, which
    the decomposition into two components rules out.
    """
    if mp.mu1 > 0.0 and ktilde(mp) > c:
        return Component.OUTSIDE
    if c > CRITICAL_ENERGY:
        return Component.CONNECTED
    cs = corners(c)
    if mp.mu1 <= cs.b:
        return Component.BOUNDED
    if mp.mu1 >= cs.b_u:
        return Component.UNBOUNDED
    raise NumericFailure(f"Admissible point ({mp.mu1}, {mp.mu2}) between the components at c={c}")


@dataclass(frozen=True)
class GapScan:
    c: float
    n_checked: int
    n_admissible: int
    min_margin: float


def component_gap_scan(c, n):
    """
    Scan an n x n grid of the cone strip b < mu1 < b_u for points with K~ <= c.

    Args:
        c (float): Jacobi energy, c < -3/2
        n (int): Grid resolution per axis

    Returns:
        GapScan: Counts and min(K~ - c) over the grid
    """
    if c >= CRITICAL_ENERGY:
        raise DomainError("The components only separate below the critical energy")
    if n < 1:
        raise DomainError("Grid resolution must be positive")
    cs = corners(c)
    n_admissible = 0
    margins = []
    for mu1 in np.linspace(cs.b, cs.b_u, n + 2)[1:-1]:
        for mu2 in np.linspace(-mu1, mu1, n):
            margin = ktilde(MomentPair(mu1, mu2)) - c
            margins.append(margin)
            if margin <= 0.0:
                n_admissible += 1
    return GapScan(c=c, n_checked=len(margins), n_admissible=n_admissible,
                   min_margin=float(min(margins)))


@dataclass(frozen=True)
class CornerOrbit:
    """Circular Kepler orbit at a corner of the domain."""
    name: str
    mp: MomentPair
    H: float
    L: float

    @property
    def circular_residual(self):
        return 1.0 + 2.0 * self.H * self.L * self.L

    def state(self):
        # radius -1/(2H) = 4 t^2 and speed 1/(2t), sense from the sign of L
        t = self.mp.mu1
        speed = math.copysign(1.0 / (2.0 * t), self.L)
        return PhasePoint([4.0 * t * t, 0.0], [0.0, speed])


def corner_orbits(c):
    """
    The retrograde orbit at (a, a) and, for c <= -3/2, the direct orbit at (b, -b).

    Args:
        c (float): Jacobi energy

    Returns:
        list: CornerOrbit entries
    """
    a = _solver.solve_corner(c, CornerKind.DIAGONAL)
    orbits = [CornerOrbit('retrograde', MomentPair(a, a), -1.0 / (8.0 * a * a), 2.0 * a)]
    if c <= CRITICAL_ENERGY:
        b = _solver.solve_corner(c, CornerKind.INNER)
        orbits.append(CornerOrbit('direct', MomentPair(b, -b), -1.0 / (8.0 * b * b), -2.0 * b))
    return orbits

