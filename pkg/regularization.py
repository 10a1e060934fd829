"""
regularization.py - Ligon-Schaaf and Levi-Civita regularization

This module carries the planar Kepler problem to the cotangent bundle of the
sphere (stereographic lift and the Ligon-Schaaf map), evaluates the Delaunay
Hamiltonian there and in the stereographic chart, and pulls everything back to
C^2 through the Levi-Civita double cover and the linear symplectomorphism S.
Each map comes with a numerical check of the structure it is supposed to
preserve.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import least_squares

import dynamics
from phase_space import (DomainError, NumericFailure, OscPoint, PhasePoint, SpherePoint,
                         Trajectory, complex_of, vector_of)
from root_solver import RootSolver

logger = logging.getLogger(__name__)

INVERSE_TOL = 1e-11
INVERSE_MAX_ITER = 60
INVERSE_RESTARTS = 8
CHART_MOMENTUM_MIN = 1e-3

_solver = RootSolver()

OMEGA_4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
OMEGA_6 = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
# dx1^dy1 + dx2^dy2 in the coordinate order (x1, y1, x2, y2)
OMEGA_C2 = np.array([[0.0, 1.0, 0.0, 0.0],
                     [-1.0, 0.0, 0.0, 0.0],
                     [0.0, 0.0, 0.0, 1.0],
                     [0.0, 0.0, -1.0, 0.0]])

_R = 1.0 / math.sqrt(2.0)
# (x1, y1, x2, y2) -> (u1, u2, v1, v2)
LINEAR_S_MATRIX = np.array([[0.0, _R, 0.0, -_R],
                            [_R, 0.0, _R, 0.0],
                            [-_R, 0.0, _R, 0.0],
                            [0.0, _R, 0.0, _R]])


# Stereographic chart

def stereo_lift(pt):
    """
    Cotangent lift of the inverse stereographic projection from the north pole.

    Args:
        pt (PhasePoint): Chart point (q, p)

    Returns:
        SpherePoint: (x, y) with |x| = 1 and x.y = 0
    """
    q, p = pt.q, pt.p
    q_sq = float(np.dot(q, q))
    rho = q_sq + 1.0
    qp = float(np.dot(q, p))
    x = np.array([2.0 * q[0] / rho, 2.0 * q[1] / rho, (q_sq - 1.0) / rho])
    y = np.array([0.5 * rho * p[0] - qp * q[0], 0.5 * rho * p[1] - qp * q[1], qp])
    return SpherePoint(x, y)


def stereo_drop(sp):
    """Inverse of stereo_lift away from the north pole."""
    x, y = sp.x, sp.y
    denom = 1.0 - x[2]
    if sp.is_north_pole() or denom <= 0.0:
        raise DomainError("The north pole is not covered by the stereographic chart")
    q = x[:2] / denom
    p = denom * (y[:2] + y[2] * q)
    return PhasePoint(q, p)


# Delaunay and rotating Kepler Hamiltonians

def delaunay_energy(sp):
    """H~(x, y) = -1 / (2 |y|^2) on T, the complement of the zero section."""
    y_sq = float(np.dot(sp.y, sp.y))
    if y_sq == 0.0:
        raise DomainError("Delaunay Hamiltonian is undefined on the zero section")
    return -0.5 / y_sq


def chart_delaunay_energy(pt):
    """Delaunay Hamiltonian in the chart: -2 / ((|q|^2 + 1)^2 |p|^2)."""
    p_sq = float(np.dot(pt.p, pt.p))
    if p_sq == 0.0:
        raise DomainError("Chart Delaunay Hamiltonian is undefined at p = 0")
    rho = float(np.dot(pt.q, pt.q)) + 1.0
    return -2.0 / (rho * rho * p_sq)


def chart_rkp_energy(pt):
    """Rotating Kepler Hamiltonian in the chart: H~ + q1 p2 - q2 p1."""
    return chart_delaunay_energy(pt) + (pt.q[0] * pt.p[1] - pt.q[1] * pt.p[0])


def chart_delaunay_field(t, s):
    q_sq = s[0] ** 2 + s[1] ** 2
    p_sq = s[2] ** 2 + s[3] ** 2
    rho = q_sq + 1.0
    a = 4.0 / (rho ** 2 * p_sq ** 2)
    b = 8.0 / (rho ** 3 * p_sq)
    return [a * s[2], a * s[3], -b * s[0], -b * s[1]]


def chart_rkp_field(t, s):
    dq1, dq2, dp1, dp2 = chart_delaunay_field(t, s)
    return [dq1 - s[1], dq2 + s[0], dp1 - s[3], dp2 + s[2]]


def chart_flow(pt, T, dt, rotating=False, p_min=CHART_MOMENTUM_MIN):
    """
    Flow of the Delaunay (or chart rotating Kepler) Hamiltonian in the chart.

    Args:
        pt (PhasePoint): Chart initial point, p != 0
        T (float): Integration time
        dt (float): Sampling step
        rotating (bool): Add the angular momentum to the Hamiltonian
        p_min (float): Guard against the zero section

    Returns:
        Trajectory: Chart samples
    """
    if float(np.linalg.norm(pt.p)) < p_min:
        raise DomainError("Chart flow starts too close to the zero section")

    def guard(t, s):
        return math.hypot(s[2], s[3]) - p_min

    rhs = chart_rkp_field if rotating else chart_delaunay_field
    times, states, status, message = dynamics.integrate(rhs, pt.as_array(), T, dt, guard)
    return Trajectory(times, [PhasePoint.from_array(s) for s in states], status, message)


# Ligon-Schaaf map

@dataclass(frozen=True)
class LSFrame:
    calA: np.ndarray
    calB: np.ndarray
    phi: float
    nu: float

    def orthonormality_residual(self):
        return max(abs(np.linalg.norm(self.calA) - 1.0),
                   abs(np.linalg.norm(self.calB) - 1.0),
                   abs(float(np.dot(self.calA, self.calB))))


def ls_frame(pt):
    """
    The orthonormal frame (calA, calB), the angle phi and the scale nu.

    nu = (-2H)^(-1/2) is the length of the image covector.

    Args:
        pt (PhasePoint): Point of P_minus

    Returns:
        LSFrame: The frame
    """
    H = dynamics.energies(pt).H
    if H >= 0.0:
        raise DomainError(f"Point outside P_minus (H={H})")
    nu = 1.0 / math.sqrt(-2.0 * H)
    q, p = pt.q, pt.p
    r = pt.radius
    qp = float(np.dot(q, p))
    calA = np.array([q[0] / r - qp * p[0], q[1] / r - qp * p[1], qp / nu])
    calB = np.array([r * p[0] / nu, r * p[1] / nu, r * float(np.dot(p, p)) - 1.0])
    return LSFrame(calA=calA, calB=calB, phi=qp / nu, nu=nu)


def ligon_schaaf(pt):
    """
    The Ligon-Schaaf symplectomorphism from P_minus onto T_minus.

    Args:
        pt (PhasePoint): Point with H < 0

    Returns:
        SpherePoint: (sin(phi) A + cos(phi) B, nu (sin(phi) B - cos(phi) A))
    """
    frame = ls_frame(pt)
    s, c = math.sin(frame.phi), math.cos(frame.phi)
    x = s * frame.calA + c * frame.calB
    y = frame.nu * (s * frame.calB - c * frame.calA)
    return SpherePoint(x, y)


def _ls_residual(state, target):
    try:
        image = ligon_schaaf(PhasePoint.from_array(state)).as_array()
    except DomainError:
        return np.full(6, 1e3)
    return image - target


def _reconstruct(sp):
    # Undo the rotation by phi, then read (q, p) off the frame
    nu = float(np.linalg.norm(sp.y))
    w = -sp.y / nu
    phi = _solver.solve_angle(sp.x[2], w[2])
    s, c = math.sin(phi), math.cos(phi)
    calA = s * sp.x + c * w
    calB = c * sp.x - s * w
    r = nu * nu * (1.0 - calB[2])
    if r <= 0.0:
        raise NumericFailure("Reconstructed radius is not positive")
    p = nu * calB[:2] / r
    q = r * (calA[:2] + nu * calA[2] * p)
    return PhasePoint(q, p)


def _circular_seeds(sp):
    nu = float(np.linalg.norm(sp.y))
    radius = nu * nu
    L = float(np.cross(sp.x, sp.y)[2])
    sense = 1.0 if L >= 0.0 else -1.0
    for j in range(INVERSE_RESTARTS):
        theta = 2.0 * math.pi * j / INVERSE_RESTARTS
        yield np.array([radius * math.cos(theta), radius * math.sin(theta),
                        -sense * math.sin(theta) / nu, sense * math.cos(theta) / nu])


def ligon_schaaf_inverse(sp, tol=INVERSE_TOL):
    """
    Invert the Ligon-Schaaf map on T_minus.

    The frame is unwound in closed form up to a scalar angle equation; the result
    is then polished by damped Newton (Levenberg-Marquardt) on the four chart
    components, restarting from circular orbits of the same energy if needed.

    Args:
        sp (SpherePoint): Point of T_minus
        tol (float): Acceptance threshold on |Phi(q, p) - (x, y)|

    Returns:
        PhasePoint: The preimage in P_minus
    """
    if sp.is_north_pole():
        raise DomainError("x = e3 is not in the image of the Ligon-Schaaf map")
    if not sp.in_t_minus(tol=1e-8):
        raise DomainError("Point is not on the cotangent bundle of the sphere minus the zero section")

    target = sp.as_array()
    seeds = []
    try:
        guess = _reconstruct(sp)
        if np.max(np.abs(_ls_residual(guess.as_array(), target))) <= tol:
            return guess
        seeds.append(guess.as_array())
    except NumericFailure as exc:
        logger.debug("Closed-form unwinding failed (%s); using circular seeds", exc)
    seeds.extend(_circular_seeds(sp))

    for attempt, seed in enumerate(seeds):
        fit = least_squares(_ls_residual, seed, args=(target,), method='lm',
                            xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=INVERSE_MAX_ITER * 5)
        if np.max(np.abs(fit.fun)) <= tol:
            if attempt > 0:
                logger.debug("Ligon-Schaaf inverse converged after %d restarts", attempt)
            return PhasePoint.from_array(fit.x)
    raise NumericFailure("Ligon-Schaaf inverse did not converge from any seed")


def so3_moments(point):
    """
    SO(3) momentum maps.

    Args:
        point (PhasePoint or SpherePoint): Plane point of P_minus or sphere point

    Returns:
        np.ndarray: (L, eta1, eta2) on the plane, x ^ y on the sphere
    """
    if isinstance(point, SpherePoint):
        return np.cross(point.x, point.y)
    rl = dynamics.runge_lenz(point)
    if not rl.eta_defined:
        raise DomainError("Eccentricity vector undefined for H >= 0")
    L = dynamics.energies(point).L
    return np.array([L, rl.eta[0], rl.eta[1]])


def sphere_moments_in_plane_frame(sp):
    """x ^ y = (eta2, -eta1, L) after Ligon-Schaaf; reorder it to (L, eta1, eta2)."""
    J = np.cross(sp.x, sp.y)
    return np.array([J[2], -J[1], J[0]])


def so3_act(pt, rotation):
    """
    Transport the rotation action on T to P_minus through the Ligon-Schaaf map.

    Args:
        pt (PhasePoint): Point of P_minus
        rotation (np.ndarray): 3x3 rotation matrix

    Returns:
        PhasePoint: Phi^-1(g x, g y)
    """
    rotation = np.asarray(rotation, dtype=float)
    if not np.allclose(rotation.T @ rotation, np.eye(3), atol=1e-12) or np.linalg.det(rotation) < 0:
        raise DomainError("Expected a rotation matrix")
    sp = ligon_schaaf(pt)
    return ligon_schaaf_inverse(SpherePoint(rotation @ sp.x, rotation @ sp.y))


# Levi-Civita double cover

def levi_civita(osc):
    """
    The 2:1 map (u, v) -> (u / conj(v), 2 v^2).

    Args:
        osc (OscPoint): Pair with v != 0

    Returns:
        PhasePoint: Chart point (q, p)
    """
    if osc.v == 0:
        raise DomainError("Levi-Civita map is undefined at v = 0")
    q = osc.u / osc.v.conjugate()
    p = 2.0 * osc.v * osc.v
    return PhasePoint(vector_of(q), vector_of(p))


def lc_lift(pt, branch=1):
    """
    One of the two Levi-Civita preimages of a chart point.

    Args:
        pt (PhasePoint): Chart point with p != 0
        branch (int): +1 for the principal square root, -1 for its negative

    Returns:
        OscPoint: (u, v) with levi_civita(u, v) = pt
    """
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    p = complex_of(pt.p)
    if p == 0:
        raise DomainError("Levi-Civita lift is undefined at p = 0")
    v = branch * complex(np.sqrt(p / 2.0))
    u = complex_of(pt.q) * v.conjugate()
    return OscPoint(u, v)


def regularized_kepler(osc, c):
    """
    Kepler energy minus c at position 2 v^2 and momentum u / conj(v).

    Equals |u|^2 / (2|v|^2) - 1 / (2|v|^2) - c.
    """
    v_sq = abs(osc.v) ** 2
    if v_sq == 0.0:
        raise DomainError("Regularized Kepler Hamiltonian is undefined at v = 0")
    return (abs(osc.u) ** 2 - 1.0) / (2.0 * v_sq) - c


def regularized_kepler_scaled(osc, c):
    """|v|^2 times regularized_kepler: (|u|^2 - 1) / 2 - c |v|^2, two oscillators for c < 0."""
    return 0.5 * (abs(osc.u) ** 2 - 1.0) - c * abs(osc.v) ** 2


# Linear symplectomorphism S

def linear_S(z1, z2):
    """
    S: C + C -> T*C, (x1 + i y1, x2 + i y2) -> (u, v).

    Args:
        z1 (array or complex): First factor
        z2 (array or complex): Second factor

    Returns:
        OscPoint: (u, v)
    """
    z1, z2 = _as_complex(z1), _as_complex(z2)
    image = LINEAR_S_MATRIX @ np.array([z1.real, z1.imag, z2.real, z2.imag])
    return OscPoint.from_array(image)


def linear_S_inverse(osc):
    """Inverse of linear_S; returns (z1, z2) as complex numbers."""
    x1, y1, x2, y2 = LINEAR_S_MATRIX.T @ osc.as_array()
    return complex(x1, y1), complex(x2, y2)


def _as_complex(z):
    if isinstance(z, complex):
        return z
    z = np.asarray(z, dtype=float)
    if z.shape == ():
        return complex(float(z))
    return complex_of(z)


# Structure checks

class MapKind(Enum):
    LINEAR_S = 'linear_S'
    LEVI_CIVITA = 'levi_civita'
    STEREO_LIFT = 'stereo_lift'
    LIGON_SCHAAF = 'ligon_schaaf'


# Levi-Civita pulls Re(dq ^ conj(dp)) back to 4 Re(du ^ conj(dv))
_CONFORMAL_FACTOR = {MapKind.LINEAR_S: 1.0, MapKind.LEVI_CIVITA: 4.0,
                     MapKind.STEREO_LIFT: 1.0, MapKind.LIGON_SCHAAF: 1.0}


def _map_setup(map_kind, point):
    if map_kind == MapKind.LINEAR_S:
        z1, z2 = point
        z1, z2 = _as_complex(z1), _as_complex(z2)
        source = np.array([z1.real, z1.imag, z2.real, z2.imag])
        return source, (lambda s: LINEAR_S_MATRIX @ s), OMEGA_C2, OMEGA_4
    if map_kind == MapKind.LEVI_CIVITA:
        return (point.as_array(),
                lambda s: levi_civita(OscPoint.from_array(s)).as_array(), OMEGA_4, OMEGA_4)
    if map_kind == MapKind.STEREO_LIFT:
        return (point.as_array(),
                lambda s: stereo_lift(PhasePoint.from_array(s)).as_array(), OMEGA_4, OMEGA_6)
    if map_kind == MapKind.LIGON_SCHAAF:
        return (point.as_array(),
                lambda s: ligon_schaaf(PhasePoint.from_array(s)).as_array(), OMEGA_4, OMEGA_6)
    raise ValueError("Invalid map kind")


def jacobian(map_kind, point, h=1e-5):
    """Central-difference Jacobian of a map; linear S returns its exact matrix."""
    source, func, _, _ = _map_setup(map_kind, point)
    if map_kind == MapKind.LINEAR_S:
        return LINEAR_S_MATRIX.copy()
    columns = []
    for i in range(len(source)):
        forward = source.copy()
        backward = source.copy()
        forward[i] += h
        backward[i] -= h
        columns.append((func(forward) - func(backward)) / (2.0 * h))
    return np.column_stack(columns)


def symplectic_residual(map_kind, point, h=1e-5):
    """
    Max-norm of J^T Omega_target J - lambda Omega_source.

    Targets on the sphere are embedded in R^6; the ambient form restricts to the
    canonical form on T*S^2, so no tangent projection is needed for maps into it.

    Args:
        map_kind (MapKind): Which map
        point: Source point (PhasePoint, OscPoint, or a (z1, z2) pair for S)
        h (float): Finite-difference step

    Returns:
        float: The residual
    """
    if h <= 0.0:
        raise DomainError("Finite-difference step must be positive")
    _, _, omega_source, omega_target = _map_setup(map_kind, point)
    J = jacobian(map_kind, point, h)
    pulled = J.T @ omega_target @ J
    return float(np.max(np.abs(pulled - _CONFORMAL_FACTOR[map_kind] * omega_source)))


def conjugacy_residual(pt, T, dt=None):
    """
    Compare the Ligon-Schaaf image of a Kepler orbit with the Delaunay flow.

    Both endpoints are compared in the stereographic chart.

    Args:
        pt (PhasePoint): Initial point in P_minus
        T (float): Flow time
        dt (float): Sampling step; defaults to a 2000th of the Kepler period

    Returns:
        float: Chart distance between Phi(flow_H(pt, T)) and flow_H~(Phi(pt), T)
    """
    H = dynamics.energies(pt).H
    if H >= 0.0:
        raise DomainError(f"Point outside P_minus (H={H})")
    if dt is None:
        dt = dynamics.kepler_period(H) / dynamics.STEPS_PER_PERIOD

    kepler = dynamics.flow(dynamics.Field.H, pt, T, dt)
    if kepler.truncated:
        raise DomainError(f"Kepler flow truncated: {kepler.message}")
    delaunay = chart_flow(stereo_drop(ligon_schaaf(pt)), T, dt)
    if delaunay.truncated:
        raise DomainError(f"Delaunay flow truncated: {delaunay.message}")

    mapped = stereo_drop(ligon_schaaf(kepler.end)).as_array()
    return float(np.linalg.norm(mapped - delaunay.end.as_array()))
