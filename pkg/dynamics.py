"""
dynamics.py - Kepler and rotating Kepler dynamics

This module evaluates the Kepler Hamiltonian H, the angular momentum L and the
Jacobi energy K = H + L, the Runge-Lenz vector, numerical Poisson brackets,
flows of X_H and X_K, and closed-form Kepler ellipses seen from the inertial
and from the rotating frame.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from phase_space import DomainError, FlowStatus, PhasePoint, Trajectory
from root_solver import RootSolver

logger = logging.getLogger(__name__)

COLLISION_RADIUS = 1e-3
STEPS_PER_PERIOD = 2000
RTOL = 1e-13
ATOL = 1e-14

_solver = RootSolver()


@dataclass(frozen=True)
class EnergyBundle:
    H: float
    L: float
    K: float
    U: float


@dataclass(frozen=True)
class RungeLenz:
    """Runge-Lenz vector A, eccentricity vector eta = nu A and |A|^2 - (1 + 2HL^2)."""
    A: np.ndarray
    eta: np.ndarray
    norm_sq_residual: float

    @property
    def eta_defined(self):
        return self.eta is not None


# Scalar observables on flat states (q1, q2, p1, p2)

def _kepler_energy(s):
    return 0.5 * (s[2] ** 2 + s[3] ** 2) - 1.0 / math.hypot(s[0], s[1])


def _angular_momentum(s):
    return s[0] * s[3] - s[1] * s[2]


def _runge_lenz(s):
    r = math.hypot(s[0], s[1])
    L = _angular_momentum(s)
    return np.array([s[3] * L - s[0] / r, -s[2] * L - s[1] / r])


def _nu(H):
    # nu = (-2H)^(-1/2): the scale that makes (L, eta) an so(3) momentum
    if H >= 0.0:
        raise DomainError(f"Eccentricity vector needs H < 0 (H={H})")
    return 1.0 / math.sqrt(-2.0 * H)


def _eta(s):
    return _nu(_kepler_energy(s)) * _runge_lenz(s)


class Observable(Enum):
    """Functions on the planar phase space usable in Poisson brackets."""
    H = 'H'
    L = 'L'
    K = 'K'
    A1 = 'A1'
    A2 = 'A2'
    ETA1 = 'eta1'
    ETA2 = 'eta2'

    def __call__(self, state):
        s = np.asarray(state, dtype=float)
        if self is Observable.H:
            return _kepler_energy(s)
        if self is Observable.L:
            return _angular_momentum(s)
        if self is Observable.K:
            return _kepler_energy(s) + _angular_momentum(s)
        if self is Observable.A1:
            return _runge_lenz(s)[0]
        if self is Observable.A2:
            return _runge_lenz(s)[1]
        if self is Observable.ETA1:
            return _eta(s)[0]
        return _eta(s)[1]


def energies(pt):
    """
    Evaluate H, L, K and the effective potential U at a phase-space point.

    Args:
        pt (PhasePoint): Point with q != 0

    Returns:
        EnergyBundle: The four energies
    """
    pt.require_noncollision()
    r = pt.radius
    H = 0.5 * float(np.dot(pt.p, pt.p)) - 1.0 / r
    L = _angular_momentum(pt.as_array())
    U = -1.0 / r - 0.5 * r * r
    return EnergyBundle(H=H, L=L, K=H + L, U=U)


def effective_potential_gradient(q):
    """Gradient q (|q|^-3 - 1) of U = -1/|q| - |q|^2 / 2."""
    q = np.asarray(q, dtype=float)
    r = math.hypot(q[0], q[1])
    if r == 0.0:
        raise DomainError("Effective potential is singular at the origin")
    return q * (1.0 / r ** 3 - 1.0)


def critical_point(theta):
    """The critical point of K over the unit-circle point at angle theta."""
    q1, q2 = math.cos(theta), math.sin(theta)
    return PhasePoint([q1, q2], [q2, -q1])


def runge_lenz(pt):
    """
    Runge-Lenz vector A = (p2 L - q1/|q|, -p1 L - q2/|q|) and eta = nu A.

    The eccentricity vector is only defined on P_minus; outside it eta is None
    and A is still returned.
    """
    pt.require_noncollision()
    s = pt.as_array()
    A = _runge_lenz(s)
    H = _kepler_energy(s)
    L = _angular_momentum(s)
    residual = float(np.dot(A, A) - (1.0 + 2.0 * H * L * L))
    eta = _nu(H) * A if H < 0.0 else None
    return RungeLenz(A=A, eta=eta, norm_sq_residual=residual)


def eccentricity(pt):
    return float(np.linalg.norm(runge_lenz(pt).A))


def poisson_bracket(f, g, pt, h=1e-5):
    """
    Central-difference estimate of {f, g} = sum df/dq dg/dp - df/dp dg/dq.

    Args:
        f (Observable or callable): First function of (q1, q2, p1, p2)
        g (Observable or callable): Second function
        pt (PhasePoint): Evaluation point
        h (float): Finite-difference step

    Returns:
        float: The bracket, accurate to O(h^2)
    """
    if h <= 0.0:
        raise DomainError("Finite-difference step must be positive")
    s = pt.as_array()
    grad_f = _central_gradient(f, s, h)
    grad_g = _central_gradient(g, s, h)
    return float(np.dot(grad_f[:2], grad_g[2:]) - np.dot(grad_f[2:], grad_g[:2]))


def _central_gradient(func, s, h):
    grad = np.empty(4)
    for i in range(4):
        forward = s.copy()
        backward = s.copy()
        forward[i] += h
        backward[i] -= h
        grad[i] = (func(forward) - func(backward)) / (2.0 * h)
    return grad


# Flows

class Field(Enum):
    """Hamiltonian vector fields on the planar phase space."""
    H = 'H'
    K = 'K'


def kepler_field(t, s):
    r3 = math.hypot(s[0], s[1]) ** 3
    return [s[2], s[3], -s[0] / r3, -s[1] / r3]


def rkp_field(t, s):
    r3 = math.hypot(s[0], s[1]) ** 3
    return [s[2] - s[1], s[3] + s[0], -s[0] / r3 - s[3], -s[1] / r3 + s[2]]


_FIELDS = {Field.H: kepler_field, Field.K: rkp_field}


def integrate(rhs, state, T, dt, guard=None):
    """
    Integrate a vector field with DOP853 and sample it on a uniform grid.

    Args:
        rhs (callable): Vector field rhs(t, s)
        state (array): Initial state
        T (float): Final time, T >= 0
        dt (float): Sampling step
        guard (callable): Optional event guard(t, s) that stops the run when it
            crosses zero from above

    Returns:
        tuple: (times, states as 2D array, FlowStatus, message)
    """
    if dt <= 0.0:
        raise DomainError("Time step must be positive")
    if T < 0.0:
        raise DomainError("Only forward flows are supported")
    state = np.asarray(state, dtype=float)
    if T == 0.0:
        return np.array([0.0]), state[np.newaxis, :], FlowStatus.COMPLETE, ""

    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    t_eval = np.linspace(0.0, T, n_steps + 1)
    events = None
    if guard is not None:
        guard.terminal = True
        guard.direction = -1
        events = [guard]

    sol = solve_ivp(rhs, (0.0, T), state, method='DOP853', t_eval=t_eval,
                    events=events, rtol=RTOL, atol=ATOL)
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"Integration failed: {sol.message}")

    times = sol.t
    states = sol.y.T
    if sol.status == 1:
        t_hit = float(sol.t_events[0][0])
        if t_hit > times[-1]:
            times = np.append(times, t_hit)
            states = np.vstack([states, sol.y_events[0][0]])
        logger.warning("Flow truncated at t=%.6g by the near-collision guard", t_hit)
        return times, states, FlowStatus.COLLISION, f"near collision at t={t_hit:.17g}"
    return times, states, FlowStatus.COMPLETE, ""


def flow(field, pt, T, dt=None, r_min=COLLISION_RADIUS):
    """
    Flow a planar point along X_H or X_K.

    Args:
        field (Field): Which Hamiltonian
        pt (PhasePoint): Initial point
        T (float): Integration time
        dt (float): Sampling step; defaults to a 2000th of the Kepler period
        r_min (float): Near-collision guard radius

    Returns:
        Trajectory: Samples, truncated with COLLISION status near q = 0
    """
    pt.require_noncollision()
    if pt.radius < r_min:
        raise DomainError(f"Initial point already inside the collision radius {r_min}")
    if dt is None:
        H = energies(pt).H
        base = kepler_period(H) if H < 0.0 else T
        dt = (base or 1.0) / STEPS_PER_PERIOD

    def guard(t, s):
        return math.hypot(s[0], s[1]) - r_min

    times, states, status, message = integrate(_FIELDS[field], pt.as_array(), T, dt, guard)
    return Trajectory(times, [PhasePoint.from_array(s) for s in states], status, message)


# Closed-form Kepler ellipses

def kepler_period(H):
    return 2.0 * math.pi * (-2.0 * H) ** -1.5


@dataclass(frozen=True)
class KeplerOrbit:
    """
    Kepler ellipse with energy H < 0 and eccentricity e, focus at the origin.

    omega is the argument of the pericentre, phase the mean anomaly at t = 0 and
    sense +1 for counter-clockwise motion, -1 for clockwise.
    """
    H: float
    e: float
    omega: float = 0.0
    phase: float = 0.0
    sense: int = 1

    @property
    def semi_major(self):
        return -1.0 / (2.0 * self.H)

    @property
    def period(self):
        return kepler_period(self.H)

    @property
    def mean_motion(self):
        return (-2.0 * self.H) ** 1.5

    def _perifocal(self, t):
        a, e = self.semi_major, self.e
        E = _solver.solve_kepler(self.phase + self.mean_motion * t, e)
        cos_E, sin_E = math.cos(E), math.sin(E)
        b = a * math.sqrt(1.0 - e * e)
        E_dot = self.mean_motion / (1.0 - e * cos_E)
        pos = np.array([a * (cos_E - e), self.sense * b * sin_E])
        vel = np.array([-a * sin_E * E_dot, self.sense * b * cos_E * E_dot])
        return pos, vel

    def _rotation(self):
        c, s = math.cos(self.omega), math.sin(self.omega)
        return np.array([[c, -s], [s, c]])

    def position(self, t):
        pos, _ = self._perifocal(t)
        return self._rotation() @ pos

    def state(self, t):
        pos, vel = self._perifocal(t)
        R = self._rotation()
        return PhasePoint(R @ pos, R @ vel)


def solve_kepler(mean_anomaly, e):
    """Eccentric anomaly solving M = E - e sin E."""
    return _solver.solve_kepler(mean_anomaly, e)


def kepler_ellipse(H, e, phase=0.0, omega=0.0, sense=1):
    """
    Build a closed-form Kepler ellipse.

    Args:
        H (float): Kepler energy, H < 0
        e (float): Eccentricity in [0, 1)
        phase (float): Mean anomaly at t = 0
        omega (float): Argument of the pericentre
        sense (int): +1 counter-clockwise, -1 clockwise

    Returns:
        KeplerOrbit: The orbit
    """
    if H >= 0.0:
        raise DomainError(f"Kepler ellipses need H < 0 (H={H})")
    if not 0.0 <= e < 1.0:
        raise DomainError(f"Eccentricity {e} outside [0, 1)")
    if sense not in (1, -1):
        raise DomainError("sense must be +1 or -1")
    return KeplerOrbit(H=float(H), e=float(e), omega=float(omega), phase=float(phase), sense=sense)


def _rotate(vec, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * vec[0] - s * vec[1], s * vec[0] + c * vec[1]])


def kepler_state(orbit, t):
    """Inertial position and momentum of the ellipse at time t."""
    return orbit.state(t)


def rotating_orbit(orbit, t):
    """Position e^{it} eps(t) of the ellipse seen from the rotating frame."""
    return _rotate(orbit.position(t), t)


def rotating_state(orbit, t):
    """The full rotating-frame state; it follows the flow of X_K."""
    inertial = kepler_state(orbit, t)
    return PhasePoint(_rotate(inertial.q, t), _rotate(inertial.p, t))
