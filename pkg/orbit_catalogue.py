"""
orbit_catalogue.py - Periodic orbits of the second kind

This module tabulates the k:l resonant tori of the rotating Kepler problem:
their Kepler energy c_kl, angular momentum L_kl, the Jacobi energy window
(c-, c+) in which the torus exists, the interior/exterior classification, the
polynomial p(K, H) whose zero set bounds the admissible energies, and the
rotational symmetry of the orbits seen from the rotating frame.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

import dynamics
from phase_space import DomainError, Trajectory
from root_solver import RootSolver

logger = logging.getLogger(__name__)

_solver = RootSolver()


class Classification(Enum):
    """Position of the resonant torus relative to the critical circular orbit."""
    INTERIOR = 'interior'
    EXTERIOR = 'exterior'
    CRITICAL = 'critical'


@dataclass(frozen=True, order=True)
class ResonanceLabel:
    """Coprime positive pair (k, l): the orbit closes after k Kepler periods in l turns."""
    k: int
    l: int

    def __post_init__(self):
        if not (isinstance(self.k, (int, np.integer)) and isinstance(self.l, (int, np.integer))):
            raise DomainError(f"Resonance labels must be integers, got ({self.k}, {self.l})")
        if self.k < 1 or self.l < 1:
            raise DomainError(f"Resonance labels must be positive, got ({self.k}, {self.l})")
        if math.gcd(int(self.k), int(self.l)) != 1:
            raise DomainError(f"({self.k}, {self.l}) is not coprime")

    def __str__(self):
        return f"({self.k},{self.l})"


@dataclass(frozen=True)
class ResonanceData:
    label: ResonanceLabel
    c_kl: float
    L_kl: float
    c_minus: float
    c_plus: float
    classification: Classification

    def in_window(self, c):
        return self.c_minus < c < self.c_plus


def resonance_data(label):
    """
    Energy, angular momentum and energy window of the torus T_{k,l}.

    Args:
        label (ResonanceLabel): Coprime (k, l)

    Returns:
        ResonanceData: The catalogue row
    """
    k, l = label.k, label.l
    ratio = (l / k) ** (1.0 / 3.0)
    c_kl = -0.5 * (k / l) ** (2.0 / 3.0)
    c_minus = -ratio * (k + 2 * l) / (2.0 * l)
    c_plus = ratio * (2 * l - k) / (2.0 * l)
    if k == l:
        classification = Classification.CRITICAL
    elif k > l:
        classification = Classification.INTERIOR
    else:
        classification = Classification.EXTERIOR
    return ResonanceData(label=label, c_kl=c_kl, L_kl=ratio, c_minus=c_minus,
                         c_plus=c_plus, classification=classification)


def window_residual(data):
    """Disagreement between c_kl -/+ L_kl and the closed-form window ends."""
    return max(abs(data.c_kl - data.L_kl - data.c_minus), abs(data.c_kl + data.L_kl - data.c_plus))


def period_of_energy(H):
    """Minimal period 2 pi (-2H)^(-3/2) of every Kepler ellipse of energy H."""
    if H >= 0.0:
        raise DomainError(f"Only bound orbits are periodic (H={H})")
    return dynamics.kepler_period(H)


# The polynomial p(K, H) = |A|^2 at fixed K and H

def p_value(K, H):
    return 1.0 + 2.0 * H * (K - H) ** 2


def p_discriminant(K):
    """Discriminant of p_K as a cubic in H: -32 K^3 - 108."""
    return -32.0 * K ** 3 - 108.0


def p_roots(K):
    """
    Real roots of p_K(H) = 0, ascending and with multiplicity.

    Three roots below the critical energy, a double root at K = -3/2 and the
    single continuous branch R1(K) above it.
    """
    return _solver.solve_p_cubic(K)


def window_from_p(H):
    """
    Zeros of p^H(K) = p(K, H) as a function of K.

    At H = c_kl these are the window ends c-_{k,l} and c+_{k,l}.

    Args:
        H (float): Kepler energy, H < 0

    Returns:
        tuple: (H - sqrt(-1/(2H)), H + sqrt(-1/(2H)))
    """
    if H >= 0.0:
        raise DomainError(f"p^H has no real zeros for H={H} >= 0")
    half_width = math.sqrt(-1.0 / (2.0 * H))
    return H - half_width, H + half_width


def circular_residual(H, L):
    return 1.0 + 2.0 * H * L * L


# Listings

def _labels(max_sum):
    for total in range(2, max_sum + 1):
        for k in range(1, total):
            l = total - k
            if math.gcd(k, l) == 1:
                yield ResonanceLabel(k, l)


def catalogue(max_sum):
    """All resonance rows with k + l <= max_sum, sorted by (k + l, k)."""
    if max_sum < 2:
        raise DomainError("max_sum must be at least 2")
    return [resonance_data(label) for label in _labels(max_sum)]


def tori_in_window(c, max_sum):
    """
    Labels whose torus exists at Jacobi energy c.

    Args:
        c (float): Jacobi energy
        max_sum (int): Bound on k + l, at least 2

    Returns:
        list: ResonanceLabel entries with c strictly inside (c-, c+)
    """
    return [row.label for row in catalogue(max_sum) if row.in_window(c)]


# Second-kind orbits

@dataclass
class SecondKindOrbit:
    label: ResonanceLabel
    orbit: dynamics.KeplerOrbit
    trajectory: Trajectory
    symmetry_residual: float


def second_kind_orbit(label, e=0.3, n_samples=200, omega=0.0, phase=0.0):
    """
    A k:l resonant Kepler ellipse seen from the rotating frame.

    After one Kepler period tau = 2 pi l / k the rotating-frame curve repeats up
    to the rotation e^{2 pi i l / k}; the residual of that identity is reported.

    Args:
        label (ResonanceLabel): Coprime (k, l)
        e (float): Eccentricity in [0, 1)
        n_samples (int): Samples over one period
        omega (float): Argument of the pericentre
        phase (float): Mean anomaly at t = 0

    Returns:
        SecondKindOrbit: Rotating-frame samples over [0, tau] and the residual
    """
    data = resonance_data(label)
    orbit = dynamics.kepler_ellipse(data.c_kl, e, phase=phase, omega=omega)
    tau = orbit.period
    twist = cmath.exp(2j * math.pi * label.l / label.k)

    times = np.linspace(0.0, tau, n_samples + 1)
    states = [dynamics.rotating_state(orbit, t) for t in times]
    residual = 0.0
    for t in times:
        now = dynamics.rotating_orbit(orbit, t)
        later = dynamics.rotating_orbit(orbit, t + tau)
        expected = twist * complex(now[0], now[1])
        residual = max(residual, abs(complex(later[0], later[1]) - expected))
    logger.debug("Second-kind orbit %s (e=%r): symmetry residual %.3g", label, e, residual)
    return SecondKindOrbit(label=label, orbit=orbit, trajectory=Trajectory(times, states),
                           symmetry_residual=residual)
