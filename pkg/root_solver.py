"""
root_solver.py - Scalar root finding for the rotating Kepler toolkit

This module collects the one-dimensional equations the toolkit has to solve:
Kepler's equation, the corner cubics of the toric domain, the cubic p_K(H) and
the angle equation of the inverse Ligon-Schaaf map.
"""

import logging
import math
from enum import Enum

from scipy.optimize import brentq

from phase_space import DomainError, NumericFailure

logger = logging.getLogger(__name__)

CRITICAL_ENERGY = -1.5


class CornerKind(Enum):
    """Which corner of the sublevel set to solve for."""
    DIAGONAL = 1   # a: g(a) = a
    INNER = 2      # b: g(b) = -b, smallest root
    OUTER = 3      # b_u: g(b_u) = -b_u, largest root


class RootSolver:
    """Safeguarded root finders used across the toolkit."""

    def __init__(self, tol=1e-13, max_iter=50):
        self.tol = tol
        self.max_iter = max_iter

    # Kepler's equation

    def solve_kepler(self, mean_anomaly, e):
        """
        Solve M = E - e sin E for the eccentric anomaly E.

        Args:
            mean_anomaly (float): Mean anomaly M
            e (float): Eccentricity in [0, 1)

        Returns:
            float: Eccentric anomaly E
        """
        if not 0.0 <= e < 1.0:
            raise DomainError(f"Eccentricity {e} outside [0, 1)")
        M = float(mean_anomaly)
        if e == 0.0:
            return M

        E = M + e * math.sin(M)
        for _ in range(self.max_iter):
            step = (E - e * math.sin(E) - M) / (1.0 - e * math.cos(E))
            E -= step
            if abs(step) < self.tol:
                return E

        # |E - M| <= e, so the bracket always holds a sign change
        logger.debug("Newton stalled on Kepler's equation (M=%r, e=%r); bisecting", M, e)
        return brentq(lambda E_: E_ - e * math.sin(E_) - M, M - e, M + e,
                      xtol=self.tol, maxiter=200)

    # Corners of the toric domain

    def solve_corner(self, c, kind):
        """
        Solve for a corner of the sublevel set of the reduced Hamiltonian.

        Args:
            c (float): Jacobi energy
            kind (CornerKind): Which corner

        Returns:
            float: Corner abscissa
        """
        if kind == CornerKind.DIAGONAL:
            return self._solve_diagonal(c)
        elif kind in (CornerKind.INNER, CornerKind.OUTER):
            inner, outer = self._solve_antidiagonal(c)
            return inner if kind == CornerKind.INNER else outer
        else:
            raise ValueError("Invalid corner kind")

    def _solve_diagonal(self, c):
        # 16 a^3 - 8 c a^2 - 1 = 0 has exactly one positive root
        def f(t):
            return 16.0 * t ** 3 - 8.0 * c * t ** 2 - 1.0
        hi = max(0.5, c / 2.0 + 1.0)
        return brentq(f, 0.0, hi, xtol=1e-15, maxiter=200)

    def _solve_antidiagonal(self, c):
        # 16 b^3 + 8 c b^2 + 1 = 0; minimum at t* = -c/3 with value 8c^3/27 + 1
        if c > CRITICAL_ENERGY:
            raise DomainError(f"No bounded component above the critical energy (c={c})")

        def f(t):
            return 16.0 * t ** 3 + 8.0 * c * t ** 2 + 1.0

        t_star = -c / 3.0
        f_min = 8.0 * c ** 3 / 27.0 + 1.0
        if f_min >= 0.0:
            # (b - 1/2)^2 (16 b + 4): double root
            return t_star, t_star
        inner = brentq(f, 0.0, t_star, xtol=1e-15, maxiter=200)
        outer = brentq(f, t_star, -c / 2.0 + 1.0, xtol=1e-15, maxiter=200)
        return inner, outer

    # The cubic p_K(H) = 1 + 2H(K - H)^2

    def solve_p_cubic(self, K, double_root_tol=1e-9):
        """
        Real roots of p_K(H) = 1 + 2H(K - H)^2, ascending, with multiplicity.

        Args:
            K (float): Jacobi energy
            double_root_tol (float): Discriminant tolerance for a double root

        Returns:
            tuple: Roots R1 <= R2 <= R3, or (R1,) when only one is real
        """
        def p(H):
            return 1.0 + 2.0 * H * (K - H) ** 2

        disc = -32.0 * K ** 3 - 108.0
        if abs(disc) <= double_root_tol:
            # p'_K = 2(3H - K)(H - K); the double root is the critical point where p vanishes
            double = min((K / 3.0, K), key=lambda H: abs(p(H)))
            simple = 2.0 * K - 2.0 * double
            return tuple(sorted((simple, double, double)))
        if disc > 0.0:
            # K < -3/2: local max p(K) = 1, local min p(K/3) < 0, all roots negative
            brackets = ((2.0 * K, K), (K, K / 3.0), (K / 3.0, 0.0))
            return tuple(brentq(p, lo, hi, xtol=1e-15, maxiter=200) for lo, hi in brackets)
        lo = min(-1.0, K - 1.0)
        return (brentq(p, lo, 0.0, xtol=1e-15, maxiter=200),)

    # Inverse Ligon-Schaaf angle

    def solve_angle(self, x3, w3):
        """
        Solve phi = x3 sin(phi) + w3 cos(phi).

        Args:
            x3 (float): Third component of the sphere position
            w3 (float): Third component of -y / nu

        Returns:
            float: The angle phi
        """
        amplitude = math.hypot(x3, w3)
        if amplitude >= 1.0:
            raise NumericFailure("Angle equation has no unique root (amplitude >= 1)")

        def f(phi):
            return phi - x3 * math.sin(phi) - w3 * math.cos(phi)

        bound = amplitude + 1.0
        return brentq(f, -bound, bound, xtol=1e-15, maxiter=200)
