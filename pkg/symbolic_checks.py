"""
symbolic_checks.py - Exact identities behind the numerical checks

This module keeps a catalogue of algebraic identities of the toolkit as sympy
expressions that must simplify to zero: the Poisson table of the Kepler
problem, the Levi-Civita pullback of the rotating Kepler Hamiltonian, the frame
identities of the Ligon-Schaaf map, the corner cubics and the discriminant of
p_K. The numerical verification suite runs them as the 'symbolic' group.
"""

import logging
from dataclasses import dataclass

import sympy as sp

logger = logging.getLogger(__name__)

q1, q2, p1, p2 = sp.symbols("q1 q2 p1 p2", real=True)
u1, u2, v1, v2 = sp.symbols("u1 u2 v1 v2", real=True)
t, c, K, H_ = sp.symbols("t c K H", real=True)
k, l = sp.symbols("k l", positive=True)
R = sp.Symbol("R", positive=True)

r = sp.sqrt(q1 ** 2 + q2 ** 2)
H = (p1 ** 2 + p2 ** 2) / 2 - 1 / r
L = q1 * p2 - q2 * p1
A1 = p2 * L - q1 / r
A2 = -p1 * L - q2 / r


def poisson(f, g):
    """{f, g} = sum df/dq dg/dp - df/dp dg/dq."""
    return sum(sp.diff(f, q) * sp.diff(g, p) - sp.diff(f, p) * sp.diff(g, q)
               for q, p in ((q1, p1), (q2, p2)))


def _chart_pullback():
    # q = u / conj(v) = u v / |v|^2 and p = 2 v^2
    v_sq = v1 ** 2 + v2 ** 2
    Q1 = (u1 * v1 - u2 * v2) / v_sq
    Q2 = (u1 * v2 + u2 * v1) / v_sq
    P1 = 2 * (v1 ** 2 - v2 ** 2)
    P2 = 4 * v1 * v2
    rho = Q1 ** 2 + Q2 ** 2 + 1
    chart_k = -2 / (rho ** 2 * (P1 ** 2 + P2 ** 2)) + Q1 * P2 - Q2 * P1
    mu1 = (u1 ** 2 + u2 ** 2 + v1 ** 2 + v2 ** 2) / 2
    mu2 = u1 * v2 - u2 * v1
    return chart_k - (-1 / (8 * mu1 ** 2) + 2 * mu2)


def _frame_norms():
    # 1/nu enters only squared, as -2H
    w = sp.Symbol("w", positive=True)
    s = q1 * p1 + q2 * p2
    p_sq = p1 ** 2 + p2 ** 2
    calA = (q1 / r - s * p1, q2 / r - s * p2, s * w)
    calB = (r * p1 * w, r * p2 * w, r * p_sq - 1)
    norm_a = sum(x ** 2 for x in calA) - 1
    norm_b = sum(x ** 2 for x in calB) - 1
    cross = sum(x * y for x, y in zip(calA, calB))
    return [sp.expand(expr).subs(w ** 2, -2 * H) for expr in (norm_a, norm_b, cross)]


def _stereo_constraints():
    rho = q1 ** 2 + q2 ** 2 + 1
    s = q1 * p1 + q2 * p2
    x = (2 * q1 / rho, 2 * q2 / rho, (q1 ** 2 + q2 ** 2 - 1) / rho)
    y = (rho * p1 / 2 - s * q1, rho * p2 / 2 - s * q2, s)
    return [sum(xi ** 2 for xi in x) - 1, sum(xi * yi for xi, yi in zip(x, y))]


def _linear_s():
    half = 1 / sp.sqrt(2)
    S = sp.Matrix([[0, half, 0, -half],
                   [half, 0, half, 0],
                   [-half, 0, half, 0],
                   [0, half, 0, half]])
    omega_target = sp.Matrix([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
    omega_source = sp.Matrix([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    return list(S.T * omega_target * S - omega_source)


def _p_cubic():
    p = 1 + 2 * H_ * (K - H_) ** 2
    return [sp.discriminant(p, H_) - (-32 * K ** 3 - 108),
            p.subs(K, sp.Rational(-3, 2)) - 2 * (H_ + 2) * (H_ + sp.Rational(1, 2)) ** 2]


IDENTITIES = {
    "poisson_H_L": lambda: [poisson(H, L)],
    "poisson_A_L": lambda: [poisson(A1, L) + A2, poisson(A2, L) - A1],
    "poisson_A1_A2": lambda: [poisson(A1, A2) + 2 * H * L],
    "runge_lenz_norm": lambda: [A1 ** 2 + A2 ** 2 - (1 + 2 * H * L ** 2)],
    "ls_frame": _frame_norms,
    "stereo_constraints": _stereo_constraints,
    "chart_pullback": lambda: [_chart_pullback()],
    "linear_S": _linear_s,
    "corner_cubic_critical": lambda: [
        16 * t ** 3 - 12 * t ** 2 + 1 - (t - sp.Rational(1, 2)) ** 2 * (16 * t + 4)],
    "level_curve": lambda: [(-1 / (8 * t ** 2) + 2 * (c / 2 + 1 / (16 * t ** 2))) - c],
    "torus_slope": lambda: [sp.diff(c / 2 + 1 / (16 * t ** 2), t).subs(t, (l / k) ** sp.Rational(1, 3) / 2) + k / l],
    "corner_circular": lambda: [1 + 2 * (-1 / (8 * t ** 2)) * (2 * t) ** 2],
    "p_cubic": _p_cubic,
}


def _reduce(expr):
    """Numerator of expr with |q| renamed R, reduced modulo R^2 - q1^2 - q2^2."""
    expr = expr.subs(q1 ** 2 + q2 ** 2, R ** 2)
    numerator, _ = sp.fraction(sp.together(expr))
    return sp.expand(sp.rem(sp.expand(numerator), R ** 2 - q1 ** 2 - q2 ** 2, R))


@dataclass(frozen=True)
class SymbolicResult:
    name: str
    passed: bool
    residual: str


def check_identity(name):
    """
    Simplify each expression of a catalogued identity.

    Args:
        name (str): Key of IDENTITIES

    Returns:
        SymbolicResult: passed when every expression simplifies to 0
    """
    if name not in IDENTITIES:
        raise ValueError(f"Unknown identity {name!r}")
    leftovers = [_reduce(expr) for expr in IDENTITIES[name]()]
    nonzero = [expr for expr in leftovers if expr != 0]
    result = SymbolicResult(name=name, passed=not nonzero,
                            residual=str(nonzero[0]) if nonzero else "0")
    logger.debug("Identity %s: %s", name, "ok" if result.passed else result.residual)
    return result


def run_symbolic_checks():
    return [check_identity(name) for name in sorted(IDENTITIES)]
