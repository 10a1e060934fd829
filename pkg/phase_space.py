"""
phase_space.py - Phase-space types for the rotating Kepler toolkit

This module defines the points every other module passes around: planar
phase-space points, points of the cotangent bundle of the unit sphere, complex
oscillator pairs and sampled trajectories, together with the two error types.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class NumericFailure(RuntimeError):
    """Raised when an iterative solver gives up after all retries."""


class FlowStatus(Enum):
    COMPLETE = 1
    COLLISION = 2


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point (q, p) of the planar phase space, gravitational parameter 1."""
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'q', np.asarray(self.q, dtype=float).reshape(2))
        object.__setattr__(self, 'p', np.asarray(self.p, dtype=float).reshape(2))

    @classmethod
    def from_array(cls, state):
        """Build a point from a flat array (q1, q2, p1, p2)."""
        state = np.asarray(state, dtype=float)
        return cls(state[:2], state[2:4])

    def as_array(self):
        return np.concatenate([self.q, self.p])

    def __eq__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p))

    __hash__ = None

    @property
    def radius(self):
        return float(np.hypot(self.q[0], self.q[1]))

    def require_noncollision(self):
        if self.q[0] == 0.0 and self.q[1] == 0.0:
            raise DomainError("Collision point q = 0 has no potential energy")


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point (x, y) with |x| = 1 and x.y = 0, i.e. a covector on the unit sphere."""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'x', np.asarray(self.x, dtype=float).reshape(3))
        object.__setattr__(self, 'y', np.asarray(self.y, dtype=float).reshape(3))

    @classmethod
    def from_array(cls, state):
        state = np.asarray(state, dtype=float)
        return cls(state[:3], state[3:6])

    def as_array(self):
        return np.concatenate([self.x, self.y])

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return bool(np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    __hash__ = None

    def constraint_residuals(self):
        """Return (|x| - 1, x.y)."""
        return float(np.linalg.norm(self.x) - 1.0), float(np.dot(self.x, self.y))

    def is_north_pole(self):
        return bool(self.x[0] == 0.0 and self.x[1] == 0.0 and self.x[2] == 1.0)

    def in_t_minus(self, tol=1e-10):
        """Membership in T minus the fibre over the north pole."""
        norm_res, dot_res = self.constraint_residuals()
        return (abs(norm_res) <= tol and abs(dot_res) <= tol
                and np.linalg.norm(self.y) > 0.0 and not self.is_north_pole())


@dataclass(frozen=True)
class OscPoint:
    """A complex pair (u, v), stored as complex numbers u1 + i u2 and v1 + i v2."""
    u: complex
    v: complex

    def __post_init__(self):
        object.__setattr__(self, 'u', complex(self.u))
        object.__setattr__(self, 'v', complex(self.v))

    @classmethod
    def from_array(cls, state):
        u1, u2, v1, v2 = (float(s) for s in state)
        return cls(complex(u1, u2), complex(v1, v2))

    def as_array(self):
        return np.array([self.u.real, self.u.imag, self.v.real, self.v.imag])

    def __neg__(self):
        return OscPoint(-self.u, -self.v)


@dataclass
class Trajectory:
    """Sampled solution of a vector field."""
    times: np.ndarray
    states: list
    status: FlowStatus = FlowStatus.COMPLETE
    message: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) == 0 or len(self.times) != len(self.states):
            raise ValueError("Trajectory needs matching, non-empty times and states")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.states)

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    @property
    def truncated(self):
        return self.status == FlowStatus.COLLISION


def complex_of(vec):
    """Read a 2-vector as a complex number."""
    return complex(vec[0], vec[1])


def vector_of(z):
    """Read a complex number as a 2-vector."""
    return np.array([z.real, z.imag])
