import math
from fractions import Fraction

import numpy as np
import pytest

import dynamics
import toric_domain as td
from phase_space import DomainError, OscPoint
from toric_domain import Component, MomentPair, QPair


def test_cone_and_quadrant_validation():
    with pytest.raises(DomainError):
        MomentPair(0.5, 0.6)
    with pytest.raises(DomainError):
        QPair(-0.1, 1.0)
    assert MomentPair(0.5, -0.5).mu2 == -0.5


def test_moment_maps():
    mp = td.moment_mu(OscPoint(1 + 1j, 2j))
    assert mp.mu1 == pytest.approx(3.0)
    assert mp.mu2 == pytest.approx(2.0)
    qp = td.moment_nu(1j, [1.0, 1.0])
    assert qp.nu1 == pytest.approx(math.pi)
    assert qp.nu2 == pytest.approx(2 * math.pi)


def test_rotation_round_trip():
    mp = MomentPair(0.8, -0.3)
    back = td.rotate_to_mu(td.unrotate(mp))
    assert back.mu1 == pytest.approx(0.8, abs=1e-15)
    assert back.mu2 == pytest.approx(-0.3, abs=1e-15)
    assert td.rotate_to_mu(QPair(math.pi, 3 * math.pi)).mu2 == pytest.approx(1.0)


def test_square_commutes(rng):
    for _ in range(50):
        z1 = complex(*rng.normal(size=2))
        z2 = complex(*rng.normal(size=2))
        assert td.diagram_residual(z1, z2) < 1e-12


def test_singular_point_at_critical_energy():
    assert td.ktilde(MomentPair(0.5, -0.5)) == -1.5


def test_ktilde_needs_positive_mu1():
    with pytest.raises(DomainError):
        td.ktilde(MomentPair(0.0, 0.0))


@pytest.mark.parametrize("c", [-3.0, -1.5, -0.2])
@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_boundary_graph_is_level_curve(c, t):
    g = td.boundary_g(c, t)
    assert -1.0 / (8.0 * t * t) + 2.0 * g == pytest.approx(c, abs=1e-12)
    if abs(g) <= t:
        assert td.ktilde(MomentPair(t, g)) == pytest.approx(c, abs=1e-12)


def test_boundary_graph_domain():
    with pytest.raises(DomainError):
        td.boundary_g(-2.0, 0.0)


def test_corners():
    cs = td.corners(-1.5)
    assert (cs.a, cs.b, cs.b_u) == pytest.approx((0.25, 0.5, 0.5), abs=1e-12)
    cs = td.corners(-2.0)
    assert cs.a == pytest.approx(0.2258, abs=1e-4)
    assert cs.b == pytest.approx(0.2985, abs=1e-4)
    assert cs.b_u == pytest.approx(0.92732, abs=1e-5)
    assert td.boundary_g(-2.0, cs.a) == pytest.approx(cs.a, abs=1e-12)
    assert td.boundary_g(-2.0, cs.b) == pytest.approx(-cs.b, abs=1e-12)
    with pytest.raises(DomainError):
        td.corners(-1.0)


def test_profile_ends_on_the_cone():
    prof = td.profile(-2.0, 201)
    assert prof.component == Component.BOUNDED
    assert len(prof.samples) == 201
    assert prof.t[0] == prof.a and prof.t[-1] == prof.b
    assert prof.g[0] == pytest.approx(prof.a, abs=1e-12)
    assert prof.g[-1] == pytest.approx(-prof.b, abs=1e-12)
    outline = prof.outline()
    assert np.array_equal(outline[0], outline[-1])


@pytest.mark.parametrize("c", [-1.5, -1.7, -2.0, -3.0])
def test_bounded_component_is_special(c):
    report = td.verify_special(td.profile(c, 201))
    assert report.passed
    assert report.convexity_min >= -1e-12
    assert report.slope_max <= -1.0 + 1e-9
    assert report.secant_slope_max <= -1.0 + 1e-9
    assert report.cone_excess <= 1e-12
    assert max(report.endpoint_residuals) < 1e-9
    assert -1.0 - 1e-9 <= report.f_slope_min <= report.f_slope_max <= 1e-9


def test_steepest_slope_only_touches_minus_one_at_critical_energy():
    assert td.verify_special(td.profile(-1.5, 51)).slope_max == pytest.approx(-1.0, abs=1e-12)
    assert td.verify_special(td.profile(-2.0, 51)).slope_max < -1.0 - 1e-3


@pytest.mark.parametrize("shift", [0.003, -0.05])
def test_shifted_profile_fails_without_raising(shift):
    prof = td.profile(-2.0, 51)
    moved = td.DomainProfile(c=prof.c, a=prof.a, b=prof.b, b_u=prof.b_u,
                             samples=np.column_stack([prof.t, prof.g + shift]),
                             component=Component.BOUNDED)
    report = td.verify_special(moved)
    assert not report.passed
    assert max(report.endpoint_residuals) == pytest.approx(abs(shift), abs=1e-9)


def test_profile_above_critical_energy_is_not_special():
    c = -1.0
    a = td.RootSolver().solve_corner(c, td.CornerKind.DIAGONAL)
    t = np.linspace(a, 0.8, 41)
    injected = td.DomainProfile(c=c, a=a, b=0.8,
                                samples=np.column_stack([t, [td.boundary_g(c, ti) for ti in t]]),
                                component=Component.BOUNDED)
    report = td.verify_special(injected)
    assert not report.passed
    assert report.slope_max > -1.0
    assert report.endpoint_residuals[1] > 0.1


def test_secant_slopes_enter_the_verdict():
    t = np.linspace(0.25, 0.5, 11)
    # concave kink: analytic slopes are fine but the last secant is flatter than -1
    g = np.array([td.boundary_g(-1.5, ti) for ti in t])
    g[-1] = g[-2] - 0.5 * (t[-1] - t[-2])
    report = td.verify_special(td.DomainProfile(c=-1.5, a=0.25, b=0.5, samples=np.column_stack([t, g]),
                                                component=Component.BOUNDED))
    assert report.secant_slope_max > -1.0
    assert not report.passed


def test_profile_arguments():
    with pytest.raises(DomainError):
        td.profile(-2.0, 1)
    with pytest.raises(DomainError):
        td.profile(-1.0, 10)
    with pytest.raises(DomainError):
        td.verify_special(td.unbounded_profile(-2.0, 3.0, 10))


def test_unbounded_profile():
    prof = td.unbounded_profile(-1.5, 2.0, 101)
    assert prof.component == Component.UNBOUNDED
    assert prof.t[0] == pytest.approx(0.5, abs=1e-12)
    assert prof.t[-1] == 2.0
    assert np.all(prof.g <= prof.t)
    with pytest.raises(DomainError):
        td.unbounded_profile(-2.0, 0.5, 10)


def test_connected_profile():
    prof = td.connected_profile(-1.0, 2.0, 101)
    assert prof.component == Component.CONNECTED
    assert prof.b is None
    assert prof.a in prof.t
    assert prof.t[0] == 0.0
    with pytest.raises(DomainError):
        td.connected_profile(-2.0, 2.0, 101)


def test_torus_point_sits_on_level_curve():
    tp = td.torus_point(2, 1, -1.55)
    assert td.ktilde(tp.mp) == pytest.approx(-1.55, abs=1e-12)
    assert tp.slope == Fraction(-2, 1)
    assert td.boundary_slope(tp.mp.mu1) == pytest.approx(float(tp.slope), abs=1e-12)
    with pytest.raises(DomainError):
        td.torus_point(1, 1, -1.55)


@pytest.mark.parametrize("c, mp, expected", [
    (-2.0, MomentPair(0.2, 0.0), Component.BOUNDED),
    (-2.0, MomentPair(1.5, -1.4), Component.UNBOUNDED),
    (-2.0, MomentPair(0.5, 0.4), Component.OUTSIDE),
    (-1.0, MomentPair(0.5, -0.5), Component.CONNECTED),
])
def test_classify_moment(c, mp, expected):
    assert td.classify_moment(c, mp) == expected


@pytest.mark.parametrize("c", [-1.6, -2.0, -3.0])
def test_components_are_separated(c):
    scan = td.component_gap_scan(c, 40)
    assert scan.n_checked == 40 * 40
    assert scan.n_admissible == 0
    assert scan.min_margin > 0.0


def test_gap_scan_needs_separated_components():
    with pytest.raises(DomainError):
        td.component_gap_scan(-1.5, 10)


def test_corner_orbits_are_circular():
    orbits = td.corner_orbits(-2.0)
    assert [o.name for o in orbits] == ['retrograde', 'direct']
    for orbit in orbits:
        assert orbit.circular_residual == pytest.approx(0.0, abs=1e-12)
        bundle = dynamics.energies(orbit.state())
        assert bundle.H == pytest.approx(orbit.H, abs=1e-12)
        assert bundle.L == pytest.approx(orbit.L, abs=1e-12)
        assert bundle.K == pytest.approx(-2.0, abs=1e-12)
        assert dynamics.eccentricity(orbit.state()) == pytest.approx(0.0, abs=1e-12)


def test_no_direct_orbit_above_critical_energy():
    assert [o.name for o in td.corner_orbits(-1.0)] == ['retrograde']
