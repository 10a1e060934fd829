import math

import numpy as np
import pytest

import dynamics
import regularization as reg
from phase_space import DomainError, OscPoint, PhasePoint, SpherePoint, vector_of
from regularization import MapKind

P_MINUS_SAMPLES = [
    PhasePoint([1.0, 0.0], [0.0, 1.0]),
    PhasePoint([1.0, 0.0], [1.0, 0.0]),
    PhasePoint([0.7, -0.4], [0.3, 0.9]),
    PhasePoint([-1.2, 0.5], [-0.2, -0.6]),
    dynamics.kepler_ellipse(-0.45, 0.6, phase=2.0, omega=0.4, sense=-1).state(0.0),
]


@pytest.mark.parametrize("pt, x, y", [
    (PhasePoint([1.0, 0.0], [0.0, 1.0]), (0.0, 1.0, 0.0), (-1.0, 0.0, 0.0)),
    (PhasePoint([1.0, 0.0], [1.0, 0.0]), (math.cos(1), 0.0, math.sin(1)), (math.sin(1), 0.0, -math.cos(1))),
    (PhasePoint([1.0, 0.0], [0.0, -1.0]), (0.0, -1.0, 0.0), (-1.0, 0.0, 0.0)),
])
def test_ligon_schaaf_examples(pt, x, y):
    sp = reg.ligon_schaaf(pt)
    assert np.allclose(sp.x, x, atol=1e-15)
    assert np.allclose(sp.y, y, atol=1e-15)


@pytest.mark.parametrize("pt", P_MINUS_SAMPLES)
def test_ligon_schaaf_lands_on_sphere_bundle(pt):
    frame = reg.ls_frame(pt)
    assert frame.orthonormality_residual() < 1e-12
    sp = reg.ligon_schaaf(pt)
    assert sp.in_t_minus(tol=1e-12)
    assert reg.delaunay_energy(sp) == pytest.approx(dynamics.energies(pt).H, abs=1e-12)


def test_ligon_schaaf_needs_negative_energy():
    with pytest.raises(DomainError):
        reg.ligon_schaaf(PhasePoint([1.0, 0.0], [0.0, 2.0]))


@pytest.mark.parametrize("pt", P_MINUS_SAMPLES)
def test_momentum_maps_agree(pt):
    plane = reg.so3_moments(pt)
    sphere = reg.sphere_moments_in_plane_frame(reg.ligon_schaaf(pt))
    assert np.allclose(plane, sphere, atol=1e-9)
    L, eta1, eta2 = plane
    assert np.allclose(reg.so3_moments(reg.ligon_schaaf(pt)), [eta2, -eta1, L], atol=1e-9)


# the radial sample (L = 0) has no unique preimage angle
@pytest.mark.parametrize("pt", [P_MINUS_SAMPLES[0]] + P_MINUS_SAMPLES[2:])
def test_ligon_schaaf_inverse(pt):
    back = reg.ligon_schaaf_inverse(reg.ligon_schaaf(pt))
    assert np.allclose(back.as_array(), pt.as_array(), atol=1e-9)


def test_inverse_rejects_points_outside_image():
    with pytest.raises(DomainError):
        reg.ligon_schaaf_inverse(SpherePoint([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        reg.ligon_schaaf_inverse(SpherePoint([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]))


def test_so3_action_preserves_energy_and_rotates_moments():
    pt = P_MINUS_SAMPLES[2]
    angle = 0.3
    rotation = np.array([[1.0, 0.0, 0.0],
                         [0.0, math.cos(angle), -math.sin(angle)],
                         [0.0, math.sin(angle), math.cos(angle)]])
    moved = reg.so3_act(pt, rotation)
    assert dynamics.energies(moved).H == pytest.approx(dynamics.energies(pt).H, abs=1e-9)
    sp = reg.ligon_schaaf(pt)
    assert np.allclose(reg.so3_moments(reg.ligon_schaaf(moved)),
                       rotation @ np.cross(sp.x, sp.y), atol=1e-9)


def test_so3_action_rejects_reflections():
    with pytest.raises(DomainError):
        reg.so3_act(P_MINUS_SAMPLES[0], np.diag([1.0, 1.0, -1.0]))


def test_stereographic_round_trip(rng):
    for _ in range(20):
        pt = PhasePoint(rng.normal(size=2), rng.normal(size=2))
        sp = reg.stereo_lift(pt)
        norm_res, dot_res = sp.constraint_residuals()
        assert abs(norm_res) < 1e-14 and abs(dot_res) < 1e-13
        assert np.allclose(reg.stereo_drop(sp).as_array(), pt.as_array(), atol=1e-12)
        assert reg.chart_delaunay_energy(pt) == pytest.approx(reg.delaunay_energy(sp), rel=1e-12)


def test_north_pole_is_not_in_chart():
    with pytest.raises(DomainError):
        reg.stereo_drop(SpherePoint([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]))


def test_chart_flow_needs_momentum():
    with pytest.raises(DomainError):
        reg.chart_flow(PhasePoint([0.5, 0.5], [0.0, 0.0]), 1.0, 0.1)


def test_chart_energy_is_conserved():
    pt = PhasePoint([0.4, -0.3], [0.8, 0.5])
    traj = reg.chart_flow(pt, 3.0, 0.25, rotating=True)
    for state in traj.states:
        assert reg.chart_rkp_energy(state) == pytest.approx(reg.chart_rkp_energy(pt), abs=1e-9)


@pytest.mark.parametrize("pt", [
    PhasePoint([1.0, 0.0], [0.0, 1.0]),
    dynamics.kepler_ellipse(-0.5, 0.3, phase=0.5).state(0.0),
    dynamics.kepler_ellipse(-0.7, 0.5, omega=1.0, sense=-1).state(0.0),
])
def test_conjugacy(pt):
    assert reg.conjugacy_residual(pt, 0.0) == 0.0
    assert reg.conjugacy_residual(pt, 1.0) < 1e-5


def test_levi_civita_double_cover(rng):
    for _ in range(20):
        osc = OscPoint(complex(*rng.normal(size=2)), complex(*(rng.normal(size=2) + 0.5)))
        assert reg.levi_civita(-osc) == reg.levi_civita(osc)
        pt = reg.levi_civita(osc)
        for branch in (1, -1):
            lifted = reg.lc_lift(pt, branch)
            assert np.allclose(reg.levi_civita(lifted).as_array(), pt.as_array(), atol=1e-12)


def test_levi_civita_domain():
    with pytest.raises(DomainError):
        reg.levi_civita(OscPoint(1.0, 0.0))
    with pytest.raises(DomainError):
        reg.lc_lift(PhasePoint([1.0, 0.0], [0.0, 0.0]))
    with pytest.raises(DomainError):
        reg.lc_lift(PhasePoint([1.0, 0.0], [0.0, 1.0]), branch=2)


def test_chart_pullback(rng):
    for _ in range(20):
        u = complex(*rng.normal(size=2))
        v = complex(*(rng.normal(size=2) + 0.5))
        osc = OscPoint(u, v)
        mu1 = 0.5 * (abs(u) ** 2 + abs(v) ** 2)
        mu2 = u.real * v.imag - u.imag * v.real
        expected = -1.0 / (8.0 * mu1 ** 2) + 2.0 * mu2
        assert reg.chart_rkp_energy(reg.levi_civita(osc)) == pytest.approx(expected, abs=1e-10)


def test_regularized_kepler():
    osc = OscPoint(0.6 + 0.2j, 0.5 - 0.4j)
    c = -1.7
    swapped = PhasePoint(vector_of(2 * osc.v ** 2), vector_of(osc.u / osc.v.conjugate()))
    assert reg.regularized_kepler(osc, c) == pytest.approx(dynamics.energies(swapped).H - c, abs=1e-12)
    assert reg.regularized_kepler_scaled(osc, c) == pytest.approx(
        abs(osc.v) ** 2 * reg.regularized_kepler(osc, c), abs=1e-12)


def test_scaled_level_is_an_ellipsoid():
    c = -2.0
    # |u|^2 + 2|c||v|^2 = 1
    osc = OscPoint(0.6, 0.4j)
    assert reg.regularized_kepler_scaled(osc, c) == pytest.approx(0.0, abs=1e-15)


def test_linear_s_inverse_and_symplectic():
    z1, z2 = 0.3 - 1.1j, -0.7 + 0.2j
    osc = reg.linear_S(z1, z2)
    assert reg.linear_S_inverse(osc) == pytest.approx((z1, z2), abs=1e-15)
    assert reg.linear_S([0.3, -1.1], [-0.7, 0.2]) == osc
    assert reg.symplectic_residual(MapKind.LINEAR_S, (z1, z2)) < 1e-14
    assert np.array_equal(reg.jacobian(MapKind.LINEAR_S, (z1, z2)), reg.LINEAR_S_MATRIX)


@pytest.mark.parametrize("map_kind, point", [
    (MapKind.STEREO_LIFT, PhasePoint([0.4, -0.8], [0.5, 0.3])),
    (MapKind.LIGON_SCHAAF, PhasePoint([0.7, -0.4], [0.3, 0.9])),
    (MapKind.LEVI_CIVITA, OscPoint(0.4 + 0.3j, 0.8 - 0.6j)),
])
def test_maps_are_symplectic(map_kind, point):
    assert reg.symplectic_residual(map_kind, point) < 1e-6


def test_symplectic_step_must_be_positive():
    with pytest.raises(DomainError):
        reg.symplectic_residual(MapKind.STEREO_LIFT, PhasePoint([0.1, 0.2], [0.3, 0.4]), h=0.0)
