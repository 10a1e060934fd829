import numpy as np
import pytest

from phase_space import (DomainError, FlowStatus, OscPoint, PhasePoint, SpherePoint, Trajectory,
                         complex_of, vector_of)


def test_phase_point_round_trips_flat_array():
    pt = PhasePoint.from_array([1.0, 2.0, 3.0, 4.0])
    assert pt.q.tolist() == [1.0, 2.0]
    assert pt.p.tolist() == [3.0, 4.0]
    assert pt.as_array().tolist() == [1.0, 2.0, 3.0, 4.0]
    assert pt.radius == pytest.approx(np.sqrt(5.0))


def test_collision_point_is_rejected():
    with pytest.raises(DomainError):
        PhasePoint([0.0, 0.0], [1.0, 0.0]).require_noncollision()


def test_sphere_point_membership():
    good = SpherePoint([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0])
    assert good.constraint_residuals() == (0.0, 0.0)
    assert good.in_t_minus()

    pole = SpherePoint([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    assert pole.is_north_pole()
    assert not pole.in_t_minus()

    zero_fibre = SpherePoint([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    assert not zero_fibre.in_t_minus()

    off_sphere = SpherePoint([2.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    assert not off_sphere.in_t_minus()


def test_points_compare_by_value():
    assert PhasePoint([1, 0], [0, 1]) == PhasePoint([1.0, 0.0], [0.0, 1.0])
    assert PhasePoint([1, 0], [0, 1]) != PhasePoint([1, 0], [0, -1])
    assert SpherePoint([0, 1, 0], [-1, 0, 0]) == SpherePoint([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0])
    assert SpherePoint([0, 1, 0], [-1, 0, 0]) != SpherePoint([0, 1, 0], [1, 0, 0])
    assert PhasePoint([1, 0], [0, 1]) != (1, 0, 0, 1)


def test_osc_point_negation_and_array():
    z = OscPoint(1 + 2j, -3 + 0.5j)
    assert z.as_array().tolist() == [1.0, 2.0, -3.0, 0.5]
    assert (-z).u == -1 - 2j
    assert OscPoint.from_array(z.as_array()) == z


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([], [])
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [PhasePoint([1, 0], [0, 1])] * 2)

    traj = Trajectory([0.0, 1.0], [PhasePoint([1, 0], [0, 1]), PhasePoint([0, 1], [-1, 0])])
    assert len(traj) == 2
    assert traj.status == FlowStatus.COMPLETE
    assert not traj.truncated
    assert traj.end.q.tolist() == [0.0, 1.0]


def test_complex_vector_conversion():
    assert complex_of([1.5, -2.0]) == complex(1.5, -2.0)
    assert vector_of(3 - 4j).tolist() == [3.0, -4.0]
