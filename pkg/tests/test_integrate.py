import math

import numpy as np
import pytest

from helpers import TWO_PI, rotating_frame_solution
from rotorsym import fields
from rotorsym.domain import FourierProfile, Monomial, PolynomialSeparable, ProblemSpec
from rotorsym.integrate import (
    DivergenceError,
    Picture,
    euler_flow_pullback_defect,
    euler_flow_symplecticity_defect,
    flow_jacobian,
    integrate,
    rk4,
    time_one_map,
)
from rotorsym.transforms import eliminate_scalar, make_merry_go_round

UNIFORM = make_merry_go_round(FourierProfile(TWO_PI))
PULSING = make_merry_go_round(FourierProfile(TWO_PI, (), (1.0,)))
FREE = ProblemSpec()


def test_rk4_scalar_exponential():
    y = rk4(lambda t, y: y, np.array([1.0]), 0.0, 1.0, 64, keep=False)
    assert y[0] == pytest.approx(math.e, rel=1e-8)


def test_rk4_rejects_bad_arguments():
    with pytest.raises(ValueError):
        rk4(lambda t, y: y, [1.0], 0.0, 1.0, 0)
    with pytest.raises(ValueError):
        rk4(lambda t, y: y, [1.0], 1.0, 1.0, 4)


def test_divergence_reports_step():
    blowup = ProblemSpec(scalar=PolynomialSeparable((Monomial(4, 0, FourierProfile(-1.0)),)))
    with pytest.raises(DivergenceError) as err:
        integrate(blowup, "force", [10.0, 0.0, 0.0, 0.0], 0.0, 1.0, 64)
    assert err.value.step >= 1


def test_quarter_turn():
    traj = integrate(UNIFORM, "canonical", [1.0, 0.0, 0.0, 0.0], 0.0, 0.25, 1024)
    assert np.abs(traj.final - [0.0, -1.0, 0.0, 0.0]).max() < 1e-9


@pytest.mark.parametrize("picture", ["canonical", "twisted", "force"])
def test_free_particle_straight_line(picture):
    traj = integrate(FREE, picture, [0.0, 0.0, 1.0, 0.0], 0.0, 1.0, 16)
    assert np.allclose(traj.q, np.stack([traj.times, 0 * traj.times], -1), atol=1e-15)


def test_twisted_picture_returns_after_one_period():
    z1 = time_one_map(UNIFORM, "twisted", [1.0, 0.0, 0.0, -TWO_PI])
    assert np.abs(z1[:2] - [1.0, 0.0]).max() < 1e-8


def test_time_one_map_examples():
    assert np.abs(time_one_map(UNIFORM, "canonical", [1.0, 0.0, 0.0, 0.0]) - [1, 0, 0, 0]).max() < 1e-8
    assert np.array_equal(time_one_map(FREE, "canonical", np.zeros(4)), np.zeros(4))
    assert np.allclose(time_one_map(FREE, "canonical", [0.0, 0.0, 1.0, 0.0]), [1.0, 0.0, 1.0, 0.0], atol=1e-14)


def test_closed_form_rotating_frame_with_drift():
    rng = np.random.default_rng(0)
    q0, p0 = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    traj = integrate(UNIFORM, "canonical", np.concatenate([q0, p0]), 0.0, 1.0, 4096)
    for i in (512, 2048, 4096):
        t = traj.times[i]
        q, p = rotating_frame_solution(TWO_PI * t, q0, p0, t)
        assert np.abs(traj.states[i] - np.concatenate([q, p])).max() < 1e-8


def test_closed_form_pulsing_theta():
    omega = PULSING.potential.omega
    z0 = np.array([0.5, 0.2, 0.1, -0.3])
    traj = integrate(PULSING, "canonical", z0, 0.0, 1.0, 4096)
    for i in (1000, 3000):
        t = traj.times[i]
        q, p = rotating_frame_solution(omega.antiderivative(t), z0[:2], z0[2:], t)
        assert np.abs(traj.states[i] - np.concatenate([q, p])).max() < 1e-8


def test_rk4_order_four():
    exact = np.array([1.0, 0.0, 0.0, 0.0])
    errs = [np.abs(time_one_map(UNIFORM, "canonical", exact, n) - exact).max() for n in (64, 128, 256)]
    assert errs[0] / errs[1] >= 12 and errs[1] / errs[2] >= 12


def test_pictures_agree():
    rng = np.random.default_rng(1)
    spec = make_merry_go_round(FourierProfile(1.3, (-2.0, 0.7), (0.4, 2.2)))
    z0 = rng.uniform(-0.5, 0.5, (5, 4))
    q0, p0 = z0[:, :2], z0[:, 2:]
    v0 = p0 - spec.potential.value(0.0, q0)
    canon = integrate(spec, "canonical", z0).states
    force = integrate(spec, "force", np.concatenate([q0, v0], -1)).states
    twisted = integrate(spec, "twisted", np.concatenate([q0, v0], -1)).states
    assert np.abs(canon[..., :2] - force[..., :2]).max() < 1e-7
    assert np.abs(twisted - force).max() < 1e-7
    times = np.linspace(0, 1, canon.shape[0])[:, None]
    assert np.abs(canon[..., 2:] - twisted[..., 2:] - spec.potential.value(times, canon[..., :2])).max() < 1e-7


def test_trajectory_csv_format():
    traj = integrate(FREE, "canonical", [0.0, 0.0, 1.0, 0.0], 0.0, 1.0, 4)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,q1,q2,p1,p2"
    assert lines[1] == "0,0,0,1,0"
    assert lines[-1] == "1,1,0,1,0"
    assert len(lines) == 6
    third = integrate(FREE, "canonical", [0.1, 0.0, 0.0, 0.0], 0.0, 1.0, 3).to_csv().splitlines()[2]
    assert third.split(",")[0] == format(1 / 3, ".17g")


def test_flow_jacobian_examples():
    d = flow_jacobian(FREE, "canonical", [0.3, 0.1, 0.5, -0.2], 1.0, 64)
    expected = np.block([[np.eye(2), np.eye(2)], [np.zeros((2, 2)), np.eye(2)]])
    assert np.allclose(d, expected, atol=1e-12)
    assert np.array_equal(flow_jacobian(PULSING, "canonical", [1.0, 2.0, 3.0, 4.0], 0.0), np.eye(4))


@pytest.mark.parametrize("picture", ["canonical", "twisted", "force"])
def test_flow_jacobian_matches_finite_differences(picture):
    z0 = np.array([0.4, -0.3, 0.2, 0.1])
    d = flow_jacobian(PULSING, picture, z0, 1.0, 1024)
    h = 1e-5
    fd = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd[:, j] = (time_one_map(PULSING, picture, z0 + e, 1024) - time_one_map(PULSING, picture, z0 - e, 1024)) / (2 * h)
    assert np.abs(d - fd).max() < 1e-5


def test_euler_flow_is_vertical_and_exact():
    # the Euler flow moves p by -(A_t - A_0) with q frozen
    z0 = np.array([0.7, -0.2, 0.3, 0.4])
    traj = integrate(PULSING, "euler-flow", z0, 0.0, 0.6, 512)
    assert np.all(traj.q == z0[:2])
    shift = PULSING.potential.value(0.6, z0[:2]) - PULSING.potential.value(0.0, z0[:2])
    assert np.allclose(traj.final[2:], z0[2:] - shift, atol=1e-12)


def test_euler_flow_symplecticity_trivial_and_periodic_cases():
    z0 = [1.0, 0.0, 0.0, 0.0]
    assert euler_flow_symplecticity_defect(UNIFORM, 0.3, z0, 256) == 0.0
    assert euler_flow_symplecticity_defect(PULSING, 1.0, z0) < 1e-6
    assert euler_flow_symplecticity_defect(eliminate_scalar(UNIFORM), 0.5, z0) < 1e-6


def test_euler_flow_carries_current_form_to_initial_form():
    # (phi^t)^* omega_t = omega_0 holds at every t, also where rot A_t != rot A_0
    for t in (0.1, 0.25, 0.6):
        assert euler_flow_pullback_defect(PULSING, t, [1.0, 0.0, 0.0, 0.0], 1024, probe_count=2) < 1e-6


def test_euler_flow_literal_pullback_defect_equals_twice_rot_change():
    # D^T W_0 D - W_t has the rot entry 2 (rot_0 - rot_t), nonzero when omega has changed
    t = 0.25
    defect = euler_flow_symplecticity_defect(PULSING, t, [1.0, 0.0, 0.0, 0.0], 1024)
    rot0 = fields.rot_a(PULSING, 0.0, [1.0, 0.0])
    rott = fields.rot_a(PULSING, t, [1.0, 0.0])
    assert defect == pytest.approx(2 * abs(rott - rot0), rel=1e-9)


def test_picture_enum_values():
    assert {p.value for p in Picture} == {"canonical", "twisted", "force", "euler-flow"}
