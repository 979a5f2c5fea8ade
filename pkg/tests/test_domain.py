import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import TWO_PI, central_diff, grad_fd
from rotorsym.domain import (
    DiscreteLoop,
    DriftProfile,
    DriftTerm,
    FourierProfile,
    GradientDrift,
    LoopSizeError,
    Monomial,
    PhaseState,
    PolynomialSeparable,
    QuadraticIsotropic,
    RadialDrift,
    Rotational,
    ScalarSum,
    rotate_quarter,
)

coeff = st.floats(-3.0, 3.0, allow_nan=False)
profiles = st.builds(
    FourierProfile,
    coeff,
    st.lists(coeff, max_size=3).map(tuple),
    st.lists(coeff, max_size=3).map(tuple),
)
times = st.floats(-5.0, 5.0, allow_nan=False)


def naive_profile(g, t):
    """Direct sum, written independently of the class."""
    out = g.c0
    for k, a in enumerate(g.cos_coeffs, start=1):
        out += a * math.cos(TWO_PI * k * t)
    for k, b in enumerate(g.sin_coeffs, start=1):
        out += b * math.sin(TWO_PI * k * t)
    return out


# --- FourierProfile ---------------------------------------------------------


def test_constant_profile_values():
    g = FourierProfile(TWO_PI)
    assert g(0.25) == TWO_PI
    assert g.derivative(0.25) == 0.0
    assert g.antiderivative(0.25) == pytest.approx(math.pi / 2, abs=1e-15)


def test_sine_profile_values():
    g = FourierProfile(0.0, (), (1.0,))
    assert g(0.25) == pytest.approx(1.0, abs=1e-15)
    assert g.derivative(0.25) == pytest.approx(0.0, abs=1e-14)
    assert g.antiderivative(0.25) == pytest.approx(1.0 / TWO_PI, abs=1e-15)


def test_zero_profile_is_zero_everywhere():
    g = FourierProfile()
    for t in (-1.3, 0.0, 0.7, 11.0):
        assert g(t) == 0.0 and g.derivative(t) == 0.0 and g.antiderivative(t) == 0.0
    assert g.is_zero


def test_scalar_and_array_paths_agree():
    g = FourierProfile(0.3, (1.0, -2.0), (0.5,))
    t = np.linspace(-2, 2, 41)
    for kind in ("__call__", "derivative", "antiderivative"):
        arr = getattr(g, kind)(t)
        scal = np.array([getattr(g, kind)(float(s)) for s in t])
        assert np.allclose(arr, scal, atol=1e-13, rtol=0)


@given(profiles, times)
def test_profile_matches_direct_sum(g, t):
    assert g(t) == pytest.approx(naive_profile(g, t), abs=1e-12)


@given(profiles, times)
def test_profile_periodic(g, t):
    assert abs(g(t + 1.0) - g(t)) <= 1e-12 * (1 + abs(t))


@given(profiles, times)
def test_profile_derivative_matches_central_differences(g, t):
    fd = central_diff(g, t)
    scale = 1.0 + sum(abs(c) for c in g.cos_coeffs + g.sin_coeffs) * 2 * TWO_PI
    assert abs(g.derivative(t) - fd) <= 1e-6 * scale


@given(profiles, times)
def test_antiderivative_increment_is_mean(g, t):
    assert g.antiderivative(t + 1.0) - g.antiderivative(t) == pytest.approx(g.c0, abs=1e-11)


@given(profiles, times)
def test_antiderivative_differentiates_back(g, t):
    assert central_diff(g.antiderivative, t) == pytest.approx(g(t), abs=1e-6)


@given(profiles, profiles, times)
@settings(max_examples=50)
def test_product_expansion(f, g, t):
    assert (f * g)(t) == pytest.approx(f(t) * g(t), abs=1e-10)


def test_square_of_sine():
    # sin^2(2 pi t) = 1/2 - cos(4 pi t)/2
    sq = FourierProfile(0.0, (), (1.0,)).square()
    assert sq.c0 == pytest.approx(0.5)
    assert sq.cos_coeffs == pytest.approx((0.0, -0.5))
    assert sq.sin_coeffs == pytest.approx((0.0, 0.0))


def test_profiles_compare_by_value():
    assert FourierProfile(1.0, (2.0,)) == FourierProfile(1, (2,))


# --- vector potentials ------------------------------------------------------


def test_rotate_quarter():
    assert np.array_equal(rotate_quarter([1.0, 0.0]), [0.0, 1.0])
    assert np.array_equal(rotate_quarter([[0.0, 1.0]]), [[-1.0, 0.0]])


FAMILIES = [
    Rotational(FourierProfile(1.2, (0.4,), (-0.7,))),
    RadialDrift(DriftProfile(rate=FourierProfile(0.5, (1.0,)), linear=0.3, constant=-0.2, quadratic=0.1)),
    GradientDrift((DriftTerm(2, 1, DriftProfile(rate=FourierProfile(0.0, (), (1.0,)), linear=0.5)), DriftTerm(0, 3, DriftProfile(constant=1.0)))),
    Rotational(FourierProfile(1.0)) + RadialDrift(DriftProfile(linear=-1.0)),
]


@pytest.mark.parametrize("pot", FAMILIES, ids=lambda p: type(p).__name__)
def test_potential_derivatives_match_finite_differences(pot):
    rng = np.random.default_rng(0)
    for _ in range(10):
        t = rng.uniform(-2, 2)
        q = rng.uniform(-1.5, 1.5, 2)
        adot = pot.time_derivative(t, q)
        assert np.allclose(adot, central_diff(lambda s: pot.value(s, q), t), atol=1e-6 * (1 + np.abs(adot).max()))
        jac = grad_fd(lambda x: pot.value(t, x), q)
        assert np.allclose(pot.jacobian(t, q), jac, atol=1e-6 * (1 + np.abs(jac).max()))
        assert pot.curl(t, q) == pytest.approx(jac[1, 0] - jac[0, 1], abs=1e-6 * (1 + np.abs(jac).max()))
        v = rng.standard_normal(2)
        assert np.allclose(pot.jacobian_t_apply(t, q, v), pot.jacobian(t, q).T @ v, atol=1e-12)


@pytest.mark.parametrize("pot", FAMILIES, ids=lambda p: type(p).__name__)
def test_potential_batching(pot):
    rng = np.random.default_rng(1)
    t = rng.uniform(-1, 1, 5)
    q = rng.uniform(-1, 1, (5, 2))
    batched = pot.value(t, q)
    single = np.array([pot.value(t[i], q[i]) for i in range(5)])
    assert np.allclose(batched, single, atol=1e-14)
    assert pot.jacobian(t, q).shape == (5, 2, 2)
    assert np.shape(pot.curl(t, q)) == (5,)


def test_radial_drift_is_curl_free():
    pot = RadialDrift(DriftProfile(linear=2.0, quadratic=-1.0))
    q = np.random.default_rng(2).uniform(-2, 2, (20, 2))
    assert np.all(pot.curl(0.7, q) == 0.0)


def test_merry_go_round_curl_is_twice_omega():
    pot = Rotational(FourierProfile(TWO_PI))
    assert pot.curl(0.3, [0.2, -5.0]) == pytest.approx(2 * TWO_PI)


# --- scalar potentials ------------------------------------------------------

SCALARS = [
    QuadraticIsotropic(FourierProfile(2.0, (1.0,))),
    PolynomialSeparable((Monomial(3, 0, FourierProfile(1.0)), Monomial(1, 2, FourierProfile(0.0, (), (2.0,))), Monomial(0, 0, FourierProfile(4.0)))),
    ScalarSum((QuadraticIsotropic(FourierProfile(1.0)), PolynomialSeparable((Monomial(0, 4, FourierProfile(0.5)),)))),
]


@pytest.mark.parametrize("phi", SCALARS, ids=lambda p: type(p).__name__)
def test_scalar_gradient_matches_finite_differences(phi):
    rng = np.random.default_rng(3)
    for _ in range(10):
        t = rng.uniform(-2, 2)
        q = rng.uniform(-1.5, 1.5, 2)
        fd = grad_fd(lambda x: phi.value(t, x), q)
        assert np.allclose(phi.gradient(t, q), fd, atol=1e-6 * (1 + np.abs(fd).max()))
        assert phi.value(t + 1.0, q) == pytest.approx(phi.value(t, q), abs=1e-12)


@pytest.mark.parametrize("phi", SCALARS, ids=lambda p: type(p).__name__)
def test_integrated_gradient_is_time_primitive(phi):
    drift = phi.integrated_gradient()
    rng = np.random.default_rng(4)
    q = rng.uniform(-1, 1, 2)
    assert np.allclose(drift.value(0.0, q), 0.0, atol=1e-15)
    for t in rng.uniform(-2, 2, 5):
        assert np.allclose(drift.time_derivative(t, q), phi.gradient(t, q), atol=1e-12)


def test_quadratic_isotropic_gradient_hand_value():
    phi = QuadraticIsotropic(FourierProfile(TWO_PI**2))
    assert np.allclose(phi.gradient(0.0, [1.0, 0.0]), [-TWO_PI**2, 0.0])
    assert phi.value(0.0, [1.0, 0.0]) == pytest.approx(-0.5 * TWO_PI**2)


# --- states and loops -------------------------------------------------------


def test_phase_state_roundtrip_and_validation():
    s = PhaseState.from_array(0.5, [1, 2, 3, 4])
    assert np.array_equal(s.as_array(), [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        PhaseState(0.0, (1.0, float("nan")), (0.0, 0.0))


def test_loop_minimum_size():
    DiscreteLoop(np.zeros((8, 2)))
    with pytest.raises(LoopSizeError):
        DiscreteLoop(np.zeros((7, 2)))


def test_loop_shapes_and_immutability():
    loop = DiscreteLoop(np.zeros((16, 4)))
    assert loop.is_phase and loop.n == 16
    assert np.allclose(loop.times, np.arange(16) / 16)
    with pytest.raises(ValueError):
        loop.samples[0, 0] = 1.0
    with pytest.raises(ValueError):
        DiscreteLoop(np.zeros((16, 3)))
    with pytest.raises(ValueError):
        DiscreteLoop(np.zeros((16, 2))).p
