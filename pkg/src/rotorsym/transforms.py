"""Gauge transforms: fold the scalar potential into A, fold H into lambda."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .domain import (
    ZERO_SCALAR,
    FourierProfile,
    PhaseOneForm,
    ProblemSpec,
    QuadraticIsotropic,
    Rotational,
)
from .fields import general_euler_vf, hamiltonian_vf_x, euler_vf_y


def make_merry_go_round(omega: FourierProfile) -> ProblemSpec:
    """Rotating frame with angular velocity omega: A = omega J0 q, phi = -omega^2 |q|^2 / 2."""
    return ProblemSpec(Rotational(omega), QuadraticIsotropic(omega.square()), name="merry-go-round")


def eliminate_scalar(spec: ProblemSpec) -> ProblemSpec:
    """Return the spec with vector potential A_t + int_0^t grad(phi_s) ds and phi = 0.

    Raises UnsupportedFamilyError when the scalar family has no closed-form
    time antiderivative of its gradient.
    """
    if spec.scalar.is_zero:
        return spec
    drift = spec.scalar.integrated_gradient()
    name = f"{spec.name}+eliminated" if spec.name else "eliminated"
    return replace(spec, potential=spec.potential + drift, scalar=ZERO_SCALAR, name=name)


def eliminate_hamiltonian(spec: ProblemSpec) -> PhaseOneForm:
    """lambda^H_t = lambda_t + int_0^t dH_s ds for H_t = |p|^2/2 + phi_t.

    dq-coefficients: p + A_t(q) + int_0^t grad(phi_s) ds;  dp-coefficients: t p.
    """
    pot = spec.potential
    drift = None if spec.scalar.is_zero else spec.scalar.integrated_gradient()

    def _tcol(t):
        return np.asarray(t, dtype=float)[..., None]

    def alpha(t, q, p):
        out = p + pot.value(t, q)
        if drift is not None:
            out = out + drift.value(t, q)
        return out

    def beta(t, q, p):
        return _tcol(t) * np.asarray(p, dtype=float)

    def alpha_dot(t, q, p):
        return pot.time_derivative(t, q) + spec.scalar.gradient(t, q) + 0.0 * p

    def beta_dot(t, q, p):
        return np.asarray(p, dtype=float) + 0.0 * _tcol(t)

    def jacobian(t, q, p):
        shape = np.broadcast_shapes(np.shape(t), np.shape(q)[:-1], np.shape(p)[:-1])
        jac = pot.jacobian(t, q)
        if drift is not None:
            jac = jac + drift.jacobian(t, q)
        m = np.zeros(shape + (4, 4))
        m[..., :2, :2] = np.swapaxes(jac, -1, -2)
        m[..., 2:, :2] = np.eye(2)
        m[..., 2:, 2:] = np.asarray(t, dtype=float)[..., None, None] * np.eye(2)
        return m

    return PhaseOneForm(alpha, beta, alpha_dot, beta_dot, jacobian)


def verify_yh_identity(spec: ProblemSpec, t, z) -> float:
    """Sup-norm of Y^H - (Y + X) at (t, z).

    Y^H is solved from d(lambda^H) and d/dt lambda^H alone; X and Y come from
    their explicit formulas.
    """
    z = np.asarray(z, dtype=float)
    form = eliminate_hamiltonian(spec)
    w = form.exterior_derivative(t, z)
    rot = w[..., 0, 1]
    yh = general_euler_vf(rot, form.time_derivative(t, z))
    return float(np.abs(yh - (euler_vf_y(spec, t, z) + hamiltonian_vf_x(spec, t, z))).max())
