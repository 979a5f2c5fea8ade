"""Pointwise vector fields of the three dynamical pictures.

Phase points are arrays ``z = (q1, q2, p1, p2)`` with arbitrary leading batch
dimensions.  The symplectic form at time t is

    omega_t = dp1^dq1 + dp2^dq2 + rot A_t(q) dq1^dq2,

represented by the 4x4 matrix ``W`` with ``omega_t(u, v) = u^T W v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    J0_BAR,
    PhaseOneForm,
    ProblemSpec,
    VectorPotential,
    rotate_quarter,
)


def _split(z):
    z = np.asarray(z, dtype=float)
    return z[..., :2], z[..., 2:]


def rot_a(spec: ProblemSpec, t, q):
    return spec.potential.curl(t, np.asarray(q, dtype=float))


def a_dot(spec: ProblemSpec, t, q):
    return spec.potential.time_derivative(t, np.asarray(q, dtype=float))


def grad_phi(spec: ProblemSpec, t, q):
    return spec.scalar.gradient(t, np.asarray(q, dtype=float))


def force_rhs(spec: ProblemSpec, t, q, qdot):
    """Acceleration of the (A, phi)-equation: -rot(A) J0 qdot - dA/dt - grad phi."""
    q = np.asarray(q, dtype=float)
    pot = spec.potential
    rot = pot.curl(t, q)[..., None]
    return -rot * rotate_quarter(qdot) - pot.time_derivative(t, q) - spec.scalar.gradient(t, q)


def canonical_hamiltonian(spec: ProblemSpec, t, q, p):
    q = np.asarray(q, dtype=float)
    v = np.asarray(p, dtype=float) - spec.potential.value(t, q)
    return 0.5 * np.sum(v * v, axis=-1) + spec.scalar.value(t, q)


def canonical_rhs(spec: ProblemSpec, t, z):
    """Hamilton equations of H = |p - A_t(q)|^2/2 + phi_t(q) against dp^dq."""
    q, p = _split(z)
    v = p - spec.potential.value(t, q)
    pdot = spec.potential.jacobian_t_apply(t, q, v) - grad_phi(spec, t, q)
    return np.concatenate([v, pdot], axis=-1)


def twisted_hamiltonian(spec: ProblemSpec, t, q, p):
    """H_t = |p|^2/2 + phi_t(q), used against the twisted form."""
    p = np.asarray(p, dtype=float)
    return 0.5 * np.sum(p * p, axis=-1) + spec.scalar.value(t, q)


def hamiltonian_vf_x(spec: ProblemSpec, t, z):
    q, p = _split(z)
    rot = np.asarray(rot_a(spec, t, q))[..., None]
    # -rot J0 p = rot * (p2, -p1); the second momentum row uses d(phi)/dq2
    pdot = -rot * rotate_quarter(p) - grad_phi(spec, t, q)
    return np.concatenate([p, pdot], axis=-1)


def euler_vf_y(spec: ProblemSpec, t, z):
    q, _ = _split(z)
    ad = a_dot(spec, t, q)
    return np.concatenate([np.zeros_like(ad), -ad], axis=-1)


def twisted_rhs(spec: ProblemSpec, t, z):
    """X_t + Y_t: the Euler-Hamilton equation of the twisted picture."""
    return hamiltonian_vf_x(spec, t, z) + euler_vf_y(spec, t, z)


def hamiltonian_differential(spec: ProblemSpec, t, z):
    """Closed-form covector dH_t = (grad phi, p)."""
    q, p = _split(z)
    return np.concatenate([grad_phi(spec, t, q), p], axis=-1)


def lambda_dot(spec: ProblemSpec, t, z):
    """Closed-form covector of d/dt (lambda_can + pi^* theta_t) = (dA/dt, 0)."""
    q, p = _split(z)
    ad = a_dot(spec, t, q)
    return np.concatenate([ad, np.zeros_like(ad)], axis=-1)


def symplectic_matrix(rot):
    """Matrix of dp^dq + rot dq1^dq2, batched over ``rot``."""
    rot = np.asarray(rot, dtype=float)
    w = np.zeros(rot.shape + (4, 4))
    w[..., :2, :2] = rot[..., None, None] * J0_BAR
    w[..., :2, 2:] = -np.eye(2)
    w[..., 2:, :2] = np.eye(2)
    return w


def apply_form(rot, v):
    """Covector omega(., v) = W v."""
    return np.einsum("...ij,...j->...i", symplectic_matrix(rot), v)


def general_euler_vf(rot, covector):
    """Solve omega(., Y) = covector for Y.

    Uses the block inverse of [[rot*Jbar0, -I], [I, 0]], which is
    [[0, I], [-I, rot*Jbar0]]; the matrix is nondegenerate for every rot.
    """
    rot = np.asarray(rot, dtype=float)[..., None]
    c = np.asarray(covector, dtype=float)
    cq, cp = c[..., :2], c[..., 2:]
    yq = cp
    # Jbar0 v = (v2, -v1) = -J0 v
    yp = -cq - rot * rotate_quarter(cp)
    return np.concatenate([yq, yp], axis=-1)


def twisted_one_form(spec: ProblemSpec) -> PhaseOneForm:
    """lambda_t = p dq + pi^* theta_t as a PhaseOneForm."""
    pot = spec.potential

    def alpha(t, q, p):
        return p + pot.value(t, q)

    def beta(t, q, p):
        return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + (2,))

    def alpha_dot(t, q, p):
        return pot.time_derivative(t, q) + 0.0 * p

    def jacobian(t, q, p):
        shape = np.broadcast_shapes(np.shape(t), np.shape(q)[:-1], np.shape(p)[:-1])
        m = np.zeros(shape + (4, 4))
        m[..., :2, :2] = np.swapaxes(pot.jacobian(t, q), -1, -2)
        m[..., 2:, :2] = np.eye(2)
        return m

    return PhaseOneForm(alpha, beta, alpha_dot, beta, jacobian)


@dataclass(frozen=True)
class TwistDefectReport:
    max_adot_defect: float
    max_rot_defect: float
    max_curl_of_difference: float

    @property
    def worst(self) -> float:
        return max(self.max_adot_defect, self.max_rot_defect, self.max_curl_of_difference)


def twist_defect(spec: ProblemSpec, t_samples, q_samples) -> TwistDefectReport:
    """Sup-norm defects of the three twisted-periodicity conditions on a grid.

    The curl of A_{t+1} - A_t is taken from the difference of the closed-form
    Jacobians, a separate route from the families' ``curl`` methods.
    """
    t = np.asarray(t_samples, dtype=float).reshape(-1)
    q = np.asarray(q_samples, dtype=float).reshape(-1, 2)
    if t.size == 0 or q.size == 0:
        raise ValueError("twist_defect needs nonempty sample sets")
    tt = t[:, None]
    qq = q[None, :, :]
    pot = spec.potential
    adot = np.abs(pot.time_derivative(tt + 1.0, qq) - pot.time_derivative(tt, qq)).max()
    rot = np.abs(pot.curl(tt + 1.0, qq) - pot.curl(tt, qq)).max()
    djac = pot.jacobian(tt + 1.0, qq) - pot.jacobian(tt, qq)
    curl_diff = np.abs(djac[..., 1, 0] - djac[..., 0, 1]).max()
    return TwistDefectReport(float(adot), float(rot), float(curl_diff))


def _difference_coefficients(lam, t, pts):
    if isinstance(lam, VectorPotential):
        return lam.value(t + 1.0, pts) - lam.value(t, pts)
    if isinstance(lam, PhaseOneForm):
        return lam.coefficients(t + 1.0, pts) - lam.coefficients(t, pts)
    if isinstance(lam, ProblemSpec):
        return _difference_coefficients(lam.potential, t, pts)
    raise TypeError(f"cannot take line integrals of {type(lam).__name__}")


def recover_f(lam, t: float, x, x0, n_steps: int = 256) -> float:
    """Twist witness f_t(x) with lambda_{t+1} - lambda_t = df_t and f_t(x0) = 0.

    Composite Simpson rule along the straight segment from ``x0`` to ``x``.
    ``lam`` is a VectorPotential (points in R^2) or a PhaseOneForm (points in
    R^4).
    """
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    n_steps += n_steps % 2
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    s = np.linspace(0.0, 1.0, n_steps + 1)
    pts = x0 + s[:, None] * (x - x0)
    integrand = _difference_coefficients(lam, t, pts) @ (x - x0)
    w = np.ones(n_steps + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(np.dot(w, integrand) / (3.0 * n_steps))


def polyline_f(lam, t: float, vertices, n_steps: int = 256) -> float:
    """recover_f chained along a polyline through ``vertices``."""
    vertices = [np.asarray(v, dtype=float) for v in vertices]
    return sum(recover_f(lam, t, b, a, n_steps) for a, b in zip(vertices, vertices[1:]))
