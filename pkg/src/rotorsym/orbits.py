"""Periodic-orbit detection: Newton shooting and variational root finding."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .action import (
    classical_action_gradient,
    force_residual,
    gradient_defect,
    spectral_velocity,
    symplectic_action_gradient,
)
from .domain import DiscreteLoop, ProblemSpec
from .integrate import DEFAULT_STEPS, Picture, flow_jacobian, integrate, time_one_map

log = logging.getLogger(__name__)

DEFAULT_LOOP_SAMPLES = 256


class Method(str, enum.Enum):
    SHOOTING = "shooting"
    VARIATIONAL = "variational"


class Functional(str, enum.Enum):
    CLASSICAL = "classical"
    SYMPLECTIC = "symplectic"


@dataclass(eq=False)
class OrbitResult:
    method: Method
    picture: Picture
    loop: DiscreteLoop
    fixed_point_defect: float
    force_defect: float
    gradient_defect: float
    iterations: int
    converged: bool
    initial_state: np.ndarray = field(default=None)
    tol: float = 0.0

    def to_json(self, loop_file: str | None = None) -> dict:
        return {
            "method": self.method.value,
            "picture": self.picture.value,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "defects": {
                "fixed_point": self.fixed_point_defect,
                "force": self.force_defect,
                "gradient": self.gradient_defect,
            },
            "initial_state": [float(v) for v in self.initial_state],
            "loop_file": loop_file,
        }


def _sample_orbit(spec, picture, z, n_samples, n_steps):
    """Integrate one period from z and sample n_samples points as a loop."""
    if n_steps % n_samples:
        raise ValueError("n_steps must be a multiple of the loop sample count")
    states = integrate(spec, picture, z, 0.0, 1.0, n_steps).states[:-1:n_steps // n_samples]
    if picture is Picture.TWISTED:
        return DiscreteLoop(states)
    return DiscreteLoop(states[:, :2])


def shooting_defects(spec, picture, z, n_samples=DEFAULT_LOOP_SAMPLES, n_steps=DEFAULT_STEPS):
    """(loop, fixed_point, force, gradient) defects for an initial state."""
    picture = Picture(picture)
    z = np.asarray(z, dtype=float)
    fp = float(np.abs(time_one_map(spec, picture, z, n_steps) - z).max())
    loop = _sample_orbit(spec, picture, z, n_samples, n_steps)
    return loop, fp, force_residual(spec, loop), gradient_defect(spec, loop)


def find_orbit_shooting(
    spec: ProblemSpec,
    picture,
    z_guess,
    tol: float = 1e-9,
    max_iter: int = 20,
    n_steps: int = DEFAULT_STEPS,
    n_samples: int = DEFAULT_LOOP_SAMPLES,
) -> OrbitResult:
    """Damped Newton on F(z) = Phi(z) - z with pseudo-inverse steps.

    Singular values below 1e-8 * sigma_max are cut, so continua of fixed
    points are approached along least-squares steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    picture = Picture(picture)
    if picture is Picture.EULER_FLOW:
        raise ValueError("shooting is defined for the canonical, twisted and force pictures")
    z = np.asarray(z_guess, dtype=float).copy()
    jac, z1 = flow_jacobian(spec, picture, z, 1.0, n_steps, return_state=True)
    resid = z1 - z
    iterations = 0
    while np.abs(resid).max() >= tol and iterations < max_iter:
        iterations += 1
        step = -np.linalg.pinv(jac - np.eye(4), rcond=1e-8) @ resid
        norm0 = np.linalg.norm(resid)
        scale = 1.0
        for _ in range(30):
            trial = z + scale * step
            r_trial = time_one_map(spec, picture, trial, n_steps) - trial
            if np.linalg.norm(r_trial) < norm0:
                break
            scale *= 0.5
        else:
            log.debug("line search failed at iteration %d", iterations)
            break
        z = trial
        jac, z1 = flow_jacobian(spec, picture, z, 1.0, n_steps, return_state=True)
        resid = z1 - z
        log.debug("shooting iteration %d: |F| = %.3e", iterations, np.abs(resid).max())
    loop, fp, force, grad = shooting_defects(spec, picture, z, n_samples, n_steps)
    return OrbitResult(Method.SHOOTING, picture, loop, fp, force, grad, iterations, fp < tol, z, tol)


def _gradient_fn(spec, functional):
    if functional is Functional.CLASSICAL:
        return lambda loop: classical_action_gradient(spec, loop)
    return lambda loop: symplectic_action_gradient(spec, loop)


def loop_initial_state(spec: ProblemSpec, loop: DiscreteLoop):
    """Initial state for shooting: canonical (q0, qdot0 + A_0(q0)) from a
    configuration loop, twisted (q0, p0) from a phase loop."""
    if loop.is_phase:
        return Picture.TWISTED, loop.samples[0].copy()
    q0 = loop.q[0]
    v0 = spectral_velocity(loop)[0]
    return Picture.CANONICAL, np.concatenate([q0, v0 + spec.potential.value(0.0, q0)])


def find_orbit_variational(
    spec: ProblemSpec,
    functional,
    loop_guess: DiscreteLoop,
    tol: float = 1e-8,
    max_iter: int = 50,
    n_steps: int = DEFAULT_STEPS,
) -> OrbitResult:
    """Gauss-Newton/Levenberg on the discrete action gradient G.

    Critical points are generally saddles, so |G|^2 is minimized.  The
    Jacobian of G is built column-wise by forward differences; damping starts
    at 1e-3, halves on success and grows tenfold on failure.  Steps are
    restricted to singular directions above 1e-8 * sigma_max, as in shooting.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    functional = Functional(functional)
    if loop_guess.is_phase != (functional is Functional.SYMPLECTIC):
        raise ValueError(f"{functional.value} functional needs a {'phase' if functional is Functional.SYMPLECTIC else 'configuration'} loop")
    grad = _gradient_fn(spec, functional)
    x = loop_guess.samples.ravel().copy()
    shape = loop_guess.samples.shape

    def G(v):
        return grad(DiscreteLoop(v.reshape(shape))).ravel()

    g = G(x)
    damping = 1e-3
    iterations = 0
    while np.abs(g).max() >= tol and iterations < max_iter:
        iterations += 1
        jac = np.empty((g.size, x.size))
        for j in range(x.size):
            h = 1e-7 * (1.0 + abs(x[j]))
            xp = x.copy()
            xp[j] += h
            jac[:, j] = (G(xp) - g) / h
        # damped step (J^T J + damping I)^-1 J^T g via the SVD of J; directions
        # with singular value below 1e-8 * sigma_max (orbit families and the
        # alternating modes the midpoint rule cannot see) are left alone
        u, sv, vt = np.linalg.svd(jac, full_matrices=False)
        keep = sv > 1e-8 * sv[0]
        ug = u[:, keep].T @ g
        improved = False
        for _ in range(12):
            step = -vt[keep].T @ (sv[keep] / (sv[keep] ** 2 + damping) * ug)
            g_new = G(x + step)
            if np.linalg.norm(g_new) < np.linalg.norm(g):
                x, g = x + step, g_new
                damping *= 0.5
                improved = True
                break
            damping *= 10.0
        log.debug("variational iteration %d: |G| = %.3e, damping %.1e", iterations, np.abs(g).max(), damping)
        if not improved:
            break
    loop = DiscreteLoop(x.reshape(shape))
    gdef = float(np.abs(g).max())
    picture, z0 = loop_initial_state(spec, loop)
    fp = float(np.abs(time_one_map(spec, picture, z0, n_steps) - z0).max())
    return OrbitResult(
        Method.VARIATIONAL, picture, loop, fp, force_residual(spec, loop), gdef, iterations, gdef < tol, z0, tol
    )


def recheck(spec: ProblemSpec, result: OrbitResult, n_steps: int = DEFAULT_STEPS) -> dict:
    """Recompute every reported defect from scratch.

    Returns the absolute differences to the stored values.
    """
    z0 = result.initial_state
    fp = float(np.abs(time_one_map(spec, result.picture, z0, n_steps) - z0).max())
    if result.method is Method.SHOOTING:
        loop = _sample_orbit(spec, result.picture, z0, result.loop.n, n_steps)
        loop_diff = float(np.abs(loop.samples - result.loop.samples).max())
    else:
        loop, loop_diff = result.loop, 0.0
    return {
        "fixed_point": abs(fp - result.fixed_point_defect),
        "force": abs(force_residual(spec, loop) - result.force_defect),
        "gradient": abs(gradient_defect(spec, loop) - result.gradient_defect),
        "loop": loop_diff,
    }


def perturbed_guesses(z_guess, seed_count: int, scale: float = 0.05):
    """The guess itself followed by seed_count - 1 seeded perturbations."""
    z_guess = np.asarray(z_guess, dtype=float)
    out = [z_guess]
    for seed in range(1, seed_count):
        rng = np.random.default_rng(seed)
        out.append(z_guess + scale * rng.standard_normal(z_guess.shape))
    return out
