"""Fixed-step RK4 integration of the dynamical pictures and the Euler flow."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .domain import ProblemSpec
from .fields import canonical_rhs, euler_vf_y, force_rhs, rot_a, symplectic_matrix, twisted_rhs

DEFAULT_STEPS = 4096


class Picture(str, enum.Enum):
    CANONICAL = "canonical"
    TWISTED = "twisted"
    FORCE = "force"
    EULER_FLOW = "euler-flow"


class DivergenceError(RuntimeError):
    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state at step {step} (t={t!r})")
        self.step = step
        self.t = t


def picture_rhs(spec: ProblemSpec, picture: Picture | str):
    """Right-hand side ``f(t, z)`` of the picture, batched over leading axes."""
    picture = Picture(picture)
    if picture is Picture.CANONICAL:
        return lambda t, z: canonical_rhs(spec, t, z)
    if picture is Picture.TWISTED:
        return lambda t, z: twisted_rhs(spec, t, z)
    if picture is Picture.EULER_FLOW:
        return lambda t, z: euler_vf_y(spec, t, z)

    def force(t, z):
        z = np.asarray(z, dtype=float)
        return np.concatenate([z[..., 2:], force_rhs(spec, t, z[..., :2], z[..., 2:])], axis=-1)

    return force


def rk4(rhs, z0, t0: float, t1: float, n_steps: int, keep: bool = True):
    """Classical RK4 with ``n_steps`` equal steps.

    Returns all states (shape ``(n_steps + 1,) + z0.shape``) when ``keep``,
    otherwise the final state only.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    z = np.array(z0, dtype=float)
    h = (t1 - t0) / n_steps
    states = np.empty((n_steps + 1,) + z.shape) if keep else None
    if keep:
        states[0] = z
    # overflow is reported as DivergenceError, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            t = t0 + i * h
            k1 = rhs(t, z)
            k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2)
            k4 = rhs(t + h, z + h * k3)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(z)):
                raise DivergenceError(i + 1, t + h)
            if keep:
                states[i + 1] = z
    return states if keep else z


@dataclass(frozen=True, eq=False)
class Trajectory:
    picture: Picture
    t0: float
    dt: float
    states: np.ndarray  # (n_steps + 1, 4); force picture stores (q, qdot)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])

    @property
    def q(self) -> np.ndarray:
        return self.states[..., :2]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        lines = ["t,q1,q2,p1,p2"]
        for t, row in zip(self.times, self.states):
            lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def integrate(spec: ProblemSpec, picture, z0, t0: float = 0.0, t1: float = 1.0, n_steps: int = DEFAULT_STEPS) -> Trajectory:
    picture = Picture(picture)
    z0 = np.asarray(z0, dtype=float)
    if z0.shape[-1] != 4:
        raise ValueError("initial state must have 4 components")
    states = rk4(picture_rhs(spec, picture), z0, t0, t1, n_steps)
    return Trajectory(picture, float(t0), (t1 - t0) / n_steps, states)


def time_one_map(spec: ProblemSpec, picture, z0, n_steps: int = DEFAULT_STEPS) -> np.ndarray:
    return rk4(picture_rhs(spec, picture), z0, 0.0, 1.0, n_steps, keep=False)


def _fd_jacobian(rhs, t, z):
    """Central-difference Jacobian of rhs at (t, z), z of shape (4,)."""
    h = 1e-6 * (1.0 + np.abs(z).max())
    probes = np.concatenate([z + h * np.eye(4), z - h * np.eye(4)])
    f = rhs(t, probes)
    return ((f[:4] - f[4:]) / (2.0 * h)).T


def flow_jacobian(spec: ProblemSpec, picture, z0, t1: float = 1.0, n_steps: int = DEFAULT_STEPS, t0: float = 0.0, return_state: bool = False):
    """Jacobian of the flow map from t0 to t1 at z0 via the variational equation."""
    z0 = np.asarray(z0, dtype=float)
    if t1 == t0:
        return (np.eye(4), z0.copy()) if return_state else np.eye(4)
    rhs = picture_rhs(spec, picture)

    def augmented(t, y):
        z = y[:4]
        m = y[4:].reshape(4, 4)
        return np.concatenate([rhs(t, z), (_fd_jacobian(rhs, t, z) @ m).ravel()])

    y = rk4(augmented, np.concatenate([z0, np.eye(4).ravel()]), t0, t1, n_steps, keep=False)
    jac = y[4:].reshape(4, 4)
    return (jac, y[:4]) if return_state else jac


def _probe_points(z0, probe_count: int):
    z0 = np.asarray(z0, dtype=float)
    if probe_count <= 0:
        return [z0]
    rng = np.random.default_rng(0)
    return [z0] + [z0 + rng.uniform(-0.5, 0.5, 4) for _ in range(probe_count)]


def euler_flow_symplecticity_defect(spec: ProblemSpec, t: float, z0, n_steps: int = DEFAULT_STEPS, probe_count: int = 0) -> float:
    """||D^T W_0(phi^t z0) D - W_t(z0)||_inf, D the Jacobian of the Euler flow phi^t.

    This measures the pull-back identity (phi^t)^* omega_0 = omega_t.  When
    rot A changes in time that identity does not hold; see
    ``euler_flow_pullback_defect`` for (phi^t)^* omega_t = omega_0.
    ``probe_count`` extra base points near z0 (seeded) are also checked and the
    maximum is returned.
    """
    worst = 0.0
    for z in _probe_points(z0, probe_count):
        d, z1 = flow_jacobian(spec, Picture.EULER_FLOW, z, t, n_steps, return_state=True)
        w0 = symplectic_matrix(rot_a(spec, 0.0, z1[:2]))
        wt = symplectic_matrix(rot_a(spec, t, z[:2]))
        worst = max(worst, float(np.abs(d.T @ w0 @ d - wt).max()))
    return worst


def euler_flow_pullback_defect(spec: ProblemSpec, t: float, z0, n_steps: int = DEFAULT_STEPS, probe_count: int = 0) -> float:
    """||D^T W_t(phi^t z0) D - W_0(z0)||_inf: the flow carries omega_t back to omega_0."""
    worst = 0.0
    for z in _probe_points(z0, probe_count):
        d, z1 = flow_jacobian(spec, Picture.EULER_FLOW, z, t, n_steps, return_state=True)
        wt = symplectic_matrix(rot_a(spec, t, z1[:2]))
        w0 = symplectic_matrix(rot_a(spec, 0.0, z[:2]))
        worst = max(worst, float(np.abs(d.T @ wt @ d - w0).max()))
    return worst
