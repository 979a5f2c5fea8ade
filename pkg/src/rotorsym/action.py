"""Discrete classical and symplectic action functionals on uniform loops.

Both functionals use the midpoint rule on panels [t_i, t_{i+1}] with
forward differences dq_i = q_{i+1} - q_i, midpoint times (i + 1/2)/n and
midpoint states (z_i + z_{i+1})/2.  Index arithmetic wraps modulo n.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .domain import DiscreteLoop, ProblemSpec, VectorPotential
from .fields import force_rhs
from .fields import twisted_hamiltonian


def _panels(loop: DiscreteLoop):
    n = loop.n
    s = loop.samples
    s_next = np.roll(s, -1, axis=0)
    tbar = (np.arange(n) + 0.5) / n
    return n, s, s_next, tbar


def _require(loop: DiscreteLoop, phase: bool):
    if loop.is_phase != phase:
        kind = "phase" if phase else "configuration"
        raise ValueError(f"expected a {kind} loop")


def classical_action(spec: ProblemSpec, loop: DiscreteLoop) -> float:
    _require(loop, False)
    n, q, q_next, tbar = _panels(loop)
    dq = q_next - q
    qbar = 0.5 * (q + q_next)
    kinetic = 0.5 * n * np.sum(dq * dq, axis=-1)
    magnetic = np.sum(spec.potential.value(tbar, qbar) * dq, axis=-1)
    potential = spec.scalar.value(tbar, qbar) / n
    return float(np.sum(kinetic + magnetic - potential))


def _magnetic_panel_grads(pot: VectorPotential, tbar, qbar, dq):
    """d/dq_i and d/dq_{i+1} of A(t, qbar) . dq."""
    a = pot.value(tbar, qbar)
    jt_dq = 0.5 * pot.jacobian_t_apply(tbar, qbar, dq)
    return jt_dq - a, jt_dq + a


def classical_action_gradient(spec: ProblemSpec, loop: DiscreteLoop) -> np.ndarray:
    """Exact partials of classical_action; shape (n, 2)."""
    _require(loop, False)
    n, q, q_next, tbar = _panels(loop)
    dq = q_next - q
    qbar = 0.5 * (q + q_next)
    g_left, g_right = _magnetic_panel_grads(spec.potential, tbar, qbar, dq)
    half_grad_phi = 0.5 * spec.scalar.gradient(tbar, qbar) / n
    g_left = g_left - n * dq - half_grad_phi
    g_right = g_right + n * dq - half_grad_phi
    # panel i touches sample i (left) and sample i+1 (right)
    return g_left + np.roll(g_right, 1, axis=0)


def symplectic_action(spec: ProblemSpec, loop: DiscreteLoop) -> float:
    """Midpoint discretization of int (p + A) . dq - H dt with H = |p|^2/2 + phi."""
    _require(loop, True)
    n, z, z_next, tbar = _panels(loop)
    dq = z_next[:, :2] - z[:, :2]
    zbar = 0.5 * (z + z_next)
    qbar, pbar = zbar[:, :2], zbar[:, 2:]
    one_form = np.sum((pbar + spec.potential.value(tbar, qbar)) * dq, axis=-1)
    ham = twisted_hamiltonian(spec, tbar, qbar, pbar) / n
    return float(np.sum(one_form - ham))


def symplectic_action_gradient(spec: ProblemSpec, loop: DiscreteLoop) -> np.ndarray:
    """Exact partials of symplectic_action; shape (n, 4) ordered (q1, q2, p1, p2)."""
    _require(loop, True)
    n, z, z_next, tbar = _panels(loop)
    dq = z_next[:, :2] - z[:, :2]
    zbar = 0.5 * (z + z_next)
    qbar, pbar = zbar[:, :2], zbar[:, 2:]
    g_left_q, g_right_q = _magnetic_panel_grads(spec.potential, tbar, qbar, dq)
    half_grad_phi = 0.5 * spec.scalar.gradient(tbar, qbar) / n
    g_left_q = g_left_q - pbar - half_grad_phi
    g_right_q = g_right_q + pbar - half_grad_phi
    g_p = 0.5 * dq - 0.5 * pbar / n
    left = np.concatenate([g_left_q, g_p], axis=-1)
    right = np.concatenate([g_right_q, g_p], axis=-1)
    return left + np.roll(right, 1, axis=0)


def window_shift_value(spec_or_potential, loop: DiscreteLoop, k: int) -> float:
    """Midpoint value of int_k^{k+1} theta_t(q_t) qdot_t dt on a periodic loop."""
    pot = spec_or_potential.potential if isinstance(spec_or_potential, ProblemSpec) else spec_or_potential
    n, s, s_next, tbar = _panels(loop)
    q, q_next = s[:, :2], s_next[:, :2]
    return float(np.sum(pot.value(tbar + k, 0.5 * (q + q_next)) * (q_next - q)))


def force_residual(spec: ProblemSpec, loop: DiscreteLoop) -> float:
    """Sup over samples of |second difference - force_rhs(t_i, q_i, central velocity)|."""
    n = loop.n
    q = loop.q
    q_next, q_prev = np.roll(q, -1, axis=0), np.roll(q, 1, axis=0)
    acc = n * n * (q_next - 2.0 * q + q_prev)
    vel = 0.5 * n * (q_next - q_prev)
    res = acc - force_rhs(spec, loop.times, q, vel)
    return float(np.linalg.norm(res, axis=-1).max())


def gradient_defect(spec: ProblemSpec, loop: DiscreteLoop) -> float:
    grad = symplectic_action_gradient(spec, loop) if loop.is_phase else classical_action_gradient(spec, loop)
    return float(np.abs(grad).max())


def spectral_velocity(loop: DiscreteLoop) -> np.ndarray:
    """Time derivative of the trigonometric interpolant of the q samples."""
    n = loop.n
    coeffs = np.fft.rfft(loop.q, axis=0)
    freqs = np.fft.rfftfreq(n, d=1.0 / n)
    factor = 2j * math.pi * freqs
    if n % 2 == 0:
        factor[-1] = 0.0  # Nyquist mode has no well-defined derivative
    return np.fft.irfft(coeffs * factor[:, None], n=n, axis=0)


def circle_loop(n: int, radius: float = 1.0, center=(0.0, 0.0), clockwise: bool = True, with_velocity: bool = False) -> DiscreteLoop:
    """q(t) = center + radius (cos 2 pi t, -/+ sin 2 pi t), optionally with p = qdot."""
    t = np.arange(n) / n
    s = -1.0 if clockwise else 1.0
    q = np.stack([radius * np.cos(2 * math.pi * t), s * radius * np.sin(2 * math.pi * t)], -1) + np.asarray(center)
    if not with_velocity:
        return DiscreteLoop(q)
    v = 2 * math.pi * radius * np.stack([-np.sin(2 * math.pi * t), s * np.cos(2 * math.pi * t)], -1)
    return DiscreteLoop(np.concatenate([q, v], axis=-1))


# ---------------------------------------------------------------------------
# CSV loop files: header t,q1,q2[,p1,p2]; row i has t = i/n


class LoopFormatError(ValueError):
    pass


def loop_to_csv(loop: DiscreteLoop) -> str:
    header = "t,q1,q2,p1,p2" if loop.is_phase else "t,q1,q2"
    lines = [header]
    for t, row in zip(loop.times, loop.samples):
        lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
    return "\n".join(lines) + "\n"


def write_loop_csv(loop: DiscreteLoop, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(loop_to_csv(loop))


def loop_from_csv(text: str, drop_closing_row: bool = False) -> DiscreteLoop:
    """Parse a loop CSV.

    With ``drop_closing_row`` a final row at t = 1 (as written by a t1 = 1
    trajectory export) is treated as the closure sample and dropped; it must
    agree with row 0 to 1e-6.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise LoopFormatError("empty loop file") from None
    if header not in (["t", "q1", "q2"], ["t", "q1", "q2", "p1", "p2"]):
        raise LoopFormatError(f"bad header {','.join(header)!r}; expected t,q1,q2[,p1,p2]")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise LoopFormatError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise LoopFormatError(f"line {lineno}: non-numeric value") from None
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    if drop_closing_row and data.shape[0] >= 2 and abs(data[-1, 0] - 1.0) < 1e-12:
        if np.abs(data[-1, 1:] - data[0, 1:]).max() > 1e-6:
            raise LoopFormatError("closing row does not match the first row; trajectory is not closed")
        data = data[:-1]
    n = data.shape[0]
    if n == 0:
        raise LoopFormatError("loop file has no samples")
    expected = np.arange(n) / n
    if np.abs(data[:, 0] - expected).max() > 1e-12:
        raise LoopFormatError("t column must equal i/n for rows i = 0..n-1")
    return DiscreteLoop(data[:, 1:])


def read_loop_csv(path, drop_closing_row: bool = False) -> DiscreteLoop:
    with open(path, encoding="utf-8") as fh:
        return loop_from_csv(fh.read(), drop_closing_row)
