"""Independent oracles shared by the tests: finite differences and closed forms."""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def central_diff(f, x, h=1e-5):
    """Central difference of a scalar- or array-valued f at scalar x."""
    h = h * (abs(x) + 1.0)
    return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h)


def grad_fd(f, x, h=1e-5):
    """Central-difference gradient of f: R^d -> R^m at x, shape (m, d) or (d,)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h * (abs(x[i]) + 1.0)
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * e[i]))
    return np.stack(cols, axis=-1)


def rotation(theta):
    """Matrix of exp(-theta J0), i.e. clockwise rotation by theta."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotating_frame_solution(theta, q0, p0, t):
    """Canonical merry-go-round solution with Theta(t) = theta."""
    r = rotation(theta)
    return r @ (np.asarray(q0, float) + t * np.asarray(p0, float)), r @ np.asarray(p0, float)


def unit_circle(n, phase=False):
    t = np.arange(n) / n
    q = np.stack([np.cos(TWO_PI * t), -np.sin(TWO_PI * t)], -1)
    if not phase:
        return q
    v = TWO_PI * np.stack([-np.sin(TWO_PI * t), -np.cos(TWO_PI * t)], -1)
    return np.concatenate([q, v], -1)
