"""Core data types: time profiles, vector/scalar potential families, loops.

Time is normalized so that periodic means 1-periodic.  All array-valued
evaluators broadcast: ``q`` has shape ``(..., 2)`` and ``t`` is a scalar or an
array broadcastable against ``q.shape[:-1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

# quarter rotation (anticlockwise) and its negative
J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
J0_BAR = -J0


_J0_T = np.ascontiguousarray(J0.T)


def rotate_quarter(v):
    """Return J0 @ v for ``v`` of shape (..., 2)."""
    return np.asarray(v, dtype=float) @ _J0_T


def _tcol(t):
    if isinstance(t, float):
        return t
    return np.asarray(t, dtype=float)[..., None]


# ---------------------------------------------------------------------------
# time profiles


@dataclass(frozen=True)
class FourierProfile:
    """g(t) = c0 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t), k = 1, 2, ..."""

    c0: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "cos_coeffs", tuple(float(a) for a in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(b) for b in self.sin_coeffs))
        K = self.order
        a = np.zeros(K)
        b = np.zeros(K)
        a[: len(self.cos_coeffs)] = self.cos_coeffs
        b[: len(self.sin_coeffs)] = self.sin_coeffs
        k = TWO_PI * np.arange(1, K + 1)
        # (cos weights, sin weights, constant, slope) for value, derivative, primitive
        kinds = {
            "value": (a, b, self.c0, 0.0),
            "derivative": (b * k, -a * k, 0.0, 0.0),
            "primitive": (-b / k, a / k, float(np.sum(b / k)), self.c0),
        }
        object.__setattr__(self, "_kinds", {name: (cw, sw, tuple(cw), tuple(sw), c, m) for name, (cw, sw, c, m) in kinds.items()})
        # last scalar evaluation per kind; a single tuple is swapped atomically
        object.__setattr__(self, "_last", {name: (None, 0.0) for name in kinds})

    @classmethod
    def constant(cls, value: float) -> "FourierProfile":
        return cls(c0=value)

    @property
    def order(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def _padded(self):
        cw, sw = self._kinds["value"][:2]
        return cw, sw

    def _series(self, t, kind):
        cw, sw, cw_t, sw_t, const, slope = self._kinds[kind]
        if isinstance(t, (float, int)) or np.ndim(t) == 0:
            t = float(t)
            last_t, last_v = self._last[kind]
            if last_t == t:
                return last_v
            total = const + slope * t
            for k in range(len(cw_t)):
                x = TWO_PI * (k + 1) * t
                total += cw_t[k] * math.cos(x) + sw_t[k] * math.sin(x)
            self._last[kind] = (t, total)
            return total
        t = np.asarray(t, dtype=float)
        out = const + slope * t
        if len(cw_t):
            x = TWO_PI * t[..., None] * np.arange(1, len(cw_t) + 1)
            out = out + np.cos(x) @ cw + np.sin(x) @ sw
        return out

    def __call__(self, t):
        return self._series(t, "value")

    def derivative(self, t):
        return self._series(t, "derivative")

    def antiderivative(self, t):
        """Primitive vanishing at t = 0."""
        return self._series(t, "primitive")

    # algebra -----------------------------------------------------------

    @staticmethod
    def _from_terms(terms: dict) -> "FourierProfile":
        K = max((k for k in terms if k > 0), default=0)
        cos_c = [terms.get(k, (0.0, 0.0))[0] for k in range(1, K + 1)]
        sin_c = [terms.get(k, (0.0, 0.0))[1] for k in range(1, K + 1)]
        return FourierProfile(terms.get(0, (0.0, 0.0))[0], tuple(cos_c), tuple(sin_c))

    def _terms(self) -> dict:
        a, b = self._padded()
        terms = {0: (self.c0, 0.0)}
        for k in range(1, self.order + 1):
            terms[k] = (a[k - 1], b[k - 1])
        return terms

    def __add__(self, other: "FourierProfile") -> "FourierProfile":
        s, o = self._terms(), other._terms()
        out = {}
        for k in set(s) | set(o):
            x, y = s.get(k, (0.0, 0.0)), o.get(k, (0.0, 0.0))
            out[k] = (x[0] + y[0], x[1] + y[1])
        return self._from_terms(out)

    def scaled(self, factor: float) -> "FourierProfile":
        return FourierProfile(
            factor * self.c0,
            tuple(factor * a for a in self.cos_coeffs),
            tuple(factor * b for b in self.sin_coeffs),
        )

    def __neg__(self) -> "FourierProfile":
        return self.scaled(-1.0)

    def __mul__(self, other: "FourierProfile") -> "FourierProfile":
        """Exact product, re-expanded with the product-to-sum identities."""
        out: dict = {}

        def put(k, c, s):
            # fold negative frequencies: cos even, sin odd
            if k < 0:
                k, s = -k, -s
            cc, ss = out.get(k, (0.0, 0.0))
            out[k] = (cc + c, ss + s)

        for j, (aj, bj) in self._terms().items():
            for k, (ak, bk) in other._terms().items():
                # (aj cos j + bj sin j)(ak cos k + bk sin k), sin 0 = 0
                put(j + k, 0.5 * (aj * ak - bj * bk), 0.5 * (aj * bk + bj * ak))
                put(j - k, 0.5 * (aj * ak + bj * bk), 0.5 * (bj * ak - aj * bk))
        # frequency zero: the sin slot is meaningless and the cos slot holds
        # the constant term
        c0 = out.get(0, (0.0, 0.0))[0]
        out[0] = (c0, 0.0)
        return self._from_terms(out)

    def square(self) -> "FourierProfile":
        return self * self

    @property
    def is_zero(self) -> bool:
        return self.c0 == 0.0 and not any(self.cos_coeffs) and not any(self.sin_coeffs)

    def to_json(self) -> dict:
        return {"c0": self.c0, "cos_coeffs": list(self.cos_coeffs), "sin_coeffs": list(self.sin_coeffs)}


ZERO_PROFILE = FourierProfile()


@dataclass(frozen=True)
class DriftProfile:
    """c(t) = constant + linear*t + quadratic*t**2 + int_0^t rate(s) ds.

    ``c'`` is 1-periodic iff ``quadratic == 0``; the quadratic term exists so
    that non-twisted counterexamples can be expressed in configs.
    """

    rate: FourierProfile = ZERO_PROFILE
    linear: float = 0.0
    constant: float = 0.0
    quadratic: float = 0.0

    def __call__(self, t):
        return self.constant + self.linear * t + self.quadratic * t * t + self.rate.antiderivative(t)

    def derivative(self, t):
        return self.linear + 2.0 * self.quadratic * t + self.rate(t)


# ---------------------------------------------------------------------------
# vector potentials


class VectorPotential:
    """Coefficients A_t of the magnetic 1-form theta_t = A^1 dq1 + A^2 dq2.

    Subclasses give closed forms for the value, the time derivative, the
    spatial Jacobian ``J[..., k, l] = d A^k / d q_l`` and the curl
    ``rot A = d1 A^2 - d2 A^1``.
    """

    def value(self, t, q):
        raise NotImplementedError

    def time_derivative(self, t, q):
        raise NotImplementedError

    def jacobian(self, t, q):
        raise NotImplementedError

    def curl(self, t, q):
        jac = self.jacobian(t, q)
        return jac[..., 1, 0] - jac[..., 0, 1]

    def jacobian_t_apply(self, t, q, v):
        """J^T v, i.e. sum_k v_k grad A^k."""
        return np.einsum("...kl,...k->...l", self.jacobian(t, q), v)

    def __add__(self, other: "VectorPotential") -> "VectorPotential":
        return PotentialSum.of(self, other)


@dataclass(frozen=True)
class Rotational(VectorPotential):
    """A_t(q) = omega(t) J0 q."""

    omega: FourierProfile

    def value(self, t, q):
        return _tcol(self.omega(t)) * rotate_quarter(q)

    def time_derivative(self, t, q):
        return _tcol(self.omega.derivative(t)) * rotate_quarter(q)

    def jacobian(self, t, q):
        q = np.asarray(q, dtype=float)
        w = self.omega(t)
        if np.ndim(w) == 0:
            return np.broadcast_to(w * J0, q.shape[:-1] + (2, 2)).copy()
        w = np.asarray(w, dtype=float)
        shape = np.broadcast_shapes(w.shape, q.shape[:-1])
        return np.broadcast_to(w, shape)[..., None, None] * J0

    def jacobian_t_apply(self, t, q, v):
        # J0^T = -J0
        return -_tcol(self.omega(t)) * rotate_quarter(v)

    def curl(self, t, q):
        q = np.asarray(q, dtype=float)
        w = 2.0 * self.omega(t)
        if np.ndim(w) == 0:
            return np.full(q.shape[:-1], w)
        return np.broadcast_to(w, np.broadcast_shapes(w.shape, q.shape[:-1])) * 1.0


@dataclass(frozen=True)
class RadialDrift(VectorPotential):
    """A_t(q) = c(t) q, the gradient of c(t)|q|^2/2."""

    c: DriftProfile

    def value(self, t, q):
        return _tcol(self.c(t)) * np.asarray(q, dtype=float)

    def time_derivative(self, t, q):
        return _tcol(self.c.derivative(t)) * np.asarray(q, dtype=float)

    def jacobian(self, t, q):
        q = np.asarray(q, dtype=float)
        c = np.asarray(self.c(t), dtype=float)
        shape = np.broadcast_shapes(c.shape, q.shape[:-1])
        return np.broadcast_to(c, shape)[..., None, None] * np.eye(2)

    def jacobian_t_apply(self, t, q, v):
        return _tcol(self.c(t)) * np.asarray(v, dtype=float)

    def curl(self, t, q):
        q = np.asarray(q, dtype=float)
        return np.zeros(np.broadcast_shapes(np.shape(t), q.shape[:-1]))


def _pow(x, k):
    return x**k if k > 0 else np.ones_like(x)


def monomial(i: int, j: int, q):
    q = np.asarray(q, dtype=float)
    return _pow(q[..., 0], i) * _pow(q[..., 1], j)


def monomial_gradient(i: int, j: int, q):
    q = np.asarray(q, dtype=float)
    x, y = q[..., 0], q[..., 1]
    gx = i * _pow(x, i - 1) * _pow(y, j) if i > 0 else np.zeros_like(x)
    gy = j * _pow(x, i) * _pow(y, j - 1) if j > 0 else np.zeros_like(y)
    return np.stack([gx, gy], axis=-1)


def monomial_hessian(i: int, j: int, q):
    q = np.asarray(q, dtype=float)
    x, y = q[..., 0], q[..., 1]
    zero = np.zeros_like(x)
    hxx = i * (i - 1) * _pow(x, i - 2) * _pow(y, j) if i > 1 else zero
    hyy = j * (j - 1) * _pow(x, i) * _pow(y, j - 2) if j > 1 else zero
    hxy = i * j * _pow(x, i - 1) * _pow(y, j - 1) if i > 0 and j > 0 else zero
    return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)


@dataclass(frozen=True)
class DriftTerm:
    i: int
    j: int
    c: DriftProfile


@dataclass(frozen=True)
class GradientDrift(VectorPotential):
    """A_t(q) = sum_m c_m(t) grad(q1^i q2^j): a pure-gauge drift, curl-free.

    This is the shape of int_0^t grad(phi_s) ds for polynomial scalar
    potentials.
    """

    terms: tuple

    def value(self, t, q):
        out = 0.0
        for m in self.terms:
            out = out + _tcol(m.c(t)) * monomial_gradient(m.i, m.j, q)
        return out + np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + (2,))

    def time_derivative(self, t, q):
        out = 0.0
        for m in self.terms:
            out = out + _tcol(m.c.derivative(t)) * monomial_gradient(m.i, m.j, q)
        return out + np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + (2,))

    def jacobian(self, t, q):
        out = 0.0
        for m in self.terms:
            out = out + np.asarray(m.c(t), dtype=float)[..., None, None] * monomial_hessian(m.i, m.j, q)
        return out + np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + (2, 2))

    def curl(self, t, q):
        return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]))


@dataclass(frozen=True)
class PotentialSum(VectorPotential):
    parts: tuple = ()

    @classmethod
    def of(cls, *potentials: VectorPotential) -> "PotentialSum":
        flat = []
        for p in potentials:
            flat.extend(p.parts if isinstance(p, PotentialSum) else (p,))
        return cls(tuple(flat))

    def _sum(self, method, t, q, tail):
        shape = np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + tail
        out = np.zeros(shape)
        for p in self.parts:
            out = out + getattr(p, method)(t, q)
        return out

    def value(self, t, q):
        return self._sum("value", t, q, (2,))

    def time_derivative(self, t, q):
        return self._sum("time_derivative", t, q, (2,))

    def jacobian(self, t, q):
        return self._sum("jacobian", t, q, (2, 2))

    def curl(self, t, q):
        return self._sum("curl", t, q, ())

    def jacobian_t_apply(self, t, q, v):
        shape = np.broadcast_shapes(np.shape(t), np.shape(q)[:-1], np.shape(v)[:-1]) + (2,)
        out = np.zeros(shape)
        for p in self.parts:
            out = out + p.jacobian_t_apply(t, q, v)
        return out


ZERO_POTENTIAL = PotentialSum(())


# ---------------------------------------------------------------------------
# scalar potentials


class ScalarPotential:
    """Periodic scalar potential phi_t(q)."""

    def value(self, t, q):
        raise NotImplementedError

    def gradient(self, t, q):
        raise NotImplementedError

    def integrated_gradient(self) -> VectorPotential:
        """The vector potential int_0^t grad(phi_s) ds, in closed form."""
        raise UnsupportedFamilyError(f"{type(self).__name__} has no closed-form time antiderivative")

    @property
    def is_zero(self) -> bool:
        return False


class UnsupportedFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticIsotropic(ScalarPotential):
    """phi_t(q) = -kappa(t) |q|^2 / 2."""

    kappa: FourierProfile

    def value(self, t, q):
        q = np.asarray(q, dtype=float)
        return -0.5 * np.asarray(self.kappa(t)) * np.sum(q * q, axis=-1)

    def gradient(self, t, q):
        return -_tcol(self.kappa(t)) * np.asarray(q, dtype=float)

    def integrated_gradient(self) -> VectorPotential:
        return RadialDrift(DriftProfile(rate=-self.kappa))

    @property
    def is_zero(self) -> bool:
        return self.kappa.is_zero


@dataclass(frozen=True)
class Monomial:
    i: int
    j: int
    coeff: FourierProfile


@dataclass(frozen=True)
class PolynomialSeparable(ScalarPotential):
    """phi_t(q) = sum coeff(t) q1^i q2^j."""

    terms: tuple = ()

    def value(self, t, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(np.broadcast_shapes(np.shape(t), q.shape[:-1]))
        for m in self.terms:
            out = out + np.asarray(m.coeff(t)) * monomial(m.i, m.j, q)
        return out

    def gradient(self, t, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(np.broadcast_shapes(np.shape(t), q.shape[:-1]) + (2,))
        for m in self.terms:
            out = out + _tcol(m.coeff(t)) * monomial_gradient(m.i, m.j, q)
        return out

    def integrated_gradient(self) -> VectorPotential:
        return GradientDrift(tuple(DriftTerm(m.i, m.j, DriftProfile(rate=m.coeff)) for m in self.terms))

    @property
    def is_zero(self) -> bool:
        return all(m.coeff.is_zero for m in self.terms)


@dataclass(frozen=True)
class ScalarSum(ScalarPotential):
    parts: tuple = ()

    def value(self, t, q):
        out = np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]))
        for p in self.parts:
            out = out + p.value(t, q)
        return out

    def gradient(self, t, q):
        out = np.zeros(np.broadcast_shapes(np.shape(t), np.shape(q)[:-1]) + (2,))
        for p in self.parts:
            out = out + p.gradient(t, q)
        return out

    def integrated_gradient(self) -> VectorPotential:
        return PotentialSum.of(*(p.integrated_gradient() for p in self.parts))

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.parts)


ZERO_SCALAR = PolynomialSeparable(())


# ---------------------------------------------------------------------------
# problem, states, loops, 1-forms


@dataclass(frozen=True)
class ProblemSpec:
    potential: VectorPotential = ZERO_POTENTIAL
    scalar: ScalarPotential = ZERO_SCALAR
    domain_hint: Optional[tuple] = None  # ((xmin, xmax), (ymin, ymax))
    name: str = ""


@dataclass(frozen=True)
class PhaseState:
    t: float
    q: tuple
    p: tuple

    def __post_init__(self):
        vals = (self.t, *self.q, *self.p)
        if len(self.q) != 2 or len(self.p) != 2 or not all(math.isfinite(v) for v in vals):
            raise ValueError(f"invalid phase state {vals}")

    @classmethod
    def from_array(cls, t: float, z) -> "PhaseState":
        z = [float(v) for v in z]
        return cls(float(t), (z[0], z[1]), (z[2], z[3]))

    def as_array(self) -> np.ndarray:
        return np.array([*self.q, *self.p], dtype=float)


MIN_LOOP_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class DiscreteLoop:
    """Uniformly sampled 1-periodic loop; sample i sits at t = i/n.

    ``samples`` has shape (n, 2) for configuration loops and (n, 4) for phase
    loops.  Sample n is sample 0 and is never stored.
    """

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] not in (2, 4):
            raise ValueError(f"loop samples must have shape (n, 2) or (n, 4), got {s.shape}")
        if s.shape[0] < MIN_LOOP_SAMPLES:
            raise LoopSizeError(f"loop needs at least {MIN_LOOP_SAMPLES} samples, got {s.shape[0]}")
        if not np.all(np.isfinite(s)):
            raise ValueError("loop samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def is_phase(self) -> bool:
        return self.samples.shape[1] == 4

    @property
    def q(self) -> np.ndarray:
        return self.samples[:, :2]

    @property
    def p(self) -> np.ndarray:
        if not self.is_phase:
            raise ValueError("configuration loop has no momentum samples")
        return self.samples[:, 2:]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) / self.n


class LoopSizeError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseOneForm:
    """Time-dependent 1-form alpha dq + beta dp on the phase plane.

    Each coefficient is a callable ``(t, q, p) -> (..., 2)``.  ``jacobian``
    returns ``M[..., i, k] = d a_k / d z_i`` for ``a = (alpha, beta)`` and
    ``z = (q, p)``; the exterior derivative is then ``M - M^T``.
    """

    alpha: Callable
    beta: Callable
    alpha_dot: Callable
    beta_dot: Callable
    jacobian: Optional[Callable] = None

    def coefficients(self, t, z):
        z = np.asarray(z, dtype=float)
        q, p = z[..., :2], z[..., 2:]
        return np.concatenate([self.alpha(t, q, p), self.beta(t, q, p)], axis=-1)

    def time_derivative(self, t, z):
        z = np.asarray(z, dtype=float)
        q, p = z[..., :2], z[..., 2:]
        return np.concatenate([self.alpha_dot(t, q, p), self.beta_dot(t, q, p)], axis=-1)

    def exterior_derivative(self, t, z):
        """4x4 matrix W with d(lambda)(u, v) = u^T W v."""
        if self.jacobian is None:
            raise ValueError("this 1-form carries no closed-form Jacobian")
        z = np.asarray(z, dtype=float)
        m = self.jacobian(t, z[..., :2], z[..., 2:])
        return m - np.swapaxes(m, -1, -2)


def as_points(x: Sequence[float] | np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)
