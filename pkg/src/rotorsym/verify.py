"""Verification suites: per-config property checks and the acceptance criteria.

Every check returns :class:`Check` records carrying the measured value, the
tolerance and the verdict; ``cmd_verify`` renders them as a table.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import action, fields, integrate, orbits, transforms
from .domain import DiscreteLoop, FourierProfile, ProblemSpec, UnsupportedFamilyError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    measured: float
    tolerance: float
    passed: bool
    relation: str = "<"

    def row(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.group:<28} {self.name:<52} {self.measured:.6e} {self.relation} {self.tolerance:.1e}"


def below(group, name, measured, tol) -> Check:
    measured = float(measured)
    return Check(group, name, measured, tol, bool(measured < tol), "<")


def at_least(group, name, measured, bound) -> Check:
    measured = float(measured)
    return Check(group, name, measured, bound, bool(measured >= bound), ">=")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("ROTORSYM_THREADS", "")))
    except ValueError:
        return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# random data


def random_profile(rng, max_order=3, bound=3.0) -> FourierProfile:
    k = int(rng.integers(0, max_order + 1))
    return FourierProfile(rng.uniform(-bound, bound), tuple(rng.uniform(-bound, bound, k)), tuple(rng.uniform(-bound, bound, k)))


def random_ball(rng, count, dim=4, radius=1.0):
    x = rng.standard_normal((count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * radius * rng.uniform(0, 1, (count, 1)) ** (1.0 / dim)


def random_loop(rng, n, phase=False, modes=3, scale=0.5) -> DiscreteLoop:
    """Smooth random loop: a few random Fourier modes around a random center."""
    t = np.arange(n) / n
    dim = 4 if phase else 2
    out = np.tile(rng.uniform(-scale, scale, dim), (n, 1))
    for k in range(1, modes + 1):
        out += np.outer(np.cos(TWO_PI * k * t), rng.uniform(-scale, scale, dim)) / k
        out += np.outer(np.sin(TWO_PI * k * t), rng.uniform(-scale, scale, dim)) / k
    return DiscreteLoop(out)


def uniform_spec() -> ProblemSpec:
    return transforms.make_merry_go_round(FourierProfile(TWO_PI))


def pulsing_spec() -> ProblemSpec:
    return transforms.make_merry_go_round(FourierProfile(TWO_PI, (), (1.0,)))


def rotating_solution(theta, q0, p0, t):
    """Canonical merry-go-round solution q = R(-theta)(q0 + p0 t), p = R(-theta) p0."""
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s, c]])
    return rot @ (np.asarray(q0) + t * np.asarray(p0)), rot @ np.asarray(p0)


# ---------------------------------------------------------------------------
# building blocks shared by per-config checks and acceptance criteria


def picture_deviation(spec: ProblemSpec, z0s, n_steps=integrate.DEFAULT_STEPS):
    """(canonical vs force, twisted vs force, momentum translation) sup deviations."""
    z0s = np.atleast_2d(np.asarray(z0s, dtype=float))
    q0, p0 = z0s[:, :2], z0s[:, 2:]
    v0 = p0 - spec.potential.value(0.0, q0)
    canon = integrate.integrate(spec, "canonical", z0s, 0.0, 1.0, n_steps).states
    force = integrate.integrate(spec, "force", np.concatenate([q0, v0], -1), 0.0, 1.0, n_steps).states
    twisted = integrate.integrate(spec, "twisted", np.concatenate([q0, v0], -1), 0.0, 1.0, n_steps).states
    dev_cf = np.abs(canon[..., :2] - force[..., :2]).max()
    dev_tf = max(np.abs(twisted[..., :2] - force[..., :2]).max(), np.abs(twisted[..., 2:] - force[..., 2:]).max())
    times = np.arange(n_steps + 1) / n_steps
    shift = spec.potential.value(times[:, None], canon[..., :2])
    dev_mom = np.abs(canon[..., 2:] - twisted[..., 2:] - shift).max()
    return float(dev_cf), float(dev_tf), float(dev_mom)


def elimination_deviation(spec: ProblemSpec, states, n_steps=integrate.DEFAULT_STEPS) -> float:
    elim = transforms.eliminate_scalar(spec)
    a = integrate.integrate(spec, "force", states, 0.0, 1.0, n_steps).states
    b = integrate.integrate(elim, "force", states, 0.0, 1.0, n_steps).states
    return float(np.abs(a[..., :2] - b[..., :2]).max())


def field_identity_residuals(spec: ProblemSpec, rng, count=100):
    """(dH residual, lambda-dot residual, max |Y_q|) at random (t, q, p)."""
    t = rng.uniform(-2.0, 2.0, count)
    z = rng.uniform(-2.0, 2.0, (count, 4))
    rot = fields.rot_a(spec, t, z[:, :2])
    x = fields.hamiltonian_vf_x(spec, t, z)
    y = fields.euler_vf_y(spec, t, z)
    res_x = np.abs(fields.apply_form(rot, x) - fields.hamiltonian_differential(spec, t, z)).max()
    res_y = np.abs(fields.apply_form(rot, y) - fields.lambda_dot(spec, t, z)).max()
    return float(res_x), float(res_y), float(np.abs(y[:, :2]).max())


def hamiltonian_elimination_residuals(spec: ProblemSpec, rng, count=100):
    t = rng.uniform(-2.0, 2.0, count)
    z = rng.uniform(-2.0, 2.0, (count, 4))
    yh = max(transforms.verify_yh_identity(spec, t[i], z[i]) for i in range(count))
    lam_h = transforms.eliminate_hamiltonian(spec)
    lam = fields.twisted_one_form(spec)
    dd = np.abs(lam_h.exterior_derivative(t, z) - lam.exterior_derivative(t, z)).max()
    return float(yh), float(dd)


def k_spread(spec_or_potential, loop, ks=range(6)) -> float:
    vals = [action.window_shift_value(spec_or_potential, loop, k) for k in ks]
    return float(max(vals) - min(vals))


def fd_gradient_error(spec: ProblemSpec, loop: DiscreteLoop, h=1e-6) -> float:
    """Max relative-ish error of the analytic action gradient vs central differences."""
    fn = action.symplectic_action if loop.is_phase else action.classical_action
    grad = action.symplectic_action_gradient(spec, loop) if loop.is_phase else action.classical_action_gradient(spec, loop)
    x = loop.samples.copy()
    fd = np.empty_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        fd[idx] = (fn(spec, DiscreteLoop(xp)) - fn(spec, DiscreteLoop(xm))) / (2 * h)
    return float(np.abs(fd - grad).max() / (1.0 + np.abs(grad).max()))


# ---------------------------------------------------------------------------
# per-config suite


def config_checks(spec: ProblemSpec, seed: int = 0) -> list[Check]:
    """Invariant checks that apply to any single problem spec."""
    label = spec.name or "config"
    g = f"config:{label}"
    rng = np.random.default_rng(seed)
    box = spec.domain_hint or ((-2.0, 2.0), (-2.0, 2.0))
    grid_t = np.linspace(-1.0, 1.0, 20)
    grid_q = np.stack([rng.uniform(*box[0], 20), rng.uniform(*box[1], 20)], -1)
    out = []
    rep = fields.twist_defect(spec, grid_t, grid_q)
    out.append(below(g, "twist: |dA/dt(t+1) - dA/dt(t)|", rep.max_adot_defect, 1e-10))
    out.append(below(g, "twist: |rot A(t+1) - rot A(t)|", rep.max_rot_defect, 1e-10))
    out.append(below(g, "twist: |rot(A(t+1) - A(t))|", rep.max_curl_of_difference, 1e-10))

    rx, ry, yq = field_identity_residuals(spec, rng)
    out.append(below(g, "omega(., X) = dH", rx, 1e-10))
    out.append(below(g, "omega(., Y) = d/dt lambda", ry, 1e-10))
    out.append(below(g, "Y vertical (max |Y_q|)", yq, 1e-300))
    yh, dd = hamiltonian_elimination_residuals(spec, rng)
    out.append(below(g, "Y^H = Y + X", yh, 1e-10))
    out.append(below(g, "d lambda^H = d lambda", dd, 1e-10))

    z0s = random_ball(rng, 3)
    cf, tf, mom = picture_deviation(spec, z0s)
    out.append(below(g, "canonical vs force (q)", cf, 1e-7))
    out.append(below(g, "twisted vs force", tf, 1e-7))
    out.append(below(g, "canonical p - twisted p = A", mom, 1e-7))

    try:
        elim = transforms.eliminate_scalar(spec)
    except UnsupportedFamilyError:
        elim = None
    if elim is not None:
        out.append(below(g, "scalar elimination trajectories", elimination_deviation(spec, z0s), 1e-7))
        out.append(below(g, "eliminated: twist defect", fields.twist_defect(elim, grid_t, grid_q).worst, 1e-10))
        loop = random_loop(rng, 128)
        out.append(below(g, "eliminated: window shift spread k=0..5", k_spread(elim, loop), 1e-9))
    out.append(below(g, "window shift spread k=0..5", k_spread(spec, random_loop(rng, 128)), 1e-9))

    z0 = np.array([1.0, 0.0, 0.0, 0.0])
    for t in (0.25, 0.5, 1.0):
        out.append(below(g, f"Euler flow (phi^t)^*omega_0 = omega_t, t={t}", integrate.euler_flow_symplecticity_defect(spec, t, z0), 1e-6))
        out.append(below(g, f"Euler flow (phi^t)^*omega_t = omega_0, t={t}", integrate.euler_flow_pullback_defect(spec, t, z0), 1e-6))

    out.append(below(g, "classical gradient vs finite differences", fd_gradient_error(spec, random_loop(rng, 16)), 1e-5))
    out.append(below(g, "symplectic gradient vs finite differences", fd_gradient_error(spec, random_loop(rng, 16, phase=True)), 1e-5))
    return out


# ---------------------------------------------------------------------------
# acceptance criteria


def criterion_1(seed: int = 1) -> list[Check]:
    g = "1 picture equivalence"
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        spec = transforms.make_merry_go_round(random_profile(rng))
        z0s = random_ball(rng, 10)
        q0, p0 = z0s[:, :2], z0s[:, 2:]
        canon = integrate.integrate(spec, "canonical", z0s, 0.0, 1.0, 4096).states
        v0 = p0 - spec.potential.value(0.0, q0)
        force = integrate.integrate(spec, "force", np.concatenate([q0, v0], -1), 0.0, 1.0, 4096).states
        worst = max(worst, float(np.abs(canon[..., :2] - force[..., :2]).max()))
    elapsed = time.perf_counter() - start
    return [below(g, "canonical vs force q, 10 specs x 10 states", worst, 1e-7), below(g, "runtime [s]", elapsed, 10.0)]


def criterion_2() -> list[Check]:
    g = "2 closed-form oracle"
    spec = uniform_spec()
    z0 = [1.0, 0.0, 0.0, 0.0]
    traj = integrate.integrate(spec, "canonical", z0, 0.0, 1.0, 4096)
    worst = 0.0
    for t in (0.25, 0.5, 1.0):
        i = int(round(t * 4096))
        q, p = rotating_solution(TWO_PI * t, z0[:2], z0[2:], t)
        worst = max(worst, float(np.abs(traj.states[i] - np.concatenate([q, p])).max()))
    q1, p1 = rotating_solution(TWO_PI, z0[:2], z0[2:], 1.0)
    exact = np.concatenate([q1, p1])
    err = [float(np.abs(integrate.time_one_map(spec, "canonical", z0, n) - exact).max()) for n in (64, 128)]
    return [below(g, "error at t in {0.25, 0.5, 1}", worst, 1e-8), at_least(g, "error ratio 64 -> 128 steps", err[0] / err[1], 12.0)]


def criterion_3(seed: int = 3) -> list[Check]:
    g = "3 scalar elimination"
    rng = np.random.default_rng(seed)
    specs = [uniform_spec(), pulsing_spec()] + [transforms.make_merry_go_round(random_profile(rng)) for _ in range(3)]
    dev = max(elimination_deviation(s, random_ball(rng, 5)) for s in specs)
    grid_t = np.linspace(0.0, 1.0, 20, endpoint=False)
    grid_q = rng.uniform(-2.0, 2.0, (20, 2))
    twist = max(fields.twist_defect(transforms.eliminate_scalar(s), grid_t, grid_q).worst for s in specs)
    return [below(g, "force trajectories (A,phi) vs (A^phi,0)", dev, 1e-7), below(g, "twist defect of A^phi, 20x20 grid", twist, 1e-10)]


def criterion_4(seed: int = 4) -> list[Check]:
    g = "4 k-independence"
    rng = np.random.default_rng(seed)
    specs = [transforms.eliminate_scalar(uniform_spec()), transforms.eliminate_scalar(pulsing_spec())]
    spread = max(k_spread(s, random_loop(rng, 512)) for s in specs for _ in range(5))
    return [below(g, "window shift spread k=0..5, 5 loops n=512", spread, 1e-9)]


def criterion_5(seed: int = 5) -> list[Check]:
    g = "5 vector-field identities"
    rng = np.random.default_rng(seed)
    specs = [pulsing_spec(), transforms.make_merry_go_round(random_profile(rng)), transforms.eliminate_scalar(pulsing_spec())]
    res = [field_identity_residuals(s, rng) for s in specs]
    return [
        below(g, "omega(., X) = dH at 100 points", max(r[0] for r in res), 1e-10),
        below(g, "omega(., Y) = d/dt lambda at 100 points", max(r[1] for r in res), 1e-10),
        below(g, "Y vertical: max |Y_q| (must be exactly 0)", max(r[2] for r in res), 1e-300),
    ]


def criterion_6(seed: int = 6) -> list[Check]:
    g = "6 Hamiltonian elimination"
    rng = np.random.default_rng(seed)
    specs = [pulsing_spec(), transforms.make_merry_go_round(random_profile(rng))]
    res = [hamiltonian_elimination_residuals(s, rng) for s in specs]
    return [below(g, "Y^H = Y + X at 100 points", max(r[0] for r in res), 1e-10), below(g, "d lambda^H = d lambda (4x4)", max(r[1] for r in res), 1e-10)]


def criterion_7() -> list[Check]:
    g = "7 Euler-flow symplecticity"
    z0 = [1.0, 0.0, 0.0, 0.0]
    out = []
    for label, spec in (("pulsing", pulsing_spec()), ("eliminated", transforms.eliminate_scalar(uniform_spec()))):
        for t in (0.25, 0.5, 1.0):
            out.append(below(g, f"{label}: |D^T W_0 D - W_t|, t={t}", integrate.euler_flow_symplecticity_defect(spec, t, z0), 1e-6))
    return out


def criterion_7_pullback() -> list[Check]:
    """Supplementary: the identity (phi^t)^* omega_t = omega_0 on the same cases."""
    g = "7b Euler-flow pullback"
    z0 = [1.0, 0.0, 0.0, 0.0]
    out = []
    for label, spec in (("pulsing", pulsing_spec()), ("eliminated", transforms.eliminate_scalar(uniform_spec()))):
        for t in (0.25, 0.5, 1.0):
            out.append(below(g, f"{label}: |D^T W_t D - W_0|, t={t}", integrate.euler_flow_pullback_defect(spec, t, z0), 1e-6))
    return out


def criterion_8(seed: int = 8) -> list[Check]:
    g = "8 critical points"
    spec = uniform_spec()
    rng = np.random.default_rng(seed)
    cl = {n: action.gradient_defect(spec, action.circle_loop(n)) for n in (512, 1024)}
    sy = {n: action.gradient_defect(spec, action.circle_loop(n, with_velocity=True)) for n in (512, 1024)}
    fd = 0.0
    for s in (spec, pulsing_spec()):
        fd = max(fd, fd_gradient_error(s, random_loop(rng, 16)), fd_gradient_error(s, random_loop(rng, 16, phase=True)))
    return [
        below(g, "classical gradient on orbit, n=512", cl[512], 1e-3),
        below(g, "symplectic gradient on orbit, n=512", sy[512], 1e-3),
        at_least(g, "classical gradient shrink 512 -> 1024", cl[512] / cl[1024], 3.5),
        at_least(g, "symplectic gradient shrink 512 -> 1024", sy[512] / sy[1024], 3.5),
        below(g, "analytic vs finite-difference gradients", fd, 1e-5),
    ]


def criterion_9(seed: int = 9) -> list[Check]:
    g = "9 orbit finders"
    spec = uniform_spec()
    rng = np.random.default_rng(seed)
    exact = np.array([1.0, 0.0, 0.0, 0.0])
    guess = exact + 0.1 * rng.uniform(-1.0, 1.0, 4)
    shot = orbits.find_orbit_shooting(spec, "canonical", guess, tol=1e-9)
    circle = action.circle_loop(256)
    noisy = DiscreteLoop(circle.samples * (1.0 + 0.01 * rng.standard_normal(circle.samples.shape)))
    var = orbits.find_orbit_variational(spec, "classical", noisy, tol=1e-8)
    # variational loop -> canonical shooting; shooting orbit -> discrete gradient
    picture, z_var = orbits.loop_initial_state(spec, var.loop)
    cross_a = float(np.abs(integrate.time_one_map(spec, picture, z_var) - z_var).max())
    cross_b = action.gradient_defect(spec, shot.loop)
    return [
        below(g, "shooting fixed-point defect (10% guess)", shot.fixed_point_defect if shot.converged else math.inf, 1e-9),
        below(g, "variational gradient defect (1% circle)", var.gradient_defect if var.converged else math.inf, 1e-8),
        below(g, "cross-method: variational -> shooting", cross_a, 1e-6),
        below(g, "cross-method: shooting -> variational", cross_b, 1e-6),
    ]


REFERENCE_LOOP = "reference_loop.csv"


def reference_loop() -> DiscreteLoop:
    text = resources.files("rotorsym.data").joinpath(REFERENCE_LOOP).read_text(encoding="utf-8")
    return action.loop_from_csv(text)


def reference_action_repr() -> str:
    spec = transforms.eliminate_scalar(uniform_spec())
    return repr(action.symplectic_action(spec, reference_loop()))


def criterion_10() -> list[Check]:
    g = "10 well-definedness regression"
    first = reference_action_repr()
    second = reference_action_repr()
    proc = subprocess.run(
        [sys.executable, "-c", "from rotorsym.verify import reference_action_repr as f; print(f())"],
        capture_output=True,
        text=True,
        check=False,
    )
    other = proc.stdout.strip()
    mismatches = int(first != second) + int(first != other)
    return [below(g, f"mismatching reruns of {first}", mismatches, 1)]


CRITERIA = {
    "1": criterion_1,
    "2": criterion_2,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7,
    "7b": criterion_7_pullback,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
}


def run_acceptance(threads: int | None = None) -> list[Check]:
    # criterion 1 carries its own runtime bound, so it runs alone first
    out = criterion_1()
    rest = [fn for key, fn in CRITERIA.items() if key != "1"]
    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        for checks in pool.map(lambda fn: fn(), rest):
            out.extend(checks)
    return out


def run_configs(specs, threads: int | None = None) -> list[Check]:
    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        results = list(pool.map(config_checks, specs))
    return [c for checks in results for c in checks]


def render_report(checks) -> str:
    lines = [f"{'':6}{'group':<28} {'check':<52} measured     tol"]
    lines += [c.row() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
