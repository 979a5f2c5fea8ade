"""Command-line entry point.

Exit codes: 0 ok, 1 usage or config error, 2 divergence, 3 non-convergence,
4 verification failure.  Errors go to stderr prefixed with ``error:``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import action, config, orbits, verify
from .domain import DiscreteLoop, LoopSizeError, UnsupportedFamilyError
from .integrate import DEFAULT_STEPS, DivergenceError, Picture, integrate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGENCE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

log = logging.getLogger("rotorsym")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for divergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def fmt(x) -> str:
    return format(float(x), ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_state(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"--z0 needs four comma-separated reals, got {text!r}")
    try:
        z = np.array([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"--z0 needs four comma-separated reals, got {text!r}") from None
    if not np.all(np.isfinite(z)):
        raise UsageError("--z0 components must be finite")
    return z


def _write(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    spec = config.load_config(args.config)
    z0 = parse_state(args.z0)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not args.t1 > 0:
        raise UsageError("--t1 must be positive")
    traj = integrate(spec, args.picture, z0, 0.0, args.t1, args.steps)
    _write(traj.to_csv(), args.out)
    return EXIT_OK


def _default_loop_path(out) -> str | None:
    if out is None or out == "-":
        return None
    path = Path(out)
    return str(path.with_name(path.stem + ".loop.csv"))


def _multi_start(run, starts, threads):
    # each start is deterministic; results are gathered in start order
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, starts))
    converged = [r for r in results if r.converged]
    candidates = converged or results
    if results[0].method is orbits.Method.SHOOTING:
        return min(candidates, key=lambda r: r.fixed_point_defect)
    return min(candidates, key=lambda r: r.gradient_defect)


def cmd_find_orbit(args) -> int:
    spec = config.load_config(args.config)
    if args.tol is not None and not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.seed_count < 1:
        raise UsageError("--seed-count must be >= 1")
    threads = verify.thread_count()
    if args.method == "shooting":
        if args.z0 is None:
            raise UsageError("shooting needs --z0")
        tol = args.tol or 1e-9
        picture = args.picture or "canonical"
        starts = orbits.perturbed_guesses(parse_state(args.z0), args.seed_count)
        result = _multi_start(
            lambda z: orbits.find_orbit_shooting(spec, picture, z, tol, args.max_iter, args.steps), starts, threads
        )
    else:
        if args.loop is None:
            raise UsageError("variational search needs --loop")
        tol = args.tol or 1e-8
        guess = action.read_loop_csv(args.loop, drop_closing_row=True)
        functional = args.functional or ("symplectic" if guess.is_phase else "classical")
        starts = [guess]
        for seed in range(1, args.seed_count):
            rng = np.random.default_rng(seed)
            scale = 0.01 * (1.0 + np.abs(guess.samples).max())
            starts.append(DiscreteLoop(guess.samples + scale * rng.standard_normal(guess.samples.shape)))
        result = _multi_start(
            lambda lp: orbits.find_orbit_variational(spec, functional, lp, tol, args.max_iter, args.steps), starts, threads
        )
    loop_path = args.loop_out or _default_loop_path(args.out)
    if loop_path:
        action.write_loop_csv(result.loop, loop_path)
    _write(dumps(result.to_json(loop_path)) + "\n", args.out)
    if not result.converged:
        print(f"error: no convergence after {result.iterations} iterations", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_action(args) -> int:
    spec = config.load_config(args.config)
    loop = action.read_loop_csv(args.loop, drop_closing_row=True)
    functional = args.functional or ("symplectic" if loop.is_phase else "classical")
    if (functional == "symplectic") != loop.is_phase:
        kind = "phase (t,q1,q2,p1,p2)" if functional == "symplectic" else "configuration (t,q1,q2)"
        raise UsageError(f"{functional} functional needs a {kind} loop")
    if functional == "symplectic":
        value = action.symplectic_action(spec, loop)
    else:
        value = action.classical_action(spec, loop)
    doc = {"functional": functional, "n": loop.n, "value": value, "gradient_sup": action.gradient_defect(spec, loop)}
    _write(dumps(doc) + "\n", None)
    return EXIT_OK


def cmd_verify(args) -> int:
    specs = []
    if args.all_presets:
        names = list(config.SHIPPED_PRESETS) if args.presets is None else [n for n in args.presets.split(",") if n]
        if not names:
            raise UsageError("empty preset list")
        for name in names:
            if name not in config.SHIPPED_PRESETS:
                raise UsageError(f"unknown preset {name!r}; shipped presets: {', '.join(config.SHIPPED_PRESETS)}")
            specs.append(config.build_spec(config.SHIPPED_PRESETS[name]))
    elif args.presets is not None:
        raise UsageError("--presets requires --all-presets")
    for path in args.config or ():
        specs.append(config.load_config(path))
    if not specs:
        raise UsageError("nothing to verify: give --config or --all-presets")
    checks = verify.run_configs(specs)
    if args.all_presets and not args.skip_acceptance:
        checks += verify.run_acceptance()
    report = verify.render_report(checks)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    sys.stdout.write(report)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rotorsym", description="Magnetic systems with twisted-periodic potentials.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="integrate a trajectory and write CSV")
    sim.add_argument("--config", required=True)
    sim.add_argument("--picture", choices=[p.value for p in Picture], default="canonical")
    sim.add_argument("--z0", required=True, help="q1,q2,p1,p2 (force picture: q1,q2,qdot1,qdot2)")
    sim.add_argument("--t1", type=float, default=1.0)
    sim.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    sim.add_argument("--out", help="CSV path (default: stdout)")
    sim.set_defaults(func=cmd_simulate)

    fo = sub.add_parser("find-orbit", help="search for a 1-periodic orbit")
    fo.add_argument("--config", required=True)
    fo.add_argument("--method", choices=[m.value for m in orbits.Method], default="shooting")
    fo.add_argument("--picture", choices=["canonical", "twisted", "force"], help="shooting picture (default canonical)")
    fo.add_argument("--z0", help="shooting guess q1,q2,p1,p2")
    fo.add_argument("--loop", help="variational guess loop CSV")
    fo.add_argument("--functional", choices=[f.value for f in orbits.Functional])
    fo.add_argument("--tol", type=float)
    fo.add_argument("--max-iter", type=int, default=20)
    fo.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    fo.add_argument("--seed-count", type=int, default=1, help="number of seeded starts")
    fo.add_argument("--out", help="result JSON path (default: stdout)")
    fo.add_argument("--loop-out", help="orbit loop CSV path (default: next to --out)")
    fo.set_defaults(func=cmd_find_orbit)

    act = sub.add_parser("action", help="evaluate a discrete action on a loop")
    act.add_argument("--config", required=True)
    act.add_argument("--loop", required=True)
    act.add_argument("--functional", choices=[f.value for f in orbits.Functional])
    act.set_defaults(func=cmd_action)

    ver = sub.add_parser("verify", help="run invariant checks and acceptance criteria")
    ver.add_argument("--config", action="append", help="config to check (repeatable)")
    ver.add_argument("--all-presets", action="store_true", help="shipped presets plus acceptance criteria")
    ver.add_argument("--presets", help="comma-separated subset of shipped presets")
    ver.add_argument("--skip-acceptance", action="store_true")
    ver.add_argument("--out", help="report path")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (config.ConfigError, action.LoopFormatError, LoopSizeError, UnsupportedFamilyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.strerror or exc}: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
