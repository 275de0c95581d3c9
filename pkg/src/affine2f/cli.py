"""Command-line experiment runner.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines using
the same names as the long flags (dashes or underscores). Flags override
the file. Exit codes: 0 success, 1 failed selftest, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io, riccati
from .errors import NumericalError, ParameterError
from .model import LambdaPair, State, validate_params

PARAM_KEYS = ("a", "b", "m", "theta", "alpha")
RUN_KEYS = ("seed", "n_paths", "t_end", "n_steps", "scheme", "threads")
OUTPUT_KEYS = ("format", "out")
PARAM_DEFAULTS = {"m": 0.0, "theta": 1.0, "alpha": 2.0}
STOCHASTIC = {"simulate", "ergodic", "mixing"}

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3


def _pair(text: str) -> tuple:
    try:
        n, p = (int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'n,p', got {text!r}") from None
    return n, p


def _floats(text: str) -> list:
    """Comma list ``0,1,2.5`` or range ``start:stop:num`` (inclusive, linspace)."""
    try:
        if ":" in text:
            lo, hi, num = text.split(":")
            return np.linspace(float(lo), float(hi), int(num)).tolist()
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse number list {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _common(sp: argparse.ArgumentParser, formats=("json",)) -> None:
    g = sp.add_argument_group("model parameters")
    for key in PARAM_KEYS:
        g.add_argument(f"--{key}", type=float)
    sp.add_argument("--config", type=Path, help="key = value file; flags take precedence")
    sp.add_argument("--out", type=Path, help="output file (default: stdout)")
    sp.add_argument("--format", choices=formats)


def _seeded(sp) -> None:
    sp.add_argument("--seed", type=int, help="master seed (required)")
    sp.add_argument("--threads", type=int, help="worker threads (env AFFINE2F_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affine2f", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="simulate (Y, X) paths")
    _common(sp, ("csv", "json", "npz"))
    _seeded(sp)
    sp.add_argument("--n-paths", type=int)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--n-steps", type=int)
    sp.add_argument("--scheme", choices=("exact", "euler"))
    sp.add_argument("--y0", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--stationary-start", type=_bool, nargs="?", const=True)

    sp = sub.add_parser("transform", help="conditional Fourier-Laplace transform at time t")
    _common(sp)
    sp.add_argument("--lambda1", type=float)
    sp.add_argument("--lambda2", type=float)
    sp.add_argument("--t", type=float)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--rtol", type=float)

    sp = sub.add_parser("stationary-cf", help="stationary Fourier-Laplace transform")
    _common(sp)
    sp.add_argument("--lambda1", type=float)
    sp.add_argument("--lambda2", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--rtol", type=float)

    sp = sub.add_parser("moments", help="stationary (or transient) mixed moments, alpha = 2")
    _common(sp)
    sp.add_argument("--max-order", type=int)
    sp.add_argument("--t", type=float, help="transient moments at t from (y0, x0)")
    sp.add_argument("--y0", type=float)
    sp.add_argument("--x0", type=float)

    sp = sub.add_parser("density", help="CIR transition density of Y_t given Y_0")
    _common(sp, ("json", "csv"))
    sp.add_argument("--y0", type=float)
    sp.add_argument("--t", type=float)
    sp.add_argument("--y", type=_floats, help="points: '0.1,0.5' or 'start:stop:num'")

    sp = sub.add_parser("ergodic", help="time averages vs stationary moments")
    _common(sp, ("json", "csv"))
    _seeded(sp)
    sp.add_argument("--f", type=_pair, help="exponents 'n,p' of y^n x^p")
    sp.add_argument("--T", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--replicas", type=int)

    sp = sub.add_parser("mixing", help="relaxation of E g(Y_t, X_t)")
    _common(sp, ("json", "csv"))
    _seeded(sp)
    sp.add_argument("--g", type=_pair, help="exponents 'n,p' of y^n x^p")
    sp.add_argument("--times", type=_floats)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--n-paths", type=int)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--stationary-start", type=_bool, nargs="?", const=True)

    sp = sub.add_parser("drift-check", help="Foster-Lyapunov drift inequality on a grid")
    _common(sp)
    sp.add_argument("--c1", type=float)
    sp.add_argument("--c", type=float, help="rate in (0, 2 min(b, theta)); default min(b, theta)")
    sp.add_argument("--y-max", type=float)
    sp.add_argument("--x-min", type=float)
    sp.add_argument("--x-max", type=float)
    sp.add_argument("--grid-n", type=int)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.add_argument("--config", type=Path, help=argparse.SUPPRESS)
    return parser


def resolve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> dict:
    """Merge config file and flags into a flat dict; unknown keys are rejected."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    merged = {}
    if getattr(args, "config", None):
        for key, raw in io.parse_config_file(args.config).items():
            if key not in actions:
                raise ParameterError(f"unknown config key {key!r} for {args.command}")
            act = actions[key]
            try:
                merged[key] = act.type(raw) if act.type else raw
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise ParameterError(f"config key {key!r}: {exc}") from None
            if act.choices and merged[key] not in act.choices:
                raise ParameterError(f"config key {key!r} must be one of {sorted(act.choices)}")
    for key in actions:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _params(cfg: dict):
    raw = {k: cfg.get(k, PARAM_DEFAULTS.get(k)) for k in PARAM_KEYS}
    missing = [k for k, v in raw.items() if v is None]
    if missing:
        raise ParameterError(f"missing model parameter(s): {', '.join(missing)}")
    return validate_params(**raw)


def _blocks(command: str, cfg: dict, params) -> dict:
    """ExperimentConfig view: params / run / task / output blocks."""
    run = {k: cfg[k] for k in RUN_KEYS if k in cfg and k != "threads"}
    # the destination path is not part of the experiment identity
    output = {k: cfg[k] for k in OUTPUT_KEYS if k in cfg and k != "out"}
    task = {k: v for k, v in cfg.items() if k not in PARAM_KEYS + RUN_KEYS + OUTPUT_KEYS}
    return {"command": command, "params": params.as_dict(), "run": run, "task": task, "output": output}


def _emit_text(text: str, out: Optional[Path]) -> str:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return "stdout"
    out.write_text(text if text.endswith("\n") else text + "\n")
    return str(out)


def _g17(x: float) -> str:
    return io.FLOAT_FMT % x


def _complex_payload(z: complex) -> dict:
    value = complex(math.exp(z.real) * math.cos(z.imag), math.exp(z.real) * math.sin(z.imag))
    return {
        "exponent": {"re": z.real, "im": z.imag},
        "value": {"re": value.real, "im": value.imag},
        "modulus": math.exp(z.real),
    }


def _csv_rows(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_g17(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg, params, blocks, digest):
    from .sampler import STATIONARY, PathGrid, simulate_joint

    grid = PathGrid(cfg.get("t_end", 1.0), cfg.get("n_steps", 100))
    scheme = cfg.get("scheme", "exact" if params.is_diffusion else "euler")
    initial = STATIONARY if cfg.get("stationary_start") else State(cfg.get("y0", 1.0), cfg.get("x0", 0.0))
    ens = simulate_joint(cfg["seed"], initial, grid, cfg.get("n_paths", 1), scheme, params, threads=cfg.get("threads"))
    fmt = cfg.get("format", "csv")
    out = cfg.get("out")
    if fmt == "npz":
        if out is None:
            raise ParameterError("npz output needs --out")
        io.write_ensemble_npz(ens, out, digest)
        where = str(out)
    elif fmt == "csv":
        import io as _stdio

        buf = _stdio.StringIO()
        io.write_ensemble_csv(ens, buf)
        where = _emit_text(buf.getvalue(), out)
    else:
        payload = {"config_hash": digest, "config": blocks, "t": ens.grid.times, "y": ens.y, "x": ens.x}
        where = _emit_text(io.dump_json(payload), out)
    return f"{ens.n_paths} paths x {grid.n_steps} steps ({scheme}) -> {where}"


def cmd_transform(cfg, params, blocks, digest):
    lam = LambdaPair(cfg.get("lambda1", 0.0), cfg.get("lambda2", 0.0))
    state = State(cfg.get("y0", 0.0), cfg.get("x0", 0.0))
    z = riccati.transform_exponent(
        lam, cfg.get("t", 1.0), state, params,
        tol=cfg.get("tol", riccati.DEFAULT_ATOL), rtol=cfg.get("rtol", riccati.DEFAULT_RTOL),
    )
    payload = {"config_hash": digest, "config": blocks, **_complex_payload(z)}
    where = _emit_text(io.dump_json(payload), cfg.get("out"))
    return f"modulus {_g17(math.exp(z.real))} -> {where}"


def cmd_stationary_cf(cfg, params, blocks, digest):
    lam = LambdaPair(cfg.get("lambda1", 0.0), cfg.get("lambda2", 0.0))
    z = riccati.stationary_exponent(
        lam, params, tol=cfg.get("tol", riccati.DEFAULT_ATOL), rtol=cfg.get("rtol", riccati.DEFAULT_RTOL)
    )
    payload = {"config_hash": digest, "config": blocks, **_complex_payload(z)}
    where = _emit_text(io.dump_json(payload), cfg.get("out"))
    return f"modulus {_g17(math.exp(z.real))} -> {where}"


def cmd_moments(cfg, params, blocks, digest):
    from .stationary import initial_moments, moment_table, transient_moments

    order = cfg.get("max_order", 2)
    if "t" in cfg:
        start = State(cfg.get("y0", 0.0), cfg.get("x0", 0.0))
        table = transient_moments(cfg["t"], initial_moments(start, order, params), order, params)
    else:
        table = moment_table(order, params)
    payload = {"config_hash": digest, "config": blocks, **table.to_json_dict()}
    where = _emit_text(io.dump_json(payload), cfg.get("out"))
    return f"{len(table.entries)} moments up to order {order} -> {where}"


def cmd_density(cfg, params, blocks, digest):
    from .stationary import cir_transition_density

    ys = cfg.get("y", np.linspace(0.05, 5.0, 100).tolist())
    dens = cir_transition_density(np.asarray(ys), cfg.get("y0", 0.0), cfg.get("t", 1.0), params)
    if cfg.get("format", "json") == "csv":
        text = _csv_rows(["y", "density"], zip(map(float, ys), map(float, dens)))
    else:
        text = io.dump_json({"config_hash": digest, "config": blocks, "y": ys, "density": dens})
    where = _emit_text(text, cfg.get("out"))
    return f"{len(ys)} density values -> {where}"


def cmd_ergodic(cfg, params, blocks, digest):
    from .ergodicity import ergodic_report

    n, p = cfg.get("f", (1, 0))
    rep = ergodic_report(
        params, n, p, cfg.get("T", 200.0), cfg.get("dt", 0.01), cfg.get("replicas", 32),
        cfg["seed"], threads=cfg.get("threads"),
    )
    d = rep.to_dict()
    if cfg.get("format", "json") == "csv":
        text = _csv_rows(list(d), [[float(v) if isinstance(v, float) else v for v in d.values()]])
    else:
        text = io.dump_json({"config_hash": digest, "config": blocks, "report": d})
    where = _emit_text(text, cfg.get("out"))
    verdict = "exploratory" if rep.exploratory else ("pass" if rep.passed else "fail")
    return f"estimate {_g17(rep.estimate)} ({verdict}) -> {where}"


def cmd_mixing(cfg, params, blocks, digest):
    from .ergodicity import mixing_decay

    n, p = cfg.get("g", (1, 0))
    times = cfg.get("times", np.linspace(0.0, 5.0, 26).tolist())
    initial = "stationary" if cfg.get("stationary_start") else State(cfg.get("y0", 1.0), cfg.get("x0", 0.0))
    curve = mixing_decay(
        params, n, p, times, cfg.get("n_paths", 2000), initial, cfg["seed"],
        dt=cfg.get("dt", 0.01), threads=cfg.get("threads"),
    )
    if cfg.get("format", "json") == "csv":
        rows = zip(curve.times.tolist(), curve.transient.tolist(), curve.monte_carlo.tolist(), curve.mc_stderr.tolist())
        text = _csv_rows(["t", "transient", "monte_carlo", "mc_stderr"], rows)
    else:
        text = io.dump_json({"config_hash": digest, "config": blocks, "curve": curve.to_dict()})
    where = _emit_text(text, cfg.get("out"))
    return f"fitted rate {_g17(curve.beta_hat)} -> {where}"


def cmd_drift_check(cfg, params, blocks, digest):
    from .generator import lyapunov_drift_check, rectangle_grid

    params.require_stationary("drift-check")
    grid = rectangle_grid(cfg.get("y_max", 20.0), cfg.get("x_min", -20.0), cfg.get("x_max", 20.0), cfg.get("grid_n", 50))
    rep = lyapunov_drift_check(cfg.get("c1", 0.0), cfg.get("c", min(params.b, params.theta)), grid, params)
    payload = {
        "config_hash": digest, "config": blocks,
        "c1": rep.c1, "c2": rep.c2, "c": rep.c, "d": rep.d,
        "max_violation": rep.max_violation, "argmax": list(rep.argmax), "satisfied": rep.satisfied,
    }
    where = _emit_text(io.dump_json(payload), cfg.get("out"))
    return f"max violation {_g17(rep.max_violation)} -> {where}"


COMMANDS = {
    "simulate": cmd_simulate,
    "transform": cmd_transform,
    "stationary-cf": cmd_stationary_cf,
    "moments": cmd_moments,
    "density": cmd_density,
    "ergodic": cmd_ergodic,
    "mixing": cmd_mixing,
    "drift-check": cmd_drift_check,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        from .acceptance import run_all

        results = run_all()
        failed = [r for r in results if not r.passed]
        print(f"selftest: {len(results) - len(failed)}/{len(results)} criteria passed")
        return EXIT_FAILED if failed else EXIT_OK
    try:
        cfg = resolve(parser, args)
        params = _params(cfg)
        if args.command in STOCHASTIC and "seed" not in cfg:
            raise ParameterError(f"{args.command} needs --seed")
        blocks = _blocks(args.command, cfg, params)
        digest = io.config_hash(blocks)
        summary = COMMANDS[args.command](cfg, params, blocks, digest)
    except ParameterError as exc:
        print(f"affine2f {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"affine2f {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"affine2f {args.command} ok [config {digest}] {summary}", file=sys.stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
