"""Command-line front end.

    maxplus-lln analyze  --builtin mairesse --p 0.6
    maxplus-lln estimate --model model.json --format csv --out exps.csv
    maxplus-lln simulate --builtin exchanges --horizon 100 --out traj.csv
    maxplus-lln verify   --model model.json --horizon 100000
    maxplus-lln example  mairesse --p 0.5 --horizon 200000 --seed 7

Exit codes: 0 success, 1 failed assertion in ``example``, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path

from .builtin_checks import run_example
from .graph import decompose
from .lyapunov import DEFAULT_HORIZON, DEFAULT_REPLICATES, estimate_bottom_exponent, estimate_top_exponent, \
    predicted_limit, trajectory
from .models import BUILTINS, MatrixModel, ModelError, builtin_example, load_model, sample_array
from .report import build_report, csv_float, dumps_json, write_exponent_csv, write_trajectory_csv
from .semiring import format_entry

__all__ = ["main", "build_parser", "ConfigError", "RunConfig"]


class ConfigError(Exception):
    """Invalid invocation: reported with exit code 2."""


class RunConfig(argparse.Namespace):
    """Parsed flags (see :func:`build_parser`)."""


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, float(value) if any(c in value for c in ".eE") else int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}") from None


def _add_common(sp: argparse.ArgumentParser, horizon: int, *, model: bool = True):
    if model:
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--model", type=Path, help="model config (JSON)")
        src.add_argument("--builtin", choices=sorted(BUILTINS), help="reference model")
        sp.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                        help="builtin parameter (e.g. alpha=0.8, phase=1)")
    sp.add_argument("--p", type=float, help="probability of B in the mairesse model")
    sp.add_argument("--seed", type=int, help="master seed (overrides the model's)")
    sp.add_argument("--horizon", type=_positive, default=horizon, help=f"number of steps (default {horizon})")
    sp.add_argument("--reps", type=_positive, default=DEFAULT_REPLICATES,
                    help=f"Monte Carlo replicates (default {DEFAULT_REPLICATES})")
    sp.add_argument("--out", type=Path, help="output file (default: stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    sp.add_argument("--checkpoints", type=_positive, help="number of diagnostic checkpoints (default: every step)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maxplus-lln",
                                 description="Law-of-large-numbers analysis of max-plus matrix recursions.")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    sp = sub.add_parser("analyze", help="graph decomposition, component exponents and predicted limit")
    _add_common(sp, DEFAULT_HORIZON)
    sp = sub.add_parser("estimate", help="Lyapunov exponents (CSV table by default)")
    _add_common(sp, DEFAULT_HORIZON)
    sp = sub.add_parser("simulate", help="one trajectory x(0..n) as CSV")
    _add_common(sp, 1000)
    sp.add_argument("--replicate", type=int, default=0, help="replicate stream index (default 0)")
    sp.add_argument("--log-matrices", type=Path, help="also write A(0..n-1) as JSON lines")
    sp = sub.add_parser("verify", help="full report: hypotheses, verdict, diagnostics")
    _add_common(sp, 100_000)
    sp.add_argument("--mc-horizon", type=_positive, default=DEFAULT_HORIZON,
                    help=f"horizon of exponent estimates (default {DEFAULT_HORIZON})")
    sp.add_argument("--tolerance", type=float, default=0.05, help="limit consistency tolerance (default 0.05)")
    sp = sub.add_parser("example", help="run a reference model end to end and check its known facts")
    sp.add_argument("name", choices=sorted(BUILTINS))
    _add_common(sp, 200_000, model=False)
    return ap


def _load(args) -> MatrixModel:
    if getattr(args, "model", None) is not None:
        if args.param or args.p is not None:
            raise ConfigError("--param/--p only apply to --builtin models")
        model = load_model(args.model)
    else:
        params = dict(args.param)
        if args.p is not None:
            if args.builtin != "mairesse":
                raise ConfigError("--p only applies to the mairesse builtin")
            params["p"] = args.p
        model = builtin_example(args.builtin, **params)
    if args.seed is not None:
        model = model.with_seed(args.seed)
    return model


@contextmanager
def _output(path: Path | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _cmd_analyze(args) -> int:
    model = _load(args)
    dec = decompose(model, horizon=args.horizon, replicates=args.reps)
    if args.format == "csv":
        with _output(args.out) as fh:
            write_exponent_csv(dec, fh)
        return 0
    doc = {"decomposition": dec.to_dict(), "predicted_limit": predicted_limit(dec).to_dict()}
    with _output(args.out) as fh:
        fh.write(dumps_json(doc))
    return 0


def _cmd_estimate(args) -> int:
    model = _load(args)
    dec = decompose(model, horizon=args.horizon, replicates=args.reps)
    top = estimate_top_exponent(model, args.horizon, args.reps)
    bottom = estimate_bottom_exponent(model, args.horizon, args.reps)
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(dumps_json({"gamma": top.to_dict(), "gamma_b": bottom.to_dict(),
                                 "components": dec.to_dict()}))
        else:
            write_exponent_csv(dec, fh)
            for label, e in (("gamma(A)", top), ("gamma_b(A)", bottom)):
                fh.write(f"{label},{csv_float(e.value)},,{csv_float(e.sigma)},{e.method}\n")
    return 0


def _cmd_simulate(args) -> int:
    if args.format == "json":
        raise ConfigError("simulate only writes CSV")
    model = _load(args)
    states = trajectory(model, args.horizon, args.replicate)
    with _output(args.out) as fh:
        write_trajectory_csv(states, fh)
    if args.log_matrices is not None:
        mats = sample_array(model, args.horizon, args.replicate)
        with _output(args.log_matrices) as fh:
            for k, a in enumerate(mats):
                fh.write(json.dumps({"n": k, "A": [[format_entry(v) for v in row] for row in a]}) + "\n")
    return 0


def _cmd_verify(args) -> int:
    if args.format == "csv":
        raise ConfigError("verify only writes JSON")
    model = _load(args)
    rep = build_report(model, horizon=args.mc_horizon, replicates=args.reps,
                       diagnostics_horizon=args.horizon if args.horizon >= 1000 else None,
                       checkpoints=args.checkpoints, consistency=True, consistency_horizon=args.horizon,
                       tolerance=args.tolerance)
    with _output(args.out) as fh:
        fh.write(rep.dumps())
    return 0


def _cmd_example(args) -> int:
    if args.format == "csv":
        raise ConfigError("example only writes JSON")
    if args.p is not None and args.name != "mairesse":
        raise ConfigError("--p only applies to the mairesse example")
    if args.name == "mairesse" and args.p is not None and not 0.0 < args.p < 1.0:
        raise ConfigError("mairesse needs 0 < p < 1")
    run = run_example(args.name, p=0.5 if args.p is None else args.p, seed=args.seed or 0,
                      horizon=args.horizon, replicates=args.reps, checkpoints=args.checkpoints)
    with _output(args.out) as fh:
        fh.write(dumps_json(run.to_dict()))
    for a in run.assertions:
        print(f"[{'PASS' if a.passed else 'FAIL'}] {a.name}: {a.detail}", file=sys.stderr)
    return 0 if run.passed else 1


_COMMANDS = {
    "analyze": _cmd_analyze,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "example": _cmd_example,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv, namespace=RunConfig())
    try:
        return _COMMANDS[args.subcommand](args)
    except (ConfigError, ModelError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"maxplus-lln: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
