"""Command line entry point: sweeps, preset tables, mesh dumps and self-checks.

Exit codes: 0 success, 1 some cells failed (or a check failed), 2 invalid
configuration.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from ..mesh import MeshConfig, bakhvalov_mesh, write_mesh_csv
from .checks import run_checks
from .study import NORMS, PRESETS, SweepConfig, config_from_dict, emit_table, preset, run_study

EXIT_OK, EXIT_CELL_FAILURE, EXIT_INVALID = 0, 1, 2


class ConfigError(ValueError):
    pass


def parse_float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"not a comma-separated list of numbers: {text!r}") from None


def parse_int_list(text):
    """``"8,16,32"`` or the geometric form ``"8..1024x2"``."""
    try:
        if ".." in text:
            start, rest = text.split("..", 1)
            stop, _, factor = rest.partition("x")
            start, stop, factor = int(start), int(stop), int(factor or 2)
            if start < 1 or factor < 2:
                raise ValueError
            out = []
            n = start
            while n <= stop:
                out.append(n)
                n *= factor
            return out
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"not an integer list or range like 8..1024x2: {text!r}") from None


def _add_sweep_flags(p):
    p.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    p.add_argument("--k", help="polynomial degrees, comma list")
    p.add_argument("--eps", help="diffusion parameters, comma list")
    p.add_argument("--n", help="element counts, comma list or START..STOPxFACTOR")
    p.add_argument("--sigma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--penalty", help="two-level (alias paper) | const:<value>")
    p.add_argument("--norm", choices=NORMS)
    p.add_argument("--quad-assembly", type=int)
    p.add_argument("--quad-error", type=int)
    p.add_argument("--roundoff-probes", type=int,
                   help="perturbed re-solves per cell for the round-off sensitivity (0 disables)")
    p.add_argument("--format", choices=["md", "csv"], default="md")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--jobs", type=int)
    p.add_argument("--problem", choices=["layer", "paper", "expr"])
    for name in ("b", "c", "f", "u", "uprime"):
        p.add_argument(f"--{name}", help=f"expression for {name}(x) (with --problem expr)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bakhvalov-nipg",
        description="NIPG on Bakhvalov meshes: convergence sweeps and checks",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sweep_flags(sub.add_parser("run", help="sweep from flags or a config file"))
    for name in PRESETS:
        _add_sweep_flags(sub.add_parser(name, help=f"preset sweep {name}"))
    md = sub.add_parser("mesh-dump", help="write a Bakhvalov mesh as CSV")
    md.add_argument("--n", type=int, required=True)
    md.add_argument("--eps", type=float, required=True)
    md.add_argument("--k", type=int, default=1)
    md.add_argument("--sigma", type=float)
    md.add_argument("--alpha", type=float, default=2.0)
    md.add_argument("--out")
    ck = sub.add_parser("check", help="run quick property suites")
    ck.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args):
    if args.command in PRESETS:
        config = preset(args.command)
    else:
        config = SweepConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from None
        config = config_from_dict({**_fields(config), **data})
    updates = {}
    if args.k:
        updates["k"] = parse_int_list(args.k)
    if args.eps:
        updates["eps"] = parse_float_list(args.eps)
    if args.n:
        updates["N"] = parse_int_list(args.n)
    for name in ("sigma", "alpha", "penalty", "norm", "quad_assembly", "quad_error",
                 "roundoff_probes", "jobs", "problem"):
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    exprs = {n: getattr(args, n) for n in ("b", "c", "f", "u", "uprime") if getattr(args, n)}
    if exprs:
        updates["expressions"] = {**config.expressions, **exprs}
    config = replace(config, **updates)
    config.validate()
    return config


def _fields(config):
    return {name: getattr(config, name) for name in SweepConfig.__dataclass_fields__}


def _write(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args):
    try:
        config = config_from_args(args)
    except Exception as err:  # any validation problem is a configuration error
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_INVALID
    table = run_study(config)
    _write(emit_table(table, args.format), args.out)
    for cell in table.failures:
        print(f"cell k={cell.k} eps={cell.eps:g} N={cell.N} failed: {cell.failure}",
              file=sys.stderr)
    return EXIT_CELL_FAILURE if table.failures else EXIT_OK


def cmd_mesh_dump(args):
    sigma = args.sigma if args.sigma is not None else args.k + 1
    try:
        mesh = bakhvalov_mesh(MeshConfig(args.n, sigma, args.alpha, args.eps))
    except ValueError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_mesh_csv(mesh, fh)
    else:
        write_mesh_csv(mesh, sys.stdout)
    return EXIT_OK


def cmd_check(args):
    results = run_checks(args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CELL_FAILURE


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "mesh-dump":
        return cmd_mesh_dump(args)
    if args.command == "check":
        return cmd_check(args)
    return cmd_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
