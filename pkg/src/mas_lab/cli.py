"""Command-line entry point: ``mas-lab <subcommand>`` or ``python -m mas_lab``.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 solver failure.
"""

import argparse
import json
import sys

import numpy as np

from . import experiments as exp
from . import kernels
from .exceptions import DomainError

EXIT_OK, EXIT_CHECK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3


def _cmd_run(args):
    cfg = exp.load_config(args.config)
    rep = exp.run(cfg, args.out)
    d = rep.diagnostics
    print(f"{rep.name}: regime={d.get('regime')} t={d.get('t')} N={d.get('N')} -> {rep.out_dir}")
    for f in rep.files:
        print(f"  {f['path']}  sha256={f['sha256'][:16]}")
    return EXIT_OK


def _cmd_figure(args):
    path = exp.figure(args.id, args.out)
    print(path)
    return EXIT_OK


def _cmd_verify_kernels(args):
    if args.m is not None:
        if args.x is None or args.y is None:
            raise exp.ConfigError("single-case mode needs --m, --x and --y")
        closed = kernels.eval_J_closed(args.m, args.x, args.y)
        quad = kernels.eval_J_quadrature(args.m, args.x, args.y, nodes=args.nodes)
        print(f"J({args.m}, {args.x}, {args.y}): closed={closed:.17g} quadrature={quad:.17g} diff={abs(closed - quad):.3e}")
        return EXIT_OK if abs(closed - quad) <= args.tol else EXIT_CHECK
    rep = exp.verify_kernels(args.tol)
    w = rep.worst
    print(f"{len(rep.checks)} checks, {len(rep.failures)} above tol={args.tol:g}")
    print(f"worst: {w.name}{w.args} error={w.error:.3e}")
    for c in rep.failures[:20]:
        print(f"  FAIL {c.name}{c.args}: closed={c.closed:.17g} reference={c.reference:.17g} error={c.error:.3e}")
    return EXIT_OK if rep.passed else EXIT_CHECK


def _cmd_roundoff(args):
    rep = exp.roundoff_demo(args.N)
    print(json.dumps(exp.jsonable(rep.to_dict()), indent=2))
    ok = rep.dft_near_reference and rep.dense_deviates and rep.control_agrees
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_perturb(args):
    cfg = exp.load_config(args.config)
    rep = exp.perturb(cfg, args.noise, args.seed, args.out)
    print(json.dumps(exp.jsonable(rep.to_dict()), indent=2))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="mas-lab", description="Method-of-auxiliary-sources experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one scenario and write CSV outputs and report.json")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("figure", help="write plot-ready CSV for a published figure")
    p.add_argument("id", choices=exp.FIGURES)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("verify-kernels", help="closed-form kernels against quadrature")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--nodes", type=int, default=4096)
    p.set_defaults(func=_cmd_verify_kernels)

    p = sub.add_parser("roundoff-demo", help="DFT against dense solve at large N")
    p.add_argument("--N", type=int, default=101)
    p.set_defaults(func=_cmd_roundoff)

    p = sub.add_parser("perturb", help="re-solve with perturbed boundary data")
    p.add_argument("config")
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_perturb)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (exp.ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (np.linalg.LinAlgError, OverflowError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
