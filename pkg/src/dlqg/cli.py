"""Command-line interface.

Subcommands: validate, synth, analyze, simulate, compare, rand.
Exit codes: 0 success, 1 validation failure, 2 solver failure,
3 I/O or parse error.  ``--json`` switches stdout to machine-readable
reports; human-readable errors always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .baselines import compare
from .core import BlockDims, load_problem, random_instance, save_problem, validate
from .errors import DlqgError, ParseError, SolverError, ValidationFailure
from .evaluation import analytic_cost, closed_loop, cost_decomposition, simulate
from .riccati import spectral_radius
from .synthesis import load_controller, save_controller, synthesize

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _provenance(args):
    keys = ("tol", "dare_tol", "lyap_tol", "max_iter", "damping", "seed",
            "steps", "horizon", "spectral_target")
    prov = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    prov["version"] = __version__
    return prov


def _emit(args, doc, human_lines):
    if args.json:
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        for line in human_lines:
            print(line)


def _cmd_validate(args):
    instance = load_problem(args.problem, check=False)
    report = validate(instance)
    doc = {"violations": [{"code": v.code, "message": v.message} for v in report],
           "valid": not report, "provenance": _provenance(args)}
    lines = ["valid: no violations"] if not report else \
        [f"violation [{v.code}]: {v.message}" for v in report]
    _emit(args, doc, lines)
    return EXIT_OK if not report else EXIT_VALIDATION


def _cmd_synth(args):
    instance = load_problem(args.problem)
    gains, realization = synthesize(instance, tol=args.tol,
                                    dare_tol=args.dare_tol,
                                    max_iter=args.max_iter,
                                    damping=args.damping)
    save_controller(args.output, realization, gains)
    doc = {"output": args.output, "q": realization.q,
           "radius_F": spectral_radius(realization.F),
           "provenance": _provenance(args)}
    _emit(args, doc, [f"controller written to {args.output} "
                      f"(q={realization.q}, rho(F)={doc['radius_F']:.6g})"])
    return EXIT_OK


def _cmd_analyze(args):
    instance = load_problem(args.problem)
    realization, gains = load_controller(args.controller)
    model = closed_loop(instance, realization)
    J = analytic_cost(model, tol=args.lyap_tol)
    doc = {"J": J, "radius_closed_loop": spectral_radius(model.Acl),
           "provenance": _provenance(args)}
    lines = [f"J = {J:.12g}",
             f"rho(closed loop) = {doc['radius_closed_loop']:.6g}"]
    if gains is not None:
        decomp = cost_decomposition(instance, gains, tol=args.lyap_tol)
        doc["decomposition"] = decomp.to_dict()
        lines += [f"J_hat_z = {decomp.J_hat_z:.12g}",
                  f"J_tilde_z = {decomp.J_tilde_z:.12g}",
                  f"J_tilde_x = {decomp.J_tilde_x:.12g}",
                  "max cross-covariance = "
                  f"{max(decomp.cross_covariance_norms.values()):.3g}"]
    _emit(args, doc, lines)
    return EXIT_OK


def _cmd_simulate(args):
    instance = load_problem(args.problem)
    realization, _ = load_controller(args.controller)
    cost, summary = simulate(instance, realization, steps=args.steps,
                             seed=args.seed)
    doc = {"empirical_cost": cost, "trace_summary": summary,
           "provenance": _provenance(args)}
    _emit(args, doc, [f"empirical cost over {args.steps} steps "
                      f"(seed {args.seed}): {cost:.12g}"])
    return EXIT_OK


def _cmd_compare(args):
    instance = load_problem(args.problem)
    report = compare(instance, horizon=args.horizon, tol=args.tol,
                     dare_tol=args.dare_tol)
    doc = report.to_dict()
    doc["provenance"] = _provenance(args)
    _emit(args, doc, [
        f"J_central     = {report.J_central:.12g}",
        f"J_distributed = {report.J_distributed:.12g}",
        f"J_common_info = {report.J_common_info:.12g}",
        f"J_oracle({report.horizon}) = {report.J_oracle:.12g}",
        f"sandwich_ok = {report.sandwich_ok}",
    ])
    return EXIT_OK


def _cmd_rand(args):
    dims = BlockDims(*args.dims)
    instance = random_instance(args.seed, dims,
                               spectral_target=args.spectral_target,
                               decoupled=args.decoupled)
    save_problem(instance, args.output)
    _emit(args, {"output": args.output, "provenance": _provenance(args)},
          [f"problem written to {args.output}"])
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="dlqg",
                                     description="Distributed LQG synthesis for "
                                                 "two interconnected systems")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable report on stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_solver_flags(p):
        p.add_argument("--tol", type=float, default=1e-9,
                       help="coupled-iteration tolerance")
        p.add_argument("--dare-tol", dest="dare_tol", type=float, default=1e-12)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=200)
        p.add_argument("--damping", type=float, default=1.0)

    p = sub.add_parser("validate", help="check a problem file")
    p.add_argument("problem")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("synth", help="synthesize the optimal controller")
    p.add_argument("problem")
    p.add_argument("-o", "--output", required=True)
    add_solver_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("analyze", help="analytic cost and decomposition")
    p.add_argument("problem")
    p.add_argument("controller")
    p.add_argument("--lyap-tol", dest="lyap_tol", type=float, default=1e-11)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", help="seeded Monte-Carlo cost estimate")
    p.add_argument("problem")
    p.add_argument("controller")
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="baselines, oracle and cost sandwich")
    p.add_argument("problem")
    p.add_argument("--horizon", type=int, default=200)
    add_solver_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("rand", help="generate a random admissible instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dims", type=int, nargs=6, required=True,
                   metavar=("N1", "N2", "M1", "M2", "P1", "P2"))
    p.add_argument("--spectral-target", dest="spectral_target", type=float,
                   default=0.8)
    p.add_argument("--decoupled", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_rand)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ParseError, OSError) as exc:
        print(f"I/O or parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DlqgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
