"""Command-line front end.

Exit codes: 0 success/pass, 1 validation failure, 2 verdict failure,
64 input or schema error, 65 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema

from . import output
from .analysis import (DEFAULT_EPS_LADDER, SolverSettings, Study, convergence_study)
from .characteristics import build_fan
from .errors import (DegenerateRoots, InitJumpError, InvalidParameter, NumericalFailure,
                     PositivityViolation, RegionEmpty)
from .expr import ExpressionError
from .jumps import JumpMode, jump_consistency_defect, make_jumps
from .problem import ProblemSpec, validate
from .solver import solve_oracle_constant, solve_perturbed

EXIT_OK, EXIT_INVALID, EXIT_VERDICT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 64, 65

_EXPR = {"type": "string", "minLength": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["Q", "A", "pi0", "pi1"],
    "properties": {
        **{k: _EXPR for k in ("Q", "A", "B", "F", "K0", "K1", "pi0", "pi1")},
        "t_end": _POS,
        "x0_min": {"type": "number"},
        "x0_max": {"type": "number"},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h_coarse": _POS,
                "fine_divisor": _POS,
                "layer_factor": _POS,
                "fan_size": {"type": "integer", "minimum": 3},
                "char_step": _POS,
            },
        },
        "jumps": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["paper", "zero", "custom"]},
                "delta0_expr": _EXPR,
                "delta_expr": _EXPR,
            },
        },
    },
}


class InputError(Exception):
    pass


class Job:
    """A loaded problem document merged with command-line overrides."""

    def __init__(self, args):
        try:
            doc = json.loads(Path(args.file).read_text())
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"cannot read {args.file}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.file}: malformed JSON: {exc}") from exc
        try:
            jsonschema.validate(doc, PROBLEM_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<document>"
            raise InputError(f"{args.file}: schema error at {where}: {exc.message}") from exc

        try:
            self.spec = ProblemSpec.create(
                **{k: doc[k] for k in ("Q", "A", "B", "F", "K0", "K1", "pi0", "pi1") if k in doc},
                t_end=doc.get("t_end", 1.0),
                x0_interval=(doc.get("x0_min", 0.0), doc.get("x0_max", 1.0)))
        except (ExpressionError, InvalidParameter) as exc:
            raise InputError(f"{args.file}: {exc}") from exc

        solver = dict(doc.get("solver", {}))
        for key in ("h_coarse", "fan_size", "char_step", "fine_divisor", "layer_factor"):
            value = getattr(args, key, None)
            if value is not None:
                solver[key] = value
        self.settings = replace(SolverSettings(), **solver)

        jumps = doc.get("jumps", {})
        self.mode = JumpMode(getattr(args, "jumps", None) or jumps.get("mode", "paper"))
        self.delta0_expr = jumps.get("delta0_expr")
        self.delta_expr = jumps.get("delta_expr")
        self.strict = args.strict
        self.workers = max(1, args.threads or os.cpu_count() or 1)
        self.out = Path(getattr(args, "out", ".") or ".")

    def validated(self):
        return validate(self.spec, strict=self.strict, step=self.settings.char_step)

    def study(self, p) -> Study:
        try:
            return Study.prepare(p, self.mode, self.settings, self.workers,
                                 self.delta0_expr, self.delta_expr)
        except ExpressionError as exc:
            raise InputError(f"jump expressions: {exc}") from exc


# -- commands -----------------------------------------------------------------

def cmd_validate(args) -> int:
    job = Job(args)
    p = job.validated()
    print(f"gamma={p.gamma!r}")
    print(f"sigma={p.sigma!r}")
    print(f"strip=[{p.strip[0]!r}, {p.strip[1]!r}]")
    for w in p.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def cmd_fan(args) -> int:
    job = Job(args)
    p = job.validated()
    fan = build_fan(p, job.settings.fan_size, job.settings.char_step)
    path = output.write_csv(job.out / "fan.csv", output.FAN_COLUMNS, output.fan_rows(fan))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_solve(args) -> int:
    job = Job(args)
    p = job.validated()
    if args.epsilon is None:
        study = job.study(p)
        sols = study.degenerate
    else:
        fan = build_fan(p, job.settings.fan_size, job.settings.char_step)
        mesh = job.settings.perturbed_mesh(args.epsilon, p.gamma, p.spec.t_end)
        sols = [solve_perturbed(p, ch, args.epsilon, mesh) for ch in fan.characteristics]
    path = output.write_csv(job.out / "trajectories.csv", output.TRAJECTORY_COLUMNS,
                            output.trajectory_rows(sols))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_jumps(args) -> int:
    job = Job(args)
    p = job.validated()
    fan = build_fan(p, job.settings.fan_size, job.settings.char_step)
    try:
        jumps = make_jumps(p, fan, job.mode, job.delta0_expr, job.delta_expr)
    except ExpressionError as exc:
        raise InputError(f"jump expressions: {exc}") from exc
    output.write_csv(job.out / "jumps_delta0.csv", output.DELTA0_COLUMNS, output.delta0_rows(jumps))
    output.write_csv(job.out / "jumps_delta.csv", output.DELTA_COLUMNS, output.delta_rows(jumps))
    print(f"mode={jumps.mode.value}")
    print(f"defect={jump_consistency_defect(p, fan, jumps)!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    job = Job(args)
    p = job.validated()
    study = job.study(p)
    report = study.report(args.epsilon)
    output.write_csv(job.out / "difference.csv", output.CONVERGENCE_COLUMNS,
                     output.report_rows([report]))
    for key, value in report.as_row().items():
        print(f"{key}={value!r}")
    print(f"matching={report.matching!r}")
    return EXIT_OK


def cmd_converge(args) -> int:
    job = Job(args)
    p = job.validated()
    eps = args.eps if args.eps is not None else list(DEFAULT_EPS_LADDER)
    report = convergence_study(p, job.mode, eps, job.settings, job.workers,
                               job.delta0_expr, job.delta_expr)
    output.write_csv(job.out / "convergence.csv", output.CONVERGENCE_COLUMNS,
                     output.report_rows(report.rows))
    output.write_json(job.out / "verdict.json", report.as_dict())
    for name, clause in report.clauses.items():
        print(f"clause {name}: {'PASS' if clause.passed else 'FAIL'} (K={clause.fitted_K:.6g})")
    print(f"fitted_K={report.fitted_K!r}")
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_oracle(args) -> int:
    z, w = solve_oracle_constant(args.A, args.B, args.F, args.pi0, args.pi1, args.epsilon, args.t)
    print(f"z={z!r}")
    print(f"w={w!r}")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _eps_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="initjump", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("file", help="problem JSON document")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: available CPUs)")
    common.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                        help="treat non-positive Q, pi0, pi1 as validation failures")
    common.add_argument("--h-coarse", dest="h_coarse", type=float)
    common.add_argument("--fan-size", dest="fan_size", type=int)
    common.add_argument("--char-step", dest="char_step", type=float)
    common.add_argument("--fine-divisor", dest="fine_divisor", type=float)
    common.add_argument("--layer-factor", dest="layer_factor", type=float)
    common.add_argument("--jumps", choices=[m.value for m in JumpMode],
                        help="override the document's jump mode")
    common.add_argument("--out", default=".", help="output directory")

    sub.add_parser("validate", parents=[common], help="check the positivity assumptions"
                   ).set_defaults(func=cmd_validate)
    sub.add_parser("fan", parents=[common], help="dump the characteristic fan"
                   ).set_defaults(func=cmd_fan)
    p = sub.add_parser("solve", parents=[common], help="solve along every characteristic")
    p.add_argument("--epsilon", type=float, help="omit for the jump-corrected degenerate problem")
    p.set_defaults(func=cmd_solve)
    sub.add_parser("jumps", parents=[common], help="write the initial jumps"
                   ).set_defaults(func=cmd_jumps)
    p = sub.add_parser("compare", parents=[common], help="differences for one epsilon")
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("converge", parents=[common], help="convergence study over an eps ladder")
    p.add_argument("--eps", type=_eps_list, default=None,
                   help="comma-separated, strictly decreasing (default 1e-2,3.16e-3,1e-3,3.16e-4)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle", help="closed-form solution for constant coefficients")
    for name in ("A", "B", "F", "pi0", "pi1", "epsilon", "t"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PositivityViolation as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure (epsilon={exc.epsilon}, label={exc.label}): {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidParameter, RegionEmpty, DegenerateRoots, ExpressionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InitJumpError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
