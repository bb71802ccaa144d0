"""``cheb`` command line: fit, verify, reduce, cuts, demo.

Exit codes: 0 optimal / condition holds, 2 not optimal / violated,
3 inconclusive (branch budget exhausted), 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .approx import (ApproximationError, Dataset, default_extremal_tolerance,
                     fit_minimax, uniform_error)
from .dataio import DataFormatError, parse_coefficients, parse_dataset
from .fixtures import EXAMPLES
from .lp_core import LpError, feasibility_tolerance
from .optimality import descent_direction, line_search, verify_optimality
from .poly_basis import MonomialBasis, basis_from_config
from .reduction import (DEFAULT_BUDGET, HOLDS, INCONCLUSIVE, VIOLATED,
                        SignedPointSet, cut_condition_check,
                        verify_necessary_condition)

log = logging.getLogger("chebcert")

SCHEMA_VERSION = 1
COMMANDS = ("fit", "verify", "reduce", "cuts", "demo")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    data: Optional[str] = None
    data_format: Optional[str] = None
    basis: dict = field(default_factory=lambda: {"kind": "monomial"})
    coefficients: Optional[np.ndarray] = None
    tol_extremal: float = 1e-7
    tol_lp: float = 1e-9
    budget: int = DEFAULT_BUDGET
    single_branch: bool = False
    out: Optional[str] = None
    example: str = "all"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.tol_extremal <= 0 or self.tol_lp <= 0:
            raise ConfigError("tolerances must be positive")
        if self.budget < 1:
            raise ConfigError("branch budget must be positive")
        if self.command == "demo":
            if self.example != "all" and self.example not in EXAMPLES:
                raise ConfigError(
                    f"unknown example {self.example!r}; choose from {sorted(EXAMPLES)} or 'all'")
            return
        if not self.data:
            raise ConfigError(f"'{self.command}' needs --data")
        for key in ("dimension", "degree"):
            if self.basis.get(key) is None:
                raise ConfigError(f"'{self.command}' needs --{'dim' if key == 'dimension' else key}")


def _verdict_exit(verdicts: dict) -> int:
    vals = [v for v in verdicts.values() if v not in (None, "not_applicable")]
    if any(v in ("NotOptimal", VIOLATED) for v in vals):
        return EXIT_VIOLATED
    if any(v == INCONCLUSIVE for v in vals):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _points(ds: Dataset, idx):
    return [{"index": int(i), "x": ds.points[i].tolist()} for i in idx]


def analyse(basis: MonomialBasis, dataset: Dataset, coefficients, cfg: RunConfig,
            *, reduction: bool, cuts: bool) -> dict:
    """Build the report dictionary for one (basis, dataset, coefficients) triple."""
    timings = {}
    t0 = time.perf_counter()
    if coefficients is None:
        fit = fit_minimax(basis, dataset)
        A, source = fit.coefficients, "fit"
    else:
        A = np.asarray(coefficients, dtype=float)
        if A.size != basis.size:
            raise ConfigError(
                f"{A.size} coefficients given, basis {basis.names} has {basis.size}")
        source = "given"
    psi = uniform_error(basis, A, dataset)
    timings["fit"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tol = default_extremal_tolerance(psi, cfg.tol_extremal)
    verdict = verify_optimality(basis, A, dataset, tol)
    timings["sufficient"] = time.perf_counter() - t0
    ext = verdict.extremal
    dev = dataset.values - basis.lift(dataset.points) @ A

    report = {
        "schema": SCHEMA_VERSION,
        "basis": {"kind": "monomial", "dimension": basis.dimension, "degree": basis.degree,
                  "monomials": basis.names},
        "fit": {"coefficients": A.tolist(), "source": source, "error": psi},
        "extremal": {
            "tolerance": ext.tolerance,
            "positive": [dict(p, deviation=float(dev[p["index"]])) for p in _points(dataset, ext.positive)],
            "negative": [dict(p, deviation=float(dev[p["index"]])) for p in _points(dataset, ext.negative)],
        },
        "verdicts": {"sufficient_condition": "Optimal" if verdict.optimal else "NotOptimal",
                     "necessary_reduction": "not_applicable",
                     "cut_condition": "not_applicable"},
    }
    if verdict.optimal:
        c = verdict.certificate
        report["certificate"] = {
            "positive": [{"index": i, "x": dataset.points[i].tolist(), "weight": w} for i, w in c.positive],
            "negative": [{"index": i, "x": dataset.points[i].tolist(), "weight": w} for i, w in c.negative],
            "support_size": c.support_size,
            "residual": c.residual,
        }
    else:
        w = verdict.witness
        h = descent_direction(basis, A, dataset, w)
        step = line_search(basis, A, dataset, h)
        report["witness"] = {
            "normal": w.normal.tolist(), "offset": w.offset, "margin": w.margin,
            "isolating_coefficients": w.as_coefficients().tolist(),
            "descent_direction": h.tolist(),
            "step": step[0], "error_after_step": step[1],
        }

    signed = SignedPointSet(
        dataset.points[list(ext.positive) + list(ext.negative)],
        (1,) * len(ext.positive) + (-1,) * len(ext.negative),
        max(basis.degree, 1),
        tuple(ext.positive) + tuple(ext.negative))
    if reduction and basis.degree >= 1:
        t0 = time.perf_counter()
        trace = verify_necessary_condition(signed, budget=cfg.budget,
                                           all_branches=not cfg.single_branch)
        timings["reduction"] = time.perf_counter() - t0
        report["verdicts"]["necessary_reduction"] = trace.verdict
        report["reduction"] = trace.to_dict()
    if cuts and basis.degree >= 2:
        t0 = time.perf_counter()
        cut = cut_condition_check(signed, basis.degree, budget=cfg.budget)
        timings["cuts"] = time.perf_counter() - t0
        report["verdicts"]["cut_condition"] = cut.verdict
        report["cuts"] = cut.to_dict()
    report["timings"] = timings
    return report


def _load(cfg: RunConfig):
    basis = basis_from_config(cfg.basis)
    dataset = parse_dataset(cfg.data, cfg.data_format)
    if dataset.dimension != basis.dimension:
        raise ConfigError(
            f"dataset dimension {dataset.dimension} does not match --dim {basis.dimension}")
    return basis, dataset


def run(cfg: RunConfig):
    """Execute one command. Returns ``(report, exit_code)``."""
    cfg.validate()
    with feasibility_tolerance(cfg.tol_lp):
        if cfg.command == "demo":
            names = sorted(EXAMPLES) if cfg.example == "all" else [cfg.example]
            reports = {}
            codes = []
            for name in names:
                ex = EXAMPLES[name]()
                r = analyse(ex.basis, ex.dataset, ex.coefficients, cfg,
                            reduction=True, cuts=True)
                r["description"] = ex.description
                reports[name] = r
                codes.append(_verdict_exit(r["verdicts"]))
            code = (EXIT_VIOLATED if EXIT_VIOLATED in codes
                    else EXIT_INCONCLUSIVE if EXIT_INCONCLUSIVE in codes else EXIT_OK)
            return {"schema": SCHEMA_VERSION, "command": "demo", "examples": reports}, code
        basis, dataset = _load(cfg)
        coeffs = cfg.coefficients
        flags = {"fit": (False, False), "verify": (True, True),
                 "reduce": (True, False), "cuts": (False, True)}[cfg.command]
        if cfg.command == "fit":
            coeffs = None
        report = analyse(basis, dataset, coeffs, cfg, reduction=flags[0], cuts=flags[1])
        report["command"] = cfg.command
        return report, _verdict_exit(report["verdicts"])


def summarize(report: dict) -> str:
    if report.get("command") == "demo":
        return "\n\n".join(f"[{name}] {r['description']}\n" + summarize(r)
                           for name, r in report["examples"].items())
    lines = []
    fit = report["fit"]
    coeffs = ", ".join(f"{c:.10g}" for c in fit["coefficients"])
    lines.append(f"coefficients ({fit['source']}): [{coeffs}]")
    lines.append(f"uniform error: {fit['error']:.12g}")
    ext = report["extremal"]
    lines.append(f"extremal points: {len(ext['positive'])} positive, {len(ext['negative'])} negative")
    for k, v in report["verdicts"].items():
        lines.append(f"{k}: {v}")
    if "certificate" in report:
        lines.append(f"certificate support: {report['certificate']['support_size']} points, "
                     f"residual {report['certificate']['residual']:.2e}")
    if "witness" in report:
        w = report["witness"]
        lines.append(f"separation margin {w['margin']:.3e}; step along descent direction "
                     f"lowers the error to {w['error_after_step']:.12g}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cheb", description="Minimax fitting and optimality certificates for discrete data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-extremal", type=float, default=1e-7,
                        help="relative tolerance for maximal-deviation points (default 1e-7)")
    common.add_argument("--tol-lp", type=float, default=1e-9,
                        help="LP feasibility tolerance (default 1e-9)")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="node budget for branch exploration")
    common.add_argument("--single-branch", action="store_true",
                        help="degree reduction follows only the first choice per level")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", required=True, help="dataset file (CSV or JSON)")
    data.add_argument("--format", choices=("csv", "json"), dest="data_format",
                      help="dataset format (default: from the file extension)")
    data.add_argument("--basis", default="monomial", choices=("monomial",))
    data.add_argument("--dim", type=int, required=True)
    data.add_argument("--degree", type=int, required=True)

    helps = {"fit": "compute the best uniform approximation and certify it",
             "verify": "check optimality of given (or fitted) coefficients",
             "reduce": "run the degree-reduction necessary condition",
             "cuts": "run the hyperplane-cut necessary condition"}
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common, data], help=text)
        if name != "fit":
            p.add_argument("--coeffs", help="coefficient file or inline list 'a0,a1,...'; "
                                            "omitted: fit first")
    demo = sub.add_parser("demo", parents=[common], help="run the embedded examples")
    demo.add_argument("example", nargs="?", default="all",
                      help=f"one of {sorted(EXAMPLES)} or 'all'")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, tol_extremal=args.tol_extremal, tol_lp=args.tol_lp,
                    budget=args.budget, single_branch=args.single_branch, out=args.out)
    if args.command == "demo":
        cfg.example = args.example
        return cfg
    cfg.data = args.data
    cfg.data_format = args.data_format
    cfg.basis = {"kind": args.basis, "dimension": args.dim, "degree": args.degree}
    if getattr(args, "coeffs", None):
        cfg.coefficients = parse_coefficients(args.coeffs)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for "not optimal"
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report, code = run(cfg)
    except (ConfigError, DataFormatError, ApproximationError, LpError, ValueError,
            ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(summarize(report))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(report, fh, indent=2)
        log.info("report written to %s", cfg.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
