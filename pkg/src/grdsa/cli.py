"""Command-line front end: stencil tables, runs, benchmarks, validation."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .cubic import run_crzon
from .newton import run_first_order, run_newton
from .stencils import (
    MAX_ORDER,
    all_identities_pass,
    grad_stencil,
    hess_stencil,
    verify_identities,
)


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_stencil_print(args: argparse.Namespace) -> int:
    k2 = args.k2 if args.k2 is not None else args.k1
    grad = grad_stencil(args.k1)
    hess = hess_stencil(args.k1, k2)
    if args.json:
        payload = {
            "gradient": {
                "k": grad.k,
                "weights": [str(w) for w in grad.weights],
                "decimals": [float(w) for w in grad.weights],
            },
            "hessian": {
                "k1": hess.k1,
                "k2": hess.k2,
                "weights": [str(w) for w in hess.weights],
                "decimals": [float(w) for w in hess.weights],
            },
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"gradient stencil, k={grad.k} (combine values at shifts 0..{grad.k}, divide by delta)")
    print(f"{'shift':>6}  {'weight':>18}  {'decimal':>22}")
    for s, w in enumerate(grad.weights):
        print(f"{s:>6}  {str(w):>18}  {float(w):>22.16g}")
    print()
    print(
        f"hessian stencil, k1={hess.k1}, k2={hess.k2} "
        f"(combine values at shifts 0..{hess.k1 + hess.k2}, divide by delta^2)"
    )
    print(f"{'shift':>6}  {'weight':>18}  {'decimal':>22}")
    for s, w in enumerate(hess.weights):
        print(f"{s:>6}  {str(w):>18}  {float(w):>22.16g}")
    return 0


def _cmd_stencil_verify(args: argparse.Namespace) -> int:
    report = verify_identities(args.kmax)
    ok = all_identities_pass(report)
    if args.json:
        payload = [
            {
                "identity": row.identity,
                "k": row.k,
                "q": row.q,
                "lhs": str(row.lhs),
                "rhs": str(row.rhs),
                "passed": row.passed,
            }
            for row in report
        ]
        print(json.dumps({"checks": payload, "all_passed": ok}, indent=2))
        return 0 if ok else 1
    for row in report:
        verdict = "pass" if row.passed else "FAIL"
        where = f"k={row.k}" + (f", q={row.q}" if row.q is not None else "")
        detail = "" if row.passed else f"  lhs={row.lhs} rhs={row.rhs}"
        print(f"[{verdict}] {row.identity:<22} {where}{detail}")
    print(f"{len(report)} checks, all exact" if ok else "IDENTITY FAILURES PRESENT")
    return 0 if ok else 1


def _cmd_newton_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    base = int(config.get("seed_base", 0))
    records = []
    for seed in range(base, base + args.seeds):
        cfg = harness.build_newton_config(config, seed=seed)
        runner = run_first_order if config.get("algorithm") == "gradient_only" else run_newton
        records.append(runner(cfg))
    harness.write_newton_csv(args.out, records)
    errors = [r.final_parameter_error for r in records if r.final_parameter_error is not None]
    if errors:
        print(
            f"{len(records)} runs -> {args.out}; "
            f"mean final parameter error {np.mean(errors):.4g}"
        )
    else:
        print(f"{len(records)} runs -> {args.out}")
    return 0


def _cmd_crzon_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    base = int(config.get("seed_base", 0))
    reports = []
    for seed in range(base, base + args.seeds):
        cfg = harness.build_cubic_config(config, seed=seed)
        reports.append(run_crzon(cfg))
    harness.write_crzon_csv(args.out, reports)
    lam = [r.lambda_min_at_r for r in reports]
    print(
        f"{len(reports)} runs -> {args.out}; "
        f"median lambda_min at reported iterate {np.median(lam):.4g}"
    )
    return 0


def _cmd_bench_table(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    result = harness.run_table(config)
    if args.out:
        harness.write_table_csv(args.out, result)
    if args.summary_out:
        harness.write_summary_csv(args.summary_out, result)
    print(f"{'method':<10} {'dim':>4} {'budget':>8} {'n':>3} {'mean_err':>10} {'sd':>10}")
    for cell in result.cells:
        print(
            f"{cell.method:<10} {cell.dim:>4} {cell.budget:>8} {cell.n_ok:>3} "
            f"{cell.mean_error:>10.4g} {cell.sd_error:>10.4g}"
        )
    failed = [r for r in result.rows if r.status != "ok"]
    if failed:
        print(f"{len(failed)} failed cells (see status column)")
    return 0


def _cmd_bench_bias_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    result = harness.run_bias_sweep(config)
    if args.out:
        harness.write_bias_sweep_csv(args.out, result)
    label = f"{result.estimator} k1={result.k1} k2={result.k2} mode={result.mode}"
    for delta, dev in zip(result.deltas, result.deviations):
        print(f"{label}  delta={delta:<8g} deviation={dev:.6g}")
    print(f"{label}  fitted log-log slope = {result.slope:.4f}")
    return 0


def _cmd_config_validate(args: argparse.Namespace) -> int:
    config = _load_config(args.file)
    findings = harness.validate_config(config)
    for f in findings:
        if f.ok:
            tag = "PASS"
        else:
            tag = "ERROR" if f.severity == "error" else "WARN"
        print(f"[{tag:<5}] {f.check:<36} {f.message}")
    if harness.has_errors(findings):
        print("config invalid")
        return 2
    n_warn = len(harness.failed_warnings(findings))
    print("config ok" + (f" ({n_warn} warning{'s' if n_warn != 1 else ''})" if n_warn else ""))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grdsa",
        description="Random-direction derivative estimators and the solvers built on them",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    stencil = sub.add_parser("stencil", help="exact stencil tables and certification")
    stencil_sub = stencil.add_subparsers(dest="subcommand", required=True)
    sp = stencil_sub.add_parser("print", help="print gradient/Hessian stencil weights")
    sp.add_argument("--k1", type=int, required=True, help=f"truncation order (1..{MAX_ORDER})")
    sp.add_argument("--k2", type=int, default=None, help="second order (defaults to k1)")
    sp.add_argument("--json", action="store_true", help="machine-readable output")
    sp.set_defaults(func=_cmd_stencil_print)
    sv = stencil_sub.add_parser("verify", help="certify identities in exact arithmetic")
    sv.add_argument("--kmax", type=int, required=True)
    sv.add_argument("--json", action="store_true")
    sv.set_defaults(func=_cmd_stencil_verify)

    newton = sub.add_parser("newton", help="two-timescale projected Newton runs")
    newton_sub = newton.add_subparsers(dest="subcommand", required=True)
    nr = newton_sub.add_parser("run", help="run seeds and write a CSV")
    nr.add_argument("--config", required=True)
    nr.add_argument("--seeds", type=int, required=True)
    nr.add_argument("--out", required=True)
    nr.set_defaults(func=_cmd_newton_run)

    crzon = sub.add_parser("crzon", help="cubic-regularized Newton runs")
    crzon_sub = crzon.add_subparsers(dest="subcommand", required=True)
    cr = crzon_sub.add_parser("run", help="run seeds and write a CSV")
    cr.add_argument("--config", required=True)
    cr.add_argument("--seeds", type=int, required=True)
    cr.add_argument("--out", required=True)
    cr.set_defaults(func=_cmd_crzon_run)

    bench = sub.add_parser("bench", help="benchmark tables and order sweeps")
    bench_sub = bench.add_subparsers(dest="subcommand", required=True)
    bt = bench_sub.add_parser("table", help="method x dim x budget table")
    bt.add_argument("--config", required=True)
    bt.add_argument("--out", default=None, help="per-run rows CSV")
    bt.add_argument("--summary-out", default=None, help="aggregated cells CSV")
    bt.set_defaults(func=_cmd_bench_table)
    bb = bench_sub.add_parser("bias-sweep", help="deviation-vs-radius slope")
    bb.add_argument("--config", required=True)
    bb.add_argument("--out", default=None)
    bb.set_defaults(func=_cmd_bench_bias_sweep)

    config = sub.add_parser("config", help="configuration checks")
    config_sub = config.add_subparsers(dest="subcommand", required=True)
    cv = config_sub.add_parser("validate", help="schedule and feasibility report")
    cv.add_argument("file")
    cv.set_defaults(func=_cmd_config_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
