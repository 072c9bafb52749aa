"""Command-line front end.

Commands: estimate, sweep, balance, plotdata, simulate, mc-study,
ci derive, ci closure. stdout carries only data (tables, CSV or JSON),
stderr carries diagnostics. Exit codes: 0 ok, 1 usage error, 2
estimation/ingestion error (machine-readable error name on stderr),
3 target not derivable.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import ci
from .balance import summarize_balance
from .core import RegimeTag, ThresholdSpec, Window
from .dataio import IngestionSchema, ingest_csv, render_dataset_csv, sha256_of_file
from .errors import RddKitError
from .estimation import (
    DEFAULT_MIN_GAP,
    DEFAULT_REPLICATIONS,
    bandwidth_sweep,
    estimate_fuzzy,
    estimate_sharp,
    fit_local_linear,
)
from .simulator import generate, monte_carlo_study, parse_scenario
from .core import partition_window

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ESTIMATION = 2
EXIT_NOT_DERIVABLE = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser with the usage exit code pinned to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt3(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:.3f}"


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_ingestion_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("ingestion")
    group.add_argument("--outcome-col", default="outcome")
    group.add_argument("--assignment-col", default="assignment")
    group.add_argument("--treatment-col", default="treatment")
    group.add_argument(
        "--covariate-cols", default="", help="comma-separated covariate columns"
    )
    group.add_argument(
        "--z-col", default=None,
        help="explicit z column to cross-check (default: a header column named 'z')",
    )
    group.add_argument("--delimiter", default=",")
    group.add_argument(
        "--no-header", action="store_true",
        help="no header row; column options are 0-based indices",
    )


def _schema_from(args) -> IngestionSchema:
    return IngestionSchema(
        outcome=args.outcome_col,
        assignment=args.assignment_col,
        treatment=args.treatment_col,
        covariates=tuple(_csv_list(args.covariate_cols)),
        z_column=args.z_col,
        delimiter=args.delimiter,
        header=not args.no_header,
    )


def _load(args):
    threshold = ThresholdSpec(args.threshold)
    data, report = ingest_csv(args.input, _schema_from(args), threshold)
    print(
        f"ingested {args.input}: {report.rows_read} rows read, "
        f"{report.rows_kept} kept, {len(report.dropped)} dropped",
        file=sys.stderr,
    )
    for line, reason in report.dropped:
        print(f"  dropped line {line}: {reason}", file=sys.stderr)
    return data, report, threshold


def _schema_echo(args) -> dict:
    return {
        "outcome_col": args.outcome_col,
        "assignment_col": args.assignment_col,
        "treatment_col": args.treatment_col,
        "covariate_cols": _csv_list(args.covariate_cols),
        "z_col": args.z_col,
        "delimiter": args.delimiter,
        "header": not args.no_header,
    }


_TABLE_HEADER = "Bandwidth  Estimate (Standard Error)  95% Confidence Interval"


def _estimate_table(entries) -> str:
    lines = [_TABLE_HEADER]
    for est, err in entries:
        bw = f"{est['bandwidth']:.3f}"
        if err is not None:
            lines.append(f"{bw}      [{err}]")
            continue
        point_se = f"{_fmt3(est['point'])} ({_fmt3(est['std_error'])})"
        if est["ci_low"] is None:
            interval = "--"
        else:
            interval = f"({_fmt3(est['ci_low'])}, {_fmt3(est['ci_high'])})"
        lines.append(f"{bw}      {point_se:<25s}  {interval}")
    return "\n".join(lines) + "\n"


def _cmd_estimate(args) -> int:
    data, report, threshold = _load(args)
    adjust = _csv_list(args.adjust) if args.adjust else None
    entries = []
    for bw in args.bandwidth:
        window = Window(threshold.x0, bw)
        kwargs = dict(
            uncertainty=args.uncertainty,
            replications=args.replications,
            seed=args.seed,
            adjust=adjust,
        )
        if args.design == "sharp":
            est = estimate_sharp(data, threshold, window, **kwargs)
        else:
            est = estimate_fuzzy(data, threshold, window, args.min_gap, **kwargs)
        entry = est.to_dict()
        entry.update(error=None, message=None)
        entries.append(entry)
    return _emit_estimates("estimate", args, report, entries)


def _cmd_sweep(args) -> int:
    data, report, threshold = _load(args)
    adjust = _csv_list(args.adjust) if args.adjust else None
    results = bandwidth_sweep(
        data,
        threshold,
        args.bandwidths,
        args.design,
        min_gap=args.min_gap,
        uncertainty=args.uncertainty,
        replications=args.replications,
        seed=args.seed,
        adjust=adjust,
    )
    entries = []
    for res in results:
        if res.estimate is not None:
            entry = res.estimate.to_dict()
            entry.update(error=None, message=None)
        else:
            entry = {
                "bandwidth": res.bandwidth,
                "point": None, "std_error": None, "ci_low": None,
                "ci_high": None, "design": None, "n_above": None,
                "n_below": None, "compliance_gap": None,
                "error": res.error, "message": res.message,
            }
        entries.append(entry)
    return _emit_estimates("sweep", args, report, entries)


def _emit_estimates(command: str, args, report, entries) -> int:
    if args.format == "json":
        config = {
            "input": args.input,
            "threshold": args.threshold,
            "bandwidths": list(args.bandwidth) if command == "estimate" else list(args.bandwidths),
            "design": args.design,
            "uncertainty": args.uncertainty,
            "replications": args.replications,
            "seed": args.seed,
            "min_gap": args.min_gap,
            "adjust": _csv_list(args.adjust) if args.adjust else [],
            "schema": _schema_echo(args),
        }
        _emit_json(
            {
                "command": command,
                "provenance": {
                    "input_sha256": sha256_of_file(args.input),
                    "config": config,
                },
                "ingestion": report.to_dict(),
                "estimates": entries,
            }
        )
    else:
        sys.stdout.write(_estimate_table([(e, e["error"]) for e in entries]))
    return EXIT_OK


def _cmd_balance(args) -> int:
    data, report, threshold = _load(args)
    covariates = _csv_list(args.covariates)
    rows = summarize_balance(data, threshold, args.bandwidths, covariates)
    if args.format == "json":
        _emit_json(
            {
                "command": "balance",
                "provenance": {
                    "input_sha256": sha256_of_file(args.input),
                    "config": {
                        "input": args.input,
                        "threshold": args.threshold,
                        "bandwidths": list(args.bandwidths),
                        "covariates": covariates,
                        "schema": _schema_echo(args),
                    },
                },
                "ingestion": report.to_dict(),
                "rows": [r.to_dict() for r in rows],
            }
        )
        return EXIT_OK
    lines = []
    current_bw = None
    for row in rows:
        if row.bandwidth != current_bw:
            current_bw = row.bandwidth
            lines.append(f"Bandwidth = {current_bw:g}")
            lines.append(
                f"{'Variable':<16s} {'Group':<6s} {'Mean':>10s} {'Median':>10s} "
                f"{'Std. Dev.':>10s} {'Minimum':>10s} {'Maximum':>10s} {'N':>6s}"
            )
        lines.append(
            f"{row.covariate:<16s} {row.group:<6s} {row.mean:>10.3f} "
            f"{row.median:>10.3f} {row.std_dev:>10.3f} {row.minimum:>10.3f} "
            f"{row.maximum:>10.3f} {row.n:>6d}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_plotdata(args) -> int:
    data, report, threshold = _load(args)
    text = render_dataset_csv(
        data,
        include_z=True,
        threshold=threshold,
        column_order=("assignment", "outcome", "treatment"),
    )
    if args.bandwidth is not None:
        window = Window(threshold.x0, args.bandwidth)
        above, below = partition_window(data, window)
        for side, records in (("above", above), ("below", below)):
            fit = fit_local_linear(records, threshold.x0)
            text += (
                f"fit,{side},{fit.intercept!r},{fit.slope!r},"
                f"{threshold.x0!r},{args.bandwidth!r}\n"
            )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        config = parse_scenario(fh.read())
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    regime = RegimeTag(args.regime)
    data = generate(config, regime)
    text = render_dataset_csv(data)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(data)} records to {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_mc_study(args) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        config = parse_scenario(fh.read())
    window = Window(config.x0, args.bandwidth)
    report = monte_carlo_study(
        config,
        args.estimator,
        args.repetitions,
        window,
        base_seed=args.seed,
        uncertainty=args.uncertainty,
        replications=args.replications,
        min_gap=args.min_gap,
    )
    if args.format == "json":
        _emit_json(
            {
                "command": "mc-study",
                "provenance": {
                    "scenario_sha256": sha256_of_file(args.scenario),
                    "config": {
                        "scenario": args.scenario,
                        "estimator": args.estimator,
                        "repetitions": args.repetitions,
                        "bandwidth": args.bandwidth,
                        "seed": args.seed,
                        "uncertainty": args.uncertainty,
                        "replications": args.replications,
                        "min_gap": args.min_gap,
                    },
                },
                "report": report.to_dict(),
            }
        )
        return EXIT_OK
    cov = "--" if report.coverage is None else f"{report.coverage:.3f}"
    sys.stdout.write(
        f"estimator: {report.estimator}\n"
        f"true effect: {report.true_effect:.3f}\n"
        f"repetitions: {report.n_repetitions} (failed: {report.n_failed})\n"
        f"bias: {report.bias:.3f}\n"
        f"rmse: {report.rmse:.3f}\n"
        f"coverage: {cov}\n"
        f"mean point: {report.mean_point:.3f}\n"
        f"sd point: {report.sd_point:.3f}\n"
    )
    return EXIT_OK


def _read_premises(path: str) -> ci.PremiseFile:
    with open(path, "r", encoding="utf-8") as fh:
        return ci.parse_premise_file(fh.read())


def _cmd_ci_derive(args) -> int:
    premise_file = _read_premises(args.premises)
    target = ci.parse_statement(args.target)
    derivation = ci.derive(
        premise_file.statements,
        target,
        dependencies=premise_file.dependencies,
        max_atoms=args.max_atoms,
    )
    if derivation is None:
        if args.format == "json":
            _emit_json(
                {
                    "command": "ci-derive",
                    "derivable": False,
                    "target": str(target),
                    "premises": [str(p) for p in premise_file.statements],
                }
            )
        else:
            sys.stdout.write("NOT DERIVABLE\n")
        return EXIT_NOT_DERIVABLE
    check = ci.verify_derivation(derivation)
    if not check.ok:  # pragma: no cover - would be an engine bug
        raise RuntimeError(
            f"internal error: derivation failed verification at step "
            f"{check.failed_index}: {check.reason}"
        )
    if args.format == "json":
        payload = {"command": "ci-derive", "derivable": True, "verified": True}
        payload.update(derivation.to_dict())
        _emit_json(payload)
    else:
        sys.stdout.write(derivation.render() + "\n")
    return EXIT_OK


def _cmd_ci_closure(args) -> int:
    premise_file = _read_premises(args.premises)
    statements = ci.closure(
        premise_file.statements,
        dependencies=premise_file.dependencies,
        max_atoms=args.max_atoms,
    )
    ordered = sorted(statements, key=lambda s: s.sort_key())
    if args.format == "json":
        _emit_json(
            {
                "command": "ci-closure",
                "premises": [str(p) for p in premise_file.statements],
                "statements": [str(s) for s in ordered],
            }
        )
    else:
        sys.stdout.write("\n".join(str(s) for s in ordered) + "\n")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="rdd-kit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_estimate(p):
        p.add_argument("--input", required=True)
        p.add_argument("--threshold", type=float, required=True)
        p.add_argument("--design", choices=("sharp", "fuzzy"), required=True)
        p.add_argument(
            "--uncertainty", choices=("bootstrap", "delta", "none"), default="bootstrap"
        )
        p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--min-gap", type=float, default=DEFAULT_MIN_GAP)
        p.add_argument("--adjust", default="", help="comma-separated covariates")
        p.add_argument("--format", choices=("table", "json"), default="table")
        _add_ingestion_args(p)

    p_est = sub.add_parser("estimate", help="ACE estimate at given bandwidths")
    p_est.add_argument(
        "--bandwidth", type=float, action="append", required=True,
        help="repeatable; one output row per bandwidth",
    )
    common_estimate(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    p_sweep = sub.add_parser("sweep", help="bandwidth sweep with per-entry errors")
    p_sweep.add_argument(
        "--bandwidths", type=lambda s: [float(v) for v in _csv_list(s)], required=True
    )
    common_estimate(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bal = sub.add_parser("balance", help="covariate balance summaries")
    p_bal.add_argument("--input", required=True)
    p_bal.add_argument("--threshold", type=float, required=True)
    p_bal.add_argument(
        "--bandwidths", type=lambda s: [float(v) for v in _csv_list(s)], required=True
    )
    p_bal.add_argument("--covariates", required=True)
    p_bal.add_argument("--format", choices=("table", "json"), default="table")
    _add_ingestion_args(p_bal)
    p_bal.set_defaults(func=_cmd_balance)

    p_plot = sub.add_parser("plotdata", help="scatter + fitted-line data emission")
    p_plot.add_argument("--input", required=True)
    p_plot.add_argument("--threshold", type=float, required=True)
    p_plot.add_argument("--bandwidth", type=float, default=None)
    p_plot.add_argument("--output", default=None)
    _add_ingestion_args(p_plot)
    p_plot.set_defaults(func=_cmd_plotdata)

    p_sim = sub.add_parser("simulate", help="generate a dataset from a scenario file")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument(
        "--regime",
        choices=[tag.value for tag in RegimeTag],
        default=None,
        help="default: the scenario's observational regime",
    )
    p_sim.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p_sim.add_argument("--output", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_mc = sub.add_parser("mc-study", help="Monte Carlo bias/RMSE/coverage study")
    p_mc.add_argument("--scenario", required=True)
    p_mc.add_argument("--estimator", choices=("sharp", "fuzzy"), required=True)
    p_mc.add_argument("--repetitions", type=int, default=100)
    p_mc.add_argument("--bandwidth", type=float, required=True)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument(
        "--uncertainty", choices=("bootstrap", "delta", "none"), default="bootstrap"
    )
    p_mc.add_argument("--replications", type=int, default=400)
    p_mc.add_argument("--min-gap", type=float, default=DEFAULT_MIN_GAP)
    p_mc.add_argument("--format", choices=("table", "json"), default="table")
    p_mc.set_defaults(func=_cmd_mc_study)

    p_ci = sub.add_parser("ci", help="conditional-independence engine")
    ci_sub = p_ci.add_subparsers(dest="ci_command", required=True)
    p_derive = ci_sub.add_parser("derive", help="search for a derivation")
    p_derive.add_argument("--premises", required=True)
    p_derive.add_argument("--target", required=True)
    p_derive.add_argument("--max-atoms", type=int, default=ci.DEFAULT_MAX_ATOMS)
    p_derive.add_argument("--format", choices=("text", "json"), default="text")
    p_derive.set_defaults(func=_cmd_ci_derive)
    p_closure = ci_sub.add_parser("closure", help="print the premise closure")
    p_closure.add_argument("--premises", required=True)
    p_closure.add_argument("--max-atoms", type=int, default=ci.DEFAULT_MAX_ATOMS)
    p_closure.add_argument("--format", choices=("text", "json"), default="text")
    p_closure.set_defaults(func=_cmd_ci_closure)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "simulate" and args.regime is None:
        # late default: depends on the scenario's design
        try:
            with open(args.scenario, "r", encoding="utf-8") as fh:
                config = parse_scenario(fh.read())
        except OSError as exc:
            print(f"FileError: {exc}", file=sys.stderr)
            return EXIT_ESTIMATION
        args.regime = (
            RegimeTag.OBSERVATIONAL_SHARP.value
            if config.design == "sharp"
            else RegimeTag.OBSERVATIONAL_FUZZY.value
        )
    try:
        return args.func(args)
    except RddKitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except OSError as exc:
        print(f"FileError: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
