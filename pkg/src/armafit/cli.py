"""Command-line front end: ``armafit <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import pipelines as pl
from .core import ArmaOrder, PacfCoeffs, substream
from .datasets import DatasetFormatError, load_dataset, read_csv, read_series_csv, write_csv
from .estimate import BOUNDED, JONES, METHODS, FitConfig, best_fit, fit, fit_from_vector, start_variance
from .evaluate import classify_boundary
from .simulate import PRESETS, DatasetSpec, generate_dataset, preset
from .transforms import jones_map

EXIT_OK = 0
EXIT_USAGE = 2


class CliError(Exception):
    """Usage or I/O problem; reported on stderr with exit code 2."""


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _method_list(text: str) -> List[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {METHODS}")
    return methods


def _common(p: argparse.ArgumentParser, *, seed=True, epsilon=True, tau=True) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if epsilon:
        p.add_argument("--epsilon", type=float, default=1e-2, help="box shrink epsilon (default 0.01)")
    if tau:
        p.add_argument("--tau", type=float, default=None, help="boundary closeness (default 2*epsilon)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="armafit", description="ARMA maximum likelihood fitting and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulated dataset")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--spec", type=Path, help="JSON dataset spec; its seed and epsilon take precedence over the flags")
    p.add_argument("--replicates", type=int, help="override replicates per cell")
    p.add_argument("-o", "--output", type=Path, default=Path("data"))
    _common(p, tau=False)

    p = sub.add_parser("fit", help="multi-start fit of one series")
    p.add_argument("series", type=Path)
    p.add_argument("--order", nargs=2, type=int, metavar=("P", "Q"), required=True)
    p.add_argument("--method", choices=METHODS, default=BOUNDED)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--starts", type=int, default=30)
    p.add_argument("--jones-form", choices=("stable", "naive"), default="stable")
    p.add_argument("--far-start", type=float, default=None,
                   help="draw starts uniformly on [-U, U] in the logistic chart")
    p.add_argument("--start-jones", type=float, nargs="+", default=None, metavar="X",
                   help="single explicit start in the logistic chart (p+q values)")
    p.add_argument("-o", "--output", type=Path, default=None, help="write JSON here instead of stdout")
    _common(p)

    p = sub.add_parser("benchmark", help="multi-start runtime and stability benchmark")
    p.add_argument("dataset", type=Path)
    p.add_argument("--methods", type=_method_list, default=[JONES, BOUNDED])
    p.add_argument("--starts", type=int, default=30)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--jones-form", choices=("stable", "naive"), default="stable")
    p.add_argument("--holdout", type=int, default=3)
    p.add_argument("--far-start", type=float, default=None)
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_s empty (byte-stable output)")
    p.add_argument("-o", "--output", type=Path, default=Path("results"))
    _common(p)

    p = sub.add_parser("forecast-eval", help="near-border vs strictly feasible forecasts")
    p.add_argument("dataset", type=Path)
    p.add_argument("--method", choices=METHODS, default=JONES)
    p.add_argument("--starts", type=int, default=30)
    p.add_argument("--jones-form", choices=("stable", "naive"), default="stable")
    p.add_argument("--holdout", type=int, default=3)
    p.add_argument("-o", "--output", type=Path, default=Path("results"))
    _common(p)

    p = sub.add_parser("reg-sweep", help="regularization sweep with rank tests")
    p.add_argument("dataset", type=Path)
    p.add_argument("--lambdas", type=_float_list, default=list(pl.DEFAULT_LAMBDAS))
    p.add_argument("--init", choices=("hr", "random"), default="hr")
    p.add_argument("--holdout", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("-o", "--output", type=Path, default=Path("results"))
    _common(p)

    p = sub.add_parser("report", help="render result files as markdown")
    p.add_argument("files", nargs="*", type=Path,
                   help="records.csv, forecast_report.json or reg_sweep_report.json")
    p.add_argument("--clip", action="store_true", help="clip p-values to [0.001, 0.9]")
    p.add_argument("-o", "--output", type=Path, default=None)
    return parser


def _load(dataset: Path):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            entries = load_dataset(dataset)
    except (OSError, DatasetFormatError, KeyError, ValueError) as exc:
        raise CliError(f"cannot read dataset {dataset}: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return entries


def _outdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {path}: {exc}") from None
    return path


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def cmd_simulate(args) -> int:
    if args.spec is not None:
        try:
            spec = DatasetSpec.from_dict(json.loads(args.spec.read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError(f"malformed spec {args.spec}: {exc}") from None
    else:
        overrides = {"epsilon": args.epsilon}
        if args.replicates is not None:
            overrides["replicates"] = args.replicates
        spec = preset(args.preset, args.seed, **overrides)
    try:
        manifest = generate_dataset(spec, _outdir(args.output))
    except OSError as exc:
        raise CliError(str(exc)) from None
    print(f"wrote {spec.n_series} series to {args.output} ({manifest.name})")
    print(f"lengths={list(spec.lengths)} sigmas={list(spec.sigmas)} "
          f"orders={[tuple(o) for o in spec.orders]} replicates={spec.replicates} seed={spec.seed}")
    return EXIT_OK


def _start_record(i, start, result, tau, lam) -> dict:
    f = result.failure
    return {
        "start_index": i,
        "lambda": lam,
        "start": {"rho": start.rho.tolist(), "b": start.b.tolist(), "sigma2": start.sigma2},
        "start_boundary_class": classify_boundary(start, tau).tag.value,
        "loglik": None if f else result.loglik,
        "failure_kind": f.kind.value if f else None,
        "failure_detail": f.detail if f else None,
        "error_point_class": classify_boundary(f.location, tau).tag.value if f and f.location else None,
        "result_boundary_class": result.boundary.tag.value if result.boundary else None,
        "phi": result.params.phi.tolist() if result.params is not None else None,
        "theta": result.params.theta.tolist() if result.params is not None else None,
        "sigma2": result.params.sigma2 if result.params is not None else None,
        "rho": result.pacf.rho.tolist() if result.pacf is not None else None,
        "b": result.pacf.b.tolist() if result.pacf is not None else None,
        "n_iters": result.n_iters,
        "n_obj_evals": result.n_obj_evals,
        "converged": result.converged,
        "wall_time_s": result.wall_time,
    }


def cmd_fit(args) -> int:
    try:
        y = read_series_csv(args.series)
    except (OSError, DatasetFormatError) as exc:
        raise CliError(f"cannot read series: {exc}") from None
    try:
        order = ArmaOrder(*args.order)
        config = FitConfig(epsilon=args.epsilon, lam=args.lam, method=args.method,
                           jones_form=args.jones_form, tau=args.tau)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.starts < 1:
        raise CliError("--starts must be >= 1")
    pl.warm_up()
    rng = substream(args.seed, "starts", 0)
    if args.start_jones is not None:
        if len(args.start_jones) != order.p + order.q:
            raise CliError(f"--start-jones needs {order.p + order.q} values")
        raw = np.array(args.start_jones)
        box = 1.0 - args.epsilon
        mapped = np.clip(jones_map(raw, "stable"), -box, box)
        sigma2 = start_variance(y)
        starts = [(PacfCoeffs(mapped[:order.p], mapped[order.p:], sigma2), np.r_[raw, math.log(sigma2)])]
    else:
        starts = pl.series_starts(order, y, args.starts, rng, args.epsilon, args.far_start)
    records, results = [], []
    for i, (start, raw) in enumerate(starts):
        if raw is not None and args.method == JONES:
            shown = PacfCoeffs(jones_map(raw[:order.p], "stable"), jones_map(raw[order.p:-1], "stable"), start.sigma2)
            result = fit_from_vector(y, order, config, raw, shown)
        else:
            shown, result = start, fit(y, order, config, start)
        results.append(result)
        records.append(_start_record(i, shown, result, config.closeness, args.lam))
    best = best_fit(results)
    out = {
        "series": str(args.series),
        "order": [order.p, order.q],
        "method": args.method,
        "lambda": args.lam,
        "jones_form": args.jones_form,
        "epsilon": args.epsilon,
        "tau": config.closeness,
        "seed": args.seed,
        "best_start_index": results.index(best) if best is not None else None,
        "best": records[results.index(best)] if best is not None else None,
        "starts": records,
        "failures": dict(Counter(r["failure_kind"] for r in records if r["failure_kind"])),
    }
    text = pl.to_json(out) + "\n"
    if args.output is not None:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    entries = _load(args.dataset)
    settings = pl.BenchmarkSettings(
        methods=tuple(args.methods), n_starts=args.starts, seed=args.seed, epsilon=args.epsilon,
        tau=args.tau, jones_form=args.jones_form, holdout=args.holdout, far_start=args.far_start,
        lam=args.lam, timing=not args.no_timing,
    )
    try:
        records = pl.run_benchmark(entries, settings)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = _outdir(args.output)
    write_csv(out / "records.csv", pl.CSV_HEADER, [r.to_row() for r in records])
    summary = pl.summarize_benchmark(records)
    summary.pop("error_points")
    _write_text(out / "summary.json", pl.to_json(summary) + "\n")
    print(pl.render_benchmark(records))
    print(f"records: {out / 'records.csv'}")
    return EXIT_OK


def cmd_forecast_eval(args) -> int:
    entries = _load(args.dataset)
    try:
        header, rows, report = pl.run_forecast_eval(
            entries, method=args.method, n_starts=args.starts, seed=args.seed, epsilon=args.epsilon,
            tau=args.tau, jones_form=args.jones_form, holdout=args.holdout,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = _outdir(args.output)
    write_csv(out / "forecast_scores.csv", header, rows)
    _write_text(out / "forecast_report.json", pl.to_json(report) + "\n")
    print(pl.render_forecast(report))
    return EXIT_OK


def cmd_reg_sweep(args) -> int:
    entries = _load(args.dataset)
    try:
        header, rows, report = pl.run_reg_sweep(
            entries, lambdas=args.lambdas, epsilon=args.epsilon, tau=args.tau, holdout=args.holdout,
            alpha=args.alpha, init=args.init, seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = _outdir(args.output)
    write_csv(out / "reg_sweep.csv", header, rows)
    _write_text(out / "reg_sweep_report.json", pl.to_json(report) + "\n")
    print(pl.render_reg_sweep(report))
    return EXIT_OK


def _render_file(path: Path, clip: bool) -> Optional[str]:
    try:
        if path.suffix == ".json":
            report = json.loads(path.read_text())
            kind = report.get("kind") if isinstance(report, dict) else None
            if kind == "forecast-eval":
                return pl.render_forecast(report, clip)
            if kind == "reg-sweep":
                return pl.render_reg_sweep(report, clip)
            raise CliError(f"{path}: unrecognized report kind {kind!r}")
        rows = read_csv(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    if not rows:
        return None
    try:
        records = [pl.BenchmarkRecord.from_row(r) for r in rows]
    except (ValueError, TypeError, KeyError) as exc:
        raise CliError(f"{path}: schema mismatch: {exc}") from None
    return pl.render_benchmark(records, clip)


def cmd_report(args) -> int:
    parts = []
    for path in args.files:
        text = _render_file(path, args.clip)
        if text is not None:
            parts.append(text)
    text = "\n".join(parts) if parts else "no records"
    if args.output is not None:
        _write_text(args.output, text + "\n")
    else:
        print(text)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "benchmark": cmd_benchmark,
    "forecast-eval": cmd_forecast_eval,
    "reg-sweep": cmd_reg_sweep,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"armafit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
