"""
Experiment pipelines: multi-start runtime/stability benchmark, forecasting
with near-border versus strictly feasible fits, and the regularization sweep.
Also the record formats they write and the markdown renderers used by
``armafit report``.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    ArmaOrder,
    BoundaryTag,
    DegenerateDenominator,
    FailureKind,
    FitResult,
    KalmanError,
    PacfCoeffs,
    AllZeroDifferences,
    substream,
)
from .datasets import DatasetEntry
from .estimate import (
    BOUNDED,
    JONES,
    FitConfig,
    best_fit,
    draw_starts,
    fit,
    fit_from_vector,
    hannan_rissanen,
    start_variance,
)
from .evaluate import classify_boundary, score_forecast
from .statespace import kalman_forecast, loglik_arrays
from .stats import friedman, nemenyi, rank_methods, wilcoxon_signed_rank
from .transforms import jones_map

THREADS_ENV = "ARMA_OPT_THREADS"
DEFAULT_LAMBDAS = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0)


def thread_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, default)))
    except ValueError:
        return default


def _parallel_map(func, items: Sequence, threads: int) -> List:
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(func, items))


def warm_up() -> None:
    """Trigger compilation of the likelihood kernel outside any timed region."""
    loglik_arrays(np.array([0.1]), np.array([0.1]), 1.0, np.array([0.1, -0.2, 0.3]))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return ";".join(repr(float(v)) for v in x)
    return str(x)


def _parse_float(s: str) -> Optional[float]:
    return float(s) if s not in ("", None) else None


def _parse_vec(s: str) -> Optional[np.ndarray]:
    if s is None or s == "":
        return None if s is None else np.zeros(0)
    return np.array([float(v) for v in s.split(";")])


def metric_names(holdout: int) -> List[str]:
    return [f"MASE({holdout})"] + [f"ScaledError({h})" for h in range(1, holdout + 1)]


def forecast_metrics(result: Optional[FitResult], train, test) -> Optional[np.ndarray]:
    """``[MASE(h), ScaledError(1..h)]`` of a fit's forecasts, or None."""
    if result is None or not result.ok or result.params is None or len(test) == 0:
        return None
    try:
        fc = kalman_forecast(result.params, train, len(test))
        score = score_forecast(train, test, fc)
    except (DegenerateDenominator, KalmanError, ArithmeticError, ValueError):
        return None
    return np.r_[score.mase_h, score.scaled_errors]


# ---------------------------------------------------------------------------
# benchmark records


RECORD_FIELDS = [
    "series_id", "p", "q", "length", "sigma", "method", "lambda", "start_index",
    "start_boundary_class", "loglik", "wall_time_s", "failure_kind",
    "error_point_class", "result_boundary_class", "mase3",
    "scaled_err_1", "scaled_err_2", "scaled_err_3",
]
EXTRA_FIELDS = [
    "truth_boundary_class", "n_iters", "n_obj_evals", "converged",
    "start_rho", "start_b", "est_rho", "est_b", "est_sigma2", "error_rho", "error_b",
]
CSV_HEADER = RECORD_FIELDS + EXTRA_FIELDS


@dataclass
class BenchmarkRecord:
    series_id: str
    p: int
    q: int
    length: int
    sigma: float
    method: str
    lam: float
    start_index: int
    start_boundary_class: str
    loglik: Optional[float]
    wall_time_s: Optional[float]
    failure_kind: Optional[str]
    error_point_class: Optional[str]
    result_boundary_class: Optional[str]
    mase3: Optional[float] = None
    scaled_err_1: Optional[float] = None
    scaled_err_2: Optional[float] = None
    scaled_err_3: Optional[float] = None
    truth_boundary_class: Optional[str] = None
    n_iters: int = 0
    n_obj_evals: int = 0
    converged: bool = False
    start_rho: Optional[np.ndarray] = None
    start_b: Optional[np.ndarray] = None
    est_rho: Optional[np.ndarray] = None
    est_b: Optional[np.ndarray] = None
    est_sigma2: Optional[float] = None
    error_rho: Optional[np.ndarray] = None
    error_b: Optional[np.ndarray] = None

    def to_row(self) -> List[str]:
        values = asdict(self)
        values["lambda"] = values.pop("lam")
        values["converged"] = "1" if self.converged else "0"
        return [_fmt(values[k]) for k in CSV_HEADER]

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "BenchmarkRecord":
        missing = [k for k in RECORD_FIELDS if k not in row]
        if missing:
            raise ValueError(f"record is missing columns {missing}")
        get = lambda k: row.get(k, "")  # noqa: E731
        opt = lambda k: get(k) or None  # noqa: E731
        return cls(
            series_id=get("series_id"), p=int(get("p")), q=int(get("q")),
            length=int(get("length")), sigma=float(get("sigma")), method=get("method"),
            lam=float(get("lambda")), start_index=int(get("start_index")),
            start_boundary_class=get("start_boundary_class"),
            loglik=_parse_float(get("loglik")), wall_time_s=_parse_float(get("wall_time_s")),
            failure_kind=opt("failure_kind"), error_point_class=opt("error_point_class"),
            result_boundary_class=opt("result_boundary_class"),
            mase3=_parse_float(get("mase3")), scaled_err_1=_parse_float(get("scaled_err_1")),
            scaled_err_2=_parse_float(get("scaled_err_2")), scaled_err_3=_parse_float(get("scaled_err_3")),
            truth_boundary_class=opt("truth_boundary_class"),
            n_iters=int(get("n_iters") or 0), n_obj_evals=int(get("n_obj_evals") or 0),
            converged=get("converged") == "1",
            start_rho=_parse_vec(row.get("start_rho")), start_b=_parse_vec(row.get("start_b")),
            est_rho=_parse_vec(row.get("est_rho")), est_b=_parse_vec(row.get("est_b")),
            est_sigma2=_parse_float(get("est_sigma2")),
            error_rho=_parse_vec(row.get("error_rho")), error_b=_parse_vec(row.get("error_b")),
        )


def record_from_fit(entry: DatasetEntry, method: str, lam: float, start_index: int, start: PacfCoeffs,
                    result: FitResult, tau: float, metrics: Optional[np.ndarray],
                    timing: bool = True) -> BenchmarkRecord:
    fail = result.failure
    err_loc = fail.location if fail is not None else None
    scores = [None] * 4
    if metrics is not None:
        for i, v in enumerate(metrics[:4]):
            scores[i] = float(v)
    return BenchmarkRecord(
        series_id=entry.series_id, p=entry.order.p, q=entry.order.q, length=entry.length,
        sigma=entry.sigma, method=method, lam=float(lam), start_index=start_index,
        start_boundary_class=classify_boundary(start, tau).tag.value,
        loglik=None if fail is not None else float(result.loglik),
        wall_time_s=float(result.wall_time) if timing else None,
        failure_kind=fail.kind.value if fail is not None else None,
        error_point_class=classify_boundary(err_loc, tau).tag.value if err_loc is not None else None,
        result_boundary_class=result.boundary.tag.value if result.boundary is not None else None,
        mase3=scores[0], scaled_err_1=scores[1], scaled_err_2=scores[2], scaled_err_3=scores[3],
        truth_boundary_class=entry.truth_boundary.value if entry.truth_boundary else None,
        n_iters=result.n_iters, n_obj_evals=result.n_obj_evals, converged=result.converged,
        start_rho=start.rho, start_b=start.b,
        est_rho=result.pacf.rho if result.pacf is not None else None,
        est_b=result.pacf.b if result.pacf is not None else None,
        est_sigma2=result.pacf.sigma2 if result.pacf is not None else None,
        error_rho=err_loc.rho if err_loc is not None else None,
        error_b=err_loc.b if err_loc is not None else None,
    )


@dataclass(frozen=True)
class BenchmarkSettings:
    methods: Tuple[str, ...] = (JONES, BOUNDED)
    n_starts: int = 30
    seed: int = 0
    epsilon: float = 1e-2
    tau: Optional[float] = None
    jones_form: str = "stable"
    holdout: int = 3
    far_start: Optional[float] = None
    lam: float = 0.0
    max_iters: int = 500
    timing: bool = True

    @property
    def closeness(self) -> float:
        return 2.0 * self.epsilon if self.tau is None else self.tau

    def config(self, method: str, lam: Optional[float] = None) -> FitConfig:
        return FitConfig(
            epsilon=self.epsilon, lam=self.lam if lam is None else lam, method=method,
            jones_form=self.jones_form, max_iters=self.max_iters, tau=self.tau,
        )


def split(y: np.ndarray, holdout: int):
    if holdout < 0 or holdout >= y.size - 1:
        raise ValueError(f"holdout {holdout} too large for series of length {y.size}")
    return (y[:-holdout], y[-holdout:]) if holdout else (y, y[:0])


def series_starts(order: ArmaOrder, train, n_starts: int, rng: np.random.Generator, epsilon: float,
                  far_start: Optional[float] = None):
    """Shared start set of one series: list of (pacf_start, jones_vector_or_None).

    With ``far_start`` the draws are made in the logistic chart, uniform on
    ``[-far_start, far_start]``; the Jones method starts from that raw
    vector and the bounded method from its image clipped into the box.
    """
    sigma2 = start_variance(train)
    if far_start is None:
        return [(s, None) for s in draw_starts(order, n_starts, rng, epsilon, sigma2)]
    box = 1.0 - epsilon
    out = []
    for _ in range(n_starts):
        raw = rng.uniform(-far_start, far_start, size=order.p + order.q)
        mapped = np.clip(jones_map(raw, "stable"), -box, box)
        start = PacfCoeffs(mapped[:order.p], mapped[order.p:], sigma2)
        out.append((start, np.r_[raw, math.log(sigma2)]))
    return out


def benchmark_series(entry: DatasetEntry, settings: BenchmarkSettings) -> List[BenchmarkRecord]:
    warm_up()
    y = entry.load()
    train, test = split(y, settings.holdout)
    rng = substream(settings.seed, "starts", entry.index)
    starts = series_starts(entry.order, train, settings.n_starts, rng, settings.epsilon, settings.far_start)
    tau = settings.closeness
    records = []
    for method in sorted(settings.methods):
        config = settings.config(method)
        for i, (start, raw) in enumerate(starts):
            if raw is not None and method == JONES:
                shown = PacfCoeffs(jones_map(raw[:entry.order.p], "stable"),
                                   jones_map(raw[entry.order.p:-1], "stable"), start.sigma2)
                result = fit_from_vector(train, entry.order, config, raw, shown)
            else:
                shown = start
                result = fit(train, entry.order, config, start)
            metrics = forecast_metrics(result, train, test)
            records.append(record_from_fit(entry, method, config.lam, i, shown, result, tau, metrics,
                                           settings.timing))
    return records


def run_benchmark(entries: Sequence[DatasetEntry], settings: BenchmarkSettings,
                  threads: Optional[int] = None) -> List[BenchmarkRecord]:
    threads = thread_count() if threads is None else threads
    chunks = _parallel_map(partial(benchmark_series, settings=settings), list(entries), threads)
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.series_id, r.method, r.start_index))
    return records


def _report_dict(rep) -> Optional[Dict]:
    if rep is None:
        return None
    return {"statistic": rep.statistic, "p_value": rep.p_value, "alternative": rep.alternative,
            "n_effective": rep.n_effective}


def _safe_wilcoxon(d, alternative):
    try:
        return wilcoxon_signed_rank(d, alternative)
    except AllZeroDifferences:
        return None


def summarize_benchmark(records: Sequence[BenchmarkRecord]) -> Dict:
    """Per-method timing and failure counts plus the paired time comparison."""
    per_method: Dict[str, Dict] = {}
    for m in sorted({r.method for r in records}):
        rs = [r for r in records if r.method == m]
        ok_times = [r.wall_time_s for r in rs if r.failure_kind is None and r.wall_time_s is not None]
        counts = {k.value: sum(1 for r in rs if r.failure_kind == k.value) for k in FailureKind}
        per_method[m] = {
            "runs": len(rs),
            "successes": sum(1 for r in rs if r.failure_kind is None),
            "mean_fit_time_s": float(np.mean(ok_times)) if ok_times else None,
            "failures": counts,
            "failures_per_1000": {k: 1000.0 * v / len(rs) for k, v in counts.items()},
        }
    summary: Dict = {"methods": per_method, "n_records": len(records)}

    # per-series mean time over successful runs, paired across methods
    times: Dict[str, Dict[str, List[float]]] = {}
    for r in records:
        if r.failure_kind is None and r.wall_time_s is not None:
            times.setdefault(r.series_id, {}).setdefault(r.method, []).append(r.wall_time_s)
    paired = [(float(np.mean(t[JONES])), float(np.mean(t[BOUNDED])))
              for sid, t in sorted(times.items()) if JONES in t and BOUNDED in t]
    if paired:
        tj, tb = np.array(paired).T
        diff = tj - tb
        summary["time_comparison"] = {
            "n_series": len(paired),
            "mean_time_jones": float(tj.mean()),
            "mean_time_bounded": float(tb.mean()),
            "relative_saving": float(1.0 - tb.mean() / tj.mean()),
            "fraction_bounded_faster": float(np.mean(tb < tj)),
            "wilcoxon_two_sided": _report_dict(_safe_wilcoxon(diff, "two_sided")),
            "wilcoxon_greater": _report_dict(_safe_wilcoxon(diff, "greater")),
        }
    summary["error_points"] = [
        {
            "method": r.method, "model": f"ARMA({r.p},{r.q})", "length": r.length, "sigma": r.sigma,
            "failure_kind": r.failure_kind, "start": r.start_boundary_class,
            "error": r.error_point_class, "truth": r.truth_boundary_class,
        }
        for r in records if r.failure_kind == FailureKind.KALMAN.value
    ]
    return summary


# ---------------------------------------------------------------------------
# forecasting with near-border vs strictly feasible fits


SCORE_HEADER = ["series_id", "p", "q", "length", "sigma", "selection", "boundary_class", "loglik"]


def forecast_series(entry: DatasetEntry, method: str, n_starts: int, seed: int, epsilon: float,
                    tau: Optional[float], jones_form: str, holdout: int):
    warm_up()
    y = entry.load()
    train, test = split(y, holdout)
    config = FitConfig(epsilon=epsilon, method=method, jones_form=jones_form, tau=tau)
    rng = substream(seed, "forecast_starts", entry.index)
    starts = draw_starts(entry.order, n_starts, rng, epsilon, start_variance(train))
    results = [fit(train, entry.order, config, s) for s in starts]
    ok = [r for r in results if r.ok and r.boundary is not None]
    strict = best_fit([r for r in ok if not r.boundary.near_border])
    border = best_fit([r for r in ok if r.boundary.near_border])
    if strict is None or border is None:
        return None
    ms, mb = forecast_metrics(strict, train, test), forecast_metrics(border, train, test)
    if ms is None or mb is None:
        return None
    return strict, ms, border, mb


def run_forecast_eval(entries: Sequence[DatasetEntry], *, method: str = JONES, n_starts: int = 30,
                      seed: int = 0, epsilon: float = 1e-2, tau: Optional[float] = None,
                      jones_form: str = "stable", holdout: int = 3, threads: Optional[int] = None):
    """Returns (score rows, report dict)."""
    if holdout < 1:
        raise ValueError("holdout must be >= 1")
    threads = thread_count() if threads is None else threads
    func = partial(forecast_series, method=method, n_starts=n_starts, seed=seed, epsilon=epsilon,
                   tau=tau, jones_form=jones_form, holdout=holdout)
    outcomes = _parallel_map(func, list(entries), threads)
    names = metric_names(holdout)
    header = SCORE_HEADER + names
    rows = []
    diffs = []
    for entry, out in zip(entries, outcomes):
        if out is None:
            continue
        strict, ms, border, mb = out
        base = [entry.series_id, entry.order.p, entry.order.q, entry.length, entry.sigma]
        rows.append(base + ["strict", strict.boundary.tag.value, _fmt(strict.loglik)] + [_fmt(float(v)) for v in ms])
        rows.append(base + ["border", border.boundary.tag.value, _fmt(border.loglik)] + [_fmt(float(v)) for v in mb])
        diffs.append(mb - ms)
    diffs = np.array(diffs).reshape(-1, len(names))
    tests = []
    for j, name in enumerate(names):
        d = diffs[:, j]
        tests.append({
            "metric": name,
            "two_sided": _report_dict(_safe_wilcoxon(d, "two_sided")) if d.size else None,
            "greater": _report_dict(_safe_wilcoxon(d, "greater")) if d.size else None,
        })
    report = {
        "kind": "forecast-eval",
        "method": method,
        "holdout": holdout,
        "n_series": len(entries),
        "n_selected": len(diffs),
        "n_excluded": len(entries) - len(diffs),
        "difference": "border - strict",
        "tests": tests,
    }
    return header, rows, report


# ---------------------------------------------------------------------------
# regularization sweep


def sweep_labels(lambdas: Sequence[float]) -> List[str]:
    return ["Jones"] + [f"lambda={_fmt_lambda(l)}" for l in lambdas]


def _fmt_lambda(l: float) -> str:
    return str(int(l)) if float(l).is_integer() else repr(float(l))


def sweep_series(entry: DatasetEntry, lambdas: Sequence[float], epsilon: float, tau: Optional[float],
                 holdout: int, init: str, seed: int):
    warm_up()
    y = entry.load()
    train, test = split(y, holdout)
    if init == "hr":
        try:
            start = hannan_rissanen(train, entry.order, epsilon)
        except ValueError:
            start = PacfCoeffs(np.zeros(entry.order.p), np.zeros(entry.order.q), start_variance(train))
    else:
        start = draw_starts(entry.order, 1, substream(seed, "starts", entry.index), epsilon,
                            start_variance(train))[0]
    out = []
    configs = [FitConfig(epsilon=epsilon, method=JONES, tau=tau)]
    configs += [FitConfig(epsilon=epsilon, method=BOUNDED, lam=float(l), tau=tau) for l in lambdas]
    for config in configs:
        result = fit(train, entry.order, config, start)
        out.append((result, forecast_metrics(result, train, test)))
    return start, out


SWEEP_HEADER = ["series_id", "p", "q", "length", "sigma", "method", "lambda", "loglik",
                "penalty_norm", "failure_kind", "result_boundary_class"]


def run_reg_sweep(entries: Sequence[DatasetEntry], *, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                  epsilon: float = 1e-2, tau: Optional[float] = None, holdout: int = 3,
                  alpha: float = 0.1, init: str = "hr", seed: int = 0, threads: Optional[int] = None,
                  norm_tol: float = 1e-6):
    """Returns (header, rows, report)."""
    if holdout < 1:
        raise ValueError("holdout must be >= 1")
    threads = thread_count() if threads is None else threads
    func = partial(sweep_series, lambdas=tuple(lambdas), epsilon=epsilon, tau=tau, holdout=holdout,
                   init=init, seed=seed)
    outcomes = _parallel_map(func, list(entries), threads)
    labels = sweep_labels(lambdas)
    names = metric_names(holdout)
    lam_col = [0.0] + [float(l) for l in lambdas]
    errors = np.full((len(entries), len(labels), len(names)), np.inf)
    rows = []
    norms = np.full((len(entries), len(labels)), np.nan)
    for i, (entry, (start, results)) in enumerate(zip(entries, outcomes)):
        for j, (res, metrics) in enumerate(results):
            if metrics is not None:
                errors[i, j] = metrics
            if res.ok and res.pacf is not None:
                norms[i, j] = math.sqrt(float(res.pacf.rho @ res.pacf.rho + res.pacf.b @ res.pacf.b))
            rows.append([
                entry.series_id, entry.order.p, entry.order.q, entry.length, entry.sigma,
                labels[j], _fmt(lam_col[j]), _fmt(res.loglik if res.ok else None), _fmt(norms[i, j]),
                res.failure.kind.value if res.failure else "",
                res.boundary.tag.value if res.boundary else "",
            ] + [_fmt(float(v)) if np.isfinite(v) else "" for v in errors[i, j]])

    mean_ranks, fried, nem = {}, {}, {}
    for k, name in enumerate(names):
        if not entries:
            break
        ranks = rank_methods(errors[:, :, k])
        mean_ranks[name] = ranks.mean(axis=0).tolist()
        if len(entries) >= 2:
            rep = friedman(ranks)
            fried[name] = {"statistic": rep.statistic, "p_value": rep.p_value}
            if rep.p_value < alpha:
                nem[name] = nemenyi(ranks).tolist()

    bounded_norms = norms[:, 1:]
    complete = np.all(np.isfinite(bounded_norms), axis=1)
    monotone = np.all(np.diff(bounded_norms, axis=1) <= norm_tol, axis=1) & complete
    report = {
        "kind": "reg-sweep",
        "init": init,
        "holdout": holdout,
        "alpha": alpha,
        "methods": labels,
        "lambdas": [float(l) for l in lambdas],
        "metrics": names,
        "n_series": len(entries),
        "mean_ranks": mean_ranks,
        "friedman": fried,
        "nemenyi": nem,
        "shrinkage": {
            "n_series": int(complete.sum()),
            "n_monotone": int(monotone.sum()),
            "fraction": float(monotone.sum() / complete.sum()) if complete.any() else None,
            "mean_norm": np.nanmean(bounded_norms, axis=0).tolist() if len(entries) else [],
            "tolerance": norm_tol,
        },
    }
    return SWEEP_HEADER + names, rows, report


# ---------------------------------------------------------------------------
# rendering


def _p(p: Optional[float], clip: bool) -> str:
    if p is None:
        return "n/a"
    if clip:
        p = min(max(p, 0.001), 0.9)
    if p < 1e-5:
        return "<1e-5"
    return f"{p:.5f}" if p >= 1e-3 else f"{p:.2e}"


def _table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


_CLASS_LABEL = {t.value: t.label for t in BoundaryTag}


def render_benchmark(records: Sequence[BenchmarkRecord], clip: bool = False) -> str:
    summary = summarize_benchmark(records)
    out = ["## Fitting runtimes", ""]
    tc = summary.get("time_comparison")
    if tc:
        out.append(f"Series compared: {tc['n_series']}; mean time jones {tc['mean_time_jones']:.4g}s, "
                   f"bounded {tc['mean_time_bounded']:.4g}s; relative saving {100 * tc['relative_saving']:.1f}%; "
                   f"bounded faster on {100 * tc['fraction_bounded_faster']:.1f}% of series.")
        out.append("")
        for key, title in (("wilcoxon_two_sided", "Two-sided Wilcoxon, t_jones - t_bounded"),
                           ("wilcoxon_greater", "One-sided Wilcoxon (greater), t_jones - t_bounded")):
            rep = tc[key]
            out.append(f"**{title}**")
            out.append("")
            out.append(_table(["Test statistic", "P-value"],
                              [[f"{rep['statistic']:.4f}", _p(rep["p_value"], clip)]] if rep else [["n/a", "n/a"]]))
            out.append("")
    else:
        out += ["No paired timing data (need successful runs of both methods).", ""]
    out += ["## Numerical instability per 1000 runs", ""]
    rows = []
    for m, info in summary["methods"].items():
        f = info["failures_per_1000"]
        rows.append([m, f"{f['ArithmeticIssue']:.2f}", f"{f['KalmanError']:.2f}", info["runs"]])
    out += [_table(["Method", "Arithmetic issues", "Kalman Filter errors", "Runs"], rows), ""]
    for m in summary["methods"]:
        errs = [e for e in summary["error_points"] if e["method"] == m]
        out += [f"## Kalman filter errors ({m})", ""]
        if not errs:
            out += ["none", ""]
            continue
        out.append(_table(
            ["Model", "Length", "sigma", "Starting point", "Error point", "Ground truth point"],
            [[e["model"], e["length"], e["sigma"], _CLASS_LABEL.get(e["start"], e["start"]),
              _CLASS_LABEL.get(e["error"], e["error"] or "n/a"),
              _CLASS_LABEL.get(e["truth"], e["truth"] or "n/a")] for e in errs],
        ))
        out.append("")
    return "\n".join(out)


def render_forecast(report: Dict, clip: bool = False) -> str:
    out = ["## Forecasting with almost-border models", "",
           f"Series with both solution types: {report['n_selected']} "
           f"(excluded: {report['n_excluded']} of {report['n_series']}).", ""]
    for key, title in (("two_sided", "Two-sided Wilcoxon, border - strict"),
                       ("greater", "One-sided Wilcoxon (greater), border - strict")):
        rows = []
        for t in report["tests"]:
            rep = t[key]
            rows.append([t["metric"], f"{rep['statistic']:.5f}" if rep else "n/a",
                         _p(rep["p_value"], clip) if rep else "n/a"])
        out += [f"**{title}**", "", _table(["Error", "Test statistic", "P-value"], rows), ""]
    return "\n".join(out)


def render_reg_sweep(report: Dict, clip: bool = False) -> str:
    labels = report["methods"]
    out = ["## Average ranks", "",
           _table(["Error"] + labels,
                  [[m] + [f"{v:.3f}" for v in report["mean_ranks"][m]] for m in report["mean_ranks"]]),
           "", "## Friedman test", "",
           _table(["Error", "Test statistic", "P-value"],
                  [[m, f"{v['statistic']:.5f}", _p(v["p_value"], clip)] for m, v in report["friedman"].items()]),
           ""]
    for m, mat in report["nemenyi"].items():
        out += [f"## Nemenyi post-hoc: {m}", "",
                _table([""] + labels, [[labels[i]] + [_p(v, clip) for v in row] for i, row in enumerate(mat)]),
                ""]
    sh = report.get("shrinkage")
    if sh and sh.get("fraction") is not None:
        out += [f"Penalty norm non-increasing in lambda on {sh['n_monotone']}/{sh['n_series']} series.", ""]
    return "\n".join(out)


def to_json(obj) -> str:
    def clean(o):
        if isinstance(o, float):
            return None if not math.isfinite(o) else o
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, np.generic):
            return clean(o.item())
        return o

    return json.dumps(clean(obj), indent=1, sort_keys=True)
