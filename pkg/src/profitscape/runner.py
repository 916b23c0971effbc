"""End-to-end experiments: series -> landscapes -> maxima -> exponent."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from profitscape.config import ExperimentConfig
from profitscape.errors import ConfigError, InsufficientDataError, ValidationError
from profitscape.generators import Seed
from profitscape.landscape import (
    ProfitGrid,
    SweepResult,
    build_landscape,
    count_local_maxima,
    ensemble_mean_M,
    write_grid_csv,
    write_points_csv,
)
from profitscape.scaling import ScalingFit, fit_exponent, realization_fits
from profitscape.series import DriftVol, PriceSeries, load_prices, shuffle_returns

SHUFFLE_SUBSTREAM = 1


@dataclass
class ExperimentReport:
    config: dict
    tag: str
    sweeps: list[SweepResult]
    mean_M: list[tuple[int, float]]
    fit: ScalingFit | None
    fit_error: str | None
    realization_a: list[float]
    cells: int
    wall_seconds: float = 0.0
    param: tuple[str, float] | None = None
    landscapes: dict[str, dict[int, ProfitGrid]] = field(default_factory=dict, repr=False)

    @property
    def a(self) -> float:
        if self.fit is None:
            raise InsufficientDataError(self.fit_error or "no fit")
        return self.fit.a

    @property
    def realization_spread(self) -> float:
        ra = self.realization_a
        return float(np.std(ra, ddof=1)) if len(ra) > 1 else float("nan")

    def to_dict(self) -> dict:
        ra = self.realization_a
        return {
            "tag": self.tag,
            "param": None if self.param is None else {"name": self.param[0], "value": self.param[1]},
            "config": self.config,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "fit_error": self.fit_error,
            "mean_M": [{"N": n, "M": m} for n, m in self.mean_M],
            "realization_fits": {
                "count": len(ra),
                "mean_a": float(np.mean(ra)) if ra else None,
                "std_a": float(np.std(ra, ddof=1)) if len(ra) > 1 else None,
            },
            "series": [
                {"label": sw.series_label, "strategy": sw.strategy, "points": [[n, m] for n, m in sw.points]}
                for sw in self.sweeps
            ],
            "telemetry": {"cells": self.cells, "series": len(self.sweeps)},
        }


# --- series --------------------------------------------------------------------


def _min_length(cfg: ExperimentConfig) -> int:
    return max(s.d for s in cfg.strategies) + 2


def _check_length(s: PriceSeries, cfg: ExperimentConfig) -> PriceSeries:
    need = _min_length(cfg)
    if s.T < need:
        raise ValidationError(f"series {s.label!r} has {s.T} prices; need at least {need}")
    return s


def load_source(cfg: ExperimentConfig) -> list[PriceSeries] | None:
    """Series from ``data_dir``, or None for generator sources."""
    if cfg.data_dir is None:
        return None
    path = Path(cfg.data_dir)
    if not path.exists():
        raise FileNotFoundError(f"data_dir {path} does not exist")
    series = load_prices(path)
    if not series:
        raise ConfigError(f"data_dir {path} contains no price files")
    return [_check_length(s, cfg) for s in series]


def series_count(cfg: ExperimentConfig, loaded) -> int:
    return len(loaded) if loaded is not None else cfg.realizations


def make_series(cfg: ExperimentConfig, k: int, cal: DriftVol, loaded=None) -> PriceSeries:
    """Series ``k`` of the experiment; generated ones use stream id ``k``."""
    if loaded is not None:
        s = loaded[k]
    else:
        s = cfg.generator.generate(Seed(cfg.master_seed, k), cal, f"{cfg.generator.model}_{k:04d}")
        _check_length(s, cfg)
    if cfg.shuffle:
        s = shuffle_returns(s, Seed(cfg.master_seed, k).generator(SHUFFLE_SUBSTREAM))
    return s


# --- work units ------------------------------------------------------------------


def _count_task(args):
    cfg, k, N, cal, series, keep = args
    s = series if series is not None else make_series(cfg, k, cal)
    g = build_landscape(s, cfg.strategies[0], N, cfg.domain_scale)
    return k, N, s.label, count_local_maxima(g, cfg.neighborhood), (g if keep else None)


def _series_task(args):
    cfg, k, cal, series, keep = args
    s = series if series is not None else make_series(cfg, k, cal)
    out = []
    for N in cfg.Ns:
        g = build_landscape(s, cfg.strategies[0], N, cfg.domain_scale)
        out.append((k, N, s.label, count_local_maxima(g, cfg.neighborhood), g if keep else None))
    return out


def _collect(cfg: ExperimentConfig, cal: DriftVol, loaded, jobs: int):
    n = series_count(cfg, loaded)
    shuffled = [make_series(cfg, k, cal, loaded) for k in range(n)] if loaded is not None else None
    if jobs <= 1:
        results = []
        for k in range(n):
            s = shuffled[k] if shuffled is not None else None
            results.extend(_series_task((cfg, k, cal, s, k < cfg.keep_landscapes)))
        return results
    # one task per (series, N); merged by index afterwards
    tasks = [
        (cfg, k, N, cal, shuffled[k] if shuffled is not None else None, k < cfg.keep_landscapes)
        for k in range(n)
        for N in reversed(cfg.Ns)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_count_task, tasks, chunksize=1))


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, write: bool = True, tag: str = "") -> ExperimentReport:
    """One strategy, one series source: sweep every series, average, fit."""
    if len(cfg.strategies) != 1 or cfg.sweep is not None:
        raise ConfigError("run_experiment takes a single combination; use run_all for lists and sweeps")
    t0 = time.perf_counter()
    loaded = load_source(cfg)
    cal = cfg.resolved_calibration() if cfg.generator is not None else None
    results = _collect(cfg, cal, loaded, jobs)

    n = series_count(cfg, loaded)
    table: dict[int, dict[int, int]] = {k: {} for k in range(n)}
    labels: dict[int, str] = {}
    grids: dict[str, dict[int, ProfitGrid]] = {}
    for k, N, label, M, g in results:
        table[k][N] = M
        labels[k] = label
        if g is not None:
            grids.setdefault(label, {})[N] = g
    desc = cfg.strategies[0].describe()
    sweeps = [SweepResult([(N, table[k][N]) for N in cfg.Ns], labels[k], desc) for k in range(n)]
    mean = ensemble_mean_M(sweeps, cfg.averaging)
    try:
        fit = fit_exponent(mean, cfg.fit_window, label=tag or desc)
        err = None
    except InsufficientDataError as exc:
        fit, err = None, str(exc)
    report = ExperimentReport(
        config={k: v for k, v in cfg.to_dict().items() if k != "output_dir"},
        tag=tag or desc,
        sweeps=sweeps,
        mean_M=mean,
        fit=fit,
        fit_error=err,
        realization_a=realization_fits([sw.points for sw in sweeps], cfg.fit_window),
        cells=n * sum(N * N for N in cfg.Ns),
        wall_seconds=time.perf_counter() - t0,
        landscapes={lab: dict(sorted(gs.items())) for lab, gs in sorted(grids.items())},
    )
    if write:
        write_report(report, cfg.output_dir)
    return report


def expand(cfg: ExperimentConfig) -> list[tuple[str, ExperimentConfig, tuple[str, float] | None]]:
    """Every (strategy x sweep value) combination with its output tag."""
    out = []
    values = cfg.sweep.values if cfg.sweep is not None else (None,)
    for v in values:
        for sp in cfg.strategies:
            sub = cfg.single(sp)
            tag = sp.describe()
            param = None
            if v is not None:
                scope, name = cfg.sweep.param.split(".", 1)
                if scope == "generator":
                    sub = replace(sub, generator=sub.generator.with_param(name, v))
                else:
                    sub = sub.single(replace(sp, **{name: v}))
                    tag = sub.strategies[0].describe()
                tag = f"{name}={v}/{tag}" if scope == "generator" else tag
                param = (name, v)
            out.append((tag, sub, param))
    if len({t for t, _, _ in out}) != len(out):
        raise ConfigError("duplicate experiment combinations in config")
    return out


def run_all(cfg: ExperimentConfig, jobs: int = 1, write: bool = True) -> list[ExperimentReport]:
    combos = expand(cfg)
    if len(combos) == 1 and cfg.sweep is None:
        tag, sub, _ = combos[0]
        return [run_experiment(sub, jobs, write, tag)]
    reports = []
    for tag, sub, param in combos:
        out = Path(cfg.output_dir) / tag
        rep = run_experiment(replace(sub, output_dir=str(out)), jobs, False, tag)
        rep.param = param
        if write:
            write_report(rep, out)
        reports.append(rep)
    if write and cfg.sweep is not None:
        emit_plot_data(reports, "a_vs_param", cfg.output_dir)
    if write:
        _write_json(Path(cfg.output_dir) / "summary.json", [
            {"tag": r.tag, "a": r.fit.a if r.fit else None,
             "stderr_a": r.fit.stderr_a if r.fit else None,
             "std_realization_a": r.to_dict()["realization_fits"]["std_a"]}
            for r in reports
        ])
    return reports


# --- output ---------------------------------------------------------------------


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def write_report(report: ExperimentReport, out_dir) -> None:
    """Deterministic artifacts plus a separate wall-clock telemetry file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", report.to_dict())
    if report.fit is not None:
        (out / "fit.json").write_text(report.fit.to_json() + "\n", encoding="utf-8")
    with open(out / "sweeps.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "N", "M"])
        for sw in report.sweeps:
            for n, m in sw.points:
                w.writerow([sw.series_label, n, m])
    emit_plot_data(report, "MvsN", out)
    if report.landscapes:
        emit_plot_data(report, "landscape", out)
    _write_json(out / "telemetry.json", {"wall_seconds": report.wall_seconds, "cells": report.cells})


def emit_plot_data(report, kind: str, out_dir) -> list[Path]:
    """Write plot-ready CSVs.

    ``landscape``: one matrix file per stored grid; ``MvsN``: ensemble-mean
    ``N,M``; ``a_vs_param``: ``param,a,stderr`` over a list of reports.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "MvsN":
        path = out / "M_vs_N.csv"
        write_points_csv(report.mean_M, path)
        return [path]
    if kind == "landscape":
        if not report.landscapes:
            raise ConfigError("report holds no landscapes; set keep_landscapes > 0")
        paths = []
        for label, grids in report.landscapes.items():
            for N, g in grids.items():
                p = out / "landscapes" / f"{label}_N{N}.csv"
                p.parent.mkdir(exist_ok=True)
                write_grid_csv(g, p)
                paths.append(p)
        return paths
    if kind == "a_vs_param":
        reports = list(report)
        if not reports or any(r.param is None for r in reports):
            raise ConfigError("a_vs_param needs reports from a parameter sweep")
        path = out / "a_vs_param.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([reports[0].param[0], "a", "stderr", "strategy"])
            for r in reports:
                if r.fit is None:
                    w.writerow([r.param[1], "", "", r.sweeps[0].strategy])
                else:
                    w.writerow([r.param[1], repr(r.fit.a), repr(r.fit.stderr_a), r.sweeps[0].strategy])
        return [path]
    raise ConfigError(f"unknown plot data kind {kind!r}")
