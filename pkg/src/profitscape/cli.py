"""Command-line entry point: ``profitscape <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from profitscape.backtest import StrategyParams, run_strategy
from profitscape.config import REFERENCE_CALIBRATION, ExperimentConfig, GeneratorConfig
from profitscape.errors import ProfitscapeError
from profitscape.generators import Seed
from profitscape.landscape import (
    DEFAULT_NS,
    Neighborhood,
    build_landscape,
    count_local_maxima,
    ensemble_mean_M,
    read_points_csv,
    sweep_resolutions,
    write_grid_csv,
    write_points_csv,
)
from profitscape.runner import run_all
from profitscape.scaling import fit_exponent
from profitscape.series import DriftVol, load_prices, shuffle_returns, write_price_csv

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("profitscape")


def _ns(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _kv(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    num = float(val)
    return key, int(num) if key in ("T", "K") else num


def _strategy_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("strategy")
    g.add_argument("--kind", choices=["S1", "S2"], default="S1")
    g.add_argument("-p", type=float, default=0.1, help="sell threshold (S1)")
    g.add_argument("-q", type=float, default=0.1, help="buy threshold (S1)")
    g.add_argument("-d", type=int, default=1, help="return lag in days")
    g.add_argument("--fb", type=float, default=0.5)
    g.add_argument("--fs", type=float, default=0.5)
    g.add_argument("--fee", type=float, default=0.001)


def _strategy(a) -> StrategyParams:
    return StrategyParams(a.kind, a.p, a.q, a.d, a.fb, a.fs, a.fee)


def _emit(a, obj, csv_rows=None) -> None:
    """Print ``obj`` as JSON, or ``csv_rows`` as CSV when --format csv."""
    if a.format == "json" or csv_rows is None:
        print(json.dumps(obj, indent=2))
    else:
        for row in csv_rows:
            print(",".join(str(x) for x in row))


def _out_dir(a) -> Path:
    out = Path(a.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ----------------------------------------------------------------


def cmd_generate(a) -> int:
    if a.config:
        cfg = ExperimentConfig.load(a.config)
        if cfg.generator is None:
            raise ProfitscapeError("config has no generator source")
        gen, n, cal = cfg.generator, cfg.realizations, cfg.resolved_calibration()
        master = cfg.master_seed if a.seed is None else a.seed
    else:
        gen = GeneratorConfig(a.model, dict(a.param))
        n = a.realizations
        cal = REFERENCE_CALIBRATION
        if a.sigma is not None:
            cal = DriftVol(a.mu if a.mu is not None else a.sigma**2 / 2, a.sigma)
        master = a.seed or 0
    out = _out_dir(a)
    for k in range(n):
        label = f"{gen.model}_{k:04d}"
        s = gen.generate(Seed(master, k), cal, label)
        write_price_csv(s, out / f"{label}.csv")
    print(f"wrote {n} series to {out}")
    return EXIT_OK


def cmd_backtest(a) -> int:
    rows = []
    for s in load_prices(a.prices):
        res = run_strategy(s, _strategy(a))
        rows.append({"label": s.label, "pi": res.pi, "trades": res.trade_count})
    if a.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        print("label,pi,trades")
        for r in rows:
            print(f"{r['label']},{r['pi']!r},{r['trades']}")
    return EXIT_OK


def cmd_landscape(a) -> int:
    s = load_prices(a.prices)[0]
    g = build_landscape(s, _strategy(a), a.N, a.domain_scale)
    M = count_local_maxima(g, a.neighborhood)
    if a.out:
        out = _out_dir(a)
        path = out / f"{s.label}_N{a.N}.{a.format}"
        if a.format == "json":
            path.write_text(json.dumps({"N": a.N, "values": g.values.tolist()}) + "\n", encoding="utf-8")
        else:
            write_grid_csv(g, path)
    _emit(a, {"label": s.label, "N": a.N, "M": M}, [["label", "N", "M"], [s.label, a.N, M]])
    return EXIT_OK


def cmd_sweep(a) -> int:
    series = load_prices(a.prices)
    if a.shuffle:
        series = [shuffle_returns(s, Seed(a.seed or 0, k).generator(1)) for k, s in enumerate(series)]
    sweeps = [sweep_resolutions(s, _strategy(a), a.Ns, a.neighborhood, a.domain_scale) for s in series]
    mean = ensemble_mean_M(sweeps)
    if a.out:
        write_points_csv(mean, _out_dir(a) / "M_vs_N.csv")
    _emit(a, [{"N": n, "M": m} for n, m in mean], [["N", "M"], *mean])
    return EXIT_OK


def cmd_fit(a) -> int:
    window = a.window
    if window not in (None, "all", "upper_half"):
        window = int(window)
    fit = fit_exponent(read_points_csv(a.points), window, label=Path(a.points).stem)
    if a.out:
        (_out_dir(a) / "fit.json").write_text(fit.to_json() + "\n", encoding="utf-8")
    _emit(a, fit.to_dict(), [["a", "stderr_a", "r_squared"], [fit.a, fit.stderr_a, fit.r_squared]])
    return EXIT_OK


def cmd_run(a) -> int:
    if not a.config:
        raise ProfitscapeError("run needs --config")
    cfg = ExperimentConfig.load(a.config)
    over = {}
    if a.seed is not None:
        over["master_seed"] = a.seed
    if a.out:
        over["output_dir"] = a.out
    if over:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **over})
    for r in run_all(cfg, a.jobs):
        if r.fit is None:
            print(f"{r.tag}: no fit ({r.fit_error})")
        else:
            print(f"{r.tag}: a = {r.fit.a:.4f} +/- {r.fit.stderr_a:.4f} (realization sd {r.realization_spread:.3f})")
    return EXIT_OK


def cmd_shuffle(a) -> int:
    out = _out_dir(a)
    series = load_prices(a.prices)
    for k, s in enumerate(series):
        sh = shuffle_returns(s, Seed(a.seed or 0, k).generator(1))
        write_price_csv(sh, out / f"{s.label}_shuffled.csv")
    print(f"wrote {len(series)} shuffled series to {out}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="profitscape", description="Profit-landscape scaling experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write synthetic price CSVs")
    p.add_argument("--model", choices=["gbm", "fbm", "levy", "msm"], default="gbm")
    p.add_argument("--param", type=_kv, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--sigma", type=float, help="calibration volatility")
    p.add_argument("--mu", type=float, help="calibration drift (default sigma^2/2)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("backtest", parents=[common], help="profit of one strategy")
    p.add_argument("prices", help="price CSV file or directory")
    _strategy_args(p)
    p.set_defaults(func=cmd_backtest)

    for name, func, help_ in (
        ("landscape", cmd_landscape, "one profit grid and its maxima"),
        ("sweep", cmd_sweep, "ensemble-mean M over a resolution ladder"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("prices", help="price CSV file or directory")
        _strategy_args(p)
        p.add_argument("--neighborhood", choices=[n.value for n in Neighborhood], default="von_neumann")
        p.add_argument("--domain-scale", type=float, default=1.0)
        if name == "landscape":
            p.add_argument("-N", type=int, default=64)
        else:
            p.add_argument("--Ns", type=_ns, default=list(DEFAULT_NS))
            p.add_argument("--shuffle", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("fit", parents=[common], help="exponent from an N,M CSV")
    p.add_argument("points")
    p.add_argument("--window", help="'upper_half' (default), 'all' or a count of largest N")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("run", parents=[common], help="full experiment from --config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("shuffle", parents=[common], help="write return-shuffled copies")
    p.add_argument("prices")
    p.set_defaults(func=cmd_shuffle)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except (ProfitscapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
