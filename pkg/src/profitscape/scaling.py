"""Power-law fits M ~ N**a of maxima counts against resolution."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from profitscape.errors import ConfigError, InsufficientDataError


@dataclass(frozen=True)
class ScalingFit:
    a: float
    log_intercept: float
    stderr_a: float
    fit_Ns: tuple[int, ...]
    r_squared: float
    points: tuple[tuple[int, float], ...] = ()
    label: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit_Ns"] = list(self.fit_Ns)
        d["points"] = [{"N": int(n), "M": float(m)} for n, m in self.points]
        return d

    def to_json(self) -> str:
        keys = ("label", "a", "stderr_a", "r_squared", "fit_Ns", "points", "log_intercept")
        d = self.to_dict()
        return json.dumps({k: d[k] for k in keys}, indent=2)


def select_window(Ns: Sequence[int], window=None) -> list[int]:
    """Resolutions used by a fit.

    ``None`` (or ``"upper_half"``) keeps the largest ceil(k/2) of the k
    resolutions, ``"all"`` keeps everything, an int ``j`` keeps the largest
    j, and a sequence is an explicit list of N.
    """
    Ns = sorted(int(n) for n in Ns)
    if window is None or window == "upper_half":
        k = len(Ns)
        return Ns[k - math.ceil(k / 2) :]
    if window == "all":
        return Ns
    if isinstance(window, str):
        raise ConfigError(f"unknown fit window {window!r}")
    if isinstance(window, (int, np.integer)):
        if window < 1:
            raise ConfigError("fit window size must be >= 1")
        return Ns[-int(window) :]
    chosen = {int(n) for n in window}
    return [n for n in Ns if n in chosen]


def fit_exponent(points: Sequence[tuple[int, float]], window=None, label: str = "") -> ScalingFit:
    """OLS slope of ln M on ln N over the selected window."""
    pts = sorted((int(n), float(m)) for n, m in points)
    if len({n for n, _ in pts}) != len(pts):
        raise ConfigError("duplicate resolutions in fit input")
    keep = set(select_window([n for n, _ in pts], window))
    used = [(n, m) for n, m in pts if n in keep and m > 0]
    if len(used) < 3:
        raise InsufficientDataError(
            f"need >= 3 positive-M points in the fit window, got {len(used)} of {sorted(keep)}"
        )
    x = np.log([n for n, _ in used])
    y = np.log([m for _, m in used])
    res = stats.linregress(x, y)
    r2 = float(res.rvalue) ** 2 if np.isfinite(res.rvalue) else 1.0
    return ScalingFit(
        a=float(res.slope),
        log_intercept=float(res.intercept),
        stderr_a=float(res.stderr),
        fit_Ns=tuple(n for n, _ in used),
        r_squared=r2,
        points=tuple(pts),
        label=label,
    )


def realization_fits(per_series: Sequence[Sequence[tuple[int, float]]], window=None) -> list[float]:
    """Exponent of each realization on its own; unfittable ones are skipped."""
    out = []
    for pts in per_series:
        try:
            out.append(fit_exponent(pts, window).a)
        except InsufficientDataError:
            continue
    return out


@dataclass
class ExponentTable:
    rows: list[tuple[str, float, float]]
    spread: float
    decreasing: bool | None = None
    increasing: bool | None = None
    by_param: list[tuple[float, float]] = field(default_factory=list)

    def format(self) -> str:
        lines = [f"{'label':<24} {'a':>8} {'stderr':>8}"]
        lines += [f"{lab:<24} {a:8.4f} {se:8.4f}" for lab, a, se in self.rows]
        lines.append(f"spread = {self.spread:.4f}")
        if self.decreasing is not None:
            lines.append(f"decreasing in parameter: {self.decreasing}")
        return "\n".join(lines)


def compare_exponents(
    fits: Sequence[ScalingFit] | Mapping[str, ScalingFit],
    params: Mapping[str, float] | None = None,
) -> ExponentTable:
    """Tabulate fitted exponents; with ``params`` also flag monotonic trends."""
    items = list(fits.items()) if isinstance(fits, Mapping) else [(f.label, f) for f in fits]
    if not items:
        raise ConfigError("no fits to compare")
    rows = sorted((str(lab), f.a, f.stderr_a) for lab, f in items)
    a = [r[1] for r in rows]
    table = ExponentTable(rows=rows, spread=max(a) - min(a))
    if params is not None:
        pairs = sorted((float(params[lab]), f.a) for lab, f in items)
        diffs = np.diff([y for _, y in pairs])
        table.by_param = pairs
        table.decreasing = bool(np.all(diffs < 0))
        table.increasing = bool(np.all(diffs > 0))
    return table
