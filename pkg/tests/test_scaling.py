import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from profitscape.errors import ConfigError, InsufficientDataError
from profitscape.scaling import (
    ScalingFit,
    compare_exponents,
    fit_exponent,
    realization_fits,
    select_window,
)

NS = [8, 16, 32, 64, 128, 256]


def law(a, c=1.0, Ns=NS):
    return [(n, c * n**a) for n in Ns]


@pytest.mark.parametrize("a, c", [(2.0, 1.0), (1.0, 1.0), (1.6, 3.0)])
def test_exact_power_laws(a, c):
    fit = fit_exponent(law(a, c))
    assert fit.a == pytest.approx(a, abs=1e-10)
    assert fit.log_intercept == pytest.approx(math.log(c), abs=1e-10)
    assert fit.stderr_a < 1e-8
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.fit_Ns == (64, 128, 256)


def test_windows():
    assert select_window(NS) == [64, 128, 256]
    assert select_window(NS[:5]) == [32, 64, 128]
    assert select_window(NS, "all") == NS
    assert select_window(NS, 4) == [32, 64, 128, 256]
    assert select_window(NS, [8, 32, 256, 1024]) == [8, 32, 256]
    with pytest.raises(ConfigError):
        select_window(NS, "bottom")


def test_zero_counts_are_dropped_before_fitting():
    pts = law(1.5)
    pts[3] = (64, 0.0)
    fit = fit_exponent(pts, window=4)
    assert fit.fit_Ns == (32, 128, 256)
    with pytest.raises(InsufficientDataError):
        fit_exponent(pts)
    with pytest.raises(InsufficientDataError):
        fit_exponent([(n, 0.0) for n in NS])


def test_duplicate_resolutions_rejected():
    with pytest.raises(ConfigError):
        fit_exponent([(8, 1), (8, 2), (16, 3), (32, 4)])


@given(st.floats(0.01, 1e6), st.permutations(range(6)))
def test_rescaling_and_reordering(c, order):
    rng = np.random.default_rng(0)
    pts = [(n, n**1.7 * math.exp(rng.normal(0, 0.1))) for n in NS]
    base = fit_exponent(pts, "all")
    scaled = fit_exponent([(n, c * m) for n, m in pts], "all")
    assert scaled.a == pytest.approx(base.a, abs=1e-12)
    assert scaled.log_intercept == pytest.approx(base.log_intercept + math.log(c), abs=1e-9)
    shuffled = fit_exponent([pts[i] for i in order], "all")
    assert shuffled.a == pytest.approx(base.a, abs=1e-12)


def test_noisy_fit_has_positive_stderr():
    pts = [(8, 10), (16, 35), (32, 110), (64, 500)]
    fit = fit_exponent(pts, "all")
    x, y = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    assert fit.a == pytest.approx(slope)
    resid = y - (slope * x + intercept)
    se = math.sqrt(resid @ resid / (len(x) - 2) / np.sum((x - x.mean()) ** 2))
    assert fit.stderr_a == pytest.approx(se)
    assert 0 < fit.r_squared < 1


def test_json_schema():
    d = json.loads(fit_exponent(law(2.0), label="gbm").to_json())
    assert set(d) >= {"label", "a", "stderr_a", "r_squared", "fit_Ns", "points"}
    assert d["points"][0] == {"N": 8, "M": 64.0}
    assert d["fit_Ns"] == [64, 128, 256]


def test_realization_fits_skip_degenerate():
    per = [law(2.0), [(n, 0) for n in NS], law(1.5)]
    assert realization_fits(per) == pytest.approx([2.0, 1.5])


def test_compare_single_and_identical():
    f = fit_exponent(law(1.6), label="x")
    t = compare_exponents([f])
    assert len(t.rows) == 1 and t.spread == 0
    t = compare_exponents({"a": f, "b": f})
    assert t.spread == 0
    with pytest.raises(ConfigError):
        compare_exponents([])


def test_compare_monotonic_flags():
    fits = {f"alpha={al}": fit_exponent(law(a)) for al, a in [(2.0, 2.0), (1.5, 1.7), (1.2, 1.4)]}
    params = {f"alpha={al}": al for al in (2.0, 1.5, 1.2)}
    t = compare_exponents(fits, params)
    # a grows with alpha, i.e. decreases as alpha decreases
    assert t.increasing and not t.decreasing
    assert [r[0] for r in t.rows] == sorted(fits)
    assert "spread" in t.format()


def test_scaling_fit_is_frozen():
    f = fit_exponent(law(2.0))
    assert isinstance(f, ScalingFit)
    with pytest.raises(Exception):
        f.a = 1.0
