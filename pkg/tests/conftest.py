import numpy as np
import pytest

from profitscape.series import PriceSeries


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def lognormal_series(rng, T=50, sigma=0.05, label="rand"):
    steps = rng.normal(0.0, sigma, T - 1)
    return PriceSeries(100.0 * np.exp(np.concatenate(([0.0], np.cumsum(steps)))), label)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "VERDICTS", []), key=lambda s: int(s.split("criterion")[1].split(":")[0]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
