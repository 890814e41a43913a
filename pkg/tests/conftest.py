import datetime as dt

import numpy as np
import pytest

from sbsize import data_io, sizing
from sbsize.battery import BatteryConfig
from sbsize.pv import PvParams, pv_power
from sbsize.smoothing import SmootherSpec

SITE = data_io.SITES["1"]
SITE2 = data_io.SITES["2"]
MA10 = SmootherSpec.moving_average(10)


@pytest.fixture(scope="session")
def site():
    return SITE


@pytest.fixture(scope="session")
def synthetic_year():
    """The bundled fixture year: site-1, 2017, seed 0."""
    return data_io.synth_year(SITE, 2017, seed=0)


@pytest.fixture(scope="session")
def year_dataset(synthetic_year):
    days, temps = synthetic_year
    return sizing.build_dataset(days, temps, SITE)


@pytest.fixture(scope="session")
def base_cfg():
    return BatteryConfig()


@pytest.fixture(scope="session")
def year_report(year_dataset, base_cfg):
    return sizing.size_year(year_dataset, MA10, base_cfg, 0.95)


def day_power(profile, seed=1, date=dt.date(2017, 2, 5), site=SITE, t_amb=25.0, **kw):
    day = data_io.synthesize_day(profile, seed, site, date, **kw)
    return pv_power(day.samples, t_amb, PvParams())


def fixture_days(n=20, seed=0):
    """Mixed and square-wave power days spread through the year."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        date = dt.date(2017, 1, 1) + dt.timedelta(days=int(rng.integers(0, 365)))
        if i % 4 == 3:
            out.append(day_power("square_wave", i, date, period=int(rng.choice([20, 40, 60, 120]))))
        else:
            out.append(day_power("mixed", int(rng.integers(1 << 30)), date))
    return out


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.VERDICTS):
            terminalreporter.write_line(line)
