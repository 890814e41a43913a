"""
Chronological sizing of the smoothing battery.

Every day is simulated at 1-minute steps starting from the nightly-reset
state; the smallest capacity that never fails is found by bisection, and the
yearly capacity is read off the empirical CDF of the daily optima at a chosen
probability of non-exceedance. Capacities are in kWh per kWp of PV.
"""
from __future__ import annotations

import datetime as dt
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import battery, pv, solar
from .battery import BatteryConfig
from .empirical import EmpiricalCdf, RegressionModel, fit_regression, pearson, pone_quantile
from .smoothing import MA, RR, SmootherSpec, smooth

log = logging.getLogger(__name__)

MINUTE = 1.0 / 60.0  # h
DEFAULT_TOL = 1e-4  # kWh/kWp
DEFAULT_UPPER = 2.0  # kWh/kWp
REPORT_LEVELS = (0.5, 0.75, 0.9, 0.95, 0.99, 1.0)


@dataclass(frozen=True, eq=False)
class DayInput:
    date: dt.date
    sivi: float
    p_pv: np.ndarray  # W


@dataclass(eq=False)
class Dataset:
    days: list[DayInput]
    p_nom: float = 1000.0  # Wp
    dt: float = MINUTE  # h

    def __len__(self):
        return len(self.days)

    @property
    def kwp(self) -> float:
        return self.p_nom / 1000.0


def build_dataset(irradiance, temperatures, site, params: pv.PvParams = pv.PvParams(),
                  clear_sky_model: Callable = solar.haurwitz) -> Dataset:
    """Pair irradiance days with temperatures; days without a temperature are skipped."""
    temps = {t.date: t for t in temperatures}
    days = []
    for day in irradiance:
        temp = temps.get(day.date)
        if temp is None:
            log.warning("no temperature for %s, day skipped", day.date)
            continue
        cs = solar.clear_sky(site, day.date, clear_sky_model)
        days.append(DayInput(day.date, solar.sivi(day, cs).sivi, pv.pv_day(day, temp, params)))
    return Dataset(days, params.p_nom)


# --------------------------------------------------------------------------
# single day

@dataclass(frozen=True)
class DayOutcome:
    feasible: bool
    min_soc: float
    max_soc: float
    any_clip: bool


@dataclass(frozen=True)
class DailySizingResult:
    date: dt.date | None
    sivi: float
    sboc: float  # kWh/kWp
    feasible_at_cap: bool
    iterations: int


def _run(p_sb, cfg: BatteryConfig, dt_h: float, stop_early: bool) -> DayOutcome:
    if cfg.e_nom <= 0.0:
        idle = not np.any(np.abs(p_sb) > 1e-9)
        return DayOutcome(idle, cfg.soc_init, cfg.soc_init, not idle)
    traj = battery.simulate(p_sb, dt_h, cfg, stop_on_failure=stop_early)
    return DayOutcome(traj.feasible, traj.min_soc, traj.max_soc, traj.any_clip)


def simulate_day(day_power, spec: SmootherSpec, cfg: BatteryConfig, p_nom: float = 1000.0,
                 dt_h: float = MINUTE) -> DayOutcome:
    """Smooth one day of PV power and run the battery through it from the morning state."""
    p_sb = smooth(day_power, spec, p_nom).p_sb
    return _run(p_sb, cfg, dt_h, stop_early=False)


def _bisect(feasible: Callable[[float], bool], tol: float, upper: float):
    """Smallest feasible value on [0, upper] to within ``tol``; assumes monotonicity."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    iterations = 1
    if not feasible(upper):
        return upper, False, iterations
    iterations += 1
    if feasible(0.0):
        return 0.0, True, iterations
    lo, hi = 0.0, upper
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi, True, iterations


def optimize_day(day_power, spec: SmootherSpec, cfg_template: BatteryConfig,
                 tol: float = DEFAULT_TOL, upper: float = DEFAULT_UPPER, p_nom: float = 1000.0,
                 *, date=None, sivi: float = float("nan"), dt_h: float = MINUTE) -> DailySizingResult:
    """Smallest capacity [kWh/kWp] that carries the day's smoothing without failing."""
    p_sb = smooth(day_power, spec, p_nom).p_sb
    kwp = p_nom / 1000.0

    def feasible(sboc):
        return _run(p_sb, cfg_template.with_capacity(sboc * kwp), dt_h, stop_early=True).feasible

    sboc, ok, iters = _bisect(feasible, tol, upper)
    return DailySizingResult(date, sivi, sboc, ok, iters)


# --------------------------------------------------------------------------
# yearly

@dataclass
class YearSizingReport:
    per_day: list[DailySizingResult]
    cdf: EmpiricalCdf
    pone: float
    sboc: float  # at ``pone``
    sboc_at_pone: dict[float, float]
    pearson_r: float
    regression: RegressionModel | None = field(default=None)


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _require_days(dataset: Dataset):
    if not dataset.days:
        raise ValueError("empty dataset")


def size_year(dataset: Dataset, spec: SmootherSpec, cfg: BatteryConfig, pone: float = 0.95,
              *, tol: float = DEFAULT_TOL, upper: float = DEFAULT_UPPER, jobs: int = 1) -> YearSizingReport:
    _require_days(dataset)

    def one(day: DayInput):
        return optimize_day(day.p_pv, spec, cfg, tol, upper, dataset.p_nom,
                            date=day.date, sivi=day.sivi, dt_h=dataset.dt)

    per_day = _map(one, dataset.days, jobs)
    cdf = EmpiricalCdf([r.sboc for r in per_day])
    levels = sorted(set(REPORT_LEVELS) | {pone})
    at = {lvl: pone_quantile(cdf, lvl) for lvl in levels}
    sivis = [r.sivi for r in per_day]
    sbocs = [r.sboc for r in per_day]
    try:
        r = pearson(sivis, sbocs)
    except ValueError:
        r = float("nan")
    try:
        reg = fit_regression(list(zip(sivis, sbocs)))
    except ValueError:
        reg = None
    return YearSizingReport(per_day, cdf, pone, at[pone], at, r, reg)


def coverage(dataset: Dataset, spec: SmootherSpec, cfg: BatteryConfig, sboc: float,
             *, jobs: int = 1) -> float:
    """Fraction of days on which capacity ``sboc`` [kWh/kWp] never fails."""
    _require_days(dataset)
    sized = cfg.with_capacity(sboc * dataset.kwp)
    ok = _map(lambda d: simulate_day(d.p_pv, spec, sized, dataset.p_nom, dataset.dt).feasible,
              dataset.days, jobs)
    return sum(ok) / len(ok)


# --------------------------------------------------------------------------
# baselines

def daily_energy_exchange(p_sb, dt_h: float = MINUTE) -> float:
    """Range of the running battery energy exchange over a day [kWh]."""
    run = np.concatenate(([0.0], np.cumsum(np.asarray(p_sb, float)) * dt_h / 1000.0))
    return float(run.max() - run.min())


def peak_energy_exchange(dataset: Dataset, spec: SmootherSpec) -> float:
    """Largest daily exchange range of the year, ignoring losses and DoD [kWh/kWp]."""
    _require_days(dataset)
    return max(
        daily_energy_exchange(smooth(d.p_pv, spec, dataset.p_nom).p_sb, dataset.dt)
        for d in dataset.days
    ) / dataset.kwp


def hourly_series(dataset: Dataset) -> np.ndarray:
    """Hourly mean PV power for the whole dataset, days in date order."""
    per_hour = round(1.0 / dataset.dt)
    blocks = [d.p_pv.reshape(-1, per_hour).mean(axis=1) for d in sorted(dataset.days, key=lambda d: d.date)]
    return np.concatenate(blocks)


def hourly_year_sizing(dataset: Dataset, spec: SmootherSpec, cfg: BatteryConfig,
                       tol: float = DEFAULT_TOL, upper: float = DEFAULT_UPPER,
                       max_upper: float = 1024.0) -> float:
    """Single continuous simulation of the year at 1-hour resolution.

    The smoother runs on hourly samples with its parameters counted per time
    step (window of N hours, ramp limit per hour). There is no nightly reset;
    the search bound doubles up to ``max_upper`` if ``upper`` is too small.
    """
    _require_days(dataset)
    p_sb = smooth(hourly_series(dataset), spec, dataset.p_nom).p_sb
    kwp = dataset.kwp

    def feasible(sboc):
        return _run(p_sb, cfg.with_capacity(sboc * kwp), 1.0, stop_early=True).feasible

    bound = upper
    while True:
        sboc, ok, _ = _bisect(feasible, tol, bound)
        if ok or bound >= max_upper:
            break
        bound *= 2.0
    if not ok:
        log.warning("hourly sizing infeasible up to %g kWh/kWp", bound)
    return sboc


# --------------------------------------------------------------------------
# sensitivity

SWEEP_AXES = ("ma_window", "rr_limit", "dod", "soc_init")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    mean_sboc: float
    sigma: float
    pearson_r: float
    sboc_at_pone: float


def _vary(axis: str, value, spec: SmootherSpec, cfg: BatteryConfig):
    if axis == "ma_window":
        if int(value) != value or value < 1:
            raise ValueError(f"ma_window {value} must be an integer >= 1")
        return SmootherSpec.moving_average(int(value)), cfg
    if axis == "rr_limit":
        if not 0.0 < value <= 1.0:
            raise ValueError(f"rr_limit {value} must lie in (0, 1]")
        return SmootherSpec.ramp_rate(value, spec.rr_reference if spec.kind == RR else "previous_smoothed"), cfg
    if axis == "dod":
        if not 0.0 < value <= 1.0 or 1.0 - value >= cfg.soc_init:
            raise ValueError(f"dod {value} must lie in (1 - soc_init, 1]")
        return spec, cfg.with_dod(value)
    if axis == "soc_init":
        if not cfg.soc_min < value <= cfg.soc_max:
            raise ValueError(f"soc_init {value} must lie in (soc_min, soc_max]")
        return spec, replace(cfg, soc_init=value)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep_reports(dataset: Dataset, axis: str, values: Sequence[float], spec: SmootherSpec,
                  cfg: BatteryConfig, pone: float = 0.95, *, tol: float = DEFAULT_TOL,
                  upper: float = DEFAULT_UPPER, jobs: int = 1) -> list[tuple[float, YearSizingReport]]:
    if not values:
        raise ValueError("no sweep values")
    settings = [_vary(axis, v, spec, cfg) for v in values]  # validate before running
    return [
        (float(v), size_year(dataset, s, c, pone, tol=tol, upper=upper, jobs=jobs))
        for v, (s, c) in zip(values, settings)
    ]


def summarize_sweep(axis: str, reports) -> list[SweepRow]:
    rows = []
    for value, rep in reports:
        sigma = rep.regression.sigma if rep.regression else float("nan")
        mean = float(np.mean([r.sboc for r in rep.per_day]))
        rows.append(SweepRow(axis, value, mean, sigma, rep.pearson_r, rep.sboc))
    return rows


def sensitivity_sweep(dataset: Dataset, axis: str, values: Sequence[float], spec: SmootherSpec,
                      cfg: BatteryConfig, pone: float = 0.95, *, tol: float = DEFAULT_TOL,
                      upper: float = DEFAULT_UPPER, jobs: int = 1) -> list[SweepRow]:
    """Re-size the year for each value of one parameter, all others held fixed."""
    reports = sweep_reports(dataset, axis, values, spec, cfg, pone, tol=tol, upper=upper, jobs=jobs)
    return summarize_sweep(axis, reports)
