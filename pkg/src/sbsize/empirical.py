"""
Empirical statistics for daily sizing results.

Nearest-rank quantiles, Pearson correlation, the least-squares SIVI
regression with its standard error, and the regression-based capacity
estimate. ``compare_methods`` lines up the sizing baselines side by side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class EmpiricalCdf:
    """Step CDF over a finite sample; quantiles use the nearest-rank rule."""

    def __init__(self, samples: Sequence[float]):
        values = np.sort(np.asarray(samples, dtype=float))
        if values.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError("samples must be finite")
        values.setflags(write=False)
        self.values = values

    def __len__(self) -> int:
        return self.values.size

    @property
    def probabilities(self) -> np.ndarray:
        n = self.values.size
        return np.arange(1, n + 1) / n

    def __call__(self, x):
        """Fraction of samples <= x."""
        return np.searchsorted(self.values, x, side="right") / self.values.size

    def quantile(self, level: float) -> float:
        return pone_quantile(self, level)


def pone_quantile(cdf: EmpiricalCdf, level: float) -> float:
    """Value not exceeded on ``level`` of the samples: rank ceil(level * n)."""
    n = len(cdf)
    if n == 0:
        raise ValueError("empty CDF")
    if not 0.0 < level <= 1.0:
        raise ValueError(f"level {level} must lie in (0, 1]")
    # guard against 0.95 * 20 = 19.000000000000004 style roundoff
    rank = math.ceil(round(level * n, 9))
    return float(cdf.values[max(rank, 1) - 1])


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D and equal length")
    if x.size < 2:
        raise ValueError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class RegressionModel:
    alpha: float  # kWh/kWp per unit SIVI
    beta: float  # kWh/kWp
    sigma: float  # kWh/kWp
    n_samples: int

    def predict(self, sivi):
        return self.alpha * np.asarray(sivi, dtype=float) + self.beta


def standard_error(model: RegressionModel, sivi, sboc) -> float:
    """Root of the mean squared residual; divides by the sample count itself."""
    resid = np.asarray(sboc, dtype=float) - model.predict(sivi)
    return math.sqrt(float(np.dot(resid, resid)) / resid.size)


def fit_regression(points: Sequence[tuple[float, float]]) -> RegressionModel:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("need at least 2 (sivi, sboc) points")
    x, y = pts[:, 0], pts[:, 1]
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise ValueError("degenerate regression: SIVI has zero variance")
    alpha = float(np.dot(dx, y - y.mean())) / sxx
    beta = float(y.mean() - alpha * x.mean())
    model = RegressionModel(alpha, beta, 0.0, len(pts))
    return RegressionModel(alpha, beta, standard_error(model, x, y), len(pts))


def estimate_sboc(model: RegressionModel, sivi: float) -> float:
    """Regression estimate plus one standard error, floored at zero [kWh/kWp]."""
    if sivi < 0:
        raise ValueError("sivi must be non-negative")
    return max(0.0, model.alpha * sivi + model.beta + model.sigma)


def save_model(model: RegressionModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"alpha={model.alpha!r}\nbeta={model.beta!r}\nsigma={model.sigma!r}\nn={model.n_samples}\n")


def load_model(path: str | Path) -> RegressionModel:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            values[key.strip()] = value.strip()
    try:
        return RegressionModel(
            float(values["alpha"]), float(values["beta"]), float(values["sigma"]),
            int(values.get("n", 2)),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing {exc.args[0]}") from None


# --------------------------------------------------------------------------
# method comparison

@dataclass(frozen=True)
class MethodRow:
    method: str
    sboc: float  # kWh/kWp
    coverage: float  # fraction of days feasible at this capacity


def compare_methods(dataset, spec, cfg, pone: float = 0.95, model: RegressionModel | None = None,
                    *, tol: float | None = None, upper: float | None = None, jobs: int = 1):
    """Peak exchange, hourly year, detailed per-day and regression capacities.

    Each capacity is re-simulated on every day at 1-minute resolution to get
    its coverage. Without ``model`` the regression is fitted to this dataset.
    """
    from . import sizing

    tol = sizing.DEFAULT_TOL if tol is None else tol
    upper = sizing.DEFAULT_UPPER if upper is None else upper
    report = sizing.size_year(dataset, spec, cfg, pone, tol=tol, upper=upper, jobs=jobs)
    if model is None:
        model = fit_regression([(r.sivi, r.sboc) for r in report.per_day])
    sivi_level = pone_quantile(EmpiricalCdf([d.sivi for d in dataset.days]), pone)

    capacities = [
        ("peak_energy_exchange", sizing.peak_energy_exchange(dataset, spec)),
        ("hourly_chronological", sizing.hourly_year_sizing(dataset, spec, cfg, tol, upper)),
        (f"detailed_p{pone * 100:g}", report.sboc),
        (f"approximate_p{pone * 100:g}", estimate_sboc(model, sivi_level)),
    ]
    return [
        MethodRow(name, value, sizing.coverage(dataset, spec, cfg, value, jobs=jobs))
        for name, value in capacities
    ]
