"""SVG figures for the CLI reports. Nothing downstream reads these files."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "svg.hashsalt": "sbsize",  # stable element ids between runs
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def figsize(width: float = 6.0, ratio: float | None = None):
    if ratio is None:
        ratio = (math.sqrt(5) - 1.0) / 2.0
    return width, width * ratio


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_sizing(report, path, title: str = ""):
    """Daily capacity against SIVI next to the empirical CDF of the capacities."""
    sivi = np.array([r.sivi for r in report.per_day])
    sboc = np.array([r.sboc for r in report.per_day])
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=figsize(9.0, 0.4))
        ax1.scatter(sivi, sboc, s=6, alpha=0.6)
        reg = report.regression
        if reg is not None:
            xs = np.linspace(0.0, sivi.max(), 50)
            ax1.plot(xs, reg.alpha * xs + reg.beta, "k-", lw=1, label="least squares")
            ax1.plot(xs, reg.alpha * xs + reg.beta + reg.sigma, "k--", lw=1, label="+ std. error")
            ax1.legend(frameon=False)
        ax1.set_xlabel("SIVI")
        ax1.set_ylabel("SBOC [kWh/kWp]")
        ax2.step(report.cdf.values, report.cdf.probabilities, where="post")
        ax2.axhline(report.pone, color="grey", lw=0.8, ls=":")
        ax2.axvline(report.sboc, color="grey", lw=0.8, ls=":")
        ax2.set_xlabel("SBOC [kWh/kWp]")
        ax2.set_ylabel("empirical CDF")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return _save(fig, path)


def plot_sivi_cdf(values, path, title: str = ""):
    x = np.sort(np.asarray(values, float))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize(5.0))
        ax.step(x, np.arange(1, x.size + 1) / x.size, where="post")
        ax.set_xlabel("SIVI")
        ax.set_ylabel("empirical CDF")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def plot_day(p_pv, p_target, soc, path, title: str = ""):
    """Raw and smoothed PV power over a day with the battery state of charge."""
    hours = np.arange(len(p_pv)) / 60.0
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=figsize(7.0, 0.7))
        ax1.plot(hours, np.asarray(p_pv) / 1000.0, lw=0.8, label="PV")
        ax1.plot(hours, np.asarray(p_target) / 1000.0, lw=1.0, label="smoothed")
        ax1.set_ylabel("power [kW]")
        ax1.legend(frameon=False)
        ax2.plot(hours, np.asarray(soc) * 100.0, lw=1.0, color="C2")
        ax2.set_ylabel("SoC [%]")
        ax2.set_xlabel("hour of day")
        ax2.set_xlim(0, 24)
        if title:
            ax1.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def plot_sensitivity(rows, per_value_points, path):
    """Scatter of daily capacity vs SIVI, one series per swept value."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize(6.0))
        for row, (sivi, sboc) in zip(rows, per_value_points):
            ax.scatter(sivi, sboc, s=5, alpha=0.5, label=f"{row.axis}={row.value:g}")
        ax.set_xlabel("SIVI")
        ax.set_ylabel("SBOC [kWh/kWp]")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)
