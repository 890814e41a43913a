"""Solar geometry, clear-sky irradiance and the daily variability index."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Callable

import numpy as np

MINUTES_PER_DAY = 1440


def solar_zenith(latitude, longitude, utc_offset, date: dt.date, minutes) -> np.ndarray:
    """Solar zenith angle [deg] at local standard time ``minutes`` after midnight.

    Spencer's Fourier series for declination and equation of time; good to
    roughly 0.1-0.2 degrees, which is plenty for a clear-sky envelope.
    """
    minutes = np.asarray(minutes, dtype=float)
    doy = date.timetuple().tm_yday
    hours = minutes / 60.0
    gamma = 2.0 * np.pi * (doy - 1 + (hours - 12.0) / 24.0) / 365.0

    decl = (
        0.006918
        - 0.399912 * np.cos(gamma) + 0.070257 * np.sin(gamma)
        - 0.006758 * np.cos(2 * gamma) + 0.000907 * np.sin(2 * gamma)
        - 0.002697 * np.cos(3 * gamma) + 0.00148 * np.sin(3 * gamma)
    )
    eot_min = 229.18 * (
        0.000075
        + 0.001868 * np.cos(gamma) - 0.032077 * np.sin(gamma)
        - 0.014615 * np.cos(2 * gamma) - 0.040849 * np.sin(2 * gamma)
    )
    solar_time = hours + (4.0 * (longitude - 15.0 * utc_offset) + eot_min) / 60.0
    hour_angle = np.radians(15.0 * (solar_time - 12.0))
    lat = np.radians(latitude)
    cos_z = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour_angle)
    return np.degrees(np.arccos(np.clip(cos_z, -1.0, 1.0)))


def haurwitz(zenith_deg) -> np.ndarray:
    """Haurwitz clear-sky GHI [W/m^2]; zero with the sun at or below the horizon."""
    cos_z = np.cos(np.radians(np.asarray(zenith_deg, dtype=float)))
    out = np.zeros_like(cos_z)
    up = cos_z > 0.0
    out[up] = 1098.0 * cos_z[up] * np.exp(-0.057 / cos_z[up])
    return out


def clear_sky(site, date: dt.date, model: Callable = haurwitz) -> np.ndarray:
    """1440-sample clear-sky GHI profile for ``site`` on ``date``.

    ``site`` needs ``latitude``, ``longitude`` and ``utc_offset``; ``model``
    maps zenith angle in degrees to GHI.
    """
    zen = solar_zenith(
        site.latitude, site.longitude, site.utc_offset, date, np.arange(MINUTES_PER_DAY)
    )
    return model(zen)


@dataclass(frozen=True)
class SiviResult:
    date: dt.date
    sivi: float
    delta_t: float = 1.0
    n_samples: int = MINUTES_PER_DAY


def _path_length(series: np.ndarray, delta_t: float) -> float:
    return float(np.sum(np.sqrt(np.diff(series) ** 2 + delta_t**2)))


def sivi_value(ghi, ghi_clear, delta_t: float = 1.0) -> float:
    """Ratio of measured to clear-sky curve length (GHI in W/m^2, step in minutes)."""
    ghi = np.asarray(ghi, dtype=float)
    ghi_clear = np.asarray(ghi_clear, dtype=float)
    if ghi.shape != ghi_clear.shape or ghi.ndim != 1 or ghi.size < 2:
        raise ValueError("measured and clear-sky series must be 1-D and equal length >= 2")
    if not np.any(ghi_clear > 0.0):
        raise ValueError("degenerate clear-sky profile (sun never above horizon)")
    return _path_length(ghi, delta_t) / _path_length(ghi_clear, delta_t)


def sivi(day, cs) -> SiviResult:
    """Daily variability index of an :class:`~sbsize.data_io.IrradianceDay`."""
    samples = day.samples
    if len(samples) != len(cs):
        raise ValueError(f"{day.date}: day has {len(samples)} samples, clear-sky {len(cs)}")
    return SiviResult(day.date, sivi_value(samples, cs), 1.0, len(samples))
