"""Simplified PV array model: irradiance and ambient temperature to ac power."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STC_IRRADIANCE = 1000.0  # W/m^2


@dataclass(frozen=True)
class PvParams:
    """Array rating and derating factors (defaults: 1 kWp crystalline silicon)."""

    p_nom: float = 1000.0  # Wp
    k_e: float = 0.90  # soiling / environmental derating
    k_m: float = 0.95  # manufacturer tolerance
    k_pt: float = 0.0038  # power-temperature coefficient, 1/degC
    eta_inv: float = 0.95

    def __post_init__(self):
        if self.p_nom <= 0:
            raise ValueError("p_nom must be positive")
        for name in ("k_e", "k_m", "eta_inv"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name}={v} must lie in (0, 1]")
        if not 0.0 <= self.k_pt <= 0.02:
            raise ValueError(f"k_pt={self.k_pt} must lie in [0, 0.02]")


def pv_power(ghi, t_amb, p: PvParams = PvParams()):
    """ac output [W]; GHI is taken per-unit of the 1000 W/m^2 STC irradiance.

    The temperature term uses ambient temperature directly, (1 - k_pt*T_amb),
    not a cell-temperature model. Negative results clamp to zero.
    """
    ghi = np.asarray(ghi, dtype=float)
    t_amb = np.asarray(t_amb, dtype=float)
    watts = (ghi / STC_IRRADIANCE) * p.p_nom * p.k_e * p.k_m * (1.0 - p.k_pt * t_amb) * p.eta_inv
    watts = np.maximum(watts, 0.0)
    return float(watts) if watts.ndim == 0 else watts


def pv_day(day, temp, p: PvParams = PvParams()) -> np.ndarray:
    """Minute power series with the day's maximum temperature held all day."""
    if day.date != temp.date:
        raise ValueError(f"irradiance date {day.date} != temperature date {temp.date}")
    return pv_power(day.samples, temp.t_max, p)
