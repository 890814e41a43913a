"""Smoothing targets and the battery power they imply.

``p_sb = p_target - p_pv``; positive values ask the battery to discharge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MA = "MA"
RR = "RR"
PREVIOUS_SMOOTHED = "previous_smoothed"
PREVIOUS_RAW = "previous_raw"


@dataclass(frozen=True)
class SmootherSpec:
    kind: str = MA
    ma_window: int = 10  # time steps
    rr_limit: float = 0.05  # fraction of p_nom per time step
    rr_reference: str = PREVIOUS_SMOOTHED

    def __post_init__(self):
        if self.kind not in (MA, RR):
            raise ValueError(f"kind must be {MA!r} or {RR!r}, got {self.kind!r}")
        if int(self.ma_window) != self.ma_window or self.ma_window < 1:
            raise ValueError(f"ma_window={self.ma_window} must be an integer >= 1")
        if not 0.0 < self.rr_limit <= 1.0:
            raise ValueError(f"rr_limit={self.rr_limit} must lie in (0, 1]")
        if self.rr_reference not in (PREVIOUS_SMOOTHED, PREVIOUS_RAW):
            raise ValueError(f"unknown rr_reference {self.rr_reference!r}")

    @classmethod
    def moving_average(cls, window: int) -> "SmootherSpec":
        return cls(kind=MA, ma_window=int(window))

    @classmethod
    def ramp_rate(cls, limit: float, reference: str = PREVIOUS_SMOOTHED) -> "SmootherSpec":
        return cls(kind=RR, rr_limit=float(limit), rr_reference=reference)

    def label(self) -> str:
        if self.kind == MA:
            return f"MA {self.ma_window}"
        return f"RR {self.rr_limit:g}"


@dataclass(frozen=True, eq=False)
class SmoothedDay:
    p_target: np.ndarray
    p_sb: np.ndarray


def ma_smooth(p_pv, n_w: int) -> SmoothedDay:
    """Trailing mean over ``n_w`` samples; samples before the start count as zero."""
    if n_w < 1:
        raise ValueError("n_w must be >= 1")
    p = np.asarray(p_pv, dtype=float)
    csum = np.concatenate(([0.0], np.cumsum(p)))
    idx = np.arange(1, p.size + 1)
    target = (csum[idx] - csum[np.maximum(idx - n_w, 0)]) / n_w
    if n_w == 1:
        target = p.copy()
    return SmoothedDay(target, target - p)


def rr_smooth(p_pv, k_rrl: float, p_nom: float, reference: str = PREVIOUS_SMOOTHED) -> SmoothedDay:
    """Ramp-rate limited target with step limit ``k_rrl * p_nom``.

    ``previous_smoothed`` limits against the last target, which bounds every
    output ramp. ``previous_raw`` compares against and offsets from the last raw
    PV sample, which does not.
    """
    if not 0.0 < k_rrl <= 1.0:
        raise ValueError("k_rrl must lie in (0, 1]")
    if reference not in (PREVIOUS_SMOOTHED, PREVIOUS_RAW):
        raise ValueError(f"unknown reference {reference!r}")
    p = np.asarray(p_pv, dtype=float)
    d_max = k_rrl * p_nom
    target = np.empty_like(p)
    if p.size == 0:
        return SmoothedDay(target, target.copy())
    target[0] = p[0]
    if reference == PREVIOUS_RAW:
        prev = p[:-1]
        delta = p[1:] - prev
        target[1:] = np.where(
            np.abs(delta) <= d_max, p[1:], prev + np.sign(delta) * d_max
        )
    else:
        prev = p[0]
        for t in range(1, p.size):
            delta = p[t] - prev
            if delta > d_max:
                prev = prev + d_max
            elif delta < -d_max:
                prev = prev - d_max
            else:
                prev = p[t]
            target[t] = prev
    return SmoothedDay(target, target - p)


def smooth(p_pv, spec: SmootherSpec, p_nom: float) -> SmoothedDay:
    if spec.kind == MA:
        return ma_smooth(p_pv, spec.ma_window)
    return rr_smooth(p_pv, spec.rr_limit, p_nom, spec.rr_reference)
