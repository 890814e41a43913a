"""
Kinetic battery model (KiBaM) in the energy domain.

Charge is tracked in kWh rather than Ah: a constant nominal cell voltage maps
one onto the other, so the rate constant ``k1`` [1/h] and the capacity ratio
``k2`` carry over unchanged and the total capacity scales with ``e_nom``. A
battery-side power of P kW then plays the role of the current I.

Sign convention: positive power discharges the battery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit
from scipy.optimize import least_squares

NOMINAL_CELL_VOLTAGE = 2.0  # V, reference cell of the discharge table

# Step outcome codes shared by the scalar API and the day kernel.
CLIP_NONE = 0
CLIP_EMPTY = 1
CLIP_FULL = 2


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class KibamConstants:
    k1: float  # 1/h
    k2: float  # available / total capacity
    q_max_ref: float = 1.0  # Ah of the fitted reference cell

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1={self.k1} must be positive")
        if not 0.0 < self.k2 < 1.0:
            raise ValueError(f"k2={self.k2} must lie in (0, 1)")
        if not self.q_max_ref > 0:
            raise ValueError(f"q_max_ref={self.q_max_ref} must be positive")

    @property
    def e_ref_kwh(self) -> float:
        return self.q_max_ref * NOMINAL_CELL_VOLTAGE / 1000.0


# Least-squares fit of the 2 V / 500 Ah cell discharge table (see
# DISCHARGE_TABLE); regenerate with ``fit_kibam(DISCHARGE_TABLE)``.
DEFAULT_CONSTANTS = KibamConstants(k1=1.1210600157957693, k2=0.3204816112008955, q_max_ref=552.8826345520109)

DISCHARGE_TABLE = ((1.0, 242.4), (3.0, 115.7), (5.0, 79.8), (8.0, 55.23), (10.0, 47.01))


@dataclass(frozen=True)
class BatteryConfig:
    """Smoothing battery. ``e_nom`` [kWh] is the sizing decision variable."""

    e_nom: float = 1.0
    constants: KibamConstants = DEFAULT_CONSTANTS
    soc_min: float = 0.3
    soc_max: float = 1.0
    soc_init: float = 0.8
    eta_conv: float = 0.94
    # Full battery: curtail the surplus PV (smoothing still met) rather than
    # count the step as a failure.
    curtail_when_full: bool = True

    def __post_init__(self):
        if self.e_nom < 0:
            raise ValueError("e_nom must be non-negative")
        if not 0.0 <= self.soc_min < self.soc_init <= self.soc_max <= 1.0:
            raise ValueError(
                f"need 0 <= soc_min < soc_init <= soc_max <= 1, got "
                f"{self.soc_min}, {self.soc_init}, {self.soc_max}"
            )
        if not 0.0 < self.eta_conv <= 1.0:
            raise ValueError(f"eta_conv={self.eta_conv} must lie in (0, 1]")

    @property
    def dod(self) -> float:
        return 1.0 - self.soc_min

    def with_capacity(self, e_nom: float) -> "BatteryConfig":
        return replace(self, e_nom=e_nom)

    def with_dod(self, dod: float) -> "BatteryConfig":
        return replace(self, soc_min=1.0 - dod)


@dataclass(frozen=True)
class BatteryState:
    q1: float  # available charge, kWh
    q2: float  # bound charge, kWh

    @property
    def total(self) -> float:
        return self.q1 + self.q2


class StepResult(NamedTuple):
    state: BatteryState
    p_delivered: float  # W at the ac terminals
    clipped: bool
    limit: int  # CLIP_NONE / CLIP_EMPTY / CLIP_FULL


def soc(state: BatteryState, cfg: BatteryConfig) -> float:
    return (state.q1 + state.q2) / cfg.e_nom


def fresh_state(cfg: BatteryConfig) -> BatteryState:
    """Morning state: ``soc_init`` of capacity, split at equilibrium."""
    total = cfg.soc_init * cfg.e_nom
    q1 = cfg.constants.k2 * total
    return BatteryState(q1, total - q1)


# --------------------------------------------------------------------------
# closed-form update

@njit(cache=True, nogil=True)
def kibam_update(q1, q2, current, dt, k, c):
    """Exact KiBaM state after ``dt`` hours at constant ``current`` (kW here)."""
    r = math.exp(-k * dt)
    q0 = q1 + q2
    lag = k * dt - 1.0 + r
    q1n = q1 * r + ((q0 * k * c - current) * (1.0 - r) - current * c * lag) / k
    q2n = q2 * r + q0 * (1.0 - c) * (1.0 - r) - current * (1.0 - c) * lag / k
    return q1n, q2n


@njit(cache=True, nogil=True)
def _step(q1, q2, p_ac_w, dt, k, c, e_nom, soc_min, soc_max, eta):
    if p_ac_w > 0.0:
        current = p_ac_w / eta / 1000.0
    else:
        current = p_ac_w * eta / 1000.0
    r = math.exp(-k * dt)
    q0 = q1 + q2
    limit = CLIP_NONE
    if current > 0.0:
        # q1 after the step is affine in the current: a - current * b
        a = q1 * r + q0 * c * (1.0 - r)
        b = ((1.0 - r) + c * (k * dt - 1.0 + r)) / k
        i_avail = a / b
        i_soc = (q0 - soc_min * e_nom) / dt
        if current > i_avail:
            current = max(i_avail, 0.0)
            limit = CLIP_EMPTY
        if current >= i_soc:
            current = max(i_soc, 0.0)
            limit = CLIP_EMPTY
    elif current < 0.0:
        i_full = -(soc_max * e_nom - q0) / dt
        if current < i_full:
            current = min(i_full, 0.0)
            limit = CLIP_FULL
    q1n, q2n = kibam_update(q1, q2, current, dt, k, c)
    if q1n < 0.0:
        q1n = 0.0  # roundoff at the empty limit
    if current > 0.0:
        delivered = current * eta * 1000.0
    else:
        delivered = current / eta * 1000.0
    return q1n, q2n, delivered, limit


def step(state: BatteryState, p_request: float, dt: float, cfg: BatteryConfig) -> StepResult:
    """Advance one step of ``dt`` hours under an ac power request [W].

    The converter divides the request by ``eta_conv`` when discharging and
    multiplies by it when charging. A request that would empty the available
    well, reach ``soc_min`` or exceed ``soc_max`` is cut back to the binding
    limit and reported as clipped.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    kc = cfg.constants
    q1, q2, delivered, limit = _step(
        state.q1, state.q2, float(p_request), dt, kc.k1, kc.k2,
        cfg.e_nom, cfg.soc_min, cfg.soc_max, cfg.eta_conv,
    )
    return StepResult(BatteryState(q1, q2), delivered, limit != CLIP_NONE, limit)


@njit(cache=True, nogil=True)
def _simulate(p_sb_w, dt, k, c, e_nom, soc_min, soc_max, eta, q1, q2,
              curtail_when_full, stop_on_failure, soc_out, delivered_out):
    """Run the battery through a request series.

    Returns (feasible, min_soc, max_soc, any_clip, q1, q2). A full-battery
    clip only breaks feasibility when ``curtail_when_full`` is false.
    """
    feasible = True
    any_clip = False
    s = (q1 + q2) / e_nom
    lo = s
    hi = s
    for t in range(p_sb_w.shape[0]):
        q1, q2, delivered, limit = _step(q1, q2, p_sb_w[t], dt, k, c, e_nom, soc_min, soc_max, eta)
        s = (q1 + q2) / e_nom
        soc_out[t] = s
        delivered_out[t] = delivered
        lo = min(lo, s)
        hi = max(hi, s)
        if limit != CLIP_NONE:
            any_clip = True
            if limit == CLIP_EMPTY or not curtail_when_full:
                feasible = False
        if not (s > soc_min):
            feasible = False
        if not feasible and stop_on_failure:
            break
    return feasible, lo, hi, any_clip, q1, q2


class Trajectory(NamedTuple):
    feasible: bool
    min_soc: float
    max_soc: float
    any_clip: bool
    soc: np.ndarray
    p_delivered: np.ndarray
    final_state: BatteryState


def simulate(
    p_sb, dt: float, cfg: BatteryConfig, state: BatteryState | None = None,
    *, stop_on_failure: bool = False,
) -> Trajectory:
    """Step the battery through ``p_sb`` [W]; starts from ``fresh_state`` by default."""
    p = np.ascontiguousarray(p_sb, dtype=float)
    if state is None:
        state = fresh_state(cfg)
    soc_out = np.full(p.shape, np.nan)
    delivered = np.full(p.shape, np.nan)
    kc = cfg.constants
    feasible, lo, hi, any_clip, q1, q2 = _simulate(
        p, float(dt), kc.k1, kc.k2, cfg.e_nom, cfg.soc_min, cfg.soc_max, cfg.eta_conv,
        state.q1, state.q2, cfg.curtail_when_full, stop_on_failure, soc_out, delivered,
    )
    return Trajectory(feasible, lo, hi, any_clip, soc_out, delivered, BatteryState(q1, q2))


# --------------------------------------------------------------------------
# parameter fitting

def capacity_at_time(t, k, c, q_max):
    """Charge delivered at the constant current that empties q1 in ``t`` hours."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-k * t)
    return q_max * k * c * t / (1.0 - e + c * (k * t - 1.0 + e))


def _profile_qmax(t, y, k, c):
    f = capacity_at_time(t, k, c, 1.0)
    q_max = float(np.dot(f, y) / np.dot(f, f))
    resid = q_max * f - y
    return q_max, float(np.dot(resid, resid))


def fit_kibam(curve: Sequence[tuple[float, float]]) -> KibamConstants:
    """Fit (k1, k2, q_max) to constant-current discharge points (hours, amps).

    A coarse (k, c) grid with q_max solved in closed form at each node seeds
    a bounded least-squares refinement of all three.
    """
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise FitError("need at least 3 (hours, amps) points")
    t, amps = pts[:, 0], pts[:, 1]
    if np.any(t <= 0) or np.any(amps <= 0):
        raise FitError("discharge times and currents must be positive")
    order = np.argsort(t)
    t, amps = t[order], amps[order]
    y = amps * t
    if np.ptp(t) == 0 or np.any(np.diff(t) == 0):
        raise FitError("degenerate curve: repeated discharge times")
    if np.any(np.diff(y) <= 0):
        raise FitError("delivered capacity must increase with discharge time")

    best = (np.inf, None)
    for k in np.logspace(-3, 2, 161):
        for c in np.linspace(0.01, 0.99, 99):
            q_max, sse = _profile_qmax(t, y, k, c)
            if sse < best[0]:
                best = (sse, (k, c, q_max))
    k0, c0, q0 = best[1]

    def resid(x):
        k, c, q_max = x
        return (capacity_at_time(t, k, c, q_max) - y) / y.max()

    sol = least_squares(
        resid, x0=[k0, c0, q0],
        bounds=([1e-6, 1e-6, 1e-9], [1e3, 1.0 - 1e-6, np.inf]),
        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=5000,
    )
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitError(f"refinement did not converge: {sol.message}")
    k, c, q_max = (float(v) for v in sol.x)
    return KibamConstants(k, c, q_max)
