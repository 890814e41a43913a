"""Smoothing-battery sizing for PV-diesel microgrids from 1-minute irradiance."""
from .battery import BatteryConfig, BatteryState, KibamConstants, fit_kibam, fresh_state, soc, step
from .data_io import IrradianceDay, SiteMeta, TemperatureDay, load_irradiance, load_temperature, synthesize_day
from .empirical import EmpiricalCdf, RegressionModel, estimate_sboc, fit_regression, pearson, pone_quantile
from .pv import PvParams, pv_day, pv_power
from .smoothing import SmootherSpec, ma_smooth, rr_smooth
from .solar import clear_sky, sivi

__version__ = "0.1.0"
