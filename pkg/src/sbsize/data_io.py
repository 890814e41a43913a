"""
Irradiance, temperature and site ingestion.

On-disk formats
---------------
Irradiance CSV   header ``timestamp,ghi_wm2``; timestamp ``YYYY-MM-DDTHH:MM`` in
                 site-local standard time (no DST); one row per minute.
Temperature CSV  header ``date,tmax_c``.
Site file        ``key=value`` lines: site_id, name, latitude, longitude,
                 utc_offset.

Gap policy: runs of up to ``MAX_GAP_MINUTES`` missing minutes are linearly
interpolated and flagged in ``gap_mask``; a day with a longer run is dropped
and listed in the exclusion report.
"""
from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import solar

log = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440
MAX_GAP_MINUTES = 30
GHI_CEILING = 1600.0
TMAX_BOUNDS = (-60.0, 60.0)

IRRADIANCE_HEADER = ("timestamp", "ghi_wm2")
TEMPERATURE_HEADER = ("date", "tmax_c")
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M"


class DataError(ValueError):
    """Malformed or out-of-range input data."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class SiteMeta:
    site_id: str
    name: str
    latitude: float
    longitude: float
    utc_offset: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DataError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise DataError(f"longitude {self.longitude} outside [-180, 180]")
        if not -14.0 <= self.utc_offset <= 14.0:
            raise DataError(f"utc_offset {self.utc_offset} outside [-14, 14]")


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IrradianceDay:
    """One day of 1-minute GHI [W/m^2]; ``gap_mask`` marks imputed minutes."""

    date: dt.date
    samples: np.ndarray
    gap_mask: np.ndarray = None

    def __post_init__(self):
        ghi = _frozen(self.samples, float)
        mask = np.zeros(ghi.shape, bool) if self.gap_mask is None else self.gap_mask
        mask = _frozen(mask, bool)
        if ghi.shape != (MINUTES_PER_DAY,) or mask.shape != ghi.shape:
            raise DataError(f"{self.date}: expected {MINUTES_PER_DAY} samples, got {ghi.shape}")
        if not np.all(np.isfinite(ghi)):
            raise DataError(f"{self.date}: non-finite GHI")
        if ghi.min() < 0.0 or ghi.max() > GHI_CEILING:
            raise DataError(f"{self.date}: GHI outside [0, {GHI_CEILING}] W/m2")
        object.__setattr__(self, "samples", ghi)
        object.__setattr__(self, "gap_mask", mask)


@dataclass(frozen=True)
class TemperatureDay:
    date: dt.date
    t_max: float
    filled: bool = False

    def __post_init__(self):
        lo, hi = TMAX_BOUNDS
        if not lo <= self.t_max <= hi:
            raise DataError(f"{self.date}: t_max {self.t_max} outside [{lo}, {hi}] degC")


@dataclass
class IrradianceLoad:
    """Result of :func:`load_irradiance`: accepted days plus the exclusion report."""

    days: list[IrradianceDay]
    excluded: list[tuple[dt.date, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.days)

    def __len__(self):
        return len(self.days)


# --------------------------------------------------------------------------
# site files

def load_site(path: str | Path) -> SiteMeta:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError("expected key=value", path, lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
    missing = {"site_id", "name", "latitude", "longitude", "utc_offset"} - values.keys()
    if missing:
        raise DataError(f"missing keys: {', '.join(sorted(missing))}", path)
    try:
        return SiteMeta(
            site_id=values["site_id"],
            name=values["name"],
            latitude=float(values["latitude"]),
            longitude=float(values["longitude"]),
            utc_offset=float(values["utc_offset"]),
        )
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise DataError(str(exc), path) from None
        raise DataError(f"bad numeric value ({exc})", path) from None


def write_site(site: SiteMeta, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in ("site_id", "name", "latitude", "longitude", "utc_offset"):
            fh.write(f"{key}={getattr(site, key)}\n")


# Bureau of Meteorology stations used for the 2017 one-minute dataset.
SITES = {
    "1": SiteMeta("1", "Adelaide", -34.9285, 138.6007, 9.5),
    "2": SiteMeta("2", "Alice Springs", -23.6980, 133.8807, 9.5),
    "3": SiteMeta("3", "Rockhampton", -23.3791, 150.5100, 10.0),
    "4": SiteMeta("4", "Cape Grim", -40.6833, 144.6833, 10.0),
    "5": SiteMeta("5", "Kalgoorlie", -30.7490, 121.4660, 8.0),
    "6": SiteMeta("6", "Darwin", -12.4634, 130.8456, 9.5),
    "7": SiteMeta("7", "Broome", -17.9614, 122.2359, 8.0),
    "8": SiteMeta("8", "Learmonth", -22.2312, 114.0888, 8.0),
    "9": SiteMeta("9", "Geraldton", -28.7774, 114.6150, 8.0),
    "10": SiteMeta("10", "Wagga", -35.1082, 147.3598, 10.0),
    "11": SiteMeta("11", "Townsville", -19.2590, 146.8169, 10.0),
}


# --------------------------------------------------------------------------
# irradiance

def format_ghi(value: float) -> str:
    """Canonical number format: at most two decimals, trailing zeros dropped."""
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def _interpolate_gaps(values: np.ndarray, missing: np.ndarray) -> np.ndarray:
    idx = np.arange(values.size)
    present = ~missing
    # np.interp holds the edge value constant outside the known range
    filled = values.copy()
    filled[missing] = np.interp(idx[missing], idx[present], values[present])
    return filled


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for m in mask:
        run = run + 1 if m else 0
        best = max(best, run)
    return best


def _parse_stamp(text: str) -> dt.datetime | None:
    # fixed YYYY-MM-DDTHH:MM layout; fromisoformat is far quicker than strptime
    if len(text) != 16 or text[10] != "T":
        return None
    try:
        return dt.datetime.fromisoformat(text)
    except ValueError:
        return None


def load_irradiance(path: str | Path, site: SiteMeta | None = None) -> IrradianceLoad:
    """Read a canonical irradiance CSV into per-day 1440-sample series.

    Empty GHI fields count as missing minutes. Small negative readings (sensor
    night-time offset) are clamped to zero.
    """
    per_day: dict[dt.date, tuple[np.ndarray, np.ndarray]] = {}
    previous: dt.datetime | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != IRRADIANCE_HEADER:
            raise DataError(f"header must be {','.join(IRRADIANCE_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"expected 2 fields, got {len(row)}", path, lineno)
            stamp = _parse_stamp(row[0].strip())
            if stamp is None:
                raise DataError(f"bad timestamp {row[0]!r}", path, lineno)
            if previous is not None:
                if stamp == previous:
                    raise DataError(f"duplicate timestamp {row[0]}", path, lineno)
                if stamp < previous:
                    raise DataError(f"non-monotonic timestamp {row[0]}", path, lineno)
            previous = stamp
            text = row[1].strip()
            if text == "":
                continue
            try:
                ghi = float(text)
            except ValueError:
                raise DataError(f"bad GHI value {text!r}", path, lineno) from None
            if not math.isfinite(ghi) or ghi > GHI_CEILING:
                raise DataError(f"GHI {text} outside [0, {GHI_CEILING}]", path, lineno)
            if ghi < 0.0:
                ghi = 0.0
            day = stamp.date()
            if day not in per_day:
                per_day[day] = (np.zeros(MINUTES_PER_DAY), np.ones(MINUTES_PER_DAY, bool))
            values, missing = per_day[day]
            minute = stamp.hour * 60 + stamp.minute
            values[minute] = ghi
            missing[minute] = False

    result = IrradianceLoad(days=[])
    for day in sorted(per_day):
        values, missing = per_day[day]
        gap = _longest_run(missing)
        if gap > MAX_GAP_MINUTES:
            reason = f"gap of {gap} min exceeds {MAX_GAP_MINUTES} min"
            result.excluded.append((day, reason))
            log.warning("excluding %s: %s", day, reason)
            continue
        if missing.any():
            values = _interpolate_gaps(values, missing)
        result.days.append(IrradianceDay(day, values, missing))
    return result


_CLOCK = tuple(f"{m // 60:02d}:{m % 60:02d}" for m in range(MINUTES_PER_DAY))


def write_canonical(days: Iterable[IrradianceDay], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(IRRADIANCE_HEADER) + "\n")
        for day in days:
            prefix = day.date.isoformat()
            fh.writelines(
                f"{prefix}T{clock},{format_ghi(ghi)}\n" for clock, ghi in zip(_CLOCK, day.samples)
            )


def bom_to_canonical(src: str | Path, dest: str | Path) -> None:
    """Convert a Bureau of Meteorology one-minute solar file to canonical CSV.

    Not implemented: the BoM portal layout varies by product and is not
    bundled here. Export local-standard-time ``timestamp,ghi_wm2`` rows instead.
    """
    raise NotImplementedError("BoM conversion requires the portal's product layout")


# --------------------------------------------------------------------------
# temperature

def load_temperature(path: str | Path) -> list[TemperatureDay]:
    """Read daily maximum temperatures; interior missing dates repeat the prior value."""
    records: dict[dt.date, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TEMPERATURE_HEADER:
            raise DataError(f"header must be {','.join(TEMPERATURE_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"expected 2 fields, got {len(row)}", path, lineno)
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataError(f"bad date {row[0]!r}", path, lineno) from None
            try:
                t_max = float(row[1])
            except ValueError:
                raise DataError(f"bad temperature {row[1]!r}", path, lineno) from None
            lo, hi = TMAX_BOUNDS
            if not lo <= t_max <= hi:
                raise DataError(f"t_max {t_max} outside [{lo}, {hi}] degC", path, lineno)
            if day in records:
                raise DataError(f"duplicate date {day}", path, lineno)
            records[day] = t_max

    out: list[TemperatureDay] = []
    if not records:
        return out
    first, last = min(records), max(records)
    day, prior = first, records[first]
    while day <= last:
        if day in records:
            prior = records[day]
            out.append(TemperatureDay(day, prior))
        else:
            log.warning("temperature missing for %s, using prior day's %.1f", day, prior)
            out.append(TemperatureDay(day, prior, filled=True))
        day += dt.timedelta(days=1)
    return out


def write_temperature(days: Iterable[TemperatureDay], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(TEMPERATURE_HEADER) + "\n")
        for t in days:
            fh.write(f"{t.date.isoformat()},{t.t_max:.1f}\n")


# --------------------------------------------------------------------------
# synthetic fixtures

PROFILES = ("clear", "mixed", "overcast", "square_wave")


def _cloud_index(clear: np.ndarray, rng: np.random.Generator, n_events: int) -> np.ndarray:
    """Multiplicative clear-sky index with cloud passages and edge enhancement."""
    kt = np.ones(MINUTES_PER_DAY)
    lit = np.flatnonzero(clear > 0)
    if lit.size == 0 or n_events == 0:
        return kt
    # convective build-up: onsets follow the sun and ramp in from late morning
    minutes = np.arange(MINUTES_PER_DAY)
    noon = int(np.argmax(clear))
    weights = clear * 0.5 * (1.0 + np.tanh((minutes - noon + 60) / 60.0))
    weights /= weights.sum()
    for _ in range(n_events):
        start = int(rng.choice(MINUTES_PER_DAY, p=weights))
        length = int(np.clip(rng.lognormal(np.log(6.0), 0.8), 1, 90))
        depth = rng.uniform(0.15, 0.75)
        kt[start:start + length] = np.minimum(kt[start:start + length], depth)
        # bright cloud edge just after the passage
        if rng.random() < 0.5:
            end = start + length
            edge = int(rng.integers(1, 4))
            seg = slice(end, end + edge)
            kt[seg] = np.maximum(kt[seg], rng.uniform(1.02, 1.2))
    return kt


def synthesize_day(
    profile: str,
    seed: int,
    site: SiteMeta,
    date: dt.date,
    *,
    period: int = 60,
    n_events: int | None = None,
) -> IrradianceDay:
    """Deterministic test day built on the site's clear-sky profile.

    ``square_wave`` alternates clear-sky and 20 % of clear-sky every
    ``period / 2`` minutes. ``mixed`` draws ``n_events`` cloud passages (or a
    seeded count when omitted).
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")
    cs = solar.clear_sky(site, date)
    if profile == "clear":
        ghi = cs.copy()
    elif profile == "overcast":
        ghi = 0.25 * cs
    elif profile == "square_wave":
        if period < 2:
            raise ValueError("square_wave period must be >= 2 minutes")
        low = (np.arange(MINUTES_PER_DAY) // (period // 2)) % 2 == 1
        ghi = np.where(low, 0.2 * cs, cs)
    else:
        rng = np.random.default_rng([seed, date.toordinal()])
        if n_events is None:
            n_events = int(rng.integers(2, 80))
        ghi = cs * _cloud_index(cs, rng, n_events)
    return IrradianceDay(date, np.clip(ghi, 0.0, GHI_CEILING))


def synth_year(
    site: SiteMeta, year: int = 2017, seed: int = 0
) -> tuple[list[IrradianceDay], list[TemperatureDay]]:
    """A full synthetic year: ~30 % clear, ~10 % overcast, the rest mixed skies."""
    rng = np.random.default_rng(seed)
    days, temps = [], []
    day = dt.date(year, 1, 1)
    while day.year == year:
        draw = rng.random()
        day_seed = int(rng.integers(2**31))
        if draw < 0.30:
            ghi = synthesize_day("clear", day_seed, site, day)
        elif draw < 0.40:
            ghi = synthesize_day("overcast", day_seed, site, day)
        else:
            ghi = synthesize_day("mixed", day_seed, site, day)
        days.append(ghi)
        # southern-hemisphere seasonal maximum temperature
        doy = day.timetuple().tm_yday
        t_max = 24.0 + 8.0 * np.cos(2 * np.pi * (doy - 15) / 365.0) + rng.normal(0.0, 2.0)
        temps.append(TemperatureDay(day, round(float(t_max), 1)))
        day += dt.timedelta(days=1)
    return days, temps


def temperature_lookup(temps: Sequence[TemperatureDay]) -> dict[dt.date, TemperatureDay]:
    return {t.date: t for t in temps}
