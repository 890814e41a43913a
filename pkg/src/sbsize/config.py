"""Run configuration: ``key = value`` file (TOML-like subset) merged with CLI flags."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .battery import DEFAULT_CONSTANTS, BatteryConfig, KibamConstants
from .pv import PvParams
from .sizing import DEFAULT_TOL, DEFAULT_UPPER
from .smoothing import MA, PREVIOUS_SMOOTHED, RR, SmootherSpec


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    site: Path | None = None
    irradiance: Path | None = None
    temperature: Path | None = None
    spec: SmootherSpec = field(default_factory=SmootherSpec)
    battery: BatteryConfig = field(default_factory=BatteryConfig)
    pv: PvParams = field(default_factory=PvParams)
    pone: float = 0.95
    tol: float = DEFAULT_TOL
    upper: float = DEFAULT_UPPER
    output: Path = Path(".")
    jobs: int = 1


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` pairs. ``[section]`` headers and ``#`` comments are skipped."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            values[key.strip().replace("-", "_")] = _unquote(value)
    return values


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


FLOAT_KEYS = {
    "rr_limit", "dod", "soc_init", "soc_max", "eta_conv", "k1", "k2", "q_max_ref", "pone", "tol", "upper",
    "p_nom", "k_e", "k_m", "k_pt", "eta_inv",
}
INT_KEYS = {"ma_window", "jobs"}
PATH_KEYS = {"site", "irradiance", "temperature", "output"}
STR_KEYS = {"method", "rr_reference"}
BOOL_KEYS = {"curtail_when_full"}
KNOWN = FLOAT_KEYS | INT_KEYS | PATH_KEYS | STR_KEYS | BOOL_KEYS


def build_config(values: dict) -> RunConfig:
    """Turn a flat mapping (file values overlaid with flags) into a validated RunConfig."""
    unknown = set(values) - KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        v = {}
        for key, raw in values.items():
            if raw is None:
                continue
            if key in FLOAT_KEYS:
                v[key] = float(raw)
            elif key in INT_KEYS:
                v[key] = int(raw)
            elif key in PATH_KEYS:
                v[key] = Path(raw)
            elif key in BOOL_KEYS:
                v[key] = raw if isinstance(raw, bool) else _bool(raw)
            else:
                v[key] = str(raw)

        method = v.get("method", "ma").upper()
        if method not in (MA, RR):
            raise ConfigError(f"method must be ma or rr, got {v['method']!r}")
        spec = SmootherSpec(
            kind=method,
            ma_window=v.get("ma_window", 10),
            rr_limit=v.get("rr_limit", 0.05),
            rr_reference=v.get("rr_reference", PREVIOUS_SMOOTHED),
        )
        constants = DEFAULT_CONSTANTS
        if {"k1", "k2", "q_max_ref"} & v.keys():
            constants = KibamConstants(v.get("k1", constants.k1), v.get("k2", constants.k2),
                                       v.get("q_max_ref", constants.q_max_ref))
        base = BatteryConfig()
        battery = replace(
            base,
            constants=constants,
            soc_min=1.0 - v.get("dod", base.dod),
            soc_max=v.get("soc_max", base.soc_max),
            soc_init=v.get("soc_init", base.soc_init),
            eta_conv=v.get("eta_conv", base.eta_conv),
            curtail_when_full=v.get("curtail_when_full", base.curtail_when_full),
        )
        pv_base = PvParams()
        pv = PvParams(**{k: v.get(k, getattr(pv_base, k)) for k in ("p_nom", "k_e", "k_m", "k_pt", "eta_inv")})
        cfg = RunConfig(
            site=v.get("site"), irradiance=v.get("irradiance"), temperature=v.get("temperature"),
            spec=spec, battery=battery, pv=pv,
            pone=v.get("pone", 0.95), tol=v.get("tol", DEFAULT_TOL), upper=v.get("upper", DEFAULT_UPPER),
            output=v.get("output", Path(".")), jobs=v.get("jobs", 1),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not 0.0 < cfg.pone <= 1.0:
        raise ConfigError(f"pone {cfg.pone} must lie in (0, 1]")
    if cfg.tol <= 0 or cfg.upper <= cfg.tol:
        raise ConfigError("need 0 < tol < upper")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg
