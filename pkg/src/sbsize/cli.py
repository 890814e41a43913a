"""
Command-line interface.

Subcommands: synth, sivi, size, estimate, compare, sensitivity, fit-battery.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import data_io, empirical, plotting, sizing, solar
from .battery import DISCHARGE_TABLE, FitError, fit_kibam
from .config import ConfigError, RunConfig, build_config, read_config
from .smoothing import smooth

log = logging.getLogger("sbsize")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


# --------------------------------------------------------------------------
# argument plumbing

def _add_data_args(p, temperature=True):
    p.add_argument("--config", type=Path, help="key = value run configuration file")
    p.add_argument("--site", help="site file (key=value)")
    p.add_argument("--site-id", choices=sorted(data_io.SITES, key=int), help="bundled site")
    p.add_argument("--irradiance", help="irradiance CSV (timestamp,ghi_wm2)")
    if temperature:
        p.add_argument("--temperature", help="temperature CSV (date,tmax_c)")
    p.add_argument("--out", dest="output", help="output directory")
    p.add_argument("--jobs", type=int, help="worker threads for per-day work")
    p.add_argument("--plot", action="store_true", help="also write SVG figures")


def _add_model_args(p):
    p.add_argument("--method", choices=["ma", "rr"])
    p.add_argument("--ma-window", type=int, help="moving-average window [min]")
    p.add_argument("--rr-limit", type=float, help="ramp limit, fraction of p_nom per minute")
    p.add_argument("--rr-reference", choices=["previous_smoothed", "previous_raw"])
    p.add_argument("--dod", type=float, help="maximum depth of discharge")
    p.add_argument("--soc-init", type=float)
    p.add_argument("--soc-max", type=float)
    p.add_argument("--eta-conv", type=float)
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--p-nom", type=float)
    p.add_argument("--pone", type=float, help="probability of non-exceedance, e.g. 0.95")
    p.add_argument("--tol", type=float)
    p.add_argument("--upper", type=float)
    p.add_argument("--strict-full", action="store_true",
                   help="count a full battery as a failure instead of curtailing PV")


MODEL_KEYS = ("method", "ma_window", "rr_limit", "rr_reference", "dod", "soc_init", "soc_max",
              "eta_conv", "k1", "k2", "p_nom", "pone", "tol", "upper")
DATA_KEYS = ("irradiance", "temperature", "output", "jobs")


def _resolve(args) -> tuple[RunConfig, data_io.SiteMeta | None]:
    values: dict = read_config(args.config) if getattr(args, "config", None) else {}
    for key in MODEL_KEYS + DATA_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    if getattr(args, "strict_full", False):
        values["curtail_when_full"] = False

    method = values.get("method")
    has_ma = getattr(args, "ma_window", None) is not None
    has_rr = getattr(args, "rr_limit", None) is not None
    if has_ma and has_rr:
        raise UsageError("--ma-window and --rr-limit are mutually exclusive")
    if method == "ma" and has_rr:
        raise UsageError("--rr-limit given with --method ma")
    if method == "rr" and has_ma:
        raise UsageError("--ma-window given with --method rr")
    if method is None and (has_ma or has_rr):
        values["method"] = "rr" if has_rr else "ma"

    site = None
    site_file = getattr(args, "site", None) or values.pop("site", None)
    if getattr(args, "site_id", None):
        site = data_io.SITES[args.site_id]
    elif site_file:
        site = data_io.load_site(site_file)
    try:
        cfg = build_config(values)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    return cfg, site


def _load_days(cfg: RunConfig, site):
    if site is None:
        raise UsageError("a site is required (--site or --site-id)")
    if cfg.irradiance is None:
        raise UsageError("--irradiance is required")
    loaded = data_io.load_irradiance(cfg.irradiance, site)
    for day, reason in loaded.excluded:
        print(f"excluded {day}: {reason}", file=sys.stderr)
    return loaded


def _dataset(cfg: RunConfig, site) -> sizing.Dataset:
    loaded = _load_days(cfg, site)
    if cfg.temperature is None:
        raise UsageError("--temperature is required")
    temps = data_io.load_temperature(cfg.temperature)
    ds = sizing.build_dataset(loaded.days, temps, site, cfg.pv)
    if not ds.days:
        raise data_io.DataError("no usable days in dataset")
    return ds


def _coeffs(args):
    inline = [args.alpha, args.beta, args.sigma]
    if args.coeffs_file and any(v is not None for v in inline):
        raise UsageError("--coeffs-file and --alpha/--beta/--sigma are mutually exclusive")
    if args.coeffs_file:
        return empirical.load_model(args.coeffs_file)
    if all(v is None for v in inline):
        return None
    if any(v is None for v in inline):
        raise UsageError("--alpha, --beta and --sigma must be given together")
    return empirical.RegressionModel(args.alpha, args.beta, args.sigma, 2)


# --------------------------------------------------------------------------
# commands

def cmd_synth(args) -> int:
    site = data_io.SITES[args.site_id] if not args.site else data_io.load_site(args.site)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.profile == "year":
        days, temps = data_io.synth_year(site, args.year, args.seed)
    else:
        days, temps = [], []
        for i in range(args.days or 1):
            day = dt.date(args.year, 1, 1) + dt.timedelta(days=i)
            days.append(data_io.synthesize_day(args.profile, args.seed, site, day, period=args.period))
            temps.append(data_io.TemperatureDay(day, 25.0))
    if args.days:
        days, temps = days[: args.days], temps[: args.days]
    data_io.write_site(site, out / "site.txt")
    data_io.write_canonical(days, out / "irradiance.csv")
    data_io.write_temperature(temps, out / "temperature.csv")
    print(f"wrote {len(days)} days to {out}")
    return EXIT_OK


def cmd_sivi(args) -> int:
    cfg, site = _resolve(args)
    loaded = _load_days(cfg, site)
    rows = []
    for day in loaded.days:
        res = solar.sivi(day, solar.clear_sky(site, day.date))
        rows.append((day.date.isoformat(), _num(res.sivi)))
    path = _write_csv(cfg.output / "sivi.csv", ("date", "sivi"), rows)
    if args.plot and rows:
        plotting.plot_sivi_cdf([float(r[1]) for r in rows], cfg.output / "sivi_cdf.svg", site.name)
    print(f"{len(rows)} days -> {path}")
    return EXIT_OK


def cmd_size(args) -> int:
    cfg, site = _resolve(args)
    ds = _dataset(cfg, site)
    rep = sizing.size_year(ds, cfg.spec, cfg.battery, cfg.pone, tol=cfg.tol, upper=cfg.upper, jobs=cfg.jobs)
    out = cfg.output
    _write_csv(out / "scatter.csv", ("date", "sivi", "sboc_kwh_per_kwp"),
               [(r.date.isoformat(), _num(r.sivi), _num(r.sboc)) for r in rep.per_day])
    _write_csv(out / "cdf.csv", ("sboc", "cdf"),
               [(_num(v), _num(p)) for v, p in zip(rep.cdf.values, rep.cdf.probabilities)])
    summary = {
        "method": cfg.spec.label(),
        "days": len(rep.per_day),
        "pone": cfg.pone,
        "sboc": rep.sboc,
    }
    for lvl, val in sorted(rep.sboc_at_pone.items()):
        summary[f"sboc_p{lvl * 100:g}"] = val
    summary["mean_sboc"] = sum(r.sboc for r in rep.per_day) / len(rep.per_day)
    summary["pearson_r"] = rep.pearson_r
    summary["days_infeasible_at_upper"] = sum(not r.feasible_at_cap for r in rep.per_day)
    if rep.regression is not None:
        summary.update(alpha=rep.regression.alpha, beta=rep.regression.beta, sigma=rep.regression.sigma)
        empirical.save_model(rep.regression, out / "regression.txt")
    with open(out / "summary.txt", "w", encoding="utf-8", newline="\n") as fh:
        for key, val in summary.items():
            fh.write(f"{key}={val!r}\n" if isinstance(val, float) else f"{key}={val}\n")
    if args.plot:
        plotting.plot_sizing(rep, out / "sizing.svg", f"{site.name}, {cfg.spec.label()}")
        worst = max(ds.days, key=lambda d: d.sivi)
        sm = smooth(worst.p_pv, cfg.spec, ds.p_nom)
        from .battery import simulate
        traj = simulate(sm.p_sb, ds.dt, cfg.battery.with_capacity(rep.sboc * ds.kwp))
        plotting.plot_day(worst.p_pv, sm.p_target, traj.soc, out / f"day_{worst.date}.svg",
                          f"{worst.date} (SIVI {worst.sivi:.1f}) at {rep.sboc:.3f} kWh/kWp")
    print(f"SBOC P{cfg.pone * 100:g} = {rep.sboc:.4f} kWh/kWp, r = {rep.pearson_r:.4f}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    model = _coeffs(args)
    if model is None:
        raise UsageError("give --coeffs-file or --alpha/--beta/--sigma")
    if args.sivi < 0:
        raise UsageError("--sivi must be non-negative")
    print(f"{empirical.estimate_sboc(model, args.sivi):.6g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg, site = _resolve(args)
    model = _coeffs(args)
    ds = _dataset(cfg, site)
    rows = empirical.compare_methods(ds, cfg.spec, cfg.battery, cfg.pone, model,
                                     tol=cfg.tol, upper=cfg.upper, jobs=cfg.jobs)
    path = _write_csv(cfg.output / "compare.csv", ("method", "sboc_kwh_per_kwp", "coverage_pct"),
                      [(r.method, _num(r.sboc), _num(100.0 * r.coverage)) for r in rows])
    for r in rows:
        print(f"{r.method:24s} {r.sboc:10.4f} kWh/kWp {100 * r.coverage:6.1f} %")
    print(f"-> {path}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg, site = _resolve(args)
    if args.axis not in sizing.SWEEP_AXES:
        raise UsageError(f"unknown axis {args.axis!r}; choose from {', '.join(sizing.SWEEP_AXES)}")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --values {args.values!r}") from None
    if not values:
        raise UsageError("--values is empty")
    ds = _dataset(cfg, site)
    try:
        reports = sizing.sweep_reports(ds, args.axis, values, cfg.spec, cfg.battery, cfg.pone,
                                       tol=cfg.tol, upper=cfg.upper, jobs=cfg.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = sizing.summarize_sweep(args.axis, reports)
    path = _write_csv(cfg.output / "sensitivity.csv",
                      ("axis", "value", "mean_sboc", "sigma", "pearson_r", "sboc_at_pone"),
                      [(r.axis, _num(r.value), _num(r.mean_sboc), _num(r.sigma), _num(r.pearson_r),
                        _num(r.sboc_at_pone)) for r in rows])
    if args.plot:
        pts = [([d.sivi for d in rep.per_day], [d.sboc for d in rep.per_day]) for _, rep in reports]
        plotting.plot_sensitivity(rows, pts, cfg.output / f"sensitivity_{args.axis}.svg")
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def _read_curve(path) -> list[tuple[float, float]]:
    pts = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["hours", "amps"]:
            raise data_io.DataError("header must be hours,amps", path, 1)
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                pts.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                raise data_io.DataError(f"bad row {row!r}", path, lineno) from None
    return pts


def cmd_fit_battery(args) -> int:
    curve = list(DISCHARGE_TABLE) if args.curve is None else _read_curve(args.curve)
    try:
        c = fit_kibam(curve)
    except FitError as exc:
        raise NumericalError(str(exc)) from None
    text = f"k1={c.k1!r}\nk2={c.k2!r}\nq_max_ref={c.q_max_ref!r}\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbsize", description="Smoothing-battery sizing from 1-minute irradiance.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write synthetic site/irradiance/temperature files")
    p.add_argument("--site", help="site file; default is a bundled site")
    p.add_argument("--site-id", default="1", choices=sorted(data_io.SITES, key=int))
    p.add_argument("--profile", default="year", choices=("year",) + data_io.PROFILES)
    p.add_argument("--year", type=int, default=2017)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, help="number of days (default: whole year / one day)")
    p.add_argument("--period", type=int, default=60, help="square_wave period [min]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sivi", help="daily variability index")
    _add_data_args(p, temperature=False)
    p.set_defaults(func=cmd_sivi)

    p = sub.add_parser("size", help="per-day optimisation and yearly SBOC")
    _add_data_args(p)
    _add_model_args(p)
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("estimate", help="regression estimate of SBOC from a SIVI value")
    p.add_argument("--sivi", type=float, required=True)
    p.add_argument("--coeffs-file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="compare sizing methods and their coverage")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--coeffs-file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sensitivity", help="sweep one parameter")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("fit-battery", help="fit KiBaM constants to a discharge curve")
    p.add_argument("--curve", help="CSV with hours,amps (default: bundled 500 Ah cell table)")
    p.add_argument("--out", help="write constants to this file")
    p.set_defaults(func=cmd_fit_battery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sbsize {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (data_io.DataError, OSError) as exc:
        print(f"sbsize {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"sbsize {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"sbsize {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
