"""Command-line entry point: ``ecgrowth {fit,diagnose,forecast,evaluate,report}``.

Settings resolve as command-line flag, then ``--config`` JSON file, then
built-in default. Every command renders all of its outputs in memory
before writing any file. Exit codes: 0 ok, 2 validation, 3 data,
4 numerical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, report
from .dataio import (
    MacroDataset,
    write_text_atomic,
    bundled_path,
    dump_model,
    load_dataset,
    load_model,
    read_manifest,
)
from .errors import DataError, EcGrowthError, ValidationError
from .features import DEFAULT_LAG, build_design, candidate_predictors, chain_share_projection, indicator_name
from .forecast import Scenario, backtest, forecast_path
from .linreg import backward_eliminate, fit_through_origin
from .stats import breusch_pagan, shapiro_wilk

FORMATS = ("json", "csv")

DEFAULTS = {
    "data": None,
    "manifest": None,
    "from_year": None,
    "to_year": None,
    "alpha": 0.05,
    "lag": DEFAULT_LAG,
    "eliminate": False,
    "model": None,
    "scenario": None,
    "base_ec": None,
    "compare": None,
    "reference": None,
    "horizon": 2,
    "history": 8,
    "svg": False,
    "format": "json",
    "out": ".",
}


@dataclass(frozen=True)
class RunConfig:
    data_path: Path | None
    manifest_path: Path | None
    fit_window: tuple[int, int] | None
    alpha: float
    lag: int
    scenario_paths: tuple[Path, ...]
    output_format: str
    output_dir: Path

    def __post_init__(self):
        if self.fit_window is not None and self.fit_window[0] > self.fit_window[1]:
            raise ValidationError(f"--from {self.fit_window[0]} is after --to {self.fit_window[1]}")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if self.lag < 0:
            raise ValidationError(f"--lag must be >= 0, got {self.lag}")
        if self.output_format not in FORMATS:
            raise ValidationError(f"--format must be one of {', '.join(FORMATS)}")


def _merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed config ({exc})") from exc
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
        settings.update(cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _run_config(s: dict) -> RunConfig:
    window = None
    if s["from_year"] is not None or s["to_year"] is not None:
        if s["from_year"] is None or s["to_year"] is None:
            raise ValidationError("--from and --to must be given together")
        window = (int(s["from_year"]), int(s["to_year"]))
    scenarios = s["scenario"] or ()
    if isinstance(scenarios, str):
        scenarios = (scenarios,)
    return RunConfig(
        data_path=Path(s["data"]) if s["data"] else None,
        manifest_path=Path(s["manifest"]) if s["manifest"] else None,
        fit_window=window,
        alpha=float(s["alpha"]),
        lag=int(s["lag"]),
        scenario_paths=tuple(Path(p) for p in scenarios),
        output_format=s["format"],
        output_dir=Path(s["out"]),
    )


def _dataset(cfg: RunConfig) -> MacroDataset:
    if cfg.data_path is None:
        if cfg.manifest_path is not None:
            raise ValidationError("--manifest given without --data")
        return load_dataset(bundled_path("china_macro.csv"), bundled_path("china_macro.manifest.json"))
    manifest = cfg.manifest_path
    if manifest is None:
        sibling = cfg.data_path.with_suffix(".manifest.json")
        if not sibling.is_file():
            raise ValidationError(f"--manifest required (no {sibling.name} next to the data file)")
        manifest = sibling
    return load_dataset(cfg.data_path, read_manifest(manifest))


def _require_window(cfg: RunConfig) -> tuple[int, int]:
    if cfg.fit_window is None:
        raise ValidationError("--from and --to are required")
    return cfg.fit_window


def _require(settings: dict, key: str, flag: str):
    if settings.get(key) is None:
        raise ValidationError(f"{flag} is required")
    return settings[key]


def _write_all(out_dir: Path, files: dict[str, str]) -> None:
    for name, text in files.items():
        write_text_atomic(out_dir / name, text)


def _render(fmt: str, stem: str, as_dict, as_csv) -> dict[str, str]:
    if fmt == "json":
        return {f"{stem}.json": report.to_json(as_dict())}
    return {f"{stem}.csv": as_csv()}


def cmd_fit(settings: dict) -> int:
    cfg = _run_config(settings)
    start, end = _require_window(cfg)
    ds = _dataset(cfg)
    if settings["eliminate"]:
        design = build_design(ds, start, end, candidate_predictors(max(cfg.lag, 1)))
        model = backward_eliminate(design, cfg.alpha)
    else:
        design = build_design(ds, start, end, ("G", indicator_name(cfg.lag), "D"))
        model = fit_through_origin(design)
    files = {"model.json": dump_model(model)}
    files.update(
        _render(cfg.output_format, "fit_report", lambda: report.fit_report_dict(model), lambda: report.fit_report_csv(model))
    )
    _write_all(cfg.output_dir, files)
    sys.stdout.write(report.fit_report_text(model))
    return 0


def _load_reference(path) -> dict[str, float] | None:
    if path is None:
        return None
    path = Path(path)
    if not path.is_file():
        raise DataError(f"reference file not found: {path}")
    try:
        ref = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed reference file ({exc})") from exc
    return {str(k): float(v) for k, v in ref.items()}


def cmd_diagnose(settings: dict) -> int:
    cfg = _run_config(settings)
    model = load_model(_require(settings, "model", "--model"))
    ds = _dataset(cfg)
    if cfg.fit_window is not None:
        start, end = cfg.fit_window
    elif model.fit_years is not None:
        start, end = model.fit_years
    else:
        raise ValidationError("model has no fit window; pass --from and --to")
    design = build_design(ds, start, end, model.predictor_names)
    if model.residual_years and tuple(model.residual_years) != design.years:
        raise DataError(
            f"model residuals cover {model.residual_years[0]}-{model.residual_years[-1]}, "
            f"data window is {start}-{end}"
        )
    resid = design.y - design.X @ np.asarray(model.coefficients)
    results = [breusch_pagan(resid, design), breusch_pagan(resid, design, "ess"), shapiro_wilk(resid)]
    reference = _load_reference(settings["reference"])
    files = _render(
        cfg.output_format,
        "diagnostics",
        lambda: report.diagnostics_dict(results, reference),
        lambda: report.diagnostics_csv(results, reference),
    )
    _write_all(cfg.output_dir, files)
    sys.stdout.write(report.diagnostics_text(results, reference))
    return 0


_SCENARIO_KEYS = {"year", "gdp_low", "gdp_high", "gdp", "i_lag", "d_low", "d_high", "d", "unit"}


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse ``key = value`` lines (``#`` comments allowed) into a Scenario.

    ``gdp`` and ``d`` set both ends of their range; ``unit = fraction``
    scales every rate by 100.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split(sep, 1))
        if key not in _SCENARIO_KEYS:
            raise ValidationError(f"{source}:{lineno}: unknown scenario key {key!r}")
        if key in values:
            raise ValidationError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    unit = values.pop("unit", "percent")
    if unit not in ("percent", "fraction"):
        raise ValidationError(f"{source}: unit must be percent or fraction, got {unit!r}")
    scale = 100.0 if unit == "fraction" else 1.0
    for short, pair in (("gdp", ("gdp_low", "gdp_high")), ("d", ("d_low", "d_high"))):
        if short in values:
            if any(k in values for k in pair):
                raise ValidationError(f"{source}: give either {short} or {pair[0]}/{pair[1]}, not both")
            shared = values.pop(short)
            values.update(dict.fromkeys(pair, shared))
    missing = [k for k in ("year", "gdp_low", "gdp_high", "i_lag", "d_low", "d_high") if k not in values]
    if missing:
        raise ValidationError(f"{source}: missing scenario keys {', '.join(missing)}")
    try:
        year = int(values.pop("year"))
        nums = {k: float(v) * scale for k, v in values.items()}
    except ValueError as exc:
        raise ValidationError(f"{source}: {exc}") from None
    return Scenario(year=year, **nums)


def _read_scenario(path: Path) -> Scenario:
    if not path.is_file():
        raise DataError(f"scenario file not found: {path}")
    return parse_scenario(path.read_text(), str(path))


def cmd_forecast(settings: dict) -> int:
    cfg = _run_config(settings)
    model = load_model(_require(settings, "model", "--model"))
    if not cfg.scenario_paths:
        raise ValidationError("--scenario is required")
    scenarios = sorted((_read_scenario(p) for p in cfg.scenario_paths), key=lambda s: s.year)
    base = settings["base_ec"]
    if base is None:
        ds = _dataset(cfg)
        base_year = scenarios[0].year - 1
        if "ec_level" not in ds or base_year not in ds["ec_level"]:
            raise DataError(f"no EC level for {base_year}; pass --base-ec")
        base = ds["ec_level"][base_year]
    results = forecast_path(model, scenarios, float(base))
    files = _render(
        cfg.output_format, "forecast", lambda: report.forecast_dict(results), lambda: report.forecast_csv(results)
    )
    _write_all(cfg.output_dir, files)
    sys.stdout.write(report.forecast_text(results))
    return 0


def read_comparison(path) -> dict[str, dict[int, float]]:
    """Rival forecasts from a CSV with a ``year`` column and one column per forecaster."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"comparison file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if not header:
            return {}
        if "year" not in header:
            raise DataError(f"{path}: comparison file needs a 'year' column")
        rivals: dict[str, dict[int, float]] = {name: {} for name in header if name != "year"}
        for row in reader:
            try:
                year = int(row["year"])
                for name in rivals:
                    cell = (row[name] or "").strip()
                    if cell:
                        rivals[name][year] = float(cell)
            except ValueError as exc:
                raise DataError(f"{path}:{reader.line_num}: {exc}") from None
    return rivals


def cmd_evaluate(settings: dict) -> int:
    cfg = _run_config(settings)
    model = load_model(_require(settings, "model", "--model"))
    start, end = cfg.fit_window or model.fit_years or _require_window(cfg)
    ds = _dataset(cfg)
    rivals = read_comparison(settings["compare"]) if settings["compare"] else None
    table = backtest(model, ds, range(start, end + 1), rivals)
    files = _render(
        cfg.output_format, "evaluation", lambda: report.backtest_dict(table), lambda: report.backtest_csv(table)
    )
    _write_all(cfg.output_dir, files)
    sys.stdout.write(report.backtest_text(table))
    return 0


def cmd_report(settings: dict) -> int:
    cfg = _run_config(settings)
    model = load_model(_require(settings, "model", "--model"))
    start, end = cfg.fit_window or model.fit_years or _require_window(cfg)
    ds = _dataset(cfg)
    table = backtest(model, ds, range(start, end + 1))
    fit_bundle = report.emit_fit_figure(table)

    share = ds["secondary_share"]
    hist_end = min(end, share.end_year)
    hist_start = max(share.start_year, hist_end - int(settings["history"]) + 1)
    history = share.window(hist_start, hist_end)
    horizon = int(settings["horizon"])
    projections = chain_share_projection(history, horizon) if horizon > 0 else []
    share_bundle = report.emit_share_projection_figure(history, projections)

    files = {}
    for stem, bundle in (("fit_figure", fit_bundle), ("share_projection", share_bundle)):
        files.update(
            _render(
                cfg.output_format, stem, lambda b=bundle: report.bundle_to_dict(b), lambda b=bundle: report.bundle_to_csv(b)
            )
        )
        if settings["svg"]:
            files[f"{stem}.svg"] = report.bundle_to_svg(bundle)
    _write_all(cfg.output_dir, files)
    for name in files:
        print(cfg.output_dir / name)
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgrowth", description="Fit, diagnose and apply electricity-consumption growth models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of default settings")
    common.add_argument("--data", help="wide CSV of annual series (default: bundled dataset)")
    common.add_argument("--manifest", help="JSON manifest mapping roles to columns and units")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out", help="output directory (default: current directory)")
    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--from", dest="from_year", type=int)
    window.add_argument("--to", dest="to_year", type=int)
    with_model = argparse.ArgumentParser(add_help=False)
    with_model.add_argument("--model", help="fitted-model JSON document")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fit", parents=[common, window], help="fit the through-origin growth model")
    p.add_argument("--alpha", type=float, help="significance level for --eliminate (default 0.05)")
    p.add_argument("--lag", type=int, help="FAI indicator lag in years (default 4)")
    p.add_argument(
        "--eliminate", action="store_const", const=True,
        help="backward-eliminate from G, I_lag1..I_lag<lag>, D",
    )

    p = sub.add_parser("diagnose", parents=[common, window, with_model], help="residual diagnostics")
    p.add_argument("--reference", help="JSON of test name -> reference p-value to print alongside")

    p = sub.add_parser("forecast", parents=[common, with_model], help="scenario interval forecast")
    p.add_argument("--scenario", action="append", help="scenario file; repeat for consecutive years")
    p.add_argument("--base-ec", dest="base_ec", type=float, help="EC level of the year before the first scenario")

    p = sub.add_parser("evaluate", parents=[common, window, with_model], help="backtest table with MAPE")
    p.add_argument("--compare", help="CSV of rival forecasts: year,<name>...")

    p = sub.add_parser("report", parents=[common, window, with_model], help="plot data for fit and share figures")
    p.add_argument("--horizon", type=int, help="years of share projection (default 2)")
    p.add_argument("--history", type=int, help="years of share history (default 8)")
    p.add_argument("--svg", action="store_const", const=True, help="also write SVG renderings")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _merge_settings(args)
        return COMMANDS[args.command](settings)
    except EcGrowthError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
