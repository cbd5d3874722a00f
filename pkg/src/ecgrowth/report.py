"""Tables and plot-data bundles rendered to CSV, JSON and a bare-bones SVG."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .dataio import AnnualSeries
from .errors import DataError
from .features import ShareProjection
from .forecast import BacktestTable, ForecastResult
from .linreg import FittedModel
from .stats import TestResult


@dataclass(frozen=True)
class PlotSeriesBundle:
    """Named series over shared x values; ``None`` marks a missing point.

    ``band`` holds (low, high) lists aligned with ``x``.
    """

    title: str
    x: tuple[int, ...]
    series: Mapping[str, tuple[float | None, ...]]
    band: tuple[tuple[float | None, ...], tuple[float | None, ...]] | None = None
    band_label: str = "projected range"

    def __post_init__(self):
        n = len(self.x)
        for name, values in self.series.items():
            if len(values) != n:
                raise DataError(f"series {name!r} has {len(values)} points for {n} x values")
        if self.band is not None:
            low, high = self.band
            if len(low) != n or len(high) != n:
                raise DataError("band series must match x in length")
            for year, lo, hi in zip(self.x, low, high):
                if (lo is None) != (hi is None):
                    raise DataError(f"band has only one bound at {year}")
                if lo is not None and lo > hi:
                    raise DataError(f"band low > high at {year}")


def emit_fit_figure(table: BacktestTable) -> PlotSeriesBundle:
    if not table.rows:
        raise DataError("cannot plot an empty backtest table")
    years = tuple(r.year for r in table.rows)
    return PlotSeriesBundle(
        title=f"Fitted and actual EC growth, {years[0]}-{years[-1]}",
        x=years,
        series={
            "fitted": tuple(r.fitted for r in table.rows),
            "actual": tuple(r.actual for r in table.rows),
        },
    )


def emit_share_projection_figure(
    history: AnnualSeries, projections: Sequence[ShareProjection]
) -> PlotSeriesBundle:
    years = list(history.years)
    for k, p in enumerate(projections):
        if p.year != history.end_year + 1 + k:
            raise DataError(
                f"projection years must follow {history.end_year} contiguously, got {[q.year for q in projections]}"
            )
        years.append(p.year)
    pad = [None] * len(projections)
    share = tuple(list(history.values) + pad)
    title = f"Secondary-sector share, {years[0]}-{years[-1]}"
    if not projections:
        return PlotSeriesBundle(title, tuple(years), {"share": share})
    hist_gap = [None] * len(history)
    low = tuple(hist_gap + [p.band[0] for p in projections])
    high = tuple(hist_gap + [p.band[1] for p in projections])
    return PlotSeriesBundle(title, tuple(years), {"share": share}, band=(low, high))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def bundle_to_dict(bundle: PlotSeriesBundle) -> dict:
    out = {"title": bundle.title, "x": list(bundle.x), "series": {k: list(v) for k, v in bundle.series.items()}}
    if bundle.band is not None:
        out["shaded_band"] = {"label": bundle.band_label, "low": list(bundle.band[0]), "high": list(bundle.band[1])}
    return out


def bundle_to_csv(bundle: PlotSeriesBundle) -> str:
    header = ["year", *bundle.series]
    cols = list(bundle.series.values())
    if bundle.band is not None:
        header += ["band_low", "band_high"]
        cols += list(bundle.band)
    return rows_to_csv(header, [[x, *(c[i] for c in cols)] for i, x in enumerate(bundle.x)])


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def bundle_to_svg(bundle: PlotSeriesBundle, width: int = 640, height: int = 360) -> str:
    """Line chart with an optional shaded band; no axis ticks beyond the extremes."""
    values = [v for s in bundle.series.values() for v in s if v is not None]
    if bundle.band is not None:
        values += [v for side in bundle.band for v in side if v is not None]
    if not values:
        raise DataError("nothing to draw")
    pad = 40
    x0, x1 = bundle.x[0], bundle.x[-1]
    y0, y1 = min(values), max(values)
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    span_x = (x1 - x0) or 1

    def px(x):
        return pad + (x - x0) / span_x * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(bundle.title)}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{x0}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" text-anchor="end">{x1}</text>',
        f'<text x="{pad - 4}" y="{py(y1):.1f}" font-size="11" text-anchor="end">{y1:.2f}</text>',
        f'<text x="{pad - 4}" y="{py(y0):.1f}" font-size="11" text-anchor="end">{y0:.2f}</text>',
    ]
    if bundle.band is not None:
        pts = [(x, lo, hi) for x, lo, hi in zip(bundle.x, *bundle.band) if lo is not None]
        if pts:
            upper = " ".join(f"{px(x):.1f},{py(hi):.1f}" for x, _, hi in pts)
            lower = " ".join(f"{px(x):.1f},{py(lo):.1f}" for x, lo, _ in reversed(pts))
            parts.append(f'<polygon points="{upper} {lower}" fill="#bbbbbb" fill-opacity="0.6" stroke="none"/>')
    for k, (name, vals) in enumerate(bundle.series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(v):.1f}" for x, v in zip(bundle.x, vals) if v is not None)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * k}" font-size="11" fill="{color}" text-anchor="end">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _opt(values, j):
    return None if values is None else values[j]


def coefficient_rows(model: FittedModel) -> list[list]:
    return [
        [name, model.coefficients[j], _opt(model.std_errors, j), _opt(model.t_stats, j), _opt(model.p_values, j)]
        for j, name in enumerate(model.predictor_names)
    ]


COEF_HEADER = ("predictor", "coefficient", "std_error", "t_stat", "p_value")


def fit_report_csv(model: FittedModel) -> str:
    rows = coefficient_rows(model)
    rows.append(["adj_r2", model.adj_r2, None, None, None])
    return rows_to_csv(COEF_HEADER, rows)


def fit_report_dict(model: FittedModel) -> dict:
    return {
        "fit_start_year": model.fit_years[0] if model.fit_years else None,
        "fit_end_year": model.fit_years[1] if model.fit_years else None,
        "coefficients": [dict(zip(COEF_HEADER, row)) for row in coefficient_rows(model)],
        "adj_r2": model.adj_r2,
    }


def _fmt(v, spec):
    if v is None:
        return "-"
    if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
        return str(v)
    return format(v, spec)


def fit_report_text(model: FittedModel) -> str:
    lines = [f"{'predictor':<10}{'coef':>12}{'std err':>12}{'t':>10}{'p':>12}"]
    for name, coef, se, t, p in coefficient_rows(model):
        lines.append(f"{name:<10}{_fmt(coef, '12.5f')}{_fmt(se, '12.5f')}{_fmt(t, '10.3f')}{_fmt(p, '12.3g')}")
    if model.adj_r2 is not None:
        lines.append(f"adjusted R^2 (uncentered): {model.adj_r2:.4f}")
    return "\n".join(lines) + "\n"


BACKTEST_HEADER = ("year", "fitted", "actual", "error")


def backtest_rows(table: BacktestTable) -> tuple[list[str], list[list]]:
    header = list(BACKTEST_HEADER)
    for name in table.rival_names:
        header += [name, f"{name}_error"]
    rows = []
    for r in table.rows:
        row = [r.year, r.fitted, r.actual, r.error]
        for name in table.rival_names:
            row += list(r.rivals.get(name, (None, None)))
        rows.append(row)
    return header, rows


def backtest_csv(table: BacktestTable) -> str:
    header, rows = backtest_rows(table)
    rows.append(["MAPE", None, None, table.mape] + [None] * (len(header) - 4))
    return rows_to_csv(header, rows)


def backtest_dict(table: BacktestTable) -> dict:
    header, rows = backtest_rows(table)
    return {"rows": [dict(zip(header, row)) for row in rows], "mape": table.mape}


def backtest_text(table: BacktestTable) -> str:
    header, rows = backtest_rows(table)
    lines = ["  ".join(f"{h:>12}" for h in header)]
    for row in rows:
        lines.append("  ".join(f"{row[0]:>12}" if i == 0 else f"{_fmt(v, '12.3f'):>12}" for i, v in enumerate(row)))
    lines.append(f"{'MAPE':>12}  {table.mape:.3f}")
    return "\n".join(lines) + "\n"


def diagnostics_rows(results: Sequence[TestResult], reference: Mapping[str, float] | None = None):
    header = ["test", "statistic", "p_value", "critical_value", "df_or_n", "passed"]
    if reference:
        header.append("reference_p_value")
    rows = []
    for r in results:
        row = [r.test_name, r.statistic, r.p_value, r.critical_value, r.df_or_n, r.passed]
        if reference:
            row.append(reference.get(r.test_name))
        rows.append(row)
    return header, rows


def diagnostics_csv(results, reference=None) -> str:
    return rows_to_csv(*diagnostics_rows(results, reference))


def diagnostics_dict(results, reference=None) -> dict:
    header, rows = diagnostics_rows(results, reference)
    return {"tests": [dict(zip(header, row)) for row in rows]}


def diagnostics_text(results, reference=None) -> str:
    header, rows = diagnostics_rows(results, reference)
    lines = []
    for row in rows:
        d = dict(zip(header, row))
        verdict = "pass" if d["passed"] else "FAIL"
        line = f"{d['test']:<24} stat={d['statistic']:.4f}  p={d['p_value']:.3f}  ({verdict} at {d['critical_value']})"
        if d.get("reference_p_value") is not None:
            line += f"  reference p={d['reference_p_value']}"
        lines.append(line)
    return "\n".join(lines) + "\n"


FORECAST_HEADER = (
    "year", "agr_low", "agr_high", "ec_low", "ec_high", "base_ec", "base_ec_high",
    "gdp_low", "gdp_high", "i_lag", "d_low", "d_high",
)


def forecast_csv(results: Sequence[ForecastResult]) -> str:
    return rows_to_csv(FORECAST_HEADER, [[r.as_dict()[k] for k in FORECAST_HEADER] for r in results])


def forecast_dict(results: Sequence[ForecastResult]) -> dict:
    return {"forecasts": [r.as_dict() for r in results]}


def forecast_text(results: Sequence[ForecastResult]) -> str:
    lines = [f"{'year':>6}{'AGR low %':>12}{'AGR high %':>12}{'EC low':>10}{'EC high':>10}"]
    for r in results:
        lines.append(f"{r.year:>6}{r.agr_low:>12.2f}{r.agr_high:>12.2f}{r.ec_low:>10.3f}{r.ec_high:>10.3f}")
    return "\n".join(lines) + "\n"
