"""Scenario interval forecasts and level-based error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dataio import MacroDataset
from .errors import DataError, ValidationError
from .features import build_design
from .linreg import FittedModel, predict


@dataclass(frozen=True)
class Scenario:
    """Inputs for one forecast year, all in percentage points.

    ``i_lag`` is the already-realized lagged FAI indicator; the GDP growth
    and share delta come as ranges.
    """

    year: int
    gdp_low: float
    gdp_high: float
    i_lag: float
    d_low: float
    d_high: float

    def __post_init__(self):
        for name in ("gdp_low", "gdp_high", "i_lag", "d_low", "d_high"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"scenario {self.year}: {name} must be a finite number, got {v!r}")
        if self.gdp_low > self.gdp_high:
            raise ValidationError(f"scenario {self.year}: gdp_low {self.gdp_low} > gdp_high {self.gdp_high}")
        if self.d_low > self.d_high:
            raise ValidationError(f"scenario {self.year}: d_low {self.d_low} > d_high {self.d_high}")

    @classmethod
    def point(cls, year: int, gdp: float, i_lag: float, d: float) -> "Scenario":
        return cls(year, gdp, gdp, i_lag, d, d)


@dataclass(frozen=True)
class ForecastResult:
    year: int
    agr_low: float
    agr_high: float
    ec_low: float
    ec_high: float
    base_ec: float
    scenario: Scenario
    base_ec_high: float | None = None

    def as_dict(self) -> dict:
        s = self.scenario
        return {
            "year": self.year,
            "agr_low": self.agr_low,
            "agr_high": self.agr_high,
            "ec_low": self.ec_low,
            "ec_high": self.ec_high,
            "base_ec": self.base_ec,
            "base_ec_high": self.base_ec if self.base_ec_high is None else self.base_ec_high,
            "gdp_low": s.gdp_low,
            "gdp_high": s.gdp_high,
            "i_lag": s.i_lag,
            "d_low": s.d_low,
            "d_high": s.d_high,
        }


def _check_growth_model(model: FittedModel) -> None:
    names = model.predictor_names
    if len(names) != 3 or names[0] != "G" or not names[1].startswith("I_lag") or names[2] != "D":
        raise ValidationError(f"forecasting needs a (G, I_lag<k>, D) model, got {names}")


def level_from_agr(base: float, agr: float) -> float:
    return base * (1.0 + agr / 100.0)


def implied_agr(level: float, base: float) -> float:
    return 100.0 * (level / base - 1.0)


def forecast_range(
    model: FittedModel, scenario: Scenario, base_ec: float, base_ec_high: float | None = None
) -> ForecastResult:
    """AGR and consumption-level bounds over the scenario box.

    Corners are picked by coefficient sign, so ``agr_low`` is the minimum
    of the model over the box and ``agr_high`` the maximum.
    """
    _check_growth_model(model)
    if not base_ec > 0:
        raise ValidationError(f"base EC level must be positive, got {base_ec}")
    if base_ec_high is not None and not base_ec_high > 0:
        raise ValidationError(f"base EC level must be positive, got {base_ec_high}")
    c_g, _, c_d = model.coefficients
    g_lo, g_hi = (scenario.gdp_low, scenario.gdp_high) if c_g >= 0 else (scenario.gdp_high, scenario.gdp_low)
    d_lo, d_hi = (scenario.d_low, scenario.d_high) if c_d >= 0 else (scenario.d_high, scenario.d_low)
    agr_low = predict(model, g_lo, scenario.i_lag, d_lo)
    agr_high = predict(model, g_hi, scenario.i_lag, d_hi)
    assert agr_low <= agr_high + 1e-12 * max(1.0, abs(agr_high))
    high_base = base_ec if base_ec_high is None else base_ec_high
    return ForecastResult(
        year=scenario.year,
        agr_low=agr_low,
        agr_high=agr_high,
        ec_low=level_from_agr(base_ec, agr_low),
        ec_high=level_from_agr(high_base, agr_high),
        base_ec=base_ec,
        scenario=scenario,
        base_ec_high=base_ec_high,
    )


def forecast_path(model: FittedModel, scenarios: Sequence[Scenario], base_ec: float) -> list[ForecastResult]:
    """Consecutive-year forecasts; each path's level feeds the next year's base on that path."""
    if not scenarios:
        raise ValidationError("no scenarios given")
    years = [s.year for s in scenarios]
    if any(b != a + 1 for a, b in zip(years, years[1:])):
        raise ValidationError(f"scenario years must be consecutive, got {years}")
    out = []
    lo, hi = base_ec, None
    for s in scenarios:
        r = forecast_range(model, s, lo, hi)
        out.append(r)
        lo, hi = r.ec_low, r.ec_high
    return out


def ec_error(forecast_agr: float, actual_agr: float) -> float:
    """Relative error (%) of the consumption level implied by a growth forecast.

    Both growth rates apply to the same base-year level, so the error is
    ``100 * ((1 + f/100) / (1 + a/100) - 1)``; overprediction is positive.
    """
    if not actual_agr > -100.0:
        raise ValidationError(f"actual growth must exceed -100%, got {actual_agr}")
    return 100.0 * ((1.0 + forecast_agr / 100.0) / (1.0 + actual_agr / 100.0) - 1.0)


def mape(fitted: Mapping[int, float], actual: Mapping[int, float]) -> float:
    """Mean absolute level-implied error over matching years."""
    if set(fitted) != set(actual):
        only_f = sorted(set(fitted) - set(actual))
        only_a = sorted(set(actual) - set(fitted))
        raise DataError(f"year mismatch: fitted-only {only_f}, actual-only {only_a}")
    if not fitted:
        raise DataError("mape of an empty set of years")
    return sum(abs(ec_error(fitted[y], actual[y])) for y in fitted) / len(fitted)


@dataclass(frozen=True)
class BacktestRow:
    year: int
    fitted: float
    actual: float
    error: float
    rivals: Mapping[str, tuple[float, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class BacktestTable:
    rows: tuple[BacktestRow, ...]
    mape: float
    rival_names: tuple[str, ...] = ()

    @property
    def years(self) -> list[int]:
        return [r.year for r in self.rows]


def backtest(
    model: FittedModel,
    dataset: MacroDataset,
    years: range | Sequence[int],
    rivals: Mapping[str, Mapping[int, float]] | None = None,
) -> BacktestTable:
    """Per-year model fit, actual EC growth and level-implied error, plus MAPE.

    ``rivals`` maps a forecaster name to year -> growth forecast; years the
    rival does not cover are left out of its columns.
    """
    years = list(years)
    if not years:
        raise DataError("backtest over an empty range of years")
    if any(b != a + 1 for a, b in zip(years, years[1:])):
        raise DataError("backtest years must be consecutive")
    design = build_design(dataset, years[0], years[-1], model.predictor_names)
    rivals = dict(rivals or {})
    rows = []
    for year, x, actual in zip(design.years, design.X, design.y):
        actual = float(actual)
        fit = predict(model, *x)
        rival_cols = {
            name: (series[year], ec_error(series[year], actual))
            for name, series in rivals.items()
            if year in series
        }
        rows.append(BacktestRow(year, fit, actual, ec_error(fit, actual), rival_cols))
    table_mape = sum(abs(r.error) for r in rows) / len(rows)
    return BacktestTable(tuple(rows), table_mape, tuple(rivals))
