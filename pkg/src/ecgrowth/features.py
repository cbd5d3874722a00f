"""Predictor construction: FAI turning-point indicator, share deltas, share projections.

All predictors are in percentage points. The FAI indicator of year n is

    I_n = Y_n + 2 * Y_{n-2} - 2 * Y_{n-1}

where Y is the FAI growth rate, and it enters the model with a delay
(``I_lag4`` means I_{n-4}). The share delta is D_n = S_n - S_{n-1}.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataio import AnnualSeries, MacroDataset
from .errors import DataError, ValidationError
from .linreg import DesignMatrix

GDP = "G"
SHARE_DELTA = "D"
DEFAULT_LAG = 4
DEFAULT_PREDICTORS = (GDP, f"I_lag{DEFAULT_LAG}", SHARE_DELTA)

#: multiplier on the last observed share change for the accelerated-decline bound
ACCELERATION = 1.3

_LAG_NAME = re.compile(r"^I_lag(\d+)$")


class ShareDomainWarning(UserWarning):
    """A projected share left the open interval (0, 100)."""


def indicator_name(lag: int) -> str:
    return f"I_lag{lag}"


def candidate_predictors(max_lag: int = DEFAULT_LAG) -> tuple[str, ...]:
    """G, I_lag1..I_lag{max_lag}, D: the pool backward elimination starts from."""
    return (GDP, *(indicator_name(k) for k in range(1, max_lag + 1)), SHARE_DELTA)


@dataclass(frozen=True)
class FaiIndicatorSeries:
    base: AnnualSeries
    indicator: AnnualSeries


@dataclass(frozen=True)
class ShareDeltaSeries:
    base: AnnualSeries
    delta: AnnualSeries


@dataclass(frozen=True)
class ShareProjection:
    """Projected secondary-sector share for one year.

    ``upper`` continues the last observed change; ``lower`` accelerates it
    by 1.3. For a declining share, lower < upper.
    """

    year: int
    upper: float
    lower: float

    @property
    def out_of_domain(self) -> bool:
        return not (0.0 < self.upper < 100.0 and 0.0 < self.lower < 100.0)

    @property
    def band(self) -> tuple[float, float]:
        return min(self.lower, self.upper), max(self.lower, self.upper)


def _require_percent(series: AnnualSeries) -> None:
    if series.unit != "percent":
        raise ValidationError(f"series {series.name!r} must be in percent, has unit {series.unit!r}")


def fai_indicator(fai_agr: AnnualSeries) -> FaiIndicatorSeries:
    _require_percent(fai_agr)
    y = np.asarray(fai_agr.values)
    if y.size < 3:
        raise DataError(f"FAI indicator needs at least 3 years of FAI growth, got {y.size}")
    ind = y[2:] + 2.0 * y[:-2] - 2.0 * y[1:-1]
    return FaiIndicatorSeries(
        base=fai_agr,
        indicator=AnnualSeries("fai_indicator", fai_agr.start_year + 2, tuple(ind), "percent"),
    )


def lagged_indicator(ind: FaiIndicatorSeries, target_year: int, lag: int = DEFAULT_LAG) -> float:
    """I_{target_year - lag}."""
    if lag < 0:
        raise ValidationError(f"lag must be >= 0, got {lag}")
    year = target_year - lag
    if year not in ind.indicator:
        s = ind.indicator
        raise DataError(
            f"FAI indicator undefined for {year} (target {target_year}, lag {lag}; "
            f"defined {s.start_year}-{s.end_year})"
        )
    return ind.indicator[year]


def share_delta(share: AnnualSeries) -> ShareDeltaSeries:
    _require_percent(share)
    s = np.asarray(share.values)
    if s.size < 2:
        raise DataError(f"share delta needs at least 2 years of share data, got {s.size}")
    return ShareDeltaSeries(
        base=share,
        delta=AnnualSeries("share_delta", share.start_year + 1, tuple(np.diff(s)), "percent"),
    )


def _check_share(value: float, label: str) -> None:
    if not 0.0 < value < 100.0:
        raise ValidationError(f"{label} must lie in (0, 100), got {value}")


def _warn_if_outside(proj: ShareProjection) -> None:
    if proj.out_of_domain:
        warnings.warn(
            f"projected share for {proj.year} leaves (0, 100): upper={proj.upper:.4g}, lower={proj.lower:.4g}",
            ShareDomainWarning,
            stacklevel=3,
        )


def project_share_bounds(s_prev: float, s_prev2: float, year: int = 0) -> ShareProjection:
    """Bounds for S_n from S_{n-1} (``s_prev``) and S_{n-2} (``s_prev2``).

    upper = 2 S_{n-1} - S_{n-2};  lower = 2.3 S_{n-1} - 1.3 S_{n-2}.
    Results outside (0, 100) are kept as computed and raise a ShareDomainWarning.
    """
    _check_share(s_prev, "S_{n-1}")
    _check_share(s_prev2, "S_{n-2}")
    trend = s_prev - s_prev2
    proj = ShareProjection(year, s_prev + trend, s_prev + ACCELERATION * trend)
    _warn_if_outside(proj)
    return proj


def chain_share_projection(share: AnnualSeries, horizon: int) -> list[ShareProjection]:
    """Project ``horizon`` years past the end of ``share``.

    The upper trajectory re-applies the upper rule to its own projected
    values, the lower trajectory the lower rule to its own.
    """
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    if len(share) < 2:
        raise DataError("share projection needs at least 2 observed years")
    _require_percent(share)
    s1, s2 = share.values[-1], share.values[-2]
    first = project_share_bounds(s1, s2, share.end_year + 1)
    out = [first]
    up_prev, up = s1, first.upper
    lo_prev, lo = s1, first.lower
    for k in range(2, horizon + 1):
        up_prev, up = up, up + (up - up_prev)
        lo_prev, lo = lo, lo + ACCELERATION * (lo - lo_prev)
        proj = ShareProjection(share.end_year + k, up, lo)
        _warn_if_outside(proj)
        out.append(proj)
    return out


def projected_deltas(share: AnnualSeries, projections: Sequence[ShareProjection]) -> list[tuple[int, float, float]]:
    """(year, d_low, d_high) implied by chained projections, each path differenced against itself."""
    rows = []
    up_prev = lo_prev = share.values[-1]
    for p in projections:
        d_up, d_lo = p.upper - up_prev, p.lower - lo_prev
        rows.append((p.year, min(d_up, d_lo), max(d_up, d_lo)))
        up_prev, lo_prev = p.upper, p.lower
    return rows


def predictor_series(dataset: MacroDataset, name: str) -> AnnualSeries:
    """Year-indexed values of a named predictor (``G``, ``D`` or ``I_lag<k>``)."""
    if name == GDP:
        return dataset["gdp_agr"]
    if name == SHARE_DELTA:
        return share_delta(dataset["secondary_share"]).delta
    m = _LAG_NAME.match(name)
    if m:
        lag = int(m.group(1))
        ind = fai_indicator(dataset["fai_agr"]).indicator
        return AnnualSeries(name, ind.start_year + lag, ind.values, ind.unit)
    raise ValidationError(f"unknown predictor {name!r}; expected G, D or I_lag<k>")


def build_design(
    dataset: MacroDataset,
    start_year: int,
    end_year: int,
    predictors: Sequence[str] = DEFAULT_PREDICTORS,
    response: str = "ec_agr",
) -> DesignMatrix:
    """Rows start_year..end_year of the predictor columns and the EC growth response."""
    if start_year > end_year:
        raise ValidationError(f"empty year window {start_year}-{end_year}")
    years = list(range(start_year, end_year + 1))
    cols = []
    for name in predictors:
        s = predictor_series(dataset, name)
        missing = [y for y in years if y not in s]
        if missing:
            raise DataError(
                f"predictor {name} undefined for {missing[0]}"
                + (f"-{missing[-1]}" if len(missing) > 1 else "")
                + f" (available {s.start_year}-{s.end_year})"
            )
        cols.append([s[y] for y in years])
    target = dataset[response]
    missing = [y for y in years if y not in target]
    if missing:
        raise DataError(f"{response} has no value for {missing[0]} (available {target.start_year}-{target.end_year})")
    X = np.column_stack(cols) if cols else np.empty((len(years), 0))
    y = np.array([target[t] for t in years])
    return DesignMatrix(tuple(years), tuple(predictors), X, y)
