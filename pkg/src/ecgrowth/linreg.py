"""Least-squares regression through the origin with t-based inference."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegreesOfFreedomError,
    NoSignificantPredictorsError,
    SingularDesignError,
    ValidationError,
)
from .stats.distributions import t_sf_two_sided

#: reciprocal condition number of X'X below which the design counts as singular
RCOND_LIMIT = 1e-12


@dataclass(frozen=True)
class DesignMatrix:
    """Rows are years, columns are predictors; ``y`` is the response."""

    years: tuple[int, ...]
    predictor_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1:
            raise ValidationError("X must be 2-D and y 1-D")
        n, p = X.shape
        if p < 1:
            raise ValidationError("design needs at least one predictor")
        if len(y) != n or len(self.years) != n:
            raise ValidationError(f"row mismatch: X has {n} rows, y {len(y)}, years {len(self.years)}")
        if len(self.predictor_names) != p:
            raise ValidationError(f"{len(self.predictor_names)} names for {p} columns")
        if len(set(self.predictor_names)) != p:
            raise ValidationError("predictor names must be unique")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValidationError("design contains non-finite entries")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "years", tuple(int(t) for t in self.years))
        object.__setattr__(self, "predictor_names", tuple(self.predictor_names))

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_predictors(self) -> int:
        return self.X.shape[1]

    def select(self, names: Sequence[str]) -> "DesignMatrix":
        idx = [self.predictor_names.index(name) for name in names]
        return DesignMatrix(self.years, tuple(names), self.X[:, idx], self.y)


@dataclass(frozen=True)
class FittedModel:
    """Coefficients and inference for a through-origin linear model.

    Models built from externally published coefficients may leave the
    inference fields as ``None`` and the residuals empty.
    """

    predictor_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...] | None = None
    t_stats: tuple[float, ...] | None = None
    p_values: tuple[float, ...] | None = None
    adj_r2: float | None = None
    fit_years: tuple[int, int] | None = None
    residual_years: tuple[int, ...] = ()
    residuals: tuple[float, ...] = ()
    r2: float | None = field(default=None, compare=False)

    def __post_init__(self):
        p = len(self.coefficients)
        if p < 1:
            raise ValidationError("a model needs at least one coefficient")
        if len(self.predictor_names) != p:
            raise ValidationError("predictor_names and coefficients differ in length")
        for label in ("std_errors", "t_stats", "p_values"):
            vals = getattr(self, label)
            if vals is not None and len(vals) != p:
                raise ValidationError(f"{label} has {len(vals)} entries for {p} coefficients")
        if len(self.residual_years) != len(self.residuals):
            raise ValidationError("residual_years and residuals differ in length")

    @property
    def n_predictors(self) -> int:
        return len(self.coefficients)

    def coefficient(self, name: str) -> float:
        return self.coefficients[self.predictor_names.index(name)]

    @classmethod
    def from_coefficients(cls, names: Sequence[str], coefficients: Sequence[float], **kw) -> "FittedModel":
        return cls(tuple(names), tuple(float(c) for c in coefficients), **kw)


def _cholesky_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L L' x = b by forward then back substitution."""
    p = L.shape[0]
    z = np.zeros_like(b, dtype=float)
    for i in range(p):
        z[i] = (b[i] - L[i, :i] @ z[:i]) / L[i, i]
    x = np.zeros_like(z)
    for i in range(p - 1, -1, -1):
        x[i] = (z[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def _dependent_columns(X: np.ndarray, names: Sequence[str]) -> tuple[str, ...]:
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    null = vt[-1]
    scale = np.max(np.abs(null)) if null.size else 0.0
    return tuple(name for name, v in zip(names, null) if scale and abs(v) > 1e-8 * scale)


def solve_normal_equations(X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None):
    """Least-squares coefficients and (X'X)^-1 via Cholesky on the normal equations.

    Raises SingularDesignError when X'X is numerically singular.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    xtx = X.T @ X
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(xtx)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_LIMIT:
        cols = _dependent_columns(X, names)
        raise SingularDesignError(
            f"design is rank deficient; dependent columns: {', '.join(cols) or 'unknown'}", cols
        )
    try:
        L = np.linalg.cholesky(xtx)
    except np.linalg.LinAlgError as exc:
        cols = _dependent_columns(X, names)
        raise SingularDesignError(f"normal matrix is not positive definite: {exc}", cols) from exc
    p = X.shape[1]
    if p == 1:
        beta = (X.T @ y) / xtx[0, 0]
        return beta, np.array([[1.0 / xtx[0, 0]]])
    beta = _cholesky_solve(L, X.T @ y)
    xtx_inv = np.column_stack([_cholesky_solve(L, e) for e in np.eye(p)])
    return beta, xtx_inv


def fit_through_origin(design: DesignMatrix) -> FittedModel:
    """Fit ``y = X @ beta + e`` with no intercept.

    Inference uses ``df = n - p``; R-squared is the uncentered one,
    ``1 - SSR / sum(y**2)``, adjusted as ``1 - (1 - R2) * n / (n - p)``.
    """
    n, p = design.n_obs, design.n_predictors
    if n <= p:
        raise DegreesOfFreedomError(f"need more observations than predictors (n={n}, p={p})")
    X, y = design.X, design.y
    beta, xtx_inv = solve_normal_equations(X, y, design.predictor_names)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    df = n - p
    s2 = ssr / df
    se = np.sqrt(s2 * np.clip(np.diag(xtx_inv), 0.0, None))
    t_stats, p_values = [], []
    for b, s in zip(beta, se):
        if s > 0:
            t = b / s
        else:
            t = math.copysign(math.inf, b) if b != 0 else 0.0
        t_stats.append(float(t))
        p_values.append(0.0 if math.isinf(t) else float(t_sf_two_sided(t, df)))
    sst = float(y @ y)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * n / df
    return FittedModel(
        predictor_names=design.predictor_names,
        coefficients=tuple(float(b) for b in beta),
        std_errors=tuple(float(s) for s in se),
        t_stats=tuple(t_stats),
        p_values=tuple(p_values),
        adj_r2=float(adj),
        fit_years=(design.years[0], design.years[-1]),
        residual_years=design.years,
        residuals=tuple(float(e) for e in resid),
        r2=float(r2),
    )


def predict(model: FittedModel, *values: float) -> float:
    """Dot product of the coefficients with predictor values, in model order.

    For the three-predictor growth model the order is
    ``(gdp_growth, lagged_fai_indicator, share_delta)``.
    """
    if len(values) != model.n_predictors:
        raise ValidationError(
            f"model {model.predictor_names} takes {model.n_predictors} inputs, got {len(values)}"
        )
    return float(sum(c * float(v) for c, v in zip(model.coefficients, values)))


def fitted_values(model: FittedModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_predictors:
        raise ValidationError(f"X has {X.shape[1]} columns, model expects {model.n_predictors}")
    return X @ np.asarray(model.coefficients)


def backward_eliminate(design: DesignMatrix, alpha: float = 0.05) -> FittedModel:
    """Refit, dropping the least significant predictor, until every p-value is <= alpha.

    Ties on the largest p-value drop the later column.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    names = list(design.predictor_names)
    while names:
        model = fit_through_origin(design.select(names))
        pv = model.p_values
        worst = max(pv)
        if worst <= alpha:
            return model
        drop = max(j for j, v in enumerate(pv) if v == worst)
        del names[drop]
    raise NoSignificantPredictorsError(f"no predictor is significant at alpha={alpha}")
