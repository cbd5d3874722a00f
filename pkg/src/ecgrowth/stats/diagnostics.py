"""Residual diagnostics: Breusch-Pagan heteroskedasticity and Shapiro-Wilk normality."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from ..errors import DataError, ValidationError
from .distributions import chi2_sf, normal_ppf, normal_sf

if TYPE_CHECKING:
    from ..linreg import DesignMatrix

CRITICAL_VALUE = 0.05


@dataclass(frozen=True)
class TestResult:
    test_name: str
    statistic: float
    p_value: float
    df_or_n: int
    critical_value: float = CRITICAL_VALUE

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if not math.isfinite(self.statistic):
            raise ValueError(f"{self.test_name}: non-finite statistic")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"{self.test_name}: p-value {self.p_value} outside [0, 1]")

    @property
    def passed(self) -> bool:
        """True when the null (homoskedastic / normal) is not rejected."""
        return self.p_value > self.critical_value

    def as_dict(self) -> dict:
        return {
            "test": self.test_name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "df_or_n": self.df_or_n,
            "critical_value": self.critical_value,
            "passed": self.passed,
        }


def breusch_pagan(residuals: Sequence[float], design: "DesignMatrix", variant: str = "nr2") -> TestResult:
    """Breusch-Pagan LM test of residual variance against the model's predictors.

    The auxiliary regression puts the squared residuals on an intercept plus
    every predictor column of ``design``; the statistic is chi-squared with
    ``p`` degrees of freedom.

    variant:
        ``"nr2"``: LM = n * R^2 of the auxiliary fit (centered R^2).
        ``"ess"``: LM = ESS / 2 with squared residuals scaled by SSR / n,
        the form that assumes normal errors.
    """
    from ..linreg import solve_normal_equations

    e = np.asarray(residuals, dtype=float)
    n, p = design.n_obs, design.n_predictors
    if e.shape != (n,):
        raise DataError(f"{e.size} residuals for a design with {n} rows")
    if n <= p + 1:
        raise DataError(f"Breusch-Pagan needs n > p + 1 (n={n}, p={p})")
    if variant not in ("nr2", "ess"):
        raise ValidationError(f"unknown Breusch-Pagan variant {variant!r}")
    name = "Breusch-Pagan" if variant == "nr2" else "Breusch-Pagan (ESS/2)"

    u = e**2
    sigma2 = u.mean()
    if sigma2 == 0.0:
        return TestResult(name, 0.0, 1.0, p)
    Z = np.column_stack([np.ones(n), design.X])
    gamma, _ = solve_normal_equations(Z, u, ("const",) + design.predictor_names)
    fitted = Z @ gamma
    centered = u - u.mean()
    sst = float(centered @ centered)
    if sst <= 0.0 or sst <= 1e-24 * float(u @ u):
        # equal squared residuals: nothing for the predictors to explain
        return TestResult(name, 0.0, 1.0, p)
    ess = float((fitted - u.mean()) @ (fitted - u.mean()))
    if variant == "nr2":
        resid_aux = u - fitted
        r2 = 1.0 - float(resid_aux @ resid_aux) / sst
        lm = n * max(r2, 0.0)
    else:
        lm = ess / sigma2**2 / 2.0
    return TestResult(name, float(lm), float(chi2_sf(lm, p)), p)


# Royston (1995) polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coefs: Sequence[float], x: float) -> float:
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


def shapiro_wilk_weights(n: int) -> np.ndarray:
    """Half-vector of Shapiro-Wilk weights a_1..a_{n//2} (largest first)."""
    if n < 3:
        raise ValidationError("Shapiro-Wilk needs n >= 3")
    half = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = np.array([normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)])
    summ2 = 2.0 * float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(half)
    a[0] = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a[1] = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a[0] ** 2 - 2.0 * a[1] ** 2))
        start = 2
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a[0] ** 2))
        start = 1
    a[start:] = -m[start:] / fac
    return a


def shapiro_wilk(sample: Sequence[float]) -> TestResult:
    """Shapiro-Wilk W and its p-value by Royston's 1995 approximation (3 <= n <= 5000)."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if not 3 <= n <= 5000:
        raise DataError(f"Shapiro-Wilk needs 3 <= n <= 5000, got n={n}")
    if not np.all(np.isfinite(x)):
        raise DataError("Shapiro-Wilk sample contains non-finite values")
    if x[-1] - x[0] <= 0.0:
        raise DataError("Shapiro-Wilk sample has zero variance")

    a = shapiro_wilk_weights(n)
    half = a.size
    xs = (x - x.mean()) / (x[-1] - x[0])
    numer = float(a @ (xs[::-1][:half] - xs[:half])) ** 2
    denom = float(xs @ xs)
    w = min(numer / denom, 1.0)

    if n == 3:
        pw = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return TestResult("Shapiro-Wilk", w, min(max(pw, 0.0), 1.0), n)

    w1 = math.log1p(-w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 >= gamma:
            return TestResult("Shapiro-Wilk", w, 0.0, n)
        y = -math.log(gamma - w1)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        y = w1
        ln_n = math.log(n)
        mean = _poly(_C5, ln_n)
        sd = math.exp(_poly(_C6, ln_n))
    if math.isinf(y):
        return TestResult("Shapiro-Wilk", w, 1.0, n)
    return TestResult("Shapiro-Wilk", w, normal_sf((y - mean) / sd), n)
