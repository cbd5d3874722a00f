"""Tail probabilities for the Student-t, chi-squared and standard normal laws.

The t and chi-squared functions are built on the regularized incomplete
beta and gamma functions, evaluated with the modified Lentz continued
fraction (and, for the gamma function, a power series below the
transition point ``x < a + 1``).
"""

from __future__ import annotations

import math
from statistics import NormalDist

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000

_STD_NORMAL = NormalDist()


def _check_df(df: float) -> None:
    if not df >= 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df!r}")


def _check_finite(x: float) -> None:
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x!r}")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"betainc requires 0 <= x <= 1, got {x!r}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fast only on the near side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized gamma P(a, x) by its power series."""
    ap = a
    total = delta = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_cf(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def gammaincc(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("gammaincc requires a > 0")
    if x < 0:
        raise ValueError("gammaincc requires x >= 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def gammainc(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("gammainc requires a > 0")
    if x < 0:
        raise ValueError("gammainc requires x >= 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def t_sf(x: float, df: float) -> float:
    """Upper-tail probability P(T > x) of Student's t with ``df`` degrees of freedom."""
    _check_df(df)
    _check_finite(x)
    if x == 0.0:
        return 0.5
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + x * x))
    return tail if x > 0 else 1.0 - tail


def t_sf_two_sided(x: float, df: float) -> float:
    """P(|T| > |x|)."""
    _check_df(df)
    _check_finite(x)
    if x == 0.0:
        return 1.0
    return betainc(0.5 * df, 0.5, df / (df + x * x))


def chi2_sf(x: float, df: float) -> float:
    """Upper-tail probability of the chi-squared law with ``df`` degrees of freedom."""
    _check_df(df)
    _check_finite(x)
    if x <= 0.0:
        return 1.0
    return gammaincc(0.5 * df, 0.5 * x)


def normal_cdf(x: float) -> float:
    """Standard normal lower-tail probability."""
    _check_finite(x)
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_sf(x: float) -> float:
    _check_finite(x)
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def normal_ppf(p: float) -> float:
    """Standard normal quantile."""
    return _STD_NORMAL.inv_cdf(p)
