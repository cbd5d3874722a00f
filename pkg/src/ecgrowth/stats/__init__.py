from .distributions import (
    betainc,
    chi2_sf,
    gammainc,
    gammaincc,
    normal_cdf,
    normal_ppf,
    normal_sf,
    t_sf,
    t_sf_two_sided,
)
from .diagnostics import CRITICAL_VALUE, TestResult, breusch_pagan, shapiro_wilk

__all__ = [
    "CRITICAL_VALUE",
    "TestResult",
    "betainc",
    "breusch_pagan",
    "chi2_sf",
    "gammainc",
    "gammaincc",
    "normal_cdf",
    "normal_ppf",
    "normal_sf",
    "shapiro_wilk",
    "t_sf",
    "t_sf_two_sided",
]
