"""Failure-probability bounds for LRPC decoding and the full-rank matrix count.

All quantities are evaluated with exact rationals; :func:`log2` converts the
result without going through a float, so values like 2^-102 keep their
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction

from .errors import ParameterError

__all__ = [
    "product_bound",
    "syndrome_bound",
    "intersection_bound",
    "total_bound",
    "nm_count",
    "BoundReport",
    "log2",
    "CSV_FIELDS",
]


def _pow(p: int, e: int) -> Fraction:
    return Fraction(p) ** e


def log2(x: Fraction) -> float:
    """Base-2 logarithm of a non-negative rational; -inf for zero."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("log of a negative number")
    if x == 0:
        return float("-inf")
    return math.log2(x.numerator) - math.log2(x.denominator)


def _check_form(form: str) -> None:
    if form not in ("exact", "simple"):
        raise ParameterError(f"form must be 'exact' or 'simple', not {form!r}")


def _double_sum(p: int, r: int, s: int, m: int, width: int, t: int) -> Fraction:
    total = Fraction(0)
    for i in range(1, t + 1):
        for j in range(r):
            total += _pow(p, s * (r - j) * (i * width - m))
    return total


def product_bound(p: int, r: int, s: int, m: int, lam: int, t: int, form: str = "exact",
                  check: bool = True) -> Fraction:
    """Probability bound that the product space E*F is not of full profile."""
    _check_form(form)
    if t < 0:
        raise ParameterError("t must be non-negative")
    if check and t * lam >= m:
        raise ParameterError(f"t*lambda = {t * lam} must be below m = {m}")
    if t == 0:
        return Fraction(0)
    if form == "simple":
        return 2 * t * _pow(p, s * (t * lam - m))
    return (1 - _pow(p, -s * lam)) * _double_sum(p, r, s, m, lam, t)


def syndrome_bound(p: int, r: int, s: int, n: int, k: int, lam: int, t: int, form: str = "exact",
                   check: bool = True) -> Fraction:
    """Probability bound that the syndromes do not span the whole product space."""
    _check_form(form)
    if t < 0:
        raise ParameterError("t must be non-negative")
    nk = n - k
    if check and lam * t >= nk + 1:
        raise ParameterError(f"lambda*t = {lam * t} must be below n-k+1 = {nk + 1}")
    if t == 0:
        return Fraction(0)
    if form == "simple":
        return 4 * _pow(p, -s * (nk + 1 - lam * t))
    prod = Fraction(1)
    for i in range(lam * t):
        prod *= 1 - _pow(p, (i - nk) * s)
    return 1 - prod


def intersection_bound(p: int, r: int, s: int, m: int, lam: int, t: int, form: str = "exact",
                       n: int | None = None, k: int | None = None, check: bool = True) -> Fraction:
    """Probability bound that the shifted syndrome spaces intersect in more than E."""
    _check_form(form)
    if t < 0:
        raise ParameterError("t must be non-negative")
    width = lam * (lam + 1) // 2
    if check and t * width >= m:
        raise ParameterError(f"t*lambda(lambda+1)/2 = {t * width} must be below m = {m}")
    if check and n is not None and k is not None and lam * t >= n - k + 1:
        raise ParameterError("lambda*t must be below n-k+1")
    if t == 0:
        return Fraction(0)
    if form == "simple":
        return 2 * t * _pow(p, s * (t * width - m))
    return (1 - _pow(p, -s * width)) * _double_sum(p, r, s, m, width, t)


CSV_FIELDS = [
    "t",
    "prod_exact",
    "prod_simple",
    "synd_exact",
    "synd_simple",
    "inter_exact",
    "inter_simple",
    "total_tight",
    "total_simple",
]


@dataclass(frozen=True)
class BoundReport:
    t: int
    product_bound: Fraction
    product_simple: Fraction
    syndrome_bound: Fraction
    syndrome_simple: Fraction
    intersection_bound: Fraction
    intersection_simple: Fraction
    total_tight: Fraction
    total_simple: Fraction
    feasible: bool = True

    def values(self) -> dict[str, Fraction]:
        return {
            "prod_exact": self.product_bound,
            "prod_simple": self.product_simple,
            "synd_exact": self.syndrome_bound,
            "synd_simple": self.syndrome_simple,
            "inter_exact": self.intersection_bound,
            "inter_simple": self.intersection_simple,
            "total_tight": self.total_tight,
            "total_simple": self.total_simple,
        }

    def clamped(self, key: str) -> float:
        """Reported value, capped at 1."""
        return float(min(self.values()[key], Fraction(1)))

    def row(self) -> dict[str, object]:
        out: dict[str, object] = {"t": self.t}
        for key, val in self.values().items():
            out[key] = f"{float(min(val, 1)):.6e}"
        for key, val in self.values().items():
            out[f"log2_{key}"] = f"{log2(val):.4f}"
        out["feasible"] = int(self.feasible)
        return out


def total_bound(p: int, r: int, s: int, m: int, n: int, k: int, lam: int, t: int,
                allow_infeasible: bool = False) -> BoundReport:
    """All bounds at error rank t.

    The tight total is the sum of the three exact terms; the simple total is
    4 p^(s(lambda t - (n-k+1))) + 4 t p^(s(t lambda(lambda+1)/2 - m)).  With
    ``allow_infeasible`` the raw formulas are evaluated even when their
    preconditions fail, and the report is marked infeasible.
    """
    width = lam * (lam + 1) // 2
    feasible = t * lam < m and lam * t < n - k + 1 and t * width < m
    if not feasible and not allow_infeasible:
        raise ParameterError(f"bounds are not defined at t = {t}")
    chk = not allow_infeasible
    pe = product_bound(p, r, s, m, lam, t, "exact", check=chk)
    ps = product_bound(p, r, s, m, lam, t, "simple", check=chk)
    se = syndrome_bound(p, r, s, n, k, lam, t, "exact", check=chk)
    ss = syndrome_bound(p, r, s, n, k, lam, t, "simple", check=chk)
    ie = intersection_bound(p, r, s, m, lam, t, "exact", check=chk)
    is_ = intersection_bound(p, r, s, m, lam, t, "simple", check=chk)
    if t == 0:
        simple = Fraction(0)
    else:
        simple = 4 * _pow(p, s * (lam * t - (n - k + 1))) + 4 * t * _pow(p, s * (t * width - m))
    return BoundReport(t, pe, ps, se, ss, ie, is_, pe + se + ie, simple, feasible)


def nm_count(p: int, r: int, s: int, a: int, b: int) -> int:
    """Number of a x b matrices over GR(p^r, s) of free rank a."""
    if not 0 <= a < b:
        raise ParameterError("need 0 <= a < b")
    val = Fraction(p) ** (a * b * r * s)
    for ap in range(a):
        val *= 1 - _pow(p, (ap - b) * s)
    if val.denominator != 1:
        raise ArithmeticError("matrix count is not an integer")
    return val.numerator
