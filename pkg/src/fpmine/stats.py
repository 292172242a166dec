"""Small, dependency-free statistics: 2x2 chi-square, odds ratio, geometric
mean and point-biserial correlation.

The chi-square survival function for one degree of freedom is
``erfc(sqrt(x / 2))`` (``math.erfc``). Student-t tail probabilities use the
regularized incomplete beta function, evaluated with the modified Lentz
continued fraction; the log-beta prefactor follows the Stirling-corrected
form so that large degrees of freedom keep full relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

__all__ = [
    "TestResult",
    "chi_square_2x2",
    "odds_ratio",
    "geometric_mean",
    "point_biserial",
    "chi2_sf_1dof",
    "student_t_sf",
    "betainc",
]


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    df: float
    extras: dict[str, Any] = field(default_factory=dict)


def _cells(table) -> tuple[float, float, float, float]:
    if hasattr(table, "a"):
        cells = (table.a, table.b, table.c, table.d)
    else:
        (a, b), (c, d) = table
        cells = (a, b, c, d)
    cells = tuple(float(x) for x in cells)
    if any(x < 0 or math.isnan(x) for x in cells):
        raise ValueError(f"cells must be non-negative, got {cells}")
    return cells  # type: ignore[return-value]


# -- special functions --------------------------------------------------------

def chi2_sf_1dof(x: float) -> float:
    """P(X > x) for X ~ chi-square(1)."""
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(x / 2.0))


# Stirling series coefficients B_2k / (2k (2k-1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _lgammacor(x: float) -> float:
    """lgamma(x) - ((x - 1/2) log x - x + log sqrt(2 pi)), for x >= 10."""
    inv2 = 1.0 / (x * x)
    term = 1.0 / x
    total = 0.0
    for c in _STIRLING:
        total += c * term
        term *= inv2
    return total


def _lbeta(a: float, b: float) -> float:
    p, q = min(a, b), max(a, b)
    if p >= 10.0:
        corr = _lgammacor(p) + _lgammacor(q) - _lgammacor(p + q)
        return (
            -0.5 * math.log(q)
            + _LN_SQRT_2PI
            + corr
            + (p - 0.5) * math.log(p / (p + q))
            + q * math.log1p(-p / (p + q))
        )
    if q >= 10.0:
        corr = _lgammacor(q) - _lgammacor(p + q)
        return math.lgamma(p) + corr + p - p * math.log(p + q) + (q - 0.5) * math.log1p(-p / (p + q))
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)


_TINY = 1e-300
_EPS = 1e-16


def _betacf(a: float, b: float, x: float, y: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz); y = 1 - x."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, 100_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"betainc continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``y`` may carry ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(y) - _lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x, y) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y, x) / b


def student_t_sf(t: float, df: float) -> float:
    """Two-sided tail P(|T| > |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    if t2 == 0.0:
        return 1.0
    denom = df + t2
    return min(1.0, betainc(df / 2.0, 0.5, df / denom, t2 / denom))


# -- tests --------------------------------------------------------------------

def chi_square_2x2(table, correction: bool = False) -> TestResult:
    """Pearson chi-square for a 2x2 table ``[[a, b], [c, d]]``.

    ``correction`` applies Yates' continuity correction.
    """
    a, b, c, d = _cells(table)
    margins = (a + b, c + d, a + c, b + d)
    if min(margins) <= 0:
        raise ValueError(f"degenerate 2x2 table margins {margins}")
    n = a + b + c + d
    diff = abs(a * d - b * c)
    if correction:
        diff = max(0.0, diff - n / 2.0)
    stat = n * diff * diff / (margins[0] * margins[1] * margins[2] * margins[3])
    return TestResult(stat, chi2_sf_1dof(stat), 1, {"correction_applied": bool(correction)})


def odds_ratio(table, correction: str = "none") -> float:
    """(a d) / (b c); +inf for a zero in b or c, 0 for a zero in a or d.

    ``correction="haldane"`` adds 0.5 to every cell when any cell is zero.
    """
    a, b, c, d = _cells(table)
    if a == b == c == d == 0:
        raise ValueError("odds ratio of an all-zero table")
    if correction not in ("none", "haldane"):
        raise ValueError(f"unknown correction {correction!r}")
    if correction == "haldane" and 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    num, den = a * d, b * c
    if den == 0:
        if num == 0:
            raise ValueError("odds ratio undefined (0/0); use correction='haldane'")
        return math.inf
    return num / den


def geometric_mean(xs: Sequence[float]) -> float:
    xs = list(xs)
    if not xs:
        raise ValueError("geometric mean of an empty sequence")
    if any(not x > 0 for x in xs):
        raise ValueError("geometric mean needs strictly positive values")
    return math.exp(math.fsum(math.log(x) for x in xs) / len(xs))


def point_biserial(values: Sequence[float], groups: Sequence[int | bool]) -> TestResult:
    """Point-biserial r (population SD) with a two-sided t-test p-value."""
    xs = [float(v) for v in values]
    gs = [bool(g) for g in groups]
    n = len(xs)
    if n != len(gs):
        raise ValueError("values and groups differ in length")
    if n < 3:
        raise ValueError("point-biserial needs at least 3 observations")
    ones = [x for x, g in zip(xs, gs) if g]
    zeros = [x for x, g in zip(xs, gs) if not g]
    if not ones or not zeros:
        raise ValueError("point-biserial needs both groups non-empty")
    mean = math.fsum(xs) / n
    sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / n)
    if sd == 0.0:
        raise ValueError("point-biserial undefined for zero variance")
    m1 = math.fsum(ones) / len(ones)
    m0 = math.fsum(zeros) / len(zeros)
    p, q = len(ones) / n, len(zeros) / n
    r = (m1 - m0) / sd * math.sqrt(p * q)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        t = math.copysign(math.inf, r)
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
    return TestResult(r, student_t_sf(t, df), df, {"t": t, "n1": len(ones), "n0": len(zeros)})
