"""Scalar special-function and exact-binomial kernel.

Everything here is a pure function of its arguments; the rest of the package
builds its confidence bounds and quantile arithmetic on top of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betainc

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Rational minimax coefficients for the inverse normal CDF (Acklam's
# approximation, |relative error| < 1.15e-9 before refinement).
_ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
           1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
           6.680131188771972e+01, -1.328068155288572e+01)
_ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
           -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01,
           2.445134137142996e+00, 3.754408661907416e+00)
_ICDF_PLOW = 0.02425


@dataclass(frozen=True)
class ConfidenceLevel:
    """One-sided error probability alpha for exact binomial bounds."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


def _as_alpha(alpha) -> float:
    a = alpha.alpha if isinstance(alpha, ConfidenceLevel) else float(alpha)
    if not 0.0 < a < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {a}")
    return a


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF, absolute error below 1e-12."""
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_pdf(z: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def std_normal_inv_cdf(p: float) -> float:
    """Inverse standard normal CDF on (0, 1).

    Rational approximation refined by one Newton step against
    :func:`std_normal_cdf`; the residual |cdf(z) - p| stays below 1e-12.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")

    if p < _ICDF_PLOW:
        q = math.sqrt(-2.0 * math.log(p))
        a0, a1, a2, a3, a4, a5 = _ICDF_C
        b0, b1, b2, b3 = _ICDF_D
        z = (((((a0 * q + a1) * q + a2) * q + a3) * q + a4) * q + a5) / \
            ((((b0 * q + b1) * q + b2) * q + b3) * q + 1.0)
    elif p > 1.0 - _ICDF_PLOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        a0, a1, a2, a3, a4, a5 = _ICDF_C
        b0, b1, b2, b3 = _ICDF_D
        z = -(((((a0 * q + a1) * q + a2) * q + a3) * q + a4) * q + a5) / \
            ((((b0 * q + b1) * q + b2) * q + b3) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        a0, a1, a2, a3, a4, a5 = _ICDF_A
        b0, b1, b2, b3, b4 = _ICDF_B
        z = (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * q / \
            (((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0)

    # Newton refinement.  The residual is formed from the near tail so that no
    # cancellation occurs for p close to 0 or 1 (1 - p is exact for p >= 1/2).
    if p < 0.5:
        resid = 0.5 * math.erfc(-z / _SQRT2) - p
    else:
        resid = (1.0 - p) - 0.5 * math.erfc(z / _SQRT2)
    dens = std_normal_pdf(z)
    if dens > 0.0 and math.isfinite(resid / dens):
        z -= resid / dens
    return z


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return float(betainc(a, b, x))


def binomial_tail_geq(k: int, n: int, p: float) -> float:
    """P(Binomial(n, p) >= k), via the incomplete-beta identity."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    return reg_inc_beta(k, n - k + 1, p)


def clopper_pearson_lower(k: int, n: int, alpha) -> float:
    """Exact one-sided lower confidence bound for a binomial proportion.

    Returns the largest p with P(Binomial(n, p) >= k) <= alpha, i.e. the usual
    exact lower bound reported at confidence 1 - alpha.  Solved by bisection
    on the regularized incomplete beta to 1e-12 in probability.
    """
    a = _as_alpha(alpha)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, n], got k={k}, n={n}")
    if k == 0:
        return 0.0

    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(k, n - k + 1, mid) < a:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
