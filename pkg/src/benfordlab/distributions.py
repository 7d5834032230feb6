"""Closed-form distributions and moments under the Benford hypothesis.

Provides the significand law, the first-digit law, the distribution of the
fractional significand (marginal, joint with the first digit, conditional),
mixed moments of digit and fraction, and the Generalized Benford family.
Also builds the mean vectors and covariance matrices of the digit indicator
and digit-sum vectors that the quadratic test statistics are based on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, special

from .errors import DomainError

__all__ = [
    "LOG10_E",
    "BenfordMoments",
    "moments",
    "benford_cdf",
    "first_digit_pmf",
    "frac_cdf",
    "frac_pdf",
    "joint_cdf",
    "conditional_frac_cdf",
    "mixed_moment",
    "digit_frac_correlation",
    "gb_cdf",
    "gb_frac_cdf",
    "chi2_sf",
]

logger = logging.getLogger(__name__)

LOG10_E = math.log10(math.e)

_D = np.arange(1, 10)
_PMF = np.log10((_D + 1) / _D)

# Below this magnitude the Generalized Benford exponent is treated as zero;
# the closed form degenerates to 0/0 there while its limit is the plain law.
_GB_ALPHA_EPS = 1e-8

_MOMENT_CAP = 8  # inner alternating sum loses accuracy for higher orders


def benford_cdf(u):
    """P(significand <= u) under the Benford hypothesis, u in [1, 10)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 1.0) or np.any(arr >= 10.0):
        raise DomainError("significand argument must lie in [1, 10)")
    out = np.log10(arr)
    return float(out) if arr.ndim == 0 else out


def first_digit_pmf(d):
    """P(first digit = d) under the Benford hypothesis, d in 1..9."""
    arr = np.asarray(d)
    if np.any(arr < 1) or np.any(arr > 9) or not np.issubdtype(arr.dtype, np.integer):
        raise DomainError("digit must be an integer in 1..9")
    out = np.log10((arr + 1.0) / arr)
    return float(out) if arr.ndim == 0 else out


def _frac_cdf_unchecked(u: np.ndarray) -> np.ndarray:
    prod = np.ones_like(u)
    for d in range(1, 10):
        prod = prod * (1.0 + u / d)
    return np.log10(prod)


def frac_cdf(u):
    """CDF of the fractional significand under the Benford hypothesis."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError("fractional argument must lie in [0, 1)")
    out = _frac_cdf_unchecked(arr if arr.ndim else arr[None])
    return float(out[0]) if arr.ndim == 0 else out


def frac_pdf(u):
    """Density of the fractional significand; strictly decreasing on [0, 1)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError("fractional argument must lie in [0, 1)")
    shaped = arr if arr.ndim else arr[None]
    out = (LOG10_E / (shaped[..., None] + _D)).sum(axis=-1)
    return float(out[0]) if arr.ndim == 0 else out


def joint_cdf(v, u):
    """Joint CDF of (first digit, fractional significand) at (v, u)."""
    varr = np.asarray(v, dtype=float)
    uarr = np.asarray(u, dtype=float)
    if np.any(varr < 1.0) or np.any(varr >= 10.0):
        raise DomainError("digit argument must lie in [1, 10)")
    if np.any(uarr < 0.0) or np.any(uarr >= 1.0):
        raise DomainError("fractional argument must lie in [0, 1)")
    vb, ub = np.broadcast_arrays(np.atleast_1d(varr), np.atleast_1d(uarr))
    dmax = np.floor(vb)
    terms = np.where(_D <= dmax[..., None], np.log10(1.0 + ub[..., None] / _D), 0.0)
    out = terms.sum(axis=-1)
    if varr.ndim == 0 and uarr.ndim == 0:
        return float(out[0])
    return out.reshape(np.broadcast_shapes(varr.shape, uarr.shape))


def conditional_frac_cdf(u, d: int):
    """CDF of the fractional significand given first digit ``d``."""
    if not 1 <= int(d) <= 9 or int(d) != d:
        raise DomainError("digit must be an integer in 1..9")
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError("fractional argument must lie in [0, 1)")
    out = np.log10(1.0 + arr / d) / _PMF[int(d) - 1]
    return float(out) if arr.ndim == 0 else out


@lru_cache(maxsize=None)
def _digit_power_mean(m: int) -> float:
    """E[(first digit)^m] under the first-digit law."""
    return float(np.sum(_D**m * _PMF))


def mixed_moment(r: int, s: int) -> float:
    """E[(first digit)^r * (fractional significand)^s] under the null.

    Closed form; orders are capped at 8 in each argument because the inner
    alternating sum is numerically fragile beyond that.
    """
    if r < 0 or s < 0 or int(r) != r or int(s) != s:
        raise DomainError("moment orders must be nonnegative integers")
    if r > _MOMENT_CAP or s > _MOMENT_CAP:
        raise DomainError(f"moment orders are capped at {_MOMENT_CAP}")
    if s == 0:
        return 1.0 if r == 0 else _digit_power_mean(r)
    inner = np.zeros(9)
    for j in range(1, s + 1):
        inner += math.comb(s, j) * (-1.0) ** (s - j) * ((1.0 + 1.0 / _D) ** j - 1.0) / j
    return (-1.0) ** s * _digit_power_mean(r + s) + LOG10_E * float(np.sum(_D ** (r + s) * inner))


def digit_frac_correlation() -> float:
    """Correlation between the first digit and the fractional significand."""
    ed = mixed_moment(1, 0)
    es = mixed_moment(0, 1)
    var_d = mixed_moment(2, 0) - ed * ed
    var_s = mixed_moment(0, 2) - es * es
    cov = mixed_moment(1, 1) - ed * es
    return cov / math.sqrt(var_d * var_s)


def gb_cdf(u, alpha: float):
    """Significand CDF of the Generalized Benford family.

    ``alpha = 0`` recovers the plain Benford law; the family is continuous in
    ``alpha`` and tiny exponents are routed through the log form to avoid a
    0/0 evaluation.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 1.0) or np.any(arr >= 10.0):
        raise DomainError("significand argument must lie in [1, 10)")
    if abs(alpha) < _GB_ALPHA_EPS:
        out = np.log10(arr)
    else:
        out = (arr**alpha - 1.0) / (10.0**alpha - 1.0)
    return float(out) if arr.ndim == 0 else out


def gb_frac_cdf(u, alpha: float):
    """CDF of the fractional significand under the Generalized Benford law."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise DomainError("fractional argument must lie in [0, 1)")
    if abs(alpha) < _GB_ALPHA_EPS:
        return frac_cdf(u)
    shaped = arr if arr.ndim else arr[None]
    terms = (shaped[..., None] + _D) ** alpha - _D.astype(float) ** alpha
    out = terms.sum(axis=-1) / (10.0**alpha - 1.0)
    return float(out[0]) if arr.ndim == 0 else out


def chi2_sf(t, df: float):
    """Chi-square survival function via the regularized incomplete gamma."""
    return special.gammaincc(df / 2.0, np.maximum(np.asarray(t, dtype=float), 0.0) / 2.0)


@dataclass(frozen=True)
class BenfordMoments:
    """Null mean vectors and covariances of the digit indicator/sum vectors.

    ``mu1``/``Sigma1`` describe the 8-vector of first-digit indicators
    (digit 9 omitted as redundant); ``mu2``/``Sigma2`` the 9-vector of
    significand sums per digit cell; ``Sigma12`` their cross-covariance.
    Built once and cached: see :func:`moments`.
    """

    p: np.ndarray
    C: float
    mu1: np.ndarray
    mu2: np.ndarray
    Sigma1: np.ndarray
    Sigma2: np.ndarray
    Sigma12: np.ndarray
    Sigma1_inv: np.ndarray = field(repr=False, default=None)
    Sigma2_inv: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls) -> "BenfordMoments":
        p = _PMF.copy()
        C = LOG10_E
        mu1 = p[:8].copy()
        mu2 = np.full(9, C)
        Sigma1 = np.diag(p[:8]) - np.outer(p[:8], p[:8])
        Sigma2 = C * np.diag(_D + 0.5) - C * C
        Sigma12 = np.where(np.eye(8, 9, dtype=bool), C, 0.0) - C * p[:8, None]
        inv1 = _cholesky_inverse(Sigma1)
        inv2 = _cholesky_inverse(Sigma2)
        logger.debug(
            "covariance condition numbers: Sigma1 %.3g, Sigma2 %.3g",
            np.linalg.cond(Sigma1),
            np.linalg.cond(Sigma2),
        )
        for a in (p, mu1, mu2, Sigma1, Sigma2, Sigma12, inv1, inv2):
            a.setflags(write=False)
        return cls(p=p, C=C, mu1=mu1, mu2=mu2, Sigma1=Sigma1, Sigma2=Sigma2,
                   Sigma12=Sigma12, Sigma1_inv=inv1, Sigma2_inv=inv2)


def _cholesky_inverse(M: np.ndarray) -> np.ndarray:
    inv = linalg.cho_solve(linalg.cho_factor(M, lower=True), np.eye(M.shape[0]))
    return (inv + inv.T) / 2.0


@lru_cache(maxsize=1)
def moments() -> BenfordMoments:
    """The cached, immutable null moment structure."""
    return BenfordMoments.build()
