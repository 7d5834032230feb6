"""Test statistics for conformance of a significand sample to Benford's law.

Two groups of statistics are provided.  The first-digit group (``q1``,
``q2``, ``q12``, ``ks1``, ``ku1``) targets departures visible in the leading
digits or the full significand.  The fractional group (``ks2``, ``ku2``,
``q_delta``) looks past the first digit: it is sensitive to fabricated data
whose first digit was deliberately drawn from the Benford law while the
remaining digits were not.

Every statistic is a pure, deterministic, permutation-invariant function of
the sample.  The public functions operate on a single sample; the private
``*_batch`` kernels evaluate whole replicate matrices at once and are the
workhorses of the Monte Carlo null engine.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import LOG10_E, _frac_cdf_unchecked, moments
from .errors import EmptySample
from .significand import FULL, SignificandRecord, as_significands

__all__ = [
    "DigitVectorStats",
    "digit_stats",
    "q1",
    "q2",
    "q12",
    "ks1",
    "ku1",
    "ks2",
    "ku2",
    "q_delta",
    "BASE_STATISTICS",
]

_D = np.arange(1, 10)

# ids of the directly simulated statistics, in evaluation order
BASE_STATISTICS = ("q1", "q2", "q12", "ks1", "ku1", "ks2", "ku2", "qdelta")

# Two-digit cell probabilities log10(1 + 1/(10*d1 + d2)), 90 cells.
_D1 = np.repeat(np.arange(1, 10), 10)
_D2 = np.tile(np.arange(0, 10), 9)
_P12 = np.log10(1.0 + 1.0 / (10.0 * _D1 + _D2))

# Absolute snap before flooring scaled significands, so that decimal values
# stored as doubles (e.g. 1.2 -> 11.999999999999998 after scaling) land in
# the digit cell of their written form.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class DigitVectorStats:
    """Sample digit frequencies and per-digit significand sums.

    ``zbar1`` holds the frequencies of digits 1..8 (digit 9 is redundant),
    ``zbar2`` the per-digit means of ``S * 1[digit = d]`` for d = 1..9, and
    ``counts`` the raw digit counts.
    """

    zbar1: np.ndarray
    zbar2: np.ndarray
    counts: np.ndarray
    n: int


def _digits(S: np.ndarray) -> np.ndarray:
    return np.minimum(np.floor(S).astype(np.int64), 9)


def _second_digits(S: np.ndarray) -> np.ndarray:
    return np.floor(10.0 * S + _FLOOR_EPS).astype(np.int64) - 10 * _digits(S)


def _counts_batch(S: np.ndarray):
    """Digit counts and per-digit significand sums, rows = replicates."""
    m, n = S.shape
    flat = (_digits(S) - 1) + 9 * np.arange(m)[:, None]
    counts = np.bincount(flat.ravel(), minlength=9 * m).reshape(m, 9)
    sums = np.bincount(flat.ravel(), weights=S.ravel(), minlength=9 * m).reshape(m, 9)
    return counts, sums


def _q1_batch(counts: np.ndarray, n: int) -> np.ndarray:
    expected = n * moments().p
    return ((counts - expected) ** 2 / expected).sum(axis=1)


def _q2_batch(sums: np.ndarray, n: int) -> np.ndarray:
    dev = sums / n - LOG10_E
    return n * np.einsum("bi,ij,bj->b", dev, moments().Sigma2_inv, dev)


def _q12_batch(S: np.ndarray) -> np.ndarray:
    m, n = S.shape
    cell = (_digits(S) - 1) * 10 + np.clip(_second_digits(S), 0, 9)
    flat = cell + 90 * np.arange(m)[:, None]
    counts = np.bincount(flat.ravel(), minlength=90 * m).reshape(m, 90)
    expected = n * _P12
    return ((counts - expected) ** 2 / expected).sum(axis=1)


def _ecdf_extremes(t_sorted: np.ndarray):
    """Upper and lower ECDF deviations for rows of sorted probability values."""
    n = t_sorted.shape[1]
    grid = np.arange(1, n + 1) / n
    a = (grid - t_sorted).max(axis=1)
    b = (t_sorted - (grid - 1.0 / n)).max(axis=1)
    return a, b


def _ks_ku1_batch(S: np.ndarray):
    t = np.sort(np.log10(S), axis=1)
    a, b = _ecdf_extremes(t)
    return np.maximum(a, b), a + b


def _ks_ku2_batch(S: np.ndarray):
    u = S - np.floor(S)
    t = np.sort(_frac_cdf_unchecked(u), axis=1)
    a, b = _ecdf_extremes(t)
    return np.maximum(a, b), a + b


def evaluate_batch(S: np.ndarray, ids) -> dict[str, np.ndarray]:
    """Evaluate the requested base statistics on a replicate matrix.

    ``S`` has one sample of significands per row.  ``qdelta`` pulls in
    ``q1`` and ``q2``; only what is needed gets computed.  Rows are sorted
    up front: that canonicalizes the accumulation order (making every
    statistic exactly permutation invariant) and hands the log transform of
    ``ks1``/``ku1`` its order statistics for free.
    """
    wanted = set(ids)
    if "qdelta" in wanted:
        wanted |= {"q1", "q2"}
    S = np.sort(S, axis=1)
    out: dict[str, np.ndarray] = {}
    if wanted & {"q1", "q2"}:
        counts, sums = _counts_batch(S)
        if "q1" in wanted:
            out["q1"] = _q1_batch(counts, S.shape[1])
        if "q2" in wanted:
            out["q2"] = _q2_batch(sums, S.shape[1])
    if "q12" in wanted:
        out["q12"] = _q12_batch(S)
    if wanted & {"ks1", "ku1"}:
        a, b = _ecdf_extremes(np.log10(S))
        out["ks1"], out["ku1"] = np.maximum(a, b), a + b
    if wanted & {"ks2", "ku2"}:
        ks, ku = _ks_ku2_batch(S)
        out["ks2"], out["ku2"] = ks, ku
    if "qdelta" in wanted:
        out["qdelta"] = out["q2"] - out["q1"]
    return {k: out[k] for k in dict.fromkeys(ids)}


def _sample_matrix(sample) -> np.ndarray:
    S = as_significands(sample)
    if S.size == 0:
        raise EmptySample("sample contains no observations")
    return np.sort(S)[None, :]  # canonical order: see evaluate_batch


def digit_stats(sample) -> DigitVectorStats:
    """Digit frequencies and per-digit significand means of a sample."""
    S = _sample_matrix(sample)
    counts, sums = _counts_batch(S)
    n = S.shape[1]
    return DigitVectorStats(
        zbar1=counts[0, :8] / n,
        zbar2=sums[0] / n,
        counts=counts[0],
        n=n,
    )


def q1(stats: DigitVectorStats) -> float:
    """First-digit Pearson statistic (9 cells, equivalently an 8-dim
    quadratic form in the digit frequencies)."""
    expected = stats.n * moments().p
    return float(((stats.counts - expected) ** 2 / expected).sum())


def q2(stats: DigitVectorStats) -> float:
    """Quadratic-form statistic in the per-digit significand means, built on
    the sum-invariance property of the Benford law."""
    dev = stats.zbar2 - LOG10_E
    return float(stats.n * dev @ moments().Sigma2_inv @ dev)


def q_delta(stats: DigitVectorStats) -> float:
    """Difference ``q2 - q1``; may be negative.

    Looks past the first digit: its upper null tail tracks a chi-square with
    one degree of freedom.
    """
    return q2(stats) - q1(stats)


def q12(sample) -> float:
    """Two-digit Pearson statistic on the 90 first-two-digit cells.

    Observations recorded with a single significant digit contribute second
    digit 0, which is how a truncated value reads; a warning is emitted when
    such records are present.
    """
    if not isinstance(sample, np.ndarray):
        seq = list(sample)
        if seq and isinstance(seq[0], SignificandRecord):
            n_single = sum(1 for r in seq if r.digit_count == 1)
            if n_single:
                warnings.warn(
                    f"{n_single} record(s) carry a single significant digit; "
                    "their second digit is taken as 0",
                    stacklevel=2,
                )
        sample = seq
    return float(_q12_batch(_sample_matrix(sample))[0])


def ks1(sample) -> float:
    """Kolmogorov-Smirnov distance of log10 significands from uniformity."""
    return float(_ks_ku1_batch(_sample_matrix(sample))[0][0])


def ku1(sample) -> float:
    """Kuiper statistic of log10 significands; invariant under rescaling of
    the underlying data."""
    return float(_ks_ku1_batch(_sample_matrix(sample))[1][0])


def ks2(sample) -> float:
    """Kolmogorov-Smirnov statistic of the fractional significands, measured
    through their null CDF."""
    return float(_ks_ku2_batch(_sample_matrix(sample))[0][0])


def ku2(sample) -> float:
    """Kuiper statistic of the fractional significands."""
    return float(_ks_ku2_batch(_sample_matrix(sample))[1][0])


def quadratic_form_q1(stats: DigitVectorStats) -> float:
    """The 8-dimensional quadratic form equal to :func:`q1`; kept as an
    independent evaluation path for validation."""
    dev = stats.zbar1 - moments().mu1
    return float(stats.n * dev @ moments().Sigma1_inv @ dev)
