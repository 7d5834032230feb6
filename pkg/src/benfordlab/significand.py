"""Significand arithmetic and decimal-string parsing.

The significand of a nonzero real ``x`` is the unique number in ``[1, 10)``
obtained by shifting the decimal point of ``|x|``.  Its integer part is the
first significant digit and the remainder (the "fractional significand")
carries the information of every digit after the first one.

Parsing keeps track of how many significant digits were explicitly written,
because trailing zeros are invisible in the numeric value but matter when
matching the truncation/rounding behaviour of recorded data.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySample, ParseError, ZeroOrNonFinite, ZeroValue

__all__ = [
    "FULL",
    "DEFAULT_K",
    "SignificandRecord",
    "TruncationProfile",
    "significand",
    "first_digit",
    "fractional_significand",
    "parse_decimal",
    "read_significand_file",
    "as_significands",
    "digit_counts_by_position",
]

# Sentinel digit count meaning "more than K significant digits"; larger than
# any usable count so comparisons like ``k <= K`` just work.
FULL: int = 2**31 - 1

# Cap on tracked significant digits.  Discretization coarser than this is
# what can realistically distort the tests; beyond it the effect is nil.
DEFAULT_K: int = 6

# Fractional parts of log10 within this distance of 1.0 are the footprint of
# float round trips across a power of ten (e.g. log10(1000) in binary), not of
# values genuinely just below the next decade.
_BOUNDARY_EPS = 1e-12

# Relative snap applied after 10**frac so that exact-decimal inputs get an
# exactly integral significand back (10**log10(2) may land 1 ulp below 2).
_INTEGER_SNAP = 1e-12


def _significand_array(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    frac = np.log10(ax)
    frac -= np.floor(frac)
    frac[frac >= 1.0 - _BOUNDARY_EPS] = 0.0
    s = 10.0**frac
    r = np.rint(s)
    snap = (np.abs(s - r) <= _INTEGER_SNAP * s) & (r <= 9.0)
    s[snap] = r[snap]
    return s


def significand(x):
    """Significand of ``x``: the value in ``[1, 10)`` with the same digits.

    Accepts a scalar or an array; zero and non-finite inputs are rejected.
    Invariant under sign changes and shifts of the decimal point.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        return arr.copy()
    if not np.all(np.isfinite(arr)) or np.any(arr == 0.0):
        raise ZeroOrNonFinite("significand requires finite nonzero input")
    out = _significand_array(np.atleast_1d(arr).astype(float, copy=True))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def first_digit(x):
    """First significant digit of ``x``, an integer in 1..9."""
    s = significand(x)
    if np.ndim(s) == 0:
        return int(s)
    return np.floor(s).astype(np.int64)


def fractional_significand(x):
    """Fractional part of the significand of ``x``, in ``[0, 1)``."""
    s = significand(x)
    if np.ndim(s) == 0:
        return s - int(s)
    return s - np.floor(s)


@dataclass(frozen=True)
class SignificandRecord:
    """One parsed observation.

    ``digit_count`` is the number of significant digits as written (trailing
    zeros in the mantissa count), capped to ``FULL`` when it exceeds the cap
    ``K`` used at parse time.
    """

    significand: float
    first_digit: int
    frac: float
    digit_count: int
    raw: str | None = None

    @property
    def is_full(self) -> bool:
        return self.digit_count == FULL


_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")


def parse_decimal(s: str, K: int = DEFAULT_K) -> SignificandRecord:
    """Parse a decimal string into a :class:`SignificandRecord`.

    The significand is built from the written digits directly, so it is the
    correctly rounded double of the decimal mantissa.  ``digit_count`` runs
    from the first nonzero digit through the last written digit; counts above
    ``K`` collapse to ``FULL``.

    Raises :class:`ParseError` for malformed strings and :class:`ZeroValue`
    when the numeric value is zero.
    """
    text = s.strip()
    if not _NUMBER_RE.match(text):
        raise ParseError(f"not a decimal number: {s!r}")
    mantissa = text.split("e")[0].split("E")[0].lstrip("+-")
    digits = mantissa.replace(".", "")
    stripped = digits.lstrip("0")
    if not stripped:
        raise ZeroValue(f"value is zero: {s!r}")
    count = len(stripped)
    sig = float(stripped[0] + "." + stripped[1:]) if count > 1 else float(stripped)
    d = int(stripped[0])
    return SignificandRecord(
        significand=sig,
        first_digit=d,
        frac=sig - d,
        digit_count=count if count <= K else FULL,
        raw=text,
    )


def read_significand_file(path, K: int = DEFAULT_K) -> list[SignificandRecord]:
    """Read records from a text file, one decimal value per line.

    Blank lines and lines starting with ``#`` are skipped.  Parse failures
    are re-raised with the offending line number.
    """
    records: list[SignificandRecord] = []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                records.append(parse_decimal(text, K=K))
            except (ParseError, ZeroValue) as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from None
    return records


def as_significands(sample) -> np.ndarray:
    """Coerce a sample (records or numbers) to a float array of significands.

    Plain numbers are passed through the significand map, so raw data values
    and already-reduced significands are both accepted.
    """
    if isinstance(sample, np.ndarray) and sample.dtype.kind == "f":
        arr = sample
        if arr.size and (arr.min() < 1.0 or arr.max() >= 10.0):
            arr = significand(arr)
        return np.asarray(arr, dtype=float)
    seq = list(sample) if not isinstance(sample, (list, tuple)) else sample
    if len(seq) == 0:
        raise EmptySample("sample contains no observations")
    if isinstance(seq[0], SignificandRecord):
        return np.array([r.significand for r in seq], dtype=float)
    return as_significands(np.asarray(seq, dtype=float))


def digit_counts_by_position(records: Sequence[SignificandRecord]) -> np.ndarray:
    """Digit counts aligned with the sorted significands of ``records``.

    This is the per-order-statistic truncation pattern consumed by the
    discretized null scheme: entry ``i`` is the digit count of the ``i``-th
    smallest observed significand.
    """
    order = np.argsort([r.significand for r in records], kind="stable")
    return np.array([records[i].digit_count for i in order], dtype=np.int64)


@dataclass(frozen=True)
class TruncationProfile:
    """Counts of observations by number of significant digits.

    ``counts[k-1]`` is the number of observations recorded with exactly
    ``k`` significant digits, for ``k = 1..K``; ``n_full`` counts the rest.
    """

    counts: tuple[int, ...]
    K: int = DEFAULT_K
    n_full: int = 0

    def __post_init__(self):
        if len(self.counts) != self.K:
            raise ValueError("counts must have length K")
        if any(c < 0 for c in self.counts) or self.n_full < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def n(self) -> int:
        return int(sum(self.counts)) + self.n_full

    @property
    def any_discretized(self) -> bool:
        return any(c > 0 for c in self.counts)

    @classmethod
    def from_records(cls, records: Iterable[SignificandRecord], K: int = DEFAULT_K) -> "TruncationProfile":
        counts = [0] * K
        full = 0
        for r in records:
            if r.digit_count <= K:
                counts[r.digit_count - 1] += 1
            else:
                full += 1
        return cls(counts=tuple(counts), K=K, n_full=full)

    @classmethod
    def all_full(cls, n: int, K: int = DEFAULT_K) -> "TruncationProfile":
        return cls(counts=(0,) * K, K=K, n_full=n)

    @classmethod
    def uniform(cls, n: int, k: int, K: int = DEFAULT_K) -> "TruncationProfile":
        """Profile where every observation has exactly ``k`` digits."""
        if not 1 <= k <= K:
            raise ValueError("k must lie in 1..K")
        counts = [0] * K
        counts[k - 1] = n
        return cls(counts=tuple(counts), K=K, n_full=0)

    def template(self) -> np.ndarray:
        """A digit-count vector realizing the profile (order unspecified)."""
        parts = [np.full(c, k, dtype=np.int64) for k, c in enumerate(self.counts, start=1)]
        parts.append(np.full(self.n_full, FULL, dtype=np.int64))
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
