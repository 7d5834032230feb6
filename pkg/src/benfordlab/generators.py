"""Samplers for the Benford null, fabrication models, and discretization.

The fabrication model of interest pairs a first digit drawn exactly from the
first-digit law with a fractional significand taken from an independent
draw of some other distribution.  Such samples pass any first-digit test by
construction while the joint digit structure is wrong.  A classical mixture
contamination sampler and the Generalized Benford family are also provided.

All samplers take an explicit :class:`numpy.random.Generator`.  Where a
sampler needs several independent streams (digits vs fractions) it spawns
children from the supplied generator, so construct generators from a seed
sequence (``numpy.random.default_rng`` or :func:`benfordlab.streams.substream`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import _GB_ALPHA_EPS, first_digit_pmf
from .errors import DomainError, ModelError
from .significand import significand

__all__ = [
    "ManipulationModel",
    "sample_benford",
    "sample_manipulated",
    "sample_contaminated",
    "sample_gb",
    "discretize",
    "FAMILIES",
]

FAMILIES = ("benford", "lognormal", "weibull", "uniform", "gb")

_DIGIT_CDF = np.cumsum([first_digit_pmf(d) for d in range(1, 10)])


@dataclass(frozen=True)
class ManipulationModel:
    """Distribution family feeding the fractional part of fabricated values.

    Shape conventions: ``lognormal`` uses log-scale standard deviation
    ``alpha`` with median 1; ``weibull`` uses shape ``alpha`` with scale 1;
    ``uniform`` is uniform on ``[0, alpha)``; ``gb`` is Generalized Benford
    with exponent ``alpha`` (any real); ``benford`` takes no parameter.
    """

    family: str
    alpha: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family == "benford":
            if self.alpha is not None:
                raise ModelError("the benford family takes no parameter")
        elif self.family == "gb":
            if self.alpha is None:
                raise ModelError("gb requires a real exponent")
        else:
            if self.alpha is None or not self.alpha > 0:
                raise ModelError(f"{self.family} requires a positive shape parameter")

    @classmethod
    def parse(cls, text: str) -> "ManipulationModel":
        """Parse ``"family"`` or ``"family:alpha"``, e.g. ``"lognormal:0.3"``."""
        parts = text.split(":")
        if len(parts) == 1:
            return cls(family=parts[0])
        if len(parts) == 2:
            try:
                alpha = float(parts[1])
            except ValueError:
                raise ModelError(f"bad parameter in model spec {text!r}") from None
            return cls(family=parts[0], alpha=alpha)
        raise ModelError(f"bad model spec {text!r}")

    def label(self) -> str:
        return self.family if self.alpha is None else f"{self.family}:{self.alpha:g}"


def sample_benford(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. Benford significands, 10 to a uniform power."""
    return 10.0 ** rng.random(n)


def sample_gb(alpha: float, rng: np.random.Generator, size=None):
    """Generalized Benford significand draws by CDF inversion."""
    u = rng.random(size)
    if abs(alpha) < _GB_ALPHA_EPS:
        return 10.0**u
    return (1.0 + (10.0**alpha - 1.0) * u) ** (1.0 / alpha)


def _family_draw(model: ManipulationModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if model.family == "benford":
        return sample_benford(n, rng)
    if model.family == "gb":
        return sample_gb(model.alpha, rng, n)
    if model.family == "lognormal":
        return rng.lognormal(mean=0.0, sigma=model.alpha, size=n)
    if model.family == "weibull":
        x = rng.weibull(model.alpha, size=n)
    else:  # uniform on [0, alpha)
        x = model.alpha * rng.random(n)
    # a drawn zero has no significand (probability zero, floats permitting)
    while np.any(x == 0.0):
        bad = x == 0.0
        redraw = rng.weibull(model.alpha, int(bad.sum())) if model.family == "weibull" else model.alpha * rng.random(int(bad.sum()))
        x[bad] = redraw
    return x


def sample_manipulated(n: int, model: ManipulationModel, rng: np.random.Generator) -> np.ndarray:
    """Fabricated significands: Benford first digit, model-driven fraction.

    The digit stream and the fraction stream consume disjoint child streams
    of ``rng``, so the two components are independent by construction.
    """
    if n < 1:
        raise ModelError("n must be at least 1")
    digit_rng, frac_rng = rng.spawn(2)
    digits = 1 + np.searchsorted(_DIGIT_CDF, digit_rng.random(n), side="right")
    draws = _family_draw(model, n, frac_rng)
    s = draws if model.family in ("benford", "gb") else significand(draws)
    return digits + (s - np.floor(s))


def sample_contaminated(
    n: int, lam: float, contaminant: ManipulationModel, rng: np.random.Generator
) -> np.ndarray:
    """Mixture contamination: each observation is Benford with probability
    ``1 - lam``, otherwise the significand of a contaminant draw."""
    if not 0.0 <= lam <= 1.0:
        raise ModelError("contamination rate must lie in [0, 1]")
    if n < 1:
        raise ModelError("n must be at least 1")
    if lam == 0.0:
        return sample_benford(n, rng)
    if lam == 1.0:
        draws = _family_draw(contaminant, n, rng)
        return draws if contaminant.family in ("benford", "gb") else significand(draws)
    mask_rng, good_rng, bad_rng = rng.spawn(3)
    out = sample_benford(n, good_rng)
    bad = mask_rng.random(n) < lam
    if np.any(bad):
        draws = _family_draw(contaminant, int(bad.sum()), bad_rng)
        out[bad] = draws if contaminant.family in ("benford", "gb") else significand(draws)
    return out


def discretize(s, k: int, mode: str = "truncate"):
    """Reduce significand(s) to ``k`` significant digits.

    ``truncate`` drops the trailing digits; ``round`` rounds half away from
    zero and clamps an overflow to the largest ``k``-digit significand (for
    example 9.9999 rounded to two digits gives 9.9, not 10).  Idempotent.
    """
    if int(k) != k or not 1 <= k <= 15:
        raise DomainError("digit count k must be an integer in 1..15")
    if mode not in ("truncate", "round"):
        raise DomainError("mode must be 'truncate' or 'round'")
    arr = np.asarray(s, dtype=float)
    scale = 10.0 ** (k - 1)
    if mode == "truncate":
        # the small bump keeps floor stable across the float round trip
        # m/scale*scale, which can land a hair below the integer m
        out = np.floor(arr * scale + 1e-9) / scale
    else:
        out = np.floor(arr * scale + 0.5) / scale
    # inputs within a bump of 10 must clamp to the top k-digit value
    out = np.minimum(out, 10.0 - 1.0 / scale)
    return float(out) if arr.ndim == 0 else out


def discretize_sorted_rows(S: np.ndarray, kvec: np.ndarray, K: int, mode: str) -> np.ndarray:
    """Discretize each row of sorted significands position by position.

    ``kvec`` holds one digit count per sorted position (a single vector, or
    one row per replicate); positions with counts above ``K`` pass through.
    Used by the discretized-null scheme.
    """
    kmat = np.broadcast_to(kvec, S.shape)
    active = kmat <= K
    scale = np.where(active, 10.0 ** (np.where(active, kmat, 1) - 1.0), 1.0)
    if mode == "truncate":
        disc = np.floor(S * scale + 1e-9) / scale
    elif mode == "round":
        disc = np.floor(S * scale + 0.5) / scale
    else:
        raise DomainError("mode must be 'truncate' or 'round'")
    disc = np.minimum(disc, 10.0 - 1.0 / scale)
    return np.where(active, disc, S)
