"""Monte Carlo estimation of exact null distributions and p-values.

Replicate ``b`` of a null simulation is generated from the substream keyed by
``(seed, b)``: a sample of ``n`` Benford significands (10 to a uniform
power), optionally discretized to match an observed truncation or rounding
pattern, on which the requested statistics are evaluated.  Because each
replicate owns its substream, results are bit-identical for any number of
workers and any block size; the heavy math is still vectorized over blocks
of replicates.

The discretized null follows the observed data: sort the simulated sample,
then reduce its ``i``-th order statistic to the digit count recorded for the
``i``-th smallest observed significand.  When only per-count totals are known
(no position information), digit counts are assigned to sorted positions by a
fresh random permutation in each replicate.

Combined statistics (``gks``, ``gku``) take the minimum of the two component
p-values, each measured against the pooled empirical distribution of its own
replicates; small values reject, and the combined test needs no further
multiplicity correction because its own null distribution is simulated.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import chi2_sf
from .asymptotics import qdelta_tail_p
from .errors import BudgetError, DomainError, EmptySample
from .generators import discretize_sorted_rows
from .significand import (
    DEFAULT_K,
    FULL,
    SignificandRecord,
    TruncationProfile,
    as_significands,
    digit_counts_by_position,
)
from .streams import substream
from .teststats import BASE_STATISTICS, evaluate_batch

__all__ = [
    "COMBINED_STATISTICS",
    "ALL_STATISTICS",
    "NullDistribution",
    "CombinedNull",
    "TestReport",
    "simulate_null",
    "simulate_null_discretized",
    "combined_null",
    "p_value",
    "quantile",
    "run_test",
    "NullCache",
    "asymptotic_p",
]

COMBINED_STATISTICS = {"gks": ("ks2", "qdelta"), "gku": ("ku2", "qdelta")}
ALL_STATISTICS = BASE_STATISTICS + tuple(COMBINED_STATISTICS)

_ASYMPTOTIC_DF = {"q1": 8.0, "q2": 9.0, "q12": 89.0}

DEFAULT_MAX_BLOCK_BYTES = 128 << 20

# spawn-path prefixes; replicate b of the main pool uses the bare path (b,)
_PATH_POOL2 = 1
_PATH_JITTER = 2
_PATH_STUDY = 3

_CACHE_FORMAT = 1


@dataclass(frozen=True)
class _Disc:
    """Internal discretization request for the null engine."""

    mode: str  # "truncate" | "round"
    K: int
    kvec: np.ndarray = field(repr=False)  # per sorted position, or template
    aligned: bool  # template is permuted per replicate when False

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.mode}:{self.K}:{int(self.aligned)}:".encode())
        h.update(np.ascontiguousarray(self.kvec, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]

    @property
    def active(self) -> bool:
        return bool(np.any(self.kvec <= self.K))


def _mode_for_kind(null_kind: str) -> str:
    return {"truncated": "truncate", "rounded": "round"}[null_kind]


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Sorted Monte Carlo replicates of one statistic under a Benford null.

    ``tail`` records the rejection direction: large values reject for the
    plain statistics, small values for the combined min-p statistics.
    """

    stat_id: str
    replicates: np.ndarray = field(repr=False)
    B: int
    n: int
    null_kind: str
    seed: int
    tail: str = "upper"
    profile_digest: str = ""

    def __post_init__(self):
        if len(self.replicates) != self.B:
            raise ValueError("replicate vector length must equal B")


@dataclass(frozen=True, eq=False)
class CombinedNull:
    """Joint replicates of a min-p combined statistic.

    ``components`` holds the two component statistics per replicate (both
    evaluated on the same simulated sample); ``g`` the sorted combined
    replicates.  Component p-values use the smoothed pooled estimator
    ``(1 + #{>= t}) / (B + 1)`` so the minimum can never be exactly zero.
    """

    ids: tuple[str, str]
    components: np.ndarray = field(repr=False)  # (B, 2), replicate order
    g: np.ndarray = field(repr=False)  # sorted ascending
    pool: np.ndarray = field(repr=False)  # (B, 2) sorted per column
    B: int
    n: int
    null_kind: str
    seed: int
    profile_digest: str = ""

    @classmethod
    def from_components(cls, ids, components, *, n=0, seed=0, null_kind="plain",
                        pool_components=None, profile_digest=""):
        components = np.asarray(components, dtype=float)
        B = components.shape[0]
        pool = np.sort(pool_components if pool_components is not None else components, axis=0)
        p = np.column_stack(
            [_pooled_p(pool[:, j], components[:, j]) for j in range(2)]
        )
        g = np.sort(p.min(axis=1))
        return cls(ids=tuple(ids), components=components, g=g, pool=pool, B=B,
                   n=n, null_kind=null_kind, seed=seed, profile_digest=profile_digest)

    def observed_g(self, values: dict[str, float]) -> float:
        """Map observed component statistics to the combined scale."""
        ps = [float(_pooled_p(self.pool[:, j], np.array([values[sid]]))[0])
              for j, sid in enumerate(self.ids)]
        return min(ps)

    def p_value(self, g: float) -> float:
        return float(np.searchsorted(self.g, g, side="right")) / self.B

    def p_value_smoothed(self, g: float) -> float:
        return (1.0 + float(np.searchsorted(self.g, g, side="right"))) / (self.B + 1.0)

    def critical_value(self, gamma: float) -> float:
        _check_gamma(gamma)
        return float(self.g[int(np.ceil(gamma * self.B)) - 1])


def _pooled_p(sorted_ref: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Smoothed upper-tail p of x against a sorted replicate pool."""
    ge = len(sorted_ref) - np.searchsorted(sorted_ref, x, side="left")
    return (1.0 + ge) / (len(sorted_ref) + 1.0)


def _check_gamma(gamma: float):
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie strictly between 0 and 1")


def p_value(nd, t: float) -> float:
    """Monte Carlo exact p-value of an observed statistic ``t``.

    For plain statistics this is the fraction of replicates strictly greater
    than ``t``; for combined nulls the fraction at or below ``t`` (small
    values reject there).
    """
    if isinstance(nd, CombinedNull):
        return nd.p_value(t)
    return float(nd.B - np.searchsorted(nd.replicates, t, side="right")) / nd.B


def quantile(nd, gamma: float) -> float:
    """Critical value at size ``gamma``.

    Upper-tail order statistic at rank ``ceil((1 - gamma) * B)`` for plain
    statistics; the matching lower-tail order statistic for combined nulls.
    """
    if isinstance(nd, CombinedNull):
        return nd.critical_value(gamma)
    _check_gamma(gamma)
    rank = int(np.ceil((1.0 - gamma) * nd.B))
    return float(nd.replicates[max(rank, 1) - 1])


def _closure(ids) -> list[str]:
    base: list[str] = []
    for sid in ids:
        members = COMBINED_STATISTICS.get(sid, (sid,))
        for m in members:
            if m not in BASE_STATISTICS:
                raise DomainError(f"unknown statistic id {m!r}")
            if m not in base:
                base.append(m)
    return base


def _simulate_matrix(ids, n: int, B: int, seed: int, *, disc: _Disc | None = None,
                     path_prefix: tuple[int, ...] = (), workers: int = 1,
                     max_block_bytes: int = DEFAULT_MAX_BLOCK_BYTES) -> dict[str, np.ndarray]:
    """Replicate-order matrices of base statistics under the (possibly
    discretized) Benford null.  Deterministic in (seed, path_prefix) only."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if B < 1:
        raise DomainError("B must be at least 1")
    base = _closure(ids)
    row_bytes = 8 * n * 6  # uniform draws, powers, sorts and scratch
    if row_bytes > max_block_bytes:
        raise BudgetError(
            f"one replicate of size n={n} needs {row_bytes} workspace bytes, "
            f"over the {max_block_bytes}-byte ceiling"
        )
    rows = max(1, min(B, max_block_bytes // row_bytes))
    out = {sid: np.empty(B) for sid in base}
    use_disc = disc is not None and disc.active

    def fill(lo: int, hi: int):
        U = np.empty((hi - lo, n))
        kmat = None
        if use_disc and not disc.aligned:
            kmat = np.empty((hi - lo, n), dtype=np.int64)
        for b in range(lo, hi):
            rng = substream(seed, *path_prefix, b)
            U[b - lo] = rng.random(n)
            if kmat is not None:
                kmat[b - lo] = rng.permutation(disc.kvec)
        S = 10.0**U
        if use_disc:
            S.sort(axis=1)
            S = discretize_sorted_rows(S, disc.kvec if disc.aligned else kmat, disc.K, disc.mode)
        for sid, v in evaluate_batch(S, base).items():
            out[sid][lo:hi] = v

    spans = [(lo, min(lo + rows, B)) for lo in range(0, B, rows)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda span: fill(*span), spans))
    else:
        for span in spans:
            fill(*span)
    return out


def simulate_null(stat_id: str, n: int, B: int, seed: int, *, workers: int = 1,
                  max_block_bytes: int = DEFAULT_MAX_BLOCK_BYTES) -> NullDistribution:
    """Simulate the plain Benford null distribution of one statistic."""
    if stat_id in COMBINED_STATISTICS:
        raise DomainError("use combined_null for min-p statistics")
    vals = _simulate_matrix([stat_id], n, B, seed, workers=workers,
                            max_block_bytes=max_block_bytes)[stat_id]
    return NullDistribution(stat_id=stat_id, replicates=np.sort(vals), B=B, n=n,
                            null_kind="plain", seed=seed)


def _disc_from_inputs(profile: TruncationProfile | None, k_by_position, mode: str) -> _Disc:
    if mode not in ("truncate", "round"):
        raise DomainError("mode must be 'truncate' or 'round'")
    if k_by_position is not None:
        kvec = np.asarray(k_by_position, dtype=np.int64)
        K = profile.K if profile is not None else DEFAULT_K
        return _Disc(mode=mode, K=K, kvec=kvec, aligned=True)
    if profile is None:
        raise DomainError("either a profile or a position-aligned digit-count vector is required")
    return _Disc(mode=mode, K=profile.K, kvec=profile.template(), aligned=False)


def simulate_null_discretized(stat_id: str, profile: TruncationProfile, mode: str,
                              B: int, seed: int, *, k_by_position=None, workers: int = 1,
                              max_block_bytes: int = DEFAULT_MAX_BLOCK_BYTES) -> NullDistribution:
    """Simulate the null of one statistic under truncation or rounding.

    Pass ``k_by_position`` (digit counts aligned with the sorted observed
    significands) to reproduce the observed pattern exactly; with only a
    count profile, positions are assigned randomly per replicate.
    """
    if stat_id in COMBINED_STATISTICS:
        raise DomainError("use combined_null for min-p statistics")
    disc = _disc_from_inputs(profile, k_by_position, mode)
    n = profile.n if profile is not None else len(disc.kvec)
    if len(disc.kvec) != n:
        raise DomainError("digit-count vector length must match the profile size")
    vals = _simulate_matrix([stat_id], n, B, seed, disc=disc, workers=workers,
                            max_block_bytes=max_block_bytes)[stat_id]
    kind = "truncated" if mode == "truncate" else "rounded"
    return NullDistribution(stat_id=stat_id, replicates=np.sort(vals), B=B, n=n,
                            null_kind=kind, seed=seed, profile_digest=disc.digest())


def combined_null(ids, n: int, B: int, seed: int, null_kind: str = "plain", *,
                  profile: TruncationProfile | None = None, k_by_position=None,
                  independent_pool: bool = False, workers: int = 1,
                  max_block_bytes: int = DEFAULT_MAX_BLOCK_BYTES) -> CombinedNull:
    """Simulate the joint null of a pair of statistics and their min-p combo.

    Both components are evaluated on the same simulated sample in every
    replicate.  ``independent_pool=True`` measures the component p-values
    against a second, independently seeded pool (a bias check; the default
    plug-in pool is what the exact test uses).
    """
    ids = tuple(ids)
    if len(ids) != 2:
        raise DomainError("combined statistics take exactly two component ids")
    disc = None
    digest = ""
    if null_kind in ("truncated", "rounded"):
        disc = _disc_from_inputs(profile, k_by_position, _mode_for_kind(null_kind))
        digest = disc.digest()
    elif null_kind != "plain":
        raise DomainError("null_kind must be plain, truncated or rounded")
    vals = _simulate_matrix(ids, n, B, seed, disc=disc, workers=workers,
                            max_block_bytes=max_block_bytes)
    components = np.column_stack([vals[ids[0]], vals[ids[1]]])
    pool_components = None
    if independent_pool:
        vals2 = _simulate_matrix(ids, n, B, seed, disc=disc, workers=workers,
                                 path_prefix=(_PATH_POOL2,),
                                 max_block_bytes=max_block_bytes)
        pool_components = np.column_stack([vals2[ids[0]], vals2[ids[1]]])
    return CombinedNull.from_components(ids, components, n=n, seed=seed,
                                        null_kind=null_kind,
                                        pool_components=pool_components,
                                        profile_digest=digest)


def asymptotic_p(stat_id: str, value: float) -> float | None:
    """Large-sample p-value where one exists (chi-square tails)."""
    if stat_id == "qdelta":
        return float(qdelta_tail_p(value))
    df = _ASYMPTOTIC_DF.get(stat_id)
    if df is None:
        return None
    return float(chi2_sf(value, df))


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistic applied to one sample."""

    stat_id: str
    value: float
    p_value: float | None
    p_value_smoothed: float | None
    p_asymptotic: float | None
    B: int
    gamma: float
    decision: str
    null_kind: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "statistic": self.stat_id,
            "value": self.value,
            "p_value": self.p_value,
            "p_value_smoothed": self.p_value_smoothed,
            "p_asymptotic": self.p_asymptotic,
            "B": self.B,
            "gamma": self.gamma,
            "decision": self.decision,
            "null_kind": self.null_kind,
            "seed": self.seed,
        }


def _apply_jitter(records, seed: int) -> np.ndarray:
    """Break discretization ties by adding half-ulp uniform noise at each
    record's digit count (seeded; FULL records untouched)."""
    rng = substream(seed, _PATH_JITTER, 0)
    out = np.array([r.significand for r in records], dtype=float)
    for i, r in enumerate(records):
        if r.digit_count != FULL:
            out[i] += rng.uniform(0.0, 0.5 * 10.0 ** (1 - r.digit_count))
    return out


def run_test(sample, stat_ids, B: int, seed: int, null_kind: str = "auto", *,
             gamma: float = 0.01, K: int = DEFAULT_K, jitter: bool = False,
             workers: int = 1, cache: "NullCache | None" = None,
             max_block_bytes: int = DEFAULT_MAX_BLOCK_BYTES) -> list[TestReport]:
    """Run the requested statistics on a sample and report exact p-values.

    ``null_kind='auto'`` selects the truncated null whenever the sample
    records any digit count at or below ``K``, otherwise the plain null.
    With ``B == 0`` only the chi-square asymptotics are reported, and the
    statistics without an asymptotic law are rejected.
    """
    _check_gamma(gamma)
    records = None
    if not isinstance(sample, np.ndarray):
        seq = list(sample)
        if seq and isinstance(seq[0], SignificandRecord):
            records = seq
        sample = seq
    if records is not None:
        profile = TruncationProfile.from_records(records, K=K)
        kvec = digit_counts_by_position(records)
        S = _apply_jitter(records, seed) if jitter else np.array([r.significand for r in records])
    else:
        S = as_significands(sample)
        profile = TruncationProfile.all_full(len(S), K=K)
        kvec = np.full(len(S), FULL, dtype=np.int64)
    n = len(S)
    if n == 0:
        raise EmptySample("sample contains no observations")

    if null_kind == "auto":
        null_kind = "truncated" if profile.any_discretized else "plain"
    if null_kind not in ("plain", "truncated", "rounded"):
        raise DomainError("null_kind must be auto, plain, truncated or rounded")

    stat_ids = list(stat_ids)
    for sid in stat_ids:
        if sid not in ALL_STATISTICS:
            raise DomainError(f"unknown statistic id {sid!r}")
    if "q12" in stat_ids and records is not None:
        n_single = sum(1 for r in records if r.digit_count == 1)
        if n_single:
            warnings.warn(
                f"{n_single} record(s) carry a single significant digit; "
                "q12 takes their second digit as 0",
                stacklevel=2,
            )

    observed = evaluate_batch(S[None, :], _closure(stat_ids))
    observed = {sid: float(v[0]) for sid, v in observed.items()}

    if B == 0:
        reports = []
        for sid in stat_ids:
            if sid in COMBINED_STATISTICS or asymptotic_p(sid, 0.0) is None:
                raise DomainError(f"{sid} has no asymptotic fallback; set B > 0")
            value = observed[sid]
            pa = asymptotic_p(sid, value)
            reports.append(TestReport(stat_id=sid, value=value, p_value=None,
                                      p_value_smoothed=None, p_asymptotic=pa, B=0,
                                      gamma=gamma, decision="reject" if pa <= gamma else "retain",
                                      null_kind="plain", seed=seed))
        return reports

    disc = None
    if null_kind in ("truncated", "rounded"):
        disc = _disc_from_inputs(profile, kvec, _mode_for_kind(null_kind))
    bank = _null_bank(_closure(stat_ids), n, B, seed, null_kind, disc, cache,
                      workers, max_block_bytes)

    reports: list[TestReport] = []
    for sid in stat_ids:
        if sid in COMBINED_STATISTICS:
            comb = CombinedNull.from_components(
                COMBINED_STATISTICS[sid],
                np.column_stack([bank[c] for c in COMBINED_STATISTICS[sid]]),
                n=n, seed=seed, null_kind=null_kind,
                profile_digest=disc.digest() if disc is not None else "")
            g = comb.observed_g(observed)
            p = comb.p_value(g)
            ps = comb.p_value_smoothed(g)
            value, pa = g, None
        else:
            value = observed[sid]
            srt = np.sort(bank[sid])
            p = float(B - np.searchsorted(srt, value, side="right")) / B
            ps = float(_pooled_p(srt, np.array([value]))[0])
            pa = asymptotic_p(sid, value)
        reports.append(TestReport(stat_id=sid, value=float(value), p_value=p,
                                  p_value_smoothed=ps, p_asymptotic=pa, B=B,
                                  gamma=gamma,
                                  decision="reject" if p <= gamma else "retain",
                                  null_kind=null_kind, seed=seed))
    return reports


def _null_bank(base_ids, n, B, seed, null_kind, disc, cache, workers, max_block_bytes):
    """Replicate-order base-statistic vectors, through the cache if one is given."""
    digest = disc.digest() if disc is not None else ""
    if cache is not None:
        cached = {sid: cache.load(sid, n, B, seed, null_kind, digest) for sid in base_ids}
        if all(v is not None for v in cached.values()):
            return cached
    bank = _simulate_matrix(base_ids, n, B, seed, disc=disc, workers=workers,
                            max_block_bytes=max_block_bytes)
    if cache is not None:
        for sid, vec in bank.items():
            cache.save(sid, n, B, seed, null_kind, digest, vec)
    return bank


class NullCache:
    """Directory cache of replicate vectors keyed by the full simulation
    recipe (statistic, n, B, seed, null kind, discretization digest).

    Files are ``.npz`` archives holding the replicate-order vector plus a
    JSON metadata record; the format is versioned and mismatches are treated
    as misses.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, meta: dict) -> Path:
        key = hashlib.sha256(json.dumps(meta, sort_keys=True).encode()).hexdigest()[:16]
        return self.directory / (
            f"{meta['stat']}_n{meta['n']}_B{meta['B']}_s{meta['seed']}_{key}.npz"
        )

    @staticmethod
    def _meta(stat, n, B, seed, null_kind, digest) -> dict:
        return {"format": _CACHE_FORMAT, "stat": stat, "n": int(n), "B": int(B),
                "seed": int(seed), "null_kind": null_kind, "profile_digest": digest}

    def load(self, stat, n, B, seed, null_kind, digest="") -> np.ndarray | None:
        meta = self._meta(stat, n, B, seed, null_kind, digest)
        path = self._path(meta)
        if not path.exists():
            return None
        with np.load(path, allow_pickle=False) as z:
            stored = json.loads(str(z["meta"]))
            if stored != meta:
                return None
            return z["replicates"].copy()

    def save(self, stat, n, B, seed, null_kind, digest, replicates: np.ndarray):
        meta = self._meta(stat, n, B, seed, null_kind, digest)
        np.savez(self._path(meta), replicates=np.asarray(replicates, dtype=float),
                 meta=np.array(json.dumps(meta)))
