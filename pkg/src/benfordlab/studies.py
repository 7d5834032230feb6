"""Simulation studies: power and size estimation, QQ data, diagnostics.

A study draws ``runs`` independent datasets from a scenario (a fabrication
model, a contamination mixture, or plain Benford data, optionally
discretized), tests each against Monte Carlo null quantiles, and reports
rejection rates with binomial standard errors.  Rejection uses the same
decision rule as ``run_test``: exact p-value at or below the nominal size.
All randomness is keyed off a single seed, so a study is reproducible from
its reported configuration alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DomainError, ModelError
from .generators import ManipulationModel, discretize_sorted_rows, sample_benford, \
    sample_contaminated, sample_manipulated
from .nullmc import COMBINED_STATISTICS, CombinedNull, _Disc, _closure, \
    _mode_for_kind, _simulate_matrix, _PATH_STUDY
from .significand import DEFAULT_K, TruncationProfile
from .streams import substream
from .teststats import evaluate_batch

__all__ = [
    "PowerStudyConfig",
    "StudyRow",
    "StudyReport",
    "power_study",
    "qq_pairs",
    "qdelta_conditional",
]

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PowerStudyConfig:
    """Configuration of one study.

    ``scenarios`` is a list of dicts: ``{"model": "manipulated", "family":
    "lognormal", "alpha": 0.3}`` (``alpha`` may be a list, expanding to a
    grid), ``{"model": "contaminated", "lambda": 0.05, "family": "gb",
    "alpha": 1.0}``, or ``{"model": "benford"}``.  ``discretization``
    optionally reduces every simulated dataset to ``{"k": 2, "mode":
    "truncate"}`` digits (or per-count ``{"counts": [...], "mode": ...}``);
    ``null`` selects whether critical values come from the plain null or
    from the matching discretized null.
    """

    scenarios: list
    n: int
    runs: int
    gamma: float
    B: int
    seed: int
    statistics: list
    discretization: dict | None = None
    null: str = "plain"  # "plain" or "matched"

    @classmethod
    def from_dict(cls, data: dict) -> "PowerStudyConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown study config keys: {sorted(extra)}")
        missing = {"scenarios", "n", "runs", "gamma", "B", "seed", "statistics"} - set(data)
        if missing:
            raise DomainError(f"study config is missing keys: {sorted(missing)}")
        return cls(**data)


@dataclass(frozen=True)
class StudyRow:
    scenario: str
    statistic: str
    runs: int
    rejections: int
    rate: float
    se: float


@dataclass(frozen=True)
class StudyReport:
    rows: list
    config: dict
    runtime_s: float
    format_version: int = REPORT_FORMAT_VERSION


def _expand_scenarios(scenarios) -> list[tuple[str, dict]]:
    out = []
    for sc in scenarios:
        sc = dict(sc)
        model = sc.get("model", "manipulated")
        alphas = sc.get("alpha")
        if isinstance(alphas, (list, tuple)):
            for a in alphas:
                this = dict(sc, alpha=a)
                out.append((_scenario_label(model, this), this))
        else:
            out.append((_scenario_label(model, sc), sc))
    return out


def _scenario_label(model: str, sc: dict) -> str:
    if model == "benford":
        return "benford"
    fam = sc.get("family", "?")
    alpha = sc.get("alpha")
    base = fam if alpha is None else f"{fam}:{alpha:g}"
    if model == "contaminated":
        return f"contaminated:{sc.get('lambda')!s}:{base}"
    return f"manipulated:{base}"


def _draw_scenario(sc: dict, n: int, rng: np.random.Generator) -> np.ndarray:
    model = sc.get("model", "manipulated")
    if model == "benford":
        return sample_benford(n, rng)
    if model == "manipulated":
        return sample_manipulated(n, ManipulationModel(sc["family"], sc.get("alpha")), rng)
    if model == "contaminated":
        return sample_contaminated(n, sc["lambda"],
                                   ManipulationModel(sc["family"], sc.get("alpha")), rng)
    raise ModelError(f"unknown scenario model {model!r}")


def _study_disc(discretization: dict | None, n: int) -> _Disc | None:
    if discretization is None:
        return None
    mode = discretization.get("mode", "truncate")
    K = discretization.get("K", DEFAULT_K)
    if "k" in discretization:
        profile = TruncationProfile.uniform(n, discretization["k"], K=K)
    elif "counts" in discretization:
        counts = list(discretization["counts"])
        profile = TruncationProfile(counts=tuple(counts), K=K,
                                    n_full=n - int(sum(counts)))
    else:
        raise DomainError("discretization needs a 'k' or a 'counts' entry")
    return _Disc(mode=mode, K=K, kvec=profile.template(), aligned=False)


def power_study(config: PowerStudyConfig, *, workers: int = 1) -> StudyReport:
    """Estimate rejection rates for every (scenario, statistic) pair."""
    t0 = time.time()
    stat_ids = list(config.statistics)
    base_ids = _closure(stat_ids)
    disc = _study_disc(config.discretization, config.n)
    null_disc = disc if (disc is not None and config.null == "matched") else None
    if config.null not in ("plain", "matched"):
        raise DomainError("null must be 'plain' or 'matched'")

    bank = _simulate_matrix(base_ids, config.n, config.B, config.seed,
                            disc=null_disc, workers=workers)
    sorted_bank = {sid: np.sort(v) for sid, v in bank.items()}
    combos = {
        sid: CombinedNull.from_components(
            COMBINED_STATISTICS[sid],
            np.column_stack([bank[c] for c in COMBINED_STATISTICS[sid]]),
            n=config.n, seed=config.seed,
            null_kind="plain" if null_disc is None else "matched",
        )
        for sid in stat_ids if sid in COMBINED_STATISTICS
    }

    rows: list[StudyRow] = []
    for sc_idx, (label, sc) in enumerate(_expand_scenarios(config.scenarios)):
        values = {sid: np.empty(config.runs) for sid in base_ids}
        for r in range(config.runs):
            rng = substream(config.seed, _PATH_STUDY, sc_idx, r)
            S = _draw_scenario(sc, config.n, rng)
            if disc is not None:
                S = np.sort(S)[None, :]
                kvec = rng.permutation(disc.kvec)
                S = discretize_sorted_rows(S, kvec, disc.K, disc.mode)
                S = S[0]
            for sid, v in evaluate_batch(S[None, :], base_ids).items():
                values[sid][r] = v[0]
        for sid in stat_ids:
            if sid in COMBINED_STATISTICS:
                comb = combos[sid]
                c1, c2 = COMBINED_STATISTICS[sid]
                g = np.minimum(
                    _pool_p_vec(comb.pool[:, 0], values[c1]),
                    _pool_p_vec(comb.pool[:, 1], values[c2]),
                )
                p = np.searchsorted(comb.g, g, side="right") / config.B
            else:
                srt = sorted_bank[sid]
                p = (config.B - np.searchsorted(srt, values[sid], side="right")) / config.B
            rej = int(np.sum(p <= config.gamma))
            rate = rej / config.runs
            se = float(np.sqrt(rate * (1.0 - rate) / config.runs))
            rows.append(StudyRow(scenario=label, statistic=sid, runs=config.runs,
                                 rejections=rej, rate=rate, se=se))
    return StudyReport(rows=rows, config=asdict(config), runtime_s=time.time() - t0)


def _pool_p_vec(sorted_ref: np.ndarray, x: np.ndarray) -> np.ndarray:
    ge = len(sorted_ref) - np.searchsorted(sorted_ref, x, side="left")
    return (1.0 + ge) / (len(sorted_ref) + 1.0)


def qq_pairs(sample_fracs: np.ndarray, n: int, B: int, seed: int, *,
             disc: _Disc | None = None, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Empirical vs null quantiles of the fractional significand.

    Returns the sorted observed fractional parts together with the Monte
    Carlo mean of each order statistic under the (possibly discretized)
    Benford null, one pair per sample position.
    """
    empirical = np.sort(np.asarray(sample_fracs, dtype=float))
    if len(empirical) != n:
        raise DomainError("sample size must match n")
    total = np.zeros(n)
    rows = max(1, min(B, (64 << 20) // (8 * n * 4)))
    for lo in range(0, B, rows):
        hi = min(B, lo + rows)
        U = np.empty((hi - lo, n))
        kmat = None
        if disc is not None and not disc.aligned:
            kmat = np.empty((hi - lo, n), dtype=np.int64)
        for b in range(lo, hi):
            rng = substream(seed, b)
            U[b - lo] = rng.random(n)
            if kmat is not None:
                kmat[b - lo] = rng.permutation(disc.kvec)
        S = 10.0**U
        if disc is not None:
            S.sort(axis=1)
            S = discretize_sorted_rows(S, disc.kvec if disc.aligned else kmat,
                                       disc.K, disc.mode)
        frac = np.sort(S - np.floor(S), axis=1)
        total += frac.sum(axis=0)
    return empirical, total / B


def qdelta_conditional(n: int, B: int, seed: int, q1_threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Null replicates of ``qdelta``, marginal and conditional.

    Returns the full replicate vector and the subset from replicates whose
    ``q1`` fell below ``q1_threshold``.  The threshold is a required input;
    pick it for the conditioning of interest (the two distributions agree
    closely in the upper tail).
    """
    vals = _simulate_matrix(["q1", "qdelta"], n, B, seed)
    below = vals["q1"] < q1_threshold
    return vals["qdelta"], vals["qdelta"][below]
