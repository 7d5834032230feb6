"""Exact and asymptotic conformance tests for Benford's law.

The package tests whether a sample of significands follows Benford's law,
with particular power against fabricated data whose first digit was made to
conform on purpose.  It provides the closed-form Benford distributions, the
test statistics, a deterministic Monte Carlo engine for exact p-values
(including truncation- and rounding-robust nulls), samplers for the
fabrication and contamination models, the joint large-sample theory of the
two first-digit quadratic statistics, and study/reporting helpers plus a CLI.
"""

__version__ = "0.1.0"

from .errors import (
    BenfordLabError,
    BudgetError,
    DomainError,
    EmptySample,
    ModelError,
    ParseError,
    ZeroOrNonFinite,
    ZeroValue,
)
from .significand import (
    DEFAULT_K,
    FULL,
    SignificandRecord,
    TruncationProfile,
    as_significands,
    digit_counts_by_position,
    first_digit,
    fractional_significand,
    parse_decimal,
    read_significand_file,
    significand,
)
from .distributions import (
    LOG10_E,
    BenfordMoments,
    benford_cdf,
    chi2_sf,
    conditional_frac_cdf,
    digit_frac_correlation,
    first_digit_pmf,
    frac_cdf,
    frac_pdf,
    gb_cdf,
    gb_frac_cdf,
    joint_cdf,
    mixed_moment,
    moments,
)
from .teststats import (
    BASE_STATISTICS,
    DigitVectorStats,
    digit_stats,
    ks1,
    ks2,
    ku1,
    ku2,
    q1,
    q12,
    q2,
    q_delta,
)
from .generators import (
    FAMILIES,
    ManipulationModel,
    discretize,
    sample_benford,
    sample_contaminated,
    sample_gb,
    sample_manipulated,
)
from .asymptotics import (
    CanonicalStructure,
    canonical_correlations,
    canonical_structure,
    density_t,
    laplace_v,
    qdelta_tail_p,
    sample_v,
)
from .nullmc import (
    ALL_STATISTICS,
    COMBINED_STATISTICS,
    CombinedNull,
    NullCache,
    NullDistribution,
    TestReport,
    asymptotic_p,
    combined_null,
    p_value,
    quantile,
    run_test,
    simulate_null,
    simulate_null_discretized,
)
from .streams import substream
from .studies import (
    PowerStudyConfig,
    StudyReport,
    StudyRow,
    power_study,
    qdelta_conditional,
    qq_pairs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
