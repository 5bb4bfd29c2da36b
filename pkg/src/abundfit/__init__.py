"""Distribution fitting and ranking for compound-abundance samples."""

from .dataset import AbundanceSample, Corpus, builtin_corpus, parse_corpus, pool
from .families import FAMILY_IDS, Support, cdf, log_likelihood, pdf, quantile, support
from .gof import (
    AggregateRow,
    CombinedTest,
    TestResult,
    ad_test,
    aggregate,
    cs_test,
    fisher_combine,
    gof_table,
    ks_test,
    pooled_test,
    rank_rows,
)
from .mle import FitConfig, FitResult, FitSkipped, fit, fit_all
from .stats import (
    SummaryRow,
    fisher_information,
    lognormal_moments,
    renyi_entropy,
    summarize,
)
from .cluster import (
    Dendrogram,
    FeatureMatrix,
    distance_matrix,
    encode_taxonomy,
    feature_matrix,
    single_linkage,
    to_dot,
    to_newick,
)

__version__ = "0.1.0"
