"""Goodness-of-fit battery and combined-significance scoring.

Per sample, three tests are run against a fitted model under the
fully-specified null (no correction for estimated parameters):

* Kolmogorov-Smirnov, exact small-sample p-value via the Marsaglia-Tsang-Wang
  matrix method for n <= 140, the asymptotic Kolmogorov series beyond;
* Anderson-Darling, p-value from the asymptotic distribution of A^2
  (Marsaglia & Marsaglia rational approximations, |error| < 2e-6);
* Pearson chi-square over equal-probability bins, k = round(1 + log2 n)
  bins, k - 1 degrees of freedom, excluded for samples with n < 10.

Per family, p-values are pooled across samples with the one-sided
combination S = sum(-ln p) referred to a chi-square with k degrees of
freedom; the three pooled p-values are combined the same way (k = 3) into
the final score used for rejection and ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from . import families, mle
from .dataset import AbundanceSample, Corpus

CS_MIN_N = 10
REJECTION_LEVEL = 0.01

_KS_EXACT_MAX_N = 140


# --------------------------------------------------------------------------
# Null distributions


def kolmogorov_sf(n: int, d: float) -> float:
    """P(D_n >= d) for the two-sided Kolmogorov-Smirnov statistic.

    Exact (Marsaglia-Tsang-Wang matrix method) for n <= 140, asymptotic
    Kolmogorov series evaluated at sqrt(n)*d for larger n.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    if d <= 0.0:
        return 1.0
    if d >= 1.0:
        return 0.0
    if n <= _KS_EXACT_MAX_N:
        return min(1.0, max(0.0, 1.0 - _ks_cdf_exact(n, d)))
    return _kolmogorov_asymptotic_sf(math.sqrt(n) * d)


def _ks_cdf_exact(n: int, d: float) -> float:
    """P(D_n < d) via the Marsaglia-Tsang-Wang H-matrix power method."""
    if d <= 1.0 / (2.0 * n):
        return 0.0
    k = int(math.ceil(n * d))
    h = k - n * d
    m = 2 * k - 1
    H = np.zeros((m, m))
    for i in range(m):
        for j in range(min(i + 2, m)):
            H[i, j] = 1.0
    for i in range(m):
        H[i, 0] -= h ** (i + 1)
        H[m - 1, i] -= h ** (m - i)
    if 2.0 * h - 1.0 > 0.0:
        H[m - 1, 0] += (2.0 * h - 1.0) ** m
    for i in range(m):
        for j in range(min(i + 2, m)):
            for g in range(1, i - j + 2):
                H[i, j] /= g

    def rescale(mat, exp10):
        c = mat[k - 1, k - 1]
        if c > 1e140:
            return mat * 1e-140, exp10 + 140
        return mat, exp10

    power = np.eye(m)
    exp_p = 0
    base, exp_b = H, 0
    remaining = n
    while remaining:
        if remaining & 1:
            power = power @ base
            exp_p += exp_b
            power, exp_p = rescale(power, exp_p)
        remaining >>= 1
        if remaining:
            base = base @ base
            exp_b *= 2
            base, exp_b = rescale(base, exp_b)
    s = power[k - 1, k - 1]
    for i in range(1, n + 1):
        s *= i / n
        if s < 1e-140:
            s *= 1e140
            exp_p -= 140
    return float(s * 10.0**exp_p)


def _kolmogorov_asymptotic_sf(lam: float) -> float:
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        # Jacobi-theta dual form, numerically stable for small arguments.
        w = math.sqrt(2.0 * math.pi) / lam
        t = math.exp(-math.pi**2 / (8.0 * lam**2))
        cdf = w * (t + t**9 + t**25 + t**49)
        return min(1.0, max(0.0, 1.0 - cdf))
    total = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += -term if j % 2 == 0 else term
        if term < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def anderson_darling_cdf(z: float) -> float:
    """Asymptotic CDF of the Anderson-Darling A^2 statistic (case 0).

    Rational approximations from Marsaglia & Marsaglia's evaluation of the
    limiting distribution; absolute error below 2e-6.
    """
    if z <= 0.0:
        return 0.0
    if z < 2.0:
        return (
            math.exp(-1.2337141 / z)
            / math.sqrt(z)
            * (
                2.00012
                + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z)
                * z
            )
        )
    return math.exp(
        -math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
    )


def chi_square_sf(stat: float, df: int) -> float:
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    return float(special.gammaincc(df / 2.0, stat / 2.0))


def sturges_bins(n: int) -> int:
    return int(math.floor(1.0 + math.log2(n) + 0.5))


# --------------------------------------------------------------------------
# Per-sample tests


@dataclass(frozen=True)
class TestResult:
    kind: str  # "KS" | "AD" | "CS"
    statistic: float | None
    pvalue: float | None
    df: int | None = None
    excluded: bool = False


@dataclass(frozen=True)
class CombinedTest:
    statistic: float
    k: int
    pvalue: float


def _checked_fit(fit: mle.FitResult) -> mle.FitResult:
    if isinstance(fit, mle.FitSkipped):
        raise ValueError(f"fit was skipped: {fit.reason}")
    if not fit.converged:
        raise ValueError(f"{fit.family} fit did not converge")
    return fit


def _model_probs(sample, fit: mle.FitResult) -> np.ndarray:
    values = np.sort(np.asarray(getattr(sample, "values", sample), dtype=float))
    return np.asarray(families.cdf(fit.family, fit.params, values), dtype=float)


def ks_test(sample, fit: mle.FitResult) -> TestResult:
    fit = _checked_fit(fit)
    u = _model_probs(sample, fit)
    n = u.size
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))
    return TestResult("KS", d, kolmogorov_sf(n, d))


def ad_test(sample, fit: mle.FitResult) -> TestResult:
    fit = _checked_fit(fit)
    u = np.clip(_model_probs(sample, fit), 1e-15, 1.0 - 1e-15)
    n = u.size
    i = np.arange(1, n + 1)
    a2 = float(-n - np.mean((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))))
    return TestResult("AD", a2, 1.0 - anderson_darling_cdf(a2))


def cs_test(sample, fit: mle.FitResult) -> TestResult:
    fit = _checked_fit(fit)
    values = np.asarray(getattr(sample, "values", sample), dtype=float)
    n = values.size
    if n < CS_MIN_N:
        return TestResult("CS", None, None, None, excluded=True)
    k = sturges_bins(n)
    edges = np.array(
        [families.quantile(fit.family, fit.params, j / k) for j in range(1, k)]
    )
    # Right-closed bins: a value exactly on an edge counts left.
    idx = np.searchsorted(edges, values, side="left")
    observed = np.bincount(idx, minlength=k)
    expected = n / k
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return TestResult("CS", stat, chi_square_sf(stat, k - 1), k - 1)


def fisher_combine(pvalues) -> CombinedTest:
    """Combine independent p-values as S = sum(-ln p) ~ chi-square(k)."""
    ps = list(pvalues)
    if not ps:
        raise ValueError("cannot combine an empty list of p-values")
    for p in ps:
        if p < 0.0 or p > 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
        if p == 0.0:
            raise ValueError("p-value of 0 gives an infinite combined statistic")
    stat = float(-np.sum(np.log(ps)))
    k = len(ps)
    return CombinedTest(stat, k, chi_square_sf(stat, k))


# --------------------------------------------------------------------------
# Aggregation across samples


@dataclass(frozen=True)
class AggregateRow:
    family: str
    cs: CombinedTest
    ks: CombinedTest
    ad: CombinedTest
    fcs: CombinedTest
    sum_cdf0: float | None  # None: support positive by definition (token "0")
    sum_cdf100: float
    rejected: bool
    rank: int | None = None


def aggregate(family: str, corpus: Corpus, fits) -> AggregateRow:
    """Build one ranking-table row for ``family`` over every corpus sample."""
    bad = []
    cells = []
    for sample in corpus:
        fit = fits.get((family, sample.species_label))
        if fit is None:
            bad.append(f"{family}/{sample.species_label}: missing")
        elif isinstance(fit, mle.FitSkipped):
            bad.append(f"{family}/{sample.species_label}: skipped ({fit.reason})")
        elif not fit.converged:
            bad.append(f"{family}/{sample.species_label}: not converged")
        else:
            cells.append((sample, fit))
    if bad:
        raise ValueError("aggregate needs converged fits for every sample: " + "; ".join(bad))

    ks_ps, ad_ps, cs_ps = [], [], []
    sum0, sum100 = 0.0, 0.0
    for sample, fit in cells:
        ks_ps.append(ks_test(sample, fit).pvalue)
        ad_ps.append(ad_test(sample, fit).pvalue)
        cs = cs_test(sample, fit)
        if not cs.excluded:
            cs_ps.append(cs.pvalue)
        sum0 += float(families.cdf(fit.family, fit.params, 0.0))
        sum100 += 1.0 - float(families.cdf(fit.family, fit.params, 100.0))
    if not cs_ps:
        raise ValueError(f"{family}: no sample large enough for the chi-square combination")

    cs_comb = fisher_combine(cs_ps)
    ks_comb = fisher_combine(ks_ps)
    ad_comb = fisher_combine(ad_ps)
    fcs = fisher_combine([cs_comb.pvalue, ks_comb.pvalue, ad_comb.pvalue])
    token = family in families.STRICTLY_POSITIVE
    return AggregateRow(
        family=family,
        cs=cs_comb,
        ks=ks_comb,
        ad=ad_comb,
        fcs=fcs,
        sum_cdf0=None if token else sum0,
        sum_cdf100=sum100,
        rejected=fcs.pvalue < REJECTION_LEVEL,
    )


def _rank_key(row: AggregateRow):
    token = row.sum_cdf0 is None
    return (
        0 if token else 1,
        0.0 if token else row.sum_cdf0,
        row.sum_cdf100,
        -row.fcs.pvalue,
    )


def rank_rows(rows) -> list[AggregateRow]:
    """Assign ranks 1..N by the domain-boundary criteria.

    Ordering is lexicographic: families whose support is positive by
    definition come before any numeric mass-at-zero value (including 0.0),
    then ascending mass above 100, then descending combined p-value.  The
    sort is stable, so equal rows keep their input order.
    """
    if not rows:
        raise ValueError("cannot rank an empty row list")
    ordered = sorted(rows, key=_rank_key)
    return [replace(row, rank=i) for i, row in enumerate(ordered, start=1)]


def gof_table(corpus: Corpus, fits, family_list) -> list[AggregateRow]:
    """Aggregate and rank every family, non-rejected families first.

    Rejected families drop out of the main comparison and are ranked after
    all surviving ones (by the same criteria among themselves).
    """
    rows = [aggregate(fam, corpus, fits) for fam in family_list]
    kept = [r for r in rows if not r.rejected]
    dropped = [r for r in rows if r.rejected]
    ranked = rank_rows(kept) if kept else []
    if dropped:
        tail = rank_rows(dropped)
        offset = len(kept)
        ranked += [replace(r, rank=r.rank + offset) for r in tail]
    return ranked


@dataclass(frozen=True)
class PooledTest:
    fit: mle.FitResult
    ks: TestResult
    ad: TestResult
    cs: TestResult
    combined: CombinedTest


def pooled_test(sample: AbundanceSample, family: str, cfg: mle.FitConfig = mle.FitConfig()) -> PooledTest:
    """Fit the pooled sample and combine its three test p-values (k = 3)."""
    fit = mle.fit(family, sample, cfg)
    ks = ks_test(sample, fit)
    ad = ad_test(sample, fit)
    cs = cs_test(sample, fit)
    if cs.excluded:
        raise ValueError("pooled sample too small for the chi-square test")
    combined = fisher_combine([cs.pvalue, ks.pvalue, ad.pvalue])
    return PooledTest(fit, ks, ad, cs, combined)


# --------------------------------------------------------------------------
# Report rendering

GOF_COLUMNS = (
    "Dist",
    "C-S",
    "p_CS",
    "K-S",
    "p_KS",
    "A-D",
    "p_AD",
    "F-C-S",
    "p_FCS",
    "SumCDF0",
    "SumCDF100",
    "Rank",
    "Rejected",
)


def format_gof_table(rows, precision: str = "paper") -> str:
    stat = "{:.2f}".format if precision == "paper" else "{:.17g}".format
    prob = "{:.4f}".format if precision == "paper" else "{:.17g}".format
    lines = ["\t".join(GOF_COLUMNS)]
    for r in rows:
        lines.append(
            "\t".join(
                (
                    r.family,
                    stat(r.cs.statistic),
                    prob(r.cs.pvalue),
                    stat(r.ks.statistic),
                    prob(r.ks.pvalue),
                    stat(r.ad.statistic),
                    prob(r.ad.pvalue),
                    stat(r.fcs.statistic),
                    prob(r.fcs.pvalue),
                    "0" if r.sum_cdf0 is None else prob(r.sum_cdf0),
                    prob(r.sum_cdf100),
                    str(r.rank),
                    "true" if r.rejected else "false",
                )
            )
        )
    lines.append("# SumCDF0 '0': support is positive for every parameter choice of the family.")
    lines.append(f"# Rejected: combined p-value below {REJECTION_LEVEL}; rejected rows rank after all others.")
    return "\n".join(lines) + "\n"


def parse_gof_table(text: str) -> list[dict]:
    """Parse a rendered ranking table back into typed row dictionaries."""
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = tuple(lines[0].split("\t"))
    if header != GOF_COLUMNS:
        raise ValueError(f"unexpected ranking-table header: {header}")
    rows = []
    for line in lines[1:]:
        f = line.split("\t")
        rows.append(
            dict(
                family=f[0],
                cs=float(f[1]),
                p_cs=float(f[2]),
                ks=float(f[3]),
                p_ks=float(f[4]),
                ad=float(f[5]),
                p_ad=float(f[6]),
                fcs=float(f[7]),
                p_fcs=float(f[8]),
                sum_cdf0=None if f[9] == "0" else float(f[9]),
                sum_cdf100=float(f[10]),
                rank=int(f[11]),
                rejected=f[12] == "true",
            )
        )
    return rows
