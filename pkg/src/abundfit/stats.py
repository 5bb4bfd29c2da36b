"""Derived statistics of fitted lognormal models.

Moments are reported on the data (percent) scale; entropies in natural-log
units.  The generalized-entropy closed form for a lognormal density f is

    H_a = mu + ln(sigma * sqrt(2*pi)) + ln(a) / (2*(a-1)) - (a-1)*sigma^2 / (2*a)

with the Shannon limit mu + 0.5*ln(2*pi*e*sigma^2) at a = 1; it equals
(1/(1-a)) * ln(integral of f^a) and is strictly decreasing in the order a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import mle

DEFAULT_ALPHAS = (0.5, 1.0, 2.0, 3.0)


def _check_sigma(sigma: float) -> None:
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")


def lognormal_moments(sigma: float, mu: float) -> tuple[float, float, float, float]:
    """Return (mean, stdev, skewness, kurtosis excess) of Lognormal(sigma, mu)."""
    _check_sigma(sigma)
    w = math.exp(sigma * sigma)
    mean = math.exp(mu + sigma * sigma / 2.0)
    stdev = mean * math.sqrt(w - 1.0)
    skewness = (w + 2.0) * math.sqrt(w - 1.0)
    kurtosis_excess = w**4 + 2.0 * w**3 + 3.0 * w**2 - 6.0
    return mean, stdev, skewness, kurtosis_excess


def fisher_information(sigma: float) -> float:
    """Information about the log-scale parameter: 1 / sigma^2."""
    _check_sigma(sigma)
    return 1.0 / (sigma * sigma)


def renyi_entropy(sigma: float, mu: float, alpha: float) -> float:
    _check_sigma(sigma)
    if alpha <= 0.0:
        raise ValueError(f"entropy order must be > 0, got {alpha}")
    if alpha == 1.0:
        return mu + 0.5 * math.log(2.0 * math.pi * math.e * sigma * sigma)
    return (
        mu
        + math.log(sigma * math.sqrt(2.0 * math.pi))
        + math.log(alpha) / (2.0 * (alpha - 1.0))
        - (alpha - 1.0) * sigma * sigma / (2.0 * alpha)
    )


@dataclass(frozen=True)
class SummaryRow:
    label: str
    sigma: float
    mu: float
    mean: float
    stdev: float
    ln_skewness: float
    ln_kurtosis_excess: float
    fisher_information: float
    renyi: dict[float, float]


def summarize(fit: mle.FitResult, label: str, alphas=DEFAULT_ALPHAS) -> SummaryRow:
    if fit.family != "Lognormal_2P":
        raise ValueError(f"summary statistics are defined for Lognormal_2P fits, got {fit.family}")
    if not fit.converged:
        raise ValueError("cannot summarize a non-converged fit")
    sigma, mu = fit.params
    mean, stdev, skew, kurt = lognormal_moments(sigma, mu)
    return SummaryRow(
        label=label,
        sigma=sigma,
        mu=mu,
        mean=mean,
        stdev=stdev,
        ln_skewness=math.log(skew),
        ln_kurtosis_excess=math.log(kurt),
        fisher_information=fisher_information(sigma),
        renyi={a: renyi_entropy(sigma, mu, a) for a in alphas},
    )


# --------------------------------------------------------------------------
# Report rendering


def alpha_label(alpha: float) -> str:
    s = f"{alpha:g}"
    if s.startswith("0."):
        s = s[1:]
    return f"H{s}"


def summary_columns(alphas=DEFAULT_ALPHAS) -> tuple[str, ...]:
    return ("Label", "Sigma", "Mu", "Mean", "StDev", "lnSk", "lnKE", "FI") + tuple(
        alpha_label(a) for a in alphas
    )


def format_summary_table(rows, precision: str = "paper") -> str:
    num = "{:.4g}".format if precision == "paper" else "{:.17g}".format
    alphas = tuple(rows[0].renyi) if rows else DEFAULT_ALPHAS
    lines = ["\t".join(summary_columns(alphas))]
    for r in rows:
        cells = [
            r.label,
            num(r.sigma),
            num(r.mu),
            num(r.mean),
            num(r.stdev),
            num(r.ln_skewness),
            num(r.ln_kurtosis_excess),
            num(r.fisher_information),
        ]
        cells += [num(r.renyi[a]) for a in alphas]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def parse_summary_table(text: str) -> list[SummaryRow]:
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split("\t")
    alphas = []
    for name in header[8:]:
        raw = name[1:]
        alphas.append(float("0" + raw if raw.startswith(".") else raw))
    rows = []
    for line in lines[1:]:
        f = line.split("\t")
        rows.append(
            SummaryRow(
                label=f[0],
                sigma=float(f[1]),
                mu=float(f[2]),
                mean=float(f[3]),
                stdev=float(f[4]),
                ln_skewness=float(f[5]),
                ln_kurtosis_excess=float(f[6]),
                fisher_information=float(f[7]),
                renyi={a: float(v) for a, v in zip(alphas, f[8:])},
            )
        )
    return rows
