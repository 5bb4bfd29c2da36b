"""The 16-family distribution zoo: densities, CDFs, quantiles, supports.

Parameter vectors are plain sequences in a fixed per-family order (see
``PARAM_NAMES``).  Shapes and scales must be strictly positive, locations are
unconstrained, and the phased bi-exponential requires its two breakpoints
ordered.  All operations are pure functions; ``-inf`` log-likelihood is a
value (observation outside support), not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .kernels import LOGPDF

FAMILY_IDS = (
    "Dagum_3P",
    "Frechet_2P",
    "Frechet_3P",
    "FisherTippett_3P",
    "InverseGaussian_2P",
    "InverseGaussian_3P",
    "Levy_1P",
    "Levy_2P",
    "LogLogistic_2P",
    "Lognormal_2P",
    "Pareto2_2P",
    "Pearson5_2P",
    "Pearson5_3P",
    "Pearson6_3P",
    "PhasedBiExponential_4P",
    "Weibull_2P",
)

PARAM_NAMES = {
    "Dagum_3P": ("k", "alpha", "beta"),
    "Frechet_2P": ("alpha", "beta"),
    "Frechet_3P": ("alpha", "beta", "gamma"),
    "FisherTippett_3P": ("k", "sigma", "mu"),
    "InverseGaussian_2P": ("lambda", "mu"),
    "InverseGaussian_3P": ("lambda", "mu", "gamma"),
    "Levy_1P": ("sigma",),
    "Levy_2P": ("sigma", "gamma"),
    "LogLogistic_2P": ("alpha", "beta"),
    "Lognormal_2P": ("sigma", "mu"),
    "Pareto2_2P": ("alpha", "beta"),
    "Pearson5_2P": ("alpha", "beta"),
    "Pearson5_3P": ("alpha", "beta", "gamma"),
    "Pearson6_3P": ("alpha1", "alpha2", "beta"),
    "PhasedBiExponential_4P": ("lambda1", "lambda2", "gamma1", "gamma2"),
    "Weibull_2P": ("alpha", "beta"),
}

# True marks a strictly-positive parameter (shape/scale); False an
# unconstrained one (location, GEV shape).
_POSITIVE = {
    "Dagum_3P": (True, True, True),
    "Frechet_2P": (True, True),
    "Frechet_3P": (True, True, False),
    "FisherTippett_3P": (False, True, False),
    "InverseGaussian_2P": (True, True),
    "InverseGaussian_3P": (True, True, False),
    "Levy_1P": (True,),
    "Levy_2P": (True, False),
    "LogLogistic_2P": (True, True),
    "Lognormal_2P": (True, False),
    "Pareto2_2P": (True, True),
    "Pearson5_2P": (True, True),
    "Pearson5_3P": (True, True, False),
    "Pearson6_3P": (True, True, True),
    "PhasedBiExponential_4P": (True, True, False, False),
    "Weibull_2P": (True, True),
}

# Index of the support-location parameter for shifted families (the lower
# support endpoint equals that parameter).
LOCATION_INDEX = {
    "Frechet_3P": 2,
    "InverseGaussian_3P": 2,
    "Levy_2P": 1,
    "Pearson5_3P": 2,
    "PhasedBiExponential_4P": 2,
}

# Families whose support is fixed to the positive half-line for every
# admissible parameter vector.
STRICTLY_POSITIVE = frozenset(
    (
        "Dagum_3P",
        "Frechet_2P",
        "InverseGaussian_2P",
        "Levy_1P",
        "LogLogistic_2P",
        "Lognormal_2P",
        "Pareto2_2P",
        "Pearson5_2P",
        "Pearson6_3P",
        "Weibull_2P",
    )
)


@dataclass(frozen=True)
class Support:
    lower: float
    lower_inclusive: bool
    upper: float
    strictly_positive_by_definition: bool


def n_params(family: str) -> int:
    return len(PARAM_NAMES[family])


def _check_family(family: str) -> None:
    if family not in PARAM_NAMES:
        raise ValueError(f"unknown family {family!r}")


def validate_params(family: str, params) -> np.ndarray:
    """Return ``params`` as a float64 vector, raising on domain violations."""
    _check_family(family)
    theta = np.asarray(params, dtype=float)
    names = PARAM_NAMES[family]
    if theta.shape != (len(names),):
        raise ValueError(
            f"{family} takes {len(names)} parameters {names}, got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError(f"{family} parameters must be finite, got {theta.tolist()}")
    for name, value, positive in zip(names, theta, _POSITIVE[family]):
        if positive and value <= 0.0:
            raise ValueError(f"{family} parameter {name} must be > 0, got {value}")
    if family == "PhasedBiExponential_4P" and theta[2] >= theta[3]:
        raise ValueError(
            f"PhasedBiExponential_4P requires gamma1 < gamma2, got {theta[2]} >= {theta[3]}"
        )
    return theta


def support(family: str, params) -> Support:
    theta = validate_params(family, params)
    strict = family in STRICTLY_POSITIVE
    if family == "FisherTippett_3P":
        k, s, m = theta
        if k > 1e-12:
            return Support(m - s / k, False, math.inf, False)
        if k < -1e-12:
            return Support(-math.inf, False, m - s / k, False)
        return Support(-math.inf, False, math.inf, False)
    if family in LOCATION_INDEX:
        lo = float(theta[LOCATION_INDEX[family]])
        inclusive = family == "PhasedBiExponential_4P"
        return Support(lo, inclusive, math.inf, False)
    if family == "Pareto2_2P":
        return Support(0.0, True, math.inf, strict)
    return Support(0.0, False, math.inf, strict)


def logpdf(family: str, params, x) -> np.ndarray | float:
    theta = validate_params(family, params)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = LOGPDF[family](theta, arr)
    return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out


def pdf(family: str, params, x) -> np.ndarray | float:
    out = logpdf(family, params, x)
    return np.exp(out)


def log_likelihood(family: str, params, values) -> float:
    """Sum of pointwise log densities; -inf when any value is unsupported."""
    theta = validate_params(family, params)
    arr = np.asarray(getattr(values, "values", values), dtype=float)
    return float(np.sum(LOGPDF[family](theta, arr)))


# --------------------------------------------------------------------------
# Cumulative distribution functions


def _masked(x, mask, fill):
    out = np.full(x.shape, fill, dtype=float)
    return out, x[mask]


def _cdf_dagum(theta, x):
    k, a, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = np.exp(-k * np.log1p((xm / b) ** -a))
    return out


def _cdf_frechet2(theta, x):
    a, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = np.exp(-((b / xm) ** a))
    return out


def _cdf_frechet3(theta, x):
    a, b, g = theta
    return _cdf_frechet2((a, b), x - g)


def _cdf_gev(theta, x):
    k, s, mu = theta
    z = (x - mu) / s
    if abs(k) < 1e-12:
        return np.exp(-np.exp(np.minimum(-z, 700.0)))
    w = 1.0 + k * z
    m = w > 0.0
    out = np.full(x.shape, 0.0 if k > 0 else 1.0, dtype=float)
    out[m] = np.exp(-(w[m] ** (-1.0 / k)))
    return out


def _cdf_invgauss2(theta, x):
    lam, mu = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    u = np.sqrt(lam / xm)
    # exp(2*lam/mu) overflows for sharp fits; fold it into log space
    out[m] = special.ndtr(u * (xm / mu - 1.0)) + np.exp(
        2.0 * lam / mu + special.log_ndtr(-u * (xm / mu + 1.0))
    )
    return np.clip(out, 0.0, 1.0)


def _cdf_invgauss3(theta, x):
    lam, mu, g = theta
    return _cdf_invgauss2((lam, mu), x - g)


def _cdf_levy1(theta, x):
    (s,) = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = special.erfc(np.sqrt(s / (2.0 * xm)))
    return out


def _cdf_levy2(theta, x):
    s, g = theta
    return _cdf_levy1((s,), x - g)


def _cdf_loglogistic(theta, x):
    a, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = 1.0 / (1.0 + (b / xm) ** a)
    return out


def _cdf_lognormal(theta, x):
    s, mu = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = special.ndtr((np.log(xm) - mu) / s)
    return out


def _cdf_pareto2(theta, x):
    a, b = theta
    m = x >= 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = -np.expm1(a * (np.log(b) - np.log(xm + b)))
    return out


def _cdf_pearson5(theta, x):
    a, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = special.gammaincc(a, b / xm)
    return out


def _cdf_pearson5_3(theta, x):
    a, b, g = theta
    return _cdf_pearson5((a, b), x - g)


def _cdf_pearson6(theta, x):
    a1, a2, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    r = xm / b
    out[m] = special.betainc(a1, a2, r / (1.0 + r))
    return out


def _cdf_pbe(theta, x):
    l1, l2, g1, g2 = theta
    out = np.zeros(x.shape, dtype=float)
    phase1 = (x >= g1) & (x < g2)
    phase2 = x >= g2
    out[phase1] = -np.expm1(-l1 * (x[phase1] - g1))
    out[phase2] = -np.expm1(-l1 * (g2 - g1) - l2 * (x[phase2] - g2))
    return out


def _cdf_weibull(theta, x):
    a, b = theta
    m = x > 0.0
    out, xm = _masked(x, m, 0.0)
    out[m] = -np.expm1(-((xm / b) ** a))
    return out


_CDF = {
    "Dagum_3P": _cdf_dagum,
    "Frechet_2P": _cdf_frechet2,
    "Frechet_3P": _cdf_frechet3,
    "FisherTippett_3P": _cdf_gev,
    "InverseGaussian_2P": _cdf_invgauss2,
    "InverseGaussian_3P": _cdf_invgauss3,
    "Levy_1P": _cdf_levy1,
    "Levy_2P": _cdf_levy2,
    "LogLogistic_2P": _cdf_loglogistic,
    "Lognormal_2P": _cdf_lognormal,
    "Pareto2_2P": _cdf_pareto2,
    "Pearson5_2P": _cdf_pearson5,
    "Pearson5_3P": _cdf_pearson5_3,
    "Pearson6_3P": _cdf_pearson6,
    "PhasedBiExponential_4P": _cdf_pbe,
    "Weibull_2P": _cdf_weibull,
}


def cdf(family: str, params, x) -> np.ndarray | float:
    theta = validate_params(family, params)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = _CDF[family](theta, arr)
    return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out


# --------------------------------------------------------------------------
# Quantile functions (closed forms; bisection fallback where none exists)


def _quantile_bisect(family: str, theta, q: float) -> float:
    sup = support(family, theta)
    lo = sup.lower if math.isfinite(sup.lower) else -1.0
    hi = lo + 1.0 if math.isfinite(lo) else 1.0
    if not math.isfinite(sup.lower):
        while float(cdf(family, theta, lo)) > q:
            lo = 2.0 * lo - 1.0
    if math.isfinite(sup.upper):
        hi = sup.upper
    else:
        step = max(1.0, abs(lo))
        while float(cdf(family, theta, hi)) < q:
            hi += step
            step *= 2.0
    f = lambda v: float(cdf(family, theta, v)) - q
    return float(optimize.brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200))


def quantile(family: str, params, q: float) -> float:
    theta = validate_params(family, params)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile order must lie in (0, 1), got {q}")
    if family == "Dagum_3P":
        k, a, b = theta
        return b * (q ** (-1.0 / k) - 1.0) ** (-1.0 / a)
    if family == "Frechet_2P":
        a, b = theta
        return b * (-math.log(q)) ** (-1.0 / a)
    if family == "Frechet_3P":
        a, b, g = theta
        return g + b * (-math.log(q)) ** (-1.0 / a)
    if family == "FisherTippett_3P":
        k, s, mu = theta
        if abs(k) < 1e-12:
            return mu - s * math.log(-math.log(q))
        return mu + s * ((-math.log(q)) ** -k - 1.0) / k
    if family == "Levy_1P":
        (s,) = theta
        return s / (2.0 * special.erfcinv(q) ** 2)
    if family == "Levy_2P":
        s, g = theta
        return g + s / (2.0 * special.erfcinv(q) ** 2)
    if family == "LogLogistic_2P":
        a, b = theta
        return b * (q / (1.0 - q)) ** (1.0 / a)
    if family == "Lognormal_2P":
        s, mu = theta
        return math.exp(mu + s * special.ndtri(q))
    if family == "Pareto2_2P":
        a, b = theta
        return b * ((1.0 - q) ** (-1.0 / a) - 1.0)
    if family == "Pearson5_2P":
        a, b = theta
        return b / special.gammainccinv(a, q)
    if family == "Pearson5_3P":
        a, b, g = theta
        return g + b / special.gammainccinv(a, q)
    if family == "Pearson6_3P":
        a1, a2, b = theta
        t = special.betaincinv(a1, a2, q)
        return b * t / (1.0 - t)
    if family == "PhasedBiExponential_4P":
        l1, l2, g1, g2 = theta
        q_break = -math.expm1(-l1 * (g2 - g1))
        if q < q_break:
            return g1 - math.log1p(-q) / l1
        return g2 + (-math.log1p(-q) - l1 * (g2 - g1)) / l2
    if family == "Weibull_2P":
        a, b = theta
        return b * (-math.log1p(-q)) ** (1.0 / a)
    # Inverse Gaussian has no closed-form inverse CDF.
    return _quantile_bisect(family, theta, q)
