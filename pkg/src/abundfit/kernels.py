"""Pointwise log-density kernels for the 16 supported families.

These functions are the hot path of maximum-likelihood fitting: the simplex
search evaluates them thousands of times per fit.  Each kernel takes a
parameter vector ``theta`` (1-d float64, family-specific order, see
``families.PARAM_NAMES``) and an observation array ``x``, and returns the
pointwise log-density with ``-inf`` at points outside the support.

Every kernel is written once in numpy form and compiled with numba when the
numba backend is active (see ``_backend``).  Formulas avoid dead-branch NaNs
(inputs are clamped before logs, exponents capped at 700) so both backends
return identical, warning-free values.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import NUMBA_AVAILABLE, NUMBA_ENABLED, jit_kernel

LN_2PI = math.log(2.0 * math.pi)

# Cap on exponents: exp(700) is near the float64 overflow edge, and a log
# density of -exp(700) already acts as an effective -inf for the optimizer.
_EXP_CAP = 700.0


def dagum_3p_logpdf(theta, x):
    k, a, b = theta[0], theta[1], theta[2]
    inside = x > 0.0
    xs = np.where(inside, x, b)
    lr = np.log(xs / b)
    t = a * lr
    soft = np.where(t > _EXP_CAP, t, np.log1p(np.exp(np.minimum(t, _EXP_CAP))))
    lp = math.log(a * k) - math.log(b) + (a * k - 1.0) * lr - (k + 1.0) * soft
    return np.where(inside, lp, -np.inf)


def frechet_2p_logpdf(theta, x):
    a, b = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, b)
    lr = math.log(b) - np.log(xs)
    powt = np.exp(np.minimum(a * lr, _EXP_CAP))
    lp = math.log(a / b) + (a + 1.0) * lr - powt
    return np.where(inside, lp, -np.inf)


def frechet_3p_logpdf(theta, x):
    a, b, g = theta[0], theta[1], theta[2]
    y = x - g
    inside = y > 0.0
    ys = np.where(inside, y, b)
    lr = math.log(b) - np.log(ys)
    powt = np.exp(np.minimum(a * lr, _EXP_CAP))
    lp = math.log(a / b) + (a + 1.0) * lr - powt
    return np.where(inside, lp, -np.inf)


def fisher_tippett_3p_logpdf(theta, x):
    k, s, m = theta[0], theta[1], theta[2]
    z = (x - m) / s
    if abs(k) < 1e-12:
        t = np.exp(np.minimum(-z, _EXP_CAP))
        return -math.log(s) - z - t
    w = 1.0 + k * z
    inside = w > 0.0
    ws = np.where(inside, w, 1.0)
    logt = -np.log(ws) / k
    t = np.exp(np.minimum(logt, _EXP_CAP))
    lp = -math.log(s) + (k + 1.0) * logt - t
    return np.where(inside, lp, -np.inf)


def inverse_gaussian_2p_logpdf(theta, x):
    lam, mu = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, 1.0)
    lp = 0.5 * (math.log(lam) - LN_2PI - 3.0 * np.log(xs)) \
        - lam * (xs - mu) ** 2 / (2.0 * mu * mu * xs)
    return np.where(inside, lp, -np.inf)


def inverse_gaussian_3p_logpdf(theta, x):
    lam, mu, g = theta[0], theta[1], theta[2]
    y = x - g
    inside = y > 0.0
    ys = np.where(inside, y, 1.0)
    lp = 0.5 * (math.log(lam) - LN_2PI - 3.0 * np.log(ys)) \
        - lam * (ys - mu) ** 2 / (2.0 * mu * mu * ys)
    return np.where(inside, lp, -np.inf)


def levy_1p_logpdf(theta, x):
    s = theta[0]
    inside = x > 0.0
    xs = np.where(inside, x, 1.0)
    lp = 0.5 * (math.log(s) - LN_2PI) - s / (2.0 * xs) - 1.5 * np.log(xs)
    return np.where(inside, lp, -np.inf)


def levy_2p_logpdf(theta, x):
    s, g = theta[0], theta[1]
    y = x - g
    inside = y > 0.0
    ys = np.where(inside, y, 1.0)
    lp = 0.5 * (math.log(s) - LN_2PI) - s / (2.0 * ys) - 1.5 * np.log(ys)
    return np.where(inside, lp, -np.inf)


def log_logistic_2p_logpdf(theta, x):
    a, b = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, b)
    lr = np.log(xs / b)
    t = a * lr
    soft = np.where(t > _EXP_CAP, t, np.log1p(np.exp(np.minimum(t, _EXP_CAP))))
    lp = math.log(a / b) + (a - 1.0) * lr - 2.0 * soft
    return np.where(inside, lp, -np.inf)


def lognormal_2p_logpdf(theta, x):
    s, mu = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, 1.0)
    lx = np.log(xs)
    lp = -lx - math.log(s) - 0.5 * LN_2PI - (lx - mu) ** 2 / (2.0 * s * s)
    return np.where(inside, lp, -np.inf)


def pareto2_2p_logpdf(theta, x):
    a, b = theta[0], theta[1]
    inside = x >= 0.0
    xs = np.where(inside, x, 0.0)
    lp = math.log(a) + a * math.log(b) - (a + 1.0) * np.log(xs + b)
    return np.where(inside, lp, -np.inf)


def pearson5_2p_logpdf(theta, x):
    a, b = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, 1.0)
    lp = a * math.log(b) - math.lgamma(a) - (a + 1.0) * np.log(xs) - b / xs
    return np.where(inside, lp, -np.inf)


def pearson5_3p_logpdf(theta, x):
    a, b, g = theta[0], theta[1], theta[2]
    y = x - g
    inside = y > 0.0
    ys = np.where(inside, y, 1.0)
    lp = a * math.log(b) - math.lgamma(a) - (a + 1.0) * np.log(ys) - b / ys
    return np.where(inside, lp, -np.inf)


def pearson6_3p_logpdf(theta, x):
    a1, a2, b = theta[0], theta[1], theta[2]
    inside = x > 0.0
    xs = np.where(inside, x, b)
    lr = np.log(xs / b)
    soft = np.where(lr > _EXP_CAP, lr, np.log1p(np.exp(np.minimum(lr, _EXP_CAP))))
    lbeta = math.lgamma(a1) + math.lgamma(a2) - math.lgamma(a1 + a2)
    lp = (a1 - 1.0) * lr - math.log(b) - lbeta - (a1 + a2) * soft
    return np.where(inside, lp, -np.inf)


def phased_bi_exponential_4p_logpdf(theta, x):
    l1, l2, g1, g2 = theta[0], theta[1], theta[2], theta[3]
    if g2 <= g1:
        return np.full_like(x, -np.inf)
    inside = x >= g1
    lp1 = math.log(l1) - l1 * (x - g1)
    lp2 = math.log(l2) - l1 * (g2 - g1) - l2 * (x - g2)
    lp = np.where(x < g2, lp1, lp2)
    return np.where(inside, lp, -np.inf)


def weibull_2p_logpdf(theta, x):
    a, b = theta[0], theta[1]
    inside = x > 0.0
    xs = np.where(inside, x, b)
    lr = np.log(xs / b)
    powt = np.exp(np.minimum(a * lr, _EXP_CAP))
    lp = math.log(a / b) + (a - 1.0) * lr - powt
    return np.where(inside, lp, -np.inf)


LOGPDF_NUMPY = {
    "Dagum_3P": dagum_3p_logpdf,
    "Frechet_2P": frechet_2p_logpdf,
    "Frechet_3P": frechet_3p_logpdf,
    "FisherTippett_3P": fisher_tippett_3p_logpdf,
    "InverseGaussian_2P": inverse_gaussian_2p_logpdf,
    "InverseGaussian_3P": inverse_gaussian_3p_logpdf,
    "Levy_1P": levy_1p_logpdf,
    "Levy_2P": levy_2p_logpdf,
    "LogLogistic_2P": log_logistic_2p_logpdf,
    "Lognormal_2P": lognormal_2p_logpdf,
    "Pareto2_2P": pareto2_2p_logpdf,
    "Pearson5_2P": pearson5_2p_logpdf,
    "Pearson5_3P": pearson5_3p_logpdf,
    "Pearson6_3P": pearson6_3p_logpdf,
    "PhasedBiExponential_4P": phased_bi_exponential_4p_logpdf,
    "Weibull_2P": weibull_2p_logpdf,
}

LOGPDF_JIT = (
    {name: jit_kernel(fn) for name, fn in LOGPDF_NUMPY.items()}
    if NUMBA_AVAILABLE
    else {}
)

LOGPDF = LOGPDF_JIT if NUMBA_ENABLED else LOGPDF_NUMPY
