"""Maximum-likelihood fitting via derivative-free simplex search.

Each family is fitted by Nelder-Mead on transformed coordinates (positive
parameters are optimized on the log scale, locations untransformed) from a
cheap moment-style initializer, taking the best of several deterministically
jittered restarts.  Support-location parameters are capped just below the
smallest observation to exclude the unbounded-likelihood degeneracy of
shifted families.  The lognormal has a closed-form estimate and bypasses the
search.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import families
from .dataset import AbundanceSample, Corpus
from .kernels import LOGPDF

EULER_GAMMA = 0.5772156649015329

_JITTER_SEED = 0x5EED
_LOCATION_MARGIN = 1e-6
# Large finite stand-in for an impossible parameter point: keeps the simplex
# arithmetic NaN-free where a bare inf would not.
_PENALTY = 1e300


@dataclass(frozen=True)
class FitConfig:
    max_evaluations: int = 20000
    tolerance: float = 1e-9
    restarts: int = 5

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_evaluations < 1 or self.restarts < 1:
            raise ValueError("max_evaluations and restarts must be >= 1")


@dataclass(frozen=True)
class FitResult:
    family: str
    params: tuple[float, ...]
    loglik: float
    converged: bool
    evaluations: int


@dataclass(frozen=True)
class FitSkipped:
    family: str
    species_label: str
    reason: str


def _trigamma_inverse(v: float) -> float:
    # Newton iteration; psi'(a) ~ 1/a for large a gives the start.
    a = 0.5 + 1.0 / v
    for _ in range(40):
        f = float(special.polygamma(1, a)) - v
        step = f / float(special.polygamma(2, a))
        a -= step
        if a <= 0:
            a = 1e-3
        if abs(step) < 1e-12 * a:
            break
    return a


def initial_params(family: str, x: np.ndarray) -> list[float]:
    """Cheap starting point for the simplex search (not the estimate itself)."""
    lx = np.log(x)
    mean_ln, sd_ln = float(lx.mean()), max(float(lx.std()), 1e-6)
    mean, sd = float(x.mean()), max(float(x.std()), 1e-9)
    mn, mx, med = float(x.min()), float(x.max()), float(np.median(x))
    loc0 = mn - 0.1 * (mx - mn) - 1e-9

    if family == "Lognormal_2P":
        return [sd_ln, mean_ln]
    if family == "LogLogistic_2P":
        return [math.pi / (math.sqrt(3.0) * sd_ln), math.exp(mean_ln)]
    if family == "Dagum_3P":
        # k=1 reduces Dagum to log-logistic; start there.
        return [1.0, math.pi / (math.sqrt(3.0) * sd_ln), math.exp(mean_ln)]
    if family == "Frechet_2P":
        a0 = math.pi / (math.sqrt(6.0) * sd_ln)
        return [a0, math.exp(mean_ln - EULER_GAMMA / a0)]
    if family == "Frechet_3P":
        ly = np.log(x - loc0)
        a0 = math.pi / (math.sqrt(6.0) * max(float(ly.std()), 1e-6))
        return [a0, math.exp(float(ly.mean()) - EULER_GAMMA / a0), loc0]
    if family == "FisherTippett_3P":
        s0 = sd * math.sqrt(6.0) / math.pi
        return [0.1, s0, mean - EULER_GAMMA * s0]
    if family == "InverseGaussian_2P":
        return [mean**3 / max(float(x.var()), 1e-12), mean]
    if family == "InverseGaussian_3P":
        y = x - loc0
        return [float(y.mean()) ** 3 / max(float(y.var()), 1e-12), float(y.mean()), loc0]
    if family == "Levy_1P":
        return [med / 2.0]
    if family == "Levy_2P":
        return [float(np.median(x - loc0)) / 2.0, loc0]
    if family == "Pareto2_2P":
        # Lomax mean is b/(a-1); pick a moderate tail index to start.
        return [2.0, mean]
    if family == "Pearson5_2P":
        a0 = _trigamma_inverse(sd_ln**2)
        return [a0, math.exp(mean_ln + float(special.digamma(a0)))]
    if family == "Pearson5_3P":
        ly = np.log(x - loc0)
        a0 = _trigamma_inverse(max(float(ly.std()), 1e-6) ** 2)
        return [a0, math.exp(float(ly.mean()) + float(special.digamma(a0))), loc0]
    if family == "Pearson6_3P":
        a0 = _trigamma_inverse(sd_ln**2 / 2.0)
        return [a0, a0, math.exp(mean_ln)]
    if family == "PhasedBiExponential_4P":
        g2 = med
        lo, hi = x[x < g2], x[x >= g2]
        l1 = 1.0 / max(float(np.mean(lo - loc0)), 1e-9) if lo.size else 1.0
        l2 = 1.0 / max(float(np.mean(hi - g2)), 1e-9) if hi.size else 1.0
        return [l1, l2, loc0, g2]
    if family == "Weibull_2P":
        cv = sd / mean
        a0 = cv**-1.086
        return [a0, mean / math.gamma(1.0 + 1.0 / a0)]
    raise ValueError(f"unknown family {family!r}")


def _values(sample) -> np.ndarray:
    return np.asarray(getattr(sample, "values", sample), dtype=float)


def _make_objective(family: str, x: np.ndarray):
    kernel = LOGPDF[family]
    positive = families._POSITIVE[family]
    loc_idx = families.LOCATION_INDEX.get(family)
    mn, mx = float(x.min()), float(x.max())
    loc_cap = mn - _LOCATION_MARGIN * abs(mn)
    upper_cap = mx + _LOCATION_MARGIN * abs(mx)

    def decode(v: np.ndarray) -> np.ndarray:
        theta = np.empty_like(v)
        for i, pos in enumerate(positive):
            theta[i] = math.exp(v[i]) if pos else v[i]
        return theta

    def negloglik(v: np.ndarray) -> float:
        theta = decode(v)
        if not np.all(np.isfinite(theta)):
            return _PENALTY
        if loc_idx is not None and theta[loc_idx] > loc_cap:
            return _PENALTY
        if family == "FisherTippett_3P":
            k, s, mu = theta
            if k > 1e-12 and mu - s / k > loc_cap:
                return _PENALTY
            if k < -1e-12 and mu - s / k < upper_cap:
                return _PENALTY
        ll = float(np.sum(kernel(theta, x)))
        return -ll if math.isfinite(ll) else _PENALTY

    def encode(theta) -> np.ndarray:
        return np.array(
            [math.log(t) if pos else t for t, pos in zip(theta, positive)], dtype=float
        )

    return encode, decode, negloglik


def fit_simplex(family: str, sample, cfg: FitConfig = FitConfig()) -> FitResult:
    """Nelder-Mead fit from the family initializer with jittered restarts."""
    x = _values(sample)
    k = families.n_params(family)
    if x.size < k + 1:
        raise ValueError(
            f"{family} needs at least {k + 1} observations, sample has {x.size}"
        )
    encode, decode, negloglik = _make_objective(family, x)
    v0 = encode(initial_params(family, x))
    jitter = np.array(
        [0.3 if pos else 0.1 * max(float(x.max() - x.min()), 1e-3)
         for pos in families._POSITIVE[family]]
    )
    rng = np.random.default_rng(_JITTER_SEED)
    options = dict(
        xatol=cfg.tolerance,
        fatol=cfg.tolerance,
        maxfev=cfg.max_evaluations,
        maxiter=cfg.max_evaluations,
    )
    best = None
    evaluations = 0
    for r in range(cfg.restarts):
        start = v0 if r == 0 else v0 + rng.normal(0.0, 1.0, v0.size) * jitter
        res = optimize.minimize(negloglik, start, method="Nelder-Mead", options=options)
        evaluations += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    if best.fun < _PENALTY:
        # One polish pass: a fresh simplex around the winner guards against
        # premature shrinkage.
        res = optimize.minimize(negloglik, best.x, method="Nelder-Mead", options=options)
        evaluations += res.nfev
        if res.fun <= best.fun:
            best = res
    if best.fun >= _PENALTY:
        return FitResult(family, tuple(initial_params(family, x)), -math.inf, False, evaluations)
    theta = decode(best.x)
    loglik = families.log_likelihood(family, theta, x)
    return FitResult(family, tuple(float(t) for t in theta), loglik, bool(best.success), evaluations)


def _fit_lognormal_closed_form(sample) -> FitResult:
    x = _values(sample)
    lx = np.log(x)
    mu = float(lx.mean())
    sigma = math.sqrt(float(np.mean((lx - mu) ** 2)))
    if sigma < 1e-12:
        raise ValueError(
            "degenerate sample: zero log-variance gives sigma=0, "
            "which is not a valid Lognormal_2P parameter vector"
        )
    loglik = families.log_likelihood("Lognormal_2P", (sigma, mu), x)
    return FitResult("Lognormal_2P", (sigma, mu), loglik, True, 1)


def fit(family: str, sample, cfg: FitConfig = FitConfig()) -> FitResult:
    """Maximum-likelihood fit of one family to one sample."""
    if family not in families.PARAM_NAMES:
        raise ValueError(f"unknown family {family!r}")
    x = _values(sample)
    k = families.n_params(family)
    if x.size < k + 1:
        raise ValueError(
            f"{family} needs at least {k + 1} observations, sample has {x.size}"
        )
    if family == "Lognormal_2P":
        return _fit_lognormal_closed_form(x)
    return fit_simplex(family, x, cfg)


def fit_all(
    corpus: Corpus,
    family_list,
    cfg: FitConfig = FitConfig(),
    threads: int = 1,
) -> dict[tuple[str, str], FitResult | FitSkipped]:
    """Fit every requested family to every sample.

    Per-cell failures are recorded as ``FitSkipped`` markers instead of
    raising, so a single (family, sample) problem cannot abort the grid.
    Cells are independent; the result does not depend on scheduling.
    """
    cells = [(fam, s) for fam in family_list for s in corpus]

    def run(cell):
        fam, sample = cell
        try:
            return fit(fam, sample, cfg)
        except ValueError as exc:
            return FitSkipped(fam, sample.species_label, str(exc))

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_:
            results = list(pool_.map(run, cells))
    else:
        results = [run(c) for c in cells]
    return {
        (fam, sample.species_label): res
        for (fam, sample), res in zip(cells, results)
    }
