"""Likelihood-ratio tests, return levels and sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..errors import InvalidInputError
from .distribution import GUMBEL_EPS, gev_quantile
from .model import GevFit, GevParams, ModelSpec


@dataclass(frozen=True)
class LrtResult:
    statistic: float
    df: int
    critical_95: float
    critical_90: float
    significant_95: bool
    significant_90: bool
    p_value: float


def chi2_critical(df: int, level: float) -> float:
    return float(stats.chi2.ppf(level, df))


def lrt_from_statistic(statistic: float, df: int = 1) -> LrtResult:
    """Verdicts for an already computed deviance difference."""
    if df < 1:
        raise InvalidInputError("degrees of freedom must be at least 1")
    c95, c90 = chi2_critical(df, 0.95), chi2_critical(df, 0.90)
    return LrtResult(
        statistic=float(statistic),
        df=int(df),
        critical_95=c95,
        critical_90=c90,
        significant_95=bool(statistic > c95),
        significant_90=bool(statistic > c90),
        p_value=float(stats.chi2.sf(max(statistic, 0.0), df)),
    )


def lrt(nested: GevFit, full: GevFit) -> LrtResult:
    """Deviance test of ``nested`` against the richer ``full`` model."""
    if not nested.spec.nests(full.spec) or nested.n_params >= full.n_params:
        raise InvalidInputError(f"{nested.spec.name} is not nested in {full.spec.name}")
    if nested.n_data != full.n_data:
        raise InvalidInputError("fits were made on different data")
    statistic = 2.0 * (nested.nllh - full.nllh)
    return lrt_from_statistic(statistic, full.n_params - nested.n_params)


def return_level(
    params: GevParams,
    period: float,
    covariate: Optional[float] = None,
    spec: Optional[ModelSpec] = None,
) -> float:
    """Level exceeded on average once every ``period`` blocks.

    A covariate value is required when the model has trend terms.
    """
    if not period > 1:
        raise InvalidInputError(f"return period must exceed 1, got {period}")
    trending = params.has_trend if spec is None else not spec.stationary
    if trending and covariate is None:
        raise InvalidInputError("covariate is required for a non-stationary model")
    t = 0.0 if covariate is None else float(covariate)
    if not trending:
        t = 0.0
    mu = float(params.location(t))
    sigma = float(params.scale(t))
    log_yp = math.log(-math.log1p(-1.0 / period))
    xi = params.xi
    if abs(xi) < GUMBEL_EPS:
        return mu - sigma * log_yp
    return mu + sigma * math.expm1(-xi * log_yp) / xi


def sample(
    params: GevParams,
    n: int,
    seed,
    covariates: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Inverse-CDF draws; location and scale follow ``covariates`` when the
    parameters carry trends."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if covariates is None:
        if params.has_trend:
            raise InvalidInputError("covariates are required when parameters have trends")
        t = np.zeros(n)
    else:
        t = np.asarray(covariates, dtype=float)
        if t.shape != (n,):
            raise InvalidInputError(f"expected {n} covariates, got {t.size}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    u = np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
    return np.asarray(gev_quantile(u, params.location(t), params.scale(t), params.xi), dtype=float).reshape(n)
