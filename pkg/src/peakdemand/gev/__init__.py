"""Generalized extreme value models with covariate-dependent location and scale."""

from .diagnostics import gumbel_residuals, plotting_positions, qq_points
from .distribution import gev_cdf, gev_logpdf, gev_pdf, gev_quantile, gumbel_quantile
from .inference import LrtResult, chi2_critical, lrt, lrt_from_statistic, return_level, sample
from .model import (
    MODEL1,
    MODEL2,
    PENALTY,
    STATIONARY,
    GevFit,
    GevParams,
    LocationTrend,
    ModelSpec,
    ScaleTrend,
    fit,
    fit_nested,
    nllh,
)
from .optimize import MinimizeResult, minimize

__all__ = [
    "GevFit", "GevParams", "LocationTrend", "LrtResult", "MODEL1", "MODEL2",
    "MinimizeResult", "ModelSpec", "PENALTY", "STATIONARY", "ScaleTrend", "chi2_critical", "fit",
    "fit_nested", "gev_cdf", "gev_logpdf", "gev_pdf", "gev_quantile",
    "gumbel_quantile", "gumbel_residuals", "lrt", "lrt_from_statistic", "minimize",
    "nllh", "plotting_positions", "qq_points", "return_level", "sample",
]
