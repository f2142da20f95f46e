"""Residual and quantile-quantile diagnostics for fitted GEV models."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError, SupportError
from .distribution import GUMBEL_EPS, gev_quantile, gumbel_quantile
from .model import GevFit, as_arrays


def gumbel_residuals(fit: GevFit, data) -> np.ndarray:
    """Transform observations to the standard Gumbel scale under ``fit``."""
    if not fit.converged:
        raise InvalidInputError("residuals need a converged fit")
    z, t = as_arrays(data)
    p = fit.params
    y = (z - p.location(t)) / p.scale(t)
    if abs(p.xi) < GUMBEL_EPS:
        return y
    arg = p.xi * y
    bad = np.flatnonzero(arg <= -1.0)
    if bad.size:
        raise SupportError(bad.tolist())
    return np.log1p(arg) / p.xi


def plotting_positions(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / (n + 1.0)


def qq_points(fit: GevFit, data) -> np.ndarray:
    """``(n, 2)`` array of (empirical, model) quantile pairs.

    Stationary fits compare sorted maxima with fitted GEV quantiles; fits
    with trends compare sorted Gumbel residuals with standard Gumbel
    quantiles.
    """
    z, _ = as_arrays(data)
    if z.size == 0:
        raise InvalidInputError("no data")
    pp = plotting_positions(z.size)
    if fit.spec.stationary:
        if not fit.converged:
            raise InvalidInputError("Q-Q points need a converged fit")
        p = fit.params
        model = np.asarray(gev_quantile(pp, p.mu0, float(p.scale()), p.xi), dtype=float)
        empirical = np.sort(z)
    else:
        empirical = np.sort(gumbel_residuals(fit, data))
        model = np.asarray(gumbel_quantile(pp), dtype=float)
    return np.column_stack([empirical, np.atleast_1d(model)])
