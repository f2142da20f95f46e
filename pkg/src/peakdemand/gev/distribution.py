"""GEV distribution functions, shape convention ``xi > 0`` heavy upper tail.

All functions broadcast over array arguments and return a Python float for
scalar input. Shapes with ``|xi| < GUMBEL_EPS`` use the Gumbel formulas.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError

GUMBEL_EPS = 1e-9


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _check_sigma(sigma):
    sigma = np.asarray(sigma, dtype=float)
    if not np.all(sigma > 0):
        raise InvalidInputError("scale must be positive")
    return sigma


def _reduced(z, mu, sigma, xi):
    """Return ``(y, s, inside)``: standardized value, ``log(1 + xi*y)/xi``
    (or ``y`` in the Gumbel case) and the support mask."""
    y = (np.asarray(z, dtype=float) - mu) / sigma
    xi = np.asarray(xi, dtype=float)
    gumbel = np.abs(xi) < GUMBEL_EPS
    arg = xi * y
    inside = gumbel | (arg > -1.0)
    safe_xi = np.where(gumbel, 1.0, xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(gumbel, y, np.log1p(np.where(inside, arg, 0.0)) / safe_xi)
    return y, s, inside


def gev_cdf(z, mu, sigma, xi):
    """Cumulative distribution function."""
    sigma = _check_sigma(sigma)
    xi = np.asarray(xi, dtype=float)
    _, s, inside = _reduced(z, mu, sigma, xi)
    with np.errstate(over="ignore"):
        inner = np.exp(-np.exp(-s))
    # Off support the CDF is 0 below a lower endpoint (xi > 0), 1 above an
    # upper endpoint (xi < 0).
    off = np.where(xi > 0, 0.0, 1.0)
    return _out(np.where(inside, inner, off))


def gev_logpdf(z, mu, sigma, xi):
    """Log density; ``-inf`` off the support."""
    sigma = _check_sigma(sigma)
    xi = np.asarray(xi, dtype=float)
    _, s, inside = _reduced(z, mu, sigma, xi)
    with np.errstate(over="ignore", invalid="ignore"):
        val = -np.log(sigma) - (1.0 + xi) * s - np.exp(-s)
    return _out(np.where(inside, val, -np.inf))


def gev_pdf(z, mu, sigma, xi):
    return _out(np.exp(gev_logpdf(z, mu, sigma, xi)))


def gev_quantile(p, mu, sigma, xi):
    """Inverse CDF for ``0 < p < 1``."""
    sigma = _check_sigma(sigma)
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise InvalidInputError("probability must lie strictly between 0 and 1")
    xi = np.asarray(xi, dtype=float)
    w = -np.log(-np.log(p))
    gumbel = np.abs(xi) < GUMBEL_EPS
    safe_xi = np.where(gumbel, 1.0, xi)
    # (exp(xi*w) - 1)/xi tends to w as xi -> 0.
    reduced = np.where(gumbel, w, np.expm1(xi * w) / safe_xi)
    return _out(mu + sigma * reduced)


def gumbel_quantile(p):
    """Standard Gumbel quantiles."""
    p = np.asarray(p, dtype=float)
    return _out(-np.log(-np.log(p)))
