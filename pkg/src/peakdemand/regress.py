"""Year-fixed-effects regression of demand anomaly on apparent temperature,
and LOESS smoothing for the anomaly scatter."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg, stats

from .errors import InvalidInputError, SingularDesignError
from .ingest import DivisionSeries


class AnomalyPoint(NamedTuple):
    date: date
    year: int
    anomaly: float
    at: float


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    year_effects: dict
    adj_r2: float
    p_value: float
    n: int
    base_year: int
    r2: float
    t_stats: dict
    f_statistic: float


def yearly_anomaly(series: DivisionSeries) -> list:
    """Demand minus the mean demand of its calendar year."""
    if not series.days:
        raise InvalidInputError("empty series")
    by_year = defaultdict(list)
    for d in series.days:
        by_year[d.date.year].append(d.demand)
    means = {y: math.fsum(v) / len(v) for y, v in by_year.items()}
    return [AnomalyPoint(d.date, d.date.year, d.demand - means[d.date.year], d.at) for d in series.days]


def block_mean_points(points: Sequence[AnomalyPoint], block_len: int) -> list:
    """Average consecutive runs of ``block_len`` points within each year."""
    out = []
    by_year = defaultdict(list)
    for p in points:
        by_year[p.year].append(p)
    for year in sorted(by_year):
        pts = by_year[year]
        for start in range(0, len(pts), block_len):
            chunk = pts[start:start + block_len]
            out.append(AnomalyPoint(
                chunk[0].date, year,
                float(np.mean([p.anomaly for p in chunk])),
                float(np.mean([p.at for p in chunk])),
            ))
    return out


def design_matrix(points: Sequence[AnomalyPoint], base_year: int):
    """Columns: intercept, AT, one indicator per non-base year."""
    years = sorted({p.year for p in points})
    if base_year not in years:
        raise InvalidInputError(f"base year {base_year} not present in data")
    others = [y for y in years if y != base_year]
    X = np.zeros((len(points), 2 + len(others)))
    X[:, 0] = 1.0
    X[:, 1] = [p.at for p in points]
    col = {y: 2 + i for i, y in enumerate(others)}
    for row, p in enumerate(points):
        if p.year != base_year:
            X[row, col[p.year]] = 1.0
    y = np.array([p.anomaly for p in points], dtype=float)
    return X, y, others


def fixed_effects_fit(points: Sequence[AnomalyPoint], base_year: Optional[int] = None) -> RegressionFit:
    """OLS of anomaly on AT with year indicators, solved by QR.

    ``base_year`` defaults to the earliest year; its effect is fixed at 0.
    """
    if not points:
        raise InvalidInputError("no points")
    if base_year is None:
        base_year = min(p.year for p in points)
    X, y, others = design_matrix(points, base_year)
    n, k = X.shape
    if len({p.at for p in points}) < 2:
        raise SingularDesignError("apparent temperature is constant")
    Q, R = linalg.qr(X, mode="economic")
    diag = np.abs(np.diag(R))
    if n <= k or diag.min() <= 1e-10 * diag.max():
        raise SingularDesignError("design matrix is rank deficient")
    beta = linalg.solve_triangular(R, Q.T @ y)

    resid = y - X @ beta
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    dof = n - k
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof
    noiseless = rss <= 1e-24 * max(tss, 1.0)
    if noiseless:
        f_stat, p_value = math.inf, 0.0
    else:
        f_stat = (r2 / (k - 1)) / ((1.0 - r2) / dof)
        p_value = float(stats.f.sf(f_stat, k - 1, dof))

    names = ["intercept", "at"] + [str(yr) for yr in others]
    if noiseless:
        t_stats = {name: math.inf for name in names}
    else:
        Rinv = linalg.solve_triangular(R, np.eye(k))
        se = np.sqrt(rss / dof * np.sum(Rinv ** 2, axis=1))
        t_stats = dict(zip(names, (float(v) for v in beta / se)))

    effects = {base_year: 0.0}
    effects.update({yr: float(beta[2 + i]) for i, yr in enumerate(others)})
    return RegressionFit(
        slope=float(beta[1]),
        intercept=float(beta[0]),
        year_effects=dict(sorted(effects.items())),
        adj_r2=float(adj_r2),
        p_value=p_value,
        n=n,
        base_year=base_year,
        r2=float(r2),
        t_stats=t_stats,
        f_statistic=float(f_stat),
    )


def percent_sensitivity(slope: float, mean_daily_demand: float) -> float:
    """Slope as a percentage of mean daily demand per degree."""
    if not mean_daily_demand > 0:
        raise InvalidInputError("mean daily demand must be positive")
    return 100.0 * slope / mean_daily_demand


def loess(x, y, span: float = 0.75, eval_x=None) -> np.ndarray:
    """Local linear regression with tricube weights.

    Each evaluation point uses its ``floor(span * n)`` nearest neighbours.
    Returns an ``(m, 2)`` array of ``(x, yhat)`` rows; evaluation points
    default to the sorted unique inputs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 3 or y.size != n:
        raise InvalidInputError("loess needs at least 3 paired points")
    if not 0 < span <= 1:
        raise InvalidInputError("span must lie in (0, 1]")
    q = int(math.floor(span * n + 1e-9))
    if q < 2:
        raise InvalidInputError("span * n must be at least 2")
    # Sorting makes the output independent of input order.
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    xs = np.unique(x) if eval_x is None else np.asarray(eval_x, dtype=float).ravel()
    out = np.empty_like(xs)
    for i, x0 in enumerate(xs):
        dist = np.abs(x - x0)
        h = np.partition(dist, q - 1)[q - 1]
        if h > 0:
            u = np.clip(dist / h, 0.0, 1.0)
            w = (1.0 - u ** 3) ** 3
        else:
            w = (dist == 0).astype(float)
        out[i] = _local_linear(x, y, w, x0)
    return np.column_stack([xs, out])


def _local_linear(x, y, w, x0):
    sw = w.sum()
    xbar = (w @ x) / sw
    ybar = (w @ y) / sw
    dx = x - xbar
    sxx = w @ (dx * dx)
    if sxx <= 1e-12 * max(1.0, xbar * xbar) * sw:
        return ybar
    slope = (w @ (dx * (y - ybar))) / sxx
    return ybar + slope * (x0 - xbar)
