"""Nelder-Mead simplex minimization."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from ..errors import InvalidInputError


class MinimizeResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    nfev: int


def minimize(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    step: Optional[Sequence[float]] = None,
    ftol: float = 1e-8,
    xtol: float = 1e-7,
    max_iter: Optional[int] = None,
    reflect: float = 1.0,
    expand: float = 2.0,
    contract: float = 0.5,
    shrink: float = 0.5,
) -> MinimizeResult:
    """Minimize ``objective`` from ``start`` with the Nelder-Mead simplex.

    Parameters
    ----------
    objective : callable
        Maps a k-vector to a float. Infeasible points should return a large
        finite value rather than raising.
    start : sequence of float
        Initial vertex; the objective must be finite here.
    step : sequence of float, optional
        Offsets for the other k initial vertices along each axis. Defaults
        to 5% of each nonzero coordinate and 0.00025 for zero coordinates.
    ftol : float
        Converged once the spread of objective values over the simplex drops
        below this and the vertices lie within ``xtol`` of the best one.
    xtol : float
        Vertex spread tolerance, relative to ``max(1, |x|)`` per coordinate.
        Guards against a simplex straddling the optimum with equal values.
    max_iter : int, optional
        Iteration cap, ``500 * k`` by default. Hitting it returns
        ``converged=False``.

    Returns
    -------
    MinimizeResult
        Best vertex, its value, iterations used, convergence flag and number
        of objective evaluations.
    """
    x0 = np.asarray(start, dtype=float).ravel()
    k = x0.size
    if max_iter is None:
        max_iter = 500 * k
    f0 = float(objective(x0))
    if not math.isfinite(f0):
        raise InvalidInputError("objective is not finite at the starting point")
    if step is None:
        step = np.where(x0 != 0.0, 0.05 * x0, 0.00025)
    step = np.broadcast_to(np.asarray(step, dtype=float), (k,))

    nfev = 1

    def f(x):
        nonlocal nfev
        nfev += 1
        v = float(objective(x))
        return v if not math.isnan(v) else math.inf

    simplex = np.empty((k + 1, k))
    fvals = np.empty(k + 1)
    simplex[0], fvals[0] = x0, f0
    for i in range(k):
        v = x0.copy()
        v[i] += step[i]
        simplex[i + 1], fvals[i + 1] = v, f(v)

    iterations = 0
    converged = False
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        spread = np.max(np.abs(simplex[1:] - simplex[0]) / np.maximum(1.0, np.abs(simplex[0])))
        if fvals[-1] - fvals[0] < ftol and spread < xtol:
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1

        best, worst = fvals[0], fvals[-1]
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + reflect * (centroid - simplex[-1])
        fr = f(xr)
        if fr < best:
            xe = centroid + expand * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < worst:
            xc = centroid + contract * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + contract * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < worst:
                simplex[-1], fvals[-1] = xc, fc
                continue
        for i in range(1, k + 1):
            simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0])
            fvals[i] = f(simplex[i])

    return MinimizeResult(simplex[0].copy(), float(fvals[0]), iterations, converged, nfev)
