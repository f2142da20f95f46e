"""Stationary and covariate-dependent GEV models fitted by maximum likelihood."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidInputError
from .distribution import GUMBEL_EPS
from .optimize import minimize

log = logging.getLogger(__name__)

PENALTY = 1e10
PARAM_NAMES = ("mu0", "mu1", "sigma0", "sigma1", "xi")
EULER_GAMMA = 0.5772


class LocationTrend(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"


class ScaleTrend(str, Enum):
    CONSTANT = "constant"
    EXP_LINEAR = "exp_linear"


@dataclass(frozen=True)
class ModelSpec:
    location_trend: LocationTrend = LocationTrend.CONSTANT
    scale_trend: ScaleTrend = ScaleTrend.CONSTANT

    @property
    def free(self) -> tuple:
        """Names of the parameters this model estimates."""
        names = ["mu0"]
        if self.location_trend == LocationTrend.LINEAR:
            names.append("mu1")
        names.append("sigma0")
        if self.scale_trend == ScaleTrend.EXP_LINEAR:
            names.append("sigma1")
        names.append("xi")
        return tuple(names)

    @property
    def n_params(self) -> int:
        return len(self.free)

    @property
    def stationary(self) -> bool:
        return self.n_params == 3

    @property
    def name(self) -> str:
        return {3: "stationary", 4: "model1", 5: "model2"}.get(self.n_params, "scale_only")

    def nests(self, other: "ModelSpec") -> bool:
        """True if every parameter of ``self`` is also free in ``other``."""
        return set(self.free) <= set(other.free)


STATIONARY = ModelSpec()
MODEL1 = ModelSpec(LocationTrend.LINEAR, ScaleTrend.CONSTANT)
MODEL2 = ModelSpec(LocationTrend.LINEAR, ScaleTrend.EXP_LINEAR)


@dataclass(frozen=True)
class GevParams:
    """Location ``mu0 + mu1*t``, scale ``exp(sigma0 + sigma1*t)``, shape ``xi``."""

    mu0: float
    sigma0: float
    xi: float
    mu1: float = 0.0
    sigma1: float = 0.0

    def location(self, t=0.0):
        return self.mu0 + self.mu1 * np.asarray(t, dtype=float)

    def scale(self, t=0.0):
        return np.exp(self.sigma0 + self.sigma1 * np.asarray(t, dtype=float))

    @property
    def has_trend(self) -> bool:
        return self.mu1 != 0.0 or self.sigma1 != 0.0

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in PARAM_NAMES}

    def vector(self, spec: ModelSpec) -> np.ndarray:
        return np.array([getattr(self, n) for n in spec.free], dtype=float)

    @classmethod
    def from_vector(cls, theta, spec: ModelSpec) -> "GevParams":
        values = dict(zip(spec.free, (float(v) for v in theta)))
        return cls(**values)


@dataclass(frozen=True)
class GevFit:
    spec: ModelSpec
    params: GevParams
    se: Optional[dict]
    nllh: float
    converged: bool
    iterations: int
    n_data: int
    covariance: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n_params(self) -> int:
        return self.spec.n_params


def as_arrays(data):
    """Coerce block maxima, or a ``(z, covariate)`` pair, to float arrays."""
    if isinstance(data, tuple) and len(data) == 2 and not hasattr(data[0], "z"):
        z, t = data
        z = np.asarray(z, dtype=float)
        t = np.zeros_like(z) if t is None else np.asarray(t, dtype=float)
    else:
        z = np.array([m.z for m in data], dtype=float)
        t = np.array([m.covariate for m in data], dtype=float)
    if z.shape != t.shape:
        raise InvalidInputError("data and covariate lengths differ")
    return z, t


def _nllh_arrays(params: GevParams, z, t) -> float:
    mu = params.mu0 + params.mu1 * t
    log_sigma = params.sigma0 + params.sigma1 * t
    sigma = np.exp(log_sigma)
    xi = params.xi
    y = (z - mu) / sigma
    if abs(xi) < GUMBEL_EPS:
        s = y
    else:
        arg = xi * y
        if np.any(arg <= -1.0):
            return PENALTY
        s = np.log1p(arg) / xi
    with np.errstate(over="ignore"):
        total = np.sum(log_sigma + (1.0 + xi) * s + np.exp(-s))
    if not math.isfinite(total):
        return PENALTY
    return float(total)


def nllh(params: GevParams, spec: ModelSpec, data) -> float:
    """Negative log-likelihood of ``data`` under ``params``.

    Parameters not free in ``spec`` are taken as zero. A point outside the
    support gives the finite penalty ``PENALTY`` instead of an error.
    """
    z, t = as_arrays(data)
    if z.size == 0:
        raise InvalidInputError("nllh needs at least one observation")
    return _nllh_arrays(_restrict(params, spec), z, t)


def _restrict(params: GevParams, spec: ModelSpec) -> GevParams:
    return GevParams(
        mu0=params.mu0,
        sigma0=params.sigma0,
        xi=params.xi,
        mu1=params.mu1 if "mu1" in spec.free else 0.0,
        sigma1=params.sigma1 if "sigma1" in spec.free else 0.0,
    )


def moment_start(spec: ModelSpec, z) -> GevParams:
    """Gumbel moment estimates with zero trend slopes and shape 0.1."""
    z = np.asarray(z, dtype=float)
    sd = z.std(ddof=1) if z.size > 1 else 1.0
    scale = max(sd, 1e-8) * math.sqrt(6.0) / math.pi
    return GevParams(mu0=float(z.mean() - EULER_GAMMA * scale), sigma0=math.log(scale), xi=0.1)


def hessian(fun, theta, rel_step=1e-4) -> np.ndarray:
    """Central-difference Hessian with steps ``rel_step * max(1, |theta_i|)``."""
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    h = rel_step * np.maximum(1.0, np.abs(theta))
    f0 = fun(theta)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (fun(theta + ei) - 2.0 * f0 + fun(theta - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            v = (
                fun(theta + ei + ej) - fun(theta + ei - ej)
                - fun(theta - ei + ej) + fun(theta - ei - ej)
            ) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = v
    return H


class _Reparam:
    """Affine map between model parameters and an internal vector in which
    the covariate is centred and scaled; this decorrelates intercepts from
    slopes and keeps the simplex well conditioned."""

    def __init__(self, spec: ModelSpec, t):
        self.spec = spec
        self.centre = float(np.mean(t)) if t.size else 0.0
        sd = float(np.std(t)) if t.size else 0.0
        self.width = sd if sd > 1e-12 else 1.0

    def to_internal(self, p: GevParams) -> np.ndarray:
        c, w = self.centre, self.width
        values = {
            "mu0": p.mu0 + p.mu1 * c,
            "mu1": p.mu1 * w,
            "sigma0": p.sigma0 + p.sigma1 * c,
            "sigma1": p.sigma1 * w,
            "xi": p.xi,
        }
        return np.array([values[n] for n in self.spec.free])

    def to_params(self, u) -> GevParams:
        c, w = self.centre, self.width
        v = dict(zip(self.spec.free, (float(x) for x in u)))
        mu1 = v.get("mu1", 0.0) / w
        sigma1 = v.get("sigma1", 0.0) / w
        return GevParams(
            mu0=v["mu0"] - mu1 * c,
            mu1=mu1,
            sigma0=v["sigma0"] - sigma1 * c,
            sigma1=sigma1,
            xi=v["xi"],
        )


def fit(
    spec: ModelSpec,
    data,
    start: Optional[GevParams] = None,
    max_restarts: int = 4,
    ftol: float = 1e-8,
) -> GevFit:
    """Maximum-likelihood fit of ``spec`` to block maxima.

    The simplex is restarted from its best vertex until a restart no longer
    improves the objective, which guards against premature collapse. The
    returned fit has ``converged=False`` when the iteration budget runs out,
    the optimum sits on the support penalty, or the observed information is
    not positive definite; standard errors are ``None`` in the last case.
    """
    z, t = as_arrays(data)
    n = z.size
    if n < 3 + spec.n_params:
        raise InvalidInputError(f"{spec.name} fit needs at least {3 + spec.n_params} points, got {n}")

    rep = _Reparam(spec, t)

    def objective(u):
        return _nllh_arrays(rep.to_params(u), z, t)

    candidates = [start] if start is not None else []
    base = moment_start(spec, z)
    candidates += [base, GevParams(base.mu0, base.sigma0, 0.0), GevParams(base.mu0, base.sigma0, -0.1)]
    u0 = None
    for cand in candidates:
        u = rep.to_internal(_restrict(cand, spec))
        if objective(u) < PENALTY:
            u0 = u
            break
    if u0 is None:
        raise InvalidInputError("no feasible starting point for the GEV fit")

    scale0 = math.exp(base.sigma0)
    steps = {"mu0": 0.1 * scale0, "mu1": 0.1 * scale0, "sigma0": 0.1, "sigma1": 0.1, "xi": 0.05}
    step = np.array([steps[name] for name in spec.free])

    iterations = 0
    res = minimize(objective, u0, step=step, ftol=ftol)
    iterations += res.iterations
    converged = res.converged
    for _ in range(max_restarts):
        if not converged:
            break
        again = minimize(objective, res.x, step=step * 0.1, ftol=ftol)
        iterations += again.iterations
        improved = res.fun - again.fun
        if again.fun <= res.fun:
            res = again
        converged = again.converged
        if improved < 10 * ftol:
            break

    params = rep.to_params(res.x)
    value = nllh(params, spec, (z, t))
    if value >= PENALTY:
        converged = False

    theta = params.vector(spec)
    H = hessian(lambda th: _nllh_arrays(GevParams.from_vector(th, spec), z, t), theta)
    se, cov = None, None
    try:
        H = 0.5 * (H + H.T)
        np.linalg.cholesky(H)
        cov = np.linalg.inv(H)
        diag = np.diag(cov)
        if np.all(diag > 0) and np.all(np.isfinite(diag)):
            se = dict(zip(spec.free, (float(v) for v in np.sqrt(diag))))
        else:
            cov = None
    except np.linalg.LinAlgError:
        pass
    if se is None:
        log.debug("%s fit: observed information is not positive definite", spec.name)
        converged = False

    return GevFit(spec, params, se, value, bool(converged), iterations, n, cov)


def fit_nested(data, specs: Sequence[ModelSpec] = (STATIONARY, MODEL1, MODEL2)) -> dict:
    """Fit a chain of nested models, warm-starting each richer model from
    the previous optimum so a richer model never reports a worse nllh."""
    fits = {}
    prev = None
    for spec in specs:
        best = fit(spec, data)
        if prev is not None:
            warm = fit(spec, data, start=prev.params)
            if warm.nllh < best.nllh or (warm.converged and not best.converged and warm.nllh <= best.nllh + 1e-6):
                best = warm
        fits[spec.name] = best
        prev = best
    return fits
