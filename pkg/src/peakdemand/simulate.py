"""Synthetic climate and feeder-demand data with known ground truth.

Daily apparent temperature follows an annual sinusoid plus Gaussian noise.
Sheddable (residential-type) feeders respond linearly to apparent
temperature; non-sheddable feeders carry a flat base load plus noise.
Peaks sit on top of the sheddable load: within every ``peak_window``
calendar days one uniformly chosen day receives an extra ``peak_mw * g``
where ``g`` is drawn from the GEV ``gev_truth`` evaluated at that day's
apparent temperature. A positive ``gev_truth.mu1`` therefore
makes block peaks grow with heat, and ``mu1 = sigma1 = 0`` gives peaks
unrelated to temperature.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Optional

import numpy as np

from .climate import MAGNUS
from .errors import InvalidInputError
from .gev import GevParams, sample
from .ingest import WEEKDAYS, normalize_weekdays


@dataclass(frozen=True)
class TempCycle:
    mean: float = 27.0
    amplitude: float = 5.0
    noise_sd: float = 1.5
    #: Day of year at which the cycle peaks (late April for Pune).
    peak_doy: int = 115


@dataclass(frozen=True)
class SimDivision:
    name: str
    feeder_mix: float = 0.9
    n_feeders: int = 20
    base_mw: float = 2500.0
    #: MW per degC for the whole division, split by feeder type.
    demand_response: dict = field(default_factory=lambda: {"residential": 40.0, "industrial": 0.0})
    gev_truth: GevParams = field(default_factory=lambda: GevParams(mu0=1.0, sigma0=math.log(0.5), xi=-0.1))
    peak_mw: float = 150.0
    noise_sd: float = 30.0
    #: Weekdays on which non-sheddable feeders run at ``rest_factor`` load.
    rest_days: tuple = ()
    rest_factor: float = 0.6

    def __post_init__(self):
        if not 0.0 <= self.feeder_mix <= 1.0:
            raise InvalidInputError("feeder_mix must lie in [0, 1]")
        if self.n_feeders < 1:
            raise InvalidInputError("n_feeders must be at least 1")
        if self.noise_sd < 0 or self.base_mw <= 0 or self.peak_mw < 0:
            raise InvalidInputError("noise_sd, base_mw and peak_mw must be positive")


@dataclass(frozen=True)
class SimSpec:
    divisions: tuple
    n_years: int = 5
    start_year: int = 2008
    temp_cycle: TempCycle = field(default_factory=TempCycle)
    peak_window: int = 15

    def __post_init__(self):
        if self.n_years < 1:
            raise InvalidInputError("n_years must be at least 1")
        if self.temp_cycle.amplitude < 0 or self.temp_cycle.noise_sd < 0:
            raise InvalidInputError("temperature amplitude and noise must be nonnegative")
        if self.peak_window < 1:
            raise InvalidInputError("peak_window must be positive")
        if len({d.name for d in self.divisions}) != len(self.divisions):
            raise InvalidInputError("division names must be unique")


def pune_like_spec(n_years: int = 5) -> SimSpec:
    """Four divisions mimicking the industrial/residential mix of Pune."""
    flat = GevParams(mu0=1.0, sigma0=math.log(0.5), xi=-0.1)
    hot = GevParams(mu0=-4.4, mu1=0.2, sigma0=math.log(0.5), xi=-0.1)
    return SimSpec(
        n_years=n_years,
        divisions=(
            # Peak events are residential load, so they scale with the sheddable share.
            SimDivision("Bhosari", 0.15, 30, 4000.0, {"residential": 15.0, "industrial": 0.0}, flat,
                        peak_mw=25.0, rest_days=("Thursday",)),
            SimDivision("Kothrud", 0.9, 20, 2300.0, {"residential": 40.0, "industrial": 0.0}, hot),
            SimDivision("Pimpri", 0.5, 30, 4500.0, {"residential": 45.0, "industrial": 0.0}, hot,
                        rest_days=("Thursday",)),
            SimDivision("Shivaji Nagar", 0.7, 20, 2500.0, {"residential": 43.0, "industrial": 0.0}, hot),
        ),
    )


def _days(spec: SimSpec) -> list:
    start = date(spec.start_year, 1, 1)
    end = date(spec.start_year + spec.n_years, 1, 1)
    return [start + timedelta(days=i) for i in range((end - start).days)]


def simulate_arrays(spec: SimSpec, seed: int) -> dict:
    """Simulated series as arrays: dates, climate columns and per-feeder demand."""
    rng = np.random.default_rng(seed)
    days = _days(spec)
    n = len(days)
    cyc = spec.temp_cycle
    doy = np.array([d.timetuple().tm_yday for d in days], dtype=float)
    at = cyc.mean + cyc.amplitude * np.cos(2 * np.pi * (doy - cyc.peak_doy) / 365.25)
    at = at + rng.normal(0.0, cyc.noise_sd, n)

    # Humid monsoon around mid-August, dry spring.
    e = np.clip(18.0 + 8.0 * np.cos(2 * np.pi * (doy - 228) / 365.25) + rng.normal(0, 1.5, n), 1.0, None)
    w = rng.gamma(4.0, 0.6, n)
    ta = at - 0.33 * e + 0.7 * w + 4.0
    a, b, c = MAGNUS
    rh = np.clip(100.0 * e / (a * np.exp(b * ta / (c + ta))), 0.0, 100.0)

    weekday = np.array([d.weekday() for d in days])
    feeders = []
    for div in spec.divisions:
        n_shed = int(round(div.feeder_mix * div.n_feeders))
        n_rest = div.n_feeders - n_shed
        noise_each = div.noise_sd / math.sqrt(div.n_feeders)
        res_resp = float(div.demand_response.get("residential", 0.0))
        ind_resp = float(div.demand_response.get("industrial", 0.0))

        peaks = np.zeros(n)
        if n_shed:
            starts = np.arange(0, n, spec.peak_window)
            widths = np.minimum(spec.peak_window, n - starts)
            when = starts + (rng.random(starts.size) * widths).astype(int)
            g = sample(div.gev_truth, when.size, rng.integers(2**32), at[when])
            peaks[when] = div.peak_mw * g

        rest = np.isin(weekday, [WEEKDAYS.index(w) for w in normalize_weekdays(div.rest_days)])
        for k in range(div.n_feeders):
            sheddable = k < n_shed
            if sheddable:
                base = div.base_mw * div.feeder_mix / n_shed
                load = base + (res_resp * at + peaks) / n_shed
            else:
                base = div.base_mw * (1.0 - div.feeder_mix) / n_rest
                load = base + ind_resp * at / n_rest
                load = np.where(rest, load * div.rest_factor, load)
            load = np.clip(load + rng.normal(0.0, noise_each, n), 0.0, None)
            fid = f"{div.name[:3].upper()}-{k + 1:03d}"
            feeders.append((fid, div.name, sheddable, load))

    return {"dates": days, "ta": ta, "rh": rh, "e": e, "w": w, "at": at, "feeders": feeders}


def simulate(spec: SimSpec, seed: int) -> tuple:
    """Return ``(climate_csv, demand_csv)`` text, identical for equal seeds."""
    sim = simulate_arrays(spec, seed)
    clim = io.StringIO()
    clim.write("date,ta,rh,e,w\n")
    for i, d in enumerate(sim["dates"]):
        clim.write(f"{d.isoformat()},{sim['ta'][i]:.3f},{sim['rh'][i]:.2f},{sim['e'][i]:.3f},{sim['w'][i]:.3f}\n")
    dem = io.StringIO()
    dem.write("date,feeder_id,division,demand_mw,sheddable\n")
    for i, d in enumerate(sim["dates"]):
        iso = d.isoformat()
        for fid, division, sheddable, load in sim["feeders"]:
            dem.write(f"{iso},{fid},{division},{load[i]:.4f},{'true' if sheddable else 'false'}\n")
    return clim.getvalue(), dem.getvalue()


def spec_from_dict(raw: Optional[dict]) -> SimSpec:
    """Build a :class:`SimSpec` from a plain mapping (config file section)."""
    if not raw:
        return pune_like_spec()
    raw = dict(raw)
    divisions = []
    for d in raw.pop("divisions", []):
        d = dict(d)
        truth = d.pop("gev_truth", None)
        if truth is not None:
            d["gev_truth"] = GevParams(**truth)
        if "rest_days" in d:
            d["rest_days"] = tuple(d["rest_days"])
        divisions.append(SimDivision(**d))
    if not divisions:
        divisions = list(pune_like_spec().divisions)
    cycle = raw.pop("temp_cycle", None)
    kwargs = dict(raw)
    if cycle is not None:
        kwargs["temp_cycle"] = TempCycle(**cycle)
    try:
        return SimSpec(divisions=tuple(divisions), **kwargs)
    except TypeError as exc:
        raise InvalidInputError(f"bad simulate section: {exc}") from None
