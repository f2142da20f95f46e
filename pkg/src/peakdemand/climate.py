"""Apparent temperature from daily station observations."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date
from typing import Optional

from .errors import InvalidInputError

#: Magnus coefficients (hPa, dimensionless, degC) for saturation vapor pressure.
MAGNUS = (6.105, 17.27, 237.7)


@dataclass(frozen=True)
class ClimateDay:
    """One day of weather observations.

    ``at`` stays ``None`` until :func:`derive` fills it in.
    """

    date: date
    ta: float
    w: float
    rh: Optional[float] = None
    e: Optional[float] = None
    at: Optional[float] = None

    def __post_init__(self):
        if self.rh is not None and not 0.0 <= self.rh <= 100.0:
            raise InvalidInputError(f"relative humidity {self.rh} outside [0, 100]")
        if not (math.isfinite(self.w) and self.w >= 0.0):
            raise InvalidInputError(f"wind speed must be finite and >= 0, got {self.w}")
        if self.e is not None and not (math.isfinite(self.e) and self.e >= 0.0):
            raise InvalidInputError(f"vapor pressure must be finite and >= 0, got {self.e}")
        if self.e is None and self.rh is None:
            raise InvalidInputError("one of vapor pressure or relative humidity is required")


def apparent_temperature(ta: float, e: float, w: float) -> float:
    """Apparent temperature in degC from dry-bulb ``ta`` (degC), vapor
    pressure ``e`` (hPa) and 10 m wind speed ``w`` (m/s)."""
    if not math.isfinite(ta):
        raise InvalidInputError(f"temperature must be finite, got {ta}")
    if not (math.isfinite(e) and e >= 0.0):
        raise InvalidInputError(f"vapor pressure must be finite and >= 0, got {e}")
    if not (math.isfinite(w) and w >= 0.0):
        raise InvalidInputError(f"wind speed must be finite and >= 0, got {w}")
    return ta + 0.33 * e - 0.7 * w - 4.0


def vapor_pressure_from_rh(ta: float, rh: float, magnus=MAGNUS) -> float:
    """Water vapor pressure (hPa) from temperature and relative humidity."""
    if not (math.isfinite(rh) and 0.0 <= rh <= 100.0):
        raise InvalidInputError(f"relative humidity {rh} outside [0, 100]")
    if not math.isfinite(ta):
        raise InvalidInputError(f"temperature must be finite, got {ta}")
    a, b, c = magnus
    return (rh / 100.0) * a * math.exp(b * ta / (c + ta))


def derive(day: ClimateDay, magnus=MAGNUS) -> ClimateDay:
    """Return ``day`` with ``at`` populated.

    Recorded vapor pressure wins; relative humidity is only a fallback.
    """
    e = day.e if day.e is not None else vapor_pressure_from_rh(day.ta, day.rh, magnus)
    return replace(day, at=apparent_temperature(day.ta, e, day.w))
