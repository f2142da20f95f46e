"""Parsing of climate and feeder-demand files, division classification and
daily aggregation."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, NamedTuple, Optional, Sequence, TextIO

import numpy as np

from . import climate as _climate
from .climate import ClimateDay
from .errors import (
    DuplicateKeyError,
    InsufficientDataError,
    InvalidInputError,
    JoinError,
    SchemaError,
)

log = logging.getLogger(__name__)

INDUSTRIAL = "Industrial"
RESIDENTIAL = "Residential"
MIXED = "Mixed"
CLASSES = (INDUSTRIAL, RESIDENTIAL, MIXED)

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


@dataclass(frozen=True)
class FeederDay:
    date: date
    feeder_id: str
    division: str
    demand: float
    sheddable: bool


@dataclass(frozen=True)
class DivisionClass:
    division: str
    klass: str
    sheddable_fraction: float


class Day(NamedTuple):
    date: date
    demand: float
    at: float


@dataclass(frozen=True)
class DivisionSeries:
    """Daily division demand joined with apparent temperature.

    ``days`` is sorted by date and holds no day on an excluded weekday.
    """

    division: str
    klass: Optional[str]
    days: tuple
    excluded_weekdays: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for prev, cur in zip(self.days, self.days[1:]):
            if not prev.date < cur.date:
                raise InvalidInputError(f"days not strictly increasing at {cur.date}")
        for d in self.days:
            if WEEKDAYS[d.date.weekday()] in self.excluded_weekdays:
                raise InvalidInputError(f"{d.date} falls on an excluded weekday")

    def __len__(self):
        return len(self.days)

    @property
    def demand(self) -> np.ndarray:
        return np.array([d.demand for d in self.days], dtype=float)

    @property
    def at(self) -> np.ndarray:
        return np.array([d.at for d in self.days], dtype=float)

    @property
    def dates(self) -> list:
        return [d.date for d in self.days]


def normalize_weekdays(names: Iterable[str]) -> frozenset:
    """Map weekday names or 3-letter abbreviations (any case) to full names."""
    out = set()
    for name in names:
        key = str(name).strip().lower()
        for full in WEEKDAYS:
            if key == full.lower() or key == full[:3].lower():
                out.add(full)
                break
        else:
            raise InvalidInputError(f"unknown weekday {name!r}")
    return frozenset(out)


def _reader(stream: TextIO) -> csv.DictReader:
    text = stream.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise SchemaError("empty input: a header row is required")
    try:
        dialect = csv.Sniffer().sniff(lines[0], delimiters=",;\t|")
        delimiter = dialect.delimiter
    except csv.Error:
        delimiter = ","
    reader = csv.DictReader(io.StringIO("\n".join(lines)), delimiter=delimiter)
    reader.fieldnames = [c.strip() for c in (reader.fieldnames or [])]
    return reader


def _require(reader, columns):
    for col in columns:
        if col not in reader.fieldnames:
            raise SchemaError(f"missing mandatory column {col!r}", column=col)


def _cell(row, name):
    value = row.get(name)
    if value is None:
        return None
    value = value.strip()
    return value or None


def _float(row, name, rownum, required=True):
    raw = _cell(row, name)
    if raw is None:
        if required:
            raise SchemaError(f"blank value in column {name!r}", row=rownum, column=name)
        return None
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"cannot parse {raw!r} in column {name!r}", row=rownum, column=name) from None
    if not math.isfinite(value):
        raise InvalidInputError(f"non-finite value in column {name!r}", row=rownum)
    return value


def _date(row, rownum):
    raw = _cell(row, "date")
    try:
        return date.fromisoformat(raw or "")
    except ValueError:
        raise SchemaError(f"cannot parse date {raw!r}", row=rownum, column="date") from None


def parse_climate_csv(stream: TextIO, magnus=_climate.MAGNUS) -> list:
    """Read ``date,ta,rh,e,w`` rows into derived :class:`ClimateDay` records.

    Row numbers in errors count the header as row 1.
    """
    reader = _reader(stream)
    _require(reader, ("date", "ta", "w"))
    if "e" not in reader.fieldnames and "rh" not in reader.fieldnames:
        raise SchemaError("missing mandatory column 'e' (or fallback 'rh')", column="e")
    days, seen = [], {}
    for rownum, row in enumerate(reader, start=2):
        d = _date(row, rownum)
        if d in seen:
            raise DuplicateKeyError(d.isoformat(), rownum)
        seen[d] = rownum
        try:
            day = ClimateDay(
                date=d,
                ta=_float(row, "ta", rownum),
                w=_float(row, "w", rownum),
                rh=_float(row, "rh", rownum, required=False),
                e=_float(row, "e", rownum, required=False),
            )
            days.append(_climate.derive(day, magnus))
        except InvalidInputError as exc:
            if exc.row is not None:
                raise
            raise InvalidInputError(str(exc), row=rownum) from None
    return days


def parse_demand_csv(stream: TextIO) -> list:
    """Read ``date,feeder_id,division,demand_mw,sheddable`` rows."""
    reader = _reader(stream)
    _require(reader, ("date", "feeder_id", "division", "demand_mw", "sheddable"))
    out, seen = [], set()
    for rownum, row in enumerate(reader, start=2):
        d = _date(row, rownum)
        feeder = _cell(row, "feeder_id")
        division = _cell(row, "division")
        if feeder is None or division is None:
            raise SchemaError("blank feeder_id or division", row=rownum)
        demand = _float(row, "demand_mw", rownum)
        if demand < 0:
            raise InvalidInputError(f"negative demand {demand}", row=rownum)
        token = (_cell(row, "sheddable") or "").lower()
        if token in _TRUE:
            sheddable = True
        elif token in _FALSE:
            sheddable = False
        else:
            raise SchemaError(f"unknown sheddable token {token!r}", row=rownum, column="sheddable")
        key = (feeder, d)
        if key in seen:
            raise DuplicateKeyError(f"{feeder}@{d.isoformat()}", rownum)
        seen.add(key)
        out.append(FeederDay(d, feeder, division, demand, sheddable))
    return out


def group_by_division(records: Iterable[FeederDay]) -> dict:
    groups = defaultdict(list)
    for r in records:
        groups[r.division].append(r)
    return dict(sorted(groups.items()))


def default_snapshot_dates(records: Sequence[FeederDay], months=(6, 12)) -> list:
    """First recorded date in each of ``months`` for every year present."""
    firsts = {}
    for r in records:
        if r.date.month in months:
            key = (r.date.year, r.date.month)
            if key not in firsts or r.date < firsts[key]:
                firsts[key] = r.date
    return sorted(firsts.values())


def class_from_fraction(fraction: float, industrial_max=0.20, residential_min=0.80) -> str:
    if fraction <= industrial_max:
        return INDUSTRIAL
    if fraction >= residential_min:
        return RESIDENTIAL
    return MIXED


def classify_division(
    records: Sequence[FeederDay],
    snapshot_dates: Sequence[date],
    industrial_max: float = 0.20,
    residential_min: float = 0.80,
) -> DivisionClass:
    """Classify a division by its mean share of sheddable feeders over the
    snapshot dates."""
    divisions = {r.division for r in records}
    if len(divisions) > 1:
        raise InvalidInputError(f"records span several divisions: {sorted(divisions)}")
    if not snapshot_dates:
        raise InvalidInputError("at least one snapshot date is required")
    by_date = defaultdict(list)
    for r in records:
        by_date[r.date].append(r.sheddable)
    ratios = []
    for d in snapshot_dates:
        flags = by_date.get(d)
        if not flags:
            log.warning("no feeder records on snapshot date %s", d)
            continue
        ratios.append(sum(flags) / len(flags))
    if not ratios:
        raise InsufficientDataError("no feeder records on any snapshot date")
    fraction = float(np.mean(ratios))
    name = divisions.pop() if divisions else ""
    return DivisionClass(name, class_from_fraction(fraction, industrial_max, residential_min), fraction)


def aggregate_division_daily(
    records: Sequence[FeederDay],
    climate: Sequence[ClimateDay],
    excluded_weekdays: Iterable[str] = (),
    klass: Optional[str] = None,
) -> DivisionSeries:
    """Sum feeder demand per date and attach that date's apparent temperature."""
    excluded = normalize_weekdays(excluded_weekdays)
    divisions = {r.division for r in records}
    if len(divisions) > 1:
        raise InvalidInputError(f"records span several divisions: {sorted(divisions)}")
    totals = defaultdict(float)
    # Sum in a fixed order so the result does not depend on record order.
    for r in sorted(records, key=lambda r: (r.date, r.feeder_id)):
        totals[r.date] += r.demand
    at_by_date = {c.date: c.at for c in climate}
    missing = [d for d in totals if d not in at_by_date]
    if missing:
        raise JoinError(missing)
    days = tuple(
        Day(d, totals[d], at_by_date[d])
        for d in sorted(totals)
        if WEEKDAYS[d.weekday()] not in excluded
    )
    return DivisionSeries(divisions.pop() if divisions else "", klass, days, excluded)


def write_division_series(series: DivisionSeries, stream: TextIO) -> None:
    """Write a series as ``date,demand_mw,at`` with a metadata comment line."""
    excluded = ";".join(w for w in WEEKDAYS if w in series.excluded_weekdays)
    stream.write(f"# division={series.division}|class={series.klass or ''}|excluded_weekdays={excluded}\n")
    stream.write("date,demand_mw,at\n")
    for d in series.days:
        stream.write(f"{d.date.isoformat()},{d.demand!r},{d.at!r}\n")


def read_division_series(stream: TextIO) -> DivisionSeries:
    text = stream.read()
    meta = {}
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].strip().split("|"):
                key, _, value = item.partition("=")
                meta[key.strip()] = value.strip()
            break
    reader = _reader(io.StringIO(text))
    _require(reader, ("date", "demand_mw", "at"))
    days = tuple(
        Day(_date(row, n), _float(row, "demand_mw", n), _float(row, "at", n))
        for n, row in enumerate(reader, start=2)
    )
    excluded = [w for w in meta.get("excluded_weekdays", "").split(";") if w]
    return DivisionSeries(
        meta.get("division", ""), meta.get("class") or None, days, normalize_weekdays(excluded)
    )
