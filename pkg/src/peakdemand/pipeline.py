"""End-to-end analysis driver: configuration, per-division stages and
report emission."""

from __future__ import annotations

import json
import logging
import math
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import blocks as _blocks
from . import ingest, regress
from .climate import MAGNUS
from .errors import ConfigError, PeakDemandError
from .gev import (
    MODEL1,
    MODEL2,
    STATIONARY,
    fit_nested,
    lrt,
    qq_points,
    return_level,
)

log = logging.getLogger(__name__)

STAGES = ("ingest", "classify", "blocks", "fit", "lrt", "regress", "report")
#: Headline comparison used for the non-stationary verdict.
HEADLINE_LRT = "stationary_vs_model2"
LRT_PAIRS = (
    ("stationary_vs_model1", "stationary", "model1"),
    ("model1_vs_model2", "model1", "model2"),
    ("stationary_vs_model2", "stationary", "model2"),
)


class StageError(PeakDemandError):
    def __init__(self, stage, cause, division=None):
        where = f" (division {division})" if division else ""
        super().__init__(f"stage {stage!r}{where}: {cause}")
        self.stage = stage
        self.cause = cause
        self.division = division


@dataclass
class DivisionConfig:
    name: str
    class_override: Optional[str] = None
    excluded_weekdays: tuple = ()


@dataclass
class PipelineConfig:
    climate_path: Optional[Path] = None
    demand_path: Optional[Path] = None
    divisions: list = field(default_factory=list)
    block_len: int = 15
    covariate_mode: str = "argmax"
    base_year: Optional[int] = None
    output_dir: Path = Path("out")
    seed: Optional[int] = None
    loess_span: float = 0.75
    regression_points: str = "daily"
    return_periods: tuple = (2, 5, 10, 20, 50, 100)
    industrial_max: float = 0.20
    residential_min: float = 0.80
    snapshot_months: tuple = (6, 12)
    magnus: tuple = MAGNUS
    figures: bool = True
    simulate: dict = field(default_factory=dict)

    def validate(self):
        if self.block_len not in _blocks.BLOCK_LENGTHS:
            raise ConfigError(f"block_len must be one of {_blocks.BLOCK_LENGTHS}, got {self.block_len}")
        if self.covariate_mode not in _blocks.COVARIATE_MODES:
            raise ConfigError(f"covariate must be one of {_blocks.COVARIATE_MODES}")
        if self.regression_points not in ("daily", "block_mean"):
            raise ConfigError("regression_points must be 'daily' or 'block_mean'")
        if not 0 < self.loess_span <= 1:
            raise ConfigError("loess_span must lie in (0, 1]")
        if not 0 <= self.industrial_max < self.residential_min <= 1:
            raise ConfigError("classification thresholds must satisfy 0 <= industrial_max < residential_min <= 1")
        for d in self.divisions:
            if d.class_override is not None and d.class_override not in ingest.CLASSES:
                raise ConfigError(f"unknown class override {d.class_override!r} for {d.name}")
            try:
                ingest.normalize_weekdays(d.excluded_weekdays)
            except PeakDemandError as exc:
                raise ConfigError(str(exc)) from None
        return self


_COV_ALIASES = {"argmax": "argmax", "argmax_day": "argmax", "block-mean": "block_mean", "block_mean": "block_mean"}


def load_config(path=None, **overrides) -> PipelineConfig:
    """Read a YAML config and apply non-``None`` keyword overrides.

    Relative paths in the file resolve against the file's directory.
    """
    raw = {}
    root = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text()) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a mapping")
        root = path.parent
    raw = dict(raw)
    raw.update({k: v for k, v in overrides.items() if v is not None})

    known = set(PipelineConfig.__dataclass_fields__)
    if "covariate" in raw:
        raw["covariate_mode"] = raw.pop("covariate")
    if "output" in raw:
        raw["output_dir"] = raw.pop("output")
    classification = raw.pop("classification", None) or {}
    for key in ("industrial_max", "residential_min", "snapshot_months"):
        if key in classification:
            raw[key] = classification[key]
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    divisions = []
    for entry in raw.pop("divisions", None) or []:
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"division entry needs a name: {entry!r}")
        extra = set(entry) - {"name", "class_override", "class", "excluded_weekdays"}
        if extra:
            raise ConfigError(f"unknown keys for division {entry['name']}: {sorted(extra)}")
        divisions.append(DivisionConfig(
            name=str(entry["name"]),
            class_override=entry.get("class_override", entry.get("class")),
            excluded_weekdays=tuple(entry.get("excluded_weekdays") or ()),
        ))
    try:
        cfg = PipelineConfig(divisions=divisions, **raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    for name in ("climate_path", "demand_path", "output_dir"):
        value = getattr(cfg, name)
        if value is not None:
            value = Path(value)
            setattr(cfg, name, value if value.is_absolute() else root / value)
    try:
        cfg.block_len = int(cfg.block_len)
        cfg.covariate_mode = _COV_ALIASES.get(str(cfg.covariate_mode), str(cfg.covariate_mode))
        if cfg.base_year is not None:
            cfg.base_year = int(cfg.base_year)
        if cfg.seed is not None:
            cfg.seed = int(cfg.seed)
        cfg.loess_span = float(cfg.loess_span)
        cfg.return_periods = tuple(float(t) for t in cfg.return_periods)
        cfg.snapshot_months = tuple(int(m) for m in cfg.snapshot_months)
        cfg.magnus = tuple(float(c) for c in cfg.magnus)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return cfg.validate()


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_").lower() or "division"


def _num(x):
    """JSON-safe float: non-finite values become ``None``."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def fit_to_dict(fit) -> dict:
    out = {
        "spec": {
            "name": fit.spec.name,
            "location_trend": fit.spec.location_trend.value,
            "scale_trend": fit.spec.scale_trend.value,
            "n_params": fit.spec.n_params,
        },
    }
    out.update(fit.params.as_dict())
    out["se"] = None if fit.se is None else {k: _num(v) for k, v in fit.se.items()}
    out.update(nllh=_num(fit.nllh), converged=fit.converged, iterations=fit.iterations, n_data=fit.n_data)
    return out


def lrt_to_dict(result, nested: str, full: str) -> dict:
    return {
        "nested": nested,
        "full": full,
        "lrt_statistic": result.statistic,
        "df": result.df,
        "critical_95": result.critical_95,
        "critical_90": result.critical_90,
        "significant_95": result.significant_95,
        "significant_90": result.significant_90,
        "p_value": result.p_value,
    }


def regression_to_dict(division: str, rf, mean_demand: float) -> dict:
    return {
        "division": division,
        "slope": rf.slope,
        "adj_r2": rf.adj_r2,
        "p_value": rf.p_value,
        "year_effects": {str(k): v for k, v in rf.year_effects.items()},
        "n": rf.n,
        "intercept": rf.intercept,
        "base_year": rf.base_year,
        "r2": rf.r2,
        "f_statistic": _num(rf.f_statistic),
        "t_stats": {k: _num(v) for k, v in rf.t_stats.items()},
        "mean_daily_demand_mw": mean_demand,
        "percent_per_degc": regress.percent_sensitivity(rf.slope, mean_demand) if mean_demand > 0 else None,
    }


@dataclass
class DivisionResult:
    name: str
    classification: Optional[ingest.DivisionClass] = None
    series: Optional[ingest.DivisionSeries] = None
    maxima: Optional[list] = None
    fits: Optional[dict] = None
    lrts: Optional[dict] = None
    regression: Optional[regress.RegressionFit] = None
    artifacts: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.fits is None or all(f.converged for f in self.fits.values())


@dataclass
class PipelineResult:
    divisions: dict
    output_dir: Path
    summary_path: Optional[Path] = None

    @property
    def converged(self) -> bool:
        return all(d.converged for d in self.divisions.values())


def _stage(name, division=None):
    """Context manager tagging package errors with the failing stage."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, PeakDemandError) and not isinstance(exc, StageError):
                raise StageError(name, exc, division) from exc
            return False

    return _Ctx()


def load_inputs(cfg: PipelineConfig):
    """Parse both input files. Missing files raise ``FileNotFoundError``."""
    if cfg.climate_path is None or cfg.demand_path is None:
        raise ConfigError("climate_path and demand_path are required")
    for p in (cfg.climate_path, cfg.demand_path):
        if not Path(p).is_file():
            raise FileNotFoundError(f"input file not found: {p}")
    with _stage("ingest"):
        with open(cfg.climate_path, newline="") as fh:
            climate = ingest.parse_climate_csv(fh, cfg.magnus)
        with open(cfg.demand_path, newline="") as fh:
            records = ingest.parse_demand_csv(fh)
    return climate, records


def _division_configs(cfg, groups):
    if cfg.divisions:
        missing = [d.name for d in cfg.divisions if d.name not in groups]
        if missing:
            raise StageError("ingest", f"divisions absent from demand data: {missing}")
        return cfg.divisions
    return [DivisionConfig(name) for name in groups]


def _monthly_summary(series):
    rows = []
    months = np.array([d.date.month for d in series.days])
    demand, at = series.demand, series.at
    for m in range(1, 13):
        mask = months == m
        if mask.any():
            rows.append((m, float(demand[mask].mean()), float(at[mask].mean())))
    return rows


def _percentile_grid(t):
    return [float(v) for v in np.percentile(t, [10, 50, 90])]


def run_pipeline(cfg: PipelineConfig, until: str = "report") -> PipelineResult:
    """Run every stage up to and including ``until``, writing its files
    under ``cfg.output_dir``."""
    if until not in STAGES:
        raise ConfigError(f"unknown stage {until!r}")
    upto = STAGES.index(until)
    full = until == "report"
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    climate, records = load_inputs(cfg)
    groups = ingest.group_by_division(records)
    results = {}
    for dcfg in _division_configs(cfg, groups):
        name = dcfg.name
        res = DivisionResult(name)
        results[name] = res
        ddir = out / slug(name)
        ddir.mkdir(exist_ok=True)
        recs = groups[name]

        with _stage("classify", name):
            snaps = ingest.default_snapshot_dates(recs, cfg.snapshot_months) or sorted({r.date for r in recs})[:1]
            dc = ingest.classify_division(recs, snaps, cfg.industrial_max, cfg.residential_min)
            klass = dcfg.class_override or dc.klass
            res.classification = ingest.DivisionClass(name, klass, dc.sheddable_fraction)

        with _stage("ingest", name):
            series = ingest.aggregate_division_daily(recs, climate, dcfg.excluded_weekdays, klass)
            res.series = series
        if upto >= STAGES.index("ingest"):
            p = ddir / "series.csv"
            with open(p, "w", newline="") as fh:
                ingest.write_division_series(series, fh)
            res.artifacts["series"] = p

        if upto >= STAGES.index("classify"):
            p = ddir / "classification.json"
            _write_json(p, {
                "division": name,
                "class": klass,
                "computed_class": dc.klass,
                "class_override": dcfg.class_override,
                "sheddable_fraction": dc.sheddable_fraction,
                "snapshot_dates": [d.isoformat() for d in snaps],
                "excluded_weekdays": [w for w in ingest.WEEKDAYS if w in series.excluded_weekdays],
            })
            res.artifacts["classification"] = p

        if upto >= STAGES.index("blocks"):
            with _stage("blocks", name):
                res.maxima = _blocks.extract_block_maxima(series, cfg.block_len, cfg.covariate_mode)
            p = ddir / "block_maxima.csv"
            with open(p, "w", newline="") as fh:
                _blocks.write_block_maxima(res.maxima, fh)
            res.artifacts["block_maxima"] = p

        if upto >= STAGES.index("fit"):
            with _stage("fit", name):
                res.fits = fit_nested(res.maxima, (STATIONARY, MODEL1, MODEL2))
                res.lrts = {key: (a, b, lrt(res.fits[a], res.fits[b])) for key, a, b in LRT_PAIRS}
            p = ddir / "gev.json"
            _write_json(p, {
                "division": name,
                "block_len": cfg.block_len,
                "covariate_mode": cfg.covariate_mode,
                "n_data": len(res.maxima),
                "fits": {k: fit_to_dict(f) for k, f in res.fits.items()},
                "lrt": {k: lrt_to_dict(r, a, b) for k, (a, b, r) in res.lrts.items()},
                "headline_lrt": HEADLINE_LRT,
            })
            res.artifacts["gev"] = p

        if upto >= STAGES.index("lrt") and until != "regress":
            p = ddir / "lrt.csv"
            with open(p, "w", newline="") as fh:
                fh.write("comparison,lrt_statistic,df,critical_95,critical_90,significant_95,significant_90\n")
                for key, (_, _, r) in res.lrts.items():
                    fh.write(f"{key},{r.statistic!r},{r.df},{r.critical_95!r},{r.critical_90!r},"
                             f"{str(r.significant_95).lower()},{str(r.significant_90).lower()}\n")
            res.artifacts["lrt"] = p

        if until in ("regress", "report"):
            with _stage("regress", name):
                _run_regression(cfg, res, ddir)

        if full:
            with _stage("report", name):
                _write_report_extras(cfg, res, ddir)

    result = PipelineResult(results, out)
    if full:
        result.summary_path = _write_summary(cfg, result)
    return result


def _run_regression(cfg, res, ddir):
    series = res.series
    points = regress.yearly_anomaly(series)
    if cfg.regression_points == "block_mean":
        fit_points = regress.block_mean_points(points, cfg.block_len)
    else:
        fit_points = points
    rf = regress.fixed_effects_fit(fit_points, cfg.base_year)
    res.regression = rf
    mean_demand = float(series.demand.mean())

    p = ddir / "regression.json"
    _write_json(p, regression_to_dict(res.name, rf, mean_demand))
    res.artifacts["regression"] = p

    p = ddir / "anomaly.csv"
    with open(p, "w", newline="") as fh:
        fh.write("date,year,anomaly,at\n")
        for pt in points:
            fh.write(f"{pt.date.isoformat()},{pt.year},{pt.anomaly!r},{pt.at!r}\n")
    res.artifacts["anomaly"] = p

    x = np.array([pt.at for pt in points])
    y = np.array([pt.anomaly for pt in points])
    grid = np.linspace(x.min(), x.max(), 60)
    curve = regress.loess(x, y, cfg.loess_span, grid)
    p = ddir / "loess.csv"
    with open(p, "w", newline="") as fh:
        fh.write("x,yhat\n")
        for xv, yv in curve:
            fh.write(f"{float(xv)!r},{float(yv)!r}\n")
    res.artifacts["loess"] = p

    if cfg.figures:
        from . import plotting

        p = ddir / "anomaly.svg"
        plotting.anomaly_scatter(points, curve, rf, res.name, p)
        res.artifacts["anomaly_figure"] = p


def _write_report_extras(cfg, res, ddir):
    from . import plotting

    monthly = _monthly_summary(res.series)
    p = ddir / "monthly.csv"
    with open(p, "w", newline="") as fh:
        fh.write("month,mean_demand_mw,mean_at\n")
        for m, dm, at in monthly:
            fh.write(f"{m},{dm!r},{at!r}\n")
    res.artifacts["monthly"] = p

    qq = {}
    for key, spec_name in (("qq_stationary", "stationary"), ("qq_residual", "model2")):
        f = res.fits[spec_name]
        if not f.converged:
            log.warning("%s: %s fit did not converge, skipping %s", res.name, spec_name, key)
            continue
        pts = qq_points(f, res.maxima)
        qq[key] = pts
        p = ddir / f"{key}.csv"
        with open(p, "w", newline="") as fh:
            fh.write("empirical,model\n")
            for e, m in pts:
                fh.write(f"{float(e)!r},{float(m)!r}\n")
        res.artifacts[key] = p

    _, t = _blocks.as_arrays(res.maxima)
    grid = _percentile_grid(t)
    p = ddir / "return_levels.csv"
    with open(p, "w", newline="") as fh:
        fh.write("model,covariate,period_blocks,return_level\n")
        for spec_name, f in res.fits.items():
            covs = [None] if f.spec.stationary else grid
            for cov in covs:
                for period in cfg.return_periods:
                    z = return_level(f.params, period, cov, f.spec)
                    covtxt = "" if cov is None else repr(cov)
                    fh.write(f"{spec_name},{covtxt},{period!r},{z!r}\n")
    res.artifacts["return_levels"] = p

    if cfg.figures:
        p = ddir / "monthly.svg"
        plotting.monthly_profile(monthly, res.name, p)
        res.artifacts["monthly_figure"] = p
        for key, pts in qq.items():
            p = ddir / f"{key}.svg"
            residual = key == "qq_residual"
            plotting.qq_plot(pts, res.name, p, residual=residual)
            res.artifacts[f"{key}_figure"] = p


def _write_summary(cfg, result) -> Path:
    out = result.output_dir
    divisions = {}
    for name, res in result.divisions.items():
        entry = {
            "class": res.classification.klass,
            "sheddable_fraction": res.classification.sheddable_fraction,
            "n_days": len(res.series),
            "n_blocks": len(res.maxima),
            "converged": res.converged,
            "artifacts": {k: os.path.relpath(v, out) for k, v in sorted(res.artifacts.items())},
        }
        if res.regression is not None:
            entry["regression_slope"] = res.regression.slope
        if res.lrts is not None:
            entry["lrt"] = {k: {"lrt_statistic": r.statistic, "df": r.df,
                                "significant_95": r.significant_95, "significant_90": r.significant_90}
                            for k, (_, _, r) in res.lrts.items()}
            entry["nonstationary_significant_95"] = res.lrts[HEADLINE_LRT][2].significant_95
        divisions[name] = entry
    summary = {
        "config": {
            "climate_path": os.path.basename(str(cfg.climate_path)),
            "demand_path": os.path.basename(str(cfg.demand_path)),
            "block_len": cfg.block_len,
            "covariate_mode": cfg.covariate_mode,
            "base_year": cfg.base_year,
            "regression_points": cfg.regression_points,
            "loess_span": cfg.loess_span,
            "seed": cfg.seed,
        },
        "metadata": {
            "daily_demand": "daily figure taken as supplied in demand_mw; its construction is left to the data provider",
            "return_level_units": "standardized block-maximum units",
            "headline_lrt": HEADLINE_LRT,
        },
        "divisions": divisions,
    }
    p = out / "summary.json"
    _write_json(p, summary)
    return p


def config_to_dict(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    for k in ("climate_path", "demand_path", "output_dir"):
        d[k] = None if d[k] is None else str(d[k])
    return d
