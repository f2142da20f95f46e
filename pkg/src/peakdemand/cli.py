"""Command-line entry point: ``peakdemand <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .errors import (
    ConfigError,
    DegenerateBlockError,
    PeakDemandError,
    SingularDesignError,
    SupportError,
)
from .simulate import simulate, spec_from_dict

EXIT_OK = 0
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_CONFIG = 4

log = logging.getLogger("peakdemand")


def _common(p):
    p.add_argument("--config", type=Path, help="YAML pipeline configuration")
    p.add_argument("--climate", type=Path, dest="climate_path", help="climate CSV (overrides config)")
    p.add_argument("--demand", type=Path, dest="demand_path", help="feeder demand CSV (overrides config)")
    p.add_argument("--block-len", type=int, choices=(7, 15, 30), dest="block_len")
    p.add_argument("--covariate", choices=("argmax", "block-mean"))
    p.add_argument("--base-year", type=int, dest="base_year")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, dest="output_dir", help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip SVG rendering")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="peakdemand",
        description="Peak electricity demand vs apparent temperature: block maxima, GEV fits and regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ingest": "parse inputs and write per-division daily series",
        "classify": "classify divisions by sheddable-feeder share",
        "blocks": "extract standardized block maxima",
        "fit": "fit stationary and covariate GEV models",
        "lrt": "likelihood-ratio tests between nested GEV models",
        "regress": "year-fixed-effects regression and LOESS curve",
        "report": "run every stage and write summary.json",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text))
    sim = sub.add_parser("simulate", help="write synthetic climate and demand CSVs")
    _common(sim)
    sim.add_argument("--years", type=int, help="number of simulated years")
    return parser


def _config_from_args(args):
    overrides = {
        "climate_path": args.climate_path,
        "demand_path": args.demand_path,
        "block_len": args.block_len,
        "covariate_mode": args.covariate,
        "base_year": args.base_year,
        "seed": args.seed,
        "output_dir": args.output_dir,
    }
    if args.no_figures:
        overrides["figures"] = False
    return pipeline.load_config(args.config, **overrides)


def _exit_code(exc):
    cause = exc.cause if isinstance(exc, pipeline.StageError) else exc
    if isinstance(cause, ConfigError):
        return EXIT_CONFIG
    if isinstance(cause, (SingularDesignError, SupportError, DegenerateBlockError)):
        return EXIT_NUMERIC
    return EXIT_IO


def _run_simulate(cfg, args):
    if cfg.seed is None:
        raise ConfigError("simulate requires a seed (--seed or 'seed' in the config)")
    raw = dict(cfg.simulate or {})
    if args.years is not None:
        raw["n_years"] = args.years
    spec = spec_from_dict(raw)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    climate, demand = simulate(spec, cfg.seed)
    (out / "climate.csv").write_text(climate)
    (out / "demand.csv").write_text(demand)
    print(f"wrote {out / 'climate.csv'}")
    print(f"wrote {out / 'demand.csv'}")
    return EXIT_OK


def _print_stage(command, result):
    for name, res in result.divisions.items():
        if command == "classify":
            c = res.classification
            print(f"{name},{c.klass},{c.sheddable_fraction:.4f}")
        elif command == "blocks":
            print(f"{name},{len(res.maxima)} block maxima")
        elif command == "fit":
            for key, f in res.fits.items():
                print(f"{name},{key},nllh={f.nllh:.4f},converged={str(f.converged).lower()}")
        elif command == "lrt":
            for key, (_, _, r) in res.lrts.items():
                print(f"{name},{key},{r.statistic:.4f},df={r.df},"
                      f"significant_95={str(r.significant_95).lower()},significant_90={str(r.significant_90).lower()}")
        elif command == "regress":
            rf = res.regression
            print(f"{name},slope={rf.slope:.4f},adj_r2={rf.adj_r2:.4f},p_value={rf.p_value:.3g}")
        elif command == "ingest":
            print(f"{name},{len(res.series)} days")
    if command == "report":
        print(f"wrote {result.summary_path}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _config_from_args(args)
        if args.command == "simulate":
            return _run_simulate(cfg, args)
        result = pipeline.run_pipeline(cfg, until=args.command)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PeakDemandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)

    _print_stage(args.command, result)
    if not result.converged:
        for name, res in result.divisions.items():
            for key, f in (res.fits or {}).items():
                if not f.converged:
                    print(f"error: stage 'fit' (division {name}): {key} fit did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
