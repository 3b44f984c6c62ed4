"""Command-line entry point: ``esla simulate | fit-density | build-cache``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .errors import InvalidArgumentError, SkewnessUnattainableError
from .esn import esn_logpdf, esn_moments
from .experiment import ALL_STRATEGIES, ExperimentConfig, default_output_dir, run_experiment
from .fitters import TaylorCoeffs, fit_esla, fit_sla_interpolant
from .interpolants import SKEW_TABLE, TAU_TABLE, build_cache, default_interpolants

log = logging.getLogger("esla")


def _cache_dir(args):
    if args.cache is not None:
        return Path(args.cache)
    env = os.environ.get("ESLA_CACHE_DIR")
    return Path(env) if env else None


def _interpolants(cache_dir):
    """Cached tables when both files exist, otherwise fresh in-memory builds."""
    if cache_dir is not None and (cache_dir / SKEW_TABLE).exists() and (cache_dir / TAU_TABLE).exists():
        return default_interpolants(cache_dir)
    return default_interpolants()


def _load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise InvalidArgumentError("config file must hold a mapping")
    return data


def cmd_simulate(args):
    settings = {
        "family": args.family,
        "sample_sizes": args.sizes,
        "seed": args.seed,
        "prior_precision": args.prior_precision,
        "strategies": args.strategies,
        "output_dir": args.out,
    }
    if "mcmc" in args.strategies:
        settings["mcmc"] = {"chains": args.chains, "iterations": args.iterations, "burn_in": args.burn_in, "seed": args.seed}
    if args.config:
        # file values win over flags
        settings.update(_load_config(args.config))
    cfg = ExperimentConfig.from_mapping(settings)
    result = run_experiment(cfg, _interpolants(_cache_dir(args)))
    print(result.paths["summary"].read_text(), end="")
    for cell in result.missing:
        print(f"missing n={cell['n']} {cell['strategy']}: {cell['reason']}", file=sys.stderr)
    return 0 if result.complete else 1


def cmd_fit_density(args):
    skew, tau_table = _interpolants(_cache_dir(args))
    try:
        tc = TaylorCoeffs(args.mu, args.gamma1, args.gamma2)
        fit = fit_sla_interpolant(tc, skew) if args.gamma2 is None else fit_esla(tc, tau_table, skew)
    except (SkewnessUnattainableError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    p = fit.params
    print(f"xi\t{p.xi!r}\nomega\t{p.omega!r}\nalpha\t{p.alpha!r}\ntau\t{p.tau!r}")
    print(f"strategy_used\t{fit.strategy_used.value}")
    print(f"fallback_reason\t{'none' if fit.fallback_reason is None else fit.fallback_reason.value}")
    mean = esn_moments(p).mean
    grid = np.linspace(mean - args.width, mean + args.width, args.points)
    print("z\tdensity")
    for z, d in zip(grid.tolist(), np.exp(esn_logpdf(p, grid)).tolist()):
        print(f"{z!r}\t{d!r}")
    return 0


def cmd_build_cache(args):
    target = _cache_dir(args) or Path(args.out) / "cache"
    for path in build_cache(target):
        print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="esla", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=default_output_dir(), help="output directory (env ESLA_OUTPUT_DIR)")
    common.add_argument("--config", type=Path, help="YAML file; its values override flags")
    common.add_argument("--cache", type=Path, help="interpolant cache directory (env ESLA_CACHE_DIR)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run the simulation study")
    sim.add_argument("--family", choices=("bernoulli", "poisson"), default="bernoulli")
    sim.add_argument("--sizes", type=int, nargs="+", default=[1, 10, 50, 100])
    sim.add_argument("--strategies", nargs="+", choices=ALL_STRATEGIES, default=["sla", "esla", "la"])
    sim.add_argument("--prior-precision", type=float, default=0.001)
    sim.add_argument("--chains", type=int, default=4)
    sim.add_argument("--iterations", type=int, default=25_000)
    sim.add_argument("--burn-in", type=int, default=5_000)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit-density", parents=[common], help="fit a density to expansion terms")
    fit.add_argument("--mu", type=float, required=True)
    fit.add_argument("--gamma1", type=float, required=True)
    fit.add_argument("--gamma2", type=float)
    fit.add_argument("--points", type=int, default=201)
    fit.add_argument("--width", type=float, default=6.0)
    fit.set_defaults(func=cmd_fit_density)

    cache = sub.add_parser("build-cache", parents=[common], help="write interpolant tables")
    cache.set_defaults(func=cmd_build_cache)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
