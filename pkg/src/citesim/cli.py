"""Command-line entry point: ``citesim run|sweep|reproduce|validate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from citesim import __version__, experiments
from citesim.engine import run_simulation
from citesim.io import (
    ConfigParseError,
    config_to_dict,
    counts_path,
    emit_run_csv,
    ensure_dir,
    load_config,
    write_experiment,
    write_intervals_csv,
    write_manifest,
    write_sweep_csv,
)
from citesim.model import ConfigError, ModelConfig, Variant

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("citesim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text: str, kind=float) -> list:
    """Parse ``a,b,c`` or an inclusive ``lo..hi[:step]`` range (step defaults to 1)."""
    text = text.strip()
    if ".." in text:
        span, _, step = text.partition(":")
        lo, _, hi = span.partition("..")
        lo, hi = kind(lo), kind(hi)
        step = kind(step) if step else kind(1)
        if step <= 0:
            raise UsageError(f"range step must be positive: {text!r}")
        out = []
        k = 0
        while True:
            x = lo + k * step
            if x > hi + (1e-9 * abs(step) if kind is float else 0):
                break
            out.append(round(x, 12) if kind is float else x)
            k += 1
        if not out:
            raise UsageError(f"empty range: {text!r}")
        return out
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse list {text!r}: {exc}") from exc


def _config(path) -> ModelConfig:
    return load_config(path) if path else ModelConfig()


def cmd_run(args) -> int:
    config = _config(args.config)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    out = ensure_dir(args.out)
    traj = run_simulation(config)
    series = out / "run.csv"
    emit_run_csv(traj, series)
    write_manifest(out / "manifest.json", config, [config.seed], [series.name, counts_path(series).name], command="run")
    print(f"wrote {series} (end correlation={traj.end_correlation}, mean churn={traj.mean_churn}, end gini={traj.end_gini})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args.config)
    kind = int if args.axis in experiments.INTEGER_AXES else float
    values = parse_range(args.values, kind)
    seeds = parse_range(args.seeds, int)
    variants = [Variant(v) for v in args.variants.split(",")] if args.variants else list(Variant)
    try:
        spec = experiments.SweepSpec(config, args.axis, tuple(values), tuple(seeds), tuple(variants))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = experiments.sweep(spec, workers=args.workers, resamples=args.resamples)
    out = ensure_dir(args.out)
    write_sweep_csv(result, out / "sweep.csv")
    write_intervals_csv(result, out / "intervals.csv")
    write_manifest(
        out / "manifest.json",
        config,
        seeds,
        ["sweep.csv", "intervals.csv"],
        command="sweep",
        axis=args.axis,
        values=list(spec.values),
        variants=[v.value for v in spec.variants],
    )
    print(f"wrote {len(result.rows)} rows to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    names = list(experiments.EXPERIMENTS) if args.name == "all" else [args.name]
    if args.name != "all" and args.name not in experiments.EXPERIMENTS:
        raise UsageError(str(experiments.UnknownExperimentError(args.name)))
    seeds = parse_range(args.seeds, int)
    out = ensure_dir(args.out)
    for name in names:
        log.info("reproducing %s", name)
        result = experiments.reproduce_named(name, seeds, workers=args.workers, resamples=args.resamples)
        target = out / name if len(names) > 1 else out
        written = write_experiment(result, target)
        print(f"{name}: wrote {len(written)} files to {target}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _config(args.config)
    manifest = {"version": __version__, "config": config_to_dict(config), "seeds": [config.seed]}
    print(json.dumps(manifest, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="citesim", description="Simulate substantive and rhetorical citing.")
    p.add_argument("--version", action="version", version=f"citesim {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a single trajectory")
    r.add_argument("--config", help="JSON config (defaults when omitted)")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep one parameter over seeds and variants")
    s.add_argument("--config")
    s.add_argument("--axis", required=True, choices=sorted(experiments.AXES))
    s.add_argument("--values", required=True, help="a,b,c or lo..hi:step")
    s.add_argument("--seeds", default="0..9")
    s.add_argument("--variants", help="comma-separated subset of " + ",".join(v.value for v in Variant))
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=None, help="processes; 0 means one per CPU")
    s.add_argument("--resamples", type=int, default=experiments.DEFAULT_RESAMPLES)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("reproduce", help="run a named figure experiment ('all' for every one)")
    e.add_argument("name")
    e.add_argument("--out", required=True)
    e.add_argument("--seeds", default="0..9")
    e.add_argument("--workers", type=int, default=None, help="processes; 0 means one per CPU")
    e.add_argument("--resamples", type=int, default=experiments.DEFAULT_RESAMPLES)
    e.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("validate", help="parse a config and print the resolved manifest")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ConfigParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except experiments.SweepError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
