"""Command-line front end: ``floquet-topo rabi|ssh|piflux <experiment> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import yaml

from .errors import (
    BracketError,
    ConfigError,
    ContractError,
    DegeneracyError,
    DomainError,
    GaplessError,
    NonConvergenceError,
    ResolutionError,
)
from .experiments import resolve_config, resolve_experiment, run_experiment
from .output import emit

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("floquet_topo")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="floquet-topo", description="Floquet quasienergies and topological invariants")
    p.add_argument("model", choices=["rabi", "ssh", "piflux"])
    p.add_argument("experiment", help="experiment name, with or without the model prefix")
    p.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="override configuration values")
    p.add_argument("--config", type=Path, help="flat YAML key: value file")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"], dest="formats")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--threads", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config_file(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a flat key: value mapping")
    return data


def parse_overrides(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: {exc}") from exc
    return out


def main(argv=None) -> int:
    # overrides may sit before or after the options
    args = build_parser().parse_intermixed_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        experiment = resolve_experiment(args.model, args.experiment)
        file_cfg = load_config_file(args.config) if args.config else {}
        if file_cfg.get("experiment") not in (None, experiment):
            raise ConfigError(f"config file is for {file_cfg['experiment']!r}, not {experiment!r}")
        flags = {k: getattr(args, k) for k in ("threads", "grid", "steps") if getattr(args, k) is not None}
        cfg = resolve_config(experiment, file_cfg, parse_overrides(args.overrides), flags)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.print_config:
        sys.stdout.write(yaml.safe_dump(cfg, sort_keys=True))
        return EXIT_OK

    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ds = run_experiment(cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ConfigError, ContractError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, ResolutionError, BracketError, DegeneracyError, GaplessError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - start

    try:
        written = emit(ds, args.formats or ["csv"], args.out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    record = {"experiment": ds.experiment, "summary": ds.summary, "files": [str(p) for p in written], "wall_time_s": round(wall, 3)}
    print(json.dumps(record, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
