"""Command-line entry point: ``stalight run | scan | sweep | presets``."""

from __future__ import annotations

import argparse
import json
import sys

from . import scenarios
from .config import parse_config
from .core import ConfigValidationError, DivergedIntegrationError, StalightError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3


def _load(args):
    if args.preset:
        return scenarios.parse_document(scenarios.preset_document(args.preset))
    if not args.config:
        raise ConfigValidationError("--config", "give a configuration file or --preset NAME")
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigValidationError("--config", f"cannot read {args.config}: {exc.strerror}") from None
    return parse_config(text)


def _parse_values(text: str):
    if not text.strip():
        return []
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            v = int(item)
        except ValueError:
            try:
                v = float(item)
            except ValueError:
                v = item
        out.append(v)
    return out


def _print_metrics(manifest):
    for k, v in sorted(manifest["metrics"].items()):
        print(f"{k} = {v}")
    print(f"wrote {len(manifest['files'])} files + manifest.json")


def cmd_run(args):
    _print_metrics(scenarios.run_scenario(_load(args), args.out))


def cmd_scan(args):
    _print_metrics(scenarios.run_scan(_load(args), args.out))


def cmd_sweep(args):
    cfg = _load(args)
    path = scenarios.sweep(scenarios.to_document(cfg), args.param, _parse_values(args.values), args.jobs, args.out)
    print(f"wrote {path}")


def cmd_presets(args):
    if args.action == "list":
        for name, text in scenarios.list_presets():
            print(f"{name:24s} {text}")
        return
    if not args.name:
        raise ConfigValidationError("presets show", "name a preset")
    print(json.dumps(scenarios.preset_document(args.name), indent=2, sort_keys=True))


def build_parser():
    parser = argparse.ArgumentParser(prog="stalight", description="1D stationary-light simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--config", help="JSON configuration file")
        g.add_argument("--preset", help="use a built-in preset instead of a file")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("run", help="run the configured scenario")
    add_source(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scan", help="frequency-domain transmission/reflection scan")
    add_source(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sweep", help="run the scenario for each value of one parameter")
    add_source(p)
    p.add_argument("--param", required=True, help="dotted path, e.g. ensemble.gamma_motion")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list or print built-in presets")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except DivergedIntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except StalightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
