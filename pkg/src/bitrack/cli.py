"""Command line driver.

Exit codes: 0 success, 2 invalid configuration, 3 diverged run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .analysis import dumps, format_table, theory_report
from .config import PRESETS, parse_config, preset, validate_config
from .engine import fit_rate, run
from .errors import ConfigurationError, RunDiverged
from .export import export
from .topology import has_spanning_tree_rooted_at_leader, max_degree

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3


def _load(args):
    if getattr(args, "preset", None):
        c = preset(args.preset)
    elif args.config:
        try:
            c = parse_config(args.config)
        except OSError as exc:
            raise ConfigurationError(f"cannot read {args.config}: {exc}") from None
    else:
        raise ConfigurationError("give --config PATH or --preset NAME")
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "replicas", None) is not None:
        over["replicas"] = args.replicas
    if getattr(args, "horizon", None) is not None:
        over["horizon"] = args.horizon
    return validate_config(c.with_overrides(**over)) if over else c


def _common(p, run_flags=True):
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--preset", choices=PRESETS)
    if run_flags:
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--replicas", type=int, metavar="R")
        p.add_argument("--horizon", type=int, metavar="K")


def _cmd_check_topology(args):
    if args.preset:
        t = preset(args.preset).topology
    else:
        # parse without the spanning-tree check so we can report on it
        from .config import config_from_dict

        if not args.config:
            raise ConfigurationError("give --config PATH or --preset NAME")
        with open(args.config) as fh:
            text = fh.read()
        t = config_from_dict(json.loads(text) if text.strip() else {}).topology
    ok = has_spanning_tree_rooted_at_leader(t)
    print(f"agents {t.n_agents} (leader = {t.n_agents}), edges {len(t.edges)}, d* = {max_degree(t)}")
    print("spanning tree rooted at the leader: " + ("yes" if ok else "no"))
    return EXIT_OK if ok else EXIT_CONFIG


def _cmd_analyze(args):
    rep = theory_report(_load(args))
    if args.format in ("json", "both"):
        print(dumps(rep))
    if args.format == "both":
        print()
    if args.format in ("table", "both"):
        print(format_table(rep))
    return EXIT_OK


def _run_and_export(c, args):
    result = run(c)
    paths = export(result, args.out, svg=not args.no_svg)
    for name, p in paths.items():
        print(f"{name}: {p}")
    print(f"seconds: {result.diagnostics['seconds']:.2f}")
    return EXIT_OK


def _cmd_run(args):
    return _run_and_export(_load(args), args)


def _cmd_reproduce(args):
    args.preset = args.name
    return _run_and_export(_load(args), args)


def _cmd_rates(args):
    c = _load(args)
    result = run(c)
    k_max = args.k_max if args.k_max is not None else c.horizon
    k_min = args.k_min if args.k_min is not None else max(1, k_max // 100)
    out = {}
    for metric in ("tracking_mean", "tracking_max", "L2"):
        try:
            fit = fit_rate(result.metrics, k_min, k_max, metric=metric)
            lo, hi = fit.interval()
            out[metric] = {"slope": fit.slope, "ci95": [lo, hi], "n_points": fit.n_points}
            print(f"{metric:<14} slope {fit.slope:+.4f}  95% [{lo:+.4f}, {hi:+.4f}]  points {fit.n_points}")
        except ValueError as exc:
            raise ConfigurationError(f"rate fit: {exc}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bitrack", description="Leader tracking with one-bit communication.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-topology", help="test the rooted spanning tree condition")
    _common(p, run_flags=False)
    p.set_defaults(func=_cmd_check_topology)

    p = sub.add_parser("analyze", help="print theory constants and conditions")
    _common(p, run_flags=False)
    p.add_argument("--format", choices=("json", "table", "both"), default="both")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("run", help="simulate and write outputs")
    _common(p)
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--no-svg", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("rates", help="simulate and fit log-log decay slopes")
    _common(p)
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("reproduce", help="run a frozen preset")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--replicas", type=int, metavar="R")
    p.add_argument("--horizon", type=int, metavar="K")
    p.add_argument("--out", default=None, metavar="DIR")
    p.add_argument("--no-svg", action="store_true")
    p.set_defaults(func=_cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "reproduce" and args.out is None:
        args.out = f"out/{args.name}"
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunDiverged as exc:
        print(f"run diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except json.JSONDecodeError as exc:
        print(f"configuration error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
