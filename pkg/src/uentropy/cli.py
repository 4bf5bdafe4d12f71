"""Command-line entry point: ``uentropy <subcommand> [system] [flags]``."""

import argparse
import json
import sys

from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .reports import EXIT_CONFIG, run_experiment
from .systems import list_systems

SUBCOMMANDS = ("validate", "entropy", "cover", "shadow", "expansivity", "entpoints")


def _parser():
    p = argparse.ArgumentParser(prog="uentropy",
                                description="Entropy experiments on finite dynamical systems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("system", nargs="?", default=None,
                       help='zoo spec such as "full_shift 2 8"')
        s.add_argument("--config", help="INI file with an [experiment] section")
        s.add_argument("--system-file", dest="system_file")
        s.add_argument("--out")
        s.add_argument("--seed", type=int)
        s.add_argument("--mode", choices=("exact", "greedy", "auto"))
        s.add_argument("--nmax", dest="n_max", type=int)
        s.add_argument("--grid", help="comma separated scales, largest first")
        s.add_argument("--scale", help='single scale, "E0" or "eps=p/q"')
        s.add_argument("--threshold", type=float)
        s.add_argument("--word-length", dest="word_length", type=int)
        s.add_argument("--budget", type=int)
        s.add_argument("--membership", choices=("every", "some"))
    sp = sub.add_parser("systems")
    sp.add_argument("action", choices=("list",))
    return p


def config_from_args(args):
    over = {k: getattr(args, k) for k in ("system", "system_file", "out", "seed", "mode",
                                          "n_max", "scale", "threshold", "word_length",
                                          "budget", "membership")}
    if args.grid is not None:
        over["grid"] = tuple(t for t in args.grid.replace(",", " ").split())
    over["kind"] = args.command
    if args.config:
        return load_config(args.config, **over)
    return ExperimentConfig(**{k: v for k, v in over.items() if v is not None})


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "systems":
        sys.stdout.write(list_systems())
        return 0
    try:
        cfg = config_from_args(args)
    except (ConfigError, ValueError, TypeError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    report, code = run_experiment(cfg)
    summary = {k: report[k] for k in ("system", "status", "exit_code") if k in report}
    if "error" in report:
        summary["error"] = report["error"]
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
