# Copyright 2026 The mismatchlab authors
# Use of this source code is governed by an MIT
# license that can be found in the LICENSE file.

import argparse
import json
import logging
import os
import pathlib
import sys
from typing import Optional

import mismatchlab
from mismatchlab.config import CONFIG_VERSION, load_config, parse_config
from mismatchlab.exceptions import ConfigException
from mismatchlab.experiments import plotdata, run_experiment
from mismatchlab.gallery import GALLERY, make_entry
from mismatchlab.models import model_from_json, validate

# Program name for integration with click.testing
name = "python -m mismatchlab"

env_out = "MISMATCHLAB_OUT"
env_jobs = "MISMATCHLAB_JOBS"

EXIT_VIOLATION = 2
DEFAULT_SEED = 0


def _jobs(jobs: Optional[int]) -> int:
    if jobs is not None:
        return jobs
    text = os.getenv(env_jobs)
    if not text:
        return 1
    try:
        return int(text)
    except ValueError:
        raise ConfigException(
            f"{env_jobs} must be an integer, got {text!r}", field="jobs"
        )


def _run(
    kind: Optional[str],
    config: Optional[str],
    out: Optional[str],
    seed: Optional[int],
    jobs: Optional[int],
    check: bool,
) -> int:
    if config:
        cfg = load_config(config)
        if kind is not None and cfg.kind != kind:
            raise ConfigException(
                f"configuration kind {cfg.kind} does not match command "
                f"kind {kind}",
                field="kind",
            )
    else:
        if kind is None:
            raise ConfigException("--config is required", field="config")
        cfg = parse_config(
            {
                "version": CONFIG_VERSION,
                "kind": kind,
                "seed": DEFAULT_SEED if seed is None else seed,
            }
        )
        mismatchlab.util.log_info(
            "Using default configuration", kind=kind, seed=cfg.seed
        )
    cfg = cfg.with_overrides(seed=seed, out=out or os.getenv(env_out))
    summary = run_experiment(cfg, jobs=_jobs(jobs))
    for path in summary.files.values():
        print(f"Wrote {path}")
    print(f"{len(summary.rows)} rows, {summary.violations} violations")
    if check and summary.violations:
        sys.stderr.write(
            f"Error: {summary.violations} check violations in {cfg.kind}\n"
        )
        return EXIT_VIOLATION
    return 0


def action_gallery(subcommand: str, **kwargs) -> int:
    """Action function for the gallery command."""
    if subcommand == "list":
        for entry_name, constructor in sorted(GALLERY.items()):
            summary = (constructor.__doc__ or "").strip().split("\n")[0]
            print(f"{entry_name}: {summary}")
        return 0
    if subcommand == "dump":
        entry = make_entry(kwargs["entry"], kwargs["n"], kwargs["discount"])
        print(json.dumps(entry.to_json(), indent=2, sort_keys=True))
        return 0
    return _run("gallery", **kwargs)


def action_bounds(**kwargs) -> int:
    """Action function for the bounds command."""
    return _run("bounds-corpus", **kwargs)


def action_strategic(**kwargs) -> int:
    """Action function for the strategic command."""
    return _run("strategic", **kwargs)


def action_supgap(**kwargs) -> int:
    """Action function for the supgap command."""
    return _run("sup-gap", **kwargs)


def action_learn(**kwargs) -> int:
    """Action function for the learn command."""
    return _run("learn", **kwargs)


def action_run(**kwargs) -> int:
    """Action function for the run command."""
    return _run(None, **kwargs)


def action_plotdata(results: str, out: Optional[str]) -> int:
    """Action function for the plotdata command."""
    written = plotdata(results, out)
    if not written:
        print("No series written")
    for path in written:
        print(f"Wrote {path}")
    return 0


def action_validate(file: str) -> int:
    """Action function for the validate command: checks an experiment
    configuration or a model file."""
    try:
        body = json.loads(pathlib.Path(file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise ConfigException(f"{file} is not JSON: {error}")
    if isinstance(body, dict) and "kind" in body and "version" in body:
        cfg = parse_config(body)
        print(f"{file}: valid {cfg.kind} configuration")
        return 0
    model = model_from_json(body)
    diagnostics = validate(model)
    if diagnostics:
        for diagnostic in diagnostics:
            print(f"{file}: {diagnostic}")
        return 1
    print(f"{file}: valid model {model.name}")
    return 0


def get_parser(prog_name):
    """Constructs and returns the argument parser for all commands."""
    parser = argparse.ArgumentParser(
        prog=prog_name,
        description="Measure how optimal controllers degrade when designed "
        "against an incorrect transition kernel.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"mismatchlab v{mismatchlab.__version__}",
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        dest="verbose",
        default=0,
        help="print additional information, can be supplied multiple times "
        "for more verbose output",
    )

    subparsers = parser.add_subparsers(metavar="command", dest="command")

    def add_run_arguments(subparser: argparse.ArgumentParser):
        """Adds arguments shared between experiment commands."""
        subparser.add_argument(
            "--config",
            default=None,
            metavar="PATH",
            help="experiment configuration file (JSON); defaults of the "
            "command's kind are used if omitted",
        )
        subparser.add_argument(
            "--out",
            default=None,
            metavar="DIR",
            help=f"output directory; the {env_out} environment variable is "
            "used as secondary fallback, then the configuration",
        )
        subparser.add_argument(
            "--seed",
            type=int,
            default=None,
            help="master seed, overrides the configuration; defaults to "
            f"{DEFAULT_SEED} when --config is omitted",
        )
        subparser.add_argument(
            "--jobs",
            type=int,
            default=None,
            help=f"number of worker processes; the {env_jobs} environment "
            "variable is used as secondary fallback",
        )
        subparser.add_argument(
            "--check",
            default=False,
            action="store_true",
            help=f"exit with status {EXIT_VIOLATION} if any bound or oracle "
            "check fails",
        )

    parser_gallery = subparsers.add_parser(
        "gallery",
        help="work with the counterexample gallery",
        description="list, dump or evaluate the counterexample gallery",
    )
    gallery_subparsers = parser_gallery.add_subparsers(
        metavar="subcommand", dest="subcommand"
    )
    gallery_subparsers.add_parser("list", help="list gallery entries")
    parser_dump = gallery_subparsers.add_parser(
        "dump", help="print an entry's models and closed forms as JSON"
    )
    parser_dump.add_argument("entry", choices=sorted(GALLERY))
    parser_dump.add_argument("--n", type=int, default=4)
    parser_dump.add_argument("--discount", type=float, default=0.5)
    add_run_arguments(
        gallery_subparsers.add_parser(
            "run", help="evaluate entries against their closed forms"
        )
    )

    commands = [
        ("bounds", "check continuity and robustness bounds on random pairs"),
        ("strategic", "check strategic-measure total variation growth"),
        ("supgap", "compute sup-over-policies cost gaps"),
        ("learn", "run a learning curve"),
    ]
    for command, text in commands:
        add_run_arguments(subparsers.add_parser(command, help=text))

    add_run_arguments(
        subparsers.add_parser(
            "run", help="run the experiment described by a configuration"
        )
    )

    parser_plotdata = subparsers.add_parser(
        "plotdata", help="write plot-ready series from result files"
    )
    parser_plotdata.add_argument("results", help="result directory")
    parser_plotdata.add_argument(
        "--out",
        default=None,
        metavar="DIR",
        help="directory for the series files; the result directory by "
        "default",
    )

    parser_validate = subparsers.add_parser(
        "validate", help="validate a configuration or model file"
    )
    parser_validate.add_argument("file", help="JSON file to validate")

    return parser, parser_gallery


def main(args=None, prog_name=None):
    parser, parser_gallery = get_parser(prog_name)
    args = parser.parse_args(args)

    if args.command is None:
        sys.stderr.write("Error: command is required\n")
        parser.print_help(sys.stderr)
        sys.exit(1)

    logger = logging.getLogger("mismatchlab")
    if args.verbose == 1:
        logger.setLevel(logging.INFO)
        logger.addHandler(logging.StreamHandler())
    elif args.verbose >= 2:
        logger.setLevel(logging.DEBUG)
        logger.addHandler(logging.StreamHandler())
    else:
        logger.setLevel(logging.WARNING)

    if args.command == "gallery" and args.subcommand is None:
        sys.stderr.write("Error: gallery subcommand is required\n")
        parser_gallery.print_help(sys.stderr)
        sys.exit(1)

    try:
        # Remove global args so they are not unrecognised in action functions
        del args.verbose
        args = vars(args)
        command = args.pop("command")
        code = globals()[f"action_{command}"](**args)
    except Exception as exception:
        sys.stderr.write(f"Error: {exception}\n")
        sys.exit(1)
    if code:
        sys.exit(code)


if __name__ == "__main__":
    main(prog_name=name)
