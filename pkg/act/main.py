import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from act.commands import detect, evaluate, index, stats, sweep
from act.config import load_settings
from act.exceptions import ACTException

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON settings file; flags override it")
    common.add_argument("--profile", choices=["act-qe", "act-2", "act-3"], help="Pipeline preset")
    common.add_argument("--jobs", type=int, help="Worker processes for candidate detection")
    common.add_argument("--threshold", type=float, help="Score threshold for pruning")
    common.add_argument("--ngram", type=int, help="Window length in words")
    common.add_argument("--stride", type=int, help="Window stride in words")
    common.add_argument("--min-overlap", type=float, help="Minimum span overlap for a ground truth match")
    common.add_argument("--progress", action="store_true", help="Show progress bars on stderr")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")

    parser = argparse.ArgumentParser(prog="act", description="Detect biblical quotations in rabbinic texts")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (index, detect, evaluate, sweep, stats):
        command.register(subparsers, [common])
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested settings values for the flags that were given."""
    overrides: Dict[str, Any] = {}
    if args.profile is not None:
        overrides["profile"] = args.profile
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.threshold is not None:
        overrides.setdefault("inference", {})["score_threshold"] = args.threshold
    if args.ngram is not None:
        overrides.setdefault("detection", {})["ngram_size"] = args.ngram
    if args.stride is not None:
        overrides.setdefault("detection", {})["stride"] = args.stride
    if args.min_overlap is not None:
        overrides.setdefault("matching", {})["min_source_overlap"] = args.min_overlap
    return overrides


def configure_logging(level: str, verbose: int) -> None:
    if verbose >= 2:
        level = "DEBUG"
    elif verbose == 1 and level != "DEBUG":
        level = "INFO"
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config, overrides_from_args(args))
        configure_logging(settings.log_level, args.verbose)
        logger.debug("Settings: %s", settings.model_dump_json())
        return args.handler(args, settings)
    except ACTException as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
