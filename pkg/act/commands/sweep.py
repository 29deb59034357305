import argparse
import json
from pathlib import Path
from typing import List

from act.config import RunConfig, Settings
from act.exceptions import ConfigError, DocumentMismatchError
from act.services.evaluation_service import EvaluationService
from act.services.pipeline_service import PipelineService
from act.services.storage_service import StorageService

DEFAULT_THRESHOLDS = "0,5,10,15,20,25,30,35,40"


def get_storage_service() -> StorageService:
    return StorageService()


def get_evaluation_service(settings: Settings, storage: StorageService) -> EvaluationService:
    return EvaluationService(settings.matching, storage)


def parse_thresholds(raw: str) -> List[float]:
    try:
        values = [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--thresholds expects comma separated numbers, got {raw!r}")
    if not values:
        raise ConfigError("--thresholds is empty")
    return values


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("sweep", parents=parents, help="Precision/recall over a range of thresholds")
    parser.add_argument("index", type=Path)
    parser.add_argument("target", type=Path)
    parser.add_argument("gt", type=Path)
    parser.add_argument("--thresholds", default=DEFAULT_THRESHOLDS, help="Comma separated score thresholds")
    parser.add_argument("-o", "--out", type=Path, required=True, help="CSV file for the curve")
    parser.add_argument("--doc", help="Document id (default: target file name without suffix)")
    parser.set_defaults(handler=cmd_sweep)


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    """Write the sweep curve as CSV; print the best threshold as JSON."""
    thresholds = parse_thresholds(args.thresholds)
    run = RunConfig(index=args.index, target=args.target, gt=args.gt, output=args.out, settings=settings)
    storage = get_storage_service()
    evaluation = get_evaluation_service(settings, storage)

    index = storage.load_index(run.index)
    doc = args.doc or run.target.stem
    annotated = evaluation.load_ground_truth(run.gt)
    gt = [entry for entry in annotated if entry.doc == doc]
    if annotated and not gt:
        raise DocumentMismatchError(f"Ground truth {run.gt} has no entries for document {doc!r}")
    _, scored = PipelineService(index, settings).score(storage.read_text(run.target), doc, progress=args.progress)

    result = evaluation.sweep(scored, gt, thresholds, settings.inference)
    evaluation.write_sweep_csv(result, run.output)
    print(json.dumps({"best_threshold": result.best_threshold, "best_f1": result.best_f1}, sort_keys=True))
    return 0
