import argparse
from pathlib import Path

from act.config import RunConfig, Settings
from act.models.corpus import PositionalIndex
from act.services.pipeline_service import PipelineService
from act.services.storage_service import StorageService


def get_storage_service() -> StorageService:
    return StorageService()


def get_pipeline_service(index: PositionalIndex, settings: Settings) -> PipelineService:
    return PipelineService(index, settings)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("detect", parents=parents, help="Detect quotations in a target text")
    parser.add_argument("index", type=Path, help="Index file written by 'act index'")
    parser.add_argument("target", type=Path, help="UTF-8 target text")
    parser.add_argument("-o", "--out", type=Path, required=True, help="Quotations JSON-lines file to write")
    parser.add_argument("--doc", help="Document id (default: target file name without suffix)")
    parser.set_defaults(handler=cmd_detect)


def cmd_detect(args: argparse.Namespace, settings: Settings) -> int:
    run = RunConfig(index=args.index, target=args.target, output=args.out, settings=settings)
    storage = get_storage_service()
    index = storage.load_index(run.index)
    pipeline = get_pipeline_service(index, settings)

    doc = args.doc or run.target.stem
    quotations = pipeline.detect(storage.read_text(run.target), doc, progress=args.progress)
    storage.write_jsonl(run.output, quotations)
    print(f"{len(quotations)} quotations written to {run.output}")
    return 0
