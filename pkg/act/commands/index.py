import argparse
from pathlib import Path

from act.config import RunConfig, Settings
from act.services.index_service import IndexService
from act.services.storage_service import StorageService


def get_index_service(settings: Settings) -> IndexService:
    """Index service configured with the active normalization and book order."""
    return IndexService(settings.normalization, settings.canonical_order())


def get_storage_service() -> StorageService:
    return StorageService()


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("index", parents=parents, help="Build a positional index from a verse corpus")
    parser.add_argument("corpus", type=Path, help="JSON-lines corpus, one verse per line")
    parser.add_argument("-o", "--out", type=Path, required=True, help="Index file to write")
    parser.set_defaults(handler=cmd_index)


def cmd_index(args: argparse.Namespace, settings: Settings) -> int:
    """Ingest the corpus, build the index, persist it and print its statistics."""
    run = RunConfig(corpus=args.corpus, index=args.out, index_is_output=True, settings=settings)
    index_service = get_index_service(settings)
    index = index_service.build_index(index_service.ingest_corpus(run.corpus))
    get_storage_service().save_index(index, run.index)

    print(f"verses\t{len(index)}")
    print(f"tokens\t{index.total_tokens}")
    print(f"vocabulary\t{index.vocabulary_size}")
    print(f"fingerprint\t{index.corpus_fingerprint}")
    return 0
