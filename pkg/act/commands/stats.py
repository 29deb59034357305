import argparse
from pathlib import Path

from act.config import RunConfig, Settings
from act.models.quotation import QuotationStyle
from act.services.evaluation_service import EvaluationService, distribution_table, style_distribution
from act.services.storage_service import StorageService


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("stats", parents=parents, help="Style distribution of a quotations file")
    parser.add_argument("quotations", type=Path, help="Detected quotations or ground truth, JSON-lines")
    parser.add_argument("-o", "--out", type=Path, help="Also write the distribution as JSON")
    parser.set_defaults(handler=cmd_stats)


def cmd_stats(args: argparse.Namespace, settings: Settings) -> int:
    run = RunConfig(detected=args.quotations, output=args.out, settings=settings)
    evaluation = EvaluationService(settings.matching, StorageService())
    quotations = evaluation.load_quotations(run.detected)

    distribution = style_distribution(quotations)
    compound = sum(1 for q in quotations if q.style == QuotationStyle.COMPOUND)
    print(distribution_table(distribution))
    print(f"\nquotations {len(quotations)}  compound {compound}")
    if run.output is not None:
        evaluation.storage.write_json(
            run.output, {"distribution": distribution, "count": len(quotations), "compound_count": compound}
        )
    return 0
