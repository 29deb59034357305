import argparse
import json
from pathlib import Path

from act.config import RunConfig, Settings
from act.services.evaluation_service import EvaluationService, report_table
from act.services.storage_service import StorageService


def get_evaluation_service(settings: Settings) -> EvaluationService:
    return EvaluationService(settings.matching, StorageService())


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("eval", parents=parents, help="Score detected quotations against ground truth")
    parser.add_argument("detected", type=Path, help="Quotations JSON-lines file")
    parser.add_argument("gt", type=Path, help="Ground truth JSON-lines file")
    parser.add_argument("-o", "--out", type=Path, help="Also write the report as JSON")
    parser.set_defaults(handler=cmd_eval)


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    """Print P/R/F1 and the per-style breakdown.

    Ground truth covering several documents is reported per document with
    micro and macro averages.
    """
    run = RunConfig(detected=args.detected, gt=args.gt, output=args.out, settings=settings)
    evaluation = get_evaluation_service(settings)
    detected = evaluation.load_quotations(run.detected)
    gt = evaluation.load_ground_truth(run.gt)

    if len({entry.doc for entry in gt}) > 1:
        report = evaluation.evaluate_documents(detected, gt)
        for doc, doc_report in report.documents.items():
            print(f"== {doc}")
            print(report_table(doc_report))
            print()
        print(f"== micro\n{report_table(report.micro)}\n")
        print(f"== macro\nprecision {report.macro.precision:.3f}  recall {report.macro.recall:.3f}  "
              f"f1 {report.macro.f1:.3f}")
    else:
        report = evaluation.evaluate(detected, gt)
        print(report_table(report))

    if run.output is not None:
        evaluation.storage.write_json(run.output, json.loads(report.model_dump_json()))
    return 0
