import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from act.exceptions import ACTException, DocumentMismatchError, GroundTruthError
from act.models.evaluation import (
    AveragedMetrics,
    DocumentsReport,
    EvalReport,
    GroundTruthEntry,
    MatchPolicy,
    MatchResult,
    StyleCounts,
    SweepResult,
    SweepRow,
)
from act.models.quotation import InferenceParams, Quotation, QuotationStyle
from act.services.inference_service import label_compound, prune
from act.services.storage_service import StorageService, atomic_write

logger = logging.getLogger(__name__)

# three-row view: compound groups are reported under wave
DISTRIBUTION_STYLES = (QuotationStyle.SIMPLE, QuotationStyle.ECHO, QuotationStyle.WAVE)

Styled = Union[Quotation, GroundTruthEntry]


def compute_metrics(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    """Precision, recall and F1; every ratio with a zero denominator is 0."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def span_overlap(a_start: int, a_size: int, b_start: int, b_size: int) -> float:
    """Word-level intersection over union of two half-open spans."""
    intersection = min(a_start + a_size, b_start + b_size) - max(a_start, b_start)
    if intersection <= 0:
        return 0.0
    union = max(a_start + a_size, b_start + b_size) - min(a_start, b_start)
    return intersection / union


def _check_single_document(detected: Sequence[Quotation], gt: Sequence[GroundTruthEntry]) -> Optional[str]:
    documents = {entry.doc for entry in gt} | {q.doc for q in detected if q.doc is not None}
    if len(documents) > 1:
        raise DocumentMismatchError(f"Expected one document, got {', '.join(sorted(documents))}")
    return next(iter(documents), None)


def match_quotations(
    detected: Sequence[Quotation],
    gt: Sequence[GroundTruthEntry],
    policy: Optional[MatchPolicy] = None,
) -> MatchResult:
    """Greedy one-to-one matching of detections to annotations.

    Detections are visited in target order. Each takes the unmatched
    annotation of the same verse with the largest span overlap, provided the
    overlap reaches ``min_source_overlap``; ties go to the earliest annotation.

    Raises:
        DocumentMismatchError: The two lists describe different documents.
    """
    policy = policy or MatchPolicy()
    _check_single_document(detected, gt)

    visit_order = sorted(range(len(detected)), key=lambda k: (detected[k].s_start, detected[k].s_size, k))
    matched_gt = set()
    pairs: List[Tuple[int, int, float]] = []
    for d in visit_order:
        quotation = detected[d]
        best: Optional[Tuple[float, int, int, int]] = None
        for g, entry in enumerate(gt):
            if g in matched_gt:
                continue
            if policy.require_verse_equality and entry.b_verse != quotation.b_verse:
                continue
            overlap = span_overlap(quotation.s_start, quotation.s_size, entry.s_start, entry.s_size)
            if overlap < policy.min_source_overlap:
                continue
            candidate = (-overlap, entry.s_start, entry.b_start, g)
            if best is None or candidate < best:
                best = candidate
        if best is not None:
            matched_gt.add(best[3])
            pairs.append((d, best[3], -best[0]))

    pairs.sort()
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(detected) - tp, fn=len(gt) - tp, pairs=pairs)


def style_distribution(quotations: Iterable[Styled]) -> Dict[str, float]:
    """Fraction of quotations per style, compound folded into wave; zero rows omitted."""
    counts: Counter = Counter()
    for quotation in quotations:
        style = QuotationStyle.WAVE if quotation.style == QuotationStyle.COMPOUND else quotation.style
        counts[style] += 1
    total = sum(counts.values())
    if not total:
        return {}
    return {style.value: counts[style] / total for style in DISTRIBUTION_STYLES if counts[style]}


def evaluate(
    detected: Sequence[Quotation],
    gt: Sequence[GroundTruthEntry],
    policy: Optional[MatchPolicy] = None,
) -> EvalReport:
    doc = _check_single_document(detected, gt)
    result = match_quotations(detected, gt, policy)
    precision, recall, f1 = compute_metrics(result.tp, result.fp, result.fn)

    per_style: Dict[str, StyleCounts] = {}

    def bucket(style: QuotationStyle) -> StyleCounts:
        return per_style.setdefault(style.value, StyleCounts())

    matched_detected = {d for d, _, _ in result.pairs}
    matched_gt = {g for _, g, _ in result.pairs}
    confusion: Counter = Counter()
    agreeing = 0
    for d, g, _ in result.pairs:
        bucket(gt[g].style).tp += 1
        confusion[f"{gt[g].style.value}->{detected[d].style.value}"] += 1
        agreeing += gt[g].style == detected[d].style
    for d, quotation in enumerate(detected):
        if d not in matched_detected:
            bucket(quotation.style).fp += 1
    for g, entry in enumerate(gt):
        if g not in matched_gt:
            bucket(entry.style).fn += 1

    return EvalReport(
        doc=doc,
        tp=result.tp,
        fp=result.fp,
        fn=result.fn,
        precision=precision,
        recall=recall,
        f1=f1,
        per_style=dict(sorted(per_style.items())),
        style_distribution=style_distribution(detected),
        style_agreement=agreeing / result.tp if result.tp else 0.0,
        style_confusion=dict(sorted(confusion.items())),
        compound_count=sum(1 for q in detected if q.style == QuotationStyle.COMPOUND),
    )


def threshold_sweep(
    candidates: Sequence[Quotation],
    gt: Sequence[GroundTruthEntry],
    thresholds: Iterable[float],
    policy: Optional[MatchPolicy] = None,
    inference: Optional[InferenceParams] = None,
) -> SweepResult:
    """Prune the pre-prune ``candidates`` at every threshold and evaluate.

    Rows come out in ascending threshold order whatever the input order. The
    best threshold is the one with the highest F1, the smaller one on ties.
    """
    inference = inference or InferenceParams()
    rows: List[SweepRow] = []
    for threshold in sorted(set(thresholds)):
        kept = label_compound(prune(list(candidates), inference.model_copy(update={"score_threshold": threshold})))
        result = match_quotations(kept, gt, policy)
        precision, recall, f1 = compute_metrics(result.tp, result.fp, result.fn)
        rows.append(
            SweepRow(threshold=threshold, precision=precision, recall=recall, f1=f1,
                     tp=result.tp, fp=result.fp, fn=result.fn)
        )
        logger.debug("threshold %g: P=%.3f R=%.3f F1=%.3f", threshold, precision, recall, f1)

    best = max(rows, key=lambda row: (row.f1, -row.threshold), default=None)
    return SweepResult(
        rows=rows,
        best_threshold=best.threshold if best is not None else None,
        best_f1=best.f1 if best is not None else 0.0,
    )


def evaluate_documents(
    detected: Sequence[Quotation],
    gt: Sequence[GroundTruthEntry],
    policy: Optional[MatchPolicy] = None,
) -> DocumentsReport:
    """Per-document reports plus micro (pooled counts) and macro (mean) averages."""
    documents = sorted({entry.doc for entry in gt} | {q.doc for q in detected if q.doc is not None})
    if any(q.doc is None for q in detected) and len(documents) > 1:
        raise DocumentMismatchError("Detections without a document id can not be split across several documents")

    reports: Dict[str, EvalReport] = {}
    for doc in documents:
        doc_detected = [q for q in detected if q.doc in (doc, None)]
        doc_gt = [entry for entry in gt if entry.doc == doc]
        reports[doc] = evaluate(doc_detected, doc_gt, policy)

    tp = sum(report.tp for report in reports.values())
    fp = sum(report.fp for report in reports.values())
    fn = sum(report.fn for report in reports.values())
    precision, recall, f1 = compute_metrics(tp, fp, fn)
    micro = EvalReport(
        tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1,
        style_distribution=style_distribution(detected),
        compound_count=sum(report.compound_count for report in reports.values()),
    )
    macro = AveragedMetrics()
    if reports:
        count = len(reports)
        macro = AveragedMetrics(
            precision=sum(r.precision for r in reports.values()) / count,
            recall=sum(r.recall for r in reports.values()) / count,
            f1=sum(r.f1 for r in reports.values()) / count,
        )
    return DocumentsReport(documents=reports, micro=micro, macro=macro)


class EvaluationService:
    def __init__(self, policy: Optional[MatchPolicy] = None, storage: Optional[StorageService] = None):
        self.policy = policy or MatchPolicy()
        self.storage = storage or StorageService()

    def load_ground_truth(self, path: Union[str, Path]) -> List[GroundTruthEntry]:
        """Read a ground-truth JSON-lines file.

        Raises:
            InputNotFoundError: The file does not exist.
            GroundTruthError: A line is malformed or an entry repeats
                (doc, s_start, b_verse, b_start).
        """
        entries: List[GroundTruthEntry] = []
        seen = set()
        try:
            for line_number, payload in self.storage.read_jsonl(path):
                try:
                    entry = GroundTruthEntry.model_validate(payload)
                except (ValidationError, ValueError) as e:
                    raise GroundTruthError(f"{path}: line {line_number}: {e}")
                if entry.key() in seen:
                    raise GroundTruthError(f"{path}: line {line_number}: duplicate entry {entry.key()}")
                seen.add(entry.key())
                entries.append(entry)
        except ACTException:
            raise
        except Exception as e:
            raise GroundTruthError(f"Error reading ground truth {path}: {str(e)}")
        logger.info("Loaded %d ground truth entries from %s", len(entries), path)
        return entries

    def load_quotations(self, path: Union[str, Path]) -> List[Quotation]:
        quotations = []
        for line_number, payload in self.storage.read_jsonl(path):
            try:
                quotations.append(Quotation.model_validate(payload))
            except (ValidationError, ValueError) as e:
                raise ACTException(f"{path}: line {line_number}: {e}", exit_code=3)
        return quotations

    def evaluate(self, detected: Sequence[Quotation], gt: Sequence[GroundTruthEntry]) -> EvalReport:
        return evaluate(detected, gt, self.policy)

    def evaluate_documents(self, detected: Sequence[Quotation], gt: Sequence[GroundTruthEntry]) -> DocumentsReport:
        return evaluate_documents(detected, gt, self.policy)

    def sweep(
        self,
        candidates: Sequence[Quotation],
        gt: Sequence[GroundTruthEntry],
        thresholds: Iterable[float],
        inference: Optional[InferenceParams] = None,
    ) -> SweepResult:
        return threshold_sweep(candidates, gt, thresholds, self.policy, inference)

    def write_sweep_csv(self, result: SweepResult, path: Union[str, Path]) -> Path:
        frame = pd.DataFrame(
            [row.model_dump() for row in result.rows],
            columns=["threshold", "precision", "recall", "f1", "tp", "fp", "fn"],
        )
        with atomic_write(path) as handle:
            frame.to_csv(handle, index=False)
        return Path(path)


def report_table(report: EvalReport) -> str:
    """Plain-text P/R/F1 table followed by the per-style breakdown."""
    summary = pd.DataFrame(
        [{"tp": report.tp, "fp": report.fp, "fn": report.fn, "precision": report.precision,
          "recall": report.recall, "f1": report.f1}]
    )
    styles = pd.DataFrame(
        [{"style": style, **counts.model_dump()} for style, counts in report.per_style.items()],
        columns=["style", "tp", "fp", "fn"],
    )
    return (
        summary.to_string(index=False, float_format="%.3f")
        + "\n\n"
        + styles.to_string(index=False)
        + f"\n\nstyle agreement: {report.style_agreement:.3f}"
    )


def distribution_table(distribution: Dict[str, float]) -> str:
    frame = pd.DataFrame(
        [{"style": style, "fraction": fraction} for style, fraction in distribution.items()],
        columns=["style", "fraction"],
    )
    return frame.to_string(index=False, float_format="%.3f")
