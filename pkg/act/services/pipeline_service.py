import logging
from typing import List, Optional, Sequence, Tuple

from act.config import Settings
from act.models.candidate import CandidateSequence
from act.models.corpus import PositionalIndex
from act.models.quotation import Quotation
from act.models.text import Token
from act.services.detection_service import CandidateDetector
from act.services.inference_service import InferenceService
from act.services.normalize_service import NormalizeService

logger = logging.getLogger(__name__)


class PipelineService:
    """Normalize a target text, find candidates and turn them into quotations."""

    def __init__(self, index: PositionalIndex, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.index = index
        self.normalizer = NormalizeService(self.settings.normalization)
        self.detector = CandidateDetector(
            index,
            self.settings.normalization,
            self.settings.alignment,
            self.settings.detection,
        )
        self.inference = InferenceService(index, self.settings.inference)

    def tokenize(self, content: str, doc: str) -> List[Token]:
        return self.normalizer.normalize_content(content, source_id=doc)

    def candidates(self, tokens: Sequence[Token], progress: bool = False) -> CandidateSequence:
        return self.detector.detect_candidates(tokens, jobs=self.settings.jobs, progress=progress)

    def score(self, content: str, doc: str, progress: bool = False) -> Tuple[List[Token], List[Quotation]]:
        """Tokens of the target and its quotations before pruning."""
        tokens = self.tokenize(content, doc)
        logger.info("Target %s: %d tokens", doc, len(tokens))
        scored = self.inference.score_candidates(self.candidates(tokens, progress))
        return tokens, attach_document(scored, tokens, doc)

    def detect(self, content: str, doc: str, progress: bool = False) -> List[Quotation]:
        _, scored = self.score(content, doc, progress)
        quotations = self.inference.finalize(scored)
        logger.info("Detected %d quotations in %s", len(quotations), doc)
        return quotations


def attach_document(quotations: List[Quotation], tokens: Sequence[Token], doc: str) -> List[Quotation]:
    """Set the document id and the character offsets of each target span."""
    annotated = []
    for quotation in quotations:
        first = tokens[quotation.s_start]
        last = tokens[quotation.s_end - 1]
        annotated.append(
            quotation.model_copy(
                update={"doc": doc, "char_start": first.char_span[0], "char_end": last.char_span[1]}
            )
        )
    return annotated
