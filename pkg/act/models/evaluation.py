from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_serializer, field_validator

from act.models.corpus import VerseId
from act.models.quotation import QuotationStyle


class GroundTruthEntry(BaseModel):
    """One annotated quotation (or one fragment of a wave/echo/compound)."""

    doc: str = Field(..., min_length=1)
    s_start: int = Field(..., ge=0)
    s_size: int = Field(..., ge=1)
    b_verse: VerseId
    b_start: int = Field(..., ge=0)
    b_size: int = Field(..., ge=1)
    style: QuotationStyle = QuotationStyle.SIMPLE

    @field_validator("b_verse", mode="before")
    @classmethod
    def _parse_reference(cls, value):
        if isinstance(value, str):
            return VerseId.parse(value)
        return value

    @field_serializer("b_verse")
    def _serialize_reference(self, value: VerseId) -> str:
        return str(value)

    @property
    def s_end(self) -> int:
        return self.s_start + self.s_size

    def key(self) -> Tuple[str, int, VerseId, int]:
        return (self.doc, self.s_start, self.b_verse, self.b_start)


class MatchPolicy(BaseModel):
    min_source_overlap: float = Field(0.5, gt=0.0, le=1.0, description="Minimum intersection over union of target spans")
    require_verse_equality: bool = True

    class Config:
        frozen = True


class StyleCounts(BaseModel):
    tp: int = 0
    fp: int = 0
    fn: int = 0


class MatchResult(BaseModel):
    tp: int
    fp: int
    fn: int
    # (detected index, ground truth index, overlap)
    pairs: List[Tuple[int, int, float]] = Field(default_factory=list)


class EvalReport(BaseModel):
    doc: Optional[str] = None
    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    precision: float = Field(0.0, ge=0.0, le=1.0)
    recall: float = Field(0.0, ge=0.0, le=1.0)
    f1: float = Field(0.0, ge=0.0, le=1.0)
    per_style: Dict[str, StyleCounts] = Field(default_factory=dict)
    style_distribution: Dict[str, float] = Field(default_factory=dict)
    style_agreement: float = Field(0.0, ge=0.0, le=1.0, description="Share of true positives with the annotated style")
    style_confusion: Dict[str, int] = Field(
        default_factory=dict, description="'annotated->detected' pair counts over true positives"
    )
    compound_count: int = Field(0, ge=0)


class SweepRow(BaseModel):
    threshold: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


class SweepResult(BaseModel):
    rows: List[SweepRow]
    best_threshold: Optional[float] = None
    best_f1: float = 0.0


class AveragedMetrics(BaseModel):
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


class DocumentsReport(BaseModel):
    documents: Dict[str, EvalReport] = Field(default_factory=dict)
    micro: EvalReport = Field(default_factory=EvalReport)
    macro: AveragedMetrics = Field(default_factory=AveragedMetrics)
