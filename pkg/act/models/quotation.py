from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_serializer, field_validator

from act.models.corpus import VerseId


class QuotationStyle(str, Enum):
    SIMPLE = "simple"
    WAVE = "wave"
    ECHO = "echo"
    COMPOUND = "compound"


class InferenceParams(BaseModel):
    score_threshold: float = Field(21.0, description="Quotations scoring below this are discarded")
    neighbor_window: int = Field(150, ge=0, description="Max intervening target words between linked fragments")
    enrichment: bool = Field(True, description="Boost, label and prune; off runs the first two stages only")

    class Config:
        frozen = True


class Quotation(BaseModel):
    doc: Optional[str] = None
    s_start: int = Field(..., ge=0)
    s_size: int = Field(..., ge=1)
    b_verse: VerseId
    b_start: int = Field(..., ge=0)
    b_size: int = Field(..., ge=1)
    score: float = Field(0.0, ge=0.0)
    base_score: float = Field(0.0, ge=0.0, description="Own surprisal before group boosting")
    style: QuotationStyle = QuotationStyle.SIMPLE
    group_id: Optional[int] = None
    parent_group_id: Optional[int] = None
    role: Optional[Literal["head", "tail", "fragment"]] = None
    char_start: Optional[int] = None
    char_end: Optional[int] = None

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

    @property
    def b_end(self) -> int:
        return self.b_start + self.b_size
